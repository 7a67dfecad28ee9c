//! Trajectory checks: the Lyapunov envelope `Ψ(z_k) ≤ ρᵏC` and the
//! per-iteration descent inequality.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::problem::{distance_sq, objective_unchecked, CompositeProblem};
use crate::solver::Trace;

use super::certificate::{CertificateKind, RateCertificate};

/// `Ψ = (Φ − Φ*) + ((1−η₁)/(2α))·d²` from its parts.
pub fn lyapunov_from_parts(phi: f64, phi_star: f64, dist2: f64, alpha: f64, eta1: f64) -> f64 {
    (phi - phi_star) + (1.0 - eta1) / (2.0 * alpha) * dist2
}

/// `Ψ(z) = Φ(z) − Φ* + ((1−η₁)/(2α))‖z − x_ref‖²`; with `η₁ = 0` this is
/// the extrapolation-only variant with weight `1/(2α)`.
pub fn lyapunov(problem: &CompositeProblem, z: &[f64], alpha: f64, eta1: f64, x_ref: &[f64], phi_star: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    check_dim(problem.dimension(), z.len())?;
    check_dim(problem.dimension(), x_ref.len())?;
    Ok(lyapunov_from_parts(objective_unchecked(problem, z), phi_star, distance_sq(z, x_ref), alpha, eta1))
}

/// Relative slack on every envelope comparison.
const RELATIVE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub rho: f64,
    /// Envelope constant `C`.
    pub constant: f64,
    /// Number of iterations `k ≥ 1` checked.
    pub checked: usize,
    /// Iterations with `Ψ(z_k) > ρᵏC`.
    pub lyapunov_violations: Vec<usize>,
    /// Iterations with `Φ(z_k) − Φ* > ρᵏC`.
    pub gap_violations: Vec<usize>,
    /// Iterations with `‖z_k − x*‖² > (2α/(1−η₁))ρᵏC`.
    pub distance_violations: Vec<usize>,
    /// `max_k Ψ(z_k) / (ρᵏC)`.
    pub worst_ratio: f64,
    pub rounding_floor: f64,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.lyapunov_violations.is_empty() && self.gap_violations.is_empty() && self.distance_violations.is_empty()
    }

    /// `Ψ`-envelope only.
    pub fn lyapunov_passed(&self) -> bool {
        self.lyapunov_violations.is_empty()
    }
}

/// Checks a recorded trace against the certificate's envelope for all
/// `k ≥ 1`. The constant is `C = Ψ(z₁) + ρΨ(z₀) + ‖z₁ − z₀‖²/(4α)`, or
/// `C = Ψ(z₀)` for the heavy-ball-only certificate.
///
/// Each comparison allows a relative slack of `1e−8` plus an absolute floor
/// of `64ε(1 + |Φ*|)` for the cancellation in `Φ(z_k) − Φ*` once the
/// envelope has fallen to rounding level.
pub fn verify_theorem1_bound(trace: &Trace, cert: &RateCertificate) -> Result<BoundReport> {
    let phi_star = trace
        .phi_star()
        .ok_or_else(|| Error::invalid("trace has no reference optimum"))?;
    if trace.records.iter().any(|r| r.psi.is_nan() || r.phi.is_nan()) {
        return Err(Error::invalid("trace lacks objective and Lyapunov values"));
    }
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !same(trace.params.alpha, cert.alpha) || !same(trace.params.eta1, cert.eta1) || !same(trace.params.eta2, cert.eta2) {
        return Err(Error::invalid(format!(
            "certificate parameters (α={}, η₁={}, η₂={}) differ from the run's (α={}, η₁={}, η₂={})",
            cert.alpha, cert.eta1, cert.eta2, trace.params.alpha, trace.params.eta1, trace.params.eta2
        )));
    }
    let records = &trace.records;
    let constant = match (cert.variant, records.len()) {
        (CertificateKind::Corollary1, _) => records[0].psi,
        (_, n) if n >= 2 => records[1].psi + cert.rho * records[0].psi + records[1].step_norm2 / (4.0 * cert.alpha),
        _ => records[0].psi * (1.0 + cert.rho),
    };
    let floor = 64.0 * f64::EPSILON * (1.0 + phi_star.abs());
    let dist_scale = 2.0 * cert.alpha / (1.0 - cert.eta1);
    let mut report = BoundReport {
        rho: cert.rho,
        constant,
        checked: 0,
        lyapunov_violations: Vec::new(),
        gap_violations: Vec::new(),
        distance_violations: Vec::new(),
        worst_ratio: 0.0,
        rounding_floor: floor,
    };
    let mut envelope = constant;
    for r in records.iter().skip(1) {
        envelope *= cert.rho;
        let limit = envelope * (1.0 + RELATIVE_SLACK) + floor;
        if r.psi > limit {
            report.lyapunov_violations.push(r.k);
        }
        if r.phi - phi_star > limit {
            report.gap_violations.push(r.k);
        }
        if r.dist2 > dist_scale * limit {
            report.distance_violations.push(r.k);
        }
        if envelope > 0.0 {
            report.worst_ratio = report.worst_ratio.max(r.psi / envelope);
        }
        report.checked += 1;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentReport {
    /// Right side minus left side of the inequality, one entry per `k`.
    pub residuals: Vec<f64>,
    pub min_residual: f64,
    pub tolerance: f64,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.min_residual >= -self.tolerance
    }

    pub fn violations(&self) -> Vec<usize> {
        self.residuals
            .iter()
            .enumerate()
            .filter(|(_, r)| **r < -self.tolerance)
            .map(|(k, _)| k)
            .collect()
    }
}

/// Evaluates, for every recorded `k`, the one-step descent inequality at a
/// probe point `x`:
///
/// ```text
/// Φ(z_{k+1}) ≤ Φ(x) + (1+η₂)/(2α)‖x − z_k‖² − (1−η₁)/(2α)‖x − z_{k+1}‖²
///            − ‖z_{k+1} − z_k‖²/(4α) + (η₂ + 2η₂²)/(2α)‖z_k − z_{k−1}‖²
///            + L(τ+2)/2 · Σ_{j=k−τ−1}^{k} ‖z_{j+1} − z_j‖²
///            + η₁(1+η₂)²/α · Σ_{j=k−2}^{k−1} ‖z_{j+1} − z_j‖²
/// ```
///
/// with `z_j = z₀` for `j < 0`. Residuals below `−1e−9(1 + |Φ(x)|)` fail.
pub fn verify_descent_lemma(
    problem: &CompositeProblem,
    trace: &Trace,
    alpha: f64,
    eta1: f64,
    eta2: f64,
    tau: usize,
    x_probe: &[f64],
) -> Result<DescentReport> {
    check_dim(problem.dimension(), x_probe.len())?;
    if !(alpha > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    let z = &trace
        .iterates
        .as_ref()
        .ok_or_else(|| Error::InsufficientHistory("trace was recorded without iterates".into()))?
        .z;
    if z.is_empty() {
        return Err(Error::InsufficientHistory("no iterates recorded".into()));
    }
    if trace.tau > tau {
        return Err(Error::invalid(format!("run used delays up to {} but τ = {tau} was given", trace.tau)));
    }
    // s[j] = ‖z_{j+1} − z_j‖², prefix[j] = s[0] + … + s[j−1].
    let steps: Vec<f64> = z.windows(2).map(|p| distance_sq(&p[1], &p[0])).collect();
    let mut prefix = vec![0.0; steps.len() + 1];
    for (j, s) in steps.iter().enumerate() {
        prefix[j + 1] = prefix[j] + s;
    }
    // Σ_{j=lo}^{hi} s[j] with s[j] = 0 for j < 0.
    let range_sum = |lo: isize, hi: isize| -> f64 {
        if hi < 0 || hi < lo {
            return 0.0;
        }
        let lo = lo.max(0) as usize;
        prefix[hi as usize + 1] - prefix[lo]
    };
    let step_at = |j: isize| if j < 0 { 0.0 } else { steps[j as usize] };

    let phi_x = objective_unchecked(problem, x_probe);
    let l = problem.total_lipschitz();
    let delta1_coef = l * (tau as f64 + 2.0) / 2.0;
    let delta2_coef = eta1 * (1.0 + eta2).powi(2) / alpha;
    let inv2a = 1.0 / (2.0 * alpha);
    let mut residuals = Vec::with_capacity(steps.len());
    for k in 0..steps.len() {
        let ki = k as isize;
        let lhs = objective_unchecked(problem, &z[k + 1]);
        let rhs = phi_x + (1.0 + eta2) * inv2a * distance_sq(x_probe, &z[k])
            - (1.0 - eta1) * inv2a * distance_sq(x_probe, &z[k + 1])
            - steps[k] / (4.0 * alpha)
            + (eta2 + 2.0 * eta2 * eta2) * inv2a * step_at(ki - 1)
            + delta1_coef * range_sum(ki - tau as isize - 1, ki)
            + delta2_coef * range_sum(ki - 2, ki - 1);
        residuals.push(rhs - lhs);
    }
    let min_residual = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DescentReport { residuals, min_residual, tolerance: 1e-9 * (1.0 + phi_x.abs()) })
}
