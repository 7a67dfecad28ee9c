use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::Method;

/// Problem constants a certificate is computed from.
///
/// `c1` is the inertial fraction: the heavy-ball weight is `η₁ = C₁αβ`. A
/// second fraction `C₂` with `η₂ = C₂αβ` appears in the analysis, but here
/// `η₂` is passed directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    #[serde(rename = "L")]
    pub lipschitz: f64,
    pub beta: f64,
    pub tau: usize,
    #[serde(rename = "C1", default)]
    pub c1: f64,
}

impl RateInputs {
    /// Inputs for the general scheme, requiring `0 ≤ C₁ < ½`.
    pub fn new(lipschitz: f64, beta: f64, tau: usize, c1: f64) -> Result<Self> {
        let inputs = Self { lipschitz, beta, tau, c1 };
        inputs.check_constants()?;
        if !(0.0..0.5).contains(&c1) {
            return Err(Error::invalid(format!("C1 must lie in [0, 1/2), got {c1}")));
        }
        Ok(inputs)
    }

    fn check_constants(&self) -> Result<()> {
        if !(self.lipschitz.is_finite() && self.lipschitz > 0.0) {
            return Err(Error::invalid(format!("L must be positive, got {}", self.lipschitz)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::invalid(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    /// `Q = L/β`.
    pub fn condition_ratio(&self) -> f64 {
        self.lipschitz / self.beta
    }

    /// `β / (16C₁β + 2L(τ+2))`, the constant inside the default step bound.
    /// Unrelated to the number of workers.
    pub fn rate_w(&self) -> f64 {
        self.beta / (16.0 * self.c1 * self.beta + 2.0 * self.lipschitz * (self.tau as f64 + 2.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// General scheme, step bound with exponent `1/(τ+3)`.
    Theorem1Stated,
    /// General scheme, the larger step bound the argument actually needs.
    Theorem1ProofTight,
    /// Heavy-ball only (`η₂ = 0`).
    Corollary1,
    /// Extrapolation only (`η₁ = 0`).
    Corollary2,
}

impl CertificateKind {
    pub fn short_name(self) -> &'static str {
        match self {
            CertificateKind::Theorem1Stated => "t1",
            CertificateKind::Theorem1ProofTight => "t1tight",
            CertificateKind::Corollary1 => "cor1",
            CertificateKind::Corollary2 => "cor2",
        }
    }
}

impl FromStr for CertificateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t1" | "theorem1_stated" => Ok(CertificateKind::Theorem1Stated),
            "t1tight" | "theorem1_proof_tight" => Ok(CertificateKind::Theorem1ProofTight),
            "cor1" | "corollary1" => Ok(CertificateKind::Corollary1),
            "cor2" | "corollary2" => Ok(CertificateKind::Corollary2),
            _ => Err(Error::invalid(format!("unknown certificate variant '{s}' (expected t1, t1tight, cor1 or cor2)"))),
        }
    }
}

/// Parameters with their guaranteed rate. `constant` (the `C` of the
/// envelope `ρᵏC`) depends on the first iterates and is filled in by the
/// trace verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub variant: CertificateKind,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    pub beta: f64,
    pub tau: usize,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub alpha0: f64,
    pub alpha: f64,
    pub eta1: f64,
    /// Upper end of the admissible `η₂` interval; negative when `α` is too
    /// large for any extrapolation.
    pub eta2_max: f64,
    pub eta2: f64,
    pub rho: f64,
    #[serde(rename = "C")]
    pub constant: Option<f64>,
    pub admissible: bool,
    pub rate_w: f64,
    pub alpha0_stated: f64,
    pub alpha0_proof_tight: f64,
    /// Heavy-ball only: `1 − (1−C₁)/((1+Q(τ+1))(τ+1))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplified_factor: Option<f64>,
}

impl RateCertificate {
    /// Coefficient of `‖z − x*‖²` in the Lyapunov function.
    pub fn lyapunov_weight(&self) -> f64 {
        (1.0 - self.eta1) / (2.0 * self.alpha)
    }

    /// `ρᵏ C`, once the constant is known.
    pub fn envelope(&self, k: usize) -> Option<f64> {
        self.constant.map(|c| self.rho.powi(k as i32) * c)
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = Some(constant);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `((W+1)^{1/(τ+3)} − 1)/β`.
pub fn alpha0_stated(inputs: &RateInputs) -> f64 {
    let exponent = 1.0 / (inputs.tau as f64 + 3.0);
    (inputs.rate_w().ln_1p() * exponent).exp_m1() / inputs.beta
}

/// The step bound under which the admissible `η₂` interval is nonempty:
/// exponent `1/(τ+2)` for `τ ≥ 1`, and for `τ = 0` the cube-root bound
/// `((β/(4L+16C₁β) + 1)^{1/3} − 1)/β`.
pub fn alpha0_proof_tight(inputs: &RateInputs) -> f64 {
    let (w, exponent) = if inputs.tau == 0 {
        (inputs.beta / (4.0 * inputs.lipschitz + 16.0 * inputs.c1 * inputs.beta), 1.0 / 3.0)
    } else {
        (inputs.rate_w(), 1.0 / (inputs.tau as f64 + 2.0))
    };
    (w.ln_1p() * exponent).exp_m1() / inputs.beta
}

/// Upper end of the `η₂` interval at step `α`:
/// `min{αβ/2, (1/(1+(1−C₁)αβ))·(¼ − K((αβ+1)^p − 1))}` with
/// `K = (L(τ+2)+8C₁β)/(2β)`, `p = τ+2` for `τ ≥ 1` and
/// `K = (L+4C₁β)/β`, `p = 3` for `τ = 0`.
pub fn eta2_upper_bound(inputs: &RateInputs, alpha: f64) -> f64 {
    let ab = alpha * inputs.beta;
    let (l, b, c1, tau) = (inputs.lipschitz, inputs.beta, inputs.c1, inputs.tau as f64);
    let (k, p) = if inputs.tau == 0 {
        ((l + 4.0 * c1 * b) / b, 3.0)
    } else {
        ((l * (tau + 2.0) + 8.0 * c1 * b) / (2.0 * b), tau + 2.0)
    };
    let growth = (p * ab.ln_1p()).exp_m1();
    let bracket = (0.25 - k * growth) / (1.0 + (1.0 - c1) * ab);
    bracket.min(ab / 2.0)
}

fn rate(alpha: f64, beta: f64, eta1: f64, eta2: f64) -> f64 {
    (1.0 + eta2) / (1.0 + alpha * beta - eta1)
}

fn check_step(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {alpha}")));
    }
    Ok(())
}

// Both step bounds are computed in floating point; a step equal to the bound
// up to a few ulps counts as within it.
fn within(alpha: f64, bound: f64) -> bool {
    alpha <= bound * (1.0 + 1e-12)
}

/// General-scheme certificate at `α = α₀` with the largest admissible `η₂`.
pub fn theorem1_params(inputs: &RateInputs, kind: CertificateKind) -> Result<RateCertificate> {
    let alpha = match kind {
        CertificateKind::Theorem1Stated => alpha0_stated(inputs),
        CertificateKind::Theorem1ProofTight => alpha0_proof_tight(inputs),
        _ => return Err(Error::invalid("theorem1_params takes a theorem1 variant")),
    };
    let eta2 = eta2_upper_bound(inputs, alpha).max(0.0);
    theorem1_at(inputs, kind, alpha, eta2)
}

/// General-scheme certificate at a chosen `α` and `η₂`; `η₁ = min{C₁αβ, 1}`.
/// Parameters outside the admissible region still produce a certificate,
/// marked inadmissible.
pub fn theorem1_at(inputs: &RateInputs, kind: CertificateKind, alpha: f64, eta2: f64) -> Result<RateCertificate> {
    RateInputs::new(inputs.lipschitz, inputs.beta, inputs.tau, inputs.c1)?;
    check_step(alpha)?;
    let alpha0_stated = alpha0_stated(inputs);
    let alpha0_proof_tight = alpha0_proof_tight(inputs);
    let alpha0 = match kind {
        CertificateKind::Theorem1Stated => alpha0_stated,
        CertificateKind::Theorem1ProofTight => alpha0_proof_tight,
        _ => return Err(Error::invalid("theorem1_at takes a theorem1 variant")),
    };
    let eta1 = (inputs.c1 * alpha * inputs.beta).min(1.0);
    let mut eta2_max = eta2_upper_bound(inputs, alpha);
    let step_ok = within(alpha, alpha0);
    if step_ok && eta2_max < 0.0 && eta2_max > -1e-12 {
        // At α = α₀ the bracket vanishes exactly; rounding may leave it a hair below zero.
        eta2_max = 0.0;
    }
    let admissible = step_ok && (0.0..=eta2_max).contains(&eta2) && eta1 + eta2 < alpha * inputs.beta;
    Ok(RateCertificate {
        variant: kind,
        lipschitz: inputs.lipschitz,
        beta: inputs.beta,
        tau: inputs.tau,
        c1: inputs.c1,
        alpha0,
        alpha,
        eta1,
        eta2_max,
        eta2,
        rho: rate(alpha, inputs.beta, eta1, eta2),
        constant: None,
        admissible,
        rate_w: inputs.rate_w(),
        alpha0_stated,
        alpha0_proof_tight,
        simplified_factor: None,
    })
}

fn corollary1_alpha0(inputs: &RateInputs) -> f64 {
    let (l, b, c1, t) = (inputs.lipschitz, inputs.beta, inputs.c1, inputs.tau as f64 + 1.0);
    let inner = (1.0 - c1) * b / (l * t + c1 * b);
    (inner.ln_1p() / t).exp_m1() / ((1.0 - c1) * b)
}

/// Heavy-ball-only certificate at `α = α₀`; allows `0 ≤ C₁ < 1`.
pub fn corollary1_params(inputs: &RateInputs) -> Result<RateCertificate> {
    corollary1_at(inputs, corollary1_alpha0(inputs))
}

/// Heavy-ball-only certificate at a chosen `α`: `η₁ = C₁αβ`, `η₂ = 0`,
/// `ρ = 1/(1+(1−C₁)αβ)`, envelope constant `Ψ(z₀)`.
pub fn corollary1_at(inputs: &RateInputs, alpha: f64) -> Result<RateCertificate> {
    inputs.check_constants()?;
    if !(0.0..1.0).contains(&inputs.c1) {
        return Err(Error::invalid(format!("C1 must lie in [0, 1), got {}", inputs.c1)));
    }
    check_step(alpha)?;
    let alpha0 = corollary1_alpha0(inputs);
    let eta1 = inputs.c1 * alpha * inputs.beta;
    let t = inputs.tau as f64 + 1.0;
    let simplified = 1.0 - (1.0 - inputs.c1) / ((1.0 + inputs.condition_ratio() * t) * t);
    let general = RateInputs { c1: inputs.c1.min(0.5 - f64::EPSILON), ..*inputs };
    Ok(RateCertificate {
        variant: CertificateKind::Corollary1,
        lipschitz: inputs.lipschitz,
        beta: inputs.beta,
        tau: inputs.tau,
        c1: inputs.c1,
        alpha0,
        alpha,
        eta1,
        eta2_max: 0.0,
        eta2: 0.0,
        rho: rate(alpha, inputs.beta, eta1, 0.0),
        constant: None,
        admissible: within(alpha, alpha0),
        rate_w: general.rate_w(),
        alpha0_stated: alpha0_stated(&general),
        alpha0_proof_tight: alpha0_proof_tight(&general),
        simplified_factor: Some(simplified),
    })
}

fn corollary2_alpha0(inputs: &RateInputs) -> f64 {
    let t = inputs.tau as f64 + 2.0;
    let w = inputs.beta / (2.0 * inputs.lipschitz * t);
    (w.ln_1p() / t).exp_m1() / inputs.beta
}

/// Extrapolation-only certificate at `α = α₀` with the largest admissible `η₂`.
pub fn corollary2_params(lipschitz: f64, beta: f64, tau: usize) -> Result<RateCertificate> {
    let inputs = RateInputs::new(lipschitz, beta, tau, 0.0)?;
    let alpha = corollary2_alpha0(&inputs);
    corollary2_at(lipschitz, beta, tau, alpha, corollary2_eta2_bound(&inputs, alpha).max(0.0))
}

// min{αβ/2, (1/(1+αβ))(¼ − L(τ+2)/(2β)((αβ+1)^{τ+2} − 1))}
fn corollary2_eta2_bound(inputs: &RateInputs, alpha: f64) -> f64 {
    let ab = alpha * inputs.beta;
    let t = inputs.tau as f64 + 2.0;
    let growth = (t * ab.ln_1p()).exp_m1();
    let bracket = (0.25 - inputs.lipschitz * t / (2.0 * inputs.beta) * growth) / (1.0 + ab);
    bracket.min(ab / 2.0)
}

/// Extrapolation-only certificate at a chosen `α`, `η₂`: `η₁ = 0` and
/// `ρ = (1+η₂)/(1+αβ)`.
pub fn corollary2_at(lipschitz: f64, beta: f64, tau: usize, alpha: f64, eta2: f64) -> Result<RateCertificate> {
    let inputs = RateInputs::new(lipschitz, beta, tau, 0.0)?;
    check_step(alpha)?;
    let alpha0 = corollary2_alpha0(&inputs);
    let mut eta2_max = corollary2_eta2_bound(&inputs, alpha);
    let step_ok = within(alpha, alpha0);
    if step_ok && eta2_max < 0.0 && eta2_max > -1e-12 {
        eta2_max = 0.0;
    }
    Ok(RateCertificate {
        variant: CertificateKind::Corollary2,
        lipschitz,
        beta,
        tau,
        c1: 0.0,
        alpha0,
        alpha,
        eta1: 0.0,
        eta2_max,
        eta2,
        rho: rate(alpha, beta, 0.0, eta2),
        constant: None,
        admissible: step_ok && (0.0..=eta2_max).contains(&eta2) && eta2 < alpha * beta,
        rate_w: inputs.rate_w(),
        alpha0_stated: alpha0_stated(&inputs),
        alpha0_proof_tight: alpha0_proof_tight(&inputs),
        simplified_factor: None,
    })
}

/// Default inertia for each method at step `α`: heavy ball `η₁ = C₁αβ` when
/// the method uses it, extrapolation at the largest admissible `η₂` (with
/// `C₁ = 0` when the method has no heavy ball).
pub fn inertia_for(method: Method, inputs: &RateInputs, alpha: f64) -> (f64, f64) {
    let eta1 = if method.uses_eta1() { (inputs.c1 * alpha * inputs.beta).min(1.0) } else { 0.0 };
    let eta2 = if method.uses_eta2() {
        let effective = if method.uses_eta1() { *inputs } else { RateInputs { c1: 0.0, ..*inputs } };
        eta2_upper_bound(&effective, alpha).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (eta1, eta2)
}
