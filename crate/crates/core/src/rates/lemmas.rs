//! Verifiers for two linear-recurrence lemmas.
//!
//! One-step form: nonnegative `V`, `ω` with
//! `V_{k+1} ≤ aV_k − bω_k + cΣ_{j=k−k₀}^{k} ω_j` for `k ≥ 0` and
//! `cΣ_{j=0}^{k₀} a^{−j} ≤ b` give `V_k ≤ aᵏV₀`.
//!
//! Two-step form: `V_{k+1} ≤ AV_k + BV_{k−1} − b₁ω_k + b₂ω_{k−1} + cΣ_{j=k−k₀}^{k} ω_j`
//! for `k ≥ 1`, with `a` the positive root of `a² = Aa + B` and
//! `cΣ_{j=0}^{k₀} a^{−j} ≤ b₁ − b₂/a`, give `V_k ≤ a^{k−1}(V₁ + aV₀ + b₁ω₀)`.
//!
//! In both, `ω_k = 0` for `k < 0`. The geometric factor is always summed
//! term by term; the closed form `(1−a^{k₀+1})/((1−a)a^{k₀})` cancels badly
//! for `a` near 1.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma2Split {
    pub a: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Lemma2Split {
    /// Residuals of `α₁+α₂ = 1`, `A = α₁a`, `B = α₂a²`, and the distances
    /// by which `0 < a < 1`, `α₁, α₂ ≥ 0` fail (zero when they hold).
    pub fn residuals(&self, big_a: f64, big_b: f64) -> [f64; 5] {
        [
            (self.alpha1 + self.alpha2 - 1.0).abs(),
            (self.alpha1 * self.a - big_a).abs(),
            (self.alpha2 * self.a * self.a - big_b).abs(),
            if self.a > 0.0 && self.a < 1.0 { 0.0 } else { self.a.abs().max((self.a - 1.0).abs()) },
            (-self.alpha1).max(0.0) + (-self.alpha2).max(0.0),
        ]
    }
}

/// Splits `(A, B)` into `a = (A + √(A²+4B))/2`, `α₁ = A/a`, `α₂ = B/a²`.
pub fn lemma2_split(big_a: f64, big_b: f64) -> Result<Lemma2Split> {
    if !(big_a >= 0.0 && big_b >= 0.0 && big_a.is_finite() && big_b.is_finite()) {
        return Err(Error::invalid("A and B must be finite and nonnegative"));
    }
    if big_a + big_b == 0.0 {
        return Err(Error::invalid("A = B = 0 has no positive root"));
    }
    if big_a + big_b >= 1.0 {
        return Err(Error::Infeasible(format!("A + B = {} ≥ 1 forces a ≥ 1", big_a + big_b)));
    }
    let a = 0.5 * (big_a + (big_a * big_a + 4.0 * big_b).sqrt());
    let alpha1 = big_a / a;
    // α₂ = 1 − α₁ holds exactly in real arithmetic; computing it as B/a²
    // keeps the B equation tight and the sum within rounding.
    let alpha2 = big_b / (a * a);
    Ok(Lemma2Split { a, alpha1, alpha2 })
}

/// `Σ_{j=0}^{k₀} a^{−j}`.
fn inverse_geometric_sum(a: f64, k0: usize) -> f64 {
    let inv = 1.0 / a;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..=k0 {
        sum += term;
        term *= inv;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma2Params {
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    pub k0: usize,
}

impl Lemma2Params {
    pub fn split(&self) -> Result<Lemma2Split> {
        lemma2_split(self.big_a, self.big_b)
    }

    fn validate(&self) -> Result<()> {
        if [self.b1, self.b2, self.c].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("b1, b2 and c must be finite and nonnegative"));
        }
        Ok(())
    }

    /// `(cΣ_{j=0}^{k₀} a^{−j}, b₁ − b₂/a)`.
    pub fn condition_sides(&self) -> Result<(f64, f64)> {
        let a = self.split()?.a;
        Ok((self.c * inverse_geometric_sum(a, self.k0), self.b1 - self.b2 / a))
    }
}

/// Whether `c/(1−a) · (1−a^{k₀+1})/a^{k₀} ≤ b₁ − b₂/a`.
pub fn lemma2_condition(params: &Lemma2Params) -> Result<bool> {
    let (lhs, rhs) = params.condition_sides()?;
    Ok(lhs <= rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k0: usize,
}

impl Lemma1Params {
    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::invalid(format!("a must lie in (0, 1), got {}", self.a)));
        }
        if [self.b, self.c].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("b and c must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn condition_sides(&self) -> (f64, f64) {
        (self.c * inverse_geometric_sum(self.a, self.k0), self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Hypotheses hold and the sequence respects the bound.
    Certified,
    /// The sequences do not satisfy the recurrence, so the lemma says nothing.
    RecurrenceViolated,
    /// The parameter condition fails, so the lemma says nothing.
    ConditionFailed,
    /// Hypotheses hold but the bound is exceeded.
    BoundViolated,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    /// `rhs − V_{k+1}` for each checked step, indexed by `k` (first checked
    /// `k` is 0 for the one-step form and 1 for the two-step form).
    pub recurrence_residuals: Vec<f64>,
    pub recurrence_holds: bool,
    pub condition_lhs: f64,
    pub condition_rhs: f64,
    pub condition_holds: bool,
    /// `V_k − bound_k`; entry `k` is `NaN` where the bound does not apply.
    pub bound_residuals: Vec<f64>,
    pub max_bound_residual: f64,
    pub bound_tolerance: f64,
    pub verdict: Verdict,
}

impl LemmaReport {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

fn check_sequences(v: &[f64], w: &[f64]) -> Result<()> {
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: v.len(), got: w.len() });
    }
    if v.iter().chain(w).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::invalid("V and ω must be finite and nonnegative"));
    }
    Ok(())
}

/// `Σ_{j=k−k₀}^{k} ω_j` with `ω_j = 0` for `j < 0`.
fn window(w: &[f64], k: usize, k0: usize) -> f64 {
    w[k.saturating_sub(k0)..=k].iter().sum()
}

fn finish(
    recurrence_residuals: Vec<f64>,
    recurrence_scales: &[f64],
    (condition_lhs, condition_rhs): (f64, f64),
    bound_residuals: Vec<f64>,
    bound_tolerance: f64,
) -> LemmaReport {
    let recurrence_holds = recurrence_residuals
        .iter()
        .zip(recurrence_scales)
        .all(|(r, s)| *r >= -1e-12 * (1.0 + s));
    let condition_holds = condition_lhs <= condition_rhs;
    let max_bound_residual = bound_residuals.iter().copied().filter(|r| !r.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    let verdict = if !recurrence_holds {
        Verdict::RecurrenceViolated
    } else if !condition_holds {
        Verdict::ConditionFailed
    } else if max_bound_residual > bound_tolerance {
        Verdict::BoundViolated
    } else {
        Verdict::Certified
    };
    LemmaReport {
        recurrence_residuals,
        recurrence_holds,
        condition_lhs,
        condition_rhs,
        condition_holds,
        bound_residuals,
        max_bound_residual,
        bound_tolerance,
        verdict,
    }
}

/// Checks the two-step recurrence for `k ≥ 1`, the parameter condition, and
/// `V_k ≤ a^{k−1}(V₁ + aV₀ + b₁ω₀)` for `k ≥ 1` with tolerance
/// `1e−9·(1 + V₀ + V₁)`.
pub fn lemma2_verify(v: &[f64], w: &[f64], params: &Lemma2Params) -> Result<LemmaReport> {
    check_sequences(v, w)?;
    params.validate()?;
    let split = params.split()?;
    let Lemma2Params { big_a, big_b, b1, b2, c, k0 } = *params;
    let mut residuals = Vec::new();
    let mut scales = Vec::new();
    for k in 1..v.len().saturating_sub(1) {
        let sum = window(w, k, k0);
        let terms = [big_a * v[k], big_b * v[k - 1], b1 * w[k], b2 * w[k - 1], c * sum];
        let rhs = terms[0] + terms[1] - terms[2] + terms[3] + terms[4];
        residuals.push(rhs - v[k + 1]);
        scales.push(terms.iter().sum::<f64>() + v[k + 1]);
    }
    let mut bound = vec![f64::NAN; v.len()];
    if v.len() >= 2 {
        let start = v[1] + split.a * v[0] + b1 * w[0];
        let mut power = 1.0;
        for k in 1..v.len() {
            bound[k] = v[k] - power * start;
            power *= split.a;
        }
    }
    let tolerance = 1e-9 * (1.0 + v.first().copied().unwrap_or(0.0) + v.get(1).copied().unwrap_or(0.0));
    Ok(finish(residuals, &scales, params.condition_sides()?, bound, tolerance))
}

/// Checks the one-step recurrence for `k ≥ 0`, its condition, and
/// `V_k ≤ aᵏV₀` with tolerance `1e−9·(1 + V₀)`.
pub fn lemma1_verify(v: &[f64], w: &[f64], params: &Lemma1Params) -> Result<LemmaReport> {
    check_sequences(v, w)?;
    params.validate()?;
    let Lemma1Params { a, b, c, k0 } = *params;
    let mut residuals = Vec::new();
    let mut scales = Vec::new();
    for k in 0..v.len().saturating_sub(1) {
        let sum = window(w, k, k0);
        let terms = [a * v[k], b * w[k], c * sum];
        residuals.push(terms[0] - terms[1] + terms[2] - v[k + 1]);
        scales.push(terms.iter().sum::<f64>() + v[k + 1]);
    }
    let mut power = 1.0;
    let bound: Vec<f64> = v
        .iter()
        .map(|vk| {
            let r = vk - power * v[0];
            power *= a;
            r
        })
        .collect();
    let tolerance = 1e-9 * (1.0 + v.first().copied().unwrap_or(0.0));
    Ok(finish(residuals, &scales, params.condition_sides(), bound, tolerance))
}
