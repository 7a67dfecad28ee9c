use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{objective_unchecked, CompositeProblem, KnownOptimum, SmoothComponents};
use crate::prox::ProxSpec;

use super::GeneratorSpec;

/// Chain of coupled quadratics with `h = λ₁‖x‖₁ + I{x ≥ 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    /// Number of components, equal to the dimension.
    pub n: usize,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_lambda")]
    pub lambda1: f64,
    /// Workers the experiment splits the components over.
    #[serde(default = "default_workers")]
    pub num_workers: usize,
}

fn default_c() -> f64 {
    3.0
}

fn default_lambda() -> f64 {
    1.0
}

fn default_workers() -> usize {
    4
}

impl ToySpec {
    /// `N = 100`, `c = 3`, `λ₁ = 1`, four workers.
    pub fn paper() -> Self {
        Self { n: 100, c: 3.0, lambda1: 1.0, num_workers: 4 }
    }

    pub fn with_size(n: usize) -> Self {
        Self { n, ..Self::paper() }
    }
}

/// Components, 0-indexed over `x ∈ R^N`:
///
/// ```text
/// f_0(x)     = (x_0 − c)² + ½(x_1 + c)²
/// f_n(x)     = ½(x_{n−1} + c)² + ½(x_n − c)² + ½(x_{n+1} + c)²   (0 < n < N−1)
/// f_{N−1}(x) = ½(x_{N−2} + c)² + ½(x_{N−1} − c)²
/// ```
#[derive(Debug, Clone)]
pub struct ToyChain {
    n: usize,
    c: f64,
}

impl ToyChain {
    pub fn new(n: usize, c: f64) -> Self {
        Self { n, c }
    }

    fn component_value(&self, n: usize, x: &[f64]) -> f64 {
        let c = self.c;
        let sq = |v: f64| 0.5 * v * v;
        if n == 0 {
            (x[0] - c).powi(2) + sq(x[1] + c)
        } else if n == self.n - 1 {
            sq(x[n - 1] + c) + sq(x[n] - c)
        } else {
            sq(x[n - 1] + c) + sq(x[n] - c) + sq(x[n + 1] + c)
        }
    }
}

impl SmoothComponents for ToyChain {
    fn dimension(&self) -> usize {
        self.n
    }

    fn num_components(&self) -> usize {
        self.n
    }

    fn add_component_gradient(&self, n: usize, x: &[f64], out: &mut [f64]) {
        let c = self.c;
        if n == 0 {
            out[0] += 2.0 * (x[0] - c);
            out[1] += x[1] + c;
        } else if n == self.n - 1 {
            out[n - 1] += x[n - 1] + c;
            out[n] += x[n] - c;
        } else {
            out[n - 1] += x[n - 1] + c;
            out[n] += x[n] - c;
            out[n + 1] += x[n + 1] + c;
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|n| self.component_value(n, x)).sum()
    }
}

/// Builds the chain problem with `L = N + 1`, `β = 2` and the optimum
/// `x* = (max{0, c − λ₁}/3) e₁`.
pub fn make_toy(spec: &ToySpec) -> Result<CompositeProblem> {
    if spec.n < 2 {
        return Err(Error::invalid(format!("toy problem needs at least 2 components, got {}", spec.n)));
    }
    if !(spec.c.is_finite() && spec.c >= 0.0) {
        return Err(Error::invalid("toy offset c must be finite and nonnegative"));
    }
    if spec.num_workers == 0 || spec.num_workers > spec.n {
        return Err(Error::invalid("toy worker count must lie in 1..=N"));
    }
    let regularizer = ProxSpec::nonneg_l1(spec.lambda1)?;
    let mut lipschitz = vec![1.0; spec.n];
    lipschitz[0] = 2.0;
    let problem = CompositeProblem::new(Arc::new(ToyChain::new(spec.n, spec.c)), regularizer, lipschitz)?
        .with_growth(2.0)?;
    let mut x_star = vec![0.0; spec.n];
    x_star[0] = (spec.c - spec.lambda1).max(0.0) / 3.0;
    let value = objective_unchecked(&problem, &x_star);
    Ok(problem
        .with_known_optimum(KnownOptimum { x: x_star, value })?
        .with_generator(GeneratorSpec::toy(spec)))
}
