//! Composite problems `Φ = F + h` with `F = Σₙ fₙ`, plus the iterate state
//! shared by the solver and the verifiers.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::problems::GeneratorSpec;
use crate::prox::{ProxOperator, ProxSpec};

/// The smooth part `F = Σₙ fₙ`, exposed through per-component gradient oracles.
///
/// Gradients are accumulated into a caller-owned buffer so block refreshes do
/// not allocate.
pub trait SmoothComponents: Send + Sync + fmt::Debug {
    fn dimension(&self) -> usize;

    fn num_components(&self) -> usize;

    /// `out += ∇fₙ(x)`.
    fn add_component_gradient(&self, n: usize, x: &[f64], out: &mut [f64]);

    /// `out += Σ_{n ∈ components} ∇fₙ(x)`.
    fn add_block_gradient(&self, components: Range<usize>, x: &[f64], out: &mut [f64]) {
        for n in components {
            self.add_component_gradient(n, x, out);
        }
    }

    /// `F(x)`.
    fn value(&self, x: &[f64]) -> f64;
}

/// Unique minimizer and optimal value, when analytically available or
/// computed as a high-accuracy reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownOptimum {
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Clone)]
pub struct CompositeProblem {
    smooth: Arc<dyn SmoothComponents>,
    regularizer: ProxSpec,
    component_lipschitz: Vec<f64>,
    total_lipschitz: f64,
    growth: Option<f64>,
    known_optimum: Option<KnownOptimum>,
    generator: Option<GeneratorSpec>,
}

impl fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("dimension", &self.dimension())
            .field("num_components", &self.num_components())
            .field("regularizer", &self.regularizer)
            .field("total_lipschitz", &self.total_lipschitz)
            .field("growth", &self.growth)
            .field("generator", &self.generator)
            .finish_non_exhaustive()
    }
}

impl CompositeProblem {
    /// Builds a problem; `L` is the sum of the component constants.
    pub fn new(
        smooth: Arc<dyn SmoothComponents>,
        regularizer: ProxSpec,
        component_lipschitz: Vec<f64>,
    ) -> Result<Self> {
        if smooth.dimension() == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if smooth.num_components() == 0 {
            return Err(Error::invalid("at least one component is required"));
        }
        check_dim(smooth.num_components(), component_lipschitz.len())?;
        if let Some(bad) = component_lipschitz.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::invalid(format!("component Lipschitz constants must be positive, got {bad}")));
        }
        regularizer.validate()?;
        let total_lipschitz = component_lipschitz.iter().sum();
        Ok(Self {
            smooth,
            regularizer,
            component_lipschitz,
            total_lipschitz,
            growth: None,
            known_optimum: None,
            generator: None,
        })
    }

    /// Sets the quadratic growth modulus `β`.
    pub fn with_growth(mut self, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid(format!("growth constant must be positive, got {beta}")));
        }
        self.growth = Some(beta);
        Ok(self)
    }

    pub fn with_known_optimum(mut self, optimum: KnownOptimum) -> Result<Self> {
        check_dim(self.dimension(), optimum.x.len())?;
        self.known_optimum = Some(optimum);
        Ok(self)
    }

    pub(crate) fn with_generator(mut self, generator: GeneratorSpec) -> Self {
        self.generator = Some(generator);
        self
    }

    pub fn dimension(&self) -> usize {
        self.smooth.dimension()
    }

    pub fn num_components(&self) -> usize {
        self.smooth.num_components()
    }

    pub fn smooth(&self) -> &dyn SmoothComponents {
        self.smooth.as_ref()
    }

    pub fn regularizer(&self) -> &ProxSpec {
        &self.regularizer
    }

    pub fn component_lipschitz(&self) -> &[f64] {
        &self.component_lipschitz
    }

    /// `L = Σₙ Lₙ`.
    pub fn total_lipschitz(&self) -> f64 {
        self.total_lipschitz
    }

    /// `β`, if supplied.
    pub fn growth(&self) -> Option<f64> {
        self.growth
    }

    pub fn known_optimum(&self) -> Option<&KnownOptimum> {
        self.known_optimum.as_ref()
    }

    pub fn generator(&self) -> Option<&GeneratorSpec> {
        self.generator.as_ref()
    }

    pub fn component_gradient(&self, n: usize, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dimension(), x.len())?;
        if n >= self.num_components() {
            return Err(Error::invalid(format!("component index {n} out of range")));
        }
        let mut out = vec![0.0; x.len()];
        self.smooth.add_component_gradient(n, x, &mut out);
        Ok(out)
    }

    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        self.smooth.value(x)
    }

    pub fn regularizer_value(&self, x: &[f64]) -> f64 {
        self.regularizer.value(x)
    }

    pub fn prox(&self, v: &[f64], alpha: f64) -> Vec<f64> {
        self.regularizer.prox(v, alpha)
    }
}

/// `Φ(x) = F(x) + h(x)`; `+∞` outside the domain of `h`.
pub fn evaluate_objective(problem: &CompositeProblem, x: &[f64]) -> Result<f64> {
    check_dim(problem.dimension(), x.len())?;
    Ok(objective_unchecked(problem, x))
}

pub(crate) fn objective_unchecked(problem: &CompositeProblem, x: &[f64]) -> f64 {
    let h = problem.regularizer_value(x);
    if h == f64::INFINITY {
        return f64::INFINITY;
    }
    problem.smooth_value(x) + h
}

/// `∇F(x) = Σₙ ∇fₙ(x)`, evaluated at a single point.
pub fn full_gradient(problem: &CompositeProblem, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(problem.dimension(), x.len())?;
    let mut out = vec![0.0; x.len()];
    problem.smooth().add_block_gradient(0..problem.num_components(), x, &mut out);
    Ok(out)
}

/// Largest coordinate gap between a central finite difference of `F` and the
/// gradient oracle, normalized by `1 + ‖∇F(x)‖∞`.
pub fn gradient_consistency_check(problem: &CompositeProblem, x: &[f64], step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let grad = full_gradient(problem, x)?;
    let scale = 1.0 + grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let up = problem.smooth_value(&probe);
        probe[i] = x[i] - step;
        let down = problem.smooth_value(&probe);
        probe[i] = x[i];
        let fd = (up - down) / (2.0 * step);
        worst = worst.max((fd - grad[i]).abs());
    }
    Ok(worst / scale)
}

/// `‖∇fₙ(x) − ∇fₙ(y)‖ / ‖x − y‖`, for empirical checks of the declared `Lₙ`.
pub fn component_lipschitz_ratio(problem: &CompositeProblem, n: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    let gx = problem.component_gradient(n, x)?;
    let gy = problem.component_gradient(n, y)?;
    let num = distance(&gx, &gy);
    let den = distance(x, y);
    if den == 0.0 {
        return Err(Error::invalid("points must differ"));
    }
    Ok(num / den)
}

/// Iterate triple of the inertial scheme at iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub k: usize,
    pub x_curr: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub z_curr: Vec<f64>,
    pub z_prev: Vec<f64>,
    pub y_curr: Vec<f64>,
}

impl IterateState {
    /// `x_{−1} = x₀ = z₀` (and `z_{−1}`, `y₀` equal to it as well).
    pub fn new(x0: &[f64]) -> Self {
        Self {
            k: 0,
            x_curr: x0.to_vec(),
            x_prev: x0.to_vec(),
            z_curr: x0.to_vec(),
            z_prev: x0.to_vec(),
            y_curr: x0.to_vec(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.x_curr.len()
    }
}

pub(crate) fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    distance_sq(a, b).sqrt()
}
