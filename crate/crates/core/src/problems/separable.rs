use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{objective_unchecked, CompositeProblem, KnownOptimum, SmoothComponents};
use crate::prox::ProxSpec;
use crate::rng::SplitMix64;

use super::GeneratorSpec;

/// Quadratics with prescribed total Lipschitz constant `L` and growth `β`,
/// regularized by `λ‖x‖₁ + I{x ≥ 0}`; the optimum is available in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableSpec {
    /// Number of components, equal to the dimension.
    pub n: usize,
    pub lipschitz: f64,
    pub beta: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Component `n` of `N`, with `Lₙ = L/N`:
///
/// ```text
/// fₙ(x) = (β/2N)‖x − c‖² + ((Lₙ − β/N)/2)(xₙ − cₙ)²
/// ```
///
/// so `∇²F = κI` with `κ = β + Lₙ − β/N ∈ [β, L]` and every `∇²fₙ` has top
/// eigenvalue `Lₙ`. The centre `c` is drawn uniformly from `[−1, 3]ᴺ`.
#[derive(Debug, Clone)]
pub struct SeparableQuadratics {
    centre: Vec<f64>,
    shared: f64,
    own: f64,
}

impl SeparableQuadratics {
    pub fn centre(&self) -> &[f64] {
        &self.centre
    }

    /// Diagonal entry of `∇²F`.
    pub fn curvature(&self) -> f64 {
        self.shared * self.centre.len() as f64 + self.own
    }
}

impl SmoothComponents for SeparableQuadratics {
    fn dimension(&self) -> usize {
        self.centre.len()
    }

    fn num_components(&self) -> usize {
        self.centre.len()
    }

    fn add_component_gradient(&self, n: usize, x: &[f64], out: &mut [f64]) {
        for ((o, xi), ci) in out.iter_mut().zip(x).zip(&self.centre) {
            *o += self.shared * (xi - ci);
        }
        out[n] += self.own * (x[n] - self.centre[n]);
    }

    fn add_block_gradient(&self, components: std::ops::Range<usize>, x: &[f64], out: &mut [f64]) {
        let count = components.len() as f64;
        for ((o, xi), ci) in out.iter_mut().zip(x).zip(&self.centre) {
            *o += count * self.shared * (xi - ci);
        }
        for n in components {
            out[n] += self.own * (x[n] - self.centre[n]);
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let kappa = self.curvature();
        x.iter().zip(&self.centre).map(|(xi, ci)| 0.5 * kappa * (xi - ci).powi(2)).sum()
    }
}

pub fn make_separable(spec: &SeparableSpec) -> Result<CompositeProblem> {
    if spec.n == 0 {
        return Err(Error::invalid("separable problem needs at least one component"));
    }
    if !(spec.beta.is_finite() && spec.beta > 0.0) {
        return Err(Error::invalid("growth constant must be positive"));
    }
    if !(spec.lipschitz.is_finite() && spec.lipschitz >= spec.beta) {
        return Err(Error::invalid("Lipschitz constant must be finite and at least the growth constant"));
    }
    let n = spec.n as f64;
    let per_component = spec.lipschitz / n;
    let mut rng = SplitMix64::new(spec.seed);
    let centre: Vec<f64> = (0..spec.n).map(|_| rng.uniform(-1.0, 3.0)).collect();
    let smooth = SeparableQuadratics {
        centre,
        shared: spec.beta / n,
        own: (per_component - spec.beta / n).max(0.0),
    };
    let kappa = smooth.curvature();
    let x_star: Vec<f64> = smooth.centre.iter().map(|c| (c - spec.lambda / kappa).max(0.0)).collect();
    let problem = CompositeProblem::new(Arc::new(smooth), ProxSpec::nonneg_l1(spec.lambda)?, vec![per_component; spec.n])?
        .with_growth(spec.beta)?;
    let value = objective_unchecked(&problem, &x_star);
    Ok(problem
        .with_known_optimum(KnownOptimum { x: x_star, value })?
        .with_generator(GeneratorSpec::separable(spec)))
}
