use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{objective_unchecked, CompositeProblem, KnownOptimum, SmoothComponents};
use crate::prox::{ProxOperator, ProxSpec};
use crate::rng::SplitMix64;

use super::GeneratorSpec;

/// `½‖Ax − b‖² + λ‖x‖₁` with a Gaussian `A` and `b = A x♮` for a planted
/// sparse `x♮`. Each row of `A` is one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoSpec {
    pub rows: usize,
    pub cols: usize,
    /// Fraction of nonzero entries in the planted signal.
    pub sparsity: f64,
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
    /// Growth constant to attach; the generator cannot derive one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Iteration cap for the reference solve.
    #[serde(default = "default_reference_iters")]
    pub reference_iters: usize,
}

fn default_reference_iters() -> usize {
    1_000_000
}

impl LassoSpec {
    /// 60 × 200, 10% planted support, `λ = 0.2`.
    pub fn desk(seed: u64) -> Self {
        Self {
            rows: 60,
            cols: 200,
            sparsity: 0.1,
            lambda: 0.2,
            seed,
            beta: None,
            reference_iters: default_reference_iters(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::invalid("lasso matrix needs at least one row and column"));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::invalid(format!("sparsity must lie in (0, 1], got {}", self.sparsity)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::invalid(format!("lasso weight must be positive, got {}", self.lambda)));
        }
        Ok(())
    }

    pub fn support_size(&self) -> usize {
        ((self.sparsity * self.cols as f64).round() as usize).clamp(1, self.cols)
    }
}

/// Generated data of one Lasso instance.
#[derive(Debug, Clone)]
pub struct LassoInstance {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols`.
    a: Vec<f64>,
    b: Vec<f64>,
    planted: Vec<f64>,
}

impl LassoInstance {
    pub fn from_dense(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != rows * cols || b.len() != rows {
            return Err(Error::invalid("matrix and right-hand side sizes disagree"));
        }
        Ok(Self { rows, cols, a, b, planted: vec![0.0; cols] })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn planted(&self) -> &[f64] {
        &self.planted
    }

    /// `Lᵢ = ‖aᵢ‖²`.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().map(|v| v * v).sum()).collect()
    }

    fn residual(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.row(i), x) - self.b[i]
    }

    fn add_rows_gradient(&self, rows: Range<usize>, x: &[f64], out: &mut [f64]) {
        for i in rows {
            let r = self.residual(i, x);
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += r * a;
            }
        }
    }

    /// `Aᵀ(Ax − b)`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.add_rows_gradient(0..self.rows, x, &mut out);
        out
    }

    /// Largest eigenvalue of `AᵀA` by power iteration from a fixed start.
    pub fn gram_spectral_norm(&self) -> f64 {
        let mut v = vec![1.0 / (self.cols as f64).sqrt(); self.cols];
        let mut estimate = 0.0;
        for _ in 0..1000 {
            let av: Vec<f64> = (0..self.rows).map(|i| dot(self.row(i), &v)).collect();
            let mut w = vec![0.0; self.cols];
            for (i, s) in av.iter().enumerate() {
                for (wj, a) in w.iter_mut().zip(self.row(i)) {
                    *wj += s * a;
                }
            }
            let norm = dot(&w, &w).sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = dot(&v, &w);
            v = w.into_iter().map(|x| x / norm).collect();
            if (next - estimate).abs() <= 1e-14 * next {
                return next;
            }
            estimate = next;
        }
        estimate
    }

    /// Synchronous proximal-gradient run from zero with step
    /// `1 / (1.01 λ_max(AᵀA))`, stopped once `‖x_{k+1} − x_k‖ < tol`.
    pub fn reference_solution(&self, lambda: f64, max_iters: usize, tol: f64) -> ReferenceSolution {
        let step = 1.0 / (1.01 * self.gram_spectral_norm().max(f64::MIN_POSITIVE));
        let prox = ProxSpec { kind: crate::prox::ProxKind::L1, lambda };
        let mut x = vec![0.0; self.cols];
        let mut v = vec![0.0; self.cols];
        let mut next = vec![0.0; self.cols];
        let mut last_step = f64::INFINITY;
        let mut iterations = 0;
        while iterations < max_iters {
            let g = self.gradient(&x);
            for j in 0..self.cols {
                v[j] = x[j] - step * g[j];
            }
            prox.prox_into(&v, step, &mut next);
            last_step = next.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            std::mem::swap(&mut x, &mut next);
            iterations += 1;
            if last_step < tol {
                break;
            }
        }
        ReferenceSolution { x, iterations, last_step, converged: last_step < tol }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub last_step: f64,
    pub converged: bool,
}

impl SmoothComponents for LassoInstance {
    fn dimension(&self) -> usize {
        self.cols
    }

    fn num_components(&self) -> usize {
        self.rows
    }

    fn add_component_gradient(&self, n: usize, x: &[f64], out: &mut [f64]) {
        self.add_rows_gradient(n..n + 1, x, out);
    }

    fn add_block_gradient(&self, components: Range<usize>, x: &[f64], out: &mut [f64]) {
        self.add_rows_gradient(components, x, out);
    }

    fn value(&self, x: &[f64]) -> f64 {
        (0..self.rows).map(|i| 0.5 * self.residual(i, x).powi(2)).sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws `A` row by row from standard normals, then the planted support by a
/// partial Fisher–Yates shuffle, then its values; all from one seeded stream.
pub fn generate_lasso(spec: &LassoSpec) -> Result<LassoInstance> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let a: Vec<f64> = (0..spec.rows * spec.cols).map(|_| rng.standard_normal()).collect();
    let mut index: Vec<usize> = (0..spec.cols).collect();
    let support = spec.support_size();
    for i in 0..support {
        let j = i + rng.below(spec.cols - i);
        index.swap(i, j);
    }
    let mut planted = vec![0.0; spec.cols];
    for &j in &index[..support] {
        planted[j] = rng.standard_normal();
    }
    let mut instance = LassoInstance::from_dense(spec.rows, spec.cols, a, vec![0.0; spec.rows])?;
    instance.b = (0..spec.rows).map(|i| dot(instance.row(i), &planted)).collect();
    instance.planted = planted;
    Ok(instance)
}

fn assemble(spec: &LassoSpec, instance: LassoInstance) -> Result<CompositeProblem> {
    let lipschitz = instance.row_norms_sq();
    let mut problem = CompositeProblem::new(Arc::new(instance), ProxSpec::l1(spec.lambda)?, lipschitz)?;
    if let Some(beta) = spec.beta {
        problem = problem.with_growth(beta)?;
    }
    Ok(problem.with_generator(GeneratorSpec::lasso(spec)))
}

/// The Lasso problem without a reference solution.
pub fn make_lasso(spec: &LassoSpec) -> Result<CompositeProblem> {
    assemble(spec, generate_lasso(spec)?)
}

/// The Lasso problem with a reference minimizer attached as its known
/// optimum, solved to a step norm below `1e−10`.
pub fn make_lasso_with_reference(spec: &LassoSpec) -> Result<CompositeProblem> {
    let instance = generate_lasso(spec)?;
    let reference = instance.reference_solution(spec.lambda, spec.reference_iters, 1e-10);
    if !reference.converged {
        return Err(Error::invalid(format!(
            "lasso reference solve stalled after {} iterations (last step {:e})",
            reference.iterations, reference.last_step
        )));
    }
    let problem = assemble(spec, instance)?;
    let value = objective_unchecked(&problem, &reference.x);
    problem.with_known_optimum(KnownOptimum { x: reference.x, value })
}
