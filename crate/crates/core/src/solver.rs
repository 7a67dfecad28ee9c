//! The iPIAG engine: delayed gradient table, inertial proximal step, and the
//! deterministic master loop that replays a [`DelaySchedule`].

use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::problem::{distance_sq, objective_unchecked, CompositeProblem, IterateState, KnownOptimum};
use crate::prox::ProxOperator;
use crate::rates::lyapunov_from_parts;
use crate::schedule::{BlockPartition, DelaySchedule};

/// Named parameter regimes of the inertial scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// `η₁ = η₂ = 0`.
    #[serde(rename = "piag")]
    Piag,
    /// Heavy-ball momentum only, `η₂ = 0`.
    #[serde(rename = "piag-m")]
    PiagM,
    /// Post-prox extrapolation only, `η₁ = 0`.
    #[serde(rename = "piag-nel")]
    PiagNel,
    /// Both inertial terms.
    #[serde(rename = "ipiag")]
    Ipiag,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Piag, Method::PiagM, Method::PiagNel, Method::Ipiag];

    pub fn name(self) -> &'static str {
        match self {
            Method::Piag => "piag",
            Method::PiagM => "piag-m",
            Method::PiagNel => "piag-nel",
            Method::Ipiag => "ipiag",
        }
    }

    pub fn uses_eta1(self) -> bool {
        matches!(self, Method::PiagM | Method::Ipiag)
    }

    pub fn uses_eta2(self) -> bool {
        matches!(self, Method::PiagNel | Method::Ipiag)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}' (expected piag, piag-m, piag-nel or ipiag)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub alpha: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub max_iters: usize,
    /// Stop once `‖z_{k+1} − z_k‖` drops below this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_tolerance: Option<f64>,
}

impl SolverParams {
    pub fn new(alpha: f64, eta1: f64, eta2: f64, max_iters: usize) -> Result<Self> {
        let params = Self { alpha, eta1, eta2, max_iters, stop_tolerance: None };
        params.validate()?;
        Ok(params)
    }

    pub fn piag(alpha: f64, max_iters: usize) -> Result<Self> {
        Self::new(alpha, 0.0, 0.0, max_iters)
    }

    pub fn with_stop_tolerance(mut self, tol: f64) -> Self {
        self.stop_tolerance = Some(tol);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid(format!("step size must be positive, got {}", self.alpha)));
        }
        for (name, eta) in [("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {eta}")));
            }
        }
        if let Some(tol) = self.stop_tolerance {
            if !(tol > 0.0) {
                return Err(Error::invalid("stop tolerance must be positive"));
            }
        }
        Ok(())
    }
}

/// Stored block gradients `G_w` and the iterate index each was computed at.
#[derive(Debug, Clone)]
pub struct GradientTable {
    partition: BlockPartition,
    blocks: Vec<Option<Vec<f64>>>,
    source: Vec<usize>,
    dimension: usize,
}

impl GradientTable {
    pub fn new(partition: BlockPartition, dimension: usize) -> Self {
        let w = partition.num_workers();
        Self { partition, blocks: vec![None; w], source: vec![0; w], dimension }
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn num_workers(&self) -> usize {
        self.blocks.len()
    }

    /// Installs an externally computed block gradient.
    pub fn set_block(&mut self, worker: usize, gradient: Vec<f64>, source_iter: usize) -> Result<()> {
        check_dim(self.dimension, gradient.len())?;
        self.blocks[worker] = Some(gradient);
        self.source[worker] = source_iter;
        Ok(())
    }

    /// Recomputes `G_w = Σ_{n ∈ 𝒩_w} ∇fₙ(x)` with `x = x_{source_iter}`.
    pub fn refresh(&mut self, worker: usize, problem: &CompositeProblem, x: &[f64], source_iter: usize) {
        let block = self.blocks[worker].get_or_insert_with(|| vec![0.0; x.len()]);
        block.iter_mut().for_each(|v| *v = 0.0);
        problem.smooth().add_block_gradient(self.partition.block(worker), x, block);
        self.source[worker] = source_iter;
    }

    pub fn block(&self, worker: usize) -> Option<&[f64]> {
        self.blocks[worker].as_deref()
    }

    pub fn source_iter(&self, worker: usize) -> usize {
        self.source[worker]
    }

    pub fn staleness(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.source.iter().map(move |&s| k.saturating_sub(s))
    }

    /// `g = Σ_w G_w` written into `out`.
    pub fn aggregate_into(&self, out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (w, block) in self.blocks.iter().enumerate() {
            let block = block.as_ref().ok_or(Error::UninitializedBlock(w))?;
            for (o, b) in out.iter_mut().zip(block) {
                *o += b;
            }
        }
        Ok(())
    }
}

/// Elementwise sum of all stored block gradients.
pub fn aggregate(table: &GradientTable) -> Result<Vec<f64>> {
    let mut out = vec![0.0; table.dimension];
    table.aggregate_into(&mut out)?;
    Ok(out)
}

/// One inertial proximal update, returning the state at `k + 1`:
///
/// ```text
/// y_{k+1} = x_k + η₁ (x_k − x_{k−1})
/// z_{k+1} = prox_{αh}(y_{k+1} − α g)
/// x_{k+1} = z_{k+1} + η₂ (z_{k+1} − z_k)
/// ```
pub fn ipiag_step(state: &IterateState, params: &SolverParams, g: &[f64], prox: &impl ProxOperator) -> Result<IterateState> {
    let mut next = state.clone();
    let mut scratch = vec![0.0; state.dimension()];
    advance(&mut next, params, g, prox, &mut scratch)?;
    Ok(next)
}

/// In-place form of [`ipiag_step`]; `scratch` must have the state's dimension.
pub fn advance(
    state: &mut IterateState,
    params: &SolverParams,
    g: &[f64],
    prox: &impl ProxOperator,
    scratch: &mut [f64],
) -> Result<()> {
    let d = state.dimension();
    check_dim(d, g.len())?;
    let iteration = state.k;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { iteration, what: "aggregated gradient" });
    }
    let (alpha, eta1, eta2) = (params.alpha, params.eta1, params.eta2);
    for i in 0..d {
        let y = state.x_curr[i] + eta1 * (state.x_curr[i] - state.x_prev[i]);
        state.y_curr[i] = y;
        scratch[i] = y - alpha * g[i];
    }
    std::mem::swap(&mut state.z_prev, &mut state.z_curr);
    prox.prox_into(scratch, alpha, &mut state.z_curr);
    std::mem::swap(&mut state.x_prev, &mut state.x_curr);
    for i in 0..d {
        let z = state.z_curr[i];
        state.x_curr[i] = z + eta2 * (z - state.z_prev[i]);
    }
    state.k += 1;
    if state.x_curr.iter().chain(&state.z_curr).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { iteration, what: "iterate" });
    }
    Ok(())
}

/// Per-run switches for [`run`].
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Keep `x_k`, `z_k` and the aggregated `g_k` for every iteration.
    pub store_iterates: bool,
    /// Evaluate `Φ(z_k)` and `Ψ(z_k)` each iteration. Turning this off leaves
    /// those columns `NaN` and disables the divergence guard.
    pub record_objective: bool,
    /// Point distances are measured against; defaults to the problem's known optimum.
    pub reference: Option<KnownOptimum>,
    /// Abort once `Φ(z_k)` exceeds `max(|Φ(z₀)|, 1)` by this factor.
    pub divergence_factor: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { store_iterates: false, record_objective: true, reference: None, divergence_factor: 1e12 }
    }
}

impl RunOptions {
    pub fn storing_iterates(mut self) -> Self {
        self.store_iterates = true;
        self
    }

    pub fn without_objective(mut self) -> Self {
        self.record_objective = false;
        self
    }

    pub fn with_reference(mut self, reference: KnownOptimum) -> Self {
        self.reference = Some(reference);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    /// `Φ(z_k)`.
    pub phi: f64,
    /// `‖z_k − x_ref‖²`.
    pub dist2: f64,
    /// `Ψ(z_k)`.
    pub psi: f64,
    /// `‖z_k − z_{k−1}‖²`.
    pub step_norm2: f64,
    /// Largest table staleness in the aggregation that produced `z_k`.
    pub max_staleness: usize,
}

#[derive(Debug, Clone, Default)]
pub struct StoredIterates {
    pub x: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    /// `g_k` used to produce iterate `k + 1`.
    pub g: Vec<Vec<f64>>,
}

/// Everything recorded along one run; record `k` describes `z_k`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub params: SolverParams,
    pub num_workers: usize,
    pub tau: usize,
    pub reference: Option<KnownOptimum>,
    pub records: Vec<TraceRecord>,
    /// Row-major `records.len() × num_workers` staleness snapshots.
    pub staleness: Vec<u32>,
    pub iterates: Option<StoredIterates>,
    pub final_state: IterateState,
    pub stopped_early: bool,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the initial record")
    }

    pub fn phi_star(&self) -> Option<f64> {
        self.reference.as_ref().map(|r| r.value)
    }

    /// Solution reported by the run (`z_K`).
    pub fn solution(&self) -> &[f64] {
        &self.final_state.z_curr
    }

    pub fn staleness_at(&self, k: usize) -> &[u32] {
        &self.staleness[k * self.num_workers..(k + 1) * self.num_workers]
    }

    /// First `k` with `dist2 ≤ threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.dist2 <= threshold).map(|r| r.k)
    }

    pub fn dist2(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.dist2)
    }

    /// CSV with header `k,phi,dist2,psi,step_norm2,max_staleness`; floats are
    /// printed in scientific notation with `digits` significant digits.
    pub fn write_csv(&self, mut out: impl io::Write, digits: usize) -> io::Result<()> {
        let p = digits.max(1) - 1;
        writeln!(out, "k,phi,dist2,psi,step_norm2,max_staleness")?;
        let mut line = String::new();
        for r in &self.records {
            line.clear();
            let _ = writeln!(
                line,
                "{},{:.p$e},{:.p$e},{:.p$e},{:.p$e},{}",
                r.k, r.phi, r.dist2, r.psi, r.step_norm2, r.max_staleness
            );
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Runs `params.max_iters` iterations driven by `schedule`, with the blocks
/// split contiguously across the schedule's workers and default options.
pub fn run_synchronous(
    problem: &CompositeProblem,
    params: &SolverParams,
    schedule: &DelaySchedule,
    x0: &[f64],
) -> Result<Trace> {
    let partition = BlockPartition::contiguous(problem.num_components(), schedule.num_workers())?;
    run(problem, params, &partition, schedule, x0, &RunOptions::default())
}

/// The master loop. Before iteration 0 every block is evaluated at `x₀`;
/// then at each `k` the scheduled workers refresh from the requested past
/// iterate, the table is aggregated and one inertial step is taken.
pub fn run(
    problem: &CompositeProblem,
    params: &SolverParams,
    partition: &BlockPartition,
    schedule: &DelaySchedule,
    x0: &[f64],
    options: &RunOptions,
) -> Result<Trace> {
    params.validate()?;
    let d = problem.dimension();
    check_dim(d, x0.len())?;
    check_dim(problem.num_components(), partition.num_components())?;
    if partition.num_workers() != schedule.num_workers() {
        return Err(Error::invalid(format!(
            "partition has {} blocks but schedule has {} workers",
            partition.num_workers(),
            schedule.num_workers()
        )));
    }
    if schedule.len() < params.max_iters {
        return Err(Error::invalid(format!(
            "schedule covers {} iterations, {} requested",
            schedule.len(),
            params.max_iters
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { iteration: 0, what: "initial point" });
    }
    let reference = options.reference.clone().or_else(|| problem.known_optimum().cloned());
    if let Some(r) = &reference {
        check_dim(d, r.x.len())?;
    }
    let workers = partition.num_workers();
    let tau = schedule.tau();

    let mut table = GradientTable::new(partition.clone(), d);
    for w in 0..workers {
        table.refresh(w, problem, x0, 0);
    }
    // x_{k−τ} … x_k, indexed by iteration modulo τ + 1.
    let mut history = vec![x0.to_vec(); tau + 1];

    let mut state = IterateState::new(x0);
    let mut g = vec![0.0; d];
    let mut scratch = vec![0.0; d];

    let mut records = Vec::with_capacity(params.max_iters + 1);
    let mut staleness = Vec::with_capacity((params.max_iters + 1) * workers);
    let mut stored = options.store_iterates.then(StoredIterates::default);

    let measure = |z: &[f64]| -> (f64, f64, f64) {
        let phi = if options.record_objective { objective_unchecked(problem, z) } else { f64::NAN };
        match &reference {
            Some(r) => {
                let dist2 = distance_sq(z, &r.x);
                let psi = lyapunov_from_parts(phi, r.value, dist2, params.alpha, params.eta1);
                (phi, dist2, psi)
            }
            None => (phi, f64::NAN, f64::NAN),
        }
    };

    let (phi0, dist0, psi0) = measure(x0);
    records.push(TraceRecord { k: 0, phi: phi0, dist2: dist0, psi: psi0, step_norm2: 0.0, max_staleness: 0 });
    staleness.extend(std::iter::repeat(0u32).take(workers));
    if let Some(s) = stored.as_mut() {
        s.x.push(x0.to_vec());
        s.z.push(x0.to_vec());
    }
    let divergence_cap = options.divergence_factor * phi0.abs().max(1.0);
    let mut stopped_early = false;

    for k in 0..params.max_iters {
        let step = schedule.step(k).expect("schedule length checked");
        for (&w, &src) in step.refreshed.iter().zip(&step.source_iter) {
            if src > k || k - src > tau {
                return Err(Error::ScheduleInvariant {
                    iteration: k,
                    reason: format!("worker {w} reads iterate {src}"),
                });
            }
            table.refresh(w, problem, &history[src % (tau + 1)], src);
        }
        let mut worst = 0;
        for s in table.staleness(k) {
            if s > tau {
                return Err(Error::ScheduleInvariant {
                    iteration: k,
                    reason: format!("staleness {s} exceeds τ = {tau}"),
                });
            }
            worst = worst.max(s);
            staleness.push(s as u32);
        }
        table.aggregate_into(&mut g)?;
        advance(&mut state, params, &g, problem.regularizer(), &mut scratch)?;
        history[(k + 1) % (tau + 1)].copy_from_slice(&state.x_curr);

        let step_norm2 = distance_sq(&state.z_curr, &state.z_prev);
        let (phi, dist2, psi) = measure(&state.z_curr);
        records.push(TraceRecord { k: k + 1, phi, dist2, psi, step_norm2, max_staleness: worst });
        if let Some(s) = stored.as_mut() {
            s.x.push(state.x_curr.clone());
            s.z.push(state.z_curr.clone());
            s.g.push(g.clone());
        }
        if options.record_objective && phi > divergence_cap {
            return Err(Error::Diverged {
                iteration: k + 1,
                value: phi,
                initial: phi0,
                factor: options.divergence_factor,
            });
        }
        if params.stop_tolerance.is_some_and(|tol| step_norm2.sqrt() < tol) {
            stopped_early = true;
            break;
        }
    }

    Ok(Trace {
        params: *params,
        num_workers: workers,
        tau,
        reference,
        records,
        staleness,
        iterates: stored,
        final_state: state,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::full_gradient;
    use crate::problems::{make_lasso, make_toy, LassoSpec, ToySpec};
    use crate::prox::ProxSpec;
    use crate::schedule::{schedule_synchronous, schedule_uniform_single};

    fn toy() -> CompositeProblem {
        make_toy(&ToySpec::paper()).unwrap()
    }

    #[test]
    fn aggregate_sums_blocks() {
        let p = BlockPartition::contiguous(2, 2).unwrap();
        let mut t = GradientTable::new(p, 2);
        assert!(matches!(aggregate(&t), Err(Error::UninitializedBlock(0))));
        t.set_block(0, vec![1.0, 0.0], 0).unwrap();
        assert!(matches!(aggregate(&t), Err(Error::UninitializedBlock(1))));
        t.set_block(1, vec![0.0, 2.0], 0).unwrap();
        assert_eq!(aggregate(&t).unwrap(), vec![1.0, 2.0]);
        t.set_block(0, vec![0.0, 0.0], 0).unwrap();
        t.set_block(1, vec![0.0, 0.0], 0).unwrap();
        assert_eq!(aggregate(&t).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn table_at_one_point_matches_full_gradient() {
        let problem = toy();
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut t = GradientTable::new(BlockPartition::contiguous(100, 4).unwrap(), 100);
        for w in 0..4 {
            t.refresh(w, &problem, &x, 0);
        }
        let g = aggregate(&t).unwrap();
        let full = full_gradient(&problem, &x).unwrap();
        for (a, b) in g.iter().zip(&full) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn plain_step_without_inertia_or_regularizer() {
        let state = IterateState::new(&[1.0, -1.0]);
        let params = SolverParams::piag(0.5, 1).unwrap();
        let next = ipiag_step(&state, &params, &[2.0, 4.0], &ProxSpec::zero()).unwrap();
        assert_eq!(next.z_curr, vec![0.0, -3.0]);
        assert_eq!(next.x_curr, next.z_curr);
        assert_eq!(next.k, 1);
    }

    #[test]
    fn heavy_ball_step_by_hand() {
        // x_{k-1} = (0, 0), x_k = z_k = (1, 2), g = (1, −1), α = 0.1, η₁ = 0.5:
        // y = (1.5, 3.0); y − αg = (1.4, 3.1); with λ = 1 the nonnegative
        // shrink subtracts αλ = 0.1 → z = (1.3, 3.0); η₂ = 0 → x = z.
        let state = IterateState {
            k: 3,
            x_curr: vec![1.0, 2.0],
            x_prev: vec![0.0, 0.0],
            z_curr: vec![1.0, 2.0],
            z_prev: vec![0.0, 0.0],
            y_curr: vec![1.0, 2.0],
        };
        let params = SolverParams::new(0.1, 0.5, 0.0, 1).unwrap();
        let next = ipiag_step(&state, &params, &[1.0, -1.0], &ProxSpec::nonneg_l1(1.0).unwrap()).unwrap();
        let want = [1.3, 3.0];
        for i in 0..2 {
            assert!((next.z_curr[i] - want[i]).abs() < 1e-15);
            assert_eq!(next.x_curr[i], next.z_curr[i]);
        }
        assert!((next.y_curr[0] - 1.5).abs() < 1e-15 && (next.y_curr[1] - 3.0).abs() < 1e-15);
        assert_eq!(next.x_prev, vec![1.0, 2.0]);
        assert_eq!(next.z_prev, vec![1.0, 2.0]);
    }

    #[test]
    fn nesterov_extrapolation_step() {
        let state = IterateState {
            k: 1,
            x_curr: vec![1.0],
            x_prev: vec![1.0],
            z_curr: vec![1.0],
            z_prev: vec![0.0],
            y_curr: vec![1.0],
        };
        let params = SolverParams::new(0.5, 0.0, 0.5, 1).unwrap();
        let next = ipiag_step(&state, &params, &[-2.0], &ProxSpec::zero()).unwrap();
        // z = 1 + 1 = 2, x = 2 + 0.5 (2 − 1) = 2.5
        assert_eq!(next.z_curr, vec![2.0]);
        assert_eq!(next.x_curr, vec![2.5]);
    }

    #[test]
    fn fixed_point_of_toy_problem() {
        let problem = toy();
        let xs = problem.known_optimum().unwrap().x.clone();
        let g = full_gradient(&problem, &xs).unwrap();
        for alpha in [1e-4, 1e-3, 0.01] {
            let params = SolverParams::new(alpha, 0.3, 0.2, 1).unwrap();
            let next = ipiag_step(&IterateState::new(&xs), &params, &g, problem.regularizer()).unwrap();
            let err = next.z_curr.iter().zip(&xs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "α = {alpha}: {err}");
            assert!(distance_sq(&next.x_curr, &xs).sqrt() <= 1e-12);
        }
    }

    #[test]
    fn nonfinite_gradient_is_rejected() {
        let state = IterateState::new(&[0.0]);
        let params = SolverParams::piag(1.0, 1).unwrap();
        let err = ipiag_step(&state, &params, &[f64::NAN], &ProxSpec::zero()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { iteration: 0, .. }));
    }

    #[test]
    fn params_are_validated() {
        assert!(SolverParams::new(0.0, 0.0, 0.0, 1).is_err());
        assert!(SolverParams::new(1.0, 1.5, 0.0, 1).is_err());
        assert!(SolverParams::new(1.0, 0.0, -0.1, 1).is_err());
        assert!(SolverParams::new(1.0, 1.0, 1.0, 1).is_ok());
    }

    #[test]
    fn zero_iterations_record_only_the_start() {
        let problem = toy();
        let params = SolverParams::piag(1e-4, 0).unwrap();
        let schedule = schedule_synchronous(4, 0).unwrap();
        let trace = run_synchronous(&problem, &params, &schedule, &vec![0.0; 100]).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.iterations(), 0);
        assert!((trace.records[0].dist2 - 4.0 / 9.0).abs() < 1e-15);
    }

    /// Independent proximal-gradient loop: x ← prox(x − α ∇F(x)).
    fn reference_prox_gradient(problem: &CompositeProblem, alpha: f64, x0: &[f64], iters: usize) -> Vec<Vec<f64>> {
        let mut x = x0.to_vec();
        let mut out = vec![x.clone()];
        for _ in 0..iters {
            let g = full_gradient(problem, &x).unwrap();
            let v: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
            x = problem.prox(&v, alpha);
            out.push(x.clone());
        }
        out
    }

    #[test]
    fn synchronous_schedule_is_proximal_gradient() {
        let problem = toy();
        let x0: Vec<f64> = (0..100).map(|i| ((i * 7) % 5) as f64 * 0.2).collect();
        let alpha = 2e-3;
        let params = SolverParams::piag(alpha, 300).unwrap();
        let partition = BlockPartition::contiguous(100, 4).unwrap();
        let schedule = schedule_synchronous(4, 300).unwrap();
        let trace = run(&problem, &params, &partition, &schedule, &x0, &RunOptions::default().storing_iterates()).unwrap();
        let reference = reference_prox_gradient(&problem, alpha, &x0, 300);
        let stored = trace.iterates.as_ref().unwrap();
        for (k, (z, r)) in stored.z.iter().zip(&reference).enumerate() {
            let err = z.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "k = {k}: {err}");
        }
    }

    #[test]
    fn zero_inertia_reproduces_piag_bitwise() {
        // PIAG written directly from its two-line definition.
        let problem = toy();
        let alpha = 1e-3;
        let iters = 400;
        let schedule = schedule_uniform_single(4, 4, iters, 77).unwrap();
        let partition = BlockPartition::contiguous(100, 4).unwrap();
        let x0 = vec![0.5; 100];
        let trace = run(
            &problem,
            &SolverParams::piag(alpha, iters).unwrap(),
            &partition,
            &schedule,
            &x0,
            &RunOptions::default().storing_iterates(),
        )
        .unwrap();

        let mut xs = vec![x0.clone()];
        let mut blocks: Vec<Vec<f64>> = (0..4)
            .map(|w| {
                let mut b = vec![0.0; 100];
                problem.smooth().add_block_gradient(partition.block(w), &x0, &mut b);
                b
            })
            .collect();
        for step in schedule.steps() {
            for (&w, &src) in step.refreshed.iter().zip(&step.source_iter) {
                let mut b = vec![0.0; 100];
                problem.smooth().add_block_gradient(partition.block(w), &xs[src], &mut b);
                blocks[w] = b;
            }
            let mut g = vec![0.0; 100];
            for b in &blocks {
                for (gi, bi) in g.iter_mut().zip(b) {
                    *gi += bi;
                }
            }
            let x = xs.last().unwrap();
            let v: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
            xs.push(problem.prox(&v, alpha));
        }
        let stored = trace.iterates.unwrap();
        for (a, b) in stored.x.iter().zip(&xs) {
            assert!(a.iter().zip(b).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn aggregation_identity_along_a_delayed_run() {
        let problem = toy();
        let iters = 200;
        let schedule = schedule_uniform_single(4, 4, iters, 5).unwrap();
        let partition = BlockPartition::contiguous(100, 4).unwrap();
        let params = SolverParams::new(1e-3, 0.2, 0.1, iters).unwrap();
        let x0 = vec![1.0; 100];
        let trace = run(&problem, &params, &partition, &schedule, &x0, &RunOptions::default().storing_iterates()).unwrap();
        let stored = trace.iterates.as_ref().unwrap();
        for k in 0..iters {
            let stale = trace.staleness_at(k + 1);
            let mut expect = vec![0.0; 100];
            for w in 0..4 {
                let src = k - stale[w] as usize;
                problem.smooth().add_block_gradient(partition.block(w), &stored.x[src], &mut expect);
            }
            let err = expect.iter().zip(&stored.g[k]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "k = {k}: {err}");
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let problem = toy();
        let schedule = schedule_uniform_single(4, 4, 500, 21).unwrap();
        let params = SolverParams::new(1e-3, 0.1, 0.1, 500).unwrap();
        let a = run_synchronous(&problem, &params, &schedule, &vec![0.0; 100]).unwrap();
        let b = run_synchronous(&problem, &params, &schedule, &vec![0.0; 100]).unwrap();
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        a.write_csv(&mut ca, 17).unwrap();
        b.write_csv(&mut cb, 17).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn oversized_step_trips_divergence_guard() {
        // The toy's constraint projects away the unstable direction, so use the
        // unconstrained lasso with a unit step, far beyond 2/L.
        let problem = make_lasso(&LassoSpec::desk(3)).unwrap();
        let alpha = 1.0;
        let schedule = schedule_synchronous(4, 2000).unwrap();
        let params = SolverParams::piag(alpha, 2000).unwrap();
        let x0 = vec![1.0; problem.dimension()];
        let err = run_synchronous(&problem, &params, &schedule, &x0).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn early_stop_on_small_steps() {
        let problem = toy();
        let schedule = schedule_synchronous(4, 50_000).unwrap();
        let params = SolverParams::piag(0.005, 50_000).unwrap().with_stop_tolerance(1e-9);
        let trace = run_synchronous(&problem, &params, &schedule, &vec![0.0; 100]).unwrap();
        assert!(trace.stopped_early);
        assert!(trace.iterations() < 50_000);
        assert!(trace.last().step_norm2.sqrt() < 1e-9);
    }

    #[test]
    fn short_schedule_is_rejected() {
        let problem = toy();
        let schedule = schedule_synchronous(4, 10).unwrap();
        let params = SolverParams::piag(1e-3, 11).unwrap();
        assert!(run_synchronous(&problem, &params, &schedule, &vec![0.0; 100]).is_err());
    }

    #[test]
    fn csv_layout() {
        let problem = toy();
        let schedule = schedule_uniform_single(4, 4, 3, 1).unwrap();
        let params = SolverParams::piag(1e-4, 3).unwrap();
        let trace = run_synchronous(&problem, &params, &schedule, &vec![0.0; 100]).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, 17).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,phi,dist2,psi,step_norm2,max_staleness");
        assert_eq!(lines.len(), 5);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "0");
        // 17 significant digits: d.dddddddddddddddde±x
        let mantissa = fields[1].split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").trim_start_matches('-').len(), 17);
        assert_eq!(fields[1].parse::<f64>().unwrap(), trace.records[0].phi);
    }
}
