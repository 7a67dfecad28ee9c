//! Delay schedules for the simulated master/worker protocol.
//!
//! A [`DelaySchedule`] records, for every master iteration `k`, which workers
//! deliver a fresh block gradient (`ℛ_k`) and the index of the master iterate
//! each of those gradients was computed at. Replaying a schedule against the
//! gradient table reproduces the asynchronous aggregation exactly and
//! deterministically.
//!
//! Staleness of worker `w` at iteration `k` is `k − src_w`, where `src_w` is
//! the iterate index behind its stored gradient. Before the first iteration
//! every block is computed at `x₀`, so `src_w = 0` initially. Worker ids are
//! zero-based.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Disjoint contiguous blocks of component indices covering `0..N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    blocks: Vec<Range<usize>>,
}

impl BlockPartition {
    /// Splits `0..num_components` into `num_workers` contiguous blocks whose
    /// sizes differ by at most one; block `w` is
    /// `⌊wN/W⌋ .. ⌊(w+1)N/W⌋`, which is the equal split when `W` divides `N`.
    pub fn contiguous(num_components: usize, num_workers: usize) -> Result<Self> {
        if num_workers == 0 || num_workers > num_components {
            return Err(Error::invalid(format!(
                "need 1 ≤ workers ≤ components, got {num_workers} workers for {num_components} components"
            )));
        }
        let blocks = (0..num_workers)
            .map(|w| w * num_components / num_workers..(w + 1) * num_components / num_workers)
            .collect();
        Ok(Self { blocks })
    }

    /// Accepts explicit blocks after checking they partition `0..num_components`.
    pub fn from_ranges(num_components: usize, mut blocks: Vec<Range<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::invalid("a partition needs at least one block"));
        }
        let mut sorted: Vec<_> = blocks.iter().cloned().enumerate().collect();
        sorted.sort_by_key(|(_, r)| r.start);
        let mut next = 0;
        for (w, r) in &sorted {
            if r.start != next || r.end <= r.start {
                return Err(Error::invalid(format!(
                    "block {w} ({r:?}) leaves a gap, overlaps, or is empty"
                )));
            }
            next = r.end;
        }
        if next != num_components {
            return Err(Error::invalid(format!("blocks cover 0..{next}, expected 0..{num_components}")));
        }
        blocks.shrink_to_fit();
        Ok(Self { blocks })
    }

    pub fn num_workers(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_components(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    pub fn block(&self, worker: usize) -> Range<usize> {
        self.blocks[worker].clone()
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }
}

/// One master iteration: the workers whose gradients arrive and the iterate
/// index each was computed at (`source_iter[i]` belongs to `refreshed[i]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub k: usize,
    pub refreshed: Vec<usize>,
    pub source_iter: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelaySchedule {
    num_workers: usize,
    tau: usize,
    steps: Vec<ScheduleStep>,
}

impl DelaySchedule {
    /// Wraps hand-built steps; fails if any invariant is violated.
    pub fn from_steps(num_workers: usize, tau: usize, steps: Vec<ScheduleStep>) -> Result<Self> {
        let schedule = Self { num_workers, tau, steps };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn num_workers(&self) -> usize {
        self.num_workers
    }

    /// Declared delay bound `τ`.
    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Number of iterations covered.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn step(&self, k: usize) -> Option<&ScheduleStep> {
        self.steps.get(k)
    }

    pub fn steps(&self) -> &[ScheduleStep] {
        &self.steps
    }

    /// Checks every invariant: steps are numbered `0..K`, worker ids are in
    /// range and unique per step, sources are not in the future, and every
    /// worker's staleness stays within `τ`.
    pub fn validate(&self) -> Result<()> {
        if self.num_workers == 0 {
            return Err(Error::invalid("schedule needs at least one worker"));
        }
        self.replay(|_, _| ()).map(|_| ())
    }

    /// Replays the schedule, calling `visit(k, staleness)` after the refreshes
    /// of iteration `k` are applied. Returns the largest staleness seen.
    pub fn replay(&self, mut visit: impl FnMut(usize, &[usize])) -> Result<usize> {
        let mut src = vec![0usize; self.num_workers];
        let mut staleness = vec![0usize; self.num_workers];
        let mut seen = vec![false; self.num_workers];
        let mut worst = 0;
        for (k, step) in self.steps.iter().enumerate() {
            let fail = |reason: String| Error::ScheduleInvariant { iteration: k, reason };
            if step.k != k {
                return Err(fail(format!("record carries k = {}", step.k)));
            }
            if step.refreshed.len() != step.source_iter.len() {
                return Err(fail("refreshed and source_iter lengths differ".into()));
            }
            seen.iter_mut().for_each(|s| *s = false);
            for (&w, &s) in step.refreshed.iter().zip(&step.source_iter) {
                if w >= self.num_workers {
                    return Err(fail(format!("worker id {w} out of range")));
                }
                if std::mem::replace(&mut seen[w], true) {
                    return Err(fail(format!("worker {w} refreshed twice")));
                }
                if s > k {
                    return Err(fail(format!("worker {w} reads future iterate {s}")));
                }
                src[w] = s;
            }
            for (st, &s) in staleness.iter_mut().zip(&src) {
                *st = k - s;
            }
            let max = staleness.iter().copied().max().unwrap_or(0);
            if max > self.tau {
                let w = staleness.iter().position(|&s| s == max).unwrap_or(0);
                return Err(fail(format!("worker {w} staleness {max} exceeds τ = {}", self.tau)));
            }
            worst = worst.max(max);
            visit(k, &staleness);
        }
        Ok(worst)
    }

    /// One JSON object per line: `{"k":…,"refreshed":[…],"source_iter":[…]}`.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&serde_json::to_string(step)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_json_lines(num_workers: usize, tau: usize, text: &str) -> Result<Self> {
        let steps = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<Vec<ScheduleStep>, _>>()?;
        Self::from_steps(num_workers, tau, steps)
    }
}

/// Every worker refreshes at the current iterate at every iteration (`τ = 0`).
pub fn schedule_synchronous(num_workers: usize, iterations: usize) -> Result<DelaySchedule> {
    if num_workers == 0 {
        return Err(Error::invalid("schedule needs at least one worker"));
    }
    let steps = (0..iterations)
        .map(|k| ScheduleStep {
            k,
            refreshed: (0..num_workers).collect(),
            source_iter: vec![k; num_workers],
        })
        .collect();
    Ok(DelaySchedule { num_workers, tau: 0, steps })
}

/// One uniformly chosen worker returns per iteration, with its gradient
/// computed at the current iterate; the other blocks age by one.
///
/// Uniform selection alone does not bound staleness, so the choice is
/// overridden whenever it would make the bound `τ` unreachable: each worker
/// must refresh no later than iteration `src_w + τ + 1`, and if the pending
/// deadlines of the workers left out could not all be met with one refresh
/// per future iteration, the worker with the earliest deadline (lowest id on
/// ties) refreshes instead. When `num_workers > τ + 1` the bound can only be
/// kept by refreshing several workers at once, and further earliest-deadline
/// workers are added until the remainder is schedulable.
///
/// Exactly one draw `below(num_workers)` is consumed per iteration.
pub fn schedule_uniform_single(num_workers: usize, tau: usize, iterations: usize, seed: u64) -> Result<DelaySchedule> {
    if num_workers == 0 {
        return Err(Error::invalid("schedule needs at least one worker"));
    }
    let mut rng = SplitMix64::new(seed);
    let mut deadline = vec![tau + 1; num_workers];
    let mut steps = Vec::with_capacity(iterations);
    let mut order: Vec<usize> = (0..num_workers).collect();
    for k in 0..iterations {
        let pick = rng.below(num_workers);
        order.sort_by_key(|&w| (deadline[w], w));
        let mut refreshed = vec![pick];
        if !remainder_schedulable(&order, &deadline, &refreshed, k) {
            refreshed.clear();
            for &w in &order {
                refreshed.push(w);
                if remainder_schedulable(&order, &deadline, &refreshed, k) {
                    break;
                }
            }
        }
        refreshed.sort_unstable();
        for &w in &refreshed {
            deadline[w] = k + tau + 1;
        }
        steps.push(ScheduleStep { k, source_iter: vec![k; refreshed.len()], refreshed });
    }
    Ok(DelaySchedule { num_workers, tau, steps })
}

// Workers not in `taken`, in deadline order, can each be refreshed at a
// distinct iteration k+1, k+2, … no later than their deadlines.
fn remainder_schedulable(order: &[usize], deadline: &[usize], taken: &[usize], k: usize) -> bool {
    order
        .iter()
        .filter(|w| !taken.contains(w))
        .enumerate()
        .all(|(i, &w)| deadline[w] >= k + 1 + i)
}

/// Largest staleness over the whole schedule; a violation of the declared
/// bound is reported as an error rather than clamped.
pub fn max_observed_staleness(schedule: &DelaySchedule) -> Result<usize> {
    schedule.replay(|_, _| ())
}

/// The aggregation example of the master/worker diagram: four workers, and at
/// `k = 4` the table holds `G₁(x₂)`, `G₂(x₁)`, `G₃(x₂)`, `G₄(x₀)` (zero-based
/// workers 0–3).
pub fn figure_one_example() -> DelaySchedule {
    let step = |k: usize, refreshed: Vec<usize>, source_iter: Vec<usize>| ScheduleStep { k, refreshed, source_iter };
    let steps = vec![
        step(0, vec![], vec![]),
        step(1, vec![], vec![]),
        step(2, vec![1], vec![1]),
        step(3, vec![0], vec![2]),
        step(4, vec![2], vec![2]),
    ];
    DelaySchedule { num_workers: 4, tau: 4, steps }
}
