//! Helpers shared by the integration tests.

#![allow(dead_code)]

use ipiag::problem::full_gradient;
use ipiag::rates::{lemma2_condition, lemma2_split, Lemma2Params};
use ipiag::rng::SplitMix64;
use ipiag::{CompositeProblem, ProxOperator, ProxSpec};

/// Minimizes `h(z) + (z − v)²/(2α)` over a bracket around `v` by ternary
/// search; `h` may be `+∞` on part of the line.
pub fn brute_force_prox(spec: &ProxSpec, v: f64, alpha: f64) -> f64 {
    let objective = |z: f64| spec.value_scalar(z) + (z - v) * (z - v) / (2.0 * alpha);
    let radius = 1.0 + v.abs() + alpha * spec.lambda;
    let (mut lo, mut hi) = (v - radius, v + radius);
    for _ in 0..300 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) < objective(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// Synchronous proximal gradient `z ← prox(z − α∇F(z))`, every iterate kept.
pub fn proximal_gradient_path(problem: &CompositeProblem, alpha: f64, x0: &[f64], iters: usize) -> Vec<Vec<f64>> {
    let mut path = vec![x0.to_vec()];
    let mut z = x0.to_vec();
    for _ in 0..iters {
        let g = full_gradient(problem, &z).unwrap();
        let v: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - alpha * gi).collect();
        z = problem.regularizer().prox(&v, alpha);
        path.push(z.clone());
    }
    path
}

pub struct SaturatedCase {
    pub params: Lemma2Params,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

/// Random feasible two-step parameters with sequences meeting the recurrence
/// with equality. `b₁` sits at or just above the condition threshold and
/// `ω_k` takes a random fraction of the room that keeps `V` nonnegative.
/// With `zero_b` the `B` and `b₂` terms vanish and the recurrence also holds
/// at `k = 0`, so the one-step lemma applies to the same sequences.
pub fn saturated_lemma2(rng: &mut SplitMix64, len: usize, zero_b: bool) -> SaturatedCase {
    let big_a = rng.uniform(0.05, 0.9);
    let big_b = if zero_b { 0.0 } else { rng.uniform(0.0, 0.98 - big_a) };
    let c = rng.uniform(0.0, 1.0);
    let k0 = rng.below(6);
    let b2 = if zero_b { 0.0 } else { rng.uniform(0.0, 1.0) };
    let a = lemma2_split(big_a, big_b).unwrap().a;
    let geometric: f64 = (0..=k0).map(|j| a.powi(-(j as i32))).sum();
    let slack = if rng.below(4) == 0 { 0.0 } else { rng.uniform(0.0, 0.5) };
    let mut params = Lemma2Params { big_a, big_b, b1: b2 / a + c * geometric * (1.0 + slack), b2, c, k0 };
    // At zero slack the two sides can differ in the last bit; move b₁ up
    // until the condition holds as computed.
    while !lemma2_condition(&params).unwrap() {
        params.b1 += params.b1 * f64::EPSILON;
    }
    let b1 = params.b1;

    let mut v = vec![rng.uniform(0.0, 10.0)];
    let mut w = vec![0.0; len];
    let room = b1 - c;
    let fraction = |rng: &mut SplitMix64| if room > 0.0 { rng.uniform(0.0, 1.0) / room } else { 0.0 };
    w[0] = fraction(rng) * big_a * v[0];
    if zero_b {
        v.push(big_a * v[0] - b1 * w[0] + c * w[0]);
    } else {
        v.push(rng.uniform(0.0, 10.0));
    }
    for k in 1..len - 1 {
        w[k] = fraction(rng) * (big_a * v[k] + big_b * v[k - 1]);
        let window: f64 = w[k.saturating_sub(k0)..=k].iter().sum();
        let next = big_a * v[k] + big_b * v[k - 1] - b1 * w[k] + b2 * w[k - 1] + c * window;
        v.push(next.max(0.0));
    }
    SaturatedCase { params, v, w }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
