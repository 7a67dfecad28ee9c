//! SplitMix64, the generator behind every seeded schedule and problem instance.
//!
//! The recurrence is fixed so that other implementations can reproduce the
//! same schedules and matrices bit for bit:
//!
//! ```text
//! state ← state + 0x9E3779B97F4A7C15            (wrapping)
//! z ← state
//! z ← (z ⊕ (z ≫ 30)) · 0xBF58476D1CE4E5B9       (wrapping)
//! z ← (z ⊕ (z ≫ 27)) · 0x94D049BB133111EB       (wrapping)
//! output z ⊕ (z ≫ 31)
//! ```
//!
//! Derived draws:
//! - `next_f64`: `(next_u64() ≫ 11) · 2⁻⁵³`, uniform on `[0, 1)`.
//! - `below(n)`: `⌊next_u64() · n / 2⁶⁴⌋` (128-bit multiply-shift).
//! - `standard_normal`: Box–Muller cosine branch with
//!   `u₁ = ((next_u64() ≫ 11) + 1) · 2⁻⁵³` and `u₂ = next_f64()`, i.e.
//!   `√(−2 ln u₁) · cos(2π u₂)`; the sine branch is discarded.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * INV_2_53;
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_outputs() {
        // Reference values of SplitMix64 seeded with 1234567.
        let mut rng = SplitMix64::new(1234567);
        let expected: [u64; 5] = [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ];
        for e in expected {
            assert_eq!(rng.next_u64(), e);
        }
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = SplitMix64::new(7);
        let mut seen = [0usize; 5];
        for _ in 0..10_000 {
            seen[rng.below(5)] += 1;
        }
        assert!(seen.iter().all(|&c| c > 1800 && c < 2200), "{seen:?}");
    }

    #[test]
    fn normal_moments() {
        let mut rng = SplitMix64::new(99);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }
}
