//! Separable proximal operators.
//!
//! `prox_{αh}(v) = argmin_z { h(z) + ‖z − v‖² / (2α) }`, evaluated coordinate by
//! coordinate for every supported `h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regularizer with a proximal map.
///
/// Implementations must be reentrant; the solver may call them from any thread.
pub trait ProxOperator: Send + Sync {
    /// Writes `prox_{αh}(v)` into `out`.
    fn prox_into(&self, v: &[f64], alpha: f64, out: &mut [f64]);

    /// `h(x)`, `+∞` outside the domain.
    fn value(&self, x: &[f64]) -> f64;

    fn prox(&self, v: &[f64], alpha: f64) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.prox_into(v, alpha, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxKind {
    /// `h ≡ 0`.
    Zero,
    /// `h(x) = λ‖x‖₁`.
    L1,
    /// `h(x) = λ‖x‖₁ + I{x ≥ 0}`.
    NonnegL1,
    /// `h(x) = I{x ≥ 0}`.
    IndicatorNonneg,
}

/// A separable regularizer, serialized as `{ "kind": ..., "lambda": ... }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxSpec {
    pub kind: ProxKind,
    #[serde(default)]
    pub lambda: f64,
}

impl ProxSpec {
    pub fn new(kind: ProxKind, lambda: f64) -> Result<Self> {
        let spec = Self { kind, lambda };
        spec.validate()?;
        Ok(spec)
    }

    pub fn zero() -> Self {
        Self { kind: ProxKind::Zero, lambda: 0.0 }
    }

    pub fn l1(lambda: f64) -> Result<Self> {
        Self::new(ProxKind::L1, lambda)
    }

    pub fn nonneg_l1(lambda: f64) -> Result<Self> {
        Self::new(ProxKind::NonnegL1, lambda)
    }

    pub fn indicator_nonneg() -> Self {
        Self { kind: ProxKind::IndicatorNonneg, lambda: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::invalid(format!(
                "prox weight must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Scalar proximal map of this regularizer.
    #[inline]
    pub fn prox_scalar(&self, v: f64, alpha: f64) -> f64 {
        match self.kind {
            ProxKind::Zero => v,
            ProxKind::L1 => soft_threshold(v, alpha * self.lambda),
            ProxKind::NonnegL1 => nonneg_shrink(v, alpha * self.lambda),
            ProxKind::IndicatorNonneg => v.max(0.0),
        }
    }

    /// Scalar regularizer value.
    #[inline]
    pub fn value_scalar(&self, z: f64) -> f64 {
        match self.kind {
            ProxKind::Zero => 0.0,
            ProxKind::L1 => self.lambda * z.abs(),
            ProxKind::NonnegL1 if z < 0.0 => f64::INFINITY,
            ProxKind::NonnegL1 => self.lambda * z,
            ProxKind::IndicatorNonneg if z < 0.0 => f64::INFINITY,
            ProxKind::IndicatorNonneg => 0.0,
        }
    }
}

impl ProxOperator for ProxSpec {
    fn prox_into(&self, v: &[f64], alpha: f64, out: &mut [f64]) {
        debug_assert_eq!(v.len(), out.len());
        for (o, &vi) in out.iter_mut().zip(v) {
            *o = self.prox_scalar(vi, alpha);
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&z| self.value_scalar(z)).sum()
    }
}

// |v| = threshold maps to exactly 0.
#[inline]
fn soft_threshold(v: f64, threshold: f64) -> f64 {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}

#[inline]
fn nonneg_shrink(v: f64, threshold: f64) -> f64 {
    if v > threshold {
        v - threshold
    } else {
        0.0
    }
}

pub fn prox_zero(v: &[f64], _alpha: f64) -> Vec<f64> {
    v.to_vec()
}

pub fn prox_l1(v: &[f64], alpha: f64, lambda: f64) -> Vec<f64> {
    v.iter().map(|&vi| soft_threshold(vi, alpha * lambda)).collect()
}

pub fn prox_nonneg_l1(v: &[f64], alpha: f64, lambda: f64) -> Vec<f64> {
    v.iter().map(|&vi| nonneg_shrink(vi, alpha * lambda)).collect()
}
