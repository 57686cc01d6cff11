//! Deterministic background potentials.
//!
//! On unbounded domains the heat trace only exists when the potential
//! confines, and the Monte Carlo spatial truncation needs a quantitative
//! handle on how fast it grows. A `Growth` certificate records a pointwise
//! lower bound `V(x) >= |kappa x|^a - nu`; estimators on unbounded domains
//! refuse to run without one (or an explicit truncation radius).

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Pointwise lower bound `V(x) >= |kappa x|^a - nu`.
#[derive(Debug, Clone, Copy)]
pub struct Growth {
    pub kappa: f64,
    pub exponent: f64,
    pub offset: f64,
}

impl Growth {
    pub fn new(kappa: f64, exponent: f64, offset: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Input(format!("growth rate must be positive and finite, got {kappa}")));
        }
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::Input(format!("growth exponent must be positive and finite, got {exponent}")));
        }
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(Error::Input(format!("growth offset must be nonnegative and finite, got {offset}")));
        }
        Ok(Growth { kappa, exponent, offset })
    }
}

/// A deterministic potential with an optional growth certificate.
#[derive(Clone)]
pub struct Potential {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    growth: Option<Growth>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential").field("growth", &self.growth).finish_non_exhaustive()
    }
}

impl Potential {
    /// Potential without a growth certificate (fine on bounded domains).
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Potential { f: Arc::new(f), growth: None }
    }

    /// Potential with a certified lower bound `V(x) >= |kappa x|^a - nu`.
    pub fn with_growth(f: impl Fn(f64) -> f64 + Send + Sync + 'static, growth: Growth) -> Self {
        Potential { f: Arc::new(f), growth: Some(growth) }
    }

    /// The zero potential.
    pub fn zero() -> Self {
        Self::new(|_| 0.0)
    }

    /// `V(x) = |kappa x|^a`, certified.
    pub fn abs_power(kappa: f64, exponent: f64) -> Result<Self> {
        let growth = Growth::new(kappa, exponent, 0.0)?;
        Ok(Self::with_growth(move |x| (kappa * x).abs().powf(exponent), growth))
    }

    /// `V(x) = x^2`, certified.
    pub fn harmonic() -> Self {
        Self::abs_power(1.0, 2.0).expect("valid growth parameters")
    }

    /// `V(x) = |x|`, certified. On the half line this is the linear ramp.
    pub fn linear() -> Self {
        Self::abs_power(1.0, 1.0).expect("valid growth parameters")
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn growth(&self) -> Option<Growth> {
        self.growth
    }
}
