//! Numerical kernels shared by the physics modules.
//!
//! * [`bessel`]: modified Bessel functions `K0`, `K1` of real positive argument.
//! * [`ode`]: Dormand–Prince 5(4) integrator with PI step control and dense output.
//! * [`quadrature`]: adaptive Gauss–Kronrod (7, 15) quadrature on finite and
//!   semi-infinite ranges.
//!
//! Everything here is a pure function of its inputs.

pub mod bessel;
pub mod ode;
pub mod quadrature;

pub use bessel::{bessel_k0, bessel_k0_scaled, bessel_k1, bessel_k1_scaled, BesselError};
pub use ode::{integrate_ode, OdeError, OdeIntegrator, OdeSolution};
pub use quadrature::{integrate_quadrature, Limit, Quadrature, QuadratureError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Error-control settings shared by the integrator and the quadrature.
///
/// `max_steps` bounds accepted + rejected ODE steps, or the number of
/// quadrature subintervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    abs_tol: f64,
    rel_tol: f64,
    max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ToleranceError {
    #[error("absolute tolerance must be positive and finite, got {0}")]
    AbsTol(f64),
    #[error("relative tolerance must be positive and finite, got {0}")]
    RelTol(f64),
    #[error("max_steps must be at least 1")]
    MaxSteps,
}

impl ToleranceSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_steps: usize) -> Result<Self, ToleranceError> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(ToleranceError::AbsTol(abs_tol));
        }
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(ToleranceError::RelTol(rel_tol));
        }
        if max_steps == 0 {
            return Err(ToleranceError::MaxSteps);
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_steps,
        })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    /// Both tolerances divided by `factor`, same step budget.
    pub fn tightened(&self, factor: f64) -> Self {
        assert!(factor >= 1.0, "tightening factor must be >= 1");
        Self {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            max_steps: self.max_steps,
        }
    }

    pub fn with_max_steps(&self, max_steps: usize) -> Self {
        Self {
            max_steps: max_steps.max(1),
            ..*self
        }
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_steps: 100_000,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_tolerances() {
        assert_eq!(
            ToleranceSpec::new(0.0, 1e-6, 10),
            Err(ToleranceError::AbsTol(0.0))
        );
        assert!(matches!(
            ToleranceSpec::new(1e-6, f64::NAN, 10),
            Err(ToleranceError::RelTol(_))
        ));
        assert_eq!(
            ToleranceSpec::new(1e-6, 1e-6, 0),
            Err(ToleranceError::MaxSteps)
        );
    }

    #[test]
    fn tightening_divides_both_tolerances() {
        let t = ToleranceSpec::new(1e-8, 1e-6, 7).unwrap().tightened(10.0);
        assert_eq!(t.abs_tol(), 1e-9);
        assert_eq!(t.rel_tol(), 1e-7);
        assert_eq!(t.max_steps(), 7);
    }
}
