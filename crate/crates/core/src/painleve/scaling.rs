//! Scaling functions
//!
//! ```text
//! G±(2r) = (1 ∓ η(r)) η(r)^(−1/2) exp ∫_r^∞ (x/4) η^(−2) [(1 − η²)² − η'²] dx
//! ```
//!
//! The exponent integral is split at the integrator's own step nodes: the
//! dense output is a polynomial on each step, so each piece is smooth and a
//! single Kronrod panel usually suffices. Pieces are accumulated from `x_max`
//! downward, so a batch of `r` values costs one sweep and gives bit-identical
//! results to evaluating each `r` separately. Beyond `x_max` the asymptote
//! `ε = (2/π) K0(2x)` is substituted and the integrand kept to `O(ε²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{EtaTrajectory, PainleveError};
use crate::special_functions::{
    bessel_k0_scaled, bessel_k1_scaled, integrate_quadrature, Limit, Quadrature, ToleranceSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFunctionValue {
    pub r: f64,
    pub g_plus: f64,
    pub g_minus: f64,
    pub est_error: f64,
}

/// `(x/4) η^(−2) [(1 − η²)² − η'²]` written in the deficit `ε = 1 − η`.
pub fn scaling_integrand(x: f64, deficit: f64, eta_prime: f64) -> f64 {
    let eta = 1.0 - deficit;
    let one_minus_eta_sq = deficit * (2.0 - deficit);
    0.25 * x * (one_minus_eta_sq * one_minus_eta_sq - eta_prime * eta_prime) / (eta * eta)
}

/// `∫_{x0}^∞ (x/4)[4ε² − ε'²] dx` with `ε = (2/π) K0(2x)`, the `O(ε²)` tail of
/// the exponent integral. Equals `(4/π²) ∫ x [K0(2x)² − K1(2x)²] dx`.
pub fn tail_integral(x0: f64, tol: &ToleranceSpec) -> Result<Quadrature, PainleveError> {
    let f = |x: f64| {
        let u = 2.0 * x;
        let k0 = bessel_k0_scaled(u).unwrap_or(f64::NAN);
        let k1 = bessel_k1_scaled(u).unwrap_or(f64::NAN);
        let damp = (-2.0 * u).exp();
        if damp == 0.0 {
            return 0.0;
        }
        4.0 / (PI * PI) * x * damp * (k0 - k1) * (k0 + k1)
    };
    Ok(integrate_quadrature(f, x0, Limit::Infinity, tol)?)
}

/// Running exponent integral from each node down to `x_max` (plus tail).
struct ExponentSweep<'a> {
    traj: &'a EtaTrajectory,
    tol: ToleranceSpec,
    nodes: Vec<f64>,
    // cumulative[i] = ∫_{nodes[i]}^∞, filled from the top down.
    cumulative: Vec<f64>,
    cumulative_err: Vec<f64>,
    lowest: usize,
}

impl<'a> ExponentSweep<'a> {
    fn new(traj: &'a EtaTrajectory, tol: &ToleranceSpec) -> Result<Self, PainleveError> {
        let nodes = traj.nodes_ascending();
        let n = nodes.len();
        let tail = tail_integral(traj.x_max(), tol)?;
        let mut cumulative = vec![0.0; n];
        let mut cumulative_err = vec![0.0; n];
        cumulative[n - 1] = tail.value;
        cumulative_err[n - 1] = tail.abs_error;
        Ok(Self {
            traj,
            tol: *tol,
            nodes,
            cumulative,
            cumulative_err,
            lowest: n - 1,
        })
    }

    fn piece(&self, a: f64, b: f64) -> Result<Quadrature, PainleveError> {
        let traj = self.traj;
        let f = |x: f64| match traj.eval(x) {
            Some(p) => scaling_integrand(x, p.deficit, p.eta_prime),
            None => f64::NAN,
        };
        Ok(integrate_quadrature(f, a, b, &self.tol)?)
    }

    /// Extend the cumulative table down to node `idx`.
    fn extend_to(&mut self, idx: usize) -> Result<(), PainleveError> {
        while self.lowest > idx {
            let i = self.lowest - 1;
            let q = self.piece(self.nodes[i], self.nodes[i + 1])?;
            self.cumulative[i] = self.cumulative[i + 1] + q.value;
            self.cumulative_err[i] = self.cumulative_err[i + 1] + q.abs_error;
            self.lowest = i;
        }
        Ok(())
    }

    /// `(∫_r^∞, error estimate)`.
    fn exponent(&mut self, r: f64) -> Result<(f64, f64), PainleveError> {
        // first node >= r
        let j = self.nodes.partition_point(|&n| n < r);
        self.extend_to(j)?;
        if self.nodes[j] == r {
            return Ok((self.cumulative[j], self.cumulative_err[j]));
        }
        let q = self.piece(r, self.nodes[j])?;
        Ok((self.cumulative[j] + q.value, self.cumulative_err[j] + q.abs_error))
    }

    /// Crude trapezoid bound on how the trajectory's own error moves the exponent.
    fn propagated_error(&self, r: f64) -> f64 {
        let traj = self.traj;
        let g = |x: f64| -> f64 {
            let (Some(p), Some((e_eta, e_der))) = (traj.eval(x), traj.error_at(x)) else {
                return 0.0;
            };
            let eta = p.eta;
            let a = p.deficit * (2.0 - p.deficit); // 1 − η²
            let bracket = a * a - p.eta_prime * p.eta_prime;
            let d_eta = 0.25 * x * (-2.0 * bracket / (eta * eta * eta) - 4.0 * a / eta);
            let d_der = 0.25 * x * (-2.0 * p.eta_prime) / (eta * eta);
            d_eta.abs() * e_eta + d_der.abs() * e_der
        };
        let mut pts: Vec<f64> = vec![r];
        pts.extend(self.nodes.iter().copied().filter(|&n| n > r));
        pts.windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (g(w[0]) + g(w[1])))
            .sum()
    }

    fn value(&mut self, r: f64) -> Result<ScalingFunctionValue, PainleveError> {
        let (lo, hi) = (self.traj.x_min(), self.traj.x_max());
        if !(r >= lo && r <= hi) {
            return Err(PainleveError::OutOfRange {
                r,
                x_min: lo,
                x_max: hi,
            });
        }
        let p = self.traj.eval(r).expect("r inside window");
        let (exponent, quad_err) = self.exponent(r)?;
        let factor = exponent.exp();
        let inv_sqrt = p.eta.powf(-0.5);
        let g_plus = p.deficit * inv_sqrt * factor;
        let g_minus = (2.0 - p.deficit) * inv_sqrt * factor;

        let (e_eta, _) = self.traj.error_at(r).unwrap_or((0.0, 0.0));
        // ∂/∂η of (1 ∓ η) η^(−1/2)
        let d_plus = -inv_sqrt - 0.5 * p.deficit * inv_sqrt / p.eta;
        let d_minus = inv_sqrt - 0.5 * (2.0 - p.deficit) * inv_sqrt / p.eta;
        let exp_err = quad_err + self.propagated_error(r);
        let est_error = (d_plus.abs().max(d_minus.abs()) * factor * e_eta
            + g_minus.abs().max(g_plus.abs()) * exp_err)
            .max(f64::EPSILON * g_minus.abs());
        Ok(ScalingFunctionValue {
            r,
            g_plus,
            g_minus,
            est_error,
        })
    }
}

/// `G±(2r)` for one `r` in the trajectory window.
pub fn scaling_function(
    traj: &EtaTrajectory,
    r: f64,
    tol: &ToleranceSpec,
) -> Result<ScalingFunctionValue, PainleveError> {
    let mut sweep = ExponentSweep::new(traj, tol)?;
    sweep.value(r)
}

/// `G±(2r)` on an ascending grid, sharing one sweep of the exponent integral.
pub fn scaling_table(
    traj: &EtaTrajectory,
    r_grid: &[f64],
    tol: &ToleranceSpec,
) -> Result<Vec<ScalingFunctionValue>, PainleveError> {
    if let Some(i) = r_grid.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(PainleveError::UnsortedGrid { index: i + 1 });
    }
    if r_grid.is_empty() {
        return Ok(Vec::new());
    }
    let mut sweep = ExponentSweep::new(traj, tol)?;
    r_grid.iter().rev().map(|&r| sweep.value(r)).collect::<Result<Vec<_>, _>>().map(|mut v| {
        v.reverse();
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::painleve::{default_tolerance, solve_eta, PainleveIIIParams};
    use crate::special_functions::{bessel_k0, bessel_k1};

    fn traj() -> EtaTrajectory {
        solve_eta(&PainleveIIIParams::ising(), 12.0, 1.0, &default_tolerance()).unwrap()
    }

    #[test]
    fn integrand_vanishes_at_fixed_point() {
        assert_eq!(scaling_integrand(3.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn tail_matches_closed_form() {
        // ∫_u^∞ t [K0(t)² − K1(t)²] dt = −u² (K0² − K1²) − u K0 K1, evaluated at u = 2r
        let r = 6.0;
        let u = 2.0 * r;
        let (k0, k1) = (bessel_k0(u).unwrap(), bessel_k1(u).unwrap());
        let closed = -(u * u * (k0 * k0 - k1 * k1) + u * k0 * k1) / (PI * PI);
        let tight = ToleranceSpec::new(1e-30, 1e-13, 1000).unwrap();
        let q = tail_integral(r, &tight).unwrap();
        assert!(((q.value - closed) / closed).abs() < 1e-8, "{} vs {closed}", q.value);
        // frozen high-precision value of the same integral
        assert!((closed - (-2.36251672614574512e-13)).abs() < 1e-24);
    }

    #[test]
    fn full_integrand_with_asymptote_matches_expansion() {
        let r = 6.0;
        let tight = ToleranceSpec::new(1e-30, 1e-13, 1000).unwrap();
        let full = integrate_quadrature(
            |x: f64| {
                let eps = 2.0 / PI * bessel_k0(2.0 * x).unwrap_or(0.0);
                let der = 4.0 / PI * bessel_k1(2.0 * x).unwrap_or(0.0);
                scaling_integrand(x, eps, der)
            },
            r,
            Limit::Infinity,
            &tight,
        )
        .unwrap();
        let expansion = tail_integral(r, &tight).unwrap();
        assert!((full.value - expansion.value).abs() < 1e-8);
        assert!(((full.value - expansion.value) / expansion.value).abs() < 1e-4);
    }

    #[test]
    fn large_r_limits() {
        let t = traj();
        let v = scaling_function(&t, 8.0, &default_tolerance()).unwrap();
        let lead = 2.0 / PI * bessel_k0(16.0).unwrap();
        assert!((v.g_plus / lead - 1.0).abs() < 1e-3, "{}", v.g_plus / lead);
        assert!((v.g_minus - 2.0).abs() < 1e-3);
        assert!(v.g_plus > 0.0 && v.g_minus > 0.0);
    }

    #[test]
    fn table_agrees_with_pointwise() {
        let t = traj();
        let tol = default_tolerance();
        let table = scaling_table(&t, &[4.0, 6.0, 8.0], &tol).unwrap();
        for v in table {
            let single = scaling_function(&t, v.r, &tol).unwrap();
            assert!((single.g_plus - v.g_plus).abs() <= 1e-12 * v.g_plus.abs());
            assert!((single.g_minus - v.g_minus).abs() <= 1e-12 * v.g_minus.abs());
        }
    }

    #[test]
    fn table_edge_cases() {
        let t = traj();
        let tol = default_tolerance();
        assert!(scaling_table(&t, &[], &tol).unwrap().is_empty());
        assert!(matches!(
            scaling_table(&t, &[4.0, 3.0], &tol),
            Err(PainleveError::UnsortedGrid { index: 1 })
        ));
        assert!(matches!(
            scaling_function(&t, 0.5, &tol),
            Err(PainleveError::OutOfRange { .. })
        ));
        let at_end = scaling_function(&t, 12.0, &tol).unwrap();
        assert!(at_end.g_plus > 0.0);
    }

    #[test]
    fn exponent_tail_is_tiny_beyond_twelve() {
        let q = tail_integral(12.0, &default_tolerance()).unwrap();
        assert!(q.value < 0.0 && q.value.abs() < 1e-20);
        let _ = bessel_k1(24.0).unwrap();
    }
}
