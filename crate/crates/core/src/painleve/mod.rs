//! Painlevé III transcendent behind the Ising scaling functions.
//!
//! The equation is
//!
//! ```text
//! η'' = η'²/η − η'/x + (αη² + β)/x + γη³ + δ/η
//! ```
//!
//! and the Ising case (`α = β = 0`, `γ = −δ = 1`) is selected by the boundary
//! behaviour `η(x) ~ 1 − (2/π) K0(2x)` as `x → ∞`. The solver shoots backward
//! from a large `x_max` using that asymptote as Cauchy data.
//!
//! Internally the unknown is the deficit `ε = 1 − η`. Near `x_max` it is of
//! order 1e-11, far below the spacing of doubles around 1, so integrating `η`
//! directly would lose every significant digit of the correction terms.

mod scaling;

pub use scaling::{scaling_function, scaling_integrand, scaling_table, tail_integral, ScalingFunctionValue};

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special_functions::{
    bessel_k0, bessel_k1, BesselError, OdeError, OdeIntegrator, OdeSolution, QuadratureError,
    ToleranceSpec,
};

/// Default right end of the integration window.
pub const DEFAULT_X_MAX: f64 = 12.0;
/// Default left end of the integration window.
pub const DEFAULT_X_MIN: f64 = 0.5;
/// Default spacing of trajectory samples.
pub const DEFAULT_GRID_STEP: f64 = 0.25;
/// Bound on the recorded equation residual at every sample.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// The asymptote must be this small at `x_max` for the Cauchy data to be usable.
pub const MAX_START_AMPLITUDE: f64 = 1e-8;
/// Finite-difference spacing used for the `η''` cross-check.
pub const FD_STEP: f64 = 2.5e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PainleveError {
    #[error("only the Ising parameters (α = β = 0, γ = −δ = 1) have the built-in boundary condition")]
    UnsupportedParams,
    #[error("invalid window: need 0 < x_min < x_max < ∞, got [{x_min}, {x_max}]")]
    InvalidWindow { x_min: f64, x_max: f64 },
    #[error("x_max = {x_max} is too small: asymptotic amplitude {amplitude:e} exceeds {MAX_START_AMPLITUDE:e}")]
    AsymptoteNotReached { x_max: f64, amplitude: f64 },
    #[error("grid point {x} lies outside [{x_min}, {x_max}] or is not finite")]
    GridOutOfWindow { x: f64, x_min: f64, x_max: f64 },
    #[error("transcendent left the positive window; last good x = {last_good_x}")]
    PartialTrajectory { last_good_x: f64 },
    #[error("integration failed: {0}")]
    Integration(OdeError),
    #[error("residual undefined at x = {x}, eta = {eta}")]
    Domain { x: f64, eta: f64 },
    #[error("r = {r} outside trajectory window [{x_min}, {x_max}]")]
    OutOfRange { r: f64, x_min: f64, x_max: f64 },
    #[error("r grid must be sorted ascending (index {index})")]
    UnsortedGrid { index: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

/// Coefficients of the Painlevé III equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PainleveIIIParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl PainleveIIIParams {
    pub const fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    /// `α = β = 0`, `γ = 1`, `δ = −1`.
    pub const fn ising() -> Self {
        Self::new(0.0, 0.0, 1.0, -1.0)
    }

    pub fn is_ising(&self) -> bool {
        *self == Self::ising()
    }

    /// `η''` from the equation, with the `γη³ + δ/η` pair rewritten in terms
    /// of `ε = 1 − η` so that `γ + δ = 0` cancels exactly.
    fn second_derivative(&self, x: f64, eps: f64, eta_p: f64) -> f64 {
        let eta = 1.0 - eps;
        // (1 − ε)^4 = 1 − ε q(ε)
        let q = eps * (4.0 - eps * (6.0 - eps * (4.0 - eps)));
        let cubic = (self.gamma + self.delta - self.gamma * q) / eta;
        eta_p * eta_p / eta - eta_p / x + (self.alpha * eta * eta + self.beta) / x + cubic
    }
}

impl Default for PainleveIIIParams {
    fn default() -> Self {
        Self::ising()
    }
}

/// `η'' − [η'²/η − η'/x + (αη² + β)/x + γη³ + δ/η]`.
pub fn residual(
    params: &PainleveIIIParams,
    x: f64,
    eta: f64,
    eta_prime: f64,
    eta_second: f64,
) -> Result<f64, PainleveError> {
    if eta == 0.0 || x == 0.0 || !eta.is_finite() || !x.is_finite() {
        return Err(PainleveError::Domain { x, eta });
    }
    let p = params;
    let rhs = eta_prime * eta_prime / eta - eta_prime / x
        + (p.alpha * eta * eta + p.beta) / x
        + p.gamma * eta * eta * eta
        + p.delta / eta;
    Ok(eta_second - rhs)
}

/// Leading asymptote: `(ε, ε') = ((2/π) K0(2x), −(4/π) K1(2x))`.
pub fn asymptotic_deficit(x: f64) -> Result<(f64, f64), BesselError> {
    let k0 = bessel_k0(2.0 * x)?;
    let k1 = bessel_k1(2.0 * x)?;
    Ok((2.0 / PI * k0, -4.0 / PI * k1))
}

/// Tolerances used when the caller has no preference: 1e-12 relative, with an
/// absolute floor far below the 1e-11 size of `1 − η` at `x_max = 12`.
pub fn default_tolerance() -> ToleranceSpec {
    ToleranceSpec::new(1e-24, 1e-12, 200_000).expect("valid constants")
}

/// Evenly spaced samples `x_min, x_min + step, …`, always ending at `x_max`.
pub fn uniform_grid(x_min: f64, x_max: f64, step: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    if !(step > 0.0) || !(x_max > x_min) {
        return grid;
    }
    let n = ((x_max - x_min) / step + 1e-9).floor() as usize;
    for i in 0..=n {
        grid.push(x_min + step * i as f64);
    }
    if x_max - grid.last().copied().unwrap_or(x_min) > 1e-9 * step {
        grid.push(x_max);
    } else if let Some(last) = grid.last_mut() {
        *last = x_max;
    }
    grid
}

/// One recorded point of the transcendent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaSample {
    pub x: f64,
    pub eta: f64,
    pub eta_prime: f64,
    /// `1 − η`, carried separately at full relative precision.
    pub deficit: f64,
    /// Equation residual with `η''` from finite differences of `η'`.
    pub residual: f64,
    /// Accumulated local-error bound on `η` at this point.
    pub est_error: f64,
}

/// Pointwise value from the dense solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaPoint {
    pub eta: f64,
    pub eta_prime: f64,
    pub deficit: f64,
}

/// The transcendent on `[x_min, x_max]`: recorded samples plus dense output.
#[derive(Debug, Clone)]
pub struct EtaTrajectory {
    params: PainleveIIIParams,
    samples: Vec<EtaSample>,
    x_min: f64,
    x_max: f64,
    tol: ToleranceSpec,
    solution: Arc<OdeSolution>,
}

impl EtaTrajectory {
    pub fn params(&self) -> &PainleveIIIParams {
        &self.params
    }

    /// Samples in increasing `x`.
    pub fn samples(&self) -> &[EtaSample] {
        &self.samples
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn tolerance(&self) -> &ToleranceSpec {
        &self.tol
    }

    pub fn residual_tol(&self) -> f64 {
        RESIDUAL_TOL
    }

    pub fn max_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.residual.abs())
            .fold(0.0, f64::max)
    }

    /// Number of accepted integrator steps.
    pub fn steps(&self) -> usize {
        self.solution.accepted_steps()
    }

    /// Integrator nodes in increasing `x`.
    pub(crate) fn nodes_ascending(&self) -> Vec<f64> {
        let mut n = self.solution.nodes().to_vec();
        n.reverse();
        n
    }

    /// Dense value at any `x` in the window.
    pub fn eval(&self, x: f64) -> Option<EtaPoint> {
        let mut y = [0.0; 2];
        if !self.solution.eval_into(x, &mut y) {
            return None;
        }
        Some(EtaPoint {
            eta: 1.0 - y[0],
            eta_prime: -y[1],
            deficit: y[0],
        })
    }

    /// Accumulated error bounds `(on η, on η')` at `x`.
    pub fn error_at(&self, x: f64) -> Option<(f64, f64)> {
        self.solution.error_estimate(x).map(|e| (e[0], e[1]))
    }
}

/// Shoot backward from `x_max` to `x_min` and record samples on the default
/// grid (spacing [`DEFAULT_GRID_STEP`]).
pub fn solve_eta(
    params: &PainleveIIIParams,
    x_max: f64,
    x_min: f64,
    tol: &ToleranceSpec,
) -> Result<EtaTrajectory, PainleveError> {
    let grid = uniform_grid(x_min, x_max, DEFAULT_GRID_STEP);
    solve_eta_on_grid(params, x_max, x_min, &grid, tol)
}

/// Like [`solve_eta`] with caller-chosen sample points. `x_min` and `x_max`
/// are always sampled.
pub fn solve_eta_on_grid(
    params: &PainleveIIIParams,
    x_max: f64,
    x_min: f64,
    grid: &[f64],
    tol: &ToleranceSpec,
) -> Result<EtaTrajectory, PainleveError> {
    if !params.is_ising() {
        return Err(PainleveError::UnsupportedParams);
    }
    if !(x_min > 0.0 && x_min < x_max && x_max.is_finite()) {
        return Err(PainleveError::InvalidWindow { x_min, x_max });
    }
    let (eps0, eps0_p) = asymptotic_deficit(x_max)?;
    if eps0 >= MAX_START_AMPLITUDE {
        return Err(PainleveError::AsymptoteNotReached {
            x_max,
            amplitude: eps0,
        });
    }

    let mut xs: Vec<f64> = Vec::with_capacity(grid.len() + 2);
    for &x in grid {
        if !(x.is_finite() && x >= x_min && x <= x_max) {
            return Err(PainleveError::GridOutOfWindow { x, x_min, x_max });
        }
        xs.push(x);
    }
    xs.push(x_min);
    xs.push(x_max);
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let stencils: Vec<Stencil> = xs.iter().map(|&x| Stencil::new(x, x_min, x_max)).collect();
    let mut stops: Vec<f64> = xs.clone();
    for s in &stencils {
        stops.extend(s.points());
    }

    let p = *params;
    let rhs = move |x: f64, y: &[f64], dy: &mut [f64]| {
        let eps = y[0];
        if !(eps < 1.0) {
            // η <= 0: outside the domain of the equation
            dy[0] = f64::NAN;
            dy[1] = f64::NAN;
            return;
        }
        let eta_p = -y[1];
        dy[0] = y[1];
        dy[1] = -p.second_derivative(x, eps, eta_p);
    };

    let solution = OdeIntegrator::new(*tol)
        .stops(&stops)
        .integrate(rhs, x_max, x_min, &[eps0, eps0_p])
        .map_err(|e| match e {
            OdeError::StepUnderflow { last_good_x } | OdeError::MaxStepsExceeded { last_good_x, .. } => {
                PainleveError::PartialTrajectory { last_good_x }
            }
            other => PainleveError::Integration(other),
        })?;

    let mut traj = EtaTrajectory {
        params: p,
        samples: Vec::with_capacity(xs.len()),
        x_min,
        x_max,
        tol: *tol,
        solution: Arc::new(solution),
    };

    for (&x, stencil) in xs.iter().zip(&stencils) {
        let pt = traj.eval(x).expect("sample inside solved window");
        let eta_second = stencil.derivative(|t| traj.eval(t).map(|v| v.eta_prime).unwrap());
        let res = residual(&p, x, pt.eta, pt.eta_prime, eta_second)?;
        let est_error = traj.error_at(x).map(|e| e.0).unwrap_or(0.0);
        traj.samples.push(EtaSample {
            x,
            eta: pt.eta,
            eta_prime: pt.eta_prime,
            deficit: pt.deficit,
            residual: res,
            est_error,
        });
    }
    Ok(traj)
}

/// Fourth-order five-point first-derivative stencil, centred where the window
/// allows and one-sided at the edges.
#[derive(Debug, Clone, Copy)]
enum Stencil {
    Central { x: f64, h: f64 },
    Forward { x: f64, h: f64 },
    Backward { x: f64, h: f64 },
}

impl Stencil {
    fn new(x: f64, lo: f64, hi: f64) -> Self {
        let h = FD_STEP.min((hi - lo) / 4.0);
        if x - 2.0 * h >= lo && x + 2.0 * h <= hi {
            Stencil::Central { x, h }
        } else if x + 2.0 * h <= hi {
            // one-sided rules carry a larger error constant; halve the spacing
            Stencil::Forward { x, h: 0.5 * h }
        } else {
            Stencil::Backward { x, h: 0.5 * h }
        }
    }

    fn points(&self) -> Vec<f64> {
        match *self {
            Stencil::Central { x, h } => vec![x - 2.0 * h, x - h, x + h, x + 2.0 * h],
            Stencil::Forward { x, h } => (1..=4).map(|k| x + k as f64 * h).collect(),
            Stencil::Backward { x, h } => (1..=4).map(|k| x - k as f64 * h).collect(),
        }
    }

    fn derivative(&self, f: impl Fn(f64) -> f64) -> f64 {
        match *self {
            Stencil::Central { x, h } => {
                (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
            }
            Stencil::Forward { x, h } => {
                (-25.0 * f(x) + 48.0 * f(x + h) - 36.0 * f(x + 2.0 * h) + 16.0 * f(x + 3.0 * h)
                    - 3.0 * f(x + 4.0 * h))
                    / (12.0 * h)
            }
            Stencil::Backward { x, h } => {
                (25.0 * f(x) - 48.0 * f(x - h) + 36.0 * f(x - 2.0 * h) - 16.0 * f(x - 3.0 * h)
                    + 3.0 * f(x - 4.0 * h))
                    / (12.0 * h)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ising_solution() -> EtaTrajectory {
        solve_eta(
            &PainleveIIIParams::ising(),
            DEFAULT_X_MAX,
            1.0,
            &default_tolerance(),
        )
        .unwrap()
    }

    #[test]
    fn fixed_point_has_zero_residual() {
        let r = residual(&PainleveIIIParams::ising(), 3.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn residual_domain() {
        let p = PainleveIIIParams::ising();
        assert!(matches!(residual(&p, 1.0, 0.0, 0.0, 0.0), Err(PainleveError::Domain { .. })));
        assert!(matches!(residual(&p, 0.0, 0.5, 0.0, 0.0), Err(PainleveError::Domain { .. })));
    }

    #[test]
    fn deficit_form_matches_eta_form() {
        let p = PainleveIIIParams::new(0.3, -0.2, 1.5, -0.7);
        for &(x, eta, eta_p) in &[(0.7, 0.4, 0.3), (2.0, 0.9, -0.1), (5.0, 1.3, 0.01)] {
            let via_eps = p.second_derivative(x, 1.0 - eta, eta_p);
            let r = residual(&p, x, eta, eta_p, via_eps).unwrap();
            assert!(r.abs() < 1e-13, "{r}");
        }
    }

    #[test]
    fn initial_condition_is_the_asymptote() {
        let traj = ising_solution();
        let last = traj.samples().last().unwrap();
        assert_eq!(last.x, 12.0);
        let k0 = bessel_k0(24.0).unwrap();
        assert_eq!(last.deficit, 2.0 / PI * k0);
        assert_eq!(last.eta, 1.0 - 2.0 / PI * k0);
        assert_eq!(last.eta_prime, 4.0 / PI * bessel_k1(24.0).unwrap());
    }

    #[test]
    fn value_at_six_follows_asymptote() {
        let traj = ising_solution();
        let eta6 = traj.eval(6.0).unwrap().eta;
        let asym = 1.0 - 2.0 / PI * bessel_k0(12.0).unwrap();
        assert!((eta6 - asym).abs() < 5e-9);
    }

    #[test]
    fn residuals_are_small() {
        let traj = ising_solution();
        assert!(traj.max_residual() < RESIDUAL_TOL, "{}", traj.max_residual());
    }

    #[test]
    fn monotone_in_unit_interval() {
        let traj = ising_solution();
        let s = traj.samples();
        assert!(s.iter().all(|p| p.eta > 0.0 && p.eta < 1.0));
        assert!(s.windows(2).all(|w| w[0].x < w[1].x && w[0].eta < w[1].eta));
    }

    #[test]
    fn grid_is_respected() {
        let grid = [1.5, 2.0, 7.25];
        let traj = solve_eta_on_grid(&PainleveIIIParams::ising(), 12.0, 1.0, &grid, &default_tolerance())
            .unwrap();
        let xs: Vec<f64> = traj.samples().iter().map(|s| s.x).collect();
        assert_eq!(xs, vec![1.0, 1.5, 2.0, 7.25, 12.0]);
    }

    #[test]
    fn argument_errors() {
        let p = PainleveIIIParams::ising();
        let t = default_tolerance();
        assert!(matches!(solve_eta(&p, 12.0, -1.0, &t), Err(PainleveError::InvalidWindow { .. })));
        assert!(matches!(solve_eta(&p, 1.0, 2.0, &t), Err(PainleveError::InvalidWindow { .. })));
        assert!(matches!(
            solve_eta(&p, 3.0, 1.0, &t),
            Err(PainleveError::AsymptoteNotReached { .. })
        ));
        assert!(matches!(
            solve_eta(&PainleveIIIParams::new(1.0, 0.0, 1.0, -1.0), 12.0, 1.0, &t),
            Err(PainleveError::UnsupportedParams)
        ));
        assert!(matches!(
            solve_eta_on_grid(&p, 12.0, 1.0, &[13.0], &t),
            Err(PainleveError::GridOutOfWindow { .. })
        ));
    }

    #[test]
    fn uniform_grid_endpoints() {
        assert_eq!(uniform_grid(1.0, 2.0, 0.5), vec![1.0, 1.5, 2.0]);
        assert_eq!(uniform_grid(1.0, 2.2, 0.5), vec![1.0, 1.5, 2.0, 2.2]);
        assert!(uniform_grid(1.0, 2.0, 0.0).is_empty());
    }
}
