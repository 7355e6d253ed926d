//! `N = 2` reduction to the zero-field Ising model.
//!
//! The slice used here: real modulus, all four coordinates of both points
//! real and positive (equivalently `a, b > 0` with root branches `(0, 0)`).
//! There `W^h(1) > 0` always, and `W^v(1) = (d_p a_q − a_p d_q)/(c_p b_q + b_p c_q)`
//! is non-negative exactly when `d_p a_q >= a_p d_q`.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::curve::CurvePoint;
use super::weights::{weight_table, WeightTable};
use super::ChiralPottsError;

const REAL_TOL: f64 = 1e-14;

/// Nearest-neighbour Ising couplings in units of `k_B T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingReduction {
    pub e_v: f64,
    pub e_h: f64,
    pub field: f64,
}

impl IsingReduction {
    pub fn new(e_v: f64, e_h: f64) -> Self {
        Self {
            e_v,
            e_h,
            field: 0.0,
        }
    }

    /// Boltzmann factor `exp(E σ σ')` of a single bond.
    fn bond_factor(coupling: f64, s: i8, t: i8) -> f64 {
        (coupling * f64::from(s * t)).exp()
    }

    /// Antiparallel-to-parallel bond weight ratio, the Ising image of `W(1)/W(0)`.
    pub fn vertical_ratio(&self) -> f64 {
        Self::bond_factor(self.e_v, 1, -1) / Self::bond_factor(self.e_v, 1, 1)
    }

    pub fn horizontal_ratio(&self) -> f64 {
        Self::bond_factor(self.e_h, 1, -1) / Self::bond_factor(self.e_h, 1, 1)
    }

    /// Reduced energy `−Σ (E^v σ_{j,k} σ_{j+1,k} + E^h σ_{j,k} σ_{j,k+1} + H σ_{j,k})`
    /// of a periodic configuration; rows are `j`, columns `k`.
    pub fn energy(&self, spins: &Array2<i8>) -> f64 {
        let (rows, cols) = spins.dim();
        let mut e = 0.0;
        for j in 0..rows {
            for k in 0..cols {
                let s = f64::from(spins[[j, k]]);
                let down = f64::from(spins[[(j + 1) % rows, k]]);
                let right = f64::from(spins[[j, (k + 1) % cols]]);
                e -= self.e_v * s * down + self.e_h * s * right + self.field * s;
            }
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingReductionReport {
    pub reduction: IsingReduction,
    pub weights: WeightTable,
    /// Largest mismatch between the Ising bond ratios and `W(1)`.
    pub residual: f64,
}

fn is_positive_real(z: Complex64) -> bool {
    z.re > 0.0 && z.im.abs() <= REAL_TOL * z.re
}

fn real_non_negative(z: Complex64, what: &str) -> Result<f64, ChiralPottsError> {
    if z.im.abs() > REAL_TOL * z.norm() {
        return Err(ChiralPottsError::ReductionSlice(format!("{what} = {z} is not real")));
    }
    if z.re < 0.0 {
        return Err(ChiralPottsError::ReductionSlice(format!("{what} = {} is negative", z.re)));
    }
    Ok(z.re)
}

/// Fit `E^h, E^v` from `e^{−2E} = W(1)` and check the fit reproduces the weights.
pub fn ising_reduction_check(
    k: f64,
    p: &CurvePoint,
    q: &CurvePoint,
) -> Result<IsingReductionReport, ChiralPottsError> {
    for point in [p, q] {
        if point.n_states != 2 {
            return Err(ChiralPottsError::NotIsing(point.n_states));
        }
        if (point.modulus.k() - k).abs() > REAL_TOL {
            return Err(ChiralPottsError::CurveMismatch);
        }
        let coords = [point.a, point.b, point.c, point.d];
        if !coords.iter().all(|&z| is_positive_real(z)) {
            return Err(ChiralPottsError::ReductionSlice(
                "coordinates must be real and positive".into(),
            ));
        }
    }
    let weights = weight_table(p, q)?;
    let wh = real_non_negative(weights.w_h[1], "W^h(1)")?;
    let wv = real_non_negative(weights.w_v[1], "W^v(1)")?;
    let reduction = IsingReduction::new(-0.5 * wv.ln(), -0.5 * wh.ln());
    let residual = (reduction.horizontal_ratio() - weights.w_h[1])
        .norm()
        .max((reduction.vertical_ratio() - weights.w_v[1]).norm());
    Ok(IsingReductionReport {
        reduction,
        weights,
        residual,
    })
}
