use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ChiralPottsError;

/// Curve modulus `(k, k')` with `k² + k'² = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    k: f64,
    k_prime: f64,
}

impl Modulus {
    /// `k' = sqrt(1 − k²)`.
    pub fn new(k: f64) -> Result<Self, ChiralPottsError> {
        if !(k > 0.0 && k < 1.0) {
            return Err(ChiralPottsError::InvalidModulus(k));
        }
        Ok(Self {
            k,
            k_prime: (1.0 - k * k).sqrt(),
        })
    }

    /// Explicit pair, checked against `k² + k'² = 1` to 1e-14.
    pub fn from_pair(k: f64, k_prime: f64) -> Result<Self, ChiralPottsError> {
        if k_prime == 0.0 {
            return Err(ChiralPottsError::DegenerateModulus);
        }
        if !(k > 0.0 && k < 1.0 && k_prime > 0.0 && k_prime < 1.0) {
            return Err(ChiralPottsError::InvalidModulus(k));
        }
        let norm = k * k + k_prime * k_prime;
        if (norm - 1.0).abs() > 1e-14 {
            return Err(ChiralPottsError::ModulusNotNormalised(norm));
        }
        Ok(Self { k, k_prime })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_prime(&self) -> f64 {
        self.k_prime
    }
}

/// Which N-th roots were taken for `c` and `d`: the principal root times
/// `ω^c` resp. `ω^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RootBranch {
    pub c: usize,
    pub d: usize,
}

impl RootBranch {
    pub fn new(c: usize, d: usize) -> Self {
        Self { c, d }
    }
}

/// A point `(a, b, c, d)` of the chiral Potts curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_states: usize,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub modulus: Modulus,
}

impl CurvePoint {
    /// Unchecked constructor; the coordinates need not satisfy the curve.
    pub fn from_raw(
        n_states: usize,
        modulus: Modulus,
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Self {
        Self {
            n_states,
            a,
            b,
            c,
            d,
            modulus,
        }
    }

    /// `c` or `d` vanished, so some weight denominators may vanish too.
    pub fn has_zero_coordinate(&self) -> bool {
        self.c == Complex64::new(0.0, 0.0) || self.d == Complex64::new(0.0, 0.0)
    }

    pub fn same_curve(&self, other: &CurvePoint) -> bool {
        self.n_states == other.n_states
            && (self.modulus.k - other.modulus.k).abs() <= 1e-14
            && (self.modulus.k_prime - other.modulus.k_prime).abs() <= 1e-14
    }
}

/// `ω^m` with `ω = e^{2πi/N}`.
pub(crate) fn root_of_unity(n_states: usize, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (m % n_states) as f64 / n_states as f64)
}

fn principal_root(z: Complex64, n: usize) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    let (r, theta) = z.to_polar();
    Complex64::from_polar(r.powf(1.0 / n as f64), theta / n as f64)
}

/// Complete `(a, b)` to a curve point by solving for `c` and `d` on the
/// requested root branches.
pub fn make_curve_point(
    n_states: usize,
    modulus: Modulus,
    a: Complex64,
    b: Complex64,
    branch: RootBranch,
) -> Result<CurvePoint, ChiralPottsError> {
    if n_states < 2 {
        return Err(ChiralPottsError::InvalidStates(n_states));
    }
    if a == Complex64::new(0.0, 0.0) && b == Complex64::new(0.0, 0.0) {
        return Err(ChiralPottsError::ZeroPoint);
    }
    for br in [branch.c, branch.d] {
        if br >= n_states {
            return Err(ChiralPottsError::BranchOutOfRange {
                branch: br,
                n_states,
            });
        }
    }
    let n = n_states as i32;
    let (k, kp) = (modulus.k, modulus.k_prime);
    let an = a.powi(n);
    let bn = b.powi(n);
    let d = principal_root((an + bn * k) / kp, n_states) * root_of_unity(n_states, branch.d);
    let c = principal_root((an * k + bn) / kp, n_states) * root_of_unity(n_states, branch.c);
    Ok(CurvePoint {
        n_states,
        a,
        b,
        c,
        d,
        modulus,
    })
}

/// Relative residuals of the two curve equations, each normalised by the
/// largest term magnitude in that equation.
pub fn curve_residuals(p: &CurvePoint) -> Result<(f64, f64), ChiralPottsError> {
    let n = p.n_states as i32;
    let (k, kp) = (p.modulus.k, p.modulus.k_prime);
    let an = p.a.powi(n);
    let bn = p.b.powi(n);
    let cn = p.c.powi(n);
    let dn = p.d.powi(n);

    let terms1 = [an.norm(), k * bn.norm(), kp * dn.norm()];
    let terms2 = [k * an.norm(), bn.norm(), kp * cn.norm()];
    let scale1 = terms1.iter().copied().fold(0.0, f64::max);
    let scale2 = terms2.iter().copied().fold(0.0, f64::max);
    if scale1 == 0.0 || scale2 == 0.0 {
        return Err(ChiralPottsError::DegeneratePoint);
    }
    let r1 = (an + bn * k - dn * kp).norm() / scale1;
    let r2 = (an * k + bn - cn * kp).norm() / scale2;
    Ok((r1, r2))
}
