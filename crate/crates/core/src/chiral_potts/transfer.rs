use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use super::curve::CurvePoint;
use super::dense::{frobenius_norm, matmul, CMatrix};
use super::weights::{weight_table, WeightTable};
use super::ChiralPottsError;

/// `3^8`: the largest space the default build will allocate.
pub const DEFAULT_DIMENSION_CAP: usize = 6561;

/// A row of `width` sites with periodic boundary, carrying one weight table.
#[derive(Debug, Clone)]
pub struct TransferMatrixSpec {
    pub width: usize,
    pub weights: WeightTable,
    pub cap: usize,
}

impl TransferMatrixSpec {
    pub fn new(width: usize, weights: WeightTable) -> Self {
        Self {
            width,
            weights,
            cap: DEFAULT_DIMENSION_CAP,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// `N^width`, or an error past the cap.
    pub fn dimension(&self) -> Result<usize, ChiralPottsError> {
        if self.width == 0 {
            return Err(ChiralPottsError::InvalidWidth);
        }
        let dim = (self.weights.n_states as u128).checked_pow(self.width as u32);
        match dim {
            Some(d) if d <= self.cap as u128 => Ok(d as usize),
            Some(d) => Err(ChiralPottsError::DimensionCap { dim: d, cap: self.cap }),
            None => Err(ChiralPottsError::DimensionCap {
                dim: u128::MAX,
                cap: self.cap,
            }),
        }
    }
}

/// Base-N digits of every row configuration, site 0 least significant.
fn configurations(n_states: usize, width: usize, dim: usize) -> Vec<usize> {
    let mut digits = vec![0usize; dim * width];
    for idx in 0..dim {
        let mut rest = idx;
        for j in 0..width {
            digits[idx * width + j] = rest % n_states;
            rest /= n_states;
        }
    }
    digits
}

/// Row-to-row transfer matrix
/// `T[l, l'] = ∏_j W^v(l_j − l'_j) W^h(l_j − l'_{j+1})`, indices mod the width.
pub fn transfer_matrix(spec: &TransferMatrixSpec) -> Result<CMatrix, ChiralPottsError> {
    let dim = spec.dimension()?;
    let n = spec.weights.n_states;
    let width = spec.width;
    let digits = configurations(n, width, dim);
    let w_h = &spec.weights.w_h;
    let w_v = &spec.weights.w_v;

    let rows: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let l = &digits[i * width..(i + 1) * width];
            (0..dim)
                .map(|k| {
                    let lp = &digits[k * width..(k + 1) * width];
                    let mut acc = Complex64::new(1.0, 0.0);
                    for j in 0..width {
                        let next = lp[(j + 1) % width];
                        acc *= w_v[(l[j] + n - lp[j]) % n] * w_h[(l[j] + n - next) % n];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(Array2::from_shape_vec((dim, dim), rows.concat()).expect("row lengths equal dim"))
}

/// Permutation matrix of the cyclic shift `l_j → l_{j+1}` on row configurations.
pub fn cyclic_shift_matrix(n_states: usize, width: usize) -> Result<CMatrix, ChiralPottsError> {
    if n_states < 2 {
        return Err(ChiralPottsError::InvalidStates(n_states));
    }
    if width == 0 {
        return Err(ChiralPottsError::InvalidWidth);
    }
    let dim = n_states.pow(width as u32);
    let digits = configurations(n_states, width, dim);
    let mut s = Array2::zeros((dim, dim));
    for i in 0..dim {
        let l = &digits[i * width..(i + 1) * width];
        let mut target = 0;
        for j in (0..width).rev() {
            target = target * n_states + l[(j + 1) % width];
        }
        s[[i, target]] = Complex64::new(1.0, 0.0);
    }
    Ok(s)
}

/// `‖AB − BA‖_F / (‖A‖_F ‖B‖_F)`; 0 when either matrix vanishes.
pub fn relative_commutator(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = frobenius_norm(a) * frobenius_norm(b);
    if scale == 0.0 {
        return 0.0;
    }
    let diff = matmul(a, b) - matmul(b, a);
    frobenius_norm(&diff) / scale
}

/// Relative commutator of `T(p, q1)` and `T(p, q2)` at the given width.
pub fn commutator_norm(
    p: &CurvePoint,
    q1: &CurvePoint,
    q2: &CurvePoint,
    width: usize,
) -> Result<f64, ChiralPottsError> {
    let t1 = transfer_matrix(&TransferMatrixSpec::new(width, weight_table(p, q1)?))?;
    let t2 = transfer_matrix(&TransferMatrixSpec::new(width, weight_table(p, q2)?))?;
    Ok(relative_commutator(&t1, &t2))
}

#[cfg(test)]
mod tests {
    use super::super::curve::{make_curve_point, Modulus, RootBranch};
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn point(n: usize, a: Complex64, b: Complex64, br: RootBranch) -> CurvePoint {
        make_curve_point(n, Modulus::new(0.6).unwrap(), a, b, br).unwrap()
    }

    #[test]
    fn explicit_two_site_entries() {
        let p = point(3, c(0.9, 0.1), c(0.4, 0.3), RootBranch::new(0, 1));
        let q = point(3, c(0.2, -0.5), c(1.0, 0.0), RootBranch::new(2, 0));
        let w = weight_table(&p, &q).unwrap();
        let t = transfer_matrix(&TransferMatrixSpec::new(2, w.clone())).unwrap();
        assert_eq!(t.dim(), (9, 9));
        // l = (1, 2) → index 1 + 3·2 = 7; l' = (0, 1) → index 3.
        let expected = w.vertical(1) * w.horizontal(1 - 1) * w.vertical(2 - 1) * w.horizontal(2);
        assert!((t[[7, 3]] - expected).norm() < 1e-15 * expected.norm().max(1.0));
    }

    #[test]
    fn identity_at_coinciding_rapidities() {
        let p = point(3, c(0.9, 0.1), c(0.4, 0.3), RootBranch::new(0, 1));
        let w = weight_table(&p, &p).unwrap();
        let t = transfer_matrix(&TransferMatrixSpec::new(3, w)).unwrap();
        let shift = cyclic_shift_matrix(3, 3).unwrap();
        // W^h ≡ 1 and W^v(n) = δ(n, 0), so T is the identity.
        for ((i, k), z) in t.indexed_iter() {
            let e = if i == k { 1.0 } else { 0.0 };
            assert!((z - c(e, 0.0)).norm() < 1e-14, "[{i},{k}] = {z}");
        }
        assert!(relative_commutator(&t, &shift) < 1e-15);
    }

    #[test]
    fn commutes_with_cyclic_shift() {
        let p = point(2, c(0.7, 0.2), c(0.3, -0.8), RootBranch::new(1, 0));
        let q = point(2, c(-0.1, 0.6), c(0.9, 0.4), RootBranch::new(0, 1));
        let t = transfer_matrix(&TransferMatrixSpec::new(4, weight_table(&p, &q).unwrap())).unwrap();
        let s = cyclic_shift_matrix(2, 4).unwrap();
        assert!(relative_commutator(&t, &s) < 1e-14);
    }

    #[test]
    fn commuting_family() {
        let p = point(3, c(0.9, 0.1), c(0.4, 0.3), RootBranch::new(0, 1));
        let q1 = point(3, c(0.2, -0.5), c(1.0, 0.0), RootBranch::new(2, 0));
        let q2 = point(3, c(-0.6, 0.2), c(0.3, 0.9), RootBranch::new(1, 1));
        let norm = commutator_norm(&p, &q1, &q2, 3).unwrap();
        assert!(norm < 1e-12, "{norm:e}");
    }

    #[test]
    fn off_curve_rapidity_does_not_commute() {
        let p = point(3, c(0.9, 0.1), c(0.4, 0.3), RootBranch::new(0, 1));
        let q1 = point(3, c(0.2, -0.5), c(1.0, 0.0), RootBranch::new(2, 0));
        let q2 = point(3, c(-0.6, 0.2), c(0.3, 0.9), RootBranch::new(1, 1));
        let bent = CurvePoint { d: q2.d * 1.2, ..q2 };
        let norm = commutator_norm(&p, &q1, &bent, 3).unwrap();
        assert!(norm > 1e-4, "{norm:e}");
    }

    #[test]
    fn dimension_cap() {
        let p = point(3, c(0.9, 0.1), c(0.4, 0.3), RootBranch::new(0, 1));
        let w = weight_table(&p, &p).unwrap();
        let spec = TransferMatrixSpec::new(9, w.clone());
        assert!(matches!(
            spec.dimension(),
            Err(ChiralPottsError::DimensionCap { dim: 19683, cap: 6561 })
        ));
        assert_eq!(TransferMatrixSpec::new(8, w.clone()).dimension(), Ok(6561));
        assert_eq!(
            TransferMatrixSpec::new(0, w).dimension(),
            Err(ChiralPottsError::InvalidWidth)
        );
    }

    #[test]
    fn shift_is_a_permutation() {
        let s = cyclic_shift_matrix(3, 2).unwrap();
        for i in 0..9 {
            let row: f64 = s.row(i).iter().map(|z| z.re).sum();
            let col: f64 = s.column(i).iter().map(|z| z.re).sum();
            assert_eq!((row, col), (1.0, 1.0));
        }
        // (l0, l1) = (1, 2) → (2, 1): index 7 → 5
        assert_eq!(s[[7, 5]], c(1.0, 0.0));
    }
}
