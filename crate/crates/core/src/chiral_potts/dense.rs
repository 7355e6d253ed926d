//! Dense complex matrix kernels.
//!
//! Rows are computed in parallel but every entry is accumulated in a fixed
//! order, so results do not depend on the thread count.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

pub type CMatrix = Array2<Complex64>;

/// `a · b`.
///
/// # Panics
/// If the inner dimensions disagree.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, k) = a.dim();
    let (k2, m) = b.dim();
    assert_eq!(k, k2, "inner dimensions differ: {k} vs {k2}");
    let mut out = Array2::<Complex64>::zeros((n, m));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(a.axis_iter(Axis(0)))
        .for_each(|(mut row, a_row)| {
            for (l, &a_il) in a_row.iter().enumerate() {
                if a_il == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &b_lj) in row.iter_mut().zip(b.row(l).iter()) {
                    *o += a_il * b_lj;
                }
            }
        });
    out
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
