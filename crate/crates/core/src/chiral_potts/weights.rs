use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::curve::{root_of_unity, CurvePoint};
use super::ChiralPottsError;

/// Relative size below which a denominator factor counts as zero.
const SINGULAR_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    Horizontal,
    Vertical,
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::Horizontal => f.write_str("horizontal"),
            WeightFamily::Vertical => f.write_str("vertical"),
        }
    }
}

/// Normalised weights `W(0) = 1, W(1), …, W(N−1)` for a rapidity pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub n_states: usize,
    pub omega: Complex64,
    pub w_h: Vec<Complex64>,
    pub w_v: Vec<Complex64>,
    /// Relative mismatch of the length-N products, ideally 0.
    pub periodicity_h: f64,
    pub periodicity_v: f64,
}

impl WeightTable {
    /// `W^h(n)` with `n` taken mod N.
    pub fn horizontal(&self, n: i64) -> Complex64 {
        self.w_h[n.rem_euclid(self.n_states as i64) as usize]
    }

    /// `W^v(n)` with `n` taken mod N.
    pub fn vertical(&self, n: i64) -> Complex64 {
        self.w_v[n.rem_euclid(self.n_states as i64) as usize]
    }

    pub fn max_periodicity_defect(&self) -> f64 {
        self.periodicity_h.max(self.periodicity_v)
    }
}

/// Numerator, denominator and denominator term scale for step `j`.
type Factor = (Complex64, Complex64, f64);

fn horizontal_factor(p: &CurvePoint, q: &CurvePoint, wj: Complex64) -> Factor {
    let num = p.d * q.b - p.a * q.c * wj;
    let t1 = p.b * q.d;
    let t2 = p.c * q.a * wj;
    (num, t1 - t2, t1.norm() + t2.norm())
}

fn vertical_factor(p: &CurvePoint, q: &CurvePoint, w: Complex64, wj: Complex64) -> Factor {
    let num = p.a * q.d * w - p.d * q.a * wj;
    let t1 = p.c * q.b;
    let t2 = p.b * q.c * wj;
    (num, t1 - t2, t1.norm() + t2.norm())
}

fn relative_mismatch(num: Complex64, den: Complex64) -> f64 {
    let scale = num.norm().max(den.norm());
    if scale == 0.0 {
        0.0
    } else {
        (num - den).norm() / scale
    }
}

fn build_family(
    family: WeightFamily,
    n_states: usize,
    factor: impl Fn(Complex64) -> Factor,
) -> Result<(Vec<Complex64>, f64), ChiralPottsError> {
    let mut w = Vec::with_capacity(n_states);
    w.push(Complex64::new(1.0, 0.0));
    let mut num_prod = Complex64::new(1.0, 0.0);
    let mut den_prod = Complex64::new(1.0, 0.0);
    let mut running = Complex64::new(1.0, 0.0);
    for j in 1..=n_states {
        let (num, den, scale) = factor(root_of_unity(n_states, j));
        num_prod *= num;
        den_prod *= den;
        if j == n_states {
            break;
        }
        if den.norm() <= SINGULAR_TOL * scale || scale == 0.0 {
            return Err(ChiralPottsError::SingularWeight {
                family,
                j,
                factor: den,
            });
        }
        running *= num / den;
        w.push(running);
    }
    Ok((w, relative_mismatch(num_prod, den_prod)))
}

/// Horizontal and vertical weight ratios for the rapidity pair `(p, q)`.
pub fn weight_table(p: &CurvePoint, q: &CurvePoint) -> Result<WeightTable, ChiralPottsError> {
    if !p.same_curve(q) {
        return Err(ChiralPottsError::CurveMismatch);
    }
    let n = p.n_states;
    if n < 2 {
        return Err(ChiralPottsError::InvalidStates(n));
    }
    let omega = root_of_unity(n, 1);
    let (w_h, periodicity_h) =
        build_family(WeightFamily::Horizontal, n, |wj| horizontal_factor(p, q, wj))?;
    let (w_v, periodicity_v) =
        build_family(WeightFamily::Vertical, n, |wj| vertical_factor(p, q, omega, wj))?;
    Ok(WeightTable {
        n_states: n,
        omega,
        w_h,
        w_v,
        periodicity_h,
        periodicity_v,
    })
}

#[cfg(test)]
mod tests {
    use super::super::curve::{make_curve_point, Modulus, RootBranch};
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn points(n: usize) -> (CurvePoint, CurvePoint) {
        let m = Modulus::new(0.45).unwrap();
        let p = make_curve_point(n, m, c(0.9, 0.2), c(0.3, -0.6), RootBranch::new(1, 0)).unwrap();
        let q = make_curve_point(n, m, c(-0.4, 0.7), c(1.1, 0.1), RootBranch::new(0, 1)).unwrap();
        (p, q)
    }

    #[test]
    fn periodic_on_curve() {
        for n in 2..=5 {
            let (p, q) = points(n);
            let t = weight_table(&p, &q).unwrap();
            assert_eq!(t.w_h.len(), n);
            assert!(t.max_periodicity_defect() < 1e-12, "N = {n}: {}", t.max_periodicity_defect());
        }
    }

    #[test]
    fn product_matches_closed_form() {
        // ∏_{j=1}^{N} (x − y ω^j) = x^N − y^N
        let (p, q) = points(4);
        let n = 4;
        let t = weight_table(&p, &q).unwrap();
        let mut w = c(1.0, 0.0);
        for j in 1..n {
            let wj = root_of_unity(n, j);
            w *= (p.d * q.b - p.a * q.c * wj) / (p.b * q.d - p.c * q.a * wj);
        }
        assert!((w - t.w_h[n - 1]).norm() < 1e-13 * w.norm());
        let num = (p.d * q.b).powi(4) - (p.a * q.c).powi(4);
        let den = (p.b * q.d).powi(4) - (p.c * q.a).powi(4);
        assert!(relative_mismatch(num, den) < 1e-12);
    }

    #[test]
    fn diagonal_pair_is_identity_like() {
        let (p, _) = points(3);
        let t = weight_table(&p, &p).unwrap();
        for n in 0..3 {
            assert!((t.w_h[n] - c(1.0, 0.0)).norm() < 1e-14);
        }
        assert_eq!(t.w_v[0], c(1.0, 0.0));
        assert!(t.w_v[1].norm() < 1e-15 && t.w_v[2].norm() < 1e-15);
        assert_eq!(t.max_periodicity_defect(), 0.0);
    }

    #[test]
    fn periodic_indexing() {
        let (p, q) = points(3);
        let t = weight_table(&p, &q).unwrap();
        assert_eq!(t.horizontal(-1), t.w_h[2]);
        assert_eq!(t.horizontal(4), t.w_h[1]);
        assert_eq!(t.vertical(-3), t.w_v[0]);
    }

    #[test]
    fn off_curve_breaks_periodicity() {
        let (p, q) = points(3);
        let bent = CurvePoint { d: p.d * (1.0 + 1e-3), ..p };
        let t = weight_table(&bent, &q).unwrap();
        assert!(t.max_periodicity_defect() > 1e-5);
    }

    #[test]
    fn singular_denominator() {
        let m = Modulus::new(0.5).unwrap();
        let p = make_curve_point(2, m, c(1.0, 0.0), c(0.5, 0.0), RootBranch::default()).unwrap();
        // c_p b_q = b_p c_q ω with ω = −1: take q = (a, b, c, d) with q.c/q.b = −p.c/p.b.
        let q = CurvePoint {
            c: -p.c,
            ..p
        };
        match weight_table(&p, &q) {
            Err(ChiralPottsError::SingularWeight { family, j, .. }) => {
                assert_eq!(family, WeightFamily::Vertical);
                assert_eq!(j, 1);
            }
            other => panic!("expected singular weight, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_curves() {
        let (p, _) = points(3);
        let (_, q) = points(4);
        assert_eq!(weight_table(&p, &q), Err(ChiralPottsError::CurveMismatch));
    }
}
