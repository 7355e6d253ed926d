//! Globally adaptive Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |I|)`. Per-interval error estimates
//! follow QUADPACK's `qk15` heuristic. An infinite upper limit is handled by
//! the substitution `x = a + t / (1 - t)`, `dx = dt / (1 - t)^2`, which maps
//! `[a, ∞)` onto `[0, 1)`; the Kronrod nodes never touch `t = 1`, so the
//! integrand is only sampled at finite `x`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use super::ToleranceSpec;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Upper integration limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Finite(f64),
    Infinity,
}

impl From<f64> for Limit {
    fn from(b: f64) -> Self {
        if b == f64::INFINITY {
            Limit::Infinity
        } else {
            Limit::Finite(b)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid integration limits [{a}, {b:?}]")]
    InvalidLimits { a: f64, b: Limit },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("no convergence after {intervals} subintervals: value {value}, error estimate {abs_error}")]
    NonConvergence {
        value: f64,
        abs_error: f64,
        intervals: usize,
    },
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod rule with embedded 7-point Gauss estimate.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let uflow = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if res_abs > uflow {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: &ToleranceSpec,
) -> Result<Quadrature, QuadratureError> {
    let (v0, e0) = kronrod15(f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Interval {
        a,
        b,
        value: v0,
        error: e0,
    });
    let mut total = v0;
    let mut total_err = e0;
    let mut evaluations = 15;

    loop {
        let target = tol.abs_tol().max(tol.rel_tol() * total.abs());
        if total_err <= target {
            break;
        }
        if heap.len() >= tol.max_steps() {
            return Err(QuadratureError::NonConvergence {
                value: total,
                abs_error: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // cannot bisect further in floating point
            heap.push(worst);
            return Err(QuadratureError::NonConvergence {
                value: total,
                abs_error: total_err,
                intervals: heap.len(),
            });
        }
        let (vl, el) = kronrod15(f, worst.a, mid)?;
        let (vr, er) = kronrod15(f, mid, worst.b)?;
        evaluations += 30;
        total += vl + vr - worst.value;
        total_err += el + er - worst.error;
        heap.push(Interval {
            a: worst.a,
            b: mid,
            value: vl,
            error: el,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            value: vr,
            error: er,
        });
    }

    // Re-sum from the leaves to shed drift from the running updates.
    let intervals = heap.len();
    let mut leaves: Vec<Interval> = heap.into_vec();
    leaves.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = leaves.iter().map(|i| i.value).sum();
    let abs_error = leaves.iter().map(|i| i.error).sum();
    Ok(Quadrature {
        value,
        abs_error,
        evaluations,
        intervals,
    })
}

/// `∫_a^b f(x) dx` for finite `b` (either order) or `b = ∞`.
///
/// For `b = ∞` the caller guarantees at least exponential decay of `f`.
pub fn integrate_quadrature<F>(
    f: F,
    a: f64,
    b: impl Into<Limit>,
    tol: &ToleranceSpec,
) -> Result<Quadrature, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let b = b.into();
    if !a.is_finite() {
        return Err(QuadratureError::InvalidLimits { a, b });
    }
    match b {
        Limit::Finite(b) if !b.is_finite() => Err(QuadratureError::InvalidLimits {
            a,
            b: Limit::Finite(b),
        }),
        Limit::Finite(b) if a == b => Ok(Quadrature {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            intervals: 0,
        }),
        Limit::Finite(b) if b < a => {
            let q = adaptive(&f, b, a, tol)?;
            Ok(Quadrature {
                value: -q.value,
                ..q
            })
        }
        Limit::Finite(b) => adaptive(&f, a, b, tol),
        Limit::Infinity => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let x = a + t / s;
                let v = f(x);
                // Past the last representable sample the decaying integrand
                // contributes nothing.
                if v == 0.0 {
                    0.0
                } else {
                    v / (s * s)
                }
            };
            adaptive(&g, 0.0, 1.0, tol)
        }
    }
}
