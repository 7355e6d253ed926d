use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::{Bound, ParticleContent, QuasiparticleError, QuasiparticleSpec};

/// Allowed momenta of one species, in units of `π/M`. Both edges are
/// inclusive; the grid step is 2 units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Window {
    pub species: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub p_min_units: Rational64,
    /// `None` when `u_α = ∞`.
    #[serde(serialize_with = "ser_opt_ratio")]
    pub p_max_units: Option<Rational64>,
    /// Number of grid momenta `D_α`; `None` for an unbounded window, 0 for an empty one.
    pub size: Option<u64>,
    /// `P_min` is a whole number of `π/M` units and `P_max` lies on its grid.
    pub on_grid: bool,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_opt_ratio<S: serde::Serializer>(r: &Option<Rational64>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

impl Window {
    pub fn p_min(&self, spec: &QuasiparticleSpec) -> f64 {
        ratio_to_f64(self.p_min_units) * spec.unit()
    }

    pub fn p_max(&self, spec: &QuasiparticleSpec) -> f64 {
        self.p_max_units
            .map_or(f64::INFINITY, |p| ratio_to_f64(p) * spec.unit())
    }
}

pub(crate) fn ratio_to_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn p_min_units(
    spec: &QuasiparticleSpec,
    m: &ParticleContent,
    species: usize,
) -> Result<Rational64, QuasiparticleError> {
    spec.check_content(m)?;
    spec.check_species(species)?;
    let one = Rational64::from_integer(1);
    let mut acc = Rational64::zero();
    for (beta, &count) in m.counts.iter().enumerate() {
        let mut b = spec.b_matrix()[beta][species];
        if beta == species {
            b -= one;
        }
        acc += Rational64::from_integer(i64::from(count)) * b;
    }
    Ok(acc - spec.a_vector()[species] + one)
}

/// `P_min^α(m)` in radians.
pub fn p_min(
    spec: &QuasiparticleSpec,
    m: &ParticleContent,
    species: usize,
) -> Result<f64, QuasiparticleError> {
    Ok(ratio_to_f64(p_min_units(spec, m, species)?) * spec.unit())
}

/// `P_max^α(m)` in radians; `+∞` when `u_α = ∞`.
pub fn p_max(
    spec: &QuasiparticleSpec,
    m: &ParticleContent,
    species: usize,
) -> Result<f64, QuasiparticleError> {
    Ok(window(spec, m, species)?.p_max(spec))
}

/// Exact window of one species.
pub fn window(
    spec: &QuasiparticleSpec,
    m: &ParticleContent,
    species: usize,
) -> Result<Window, QuasiparticleError> {
    let lo = p_min_units(spec, m, species)?;
    let (hi, size, on_grid) = match spec.u_vector()[species] {
        Bound::Infinite => (None, None, lo.is_integer()),
        Bound::Finite(u) => {
            let hi = -lo + u - spec.a_vector()[species] * 2;
            let span = hi - lo;
            let size = if span < Rational64::zero() {
                0
            } else {
                let steps = (span / 2).floor().to_integer();
                u64::try_from(steps).map_err(|_| QuasiparticleError::Overflow)? + 1
            };
            let on_grid = lo.is_integer() && span.is_integer() && span.to_integer().is_even();
            (Some(hi), Some(size), on_grid)
        }
    };
    Ok(Window {
        species,
        p_min_units: lo,
        p_max_units: hi,
        size,
        on_grid,
    })
}

/// Windows of all species, in species order.
pub fn windows(
    spec: &QuasiparticleSpec,
    m: &ParticleContent,
) -> Result<Vec<Window>, QuasiparticleError> {
    (0..spec.n_species()).map(|a| window(spec, m, a)).collect()
}
