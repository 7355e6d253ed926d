//! Quasiparticle states under fractional-exclusion momentum rules.
//!
//! Momenta are kept exactly as rationals in units of `π/M`. A species with
//! `m_α` particles occupies distinct points of the grid
//! `P_min^α + (2π/M)·s`, `s = 0, 1, …, D_α − 1`, where the window edges
//! shrink as particles are added:
//!
//! ```text
//! P_min^α(m) = (π/M) [ (m(B − 1))_α − A_α + 1 ]
//! P_max^α(m) = −P_min^α(m) + (2π/M)(u/2 − A)_α
//! ```

mod enumerate;
mod window;

pub use enumerate::{
    counting_polynomial, enumerate_states, enumerate_states_with_cap, state_energy,
    CountingPolynomial, MultiParticleState, DEFAULT_ENUMERATION_CAP,
};
pub use window::{p_max, p_min, window, windows, Window};

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuasiparticleError {
    #[error("need at least one species")]
    NoSpecies,
    #[error("number of sites M must be positive")]
    InvalidSites,
    #[error("{what} has length {got}, expected {expected}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("species index {species} out of range for {n_species} species")]
    SpeciesOutOfRange { species: usize, n_species: usize },
    #[error("speed must be positive and finite, got {0}")]
    InvalidSpeed(f64),
    #[error("species {species} has u = ∞; its momentum window is unbounded")]
    NeedsFiniteU { species: usize },
    #[error("{count} states exceed the enumeration cap {cap}")]
    EnumerationCap { count: u128, cap: u128 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("dispersion of species {species} at P = {momentum} gave {value}")]
    InvalidDispersion {
        species: usize,
        momentum: f64,
        value: f64,
    },
    #[error("exact momentum arithmetic overflowed")]
    Overflow,
}

/// Upper exclusion parameter `u_α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Finite(Rational64),
    Infinite,
}

impl Bound {
    pub fn finite(&self) -> Option<Rational64> {
        match self {
            Bound::Finite(r) => Some(*r),
            Bound::Infinite => None,
        }
    }
}

impl From<Rational64> for Bound {
    fn from(r: Rational64) -> Self {
        Bound::Finite(r)
    }
}

type DispersionFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// Single-particle energy `e_α(P)`.
#[derive(Clone)]
pub enum Dispersion {
    /// `e_α(P) = v |P|` for every species.
    Linear { speed: f64 },
    /// Arbitrary per-species function of `(α, P)`; must be non-negative.
    Custom(DispersionFn),
}

impl Dispersion {
    pub fn linear(speed: f64) -> Result<Self, QuasiparticleError> {
        if speed > 0.0 && speed.is_finite() {
            Ok(Dispersion::Linear { speed })
        } else {
            Err(QuasiparticleError::InvalidSpeed(speed))
        }
    }

    pub fn custom(f: impl Fn(usize, f64) -> f64 + Send + Sync + 'static) -> Self {
        Dispersion::Custom(Arc::new(f))
    }

    pub fn energy(&self, species: usize, momentum: f64) -> Result<f64, QuasiparticleError> {
        let value = match self {
            Dispersion::Linear { speed } => speed * momentum.abs(),
            Dispersion::Custom(f) => f(species, momentum),
        };
        if value >= 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(QuasiparticleError::InvalidDispersion {
                species,
                momentum,
                value,
            })
        }
    }
}

impl Default for Dispersion {
    fn default() -> Self {
        Dispersion::Linear { speed: 1.0 }
    }
}

impl fmt::Debug for Dispersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dispersion::Linear { speed } => write!(f, "Linear {{ speed: {speed} }}"),
            Dispersion::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Exclusion data `(M, B, A, u)` and the dispersion.
#[derive(Debug, Clone)]
pub struct QuasiparticleSpec {
    n_species: usize,
    m_sites: u32,
    b_matrix: Vec<Vec<Rational64>>,
    a_vector: Vec<Rational64>,
    u_vector: Vec<Bound>,
    dispersion: Dispersion,
}

impl QuasiparticleSpec {
    pub fn new(
        m_sites: u32,
        b_matrix: Vec<Vec<Rational64>>,
        a_vector: Vec<Rational64>,
        u_vector: Vec<Bound>,
    ) -> Result<Self, QuasiparticleError> {
        let n = b_matrix.len();
        if n == 0 {
            return Err(QuasiparticleError::NoSpecies);
        }
        if m_sites == 0 {
            return Err(QuasiparticleError::InvalidSites);
        }
        for row in &b_matrix {
            if row.len() != n {
                return Err(QuasiparticleError::Shape {
                    what: "B row",
                    expected: n,
                    got: row.len(),
                });
            }
        }
        if a_vector.len() != n {
            return Err(QuasiparticleError::Shape {
                what: "A",
                expected: n,
                got: a_vector.len(),
            });
        }
        if u_vector.len() != n {
            return Err(QuasiparticleError::Shape {
                what: "u",
                expected: n,
                got: u_vector.len(),
            });
        }
        Ok(Self {
            n_species: n,
            m_sites,
            b_matrix,
            a_vector,
            u_vector,
            dispersion: Dispersion::default(),
        })
    }

    /// One species with `B = 1`, `A = 1`: the free-fermion case.
    pub fn ising(m_sites: u32, u: Bound) -> Result<Self, QuasiparticleError> {
        let one = Rational64::from_integer(1);
        Self::new(m_sites, vec![vec![one]], vec![one], vec![u])
    }

    pub fn with_dispersion(mut self, dispersion: Dispersion) -> Self {
        self.dispersion = dispersion;
        self
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn m_sites(&self) -> u32 {
        self.m_sites
    }

    pub fn b_matrix(&self) -> &[Vec<Rational64>] {
        &self.b_matrix
    }

    pub fn a_vector(&self) -> &[Rational64] {
        &self.a_vector
    }

    pub fn u_vector(&self) -> &[Bound] {
        &self.u_vector
    }

    pub fn dispersion(&self) -> &Dispersion {
        &self.dispersion
    }

    /// Radians per `π/M` unit.
    pub fn unit(&self) -> f64 {
        std::f64::consts::PI / f64::from(self.m_sites)
    }

    pub(crate) fn check_species(&self, species: usize) -> Result<(), QuasiparticleError> {
        if species < self.n_species {
            Ok(())
        } else {
            Err(QuasiparticleError::SpeciesOutOfRange {
                species,
                n_species: self.n_species,
            })
        }
    }

    pub(crate) fn check_content(&self, m: &ParticleContent) -> Result<(), QuasiparticleError> {
        if m.counts.len() == self.n_species {
            Ok(())
        } else {
            Err(QuasiparticleError::Shape {
                what: "particle content",
                expected: self.n_species,
                got: m.counts.len(),
            })
        }
    }
}

/// Particle numbers `(m_1, …, m_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParticleContent {
    pub counts: Vec<u32>,
}

impl ParticleContent {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn vacuum(n_species: usize) -> Self {
        Self {
            counts: vec![0; n_species],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }
}
