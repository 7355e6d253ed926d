use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::window::{ratio_to_f64, windows, Window};
use super::{ParticleContent, QuasiparticleError, QuasiparticleSpec};

pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

/// Tolerance (radians) when selecting a total-momentum sector.
const SECTOR_TOL: f64 = 1e-9;

/// One allowed multiparticle state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiParticleState {
    /// Per species, strictly increasing grid offsets `s` with `P = P_min + (2π/M) s`.
    pub offsets: Vec<Vec<u32>>,
    /// Per species momenta in radians, same order as `offsets`.
    pub momenta: Vec<Vec<f64>>,
    /// Unreduced total momentum in units of `π/M`.
    #[serde(serialize_with = "ser_ratio")]
    pub total_units: Rational64,
    /// Total momentum reduced to `[0, 2π)`.
    pub total_momentum: f64,
    /// `E_ex − E_0 = Σ e_α(P)`, using unreduced momenta.
    pub energy: f64,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Histogram of states by total grid offset above the lowest state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CountingPolynomial {
    pub coefficients: BTreeMap<i64, u64>,
}

impl CountingPolynomial {
    pub fn total(&self) -> u64 {
        self.coefficients.values().sum()
    }
}

/// All `k`-subsets of `0..d` in lexicographic order.
fn combinations(d: u32, k: u32) -> Vec<Vec<u32>> {
    if k > d {
        return Vec::new();
    }
    let k = k as usize;
    let mut out = Vec::new();
    let mut current: Vec<u32> = (0..k as u32).collect();
    loop {
        out.push(current.clone());
        // rightmost position that can still advance
        let Some(i) = (0..k).rev().find(|&i| current[i] < d - (k - i) as u32) else {
            return out;
        };
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(u128::from(n - i)) / u128::from(i + 1);
    }
    acc
}

fn finite_sizes(windows: &[Window]) -> Result<Vec<u32>, QuasiparticleError> {
    windows
        .iter()
        .map(|w| match w.size {
            Some(d) => u32::try_from(d).map_err(|_| QuasiparticleError::Overflow),
            None => Err(QuasiparticleError::NeedsFiniteU { species: w.species }),
        })
        .collect()
}

fn reduce_units(total: Rational64, m_sites: u32) -> Rational64 {
    let period = Rational64::from_integer(2 * i64::from(m_sites));
    total - period * (total / period).floor()
}

fn build_state(
    spec: &QuasiparticleSpec,
    windows: &[Window],
    offsets: Vec<Vec<u32>>,
) -> Result<MultiParticleState, QuasiparticleError> {
    let unit = spec.unit();
    let mut total = Rational64::zero();
    let mut energy = 0.0;
    let mut momenta = Vec::with_capacity(offsets.len());
    for (alpha, species) in offsets.iter().enumerate() {
        let lo = windows[alpha].p_min_units;
        let mut ps = Vec::with_capacity(species.len());
        for &s in species {
            let units = lo + Rational64::from_integer(2 * i64::from(s));
            total += units;
            let p = ratio_to_f64(units) * unit;
            energy += spec.dispersion().energy(alpha, p)?;
            ps.push(p);
        }
        momenta.push(ps);
    }
    let reduced = reduce_units(total, spec.m_sites());
    Ok(MultiParticleState {
        offsets,
        momenta,
        total_units: total,
        total_momentum: ratio_to_f64(reduced) * unit,
        energy,
    })
}

fn in_sector(total: f64, sector: f64) -> bool {
    let two_pi = std::f64::consts::TAU;
    let diff = (total - sector.rem_euclid(two_pi)).rem_euclid(two_pi);
    diff.min(two_pi - diff) <= SECTOR_TOL
}

/// [`enumerate_states_with_cap`] with [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate_states(
    spec: &QuasiparticleSpec,
    m: &ParticleContent,
    momentum_sector: Option<f64>,
) -> Result<Vec<MultiParticleState>, QuasiparticleError> {
    enumerate_states_with_cap(spec, m, momentum_sector, DEFAULT_ENUMERATION_CAP)
}

/// Every state with content `m`, in lexicographic order of the per-species
/// offset lists, optionally restricted to total momentum `momentum_sector`
/// (mod 2π).
pub fn enumerate_states_with_cap(
    spec: &QuasiparticleSpec,
    m: &ParticleContent,
    momentum_sector: Option<f64>,
    cap: u128,
) -> Result<Vec<MultiParticleState>, QuasiparticleError> {
    let wins = windows(spec, m)?;
    let sizes = finite_sizes(&wins)?;
    let count = sizes
        .iter()
        .zip(&m.counts)
        .fold(1u128, |acc, (&d, &k)| acc.saturating_mul(binomial(u64::from(d), u64::from(k))));
    if count > cap {
        return Err(QuasiparticleError::EnumerationCap { count, cap });
    }
    if count == 0 {
        return Ok(Vec::new());
    }

    let per_species: Vec<Vec<Vec<u32>>> = sizes
        .iter()
        .zip(&m.counts)
        .map(|(&d, &k)| combinations(d, k))
        .collect();

    let states: Result<Vec<Vec<MultiParticleState>>, _> = per_species[0]
        .par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut idx = vec![0usize; per_species.len()];
            loop {
                let mut offsets = Vec::with_capacity(per_species.len());
                offsets.push(first.clone());
                for (alpha, choices) in per_species.iter().enumerate().skip(1) {
                    offsets.push(choices[idx[alpha]].clone());
                }
                let state = build_state(spec, &wins, offsets)?;
                if momentum_sector.is_none_or(|s| in_sector(state.total_momentum, s)) {
                    out.push(state);
                }
                // odometer over species 1.., last species fastest
                let mut alpha = per_species.len();
                loop {
                    alpha -= 1;
                    if alpha == 0 {
                        return Ok(out);
                    }
                    idx[alpha] += 1;
                    if idx[alpha] < per_species[alpha].len() {
                        break;
                    }
                    idx[alpha] = 0;
                }
            }
        })
        .collect();
    Ok(states?.into_iter().flatten().collect())
}

/// State count by grid offset `Σ s − Σ_α m_α(m_α − 1)/2`.
pub fn counting_polynomial(
    spec: &QuasiparticleSpec,
    m: &ParticleContent,
) -> Result<CountingPolynomial, QuasiparticleError> {
    let base: i64 = m
        .counts
        .iter()
        .map(|&k| i64::from(k) * (i64::from(k) - 1) / 2)
        .sum();
    let mut coefficients = BTreeMap::new();
    for state in enumerate_states(spec, m, None)? {
        let s: i64 = state.offsets.iter().flatten().map(|&s| i64::from(s)).sum();
        *coefficients.entry(s - base).or_insert(0) += 1;
    }
    Ok(CountingPolynomial { coefficients })
}

/// `Σ_α Σ_j e_α(P_j^α)` recomputed from the state's grid offsets.
///
/// Offsets within a species may come in any order but must be distinct and
/// inside the window.
pub fn state_energy(
    spec: &QuasiparticleSpec,
    state: &MultiParticleState,
) -> Result<f64, QuasiparticleError> {
    if state.offsets.len() != spec.n_species() {
        return Err(QuasiparticleError::InvalidState(format!(
            "{} species in state, {} in spec",
            state.offsets.len(),
            spec.n_species()
        )));
    }
    let counts = state
        .offsets
        .iter()
        .map(|s| u32::try_from(s.len()).map_err(|_| QuasiparticleError::Overflow))
        .collect::<Result<Vec<_>, _>>()?;
    let wins = windows(spec, &ParticleContent::new(counts))?;
    let unit = spec.unit();
    let mut energy = 0.0;
    for (alpha, species) in state.offsets.iter().enumerate() {
        let mut sorted = species.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(QuasiparticleError::InvalidState(format!(
                "repeated momentum in species {alpha}"
            )));
        }
        if let (Some(&top), Some(d)) = (sorted.last(), wins[alpha].size) {
            if u64::from(top) >= d {
                return Err(QuasiparticleError::InvalidState(format!(
                    "offset {top} outside window of size {d} for species {alpha}"
                )));
            }
        }
        let lo = wins[alpha].p_min_units;
        for &s in species {
            let p = ratio_to_f64(lo + Rational64::from_integer(2 * i64::from(s))) * unit;
            energy += spec.dispersion().energy(alpha, p)?;
        }
    }
    Ok(energy)
}

#[cfg(test)]
mod tests {
    use super::super::{Bound, Dispersion};
    use super::*;
    use std::f64::consts::PI;

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    fn ising(m_sites: u32, u: i64) -> QuasiparticleSpec {
        QuasiparticleSpec::ising(m_sites, Bound::Finite(r(u))).unwrap()
    }

    #[test]
    fn combinations_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(combinations(3, 0), vec![Vec::<u32>::new()]);
        assert!(combinations(2, 3).is_empty());
        assert_eq!(combinations(7, 3).len(), 35);
    }

    #[test]
    fn ten_states_from_five_slots() {
        let spec = ising(8, 10);
        let states = enumerate_states(&spec, &ParticleContent::new(vec![3]), None).unwrap();
        assert_eq!(states.len(), 10);
        assert_eq!(states[0].offsets, vec![vec![0, 1, 2]]);
        assert_eq!(states[9].offsets, vec![vec![2, 3, 4]]);
        // 0 + π/4 + π/2
        assert!((states[0].total_momentum - 0.75 * PI).abs() < 1e-15);
        assert!((states[0].energy - 0.75 * PI).abs() < 1e-15);
    }

    #[test]
    fn vacuum() {
        let spec = ising(8, 10);
        let states = enumerate_states(&spec, &ParticleContent::vacuum(1), None).unwrap();
        assert_eq!(states.len(), 1);
        assert_eq!(states[0].total_momentum, 0.0);
        assert_eq!(states[0].energy, 0.0);
        assert_eq!(state_energy(&spec, &states[0]), Ok(0.0));
    }

    #[test]
    fn total_momentum_is_reduced() {
        // top state: π/2 + 3π/4 + π = 9π/4 → π/4
        let spec = ising(8, 10);
        let states = enumerate_states(&spec, &ParticleContent::new(vec![3]), None).unwrap();
        let top = states.last().unwrap();
        assert_eq!(top.total_units, r(18));
        assert!((top.total_momentum - 0.25 * PI).abs() < 1e-15);
        assert!((top.energy - 2.25 * PI).abs() < 1e-14);
    }

    #[test]
    fn gaussian_binomial_three_choose_two() {
        let spec = QuasiparticleSpec::ising(6, Bound::Finite(r(6))).unwrap();
        // D = (6 − 2)/2 + 1 = 3
        let poly = counting_polynomial(&spec, &ParticleContent::new(vec![2])).unwrap();
        let expected: BTreeMap<i64, u64> = [(0, 1), (1, 1), (2, 1)].into_iter().collect();
        assert_eq!(poly.coefficients, expected);
    }

    #[test]
    fn sector_filter() {
        let spec = ising(8, 10);
        let m = ParticleContent::new(vec![2]);
        let all = enumerate_states(&spec, &m, None).unwrap();
        let sector = enumerate_states(&spec, &m, Some(PI)).unwrap();
        let expected = all.iter().filter(|s| (s.total_momentum - PI).abs() < 1e-12).count();
        assert_eq!(sector.len(), expected);
        assert!(!sector.is_empty());
        let wrapped = enumerate_states(&spec, &m, Some(3.0 * PI)).unwrap();
        assert_eq!(wrapped, sector);
    }

    #[test]
    fn energy_by_hand_and_relabeling() {
        let spec = ising(8, 10);
        let states = enumerate_states(&spec, &ParticleContent::new(vec![1]), None).unwrap();
        // s = 1: P = π/4
        assert!((state_energy(&spec, &states[1]).unwrap() - PI / 4.0).abs() < 1e-15);

        let two = enumerate_states(&spec, &ParticleContent::new(vec![2]), None).unwrap();
        let mut swapped = two[3].clone();
        swapped.offsets[0].reverse();
        assert_eq!(state_energy(&spec, &swapped), state_energy(&spec, &two[3]));
    }

    #[test]
    fn invalid_states() {
        let spec = ising(8, 10);
        let mut state = enumerate_states(&spec, &ParticleContent::new(vec![2]), None).unwrap()[0].clone();
        state.offsets[0] = vec![1, 1];
        assert!(matches!(state_energy(&spec, &state), Err(QuasiparticleError::InvalidState(_))));
        state.offsets[0] = vec![0, 5];
        assert!(matches!(state_energy(&spec, &state), Err(QuasiparticleError::InvalidState(_))));
        state.offsets.push(vec![]);
        assert!(matches!(state_energy(&spec, &state), Err(QuasiparticleError::InvalidState(_))));
    }

    #[test]
    fn custom_dispersion() {
        let spec = ising(8, 10).with_dispersion(Dispersion::custom(|_, p| 1.0 + p * p));
        let states = enumerate_states(&spec, &ParticleContent::new(vec![1]), None).unwrap();
        let p = PI / 2.0;
        assert!((states[2].energy - (1.0 + p * p)).abs() < 1e-15);

        let bad = ising(8, 10).with_dispersion(Dispersion::custom(|_, p| -p));
        assert!(matches!(
            enumerate_states(&bad, &ParticleContent::new(vec![1]), None),
            Err(QuasiparticleError::InvalidDispersion { .. })
        ));
        assert!(Dispersion::linear(0.0).is_err());
    }

    #[test]
    fn errors() {
        let spec = QuasiparticleSpec::ising(8, Bound::Infinite).unwrap();
        assert_eq!(
            enumerate_states(&spec, &ParticleContent::new(vec![1]), None),
            Err(QuasiparticleError::NeedsFiniteU { species: 0 })
        );
        let big = ising(64, 130);
        assert!(matches!(
            enumerate_states_with_cap(&big, &ParticleContent::new(vec![10]), None, 1000),
            Err(QuasiparticleError::EnumerationCap { .. })
        ));
        // more particles than slots
        assert_eq!(enumerate_states(&ising(8, 10), &ParticleContent::new(vec![6]), None), Ok(vec![]));
    }
}
