use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::time::Instant;

use integrable_core::quasiparticle::{
    counting_polynomial, enumerate_states, p_min, state_energy, window, windows, Bound,
    ParticleContent, QuasiparticleSpec,
};
use num_rational::Rational64;
use proptest::prelude::*;

fn r(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn two_species(m_sites: u32) -> QuasiparticleSpec {
    QuasiparticleSpec::new(
        m_sites,
        vec![vec![r(2), r(1)], vec![r(1), r(2)]],
        vec![r(1), r(1)],
        vec![Bound::Finite(r(24)), Bound::Finite(r(20))],
    )
    .unwrap()
}

fn contents_up_to(total: u32) -> Vec<ParticleContent> {
    let mut out = Vec::new();
    for a in 0..=total {
        for b in 0..=total - a {
            out.push(ParticleContent::new(vec![a, b]));
        }
    }
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Subsets of `0..d` with `k` elements, by scanning all bitmasks.
fn brute_subsets(d: u32, k: u32) -> Vec<Vec<u32>> {
    (0u64..1 << d)
        .filter(|mask| mask.count_ones() == k)
        .map(|mask| (0..d).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

/// `[d choose k]_q` by the q-Pascal rule `[n, k] = [n−1, k−1] + q^k [n−1, k]`.
fn gaussian_binomial(d: u32, k: u32) -> BTreeMap<i64, u64> {
    if k > d {
        return BTreeMap::new();
    }
    if k == 0 || k == d {
        return [(0, 1)].into_iter().collect();
    }
    let mut out = gaussian_binomial(d - 1, k - 1);
    for (e, c) in gaussian_binomial(d - 1, k) {
        *out.entry(e + i64::from(k)).or_insert(0) += c;
    }
    out
}

fn convolve(a: &BTreeMap<i64, u64>, b: &BTreeMap<i64, u64>) -> BTreeMap<i64, u64> {
    let mut out = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            *out.entry(ea + eb).or_insert(0) += ca * cb;
        }
    }
    out
}

#[test]
fn exclusion_counting_two_species() {
    let spec = two_species(8);
    let start = Instant::now();
    for m in contents_up_to(6) {
        let wins = windows(&spec, &m).unwrap();
        let sizes: Vec<u32> = wins.iter().map(|w| w.size.unwrap() as u32).collect();
        let states = enumerate_states(&spec, &m, None).unwrap();
        let expected: u64 = sizes
            .iter()
            .zip(&m.counts)
            .map(|(&d, &k)| binomial(u64::from(d), u64::from(k)))
            .product();
        assert_eq!(states.len() as u64, expected, "m = {:?}", m.counts);

        // brute-force oracle over bitmask subsets
        let mut brute_states = BTreeSet::new();
        let mut brute_poly = BTreeMap::new();
        let base: i64 = m.counts.iter().map(|&k| i64::from(k) * (i64::from(k) - 1) / 2).sum();
        for s0 in brute_subsets(sizes[0], m.counts[0]) {
            for s1 in brute_subsets(sizes[1], m.counts[1]) {
                let s: i64 = s0.iter().chain(&s1).map(|&x| i64::from(x)).sum();
                *brute_poly.entry(s - base).or_insert(0u64) += 1;
                brute_states.insert(vec![s0.clone(), s1]);
            }
        }
        let listed: BTreeSet<_> = states.iter().map(|s| s.offsets.clone()).collect();
        assert_eq!(listed, brute_states);

        let poly = counting_polynomial(&spec, &m).unwrap();
        assert_eq!(poly.coefficients, brute_poly, "m = {:?}", m.counts);
        let product = convolve(
            &gaussian_binomial(sizes[0], m.counts[0]),
            &gaussian_binomial(sizes[1], m.counts[1]),
        );
        assert_eq!(poly.coefficients, product, "m = {:?}", m.counts);
        assert_eq!(poly.total(), expected);
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn two_species_m_six_matches_brute_force_momenta() {
    let spec = two_species(6);
    let m = ParticleContent::new(vec![2, 1]);
    let wins = windows(&spec, &m).unwrap();
    let unit = PI / 6.0;
    let states = enumerate_states(&spec, &m, None).unwrap();
    for st in &states {
        for (alpha, (offs, moms)) in st.offsets.iter().zip(&st.momenta).enumerate() {
            let lo = *wins[alpha].p_min_units.numer() as f64 / *wins[alpha].p_min_units.denom() as f64;
            for (&s, &p) in offs.iter().zip(moms) {
                assert_eq!(p, (lo + 2.0 * f64::from(s)) * unit);
                assert!(p <= wins[alpha].p_max(&spec));
            }
        }
        let total: f64 = st.momenta.iter().flatten().sum();
        let reduced = total.rem_euclid(2.0 * PI);
        let diff = (reduced - st.total_momentum).abs();
        assert!(diff < 1e-12 || (diff - 2.0 * PI).abs() < 1e-12);
        assert!((0.0..2.0 * PI).contains(&st.total_momentum));
        assert!((state_energy(&spec, st).unwrap() - st.energy).abs() < 1e-15);
    }
}

#[test]
fn canonical_order_is_lexicographic() {
    let spec = two_species(8);
    let states = enumerate_states(&spec, &ParticleContent::new(vec![2, 2]), None).unwrap();
    for w in states.windows(2) {
        assert!(w[0].offsets < w[1].offsets);
    }
}

#[test]
fn sectors_partition_the_states() {
    let spec = two_species(8);
    for m in contents_up_to(4) {
        let total = enumerate_states(&spec, &m, None).unwrap().len();
        let per_sector: usize = (0..16)
            .map(|j| enumerate_states(&spec, &m, Some(j as f64 * PI / 8.0)).unwrap().len())
            .sum();
        assert_eq!(per_sector, total, "m = {:?}", m.counts);
    }
}

#[test]
fn free_fermion_minimum_momentum() {
    for m_sites in [4, 8, 13] {
        let spec = QuasiparticleSpec::ising(m_sites, Bound::Finite(r(30))).unwrap();
        for k in 0..10 {
            assert_eq!(p_min(&spec, &ParticleContent::new(vec![k]), 0).unwrap(), 0.0);
        }
    }
}

fn positive_exclusion_spec() -> impl Strategy<Value = (QuasiparticleSpec, Vec<u32>, usize)> {
    (
        1u32..4,
        1u32..4,
        0u32..3,
        1i64..3,
        20i64..40,
        proptest::collection::vec(0u32..5, 2),
        0usize..2,
    )
        .prop_map(|(b00, b11, off, a, u, counts, beta)| {
            let spec = QuasiparticleSpec::new(
                10,
                vec![vec![r(i64::from(b00) + 1), r(i64::from(off) + 1)], vec![r(i64::from(off) + 1), r(i64::from(b11) + 1)]],
                vec![r(a), r(a)],
                vec![Bound::Finite(r(u)), Bound::Finite(r(u))],
            )
            .unwrap();
            (spec, counts, beta)
        })
}

proptest! {
    #[test]
    fn windows_shrink_as_particles_are_added((spec, counts, beta) in positive_exclusion_spec()) {
        let m = ParticleContent::new(counts.clone());
        let mut more = counts;
        more[beta] += 1;
        let m_more = ParticleContent::new(more);
        for alpha in 0..2 {
            let d = window(&spec, &m, alpha).unwrap().size.unwrap();
            let d_more = window(&spec, &m_more, alpha).unwrap().size.unwrap();
            prop_assert!(d_more <= d);
        }
    }

    #[test]
    fn count_identity_single_species(d_half in 0i64..8, k in 0u32..6, m_sites in 3u32..12) {
        // B = 1, A = 1: D = u/2
        let spec = QuasiparticleSpec::ising(m_sites, Bound::Finite(r(2 * d_half + 2))).unwrap();
        let m = ParticleContent::new(vec![k]);
        let d = window(&spec, &m, 0).unwrap().size.unwrap();
        prop_assert_eq!(d, (d_half + 1) as u64);
        let states = enumerate_states(&spec, &m, None).unwrap();
        prop_assert_eq!(states.len() as u64, binomial(d, u64::from(k)));
        let poly = counting_polynomial(&spec, &m).unwrap();
        prop_assert_eq!(poly.coefficients, gaussian_binomial(d as u32, k));
    }

    #[test]
    fn energy_is_sum_of_speeds(k in 1u32..4) {
        let spec = QuasiparticleSpec::ising(8, Bound::Finite(r(14))).unwrap();
        for st in enumerate_states(&spec, &ParticleContent::new(vec![k]), None).unwrap() {
            let sum: f64 = st.momenta[0].iter().map(|p| p.abs()).sum();
            prop_assert!((st.energy - sum).abs() < 1e-14);
        }
    }
}
