use num_rational::Ratio;

use super::ChiralPottsError;

fn check_index(n_states: usize, n: usize) -> Result<(), ChiralPottsError> {
    if n_states < 2 {
        return Err(ChiralPottsError::InvalidStates(n_states));
    }
    if n == 0 || n >= n_states {
        return Err(ChiralPottsError::OrderIndex { n, n_states });
    }
    Ok(())
}

/// Exponent `β_n = n(N − n) / (2N²)` of `⟨σ^n⟩ = (1 − k²)^{β_n}`, reduced.
pub fn order_parameter_exponent(n_states: usize, n: usize) -> Result<Ratio<u64>, ChiralPottsError> {
    check_index(n_states, n)?;
    let (n, big_n) = (n as u64, n_states as u64);
    Ok(Ratio::new(n * (big_n - n), 2 * big_n * big_n))
}

/// `⟨σ^n⟩ = (1 − k²)^{n(N−n)/(2N²)}` for `0 <= k <= 1`.
pub fn order_parameter(n_states: usize, n: usize, k: f64) -> Result<f64, ChiralPottsError> {
    let beta = order_parameter_exponent(n_states, n)?;
    if !(0.0..=1.0).contains(&k) {
        return Err(ChiralPottsError::InvalidModulus(k));
    }
    let exponent = *beta.numer() as f64 / *beta.denom() as f64;
    Ok((1.0 - k * k).powf(exponent))
}
