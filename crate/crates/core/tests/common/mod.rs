#![allow(dead_code)]

use gram_moments::{exponential_spectrum, validate_ensemble, EnsembleConfig, Spectrum};
use proptest::prelude::*;

pub const XI: f64 = 0.85;

/// n_t = 3, q = 5, ξ = 0.85.
pub fn config1() -> EnsembleConfig {
    validate_ensemble(3, 5, exponential_spectrum(5, XI).unwrap()).unwrap()
}

/// n_t = 3, q = 20, ξ = 0.85. The Vandermonde matrix is numerically singular here.
pub fn config2() -> EnsembleConfig {
    validate_ensemble(3, 20, exponential_spectrum(20, XI).unwrap()).unwrap()
}

/// Spectra of size `1..=max_q` whose smallest gap is at least 1/16 of the
/// largest eigenvalue.
pub fn separated_spectrum(max_q: usize) -> impl Strategy<Value = Spectrum> {
    (1..=max_q)
        .prop_flat_map(|q| {
            (
                0.05f64..2.0,
                prop::collection::vec(1.0f64..2.0, q - 1),
                -2.0f64..1.0,
            )
        })
        .prop_map(|(first, steps, exponent)| {
            let mut values = vec![first];
            for s in steps {
                values.push(values.last().unwrap() + s);
            }
            let top = *values.last().unwrap();
            let scale = 10f64.powf(exponent) / top;
            Spectrum::new(values.into_iter().map(|v| v * scale).collect()).unwrap()
        })
}

pub fn ensemble(max_q: usize) -> impl Strategy<Value = EnsembleConfig> {
    separated_spectrum(max_q).prop_flat_map(|s| {
        let q = s.len();
        (1..=q).prop_map(move |n_t| validate_ensemble(n_t, q, s.clone()).unwrap())
    })
}

/// Gamma(ν+1, c) moments `Γ(ν+1+p) c^p / Γ(ν+1)` for `p = 0..=p_max`.
pub fn gamma_moments(nu: f64, c: f64, p_max: usize) -> Vec<f64> {
    let mut mu = vec![1.0];
    for p in 1..=p_max {
        let prev = mu[p - 1];
        mu.push(prev * c * (nu + p as f64));
    }
    mu
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
