//! Shared fixtures for the criterion benches.

use gram_moments::{exponential_spectrum, validate_ensemble, EnsembleConfig};

/// `n_t = 3` with the exponential spectrum at `ξ = 0.85`.
pub fn exponential_config(q: usize) -> EnsembleConfig {
    validate_ensemble(3, q, exponential_spectrum(q, 0.85).expect("valid spectrum"))
        .expect("valid ensemble")
}
