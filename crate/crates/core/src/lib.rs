//! Positive moments of one-side correlated random Gram matrices
//! `W = Hᴴ H`, `H = Λ^{1/2} X`, and the marginal eigenvalue distribution
//! reconstructed from them.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`spectrum`] | correlation spectra, ensemble configuration |
//! | [`special`] | log-gamma, regularized incomplete gamma, rising products |
//! | [`baseline`] | closed forms through an explicit Vandermonde inverse |
//! | [`stable`] | Vandermonde-free moments via quotient back-substitution |
//! | [`density`] | Laguerre-series PDF/CDF fitted to moments |
//! | [`monte_carlo`] | seeded empirical oracle and KS distance |
//!
//! ```
//! use gram_moments::{exponential_spectrum, stable_moment, validate_ensemble};
//!
//! let spectrum = exponential_spectrum(20, 0.85).unwrap();
//! let config = validate_ensemble(3, 20, spectrum).unwrap();
//! let mu1 = stable_moment(&config, 1).unwrap();
//! assert!((mu1 - config.spectrum().trace()).abs() < 1e-12);
//! ```

// `!(x > 0.0)` style tests are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod density;
pub mod error;
pub mod moments;
pub mod monte_carlo;
pub mod numeric;
pub mod special;
pub mod spectrum;
pub mod stable;

pub use baseline::{
    baseline_cdf, baseline_moment, baseline_pdf, build_vandermonde, BaselineEngine, Flagged,
    InstabilityWarning, VandermondeSystem, INSTABILITY_THRESHOLD,
};
pub use density::{
    approx_cdf, approx_pdf, expected_functional, fit_density, laguerre_eval, uniform_grid,
    DensityEvaluation, DensityModel, TailCheck,
};
pub use error::{Error, Result};
pub use moments::{Engine, MomentTable};
pub use monte_carlo::{
    empirical_cdf, empirical_moment, histogram_density, ks_distance, sample_eigenvalues,
    EmpiricalSample, MomentEstimate,
};
pub use special::{gamma_ratio_rising, log_gamma, regularized_lower_gamma};
pub use spectrum::{
    exponential_spectrum, parse_spectrum, read_spectrum_file, validate_ensemble, EnsembleConfig,
    Spectrum,
};
pub use stable::{
    alpha_vector, monic_coefficients, solve_quotient, stable_moment, stable_moments_upto,
    AlphaVector, MonicCoefficients, QuotientCoefficients, StableEngine,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
