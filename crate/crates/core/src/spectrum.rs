//! Correlation spectra and ensemble configuration.
//!
//! A [`Spectrum`] holds the distinct eigenvalues of the row correlation
//! matrix in ascending order. An [`EnsembleConfig`] pairs it with the column
//! count `n_t` of `H`, defining the Gram ensemble `W = HᴴH` with
//! `H = Λ^{1/2} X`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative gap below which two eigenvalues are treated as coincident.
pub const DUPLICATE_TOLERANCE: f64 = 1e-14;

/// Strictly increasing, strictly positive, finite eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Validates `values` and sorts them ascending.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidEnsemble("spectrum is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidEnsemble(format!(
                "non-finite eigenvalue {bad}"
            )));
        }
        if let Some(bad) = values.iter().find(|v| **v <= 0.0) {
            return Err(Error::InvalidEnsemble(format!(
                "non-positive eigenvalue {bad}"
            )));
        }
        values.sort_by(f64::total_cmp);
        for pair in values.windows(2) {
            if (pair[1] - pair[0]) <= DUPLICATE_TOLERANCE * pair[1] {
                return Err(Error::DuplicateEigenvalue {
                    lower: pair[0],
                    upper: pair[1],
                });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Sum of the eigenvalues, i.e. `tr Λ`.
    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Smallest gap between neighbours divided by the largest eigenvalue.
    /// Infinite for a single eigenvalue.
    pub fn min_relative_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
            / self.max()
    }
}

impl<'de> Deserialize<'de> for Spectrum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        Spectrum::new(values).map_err(serde::de::Error::custom)
    }
}

/// Exponential forgetting-factor model `Λ = (1−ξ) diag(1, ξ, …, ξ^{q−1})`.
pub fn exponential_spectrum(q: usize, xi: f64) -> Result<Spectrum> {
    if q < 1 {
        return Err(Error::Domain(format!("q must be at least 1, got {q}")));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::Domain(format!(
            "forgetting factor must lie in (0, 1), got {xi}"
        )));
    }
    let scale = 1.0 - xi;
    let values = (0..q).rev().map(|k| scale * xi.powi(k as i32)).collect();
    Spectrum::new(values)
}

/// Dimensions and spectrum of a one-side correlated Gram ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleConfig {
    n_t: usize,
    q: usize,
    spectrum: Spectrum,
}

impl EnsembleConfig {
    pub fn new(n_t: usize, q: usize, spectrum: Spectrum) -> Result<Self> {
        validate_ensemble(n_t, q, spectrum)
    }

    /// Number of columns of `H`, which is the dimension of `W`.
    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
}

/// Checks `1 ≤ n_t ≤ q` and that the spectrum has exactly `q` entries.
pub fn validate_ensemble(n_t: usize, q: usize, spectrum: Spectrum) -> Result<EnsembleConfig> {
    if n_t == 0 || q == 0 {
        return Err(Error::InvalidEnsemble(format!(
            "dimensions must be positive, got n_t = {n_t}, q = {q}"
        )));
    }
    if n_t > q {
        return Err(Error::InvalidEnsemble(format!(
            "n_t = {n_t} exceeds q = {q}; the model requires n_t <= q"
        )));
    }
    if spectrum.len() != q {
        return Err(Error::InvalidEnsemble(format!(
            "spectrum has {} eigenvalues but q = {q}",
            spectrum.len()
        )));
    }
    Ok(EnsembleConfig { n_t, q, spectrum })
}

/// Parses a spectrum given either as a JSON array of numbers or as plain
/// text with one eigenvalue per line. Blank lines and `#` comments are
/// skipped in the text form.
pub fn parse_spectrum(text: &str) -> Result<Spectrum> {
    let trimmed = text.trim_start();
    let values: Vec<f64> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| Error::Format(format!("spectrum JSON: {e}")))?
    } else {
        text.lines()
            .enumerate()
            .map(|(i, line)| (i, line.trim()))
            .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
            .map(|(i, line)| {
                line.parse::<f64>()
                    .map_err(|e| Error::Format(format!("spectrum line {}: {e}", i + 1)))
            })
            .collect::<Result<_>>()?
    };
    Spectrum::new(values)
}

pub fn read_spectrum_file(path: impl AsRef<Path>) -> Result<Spectrum> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_spectrum(&text)
}
