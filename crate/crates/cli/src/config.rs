use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use gram_moments::{exponential_spectrum, read_spectrum_file, validate_ensemble, EnsembleConfig};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Moments,
    Density,
    Compare,
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumSource {
    /// Exponential model `(1−ξ) ξ^k`.
    Xi(f64),
    File(PathBuf),
}

/// `MIN:MAX:POINTS`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, points] = parts.as_slice() else {
            return Err(format!("expected MIN:MAX:POINTS, got {s:?}"));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad grid bound {t:?}: {e}"))
        };
        let (min, max) = (num(min)?, num(max)?);
        let points: usize = points
            .trim()
            .parse()
            .map_err(|e| format!("bad grid point count {points:?}: {e}"))?;
        if !(min.is_finite() && max.is_finite()) || min < 0.0 || max <= min {
            return Err(format!("grid needs 0 <= MIN < MAX, got {min}:{max}"));
        }
        if points < 2 {
            return Err(format!("grid needs at least 2 points, got {points}"));
        }
        Ok(GridSpec { min, max, points })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    /// Raw sample dump; `sample` only.
    Binary,
}

/// Everything one invocation needs, echoed into JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub n_t: usize,
    pub q: usize,
    pub spectrum_source: SpectrumSource,
    pub p_list: Vec<u32>,
    #[serde(rename = "K")]
    pub order: Option<usize>,
    pub n_samples: usize,
    pub seed: u64,
    pub grid: Option<GridSpec>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match self.command {
            Command::Moments | Command::Compare if self.p_list.is_empty() => {
                bail!("--p must list at least one moment order")
            }
            Command::Compare | Command::Sample if self.n_samples == 0 => {
                bail!("--samples must be at least 1")
            }
            Command::Density if self.order.is_none() => bail!("--K is required"),
            _ => {}
        }
        let binary_ok = self.command == Command::Sample;
        if self.output_format == OutputFormat::Binary && !binary_ok {
            bail!("binary output is only available for the sample command");
        }
        if self.output_format == OutputFormat::Json && binary_ok {
            bail!("the sample command writes csv or binary");
        }
        if let SpectrumSource::Xi(xi) = self.spectrum_source {
            if self.q == 0 {
                bail!("--q is required with --xi");
            }
            if !(xi > 0.0 && xi < 1.0) {
                bail!("--xi must lie in (0, 1), got {xi}");
            }
        }
        Ok(())
    }

    /// Builds the ensemble. With a spectrum file `q` is taken from the file
    /// unless it was given, in which case the two must agree.
    pub fn ensemble(&self) -> Result<EnsembleConfig> {
        let spectrum = match &self.spectrum_source {
            SpectrumSource::Xi(xi) => exponential_spectrum(self.q, *xi)?,
            SpectrumSource::File(path) => read_spectrum_file(path)
                .with_context(|| format!("reading spectrum from {}", path.display()))?,
        };
        let q = if self.q == 0 { spectrum.len() } else { self.q };
        Ok(validate_ensemble(self.n_t, q, spectrum)?)
    }
}
