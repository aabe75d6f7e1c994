//! Seeded Monte Carlo oracle for the Gram ensemble.
//!
//! Realization `i` draws its Gaussian entries from a ChaCha8 stream keyed by
//! `(seed, i)`, so a sample is a pure function of `(config, n_samples, seed)`
//! however the realizations are scheduled across threads.

use std::io::{Read, Write};
use std::sync::OnceLock;

use nalgebra::{linalg::SymmetricEigen, DMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::density::DensityModel;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::spectrum::EnsembleConfig;

/// Leading bytes of the binary sample format.
pub const SAMPLE_MAGIC: [u8; 8] = *b"GRAMEIG1";
pub const SAMPLE_HEADER_LEN: usize = 24;

#[derive(Debug, Clone)]
pub struct EmpiricalSample {
    eigenvalues: Vec<f64>,
    n_samples: usize,
    n_t: usize,
    config: Option<EnsembleConfig>,
    seed: Option<u64>,
    sorted: OnceLock<Vec<f64>>,
}

impl PartialEq for EmpiricalSample {
    fn eq(&self, other: &Self) -> bool {
        self.n_samples == other.n_samples
            && self.n_t == other.n_t
            && self.eigenvalues == other.eigenvalues
    }
}

impl EmpiricalSample {
    /// Wraps externally obtained eigenvalues, `n_t` per realization.
    pub fn from_eigenvalues(eigenvalues: Vec<f64>, n_t: usize) -> Result<Self> {
        if n_t == 0 || !eigenvalues.len().is_multiple_of(n_t) {
            return Err(Error::Format(format!(
                "{} eigenvalues cannot be split into realizations of {n_t}",
                eigenvalues.len()
            )));
        }
        Ok(Self {
            n_samples: eigenvalues.len() / n_t,
            eigenvalues,
            n_t,
            config: None,
            seed: None,
            sorted: OnceLock::new(),
        })
    }

    /// All draws, realization-major.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Generating config; `None` for imported samples.
    pub fn config(&self) -> Option<&EnsembleConfig> {
        self.config.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        self.sorted.get_or_init(|| {
            let mut v = self.eigenvalues.clone();
            v.sort_by(f64::total_cmp);
            v
        })
    }

    pub fn realizations(&self) -> impl Iterator<Item = &[f64]> {
        self.eigenvalues.chunks(self.n_t)
    }

    /// Writes the 24-byte header (magic, `n_samples`, `n_t` as little-endian
    /// u64) followed by the eigenvalues as little-endian f64.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&SAMPLE_MAGIC)?;
        w.write_all(&(self.n_samples as u64).to_le_bytes())?;
        w.write_all(&(self.n_t as u64).to_le_bytes())?;
        for v in &self.eigenvalues {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; SAMPLE_HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|e| Error::Format(format!("sample header: {e}")))?;
        if header[..8] != SAMPLE_MAGIC {
            return Err(Error::Format("bad magic in sample file".into()));
        }
        let word = |i: usize| u64::from_le_bytes(header[i..i + 8].try_into().unwrap());
        let (n_samples, n_t) = (word(8) as usize, word(16) as usize);
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        let expected = n_samples
            .checked_mul(n_t)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Format("sample dimensions overflow".into()))?;
        if body.len() != expected {
            return Err(Error::Format(format!(
                "sample body has {} bytes, header implies {expected}",
                body.len()
            )));
        }
        let eigenvalues = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_eigenvalues(eigenvalues, n_t)
    }

    /// CSV with header `realization,eigenvalue`, values at 17 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(["realization", "eigenvalue"])
            .map_err(csv_err)?;
        for (i, chunk) in self.realizations().enumerate() {
            for v in chunk {
                out.write_record([i.to_string(), format!("{v:.16e}")])
                    .map_err(csv_err)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let mut eigenvalues = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Format(format!("sample CSV: {e}")))?;
            let parse_err =
                |what: &str| Error::Format(format!("sample CSV row {}: bad {what}", line + 1));
            let idx: usize = record
                .get(0)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("realization"))?;
            let value: f64 = record
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("eigenvalue"))?;
            match idx.cmp(&counts.len()) {
                std::cmp::Ordering::Less if idx + 1 == counts.len() => counts[idx] += 1,
                std::cmp::Ordering::Equal => counts.push(1),
                _ => return Err(parse_err("realization ordering")),
            }
            eigenvalues.push(value);
        }
        let n_t = counts.first().copied().unwrap_or(0);
        if counts.iter().any(|&c| c != n_t) {
            return Err(Error::Format(
                "realizations have differing eigenvalue counts".into(),
            ));
        }
        Self::from_eigenvalues(eigenvalues, n_t)
    }
}

fn realization(config: &EnsembleConfig, seed: u64, index: usize) -> Result<Vec<f64>> {
    let q = config.q();
    let n_t = config.n_t();
    let beta = config.spectrum().values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // X is q × n_t, stored row-major; CN(0,1) entries
    let x: Vec<Complex64> = (0..q * n_t)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect();
    // W = Xᴴ Λ X
    let w = DMatrix::from_fn(n_t, n_t, |j, k| {
        (0..q)
            .map(|i| beta[i] * x[i * n_t + j].conj() * x[i * n_t + k])
            .sum::<Complex64>()
    });
    let eig = SymmetricEigen::try_new(w, f64::EPSILON, 10_000).ok_or(Error::Eigensolver(index))?;
    let floor = -1e-10 * config.spectrum().max() * q as f64;
    let mut values = eig
        .eigenvalues
        .iter()
        .map(|&v| if v >= floor { v.max(0.0) } else { f64::NAN })
        .collect::<Vec<_>>();
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Eigensolver(index));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Draws `n_samples` realizations of `W = Hᴴ H` and collects their
/// eigenvalues.
pub fn sample_eigenvalues(
    config: &EnsembleConfig,
    n_samples: usize,
    seed: u64,
) -> Result<EmpiricalSample> {
    if n_samples == 0 {
        return Err(Error::InvalidEnsemble(
            "n_samples must be at least 1".into(),
        ));
    }
    let per_realization: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| realization(config, seed, i))
        .collect::<Result<_>>()?;
    let eigenvalues = per_realization.into_iter().flatten().collect();
    Ok(EmpiricalSample {
        eigenvalues,
        n_samples,
        n_t: config.n_t(),
        config: Some(config.clone()),
        seed: Some(seed),
        sorted: OnceLock::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub standard_error: f64,
}

/// Sample mean of `λ^p` and its standard error `s / √N` over all draws. The
/// standard error is NaN for a single draw.
pub fn empirical_moment(sample: &EmpiricalSample, p: u32) -> MomentEstimate {
    if p == 0 {
        return MomentEstimate {
            estimate: 1.0,
            standard_error: 0.0,
        };
    }
    let n = sample.len() as f64;
    let pow = |v: f64| v.powi(p as i32);
    let mean = sample
        .eigenvalues
        .iter()
        .map(|&v| pow(v))
        .collect::<CompensatedSum>()
        .value()
        / n;
    let ss = sample
        .eigenvalues
        .iter()
        .map(|&v| (pow(v) - mean).powi(2))
        .collect::<CompensatedSum>()
        .value();
    let standard_error = if sample.len() > 1 {
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        f64::NAN
    };
    MomentEstimate {
        estimate: mean,
        standard_error,
    }
}

/// Fraction of draws `≤ λ`.
pub fn empirical_cdf(sample: &EmpiricalSample, lambda: f64) -> f64 {
    let sorted = sample.sorted();
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted.partition_point(|&v| v <= lambda) as f64 / sorted.len() as f64
}

/// Histogram density on bins centred at the grid points, with edges at the
/// midpoints between neighbours.
pub fn histogram_density(sample: &EmpiricalSample, grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n < 2 || sample.is_empty() {
        return vec![0.0; n];
    }
    let edge = |i: usize| -> f64 {
        match i {
            0 => grid[0] - 0.5 * (grid[1] - grid[0]),
            i if i == n => grid[n - 1] + 0.5 * (grid[n - 1] - grid[n - 2]),
            i => 0.5 * (grid[i - 1] + grid[i]),
        }
    };
    let total = sample.len() as f64;
    (0..n)
        .map(|i| {
            let (lo, hi) = (edge(i), edge(i + 1));
            let sorted = sample.sorted();
            let count = sorted.partition_point(|&v| v < hi) - sorted.partition_point(|&v| v < lo);
            count as f64 / total / (hi - lo)
        })
        .collect()
}

/// Kolmogorov–Smirnov distance between the model CDF and the sample's
/// empirical CDF, checking both sides of every step.
pub fn ks_distance(model: &DensityModel, sample: &EmpiricalSample) -> f64 {
    let sorted = sample.sorted();
    let n = sorted.len() as f64;
    sorted
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = model.cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .reduce(|| 0.0, f64::max)
}
