//! Truncated Laguerre-series approximation of the marginal eigenvalue
//! density from its moments.
//!
//! The density is expanded around the gamma weight matched to the first
//! two moments:
//!
//! ```text
//! f_K(λ) = λ^ν e^{−λ/c} / c^{ν+1} · Σ_{i=0}^{K} δ_i 𝓛_i(ν, λ/c)
//! ```
//!
//! with `c = (μ₂ − μ₁²)/μ₁`, `ν = μ₁/c − 1`, and `𝓛_i(ν, x) = (−1)^i L_i^{(ν)}(x)`
//! where `L_i^{(ν)}` is the usual generalized Laguerre polynomial. The sign
//! convention cancels between `δ_i` and `𝓛_i`, so internally everything is
//! evaluated with the standard polynomials and `d_i = (−1)^i δ_i`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::MomentTable;
use crate::numeric::{integrate, CompensatedSum};
use crate::special::{ln_gamma, lower_gamma_p};

/// Tolerance for monotonicity and range checks on evaluated CDFs.
pub const CDF_TOLERANCE: f64 = 1e-6;

/// Default number of points in [`DensityModel::default_grid`].
pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    scale: f64,
    shape: f64,
    delta: Vec<f64>,
    delta_error: Vec<f64>,
    source_moments: MomentTable,
}

/// Standard generalized Laguerre values `L_0^{(α)}(x) … L_n^{(α)}(x)`.
fn laguerre_sequence(alpha: f64, n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 + alpha - x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `𝓛_i(ν, x) = Σ_k (−1)^k Γ(ν+i+1) x^{i−k} / (k! (i−k)! Γ(ν+i−k+1))`,
/// evaluated through the three-term recurrence rather than the alternating
/// sum. Requires `ν > −1`, `x ≥ 0`.
pub fn laguerre_eval(nu: f64, i: usize, x: f64) -> f64 {
    let value = laguerre_sequence(nu, i, x)[i];
    if i.is_multiple_of(2) {
        value
    } else {
        -value
    }
}

fn sign_of_parity(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Fits the truncated expansion of order `order` (`K`).
///
/// Needs moments `0 ..= max(order, 2)`.
pub fn fit_density(moments: &MomentTable, order: usize) -> Result<DensityModel> {
    let top = order.max(2) as u32;
    let mu: Vec<f64> = (0..=top)
        .map(|p| moments.require(p))
        .collect::<Result<_>>()?;
    let mean = mu[1];
    let mean_squared = mean * mean;
    if !(mean > 0.0) || !(mu[2] > mean_squared) {
        return Err(Error::DegenerateMoments {
            second: mu[2],
            mean_squared,
        });
    }
    let scale = (mu[2] - mean_squared) / mean;
    let shape = mean / scale - 1.0;

    // ln m_j with m_j = μ_j / (c^j Γ(ν+j+1)); sign kept separately
    let ln_c = scale.ln();
    let ln_m: Vec<(f64, f64)> = mu
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let ln = m.abs().ln() - j as f64 * ln_c - ln_gamma(shape + j as f64 + 1.0);
            (ln, m.signum())
        })
        .collect();

    let mut delta = Vec::with_capacity(order + 1);
    let mut delta_error = Vec::with_capacity(order + 1);
    let mut binomial = vec![1.0f64];
    let mut terms = Vec::with_capacity(order + 1);
    for i in 0..=order {
        if i > 0 {
            let mut row = vec![1.0; i + 1];
            for j in 1..i {
                row[j] = binomial[j - 1] + binomial[j];
            }
            binomial = row;
        }
        // d_i = Σ_j (−1)^j C(i,j) m_j ; δ_i = (−1)^i d_i
        terms.clear();
        terms.extend((0..=i).map(|j| {
            let (ln, sign) = ln_m[j];
            sign * sign_of_parity(i - j) * binomial[j] * ln.exp()
        }));
        terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        let value = terms.iter().copied().collect::<CompensatedSum>().value();
        let magnitude: f64 = terms.iter().map(|t| t.abs()).sum();
        delta.push(value);
        delta_error.push(magnitude * f64::EPSILON * (4.0 + ln_m[i].0.abs()));
    }

    let source_moments = {
        let mut t = MomentTable::new(moments.engine());
        for (p, &m) in mu.iter().enumerate() {
            t.insert(p as u32, m);
        }
        t
    };
    Ok(DensityModel {
        scale,
        shape,
        delta,
        delta_error,
        source_moments,
    })
}

impl DensityModel {
    /// Scale `c`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Shape exponent `ν`.
    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.delta.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.delta
    }

    /// Rounding-error bound on each `δ_i` from the magnitude of the
    /// alternating terms that were summed to form it.
    pub fn coefficient_error_bounds(&self) -> &[f64] {
        &self.delta_error
    }

    pub fn source_moments(&self) -> &MomentTable {
        &self.source_moments
    }

    pub fn mean(&self) -> f64 {
        self.source_moments.get(1).unwrap_or(f64::NAN)
    }

    pub fn variance(&self) -> f64 {
        let m1 = self.mean();
        self.source_moments.get(2).unwrap_or(f64::NAN) - m1 * m1
    }

    fn standard_coefficient(&self, i: usize) -> f64 {
        sign_of_parity(i) * self.delta[i]
    }

    /// Truncated density `f_K(λ)`; zero for `λ < 0`. Not clipped, so
    /// truncation can make it slightly negative.
    pub fn pdf(&self, lambda: f64) -> f64 {
        if lambda < 0.0 {
            return 0.0;
        }
        let x = lambda / self.scale;
        let laguerre = laguerre_sequence(self.shape, self.order(), x);
        let series: f64 = laguerre
            .iter()
            .enumerate()
            .map(|(i, l)| self.standard_coefficient(i) * l)
            .sum();
        if x == 0.0 {
            return match self.shape.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => series / self.scale,
                _ => f64::INFINITY.copysign(series),
            };
        }
        (self.shape * x.ln() - x).exp() * series / self.scale
    }

    /// Truncated CDF `F_K(λ) = ∫₀^λ f_K`, using
    /// `∫₀^x t^ν e^{−t} L_i^{(ν)}(t) dt = x^{ν+1} e^{−x} L_{i−1}^{(ν+1)}(x) / i`.
    pub fn cdf(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        let x = lambda / self.scale;
        let base = self.standard_coefficient(0)
            * ln_gamma(self.shape + 1.0).exp()
            * lower_gamma_p(self.shape + 1.0, x).expect("incomplete gamma converges");
        let order = self.order();
        if order == 0 {
            return base;
        }
        let laguerre = laguerre_sequence(self.shape + 1.0, order - 1, x);
        let series: f64 = (1..=order)
            .map(|i| self.standard_coefficient(i) / i as f64 * laguerre[i - 1])
            .sum();
        base + ((self.shape + 1.0) * x.ln() - x).exp() * series
    }

    /// The same CDF through incomplete gamma functions:
    /// `Σ_i δ_i Σ_k (−1)^k Γ(ν+i+1) P(ν+i−k+1, x) / (k! (i−k)!)`.
    ///
    /// Algebraically identical to [`Self::cdf`] but suffers cancellation
    /// for large `K` (about 1e−7 absolute at `K = 30`, useless by `K = 45`);
    /// kept as an independent cross-check.
    pub fn cdf_gamma_series(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        let x = lambda / self.scale;
        let nu = self.shape;
        let mut total = CompensatedSum::new();
        for (i, &d) in self.delta.iter().enumerate() {
            let lg = ln_gamma(nu + i as f64 + 1.0);
            let inner: CompensatedSum = (0..=i)
                .map(|k| {
                    let weight =
                        (lg - ln_gamma(k as f64 + 1.0) - ln_gamma((i - k) as f64 + 1.0)).exp();
                    let p = lower_gamma_p(nu + (i - k) as f64 + 1.0, x)
                        .expect("incomplete gamma converges");
                    sign_of_parity(k) * weight * p
                })
                .collect();
            total.add(d * inner.value());
        }
        total.value()
    }

    /// Upper integration limit beyond which the gamma weight of the model
    /// carries negligible (< 1e−8) mass.
    pub fn tail_bound(&self) -> f64 {
        self.mean() + 20.0 * self.variance().sqrt() + 40.0 * self.scale
    }

    /// 512 uniform points on `[0, μ₁ + 10σ]`.
    pub fn default_grid(&self) -> Vec<f64> {
        uniform_grid(
            0.0,
            self.mean() + 10.0 * self.variance().sqrt(),
            DEFAULT_GRID_POINTS,
        )
    }

    /// Evaluates PDF and CDF on `grid` (parallel over points, ordered output)
    /// and checks the CDF invariants.
    pub fn evaluate(&self, grid: &[f64]) -> Result<DensityEvaluation> {
        let eval = self.tabulate(grid);
        eval.check()?;
        Ok(eval)
    }

    /// Same as [`evaluate`](Self::evaluate) without the invariant check, for
    /// callers that report violations instead of failing on them.
    pub fn tabulate(&self, grid: &[f64]) -> DensityEvaluation {
        let (pdf, cdf): (Vec<f64>, Vec<f64>) =
            grid.par_iter().map(|&x| (self.pdf(x), self.cdf(x))).unzip();
        DensityEvaluation {
            grid: grid.to_vec(),
            pdf,
            cdf,
        }
    }

    /// Scans `points` uniform points from `mean + 10σ` to the tail bound and
    /// records where the density first stops decreasing.
    pub fn tail_check(&self, points: usize) -> TailCheck {
        let start = self.mean() + 10.0 * self.variance().sqrt();
        let end = self.tail_bound().max(start);
        let grid = uniform_grid(start, end, points.max(2));
        let pdf: Vec<f64> = grid.par_iter().map(|&x| self.pdf(x)).collect();
        let first_increase = pdf
            .windows(2)
            .position(|w| w[1] > w[0])
            .map(|i| grid[i + 1]);
        let min_pdf = pdf.iter().copied().fold(f64::INFINITY, f64::min);
        TailCheck {
            start,
            end,
            first_increase,
            min_pdf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub start: f64,
    pub end: f64,
    /// First grid point where the density is larger than at its predecessor.
    pub first_increase: Option<f64>,
    pub min_pdf: f64,
}

impl TailCheck {
    pub fn is_monotone(&self) -> bool {
        self.first_increase.is_none()
    }
}

pub fn uniform_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        n => (0..n)
            .map(|i| min + (max - min) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn approx_pdf(model: &DensityModel, lambda: f64) -> f64 {
    model.pdf(lambda)
}

pub fn approx_cdf(model: &DensityModel, lambda: f64) -> f64 {
    model.cdf(lambda)
}

/// `∫₀^upper g(λ) f_K(λ) dλ` by adaptive quadrature at relative tolerance
/// 1e−8.
pub fn expected_functional<G: Fn(f64) -> f64>(
    model: &DensityModel,
    g: G,
    upper: f64,
) -> Result<f64> {
    if !(upper > 0.0) {
        return Err(Error::Domain(format!(
            "upper limit must be positive, got {upper}"
        )));
    }
    integrate(|x| g(x) * model.pdf(x), 0.0, upper, 1e-8, 1e-14).map(|q| q.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEvaluation {
    pub grid: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl DensityEvaluation {
    /// CDF within `[−tol, 1+tol]` and nondecreasing up to `tol`.
    pub fn check(&self) -> Result<()> {
        if self.grid.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::DensityInvariant("grid is not ascending".into()));
        }
        if let Some((x, v)) = self
            .grid
            .iter()
            .zip(&self.cdf)
            .find(|(_, v)| !(**v >= -CDF_TOLERANCE && **v <= 1.0 + CDF_TOLERANCE))
        {
            return Err(Error::DensityInvariant(format!(
                "CDF({x}) = {v} is outside [0, 1]"
            )));
        }
        let mut running_max = f64::NEG_INFINITY;
        for (x, &v) in self.grid.iter().zip(&self.cdf) {
            if v < running_max - CDF_TOLERANCE {
                return Err(Error::DensityInvariant(format!(
                    "CDF decreases to {v} at {x} after reaching {running_max}"
                )));
            }
            running_max = running_max.max(v);
        }
        Ok(())
    }

    /// Most negative PDF value on the grid, or zero if none is negative.
    pub fn min_pdf(&self) -> f64 {
        self.pdf.iter().copied().fold(0.0, f64::min)
    }
}
