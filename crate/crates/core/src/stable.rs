//! Vandermonde-free evaluation of the positive moments.
//!
//! The moment formula needs `α_{k,τ} = Σ_l Ψ⁻¹_{k,l} β_l^τ`, the solution of
//! `Ψ α_τ = β_τ`. Rather than inverting `Ψ`, note that every `β_i` is a root
//! of `P(X) = Σ_k α_{k,τ} X^{k−1} − X^τ`, so `P = Q · A` with
//! `A(X) = ∏ (X − β_i)`. The coefficients of `P` above degree `q−1` are known
//! (zero, then `−1` at `X^τ`), which pins down `Q` through an upper
//! triangular Toeplitz system with unit diagonal. Back-substitution yields
//! `Q`, and the low coefficients of `Q · A` are the wanted `α`.
//!
//! Only products and sums of the monic coefficients appear; the ill
//! conditioned Vandermonde matrix is never formed.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::moments::{Engine, MomentTable};
use crate::numeric::CompensatedSum;
use crate::special::gamma_ratio_rising;
use crate::spectrum::{EnsembleConfig, Spectrum};

/// Coefficients `a_1 … a_{q+1}` of `∏ (X − β_i)`, ascending exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicCoefficients {
    coeffs: Vec<f64>,
}

impl MonicCoefficients {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of roots `q`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `a_j` in one-based notation, zero outside `1 ..= q+1`.
    fn a(&self, j: isize) -> f64 {
        if j >= 1 && (j as usize) <= self.coeffs.len() {
            self.coeffs[j as usize - 1]
        } else {
            0.0
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `Σ |a_j| x^{j−1}`, the natural scale of [`Self::eval`] at `x`.
    pub fn eval_scale(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x.abs() + c.abs())
    }
}

/// Expands `∏ (X − β_i)` one root at a time, smallest root first.
pub fn monic_coefficients(spectrum: &Spectrum) -> MonicCoefficients {
    let q = spectrum.len();
    let mut coeffs = Vec::with_capacity(q + 1);
    coeffs.push(1.0);
    for &beta in spectrum.values() {
        // multiply by (X − β): new[i] = old[i−1] − β·old[i]
        coeffs.push(0.0);
        for i in (0..coeffs.len()).rev() {
            let shifted = if i > 0 { coeffs[i - 1] } else { 0.0 };
            coeffs[i] = shifted - beta * coeffs[i];
        }
    }
    MonicCoefficients { coeffs }
}

/// Coefficients `b_1 … b_{τ−q+1}` of the quotient `Q(X)` for exponent `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientCoefficients {
    coeffs: Vec<f64>,
    tau: usize,
}

impl QuotientCoefficients {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tau(&self) -> usize {
        self.tau
    }
}

/// Solves the triangular Toeplitz system for `Q` by back-substitution.
///
/// Row `r` reads `Σ_{k ≥ r} a_{q+1+r−k} b_k = 0` for `r < τ−q+1` and
/// `a_{q+1} b_{τ−q+1} = −1` for the last row. Since `a_{q+1} = 1` no division
/// is needed. `τ = q` gives the constant quotient `−1`.
pub fn solve_quotient(a: &MonicCoefficients, tau: usize) -> Result<QuotientCoefficients> {
    let q = a.degree();
    if tau < q {
        return Err(Error::Domain(format!(
            "quotient requires tau >= q = {q}, got {tau}; smaller exponents are trivial"
        )));
    }
    let len = tau - q + 1;
    let mut b = vec![0.0; len];
    b[len - 1] = -1.0;
    for r in (1..len).rev() {
        // zero-based b[r-1] from b[r..]
        let row = r as isize;
        let s: CompensatedSum = (row + 1..=len as isize)
            .map(|k| a.a(q as isize + 1 + row - k) * b[k as usize - 1])
            .collect();
        b[r - 1] = -s.value();
        if !b[r - 1].is_finite() {
            return Err(Error::Overflow {
                what: "quotient back-substitution",
                order: tau as u32,
            });
        }
    }
    Ok(QuotientCoefficients { coeffs: b, tau })
}

/// `α_τ`, the solution of `Ψ α_τ = β_τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    alpha: Vec<f64>,
    tau: usize,
}

impl AlphaVector {
    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Component `k` in one-based notation.
    pub fn component(&self, k: usize) -> f64 {
        self.alpha[k - 1]
    }
}

fn unit_alpha(q: usize, tau: usize) -> AlphaVector {
    let mut alpha = vec![0.0; q];
    alpha[tau] = 1.0;
    AlphaVector { alpha, tau }
}

/// Low-order coefficients of `Q · A`: `α_j = Σ_k b_k a_{j+1−k}`.
fn alpha_from_quotient(a: &MonicCoefficients, b: &QuotientCoefficients) -> Result<AlphaVector> {
    let q = a.degree();
    let alpha = (1..=q as isize)
        .map(|j| {
            let s: CompensatedSum = (1..=b.coeffs.len() as isize)
                .map(|k| b.coeffs[k as usize - 1] * a.a(j + 1 - k))
                .collect();
            s.value()
        })
        .collect::<Vec<_>>();
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow {
            what: "alpha reconstruction",
            order: b.tau as u32,
        });
    }
    Ok(AlphaVector { alpha, tau: b.tau })
}

/// `α_τ` for any `τ ≥ 0`: the unit vector `e_{τ+1}` for `τ < q`, the
/// quotient route otherwise.
pub fn alpha_vector(a: &MonicCoefficients, tau: usize) -> Result<AlphaVector> {
    let q = a.degree();
    if tau < q {
        return Ok(unit_alpha(q, tau));
    }
    alpha_from_quotient(a, &solve_quotient(a, tau)?)
}

/// Moment evaluator that shares the monic coefficients and caches quotient
/// solutions per exponent.
#[derive(Debug, Clone)]
pub struct StableEngine {
    config: EnsembleConfig,
    monic: MonicCoefficients,
    alphas: HashMap<usize, AlphaVector>,
}

impl StableEngine {
    pub fn new(config: &EnsembleConfig) -> Self {
        Self {
            monic: monic_coefficients(config.spectrum()),
            config: config.clone(),
            alphas: HashMap::new(),
        }
    }

    pub fn monic(&self) -> &MonicCoefficients {
        &self.monic
    }

    pub fn alpha(&mut self, tau: usize) -> Result<&AlphaVector> {
        if !self.alphas.contains_key(&tau) {
            let alpha = alpha_vector(&self.monic, tau)?;
            self.alphas.insert(tau, alpha);
        }
        Ok(&self.alphas[&tau])
    }

    /// `μ(p) = (1/n_t) Σ_{k=q−n_t+1}^{q} [(n_t−q+k)]_p · α_{k, p+k−1}`.
    pub fn moment(&mut self, p: u32) -> Result<f64> {
        let q = self.config.q();
        let n_t = self.config.n_t();
        let mut total = CompensatedSum::new();
        for k in q - n_t + 1..=q {
            let ratio =
                gamma_ratio_rising((n_t + k - q) as f64, p).map_err(|_| Error::Overflow {
                    what: "moment gamma ratio",
                    order: p,
                })?;
            let tau = p as usize + k - 1;
            let alpha = self
                .alpha(tau)
                .map_err(|e| match e {
                    Error::Overflow { what, .. } => Error::Overflow { what, order: p },
                    other => other,
                })?
                .component(k);
            total.add(ratio * alpha);
        }
        let value = total.value() / n_t as f64;
        if !value.is_finite() {
            return Err(Error::Overflow {
                what: "moment",
                order: p,
            });
        }
        Ok(value)
    }

    pub fn moments_upto(&mut self, p_max: u32) -> Result<MomentTable> {
        let mut table = MomentTable::new(Engine::Stable);
        for p in 0..=p_max {
            table.insert(p, self.moment(p)?);
        }
        Ok(table)
    }
}

pub fn stable_moment(config: &EnsembleConfig, p: u32) -> Result<f64> {
    StableEngine::new(config).moment(p)
}

pub fn stable_moments_upto(config: &EnsembleConfig, p_max: u32) -> Result<MomentTable> {
    StableEngine::new(config).moments_upto(p_max)
}
