//! Closed-form marginal PDF, CDF and moments through an explicit inverse of
//! the Vandermonde matrix `Ψ_{m,n} = β_m^{n−1}`.
//!
//! This is the classical route. It is exact in exact arithmetic but
//! inherits the conditioning of `Ψ`, which degrades quickly when the
//! eigenvalues cluster. Every value it returns carries the condition
//! estimate so callers can tell when the result is meaningless.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::moments::{Engine, MomentTable};
use crate::numeric::CompensatedSum;
use crate::special::{gamma_ratio_rising, lower_gamma_p};
use crate::spectrum::{EnsembleConfig, Spectrum};

/// One-norm condition estimate above which baseline results are flagged.
pub const INSTABILITY_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstabilityWarning {
    pub condition: f64,
}

impl std::fmt::Display for InstabilityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Vandermonde condition estimate {:.3e} exceeds {:.0e}; result is unreliable",
            self.condition, INSTABILITY_THRESHOLD
        )
    }
}

/// A baseline result paired with its conditioning warning, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub warning: Option<InstabilityWarning>,
}

#[derive(Debug, Clone)]
pub struct VandermondeSystem {
    psi: DMatrix<f64>,
    inverse: DMatrix<f64>,
    condition_estimate: f64,
    inverse_residual: f64,
}

impl VandermondeSystem {
    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    /// Computed `Ψ⁻¹`; entry `(k, l)` is `Ψ⁻¹_{k+1,l+1}` in one-based notation.
    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// `‖Ψ‖₁ ‖Ψ⁻¹‖₁` using the computed inverse.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// `‖Ψ Ψ⁻¹ − I‖_∞` as actually achieved.
    pub fn inverse_residual(&self) -> f64 {
        self.inverse_residual
    }

    pub fn warning(&self) -> Option<InstabilityWarning> {
        (self.condition_estimate > INSTABILITY_THRESHOLD || !self.condition_estimate.is_finite())
            .then_some(InstabilityWarning {
                condition: self.condition_estimate,
            })
    }

    pub fn is_unstable(&self) -> bool {
        self.warning().is_some()
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn build_vandermonde(spectrum: &Spectrum) -> Result<VandermondeSystem> {
    let q = spectrum.len();
    let beta = spectrum.values();
    let psi = DMatrix::from_fn(q, q, |m, n| beta[m].powi(n as i32));
    let lu = psi.clone().lu();
    let inverse = lu.try_inverse().ok_or(Error::Singular)?;
    if inverse.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    let condition_estimate = one_norm(&psi) * one_norm(&inverse);
    let residual = &psi * &inverse - DMatrix::identity(q, q);
    let inverse_residual = residual
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(VandermondeSystem {
        psi,
        inverse,
        condition_estimate,
        inverse_residual,
    })
}

/// Closed-form engine bound to one ensemble.
#[derive(Debug, Clone)]
pub struct BaselineEngine {
    config: EnsembleConfig,
    system: VandermondeSystem,
}

impl BaselineEngine {
    pub fn new(config: &EnsembleConfig) -> Result<Self> {
        let system = build_vandermonde(config.spectrum())?;
        Ok(Self {
            config: config.clone(),
            system,
        })
    }

    pub fn system(&self) -> &VandermondeSystem {
        &self.system
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    /// Column indices `k` (one-based) that enter the sums, `q−n_t+1 ..= q`.
    fn k_range(&self) -> std::ops::RangeInclusive<usize> {
        let q = self.config.q();
        q - self.config.n_t() + 1..=q
    }

    fn flag(&self, value: f64) -> Flagged<f64> {
        Flagged {
            value,
            warning: self.system.warning(),
        }
    }

    pub fn moment(&self, p: u32) -> Result<Flagged<f64>> {
        let q = self.config.q();
        let n_t = self.config.n_t();
        let beta = self.config.spectrum().values();
        let inv = &self.system.inverse;
        let mut total = CompensatedSum::new();
        for k in self.k_range() {
            let ratio = gamma_ratio_rising((n_t + k - q) as f64, p)?;
            let exponent = p as i32 + k as i32 - 1;
            let inner: CompensatedSum = (0..q)
                .map(|l| inv[(k - 1, l)] * beta[l].powi(exponent))
                .collect();
            total.add(ratio * inner.value());
        }
        let value = total.value() / n_t as f64;
        if !value.is_finite() {
            return Err(Error::Overflow {
                what: "baseline moment",
                order: p,
            });
        }
        Ok(self.flag(value))
    }

    pub fn moments_upto(&self, p_max: u32) -> Result<Flagged<MomentTable>> {
        let mut table = MomentTable::new(Engine::Baseline);
        for p in 0..=p_max {
            table.insert(p, self.moment(p)?.value);
        }
        Ok(Flagged {
            value: table,
            warning: self.system.warning(),
        })
    }

    pub fn pdf(&self, lambda: f64) -> Result<Flagged<f64>> {
        check_lambda(lambda)?;
        let q = self.config.q();
        let n_t = self.config.n_t();
        let beta = self.config.spectrum().values();
        let inv = &self.system.inverse;
        let mut total = CompensatedSum::new();
        for (l, &b) in beta.iter().enumerate() {
            let decay = (-lambda / b).exp() * b.powi(q as i32 - n_t as i32 - 1);
            for k in self.k_range() {
                let shape = n_t + k - q;
                // λ^{shape-1}; shape ≥ 1 so the exponent is never negative
                let power = lambda.powi(shape as i32 - 1);
                let gamma = gamma_ratio_rising(1.0, shape as u32 - 1)?;
                total.add(power * decay / gamma * inv[(k - 1, l)]);
            }
        }
        Ok(self.flag(total.value() / n_t as f64))
    }

    pub fn cdf(&self, lambda: f64) -> Result<Flagged<f64>> {
        check_lambda(lambda)?;
        let q = self.config.q();
        let n_t = self.config.n_t();
        let beta = self.config.spectrum().values();
        let inv = &self.system.inverse;
        let mut total = CompensatedSum::new();
        for (l, &b) in beta.iter().enumerate() {
            for k in self.k_range() {
                let shape = (n_t + k - q) as f64;
                let p = lower_gamma_p(shape, lambda / b)?;
                total.add(b.powi(k as i32 - 1) * p * inv[(k - 1, l)]);
            }
        }
        Ok(self.flag(total.value() / n_t as f64))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "eigenvalue argument must be finite and >= 0, got {lambda}"
        )))
    }
}

pub fn baseline_moment(config: &EnsembleConfig, p: u32) -> Result<Flagged<f64>> {
    BaselineEngine::new(config)?.moment(p)
}

pub fn baseline_pdf(config: &EnsembleConfig, lambda: f64) -> Result<Flagged<f64>> {
    BaselineEngine::new(config)?.pdf(lambda)
}

pub fn baseline_cdf(config: &EnsembleConfig, lambda: f64) -> Result<Flagged<f64>> {
    BaselineEngine::new(config)?.cdf(lambda)
}
