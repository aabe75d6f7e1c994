use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which computation produced a [`MomentTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Stable,
    Baseline,
    Empirical,
    /// Supplied directly by the caller, e.g. a known distribution's moments.
    External,
}

/// Positive moments `μ(p)` indexed by order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    moments: BTreeMap<u32, f64>,
    engine: Engine,
}

impl MomentTable {
    pub fn new(engine: Engine) -> Self {
        Self {
            moments: BTreeMap::new(),
            engine,
        }
    }

    /// Builds a table from consecutive moments starting at order 0.
    pub fn from_sequence(engine: Engine, values: impl IntoIterator<Item = f64>) -> Self {
        let moments = values
            .into_iter()
            .enumerate()
            .map(|(p, v)| (p as u32, v))
            .collect();
        Self { moments, engine }
    }

    pub fn insert(&mut self, p: u32, value: f64) {
        self.moments.insert(p, value);
    }

    pub fn get(&self, p: u32) -> Option<f64> {
        self.moments.get(&p).copied()
    }

    pub fn require(&self, p: u32) -> Result<f64> {
        self.get(p).ok_or(Error::MissingMoment(p))
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn max_order(&self) -> Option<u32> {
        self.moments.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.moments.iter().map(|(&p, &v)| (p, v))
    }

    /// Checks `μ(0) = 1` (to `tol`), positivity, and
    /// `μ(p) μ(p+2) ≥ μ(p+1)²` wherever three consecutive orders are stored.
    pub fn check_invariants(&self, tol: f64) -> std::result::Result<(), String> {
        if let Some(m0) = self.get(0) {
            if (m0 - 1.0).abs() > tol {
                return Err(format!("mu(0) = {m0} differs from 1"));
            }
        }
        if let Some((p, v)) = self.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(format!("mu({p}) = {v} is not positive"));
        }
        for (&p, &m) in &self.moments {
            if let (Some(m1), Some(m2)) = (self.get(p + 1), self.get(p + 2)) {
                if m * m2 < m1 * m1 * (1.0 - tol) {
                    return Err(format!(
                        "log-convexity fails at p = {p}: {m} * {m2} < {m1}^2"
                    ));
                }
            }
        }
        Ok(())
    }
}
