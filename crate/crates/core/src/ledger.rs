//! Cumulative use of one resource curve: marginal cost at the current level,
//! consumption increments and remaining potential.
//!
//! For stocks `Q` is cumulative extraction and only grows. For flows `Q` is
//! deployed capacity, which [`LedgerState::release`] can reduce again.

use serde::{Deserialize, Serialize};

use crate::curveset::{CompositeCurve, TabulatedCurve};
use crate::distcore::Units;
use crate::error::{Error, Result};
use crate::ingest::Nature;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerState {
    pub resource: String,
    /// Which curve the ledger runs on, e.g. `global mode`.
    pub curve_id: String,
    pub nature: Nature,
    q: f64,
    table: TabulatedCurve,
}

/// Serializable view of a ledger without its curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub resource: String,
    pub curve_id: String,
    pub q: f64,
    pub potential: f64,
    pub units: Units,
}

impl LedgerState {
    /// Tabulates `curve` on `grid_points` costs over its default range.
    pub fn new(
        resource: impl Into<String>,
        curve_id: impl Into<String>,
        nature: Nature,
        curve: &CompositeCurve,
        grid_points: usize,
    ) -> Result<Self> {
        Ok(Self::from_table(
            resource,
            curve_id,
            nature,
            curve.tabulate_default(grid_points)?,
        ))
    }

    pub fn from_table(
        resource: impl Into<String>,
        curve_id: impl Into<String>,
        nature: Nature,
        table: TabulatedCurve,
    ) -> Self {
        LedgerState {
            resource: resource.into(),
            curve_id: curve_id.into(),
            nature,
            q: 0.0,
            table,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn units(&self) -> &Units {
        &self.table.units
    }

    pub fn table(&self) -> &TabulatedCurve {
        &self.table
    }

    /// Largest quantity on the tabulated curve.
    pub fn potential(&self) -> f64 {
        self.table.max_quantity()
    }

    pub fn remaining(&self) -> f64 {
        (self.potential() - self.q).max(0.0)
    }

    /// Cost of the next unit at the current level.
    pub fn marginal_cost(&self) -> Result<f64> {
        if self.q >= self.potential() {
            return Err(Error::Depletion {
                requested: self.q,
                available: self.potential(),
            });
        }
        self.table.invert(self.q)
    }

    /// Advances by `dq` and returns the new state with the average cost of
    /// the increment. A zero increment returns the current marginal cost.
    pub fn consume(&self, dq: f64) -> Result<(LedgerState, f64)> {
        if !(dq >= 0.0 && dq.is_finite()) {
            return Err(Error::Domain(format!("consumption must be non-negative, got {dq}")));
        }
        if dq == 0.0 {
            return Ok((self.clone(), self.marginal_cost()?));
        }
        let end = self.q + dq;
        if end > self.potential() {
            return Err(Error::Depletion {
                requested: dq,
                available: self.remaining(),
            });
        }
        let average = self.table.cost_integral(self.q, end)? / dq;
        let mut next = self.clone();
        next.q = end;
        Ok((next, average))
    }

    /// Retires `dq` of deployed flow. Stocks cannot be released.
    pub fn release(&self, dq: f64) -> Result<LedgerState> {
        if self.nature != Nature::Flow {
            return Err(Error::Domain(format!(
                "{} is a stock; extraction cannot be released",
                self.resource
            )));
        }
        if !(dq >= 0.0 && dq <= self.q) {
            return Err(Error::Domain(format!("cannot release {dq} of {} deployed", self.q)));
        }
        let mut next = self.clone();
        next.q -= dq;
        Ok(next)
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            resource: self.resource.clone(),
            curve_id: self.curve_id.clone(),
            q: self.q,
            potential: self.potential(),
            units: self.table.units.clone(),
        }
    }

    pub fn snapshot_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.snapshot())?)
    }
}
