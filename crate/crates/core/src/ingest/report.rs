use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::records::PrintedTotal;
use crate::curveset::Bound;

/// How a computed column sum compares with its printed total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChecksumStatus {
    Exact,
    /// Differs by no more than half a unit per summed row.
    WithinRounding,
    Mismatch,
    /// No rows carry this key.
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecksumLine {
    pub table: String,
    pub key: String,
    pub unit: String,
    pub printed: f64,
    pub computed: f64,
    pub rows: usize,
    pub status: ChecksumStatus,
}

impl ChecksumLine {
    pub fn compare(printed: &PrintedTotal, computed: Option<(f64, usize)>) -> Self {
        let (sum, rows) = computed.unwrap_or((0.0, 0));
        let diff = (sum - printed.total).abs();
        let status = if rows == 0 {
            ChecksumStatus::Missing
        } else if diff <= 1e-9 * printed.total.abs().max(1.0) {
            ChecksumStatus::Exact
        } else if diff <= 0.5 * rows as f64 {
            ChecksumStatus::WithinRounding
        } else {
            ChecksumStatus::Mismatch
        };
        ChecksumLine {
            table: printed.table.clone(),
            key: printed.key.clone(),
            unit: printed.unit.clone(),
            printed: printed.total,
            computed: sum,
            rows,
            status,
        }
    }
}

/// One bound of one resource against its published global total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalLine {
    pub resource: String,
    pub bound: Bound,
    /// In the summary unit (EJ/y for flows, 1e3 EJ for stocks).
    pub computed: f64,
    pub published: f64,
    pub unit: String,
}

impl TotalLine {
    /// `(computed - published) / published`, or `None` for a zero target.
    pub fn relative_difference(&self) -> Option<f64> {
        (self.published != 0.0).then(|| (self.computed - self.published) / self.published)
    }
}

/// Outcome of one uranium cost-category fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub label: String,
    /// `(cost [USD2008/kg], cumulative [t])` before augmentation.
    pub points: Vec<(f64, f64)>,
    pub a_tonnes: f64,
    pub a_energy: f64,
    pub b: f64,
    pub c0: f64,
    pub max_abs_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub checksums: Vec<ChecksumLine>,
    pub totals: Vec<TotalLine>,
    pub fits: Vec<FitSummary>,
    /// Mass held by rows outside the regional breakdown, per table, in the
    /// table's native unit.
    pub unallocated: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl BuildReport {
    pub fn checksum(&self, table: &str, key: &str) -> Option<&ChecksumLine> {
        self.checksums.iter().find(|l| l.table == table && l.key == key)
    }

    pub fn total(&self, resource: &str, bound: Bound) -> Option<&TotalLine> {
        self.totals.iter().find(|l| l.resource == resource && l.bound == bound)
    }

    pub fn fit(&self, label: &str) -> Option<&FitSummary> {
        self.fits.iter().find(|f| f.label == label)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Human-readable summary.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("checksums\n");
        for l in &self.checksums {
            out.push_str(&format!(
                "  {:<8} {:<34} printed {:>14} computed {:>16} {:?}\n",
                l.table, l.key, l.printed, l.computed, l.status
            ));
        }
        out.push_str("global totals\n");
        for t in &self.totals {
            let rel = t
                .relative_difference()
                .map(|r| format!("{:+.2}%", 100.0 * r))
                .unwrap_or_else(|| "n/a".into());
            out.push_str(&format!(
                "  {:<10} {:<5} {:>12.4} vs {:>9} {:<6} {rel}\n",
                t.resource, t.bound, t.computed, t.published, t.unit
            ));
        }
        if !self.fits.is_empty() {
            out.push_str("uranium fits\n");
            for f in &self.fits {
                out.push_str(&format!(
                    "  {:<22} A {:>12.0} t ({:.1} EJ) B {:.3} C0 {:.3} max residual {:.2}% converged {}\n",
                    f.label,
                    f.a_tonnes,
                    f.a_energy,
                    f.b,
                    f.c0,
                    100.0 * f.max_abs_residual,
                    f.converged
                ));
            }
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}
