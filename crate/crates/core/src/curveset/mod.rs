//! Composite curves, tabulation, and uncertainty envelopes.
//!
//! A [`CompositeCurve`] is a horizontal sum: its economic potential at any
//! cost is the sum of its components' potentials at that cost. Once several
//! families or offsets are mixed the sum has no closed-form inverse, so
//! marginal costs are read from a [`TabulatedCurve`].

mod envelope;
mod tabulated;

use serde::{Deserialize, Serialize};

use crate::distcore::{Distribution, DistributionKind, Units};
use crate::error::{Error, Result};

pub use envelope::{
    sample, scale_envelope, Bound, Envelope, EnvelopeSampler, TwoPieceNormal, LOWER_QUANTILE, UPPER_QUANTILE,
};
pub use tabulated::{tabulate, TabulatedCurve, DEFAULT_GRID_POINTS};

/// Fraction of a hierarchical potential reached at the top of the default
/// tabulation range.
const H_RANGE_FRACTION: f64 = 0.999;
/// Nearly-identical components are tabulated out to `C0 + 10 B`.
const NI_RANGE_SIGMAS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeCurve {
    pub label: String,
    pub units: Units,
    pub components: Vec<Distribution>,
}

impl CompositeCurve {
    /// An empty curve with zero potential.
    pub fn empty(label: impl Into<String>, units: Units) -> Self {
        CompositeCurve {
            label: label.into(),
            units,
            components: Vec::new(),
        }
    }

    pub fn new(label: impl Into<String>, units: Units, components: Vec<Distribution>) -> Result<Self> {
        let mut c = Self::empty(label, units);
        for d in components {
            c.push(d)?;
        }
        Ok(c)
    }

    /// Single-component curve carrying the component's units.
    pub fn single(label: impl Into<String>, d: Distribution) -> Self {
        CompositeCurve {
            label: label.into(),
            units: d.units.clone(),
            components: vec![d],
        }
    }

    pub fn push(&mut self, d: Distribution) -> Result<()> {
        if d.units != self.units {
            return Err(Error::Unit(format!(
                "component in {}/{} added to curve '{}' in {}/{}",
                d.units.quantity, d.units.cost, self.label, self.units.quantity, self.units.cost
            )));
        }
        self.components.push(d);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn potential(&self) -> f64 {
        self.components.iter().fold(0.0, |s, d| s + d.a)
    }

    pub fn cumulative(&self, c: f64) -> f64 {
        self.components.iter().fold(0.0, |s, d| s + d.cumulative(c))
    }

    pub fn density(&self, c: f64) -> f64 {
        self.components.iter().fold(0.0, |s, d| s + d.density(c))
    }

    pub fn min_c0(&self) -> Option<f64> {
        self.components.iter().map(|d| d.c0).min_by(f64::total_cmp)
    }

    /// Cost range used when no explicit range is requested: from the lowest
    /// offset up to where every component is essentially saturated.
    pub fn default_range(&self) -> Option<(f64, f64)> {
        let lo = self.min_c0()?;
        let hi = self
            .components
            .iter()
            .map(|d| match d.kind {
                DistributionKind::Hierarchical => d.c0 + d.b / (1.0 / H_RANGE_FRACTION).ln(),
                DistributionKind::NearlyIdentical => d.c0 + NI_RANGE_SIGMAS * d.b,
            })
            .fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    /// Every component's potential multiplied by `factor`. A zero factor
    /// yields an empty curve.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!(
                "scale factor must be non-negative, got {factor}"
            )));
        }
        if factor == 0.0 {
            return Ok(Self::empty(self.label.clone(), self.units.clone()));
        }
        if factor == 1.0 {
            return Ok(self.clone());
        }
        let components = self
            .components
            .iter()
            .map(|d| d.scaled(factor))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompositeCurve {
            label: self.label.clone(),
            units: self.units.clone(),
            components,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Horizontal sum of several curves. Empty inputs take on any units; an empty
/// list gives an empty curve.
pub fn aggregate(curves: &[CompositeCurve]) -> Result<CompositeCurve> {
    let units = curves
        .iter()
        .find(|c| !c.is_empty())
        .or(curves.first())
        .map(|c| c.units.clone())
        .unwrap_or_default();
    let label = curves.iter().map(|c| c.label.as_str()).collect::<Vec<_>>().join(" + ");
    let mut out = CompositeCurve::empty(label, units);
    for c in curves {
        if c.is_empty() {
            continue;
        }
        if c.units != out.units {
            return Err(Error::Unit(format!(
                "cannot aggregate '{}' ({}/{}) with curves in {}/{}",
                c.label, c.units.quantity, c.units.cost, out.units.quantity, out.units.cost
            )));
        }
        out.components.extend(c.components.iter().cloned());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(a: f64, b: f64, c0: f64) -> Distribution {
        Distribution::hierarchical(a, b, c0).unwrap()
    }

    #[test]
    fn doubling() {
        let one = CompositeCurve::single("x", h(1000.0, 10.0, 5.0));
        let two = aggregate(&[one.clone(), one.clone()]).unwrap();
        for c in [4.0, 6.0, 15.0, 100.0, 1e5] {
            assert_eq!(two.cumulative(c), 2.0 * one.cumulative(c));
        }
        assert_eq!(two.potential(), 2000.0);
    }

    #[test]
    fn empty_aggregate_is_zero() {
        let z = aggregate(&[]).unwrap();
        assert!(z.is_empty());
        assert_eq!(z.potential(), 0.0);
        assert_eq!(z.cumulative(1e9), 0.0);
        assert!(z.default_range().is_none());
    }

    #[test]
    fn unit_mismatch() {
        let a = CompositeCurve::single("a", h(1.0, 1.0, 0.0).with_units(Units::new("EJ", "USD/GJ")));
        let b = CompositeCurve::single("b", h(1.0, 1.0, 0.0).with_units(Units::new("PJ/y", "USD/MWh")));
        assert!(matches!(aggregate(&[a.clone(), b]), Err(Error::Unit(_))));
        let empty = CompositeCurve::empty("e", Units::default());
        assert_eq!(aggregate(&[empty, a.clone()]).unwrap().potential(), 1.0);
        let mut c = a.clone();
        assert!(c.push(h(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn scaling() {
        let c = CompositeCurve::new(
            "m",
            Units::default(),
            vec![
                h(10.0, 1.0, 0.0),
                Distribution::nearly_identical(5.0, 2.0, 1.0).unwrap(),
            ],
        )
        .unwrap();
        let s = c.scaled(0.5).unwrap();
        assert!((s.potential() - 7.5).abs() < 1e-15);
        assert!(c.scaled(0.0).unwrap().is_empty());
        assert!(c.scaled(-1.0).is_err());
    }

    #[test]
    fn default_range_covers_components() {
        let c = CompositeCurve::new(
            "m",
            Units::default(),
            vec![
                h(10.0, 1.0, 3.0),
                Distribution::nearly_identical(5.0, 2.0, 1.0).unwrap(),
            ],
        )
        .unwrap();
        let (lo, hi) = c.default_range().unwrap();
        assert_eq!(lo, 1.0);
        assert!((hi - (3.0 + 1.0 / (1.0_f64 / 0.999).ln())).abs() < 1e-9);
        assert!(c.cumulative(hi) >= 0.999 * c.potential());
    }

    proptest! {
        #[test]
        fn additivity_over_partitions(
            params in prop::collection::vec((1.0..100.0f64, 0.5..20.0f64, -5.0..50.0f64, any::<bool>()), 1..12),
            split in 0usize..12,
            c in -10.0..300.0f64,
        ) {
            let comps: Vec<_> = params
                .iter()
                .map(|&(a, b, c0, ni)| {
                    let k = if ni { DistributionKind::NearlyIdentical } else { DistributionKind::Hierarchical };
                    Distribution::new(k, a, b, c0).unwrap()
                })
                .collect();
            let cut = split.min(comps.len());
            let whole = CompositeCurve::new("w", Units::default(), comps.clone()).unwrap();
            let left = CompositeCurve::new("l", Units::default(), comps[..cut].to_vec()).unwrap();
            let right = CompositeCurve::new("r", Units::default(), comps[cut..].to_vec()).unwrap();
            let agg = aggregate(&[left.clone(), right.clone()]).unwrap();
            prop_assert_eq!(agg.cumulative(c), whole.cumulative(c));
            let parts = left.cumulative(c) + right.cumulative(c);
            prop_assert!((whole.cumulative(c) - parts).abs() <= 1e-12 * whole.potential());
        }
    }
}
