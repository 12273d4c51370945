//! Distribution parameters from two cost quantiles.
//!
//! An [`Anchor`] states that a fraction `delta` of the technical potential is
//! available at or below cost `c`. Two anchors plus `A` pin down `B` and `C0`
//! for either family in closed form.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::distcore::{erf_inv, Distribution, DistributionKind};
use crate::error::{Error, Result};

/// Quantiles used for stock cost bands: 1% below the lower bound, 90% below
/// the upper bound.
pub const STOCK_BAND_QUANTILES: (f64, f64) = (0.01, 0.90);

/// Quantiles for bands that hold 90% of the resource (5% on either side).
pub const CENTRAL_90_QUANTILES: (f64, f64) = (0.05, 0.95);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub c: f64,
    pub delta: f64,
}

impl Anchor {
    pub fn new(c: f64, delta: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Domain(format!("anchor cost must be finite, got {c}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!(
                "anchor fraction must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Anchor { c, delta })
    }
}

fn check_pair(a1: &Anchor, a2: &Anchor, a: f64) -> Result<()> {
    for an in [a1, a2] {
        Anchor::new(an.c, an.delta)?;
    }
    if a1.c == a2.c || a1.delta == a2.delta {
        return Err(Error::DegenerateAnchors(format!(
            "anchors ({}, {}) and ({}, {}) share a cost or a fraction",
            a1.c, a1.delta, a2.c, a2.delta
        )));
    }
    if !(a1.c < a2.c && a1.delta < a2.delta) {
        return Err(Error::InfeasibleAnchors(format!(
            "anchors must increase in both cost and fraction: ({}, {}) then ({}, {})",
            a1.c, a1.delta, a2.c, a2.delta
        )));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain(format!("technical potential must be positive, got {a}")));
    }
    Ok(())
}

/// Hierarchical distribution through both anchors.
pub fn hier_from_anchors(a1: Anchor, a2: Anchor, a: f64) -> Result<Distribution> {
    check_pair(&a1, &a2, a)?;
    let (l1, l2) = (a1.delta.ln(), a2.delta.ln());
    let c0 = (a2.c * l2 - a1.c * l1) / (l2 - l1);
    let b = -(a1.c - c0) * l1;
    if !(b > 0.0) || !(c0 < a1.c) {
        return Err(Error::InfeasibleAnchors(format!(
            "resulting cost scale {b} is not positive"
        )));
    }
    Distribution::hierarchical(a, b, c0)
}

/// Nearly-identical distribution through both anchors.
pub fn ident_from_anchors(a1: Anchor, a2: Anchor, a: f64) -> Result<Distribution> {
    check_pair(&a1, &a2, a)?;
    let (z1, z2) = (erf_inv(a1.delta)?, erf_inv(a2.delta)?);
    let b = (a2.c - a1.c) / (SQRT_2 * (z2 - z1));
    let c0 = a1.c - SQRT_2 * b * z1;
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InfeasibleAnchors(format!(
            "resulting cost scale {b} is not positive"
        )));
    }
    Distribution::nearly_identical(a, b, c0)
}

pub fn from_anchors(kind: DistributionKind, a1: Anchor, a2: Anchor, a: f64) -> Result<Distribution> {
    match kind {
        DistributionKind::Hierarchical => hier_from_anchors(a1, a2, a),
        DistributionKind::NearlyIdentical => ident_from_anchors(a1, a2, a),
    }
}

/// Hierarchical curve for a stock occurrence whose extraction cost band is
/// `[c_lo, c_hi]`, using [`STOCK_BAND_QUANTILES`].
pub fn stock_from_band(a: f64, c_lo: f64, c_hi: f64) -> Result<Distribution> {
    band_with_quantiles(a, c_lo, c_hi, STOCK_BAND_QUANTILES)
}

pub fn band_with_quantiles(a: f64, c_lo: f64, c_hi: f64, quantiles: (f64, f64)) -> Result<Distribution> {
    hier_from_anchors(Anchor::new(c_lo, quantiles.0)?, Anchor::new(c_hi, quantiles.1)?, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn anchor(c: f64, d: f64) -> Anchor {
        Anchor::new(c, d).unwrap()
    }

    #[test]
    fn hierarchical_example() {
        let d = hier_from_anchors(anchor(10.0, 0.01), anchor(40.0, 0.90), 1.0).unwrap();
        assert!((d.c0 - 9.2976).abs() < 1e-4, "{}", d.c0);
        // independent evaluation of the closed form
        let (l1, l2) = (0.01_f64.ln(), 0.9_f64.ln());
        let c0 = (40.0 * l2 - 10.0 * l1) / (l2 - l1);
        assert!((d.b - (10.0 - c0) * l1.abs()).abs() < 1e-12);
        assert!((d.b - 3.2345).abs() < 5e-4, "{}", d.b);
        assert!((d.cumulative(10.0) - 0.01).abs() < 1e-15);
        assert!((d.cumulative(40.0) - 0.90).abs() < 1e-15);
    }

    #[test]
    fn identical_example() {
        assert!((erf_inv(0.05).unwrap() - 0.044_340).abs() < 1e-6);
        let d = ident_from_anchors(anchor(50.0, 0.05), anchor(100.0, 0.90), 1.0).unwrap();
        assert!((d.b - 31.603).abs() < 1e-3, "{}", d.b);
        assert!((d.c0 - 48.018).abs() < 1e-3, "{}", d.c0);
        assert!((d.cumulative(50.0) - 0.05).abs() < 1e-12);
        assert!((d.cumulative(100.0) - 0.90).abs() < 1e-12);
    }

    #[test]
    fn one_sigma_anchor_recovers_offset() {
        let one_sigma = crate::distcore::erf(1.0 / SQRT_2);
        let (c0, b) = (12.0, 4.0);
        // second anchor taken from the closed form at two sigma
        let two_sigma = crate::distcore::erf(2.0 / SQRT_2);
        let d = ident_from_anchors(anchor(c0 + b, one_sigma), anchor(c0 + 2.0 * b, two_sigma), 1.0).unwrap();
        assert!((d.c0 - c0).abs() < 1e-12);
        assert!((d.b - b).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_infeasible() {
        for kind in [DistributionKind::Hierarchical, DistributionKind::NearlyIdentical] {
            let r = from_anchors(kind, anchor(20.0, 0.1), anchor(20.0, 0.9), 1.0);
            assert!(matches!(r, Err(Error::DegenerateAnchors(_))));
            let r = from_anchors(kind, anchor(10.0, 0.5), anchor(20.0, 0.5), 1.0);
            assert!(matches!(r, Err(Error::DegenerateAnchors(_))));
            let r = from_anchors(kind, anchor(10.0, 0.9), anchor(20.0, 0.1), 1.0);
            assert!(matches!(r, Err(Error::InfeasibleAnchors(_))));
        }
        assert!(matches!(
            stock_from_band(1.0, 20.0, 20.0),
            Err(Error::DegenerateAnchors(_))
        ));
        assert!(Anchor::new(1.0, 1.0).is_err());
    }

    #[test]
    fn stock_bands() {
        let oil = stock_from_band(1.0, 10.0, 40.0).unwrap();
        assert!((oil.c0 - 9.2976).abs() < 1e-4);
        assert!((oil.b - 3.234_824).abs() < 1e-6);

        let coal = stock_from_band(5.0, 20.0, 50.0).unwrap();
        assert!((coal.cumulative(20.0) / 5.0 - 0.01).abs() < 1e-14);
        assert!((coal.cumulative(50.0) / 5.0 - 0.90).abs() < 1e-14);

        let geo = band_with_quantiles(2.0, 50.0, 150.0, CENTRAL_90_QUANTILES).unwrap();
        assert!((geo.cumulative(50.0) / 2.0 - 0.05).abs() < 1e-14);
        assert!((geo.cumulative(150.0) / 2.0 - 0.95).abs() < 1e-14);
    }

    #[test]
    fn cost_homogeneity() {
        let base = hier_from_anchors(anchor(10.0, 0.01), anchor(40.0, 0.9), 1.0).unwrap();
        let k = 3.7;
        let s = hier_from_anchors(anchor(10.0 * k, 0.01), anchor(40.0 * k, 0.9), 1.0).unwrap();
        assert!((s.c0 - k * base.c0).abs() < 1e-12);
        assert!((s.b - k * base.b).abs() < 1e-12);
    }

    fn kind_strategy() -> impl Strategy<Value = DistributionKind> {
        prop_oneof![
            Just(DistributionKind::Hierarchical),
            Just(DistributionKind::NearlyIdentical)
        ]
    }

    proptest! {
        #[test]
        fn translation_covariance(
            kind in kind_strategy(),
            c1 in -50.0..50.0f64,
            gap in 0.5..100.0f64,
            d1 in 0.01..0.45f64,
            d2 in 0.55..0.99f64,
            k in -100.0..100.0f64,
        ) {
            let base = from_anchors(kind, anchor(c1, d1), anchor(c1 + gap, d2), 1.0).unwrap();
            let moved = from_anchors(kind, anchor(c1 + k, d1), anchor(c1 + gap + k, d2), 1.0).unwrap();
            let scale = 1.0 + c1.abs() + k.abs() + gap;
            prop_assert!((moved.c0 - base.c0 - k).abs() < 1e-11 * scale);
            prop_assert!((moved.b - base.b).abs() < 1e-11 * scale);
        }
    }
}
