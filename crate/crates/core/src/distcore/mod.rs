//! The two distribution families used for cost-supply curves.
//!
//! A [`Distribution`] describes how a technical potential `A` is spread over
//! production cost. Its cumulative `N(C)` is the economic potential available
//! at or below cost `C`, and the inverse `C(N)` is the cost-supply curve.
//!
//! * [`DistributionKind::Hierarchical`] suits resources ranked by quality
//!   (wind sites, basins): `N(C) = A exp(-B / (C - C0))`.
//! * [`DistributionKind::NearlyIdentical`] suits interchangeable resources
//!   (solar land, cropland): `N(C) = A erf((C - C0) / (sqrt(2) B))`.
//!
//! The nearly-identical density is a half-Gaussian normalised with
//! `sqrt(2/pi) / B`, so its integral over `C > C0` is exactly `A` and agrees
//! with the erf cumulative.

mod special;

use std::f64::consts::{FRAC_2_PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use special::erf_inv_unchecked;
pub use special::{erf, erf_inv, erfc, erfc_inv, normal_cdf, normal_quantile};

/// `exp(-t)` is zero in f64 beyond this argument.
const EXP_UNDERFLOW: f64 = 745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Hierarchical,
    NearlyIdentical,
}

impl DistributionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistributionKind::Hierarchical => "hierarchical",
            DistributionKind::NearlyIdentical => "nearly_identical",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "hierarchical" | "h" => Ok(DistributionKind::Hierarchical),
            "nearly_identical" | "nearlyidentical" | "identical" | "ni" => Ok(DistributionKind::NearlyIdentical),
            other => Err(Error::Validation(format!("unknown distribution kind '{other}'"))),
        }
    }
}

/// Unit tags carried alongside a curve. They are labels only; no conversion
/// happens inside this module.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Units {
    pub quantity: String,
    pub cost: String,
}

impl Units {
    pub fn new(quantity: impl Into<String>, cost: impl Into<String>) -> Self {
        Units {
            quantity: quantity.into(),
            cost: cost.into(),
        }
    }
}

impl Default for Units {
    fn default() -> Self {
        Units::new("unit", "unit")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub kind: DistributionKind,
    /// Technical potential.
    pub a: f64,
    /// Cost scale.
    pub b: f64,
    /// Cost offset; any real.
    pub c0: f64,
    pub units: Units,
}

impl Distribution {
    pub fn new(kind: DistributionKind, a: f64, b: f64, c0: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Domain(format!("technical potential must be positive, got {a}")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Domain(format!("cost scale must be positive, got {b}")));
        }
        if !c0.is_finite() {
            return Err(Error::Domain(format!("cost offset must be finite, got {c0}")));
        }
        Ok(Distribution {
            kind,
            a,
            b,
            c0,
            units: Units::default(),
        })
    }

    pub fn hierarchical(a: f64, b: f64, c0: f64) -> Result<Self> {
        Self::new(DistributionKind::Hierarchical, a, b, c0)
    }

    pub fn nearly_identical(a: f64, b: f64, c0: f64) -> Result<Self> {
        Self::new(DistributionKind::NearlyIdentical, a, b, c0)
    }

    pub fn with_units(mut self, units: Units) -> Self {
        self.units = units;
        self
    }

    pub fn potential(&self) -> f64 {
        self.a
    }

    /// Quantity per unit cost at cost `c`.
    pub fn density(&self, c: f64) -> f64 {
        let x = c - self.c0;
        // The half-Gaussian is right-continuous at C0 with value A sqrt(2/pi) / B.
        let inside = match self.kind {
            DistributionKind::Hierarchical => x > 0.0,
            DistributionKind::NearlyIdentical => x >= 0.0,
        };
        if !inside {
            return 0.0;
        }
        match self.kind {
            DistributionKind::Hierarchical => {
                let t = self.b / x;
                if t > EXP_UNDERFLOW {
                    0.0
                } else {
                    // A B / x^2 e^{-B/x} written in t to avoid overflow for tiny x
                    self.a / self.b * t * t * (-t).exp()
                }
            }
            DistributionKind::NearlyIdentical => {
                let z = x / self.b;
                self.a * FRAC_2_PI.sqrt() / self.b * (-0.5 * z * z).exp()
            }
        }
    }

    /// Economic potential at cost `c`.
    pub fn cumulative(&self, c: f64) -> f64 {
        let x = c - self.c0;
        if !(x > 0.0) {
            return 0.0;
        }
        match self.kind {
            DistributionKind::Hierarchical => self.a * (-self.b / x).exp(),
            DistributionKind::NearlyIdentical => self.a * erf(x / (SQRT_2 * self.b)),
        }
    }

    /// Marginal cost once `n` has been used. `cost_at(0)` is `C0`.
    pub fn cost_at(&self, n: f64) -> Result<f64> {
        if !(n >= 0.0) {
            return Err(Error::Domain(format!("quantity must be non-negative, got {n}")));
        }
        if n >= self.a {
            return Err(Error::Depletion {
                requested: n,
                available: self.a,
            });
        }
        if n == 0.0 {
            return Ok(self.c0);
        }
        let f = n / self.a;
        Ok(match self.kind {
            DistributionKind::Hierarchical => self.c0 - self.b / f.ln(),
            DistributionKind::NearlyIdentical => self.c0 + SQRT_2 * self.b * erf_inv_unchecked(f),
        })
    }

    /// Same shape with the potential multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut d = Self::new(self.kind, self.a * factor, self.b, self.c0)?;
        d.units = self.units.clone();
        Ok(d)
    }

    /// Converts quantities by `quantity_factor` and costs by `cost_factor`.
    pub fn rescaled(&self, quantity_factor: f64, cost_factor: f64, units: Units) -> Result<Self> {
        Ok(Self::new(
            self.kind,
            self.a * quantity_factor,
            self.b * cost_factor,
            self.c0 * cost_factor,
        )?
        .with_units(units))
    }
}

/// Productivity of a resource unit (energy per unit effort or area). Cost and
/// productivity are related by `C = C_var / nu + C0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Productivity {
    pub nu: f64,
}

impl Productivity {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::Domain(format!("productivity must be positive, got {nu}")));
        }
        Ok(Productivity { nu })
    }

    pub fn cost(&self, c_var: f64, c0: f64) -> f64 {
        c_var / self.nu + c0
    }

    /// Productivity at which the unit cost equals `cost`; requires `cost > c0`.
    pub fn from_cost(cost: f64, c_var: f64, c0: f64) -> Result<Self> {
        if !(cost > c0) || !(c_var > 0.0) {
            return Err(Error::Domain(format!(
                "cost {cost} must exceed offset {c0} with positive variable cost"
            )));
        }
        Self::new(c_var / (cost - c0))
    }
}
