use serde::{Deserialize, Serialize};

use super::{aggregate, tabulate, CompositeCurve};
use crate::distcore::{normal_cdf, normal_quantile};
use crate::error::{Error, Result};

/// Probability that the true curve lies below the lower bound.
pub const LOWER_QUANTILE: f64 = 0.02;
/// Probability that the true curve lies below the upper bound.
pub const UPPER_QUANTILE: f64 = 0.98;

/// Relative slack when comparing totals built from floating-point sums.
const ORDER_SLACK: f64 = 1e-12;

/// Lower (2%), mode, and upper (98%) curves bounding a resource.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub lower: CompositeCurve,
    pub mode: CompositeCurve,
    pub upper: CompositeCurve,
}

impl Envelope {
    /// Checks that total potentials are ordered.
    pub fn new(lower: CompositeCurve, mode: CompositeCurve, upper: CompositeCurve) -> Result<Self> {
        let (l, m, u) = (lower.potential(), mode.potential(), upper.potential());
        let slack = ORDER_SLACK * u.abs().max(1.0);
        if l > m + slack || m > u + slack {
            return Err(Error::Envelope(format!(
                "potentials out of order: lower {l}, mode {m}, upper {u}"
            )));
        }
        Ok(Envelope { lower, mode, upper })
    }

    pub fn potentials(&self) -> (f64, f64, f64) {
        (self.lower.potential(), self.mode.potential(), self.upper.potential())
    }

    pub fn curve(&self, bound: Bound) -> &CompositeCurve {
        match bound {
            Bound::Lower => &self.lower,
            Bound::Mode => &self.mode,
            Bound::Upper => &self.upper,
        }
    }

    /// Cost range spanning all three curves.
    pub fn default_range(&self) -> Option<(f64, f64)> {
        [&self.lower, &self.mode, &self.upper]
            .iter()
            .filter_map(|c| c.default_range())
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    /// Verifies `N_lower <= N_mode <= N_upper` on an `n`-point grid over the
    /// default range; returns the grid used.
    pub fn check_ordering(&self, n: usize) -> Result<Vec<f64>> {
        let Some((lo, hi)) = self.default_range() else {
            return Ok(Vec::new());
        };
        let all = aggregate(&[self.lower.clone(), self.mode.clone(), self.upper.clone()])?;
        let grid = tabulate(&all, lo, hi, n)?.costs;
        for &c in &grid {
            let (l, m, u) = (
                self.lower.cumulative(c),
                self.mode.cumulative(c),
                self.upper.cumulative(c),
            );
            let slack = ORDER_SLACK * u.abs().max(1.0);
            if l > m + slack || m > u + slack {
                return Err(Error::Envelope(format!(
                    "curves cross at cost {c}: lower {l}, mode {m}, upper {u}"
                )));
            }
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Lower,
    Mode,
    Upper,
}

impl Bound {
    pub const ALL: [Bound; 3] = [Bound::Lower, Bound::Mode, Bound::Upper];

    pub fn as_str(self) -> &'static str {
        match self {
            Bound::Lower => "lower",
            Bound::Mode => "mode",
            Bound::Upper => "upper",
        }
    }
}

impl std::str::FromStr for Bound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lower" | "l" | "low" => Ok(Bound::Lower),
            "mode" | "m" => Ok(Bound::Mode),
            "upper" | "u" | "high" => Ok(Bound::Upper),
            other => Err(Error::Validation(format!("unknown bound '{other}'"))),
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lower and upper curves are the mode curve with every potential scaled to
/// the given totals; costs are unchanged.
pub fn scale_envelope(mode: &CompositeCurve, a_lower: f64, a_upper: f64) -> Result<Envelope> {
    let total = mode.potential();
    if !(a_lower >= 0.0 && a_lower <= total && total <= a_upper && a_upper.is_finite()) {
        return Err(Error::Envelope(format!(
            "bounds must satisfy 0 <= lower <= mode <= upper, got {a_lower} <= {total} <= {a_upper}"
        )));
    }
    if total == 0.0 {
        if a_upper > 0.0 {
            return Err(Error::Envelope(
                "cannot scale an empty mode curve to a positive upper bound".into(),
            ));
        }
        return Envelope::new(mode.clone(), mode.clone(), mode.clone());
    }
    let lower = mode
        .scaled(a_lower / total)?
        .with_label(format!("{} lower", mode.label));
    let upper = mode
        .scaled(a_upper / total)?
        .with_label(format!("{} upper", mode.label));
    Envelope::new(lower, mode.clone(), upper)
}

/// Two-piece normal distribution with a given mode and the 2% and 98%
/// quantiles pinned at `lower` and `upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPieceNormal {
    pub mode: f64,
    pub sigma_low: f64,
    pub sigma_high: f64,
    /// Probability mass below the mode.
    pub p_low: f64,
}

impl TwoPieceNormal {
    pub fn from_pins(lower: f64, mode: f64, upper: f64) -> Result<Self> {
        if !(lower <= mode && mode <= upper) || !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::Envelope(format!(
                "pins must satisfy lower <= mode <= upper, got {lower}, {mode}, {upper}"
            )));
        }
        let tail = LOWER_QUANTILE / 2.0;
        let (dl, du) = (mode - lower, upper - mode);
        if dl == 0.0 && du == 0.0 {
            return Ok(TwoPieceNormal {
                mode,
                sigma_low: 0.0,
                sigma_high: 0.0,
                p_low: 0.5,
            });
        }
        if dl == 0.0 || du == 0.0 {
            // half-normal on the open side, 98% or 2% at the far pin
            let z = normal_quantile(1.0 - tail)?;
            return Ok(if dl == 0.0 {
                TwoPieceNormal {
                    mode,
                    sigma_low: 0.0,
                    sigma_high: du / z,
                    p_low: 0.0,
                }
            } else {
                TwoPieceNormal {
                    mode,
                    sigma_low: dl / z,
                    sigma_high: 0.0,
                    p_low: 1.0,
                }
            });
        }
        let sigmas = |p: f64| -> Result<(f64, f64)> {
            let s1 = dl / -normal_quantile(tail / p)?;
            let s2 = du / -normal_quantile(tail / (1.0 - p))?;
            Ok((s1, s2))
        };
        // p s2 - (1 - p) s1 rises from -inf to +inf on (2%, 98%)
        let (mut lo, mut hi) = (LOWER_QUANTILE, UPPER_QUANTILE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (s1, s2) = sigmas(mid)?;
            if mid * s2 - (1.0 - mid) * s1 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = 0.5 * (lo + hi);
        let (s1, s2) = sigmas(p)?;
        Ok(TwoPieceNormal {
            mode,
            sigma_low: s1,
            sigma_high: s2,
            p_low: p,
        })
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {u}")));
        }
        let p = self.p_low;
        Ok(if u < p {
            self.mode + self.sigma_low * normal_quantile(u / (2.0 * p))?
        } else if u > p {
            self.mode + self.sigma_high * normal_quantile(0.5 + (u - p) / (2.0 * (1.0 - p)))?
        } else {
            self.mode
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let p = self.p_low;
        if x < self.mode {
            if self.sigma_low == 0.0 {
                0.0
            } else {
                2.0 * p * normal_cdf((x - self.mode) / self.sigma_low)
            }
        } else if self.sigma_high == 0.0 {
            1.0
        } else {
            p + 2.0 * (1.0 - p) * (normal_cdf((x - self.mode) / self.sigma_high) - 0.5)
        }
    }
}

/// Curve drawn at quantile level `u` of the envelope's total-potential
/// distribution. See [`EnvelopeSampler`].
pub fn sample(env: &Envelope, u: f64) -> Result<CompositeCurve> {
    EnvelopeSampler::new(env)?.curve(u)
}

/// Draws curves from one envelope.
///
/// The total `T` comes from the two-piece normal pinned at the envelope
/// totals. Between two envelope curves the result mixes them so its total is
/// `T`; beyond the bounds the outer curve is scaled.
#[derive(Debug, Clone)]
pub struct EnvelopeSampler<'a> {
    env: &'a Envelope,
    dist: TwoPieceNormal,
    pins: (f64, f64, f64),
}

impl<'a> EnvelopeSampler<'a> {
    pub fn new(env: &'a Envelope) -> Result<Self> {
        let pins = env.potentials();
        let dist = TwoPieceNormal::from_pins(pins.0, pins.1, pins.2)?;
        Ok(EnvelopeSampler { env, dist, pins })
    }

    pub fn distribution(&self) -> &TwoPieceNormal {
        &self.dist
    }

    /// Total potential of the curve drawn at level `u`.
    pub fn total(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("sample level must lie in (0, 1), got {u}")));
        }
        let (l, m, up) = self.pins;
        let mut t = self.dist.quantile(u)?;
        let snap = 1e-12 * (up - l).abs().max(up.abs() * 1e-3).max(f64::MIN_POSITIVE);
        for pin in [l, m, up] {
            if (t - pin).abs() <= snap {
                t = pin;
            }
        }
        Ok(t.max(0.0))
    }

    pub fn curve(&self, u: f64) -> Result<CompositeCurve> {
        let t = self.total(u)?;
        let env = self.env;
        let (l, m, up) = self.pins;
        let label = format!("{} sample u={u}", env.mode.label);
        let curve = if t == l {
            env.lower.clone()
        } else if t == m {
            env.mode.clone()
        } else if t == up {
            env.upper.clone()
        } else if t == 0.0 {
            CompositeCurve::empty("", env.mode.units.clone())
        } else if t < l {
            env.lower.scaled(t / l)?
        } else if t < m {
            mix(&env.lower, &env.mode, (m - t) / (m - l))?
        } else if t < up {
            mix(&env.mode, &env.upper, (up - t) / (up - m))?
        } else {
            env.upper.scaled(t / up)?
        };
        Ok(curve.with_label(label))
    }
}

/// `w * a + (1 - w) * b`, component-wise concatenation.
fn mix(a: &CompositeCurve, b: &CompositeCurve, w: f64) -> Result<CompositeCurve> {
    aggregate(&[a.scaled(w)?, b.scaled(1.0 - w)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcore::{Distribution, Units};

    fn wind_like() -> CompositeCurve {
        CompositeCurve::new(
            "wind",
            Units::default(),
            vec![
                Distribution::hierarchical(200.0, 40.0, 113.6).unwrap(),
                Distribution::hierarchical(146.0, 60.0, 130.0).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn scale_factors() {
        let env = scale_envelope(&wind_like(), 72.0, 2257.0).unwrap();
        let (l, m, u) = env.potentials();
        assert!((l - 72.0).abs() < 1e-12 && m == 346.0 && (u - 2257.0).abs() < 1e-9);
        let f_lo = env.lower.components[0].a / env.mode.components[0].a;
        let f_hi = env.upper.components[0].a / env.mode.components[0].a;
        assert!((f_lo - 0.2081).abs() < 1e-4 && (f_hi - 6.5231).abs() < 1e-3);
        assert_eq!(env.lower.components[1].b, 60.0);
        env.check_ordering(1000).unwrap();
    }

    #[test]
    fn identical_bounds() {
        let m = wind_like();
        let env = scale_envelope(&m, 346.0, 346.0).unwrap();
        assert_eq!(env.lower.components, env.mode.components);
        assert_eq!(env.upper.components, env.mode.components);
        assert!(matches!(scale_envelope(&m, 400.0, 500.0), Err(Error::Envelope(_))));
        assert!(matches!(scale_envelope(&m, 10.0, 300.0), Err(Error::Envelope(_))));
    }

    #[test]
    fn two_piece_pins() {
        let d = TwoPieceNormal::from_pins(72.0, 346.0, 2257.0).unwrap();
        assert!((d.quantile(0.02).unwrap() - 72.0).abs() < 1e-9);
        assert!((d.quantile(0.98).unwrap() - 2257.0).abs() < 1e-9);
        assert!((d.cdf(346.0) - d.p_low).abs() < 1e-15);
        // continuity of the density at the mode
        let dens_lo = 2.0 * d.p_low / d.sigma_low;
        let dens_hi = 2.0 * (1.0 - d.p_low) / d.sigma_high;
        assert!((dens_lo / dens_hi - 1.0).abs() < 1e-9);
        for &u in &[0.001, 0.1, 0.5, 0.9, 0.999] {
            assert!((d.cdf(d.quantile(u).unwrap()) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_pins() {
        let d = TwoPieceNormal::from_pins(5.0, 5.0, 5.0).unwrap();
        assert_eq!(d.quantile(0.3).unwrap(), 5.0);
        let d = TwoPieceNormal::from_pins(5.0, 5.0, 9.0).unwrap();
        assert!((d.quantile(0.98).unwrap() - 9.0).abs() < 1e-12);
        assert!(d.quantile(0.01).unwrap() >= 5.0);
        assert!(TwoPieceNormal::from_pins(6.0, 5.0, 9.0).is_err());
    }

    #[test]
    fn sample_pins_and_mixing() {
        let env = scale_envelope(&wind_like(), 72.0, 2257.0).unwrap();
        assert_eq!(sample(&env, 0.02).unwrap().components, env.lower.components);
        assert_eq!(sample(&env, 0.98).unwrap().components, env.upper.components);
        let d = TwoPieceNormal::from_pins(72.0, 346.0, 2257.0).unwrap();
        assert_eq!(sample(&env, d.p_low).unwrap().components, env.mode.components);
        for &u in &[0.001, 0.05, 0.3, 0.6, 0.99, 0.9999] {
            let s = sample(&env, u).unwrap();
            // totals below zero give an empty curve
            let t = d.quantile(u).unwrap().max(0.0);
            assert!((s.potential() - t).abs() <= 1e-9 * t, "u={u}");
        }
        assert!(matches!(sample(&env, 0.0), Err(Error::Domain(_))));
        assert!(matches!(sample(&env, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn bound_parsing() {
        assert_eq!("Mode".parse::<Bound>().unwrap(), Bound::Mode);
        assert!("middle".parse::<Bound>().is_err());
    }
}
