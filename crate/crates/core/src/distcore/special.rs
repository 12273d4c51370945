//! Error function, its complement, and their inverses.
//!
//! The forward functions come from `libm` (the fdlibm implementation, accurate
//! to about one ulp). The inverses start from Giles' single-precision rational
//! approximation and are polished with Halley steps against the forward
//! functions. Tail arguments go through `erfc` so that probabilities close to
//! zero or one keep their relative precision.

use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};

use crate::error::{Error, Result};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Inverse of [`erf`] on the open interval (-1, 1).
pub fn erf_inv(x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("erf_inv requires |x| < 1, got {x}")));
    }
    Ok(erf_inv_unchecked(x))
}

/// Inverse of [`erfc`] on the open interval (0, 2).
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::Domain(format!("erfc_inv requires 0 < y < 2, got {y}")));
    }
    Ok(if y <= 1.0 {
        erfc_inv_upper(y)
    } else {
        -erfc_inv_upper(2.0 - y)
    })
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("normal quantile requires 0 < p < 1, got {p}")));
    }
    Ok(-SQRT_2 * erfc_inv(2.0 * p)?)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

pub(crate) fn erf_inv_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let w = if ax <= 0.5 {
        polish_erf(giles(ax, 1.0 - ax), ax)
    } else {
        // 1 - ax is exact here, so the tail is solved through erfc.
        erfc_inv_upper(1.0 - ax)
    };
    w.copysign(x)
}

/// Solves erfc(w) = y for 0 < y <= 1, returning w >= 0.
fn erfc_inv_upper(y: f64) -> f64 {
    if y == 1.0 {
        return 0.0;
    }
    let mut w = if y < 1e-12 {
        asymptotic_tail(y)
    } else {
        giles(1.0 - y, y)
    };
    for _ in 0..8 {
        let f = erfc(w) - y;
        let d = -FRAC_2_SQRT_PI * (-w * w).exp();
        if d == 0.0 || f == 0.0 {
            break;
        }
        let ratio = f / d;
        // Halley correction: f'' / f' = -2w
        let step = ratio / (1.0 + w * ratio);
        w -= step;
        if step.abs() <= 1e-17 * w.abs() {
            break;
        }
    }
    w
}

/// Fixed point of erfc(w) ~ exp(-w^2) / (w sqrt(pi)), good far in the tail
/// where the rational approximation no longer applies.
fn asymptotic_tail(y: f64) -> f64 {
    let mut w = (-y.ln()).sqrt();
    for _ in 0..4 {
        w = (-(y * w / FRAC_2_SQRT_PI * 2.0).ln()).sqrt();
    }
    w
}

fn polish_erf(mut w: f64, x: f64) -> f64 {
    for _ in 0..4 {
        let f = erf(w) - x;
        let d = FRAC_2_SQRT_PI * (-w * w).exp();
        if f == 0.0 {
            break;
        }
        let ratio = f / d;
        let step = ratio / (1.0 + w * ratio);
        w -= step;
        if step.abs() <= 1e-17 * w.abs() {
            break;
        }
    }
    w
}

/// Giles' approximation of erfinv(x), with `one_minus` = 1 - |x| supplied
/// separately so tiny tail probabilities are not rounded away.
fn giles(x: f64, one_minus: f64) -> f64 {
    let mut w = -(one_minus * (2.0 - one_minus)).ln();
    let p = if w < 5.0 {
        w -= 2.5;
        let mut p = 2.810_226_36e-08;
        p = 3.432_739_39e-07 + p * w;
        p = -3.523_387_7e-06 + p * w;
        p = -4.391_506_54e-06 + p * w;
        p = 0.000_218_580_87 + p * w;
        p = -0.001_253_725_03 + p * w;
        p = -0.004_177_681_64 + p * w;
        p = 0.246_640_727 + p * w;
        1.501_409_41 + p * w
    } else {
        w = w.sqrt() - 3.0;
        let mut p = -0.000_200_214_257;
        p = 0.000_100_950_558 + p * w;
        p = 0.001_349_343_22 + p * w;
        p = -0.003_673_428_44 + p * w;
        p = 0.005_739_507_73 + p * w;
        p = -0.007_622_461_3 + p * w;
        p = 0.009_438_870_47 + p * w;
        p = 1.001_674_06 + p * w;
        2.832_976_82 + p * w
    };
    // x itself may have rounded to 1 for tiny tails; fall back on the sign only.
    let x = if x >= 1.0 { 1.0 } else { x };
    p * x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect_erf(x: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0_f64, 10.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if erf(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn known_values() {
        assert_eq!(erf_inv(0.0).unwrap(), 0.0);
        let one_sigma = erf(1.0 / SQRT_2);
        assert!((erf_inv(one_sigma).unwrap() - 1.0 / SQRT_2).abs() < 1e-14);
        assert!((erf_inv(0.682_689_492_1).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
        assert!((erf_inv(0.90).unwrap() - 1.163_087).abs() < 1e-6);
    }

    #[test]
    fn matches_bisection_oracle() {
        for i in 1..200 {
            let x = -0.995 + 1.99 * (i as f64) / 200.0;
            let w = erf_inv(x).unwrap();
            assert!((w - bisect_erf(x)).abs() < 1e-12, "x={x}");
            assert!((erf(w) - x).abs() <= 1e-12, "x={x}");
        }
    }

    #[test]
    fn odd_function() {
        for &x in &[0.1, 0.3, 0.5, 0.7, 0.99, 0.999_999] {
            assert_eq!(erf_inv(-x).unwrap(), -erf_inv(x).unwrap());
        }
    }

    #[test]
    fn rejects_outside_open_interval() {
        for &x in &[1.0, -1.0, 1.5, f64::NAN] {
            assert!(matches!(erf_inv(x), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn complementary_tail() {
        for &y in &[1e-300, 1e-100, 1e-20, 1e-8, 0.01, 0.5, 1.0, 1.5, 1.99] {
            let w = erfc_inv(y).unwrap();
            let back = erfc(w);
            assert!(((back - y) / y).abs() < 1e-13, "y={y} back={back}");
        }
    }

    #[test]
    fn normal_quantile_round_trip() {
        for &p in &[1e-10, 0.001, 0.02, 0.3, 0.5, 0.8, 0.98, 0.999_999] {
            let z = normal_quantile(p).unwrap();
            assert!(((normal_cdf(z) - p) / p).abs() < 1e-12, "p={p}");
        }
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
    }
}
