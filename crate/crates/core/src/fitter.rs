//! Least-squares fits of a cumulative distribution to sparse
//! (cost, cumulative quantity) observations.
//!
//! The search runs a Nelder–Mead simplex in a transformed parameter space
//! where every point is a valid distribution:
//!
//! ```text
//! A  = max_N * (1 + exp(p0))     so A > max_N
//! B  = span  * exp(p1)
//! C0 = span  * p2
//! ```
//!
//! with `span` the observed cost range. Three deterministic starting points
//! come from two-anchor calibration on the first positive and the last
//! observation.

use serde::{Deserialize, Serialize};

use crate::calibrate::{from_anchors, Anchor};
use crate::distcore::{Distribution, DistributionKind};
use crate::error::{Error, Result};

/// Default cost multiplier for the saturation point added by [`augment`].
pub const SATURATION_MULTIPLIER: f64 = 2.0;

const INITIAL_STEPS: [f64; 3] = [0.5, 0.3, 0.1];
const POLISH_STEPS: usize = 20;

const SEED_QUANTILES: [(f64, f64); 3] = [(0.1, 0.9), (0.05, 0.95), (0.2, 0.8)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub c: f64,
    pub n: f64,
}

impl FitPoint {
    pub fn new(c: f64, n: f64) -> Self {
        FitPoint { c, n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Weight residuals by the observed quantity instead of absolutely.
    pub relative: bool,
    pub max_iterations: usize,
    /// Stop when the simplex spread in objective falls below this fraction.
    pub tolerance: f64,
    /// Gradient norm (transformed space) required to report convergence.
    pub gradient_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            relative: false,
            max_iterations: 2000,
            tolerance: 1e-12,
            gradient_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub dist: Distribution,
    /// Root-mean-square absolute residual, in quantity units.
    pub rmse: f64,
    /// `(fitted - observed) / observed` per input point, in input order
    /// after sorting by cost. Points observed at zero are divided by the
    /// largest observation instead.
    pub per_point_residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Final value of the normalised objective.
    pub objective: f64,
    /// Index of the starting point that produced the result.
    pub seed: usize,
}

impl FitResult {
    pub fn max_abs_residual(&self) -> f64 {
        self.per_point_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn sorted_monotone(points: &[FitPoint]) -> Result<Vec<FitPoint>> {
    for p in points {
        if !p.c.is_finite() || !p.n.is_finite() {
            return Err(Error::Domain(format!("non-finite point ({}, {})", p.c, p.n)));
        }
        if p.n < 0.0 {
            return Err(Error::Domain(format!("negative quantity {} at cost {}", p.n, p.c)));
        }
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.c.total_cmp(&b.c).then(a.n.total_cmp(&b.n)));
    for w in pts.windows(2) {
        if w[1].n < w[0].n {
            return Err(Error::Monotonicity(format!(
                "quantity falls from {} to {} between costs {} and {}",
                w[0].n, w[1].n, w[0].c, w[1].c
            )));
        }
    }
    Ok(pts)
}

/// [`augment_with`] using [`SATURATION_MULTIPLIER`].
pub fn augment(points: &[FitPoint], a_hint: f64) -> Result<Vec<FitPoint>> {
    augment_with(points, a_hint, SATURATION_MULTIPLIER)
}

/// Adds a zero anchor at cost 0 and a saturation point at `multiplier` times
/// the last cost holding `max(last quantity, a_hint)`. Anchors that are
/// already present are not added again.
pub fn augment_with(points: &[FitPoint], a_hint: f64, multiplier: f64) -> Result<Vec<FitPoint>> {
    if points.len() < 2 {
        return Err(Error::DegenerateData(format!(
            "augmentation needs at least two points, got {}",
            points.len()
        )));
    }
    if !(multiplier > 1.0) {
        return Err(Error::Domain(format!(
            "saturation multiplier must exceed 1, got {multiplier}"
        )));
    }
    let mut pts = sorted_monotone(points)?;
    if pts[0].c <= 0.0 && pts[0].n > 0.0 {
        return Err(Error::Monotonicity(format!(
            "quantity {} at non-positive cost {} precedes the zero anchor",
            pts[0].n, pts[0].c
        )));
    }
    let has_zero = pts[0].c == 0.0 && pts[0].n == 0.0;
    let k = pts.len();
    let has_saturation = {
        let (prev, last) = (pts[k - 2], pts[k - 1]);
        last.c == multiplier * prev.c && last.n == prev.n.max(a_hint)
    };
    if !has_zero {
        pts.insert(0, FitPoint::new(0.0, 0.0));
    }
    if !has_saturation {
        let last = *pts.last().unwrap();
        pts.push(FitPoint::new(multiplier * last.c, last.n.max(a_hint)));
    }
    Ok(pts)
}

struct Problem<'a> {
    kind: DistributionKind,
    pts: &'a [FitPoint],
    max_n: f64,
    span: f64,
    relative: bool,
}

impl Problem<'_> {
    fn decode(&self, p: &[f64; 3]) -> Option<Distribution> {
        let a = self.max_n * (1.0 + p[0].exp());
        let b = self.span * p[1].exp();
        let c0 = self.span * p[2];
        Distribution::new(self.kind, a, b, c0).ok()
    }

    fn encode(&self, d: &Distribution) -> [f64; 3] {
        let excess = (d.a / self.max_n - 1.0).max(1e-6);
        [excess.ln(), (d.b / self.span).ln(), d.c0 / self.span]
    }

    fn weight(&self, n: f64) -> f64 {
        if self.relative && n > 0.0 {
            n
        } else {
            self.max_n
        }
    }

    fn objective(&self, p: &[f64; 3]) -> f64 {
        let Some(d) = self.decode(p) else {
            return f64::INFINITY;
        };
        let f: f64 = self
            .pts
            .iter()
            .map(|q| {
                let r = (d.cumulative(q.c) - q.n) / self.weight(q.n);
                r * r
            })
            .sum();
        if f.is_finite() {
            f
        } else {
            f64::INFINITY
        }
    }

    fn gradient(&self, p: &[f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for i in 0..3 {
            let h = 1e-6 * (1.0 + p[i].abs());
            let (mut up, mut dn) = (*p, *p);
            up[i] += h;
            dn[i] -= h;
            g[i] = (self.objective(&up) - self.objective(&dn)) / (2.0 * h);
        }
        g
    }

    fn gradient_norm(&self, p: &[f64; 3]) -> f64 {
        self.gradient(p).iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    fn hessian(&self, p: &[f64; 3]) -> [[f64; 3]; 3] {
        let h: [f64; 3] = p.map(|v| 1e-4 * (1.0 + v.abs()));
        let f = |di: [f64; 3]| {
            let mut q = *p;
            for i in 0..3 {
                q[i] += di[i];
            }
            self.objective(&q)
        };
        let f0 = self.objective(p);
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = h[i];
            out[i][i] = (f(e) - 2.0 * f0 + f(e.map(|v| -v))) / (h[i] * h[i]);
            for j in 0..i {
                let mut pp = [0.0; 3];
                pp[i] = h[i];
                pp[j] = h[j];
                let mut pm = pp;
                pm[j] = -h[j];
                let v = (f(pp) - f(pm) - f(pm.map(|v| -v)) + f(pp.map(|v| -v))) / (4.0 * h[i] * h[j]);
                out[i][j] = v;
                out[j][i] = v;
            }
        }
        out
    }
}

struct Simplex {
    best: [f64; 3],
    f_best: f64,
    iterations: usize,
    tolerance_met: bool,
}

fn nelder_mead(prob: &Problem, start: [f64; 3], steps: [f64; 3], budget: usize, tol: f64) -> Simplex {
    let mut xs: Vec<[f64; 3]> = vec![start];
    for i in 0..3 {
        let mut x = start;
        x[i] += steps[i];
        xs.push(x);
    }
    let mut fs: Vec<f64> = xs.iter().map(|x| prob.objective(x)).collect();
    let mut it = 0;
    let mut tolerance_met = false;
    while it < budget {
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&i, &j| fs[i].total_cmp(&fs[j]));
        xs = order.iter().map(|&i| xs[i]).collect();
        fs = order.iter().map(|&i| fs[i]).collect();

        let spread = fs[3] - fs[0];
        let size = (1..4)
            .flat_map(|k| (0..3).map(move |i| (k, i)))
            .map(|(k, i)| (xs[k][i] - xs[0][i]).abs() / (1.0 + xs[0][i].abs()))
            .fold(0.0, f64::max);
        if (fs[3].is_finite() && spread <= tol * fs[0].abs()) || size < 1e-15 {
            tolerance_met = true;
            break;
        }
        it += 1;

        let mut centroid = [0.0; 3];
        for x in &xs[..3] {
            for i in 0..3 {
                centroid[i] += x[i] / 3.0;
            }
        }
        let along = |t: f64| -> [f64; 3] {
            let mut y = [0.0; 3];
            for i in 0..3 {
                y[i] = centroid[i] + t * (xs[3][i] - centroid[i]);
            }
            y
        };
        let xr = along(-1.0);
        let fr = prob.objective(&xr);
        if fr < fs[0] {
            let xe = along(-2.0);
            let fe = prob.objective(&xe);
            if fe < fr {
                xs[3] = xe;
                fs[3] = fe;
            } else {
                xs[3] = xr;
                fs[3] = fr;
            }
            continue;
        }
        if fr < fs[2] {
            xs[3] = xr;
            fs[3] = fr;
            continue;
        }
        let (xc, fc) = if fr < fs[3] {
            let x = along(-0.5);
            (x, prob.objective(&x))
        } else {
            let x = along(0.5);
            (x, prob.objective(&x))
        };
        if fc < fs[3].min(fr) {
            xs[3] = xc;
            fs[3] = fc;
            continue;
        }
        let best = xs[0];
        for k in 1..4 {
            for (v, b) in xs[k].iter_mut().zip(best) {
                *v = b + 0.5 * (*v - b);
            }
            fs[k] = prob.objective(&xs[k]);
        }
    }
    let k = (0..4).min_by(|&i, &j| fs[i].total_cmp(&fs[j])).unwrap();
    Simplex {
        best: xs[k],
        f_best: fs[k],
        iterations: it,
        tolerance_met,
    }
}

/// Damped Newton steps on finite-difference derivatives, accepted only when
/// they lower the objective. Sharpens the simplex result on ill-conditioned
/// problems where the simplex stalls short of a stationary point.
fn polish(prob: &Problem, mut x: [f64; 3], mut f: f64) -> ([f64; 3], f64) {
    for _ in 0..POLISH_STEPS {
        let g = prob.gradient(&x);
        let Some(d) = solve3(prob.hessian(&x), g.map(|v| -v)) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let y = [x[0] + t * d[0], x[1] + t * d[1], x[2] + t * d[2]];
            let fy = prob.objective(&y);
            if fy < f {
                x = y;
                f = fy;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, f)
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if !(m[piv][col].abs() > 0.0) || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let k = m[r][col] / m[col][col];
            let pivot = m[col];
            for (v, p) in m[r][col..].iter_mut().zip(&pivot[col..]) {
                *v -= k * p;
            }
            b[r] -= k * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn seeds(prob: &Problem) -> Vec<Distribution> {
    let first = prob.pts.iter().find(|p| p.n > 0.0).copied();
    let last = *prob.pts.last().unwrap();
    let mut out = Vec::new();
    for (d1, d2) in SEED_QUANTILES {
        let guess = first.filter(|f| f.c < last.c).and_then(|f| {
            let a = (last.n / d2).max(prob.max_n * 1.01);
            let anchors = (Anchor::new(f.c, d1).ok()?, Anchor::new(last.c, d2).ok()?);
            from_anchors(prob.kind, anchors.0, anchors.1, a).ok()
        });
        let guess = guess.unwrap_or_else(|| {
            let lo = prob.pts[0].c;
            Distribution::new(prob.kind, prob.max_n / d2, prob.span * d1.max(0.1), lo - prob.span * d1)
                .expect("fallback guess is valid")
        });
        out.push(guess);
    }
    out
}

/// Fits with default options (absolute residuals).
pub fn fit(kind: DistributionKind, points: &[FitPoint]) -> Result<FitResult> {
    fit_with(kind, points, &FitOptions::default())
}

pub fn fit_with(kind: DistributionKind, points: &[FitPoint], opts: &FitOptions) -> Result<FitResult> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.c.total_cmp(&b.c).then(a.n.total_cmp(&b.n)));
    for w in sorted.windows(2) {
        if w[0].c == w[1].c {
            return Err(Error::DegenerateData(format!(
                "two observations share cost {} (quantities {} and {})",
                w[0].c, w[0].n, w[1].n
            )));
        }
    }
    let pts = sorted_monotone(points)?;
    if pts.len() < 3 {
        return Err(Error::DegenerateData(format!(
            "a fit needs at least three distinct points, got {}",
            pts.len()
        )));
    }
    let max_n = pts.iter().fold(0.0, |m: f64, p| m.max(p.n));
    if !(max_n > 0.0) {
        return Err(Error::DegenerateData("all observed quantities are zero".into()));
    }
    let span = pts.last().unwrap().c - pts[0].c;
    let prob = Problem {
        kind,
        pts: &pts,
        max_n,
        span,
        relative: opts.relative,
    };

    let mut best: Option<(f64, [f64; 3], usize, bool, usize)> = None;
    for (seed, guess) in seeds(&prob).into_iter().enumerate() {
        let mut x = prob.encode(&guess);
        let mut f = prob.objective(&x);
        let mut used = 0;
        let mut met = false;
        let mut steps = INITIAL_STEPS;
        while used < opts.max_iterations {
            let run = nelder_mead(&prob, x, steps, opts.max_iterations - used, opts.tolerance);
            used += run.iterations;
            let improved = run.f_best < f * (1.0 - opts.tolerance) || f.is_infinite();
            if run.f_best <= f {
                x = run.best;
                f = run.f_best;
            }
            met = run.tolerance_met;
            if !improved || !met {
                break;
            }
            steps = steps.map(|s| (s * 0.1).max(1e-7));
        }
        if met {
            (x, f) = polish(&prob, x, f);
        }
        let converged = met && prob.gradient_norm(&x) < opts.gradient_tolerance;
        let better = match &best {
            None => true,
            Some((fb, ..)) => f < *fb,
        };
        if better {
            best = Some((f, x, used, converged, seed));
        }
    }
    let (f, x, iterations, converged, seed) = best.unwrap();
    let dist = prob
        .decode(&x)
        .ok_or_else(|| Error::DegenerateData("no finite fit found".into()))?;

    let mut sq = 0.0;
    let residuals = pts
        .iter()
        .map(|p| {
            let r = dist.cumulative(p.c) - p.n;
            sq += r * r;
            r / if p.n > 0.0 { p.n } else { max_n }
        })
        .collect();
    Ok(FitResult {
        rmse: (sq / pts.len() as f64).sqrt(),
        dist,
        per_point_residuals: residuals,
        converged,
        iterations,
        objective: f,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rar() -> Vec<FitPoint> {
        [
            (40.0, 569_900.0),
            (80.0, 2_516_100.0),
            (130.0, 3_524_900.0),
            (260.0, 4_004_500.0),
        ]
        .iter()
        .map(|&(c, n)| FitPoint::new(c, n))
        .collect()
    }

    #[test]
    fn augment_uranium_rar() {
        let aug = augment(&rar(), 0.0).unwrap();
        assert_eq!(aug.len(), 6);
        assert_eq!(aug[0], FitPoint::new(0.0, 0.0));
        assert_eq!(aug[5], FitPoint::new(520.0, 4_004_500.0));
        assert_eq!(augment(&aug, 0.0).unwrap(), aug);
    }

    #[test]
    fn augment_rejects_bad_input() {
        assert!(augment(&[FitPoint::new(1.0, 1.0)], 0.0).is_err());
        let bad = [FitPoint::new(1.0, 5.0), FitPoint::new(2.0, 4.0)];
        assert!(matches!(augment(&bad, 0.0), Err(Error::Monotonicity(_))));
    }

    #[test]
    fn augment_uses_hint_and_stays_monotone() {
        let aug = augment_with(&rar(), 5e6, 3.0).unwrap();
        assert_eq!(*aug.last().unwrap(), FitPoint::new(780.0, 5e6));
        assert!(aug.windows(2).all(|w| w[0].c < w[1].c && w[0].n <= w[1].n));
        assert_eq!(augment_with(&aug, 5e6, 3.0).unwrap(), aug);
    }

    #[test]
    fn recovers_hierarchical_parameters() {
        let truth = Distribution::hierarchical(1000.0, 10.0, 5.0).unwrap();
        let pts: Vec<_> = [8.0, 10.0, 15.0, 25.0, 60.0, 200.0]
            .iter()
            .map(|&c| FitPoint::new(c, truth.cumulative(c)))
            .collect();
        let r = fit(DistributionKind::Hierarchical, &pts).unwrap();
        assert!(r.converged);
        assert!((r.dist.a - 1000.0).abs() < 1e-4 * 1000.0, "{:?}", r.dist);
        assert!((r.dist.b - 10.0).abs() < 1e-4 * 10.0);
        assert!((r.dist.c0 - 5.0).abs() < 1e-4 * 10.0);
    }

    #[test]
    fn uranium_rar_fit_quality() {
        let pts = augment(&rar(), 0.0).unwrap();
        let r = fit(DistributionKind::Hierarchical, &pts).unwrap();
        assert!(r.dist.a >= 4_004_500.0);
        for (p, res) in pts.iter().zip(&r.per_point_residuals) {
            if p.n > 0.0 {
                assert!(res.abs() < 0.05, "{p:?} {res}");
            }
        }
    }

    #[test]
    fn identical_points_are_degenerate() {
        let pts = [
            FitPoint::new(1.0, 1.0),
            FitPoint::new(1.0, 1.0),
            FitPoint::new(2.0, 2.0),
            FitPoint::new(3.0, 3.0),
        ];
        assert!(matches!(
            fit(DistributionKind::Hierarchical, &pts),
            Err(Error::DegenerateData(_))
        ));
        let two = [FitPoint::new(1.0, 1.0), FitPoint::new(2.0, 2.0)];
        assert!(matches!(
            fit(DistributionKind::Hierarchical, &two),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn quantity_scaling_only_scales_a() {
        let truth = Distribution::nearly_identical(50.0, 7.0, 20.0).unwrap();
        let noisy: Vec<_> = [22.0, 25.0, 30.0, 35.0, 45.0]
            .iter()
            .enumerate()
            .map(|(i, &c)| FitPoint::new(c, truth.cumulative(c) * (1.0 + 0.01 * (i as f64 - 2.0))))
            .collect();
        let k = 1234.5;
        let scaled: Vec<_> = noisy.iter().map(|p| FitPoint::new(p.c, p.n * k)).collect();
        let r1 = fit(DistributionKind::NearlyIdentical, &noisy).unwrap();
        let r2 = fit(DistributionKind::NearlyIdentical, &scaled).unwrap();
        assert!((r2.dist.a / (k * r1.dist.a) - 1.0).abs() < 1e-6);
        assert!((r2.dist.b / r1.dist.b - 1.0).abs() < 1e-6);
        assert!((r2.dist.c0 - r1.dist.c0).abs() < 1e-6 * r1.dist.b);
    }

    #[test]
    fn deterministic() {
        let pts = augment(&rar(), 0.0).unwrap();
        let a = fit(DistributionKind::NearlyIdentical, &pts).unwrap();
        let b = fit(DistributionKind::NearlyIdentical, &pts).unwrap();
        assert_eq!(a, b);
    }
}
