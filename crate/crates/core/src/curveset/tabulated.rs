use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CompositeCurve;
use crate::distcore::Units;
use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 1000;

/// Offset of the first seed point above the lowest `C0`, relative to the
/// range, when the requested range starts at or below that offset.
const GRID_FLOOR: f64 = 1e-6;

/// A cumulative curve sampled on a strictly increasing cost grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCurve {
    pub costs: Vec<f64>,
    pub quantities: Vec<f64>,
    pub units: Units,
}

impl TabulatedCurve {
    pub fn new(costs: Vec<f64>, quantities: Vec<f64>, units: Units) -> Result<Self> {
        if costs.len() != quantities.len() {
            return Err(Error::Validation(format!(
                "{} costs but {} quantities",
                costs.len(),
                quantities.len()
            )));
        }
        if costs.len() < 2 {
            return Err(Error::Validation("a tabulated curve needs at least two points".into()));
        }
        if costs.iter().chain(&quantities).any(|v| !v.is_finite()) {
            return Err(Error::Validation("tabulated values must be finite".into()));
        }
        if let Some(i) = costs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "cost grid not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(i) = quantities.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Monotonicity(format!(
                "quantity decreases at index {} ({} -> {})",
                i + 1,
                quantities[i],
                quantities[i + 1]
            )));
        }
        if quantities[0] < 0.0 {
            return Err(Error::Validation("quantities must be non-negative".into()));
        }
        Ok(TabulatedCurve {
            costs,
            quantities,
            units,
        })
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// Largest tabulated quantity.
    pub fn max_quantity(&self) -> f64 {
        *self.quantities.last().unwrap()
    }

    /// Marginal cost at quantity `n`, by linear interpolation in
    /// (quantity, cost). Flat stretches resolve to their lowest cost.
    pub fn invert(&self, n: f64) -> Result<f64> {
        if !(n >= 0.0) {
            return Err(Error::Domain(format!("quantity must be non-negative, got {n}")));
        }
        let max = self.max_quantity();
        if n > max {
            return Err(Error::Depletion {
                requested: n,
                available: max,
            });
        }
        let i = self.quantities.partition_point(|&q| q < n);
        if i == 0 {
            return Ok(self.costs[0]);
        }
        let (q0, q1) = (self.quantities[i - 1], self.quantities[i]);
        let (c0, c1) = (self.costs[i - 1], self.costs[i]);
        let t = (n - q0) / (q1 - q0);
        Ok(c0 + t * (c1 - c0))
    }

    /// Quantity at cost `c` by linear interpolation; flat outside the grid.
    pub fn quantity_at(&self, c: f64) -> f64 {
        let i = self.costs.partition_point(|&x| x <= c);
        if i == 0 {
            return 0.0;
        }
        if i == self.len() {
            return self.max_quantity();
        }
        let t = (c - self.costs[i - 1]) / (self.costs[i] - self.costs[i - 1]);
        self.quantities[i - 1] + t * (self.quantities[i] - self.quantities[i - 1])
    }

    /// Exact integral of the interpolated marginal cost over `[q0, q1]`.
    pub fn cost_integral(&self, q0: f64, q1: f64) -> Result<f64> {
        if q1 < q0 {
            return Err(Error::Domain(format!("integration bounds reversed: {q0} > {q1}")));
        }
        let c_start = self.invert(q0)?;
        let c_end = self.invert(q1)?;
        if q1 == q0 {
            return Ok(0.0);
        }
        // breakpoints strictly inside (q0, q1)
        let lo = self.quantities.partition_point(|&q| q <= q0);
        let hi = self.quantities.partition_point(|&q| q < q1);
        let mut total = 0.0;
        let (mut qa, mut ca) = (q0, c_start);
        for i in lo..hi {
            let qb = self.quantities[i];
            if qb > qa {
                let cb = self.invert(qb)?;
                total += 0.5 * (ca + cb) * (qb - qa);
                qa = qb;
                ca = cb;
            }
        }
        total += 0.5 * (ca + c_end) * (q1 - qa);
        Ok(total)
    }

    fn header(&self) -> [String; 2] {
        [
            format!("cost [{}]", self.units.cost),
            format!("cumulative_quantity [{}]", self.units.quantity),
        ]
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.header()).map_err(csv_io)?;
        for (c, q) in self.costs.iter().zip(&self.quantities) {
            wr.write_record([c.to_string(), q.to_string()]).map_err(csv_io)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(r: R, source: &str) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rd
            .headers()
            .map_err(|e| Error::parse(source, 1, e.to_string()))?
            .clone();
        if headers.len() != 2 {
            return Err(Error::parse(source, 1, "expected two columns"));
        }
        let cost_unit = header_unit(&headers[0], "cost")
            .ok_or_else(|| Error::parse(source, 1, format!("expected 'cost [unit]', found '{}'", &headers[0])))?;
        let qty_unit = header_unit(&headers[1], "cumulative_quantity").ok_or_else(|| {
            Error::parse(
                source,
                1,
                format!("expected 'cumulative_quantity [unit]', found '{}'", &headers[1]),
            )
        })?;
        let (mut costs, mut quantities) = (Vec::new(), Vec::new());
        for (i, rec) in rd.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::parse(source, row, e.to_string()))?;
            let num = |k: usize| -> Result<f64> {
                rec[k]
                    .parse::<f64>()
                    .map_err(|_| Error::parse(source, row, format!("'{}' is not a number", &rec[k])))
            };
            costs.push(num(0)?);
            quantities.push(num(1)?);
        }
        Self::new(costs, quantities, Units::new(qty_unit, cost_unit))
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::read_csv(f, &path.display().to_string())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: TabulatedCurve = serde_json::from_str(s)?;
        Self::new(t.costs, t.quantities, t.units)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn header_unit(h: &str, name: &str) -> Option<String> {
    let rest = h.trim().strip_prefix(name)?.trim();
    let inner = rest.strip_prefix('[')?.strip_suffix(']')?;
    Some(inner.trim().to_string())
}

/// Evaluates `curve` on `n` costs from `c_min` to `c_max`.
///
/// The grid starts from a coarse geometric spacing above the lowest component
/// offset plus every offset inside the range. It is then refined greedily: the
/// interval whose linear interpolation misplaces the cost of its midpoint by
/// the largest relative amount is split until `n` points are used.
pub fn tabulate(curve: &CompositeCurve, c_min: f64, c_max: f64, n: usize) -> Result<TabulatedCurve> {
    if !(c_min.is_finite() && c_max.is_finite() && c_min < c_max) {
        return Err(Error::Domain(format!("invalid cost range [{c_min}, {c_max}]")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("a grid needs at least two points, got {n}")));
    }
    let seed_n = n.min(SEED_POINTS);
    let mut costs =
        geometric_grid(curve.min_c0(), c_min, c_max, seed_n).unwrap_or_else(|| linear_grid(c_min, c_max, seed_n));
    let mut kinks: Vec<f64> = curve
        .components
        .iter()
        .map(|d| d.c0)
        .filter(|&c| c > c_min && c < c_max)
        .collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    for k in kinks {
        if costs.len() >= n {
            break;
        }
        if let Err(i) = costs.binary_search_by(|x| x.total_cmp(&k)) {
            costs.insert(i, k);
        }
    }
    let mut points: Vec<(f64, f64)> = costs.iter().map(|&c| (c, curve.cumulative(c))).collect();

    let limits = Limits {
        width: MIN_WIDTH * (c_max - c_min),
        quantity: HEAD_FRACTION * curve.potential(),
    };
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        push_split(&mut heap, curve, w[0], w[1], &limits);
    }
    while points.len() < n {
        let Some(s) = heap.pop() else { break };
        points.push(s.mid);
        push_split(&mut heap, curve, s.left, s.mid, &limits);
        push_split(&mut heap, curve, s.mid, s.right, &limits);
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (costs, quantities) = points.into_iter().unzip();
    TabulatedCurve::new(costs, quantities, curve.units.clone())
}

/// Size of the geometric seed grid refined by [`tabulate`].
const SEED_POINTS: usize = 64;

/// Intervals narrower than this fraction of the range are never split.
const MIN_WIDTH: f64 = 1e-12;

/// Intervals ending below this fraction of the potential are left alone: the
/// far head of a hierarchical curve is flat to many digits and would
/// otherwise absorb the whole budget.
const HEAD_FRACTION: f64 = 1e-9;

struct Limits {
    width: f64,
    quantity: f64,
}

struct Split {
    error: f64,
    left: (f64, f64),
    mid: (f64, f64),
    right: (f64, f64),
}

impl PartialEq for Split {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Split {}

impl PartialOrd for Split {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Split {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn push_split(
    heap: &mut BinaryHeap<Split>,
    curve: &CompositeCurve,
    left: (f64, f64),
    right: (f64, f64),
    limits: &Limits,
) {
    let width = right.0 - left.0;
    if !(width > limits.width) || right.1 <= limits.quantity {
        return;
    }
    let c = left.0 + 0.5 * width;
    if c <= left.0 || c >= right.0 {
        return;
    }
    let q = curve.cumulative(c);
    let dq = right.1 - left.1;
    // Cost the interpolated inverse assigns to `q`; flat intervals need no split.
    let error = if dq > 0.0 {
        let interp = left.0 + (q - left.1) / dq * width;
        (interp - c).abs() / c.abs().max(f64::MIN_POSITIVE)
    } else {
        0.0
    };
    if error > 0.0 {
        heap.push(Split {
            error,
            left,
            mid: (c, q),
            right,
        });
    }
}

impl CompositeCurve {
    /// Tabulation over [`CompositeCurve::default_range`] with `n` points.
    pub fn tabulate_default(&self, n: usize) -> Result<TabulatedCurve> {
        let (lo, hi) = self
            .default_range()
            .ok_or_else(|| Error::Domain(format!("curve '{}' has no components", self.label)))?;
        tabulate(self, lo, hi, n)
    }
}

fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    g[n - 1] = hi;
    g
}

fn geometric_grid(base: Option<f64>, lo: f64, hi: f64, n: usize) -> Option<Vec<f64>> {
    let base = base?;
    let d_hi = hi - base;
    if !(d_hi > 0.0) {
        return None;
    }
    let d_lo = if lo > base { lo - base } else { GRID_FLOOR * d_hi };
    let ratio = d_hi / d_lo;
    let mut g: Vec<f64> = (0..n)
        .map(|i| base + d_lo * ratio.powf(i as f64 / (n - 1) as f64))
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    if g.windows(2).all(|w| w[1] > w[0]) {
        Some(g)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcore::Distribution;

    fn single_h() -> CompositeCurve {
        CompositeCurve::single("h", Distribution::hierarchical(1000.0, 10.0, 5.0).unwrap())
    }

    #[test]
    fn grid_endpoints_and_exact_values() {
        let c = single_h();
        let t = tabulate(&c, 5.0, 500.0, 1000).unwrap();
        assert_eq!(t.len(), 1000);
        assert_eq!(t.costs[0], 5.0);
        assert_eq!(t.costs[999], 500.0);
        for (x, q) in t.costs.iter().zip(&t.quantities) {
            assert_eq!(*q, c.cumulative(*x));
        }
        // range starting above the lowest offset
        let t = tabulate(&c, 8.0, 100.0, 10).unwrap();
        assert_eq!((t.costs[0], t.costs[9]), (8.0, 100.0));
    }

    #[test]
    fn refined_grid_holds_offsets_and_inverts_closely() {
        let ni = Distribution::nearly_identical(500.0, 4.0, 60.0).unwrap();
        let h = Distribution::hierarchical(2000.0, 30.0, 10.0).unwrap();
        let c = CompositeCurve::new("mix", Units::default(), vec![h.clone(), ni.clone()]).unwrap();
        let t = c.tabulate_default(DEFAULT_GRID_POINTS).unwrap();
        assert_eq!(t.len(), DEFAULT_GRID_POINTS);
        assert!(t.costs.contains(&60.0));
        let single = CompositeCurve::single("h", h.clone())
            .tabulate_default(DEFAULT_GRID_POINTS)
            .unwrap();
        for i in 1..100 {
            let n = h.potential() * 0.9 * i as f64 / 100.0;
            let exact = h.cost_at(n).unwrap();
            assert!((single.invert(n).unwrap() - exact).abs() <= 1e-4 * exact, "{n}");
        }
    }

    #[test]
    fn invalid_ranges() {
        let c = single_h();
        assert!(matches!(tabulate(&c, 5.0, 5.0, 10), Err(Error::Domain(_))));
        assert!(matches!(tabulate(&c, 1.0, 5.0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn invert_against_closed_form() {
        let c = single_h();
        let t = c.tabulate_default(DEFAULT_GRID_POINTS).unwrap();
        assert_eq!(t.invert(0.0).unwrap(), t.costs[0]);
        let n = 1000.0 * (-1.0f64).exp();
        assert!((t.invert(n).unwrap() - 15.0).abs() < 1e-4 * 10.0);
        assert!(matches!(
            t.invert(t.max_quantity() * 1.0001),
            Err(Error::Depletion { .. })
        ));
        assert!(matches!(t.invert(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn integral_of_linear_segment() {
        let t = TabulatedCurve::new(vec![1.0, 3.0, 7.0], vec![0.0, 2.0, 4.0], Units::default()).unwrap();
        // C(N) = 1 + N on [0,2], 3 + 2(N-2) on [2,4]
        assert!((t.cost_integral(0.0, 2.0).unwrap() - 4.0).abs() < 1e-15);
        assert!((t.cost_integral(1.0, 3.0).unwrap() - (2.5 + 4.0)).abs() < 1e-14);
        assert_eq!(t.cost_integral(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let mut c = single_h();
        c.units = Units::new("PJ/y", "USD2008/MWh");
        c.components[0].units = c.units.clone();
        let t = c.tabulate_default(50).unwrap();
        let s = t.to_csv_string();
        assert!(s.starts_with("cost [USD2008/MWh],cumulative_quantity [PJ/y]\n"));
        let back = TabulatedCurve::read_csv(s.as_bytes(), "mem").unwrap();
        assert_eq!(back, t);
        assert_eq!(TabulatedCurve::from_json(&t.to_json().unwrap()).unwrap(), t);
    }

    #[test]
    fn csv_schema_errors() {
        let bad = "price,qty\n1,2\n";
        assert!(matches!(
            TabulatedCurve::read_csv(bad.as_bytes(), "f"),
            Err(Error::Parse { row: 1, .. })
        ));
        let bad = "cost [a],cumulative_quantity [b]\n1,2\n2,x\n";
        assert!(matches!(
            TabulatedCurve::read_csv(bad.as_bytes(), "f"),
            Err(Error::Parse { row: 3, .. })
        ));
        let bad = "cost [a],cumulative_quantity [b]\n1,2\n2,1\n";
        assert!(matches!(
            TabulatedCurve::read_csv(bad.as_bytes(), "f"),
            Err(Error::Monotonicity(_))
        ));
    }

    #[test]
    fn inversion_within_one_cell() {
        let c = CompositeCurve::new(
            "mix",
            Units::default(),
            vec![
                Distribution::hierarchical(300.0, 4.0, 2.0).unwrap(),
                Distribution::nearly_identical(500.0, 30.0, 10.0).unwrap(),
            ],
        )
        .unwrap();
        let t = c.tabulate_default(DEFAULT_GRID_POINTS).unwrap();
        for i in 1..200 {
            let x = t.costs[0] + (t.costs[999] - t.costs[0]) * (i as f64 / 200.0).powi(3);
            let back = t.invert(c.cumulative(x)).unwrap();
            let cell = t.costs.partition_point(|&g| g <= x);
            let (lo, hi) = (t.costs[cell.saturating_sub(1)], t.costs[cell.min(999)]);
            assert!(back >= lo - 1e-9 && back <= hi + 1e-9, "x={x} back={back}");
        }
    }
}
