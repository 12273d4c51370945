//! Regions, country-level disaggregation, and re-aggregation.
//!
//! A regional curve is split among member countries in proportion to a proxy
//! weight (wind speed cubed times suitable area, insolation times area,
//! coastline length, ...). Every country keeps the regional `B` and `C0`; only
//! the potential is divided. Summing the country curves over any other
//! region set gives curves for that set.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curveset::{aggregate, CompositeCurve};
use crate::distcore::Distribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionDef {
    pub name: String,
    /// ISO 3166 alpha-3 codes.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSet {
    pub regions: Vec<RegionDef>,
}

impl RegionSet {
    pub fn new(regions: Vec<RegionDef>) -> Result<Self> {
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        let mut names = BTreeSet::new();
        for r in &regions {
            if !names.insert(r.name.as_str()) {
                return Err(Error::Validation(format!("region '{}' defined twice", r.name)));
            }
            if r.members.is_empty() {
                return Err(Error::Validation(format!("region '{}' has no members", r.name)));
            }
            for m in &r.members {
                if let Some(prev) = owner.insert(m, &r.name) {
                    return Err(Error::Validation(format!(
                        "country {m} belongs to both '{prev}' and '{}'",
                        r.name
                    )));
                }
            }
        }
        Ok(RegionSet { regions })
    }

    /// Reads `region,country` rows (the second column may also be headed
    /// `name`). Lines starting with `#` are comments. Regions keep the order
    /// of first appearance.
    pub fn read_csv<R: Read>(r: R, source: &str) -> Result<Self> {
        let rows = read_pairs(r, source, "region", &["country", "name"])?;
        let mut regions: Vec<RegionDef> = Vec::new();
        for (_, region, country) in rows {
            match regions.iter_mut().find(|d| d.name == region) {
                Some(d) => d.members.push(country),
                None => regions.push(RegionDef {
                    name: region,
                    members: vec![country],
                }),
            }
        }
        Self::new(regions)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::read_csv(open(path)?, &path.display().to_string())
    }

    pub fn get(&self, name: &str) -> Option<&RegionDef> {
        self.regions.iter().find(|r| r.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.regions.iter().map(|r| r.name.as_str())
    }

    pub fn countries(&self) -> impl Iterator<Item = &str> {
        self.regions.iter().flat_map(|r| r.members.iter().map(String::as_str))
    }

    /// Each country as its own region.
    pub fn identity<'a>(countries: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        Self::new(
            countries
                .into_iter()
                .map(|c| RegionDef {
                    name: c.to_string(),
                    members: vec![c.to_string()],
                })
                .collect(),
        )
    }
}

/// Non-negative weight per country.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProxyWeights {
    pub weights: BTreeMap<String, f64>,
}

impl ProxyWeights {
    pub fn new(weights: BTreeMap<String, f64>) -> Result<Self> {
        for (c, w) in &weights {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::Weight(format!("weight for {c} must be non-negative, got {w}")));
            }
        }
        Ok(ProxyWeights { weights })
    }

    pub fn equal<'a>(countries: impl IntoIterator<Item = &'a str>) -> Self {
        ProxyWeights {
            weights: countries.into_iter().map(|c| (c.to_string(), 1.0)).collect(),
        }
    }

    /// Reads `country,weight` rows.
    pub fn read_csv<R: Read>(r: R, source: &str) -> Result<Self> {
        let rows = read_pairs(r, source, "country", &["weight"])?;
        let mut weights = BTreeMap::new();
        for (row, country, w) in rows {
            let v: f64 = w
                .parse()
                .map_err(|_| Error::parse(source, row, format!("'{w}' is not a number")))?;
            if weights.insert(country.clone(), v).is_some() {
                return Err(Error::parse(source, row, format!("duplicate country {country}")));
            }
        }
        Self::new(weights)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::read_csv(open(path)?, &path.display().to_string())
    }

    /// Weights restricted to `members`; countries without an entry weigh 0.
    pub fn restricted(&self, members: &[String]) -> Self {
        ProxyWeights {
            weights: members
                .iter()
                .map(|m| (m.clone(), self.weights.get(m).copied().unwrap_or(0.0)))
                .collect(),
        }
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn read_pairs<R: Read>(r: R, source: &str, first: &str, second: &[&str]) -> Result<Vec<(usize, String, String)>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r);
    let headers = rd
        .headers()
        .map_err(|e| Error::parse(source, 1, e.to_string()))?
        .clone();
    let h: Vec<String> = headers.iter().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() != 2 || h[0] != first || !second.contains(&h[1].as_str()) {
        return Err(Error::parse(
            source,
            1,
            format!("expected header '{first},{}', found '{}'", second[0], h.join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(source, row, e.to_string())
        })?;
        let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != 2 || rec[0].is_empty() || rec[1].is_empty() {
            return Err(Error::parse(source, row, "expected two non-empty fields"));
        }
        out.push((row, rec[0].to_string(), rec[1].to_string()));
    }
    Ok(out)
}

/// Splits one distribution among countries. Countries with zero weight get
/// nothing and are left out of the result. The potentials sum to `d.a`
/// exactly when added in key order.
pub fn disaggregate(d: &Distribution, weights: &ProxyWeights) -> Result<BTreeMap<String, Distribution>> {
    let shares = split_potential(d.a, weights)?;
    shares
        .into_iter()
        .map(|(c, a)| {
            let mut part = d.clone();
            part.a = a;
            Ok((c, part))
        })
        .collect()
}

/// Splits every component of a curve. Every weighted country appears in the
/// result, with an empty curve when its weight is zero.
pub fn disaggregate_curve(curve: &CompositeCurve, weights: &ProxyWeights) -> Result<BTreeMap<String, CompositeCurve>> {
    let mut out: BTreeMap<String, CompositeCurve> = weights
        .weights
        .keys()
        .map(|c| {
            (
                c.clone(),
                CompositeCurve::empty(format!("{} {c}", curve.label), curve.units.clone()),
            )
        })
        .collect();
    for d in &curve.components {
        for (c, part) in disaggregate(d, weights)? {
            out.get_mut(&c).expect("country from weights").push(part)?;
        }
    }
    Ok(out)
}

fn split_potential(a: f64, weights: &ProxyWeights) -> Result<Vec<(String, f64)>> {
    ProxyWeights::new(weights.weights.clone())?;
    let total = weights.total();
    if !(total > 0.0) {
        return Err(Error::Weight("weights sum to zero".into()));
    }
    let mut shares: Vec<(String, f64)> = weights
        .weights
        .iter()
        .filter(|(_, w)| **w > 0.0)
        .map(|(c, w)| (c.clone(), a * (w / total)))
        .collect();
    // Largest-remainder correction: push the rounding residue onto the
    // largest share until the ordered sum reproduces `a`.
    let largest = (0..shares.len())
        .max_by(|&i, &j| shares[i].1.total_cmp(&shares[j].1).then(j.cmp(&i)))
        .expect("at least one positive weight");
    for _ in 0..8 {
        let sum: f64 = shares.iter().map(|s| s.1).sum();
        let residue = a - sum;
        if residue == 0.0 {
            break;
        }
        let fixed = shares[largest].1 + residue;
        shares[largest].1 = if fixed == shares[largest].1 {
            // residue below one ulp of the share: step by one ulp
            if residue > 0.0 {
                next_up(fixed)
            } else {
                next_down(fixed)
            }
        } else {
            fixed
        };
    }
    Ok(shares)
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

/// Sums country curves into the regions of `regions`.
pub fn reaggregate(
    country_curves: &BTreeMap<String, CompositeCurve>,
    regions: &RegionSet,
) -> Result<BTreeMap<String, CompositeCurve>> {
    let missing: Vec<String> = regions
        .countries()
        .filter(|c| !country_curves.contains_key(*c))
        .map(str::to_string)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Coverage { missing });
    }
    regions
        .regions
        .iter()
        .map(|r| {
            let parts: Vec<CompositeCurve> = r.members.iter().map(|m| country_curves[m].clone()).collect();
            Ok((r.name.clone(), aggregate(&parts)?.with_label(r.name.clone())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcore::Units;

    fn weights(pairs: &[(&str, f64)]) -> ProxyWeights {
        ProxyWeights::new(pairs.iter().map(|(c, w)| (c.to_string(), *w)).collect()).unwrap()
    }

    #[test]
    fn equal_split() {
        let d = Distribution::hierarchical(100.0, 3.0, 1.0).unwrap();
        let parts = disaggregate(&d, &ProxyWeights::equal(["AAA", "BBB", "CCC", "DDD"])).unwrap();
        assert_eq!(parts.len(), 4);
        for p in parts.values() {
            assert_eq!(p.a, 25.0);
            assert_eq!((p.b, p.c0, p.kind), (d.b, d.c0, d.kind));
        }
    }

    #[test]
    fn wind_speed_cubed() {
        let d = Distribution::hierarchical(90.0, 3.0, 1.0).unwrap();
        let w = weights(&[("FAST", 2.0f64.powi(3)), ("SLOW", 1.0)]);
        let parts = disaggregate(&d, &w).unwrap();
        assert_eq!(parts["FAST"].a, 80.0);
        assert_eq!(parts["SLOW"].a, 10.0);
    }

    #[test]
    fn shares_sum_exactly() {
        let d = Distribution::nearly_identical(0.1 + 0.2, 3.0, 1.0).unwrap();
        let w = weights(&[("A", 1.0), ("B", 3.0), ("C", 7.0), ("D", 0.0), ("E", 1e-9)]);
        let parts = disaggregate(&d, &w).unwrap();
        assert!(!parts.contains_key("D"));
        let sum: f64 = parts.values().map(|p| p.a).sum();
        assert_eq!(sum, d.a);
    }

    #[test]
    fn weight_errors() {
        let d = Distribution::hierarchical(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            disaggregate(&d, &weights(&[("A", 0.0)])),
            Err(Error::Weight(_))
        ));
        let bad: BTreeMap<_, _> = [("A".to_string(), -1.0)].into_iter().collect();
        assert!(matches!(ProxyWeights::new(bad), Err(Error::Weight(_))));
    }

    #[test]
    fn round_trip_and_merge() {
        let curve = CompositeCurve::new(
            "r",
            Units::default(),
            vec![
                Distribution::hierarchical(60.0, 5.0, 2.0).unwrap(),
                Distribution::nearly_identical(40.0, 9.0, 4.0).unwrap(),
            ],
        )
        .unwrap();
        let w = weights(&[("A", 2.0), ("B", 5.0), ("C", 0.0)]);
        let countries = disaggregate_curve(&curve, &w).unwrap();
        assert!(countries["C"].is_empty());

        let one = RegionSet::new(vec![RegionDef {
            name: "all".into(),
            members: vec!["A".into(), "B".into(), "C".into()],
        }])
        .unwrap();
        let back = reaggregate(&countries, &one).unwrap();
        assert_eq!(back["all"].potential(), 100.0);
        for c in [0.0, 3.0, 7.5, 20.0, 100.0] {
            assert!((back["all"].cumulative(c) - curve.cumulative(c)).abs() <= 1e-12 * 100.0);
        }

        let ident = RegionSet::identity(["A", "B", "C"]).unwrap();
        let same = reaggregate(&countries, &ident).unwrap();
        assert_eq!(same["A"].components, countries["A"].components);
    }

    #[test]
    fn coverage_error_lists_gaps() {
        let countries: BTreeMap<String, CompositeCurve> =
            [("A".to_string(), CompositeCurve::empty("a", Units::default()))]
                .into_iter()
                .collect();
        let set = RegionSet::new(vec![RegionDef {
            name: "r".into(),
            members: vec!["A".into(), "X".into(), "Y".into()],
        }])
        .unwrap();
        match reaggregate(&countries, &set) {
            Err(Error::Coverage { missing }) => assert_eq!(missing, vec!["X", "Y"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn region_set_validation() {
        let twice = vec![
            RegionDef {
                name: "a".into(),
                members: vec!["X".into()],
            },
            RegionDef {
                name: "b".into(),
                members: vec!["X".into()],
            },
        ];
        assert!(RegionSet::new(twice).is_err());
        assert!(RegionSet::new(vec![RegionDef {
            name: "a".into(),
            members: vec![]
        }])
        .is_err());
    }

    #[test]
    fn csv_loading() {
        let src = "# comment\nregion,country\nNorth,AAA\nNorth,BBB\nSouth,CCC\n";
        let set = RegionSet::read_csv(src.as_bytes(), "mem").unwrap();
        assert_eq!(set.names().collect::<Vec<_>>(), ["North", "South"]);
        assert_eq!(set.get("North").unwrap().members, ["AAA", "BBB"]);
        let alias = "region,name\nX,AAA\n";
        assert!(RegionSet::read_csv(alias.as_bytes(), "mem").is_ok());
        let bad = "zone,country\nX,AAA\n";
        assert!(matches!(
            RegionSet::read_csv(bad.as_bytes(), "mem"),
            Err(Error::Parse { .. })
        ));

        let w = ProxyWeights::read_csv("country,weight\nAAA,1.5\nBBB,0\n".as_bytes(), "w").unwrap();
        assert_eq!(w.total(), 1.5);
        let bad = "country,weight\nAAA,abc\n";
        assert!(matches!(
            ProxyWeights::read_csv(bad.as_bytes(), "w"),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn shipped_regions_file() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/regions.csv");
        let set = RegionSet::from_file(&path).unwrap();
        assert_eq!(set.regions.len(), 14);
        assert_eq!(set.get("EU-15").unwrap().members.len(), 15);
        assert_eq!(set.get("Middle East").unwrap().members.len(), 14);
    }
}
