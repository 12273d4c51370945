//! Row types for the canonical data tables and their CSV loaders.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distcore::DistributionKind;
use crate::error::{Error, Result};

/// One row of the renewable parameter table (`renewables.csv`).
///
/// Schema: `resource,region,scenario,subtype,kind,A [PJ/y],B [USD2008/MWh],C0 [USD2008/MWh]`.
/// `scenario` is used by biomass only, `subtype` by geothermal only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewableParamRecord {
    pub resource: String,
    pub region: String,
    pub scenario: Option<String>,
    pub subtype: Option<String>,
    pub kind: DistributionKind,
    pub a: f64,
    pub b: f64,
    pub c0: f64,
    pub quantity_unit: String,
    pub cost_unit: String,
    pub row: usize,
}

/// One row of a stock table (`oil.csv`, `gas.csv`, `coal.csv`, `uranium.csv`,
/// `thorium.csv`).
///
/// Schema: `region,occurrence,class,amount [unit],c_lo [unit],c_hi [unit]`.
/// Uranium rows give cumulative amounts below the ceiling `c_hi`; an empty
/// `c_hi` marks resources without a cost category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockRecord {
    pub resource: String,
    pub region: String,
    pub occurrence: String,
    pub class: String,
    pub amount: f64,
    pub amount_unit: String,
    pub c_lo: Option<f64>,
    pub c_hi: Option<f64>,
    pub cost_unit: String,
    pub row: usize,
}

/// Splits `name [unit]` into its parts.
fn split_header(h: &str) -> (String, Option<String>) {
    let h = h.trim();
    match (h.find('['), h.rfind(']')) {
        (Some(i), Some(j)) if j > i => (h[..i].trim().to_string(), Some(h[i + 1..j].trim().to_string())),
        _ => (h.to_string(), None),
    }
}

struct Table {
    source: String,
    headers: Vec<(String, Option<String>)>,
    rows: Vec<(usize, csv::StringRecord)>,
}

impl Table {
    fn read<R: Read>(r: R, source: &str) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(false)
            .from_reader(r);
        let headers = rd
            .headers()
            .map_err(|e| Error::parse(source, 1, e.to_string()))?
            .iter()
            .map(split_header)
            .collect();
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| {
                let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Error::parse(source, row, e.to_string())
            })?;
            let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            rows.push((row, rec));
        }
        Ok(Table {
            source: source.to_string(),
            headers,
            rows,
        })
    }

    fn expect(&self, names: &[&str]) -> Result<()> {
        let found: Vec<&str> = self.headers.iter().map(|h| h.0.as_str()).collect();
        if found != names {
            return Err(Error::parse(
                &self.source,
                1,
                format!("expected columns {}, found {}", names.join(","), found.join(",")),
            ));
        }
        Ok(())
    }

    fn unit(&self, col: usize) -> Result<String> {
        self.headers[col].1.clone().ok_or_else(|| {
            Error::parse(
                &self.source,
                1,
                format!("column '{}' needs a [unit]", self.headers[col].0),
            )
        })
    }

    fn num(&self, row: usize, rec: &csv::StringRecord, col: usize) -> Result<f64> {
        let s = &rec[col];
        let v: f64 = s.parse().map_err(|_| {
            Error::parse(
                &self.source,
                row,
                format!("{} '{}' is not a number", self.headers[col].0, s),
            )
        })?;
        if !v.is_finite() {
            return Err(Error::parse(
                &self.source,
                row,
                format!("{} is not finite", self.headers[col].0),
            ));
        }
        Ok(v)
    }

    fn opt_num(&self, row: usize, rec: &csv::StringRecord, col: usize) -> Result<Option<f64>> {
        if rec[col].is_empty() {
            Ok(None)
        } else {
            self.num(row, rec, col).map(Some)
        }
    }
}

fn non_empty(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

/// Family each renewable resource must use; `None` means either.
fn required_kind(resource: &str, subtype: Option<&str>) -> Option<DistributionKind> {
    use DistributionKind::*;
    match resource {
        "hydro" | "wind" | "wave" | "tidal" => Some(Hierarchical),
        "solar" => Some(NearlyIdentical),
        "geothermal" => match subtype {
            Some(s) if s.ends_with("out_belt") => Some(NearlyIdentical),
            Some(s) if s.ends_with("in_belt") => Some(Hierarchical),
            _ => None,
        },
        _ => None,
    }
}

const RENEWABLE_RESOURCES: [&str; 7] = ["hydro", "wind", "solar", "wave", "tidal", "geothermal", "biomass"];

pub fn read_renewable_params<R: Read>(r: R, source: &str) -> Result<Vec<RenewableParamRecord>> {
    let t = Table::read(r, source)?;
    t.expect(&["resource", "region", "scenario", "subtype", "kind", "A", "B", "C0"])?;
    let (qu, bu, cu) = (t.unit(5)?, t.unit(6)?, t.unit(7)?);
    if bu != cu {
        return Err(Error::parse(source, 1, format!("B and C0 units differ ({bu} vs {cu})")));
    }
    let mut out = Vec::with_capacity(t.rows.len());
    for (row, rec) in &t.rows {
        let row = *row;
        let resource = rec[0].to_ascii_lowercase();
        if !RENEWABLE_RESOURCES.contains(&resource.as_str()) {
            return Err(Error::parse(
                source,
                row,
                format!("unknown renewable resource '{resource}'"),
            ));
        }
        let kind: DistributionKind = match &rec[4] {
            "1" => DistributionKind::Hierarchical,
            "2" => DistributionKind::NearlyIdentical,
            k => k.parse().map_err(|e: Error| Error::parse(source, row, e.to_string()))?,
        };
        let subtype = non_empty(&rec[3]);
        if let Some(req) = required_kind(&resource, subtype.as_deref()) {
            if req != kind {
                return Err(Error::Validation(format!(
                    "{source}:{row}: {resource} must use the {req} family, found {kind}"
                )));
            }
        }
        let (a, b, c0) = (t.num(row, rec, 5)?, t.num(row, rec, 6)?, t.num(row, rec, 7)?);
        if a < 0.0 {
            return Err(Error::Validation(format!("{source}:{row}: negative potential {a}")));
        }
        if a > 0.0 && !(b > 0.0) {
            return Err(Error::Validation(format!(
                "{source}:{row}: cost scale must be positive, got {b}"
            )));
        }
        out.push(RenewableParamRecord {
            resource,
            region: rec[1].to_string(),
            scenario: non_empty(&rec[2]),
            subtype,
            kind,
            a,
            b,
            c0,
            quantity_unit: qu.clone(),
            cost_unit: bu.clone(),
            row,
        });
    }
    Ok(out)
}

pub fn load_renewable_params(path: &Path) -> Result<Vec<RenewableParamRecord>> {
    read_renewable_params(open(path)?, &display(path))
}

pub fn read_stock_table<R: Read>(r: R, source: &str, resource: &str) -> Result<Vec<StockRecord>> {
    let t = Table::read(r, source)?;
    t.expect(&["region", "occurrence", "class", "amount", "c_lo", "c_hi"])?;
    let (au, lu, hu) = (t.unit(3)?, t.unit(4)?, t.unit(5)?);
    if lu != hu {
        return Err(Error::parse(
            source,
            1,
            format!("cost bound units differ ({lu} vs {hu})"),
        ));
    }
    let mut out = Vec::with_capacity(t.rows.len());
    for (row, rec) in &t.rows {
        let row = *row;
        let amount = t.num(row, rec, 3)?;
        if amount < 0.0 {
            return Err(Error::Validation(format!("{source}:{row}: negative amount {amount}")));
        }
        let (c_lo, c_hi) = (t.opt_num(row, rec, 4)?, t.opt_num(row, rec, 5)?);
        if let (Some(lo), Some(hi)) = (c_lo, c_hi) {
            if !(lo < hi) {
                return Err(Error::Validation(format!(
                    "{source}:{row}: cost band [{lo}, {hi}] is not increasing"
                )));
            }
        }
        for (i, name) in [(0, "region"), (1, "occurrence"), (2, "class")] {
            if rec[i].is_empty() {
                return Err(Error::parse(source, row, format!("empty {name}")));
            }
        }
        out.push(StockRecord {
            resource: resource.to_string(),
            region: rec[0].to_string(),
            occurrence: rec[1].to_string(),
            class: rec[2].to_string(),
            amount,
            amount_unit: au.clone(),
            c_lo,
            c_hi,
            cost_unit: lu.clone(),
            row,
        });
    }
    Ok(out)
}

pub fn load_stock_table(path: &Path, resource: &str) -> Result<Vec<StockRecord>> {
    read_stock_table(open(path)?, &display(path), resource)
}

/// A printed column total used as a checksum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintedTotal {
    pub table: String,
    pub key: String,
    pub total: f64,
    pub unit: String,
}

pub fn read_printed_totals<R: Read>(r: R, source: &str) -> Result<Vec<PrintedTotal>> {
    let t = Table::read(r, source)?;
    t.expect(&["table", "key", "total", "unit"])?;
    t.rows
        .iter()
        .map(|(row, rec)| {
            Ok(PrintedTotal {
                table: rec[0].to_string(),
                key: rec[1].to_string(),
                total: t.num(*row, rec, 2)?,
                unit: rec[3].to_string(),
            })
        })
        .collect()
}

/// Lower, mode and upper global potentials of one resource.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub resource: String,
    pub nature: String,
    pub lower: f64,
    pub mode: f64,
    pub upper: f64,
    pub unit: String,
}

impl SummaryRow {
    /// Factor from the row's unit to the database quantity unit (PJ/y for
    /// flows, EJ for stocks).
    pub fn to_internal(&self) -> Result<f64> {
        match self.unit.as_str() {
            "EJ/y" => Ok(1000.0),
            "PJ/y" | "EJ" => Ok(1.0),
            "1e3 EJ" => Ok(1000.0),
            u => Err(Error::Unit(format!("unknown summary unit '{u}' for {}", self.resource))),
        }
    }
}

pub fn read_summary<R: Read>(r: R, source: &str) -> Result<Vec<SummaryRow>> {
    let t = Table::read(r, source)?;
    t.expect(&["resource", "nature", "lower", "mode", "upper", "unit"])?;
    t.rows
        .iter()
        .map(|(row, rec)| {
            let s = SummaryRow {
                resource: rec[0].to_string(),
                nature: rec[1].to_string(),
                lower: t.num(*row, rec, 2)?,
                mode: t.num(*row, rec, 3)?,
                upper: t.num(*row, rec, 4)?,
                unit: rec[5].to_string(),
            };
            if !(s.lower <= s.mode && s.mode <= s.upper && s.lower >= 0.0) {
                return Err(Error::Validation(format!(
                    "{source}:{row}: bounds for {} are not ordered",
                    s.resource
                )));
            }
            s.to_internal()?;
            Ok(s)
        })
        .collect()
}

pub(crate) fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn display(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Column sums of the renewable table keyed like the printed totals:
/// `resource`, `geothermal/<subtype>` or `biomass/<scenario>`. Each entry
/// also carries the number of rows summed.
pub fn renewable_sums(records: &[RenewableParamRecord]) -> BTreeMap<String, (f64, usize)> {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in records {
        let key = match (r.resource.as_str(), &r.scenario, &r.subtype) {
            ("biomass", Some(s), _) => format!("biomass/{s}"),
            ("geothermal", _, Some(s)) => format!("geothermal/{s}"),
            (res, _, _) => res.to_string(),
        };
        let e = sums.entry(key).or_default();
        e.0 += r.a;
        e.1 += 1;
    }
    sums
}

/// Column sums of a stock table keyed `occurrence/class`, or `class/ceiling`
/// for uranium and `class` for thorium, matching the printed totals.
pub fn stock_sums(records: &[StockRecord]) -> BTreeMap<String, (f64, usize)> {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in records {
        let key = match r.resource.as_str() {
            "uranium" => match r.c_hi {
                Some(c) => format!("{}/{}", r.class, c),
                None => format!("{}/unassigned", r.class),
            },
            "thorium" => r.class.clone(),
            _ => format!("{}/{}", r.occurrence, r.class),
        };
        let e = sums.entry(key).or_default();
        e.0 += r.amount;
        e.1 += 1;
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "resource,region,scenario,subtype,kind,A [PJ/y],B [USD2008/MWh],C0 [USD2008/MWh]\n";

    #[test]
    fn renewable_rows() {
        let src = format!("{HEADER}hydro,USA,,,hierarchical,5746,198.40,1.40\nbiomass,Africa,A2,,2,100,3.1,-0.86\n");
        let recs = read_renewable_params(src.as_bytes(), "r").unwrap();
        assert_eq!((recs[0].a, recs[0].b, recs[0].c0), (5746.0, 198.40, 1.40));
        assert_eq!(recs[1].kind, DistributionKind::NearlyIdentical);
        assert_eq!(recs[1].c0, -0.86);
        assert_eq!(recs[1].scenario.as_deref(), Some("A2"));
        assert_eq!(recs[0].row, 2);
    }

    #[test]
    fn renewable_errors_carry_rows() {
        let src = format!("{HEADER}hydro,USA,,,hierarchical,5746,198.40,1.40\nwind,USA,,,hierarchical,x,1,1\n");
        assert!(matches!(
            read_renewable_params(src.as_bytes(), "r"),
            Err(Error::Parse { row: 3, .. })
        ));
        let src = format!("{HEADER}solar,USA,,,hierarchical,1,1,1\n");
        assert!(matches!(
            read_renewable_params(src.as_bytes(), "r"),
            Err(Error::Validation(_))
        ));
        let src = format!("{HEADER}hydro,USA,,,hierarchical,-1,1,1\n");
        assert!(matches!(
            read_renewable_params(src.as_bytes(), "r"),
            Err(Error::Validation(_))
        ));
        let src = "resource,region,kind\nhydro,USA,h\n";
        assert!(matches!(
            read_renewable_params(src.as_bytes(), "r"),
            Err(Error::Parse { row: 1, .. })
        ));
        let src = format!("{HEADER}hydro,USA,,,hierarchical,1,1\n");
        assert!(matches!(
            read_renewable_params(src.as_bytes(), "r"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn stock_rows() {
        let src = "# note\nregion,occurrence,class,amount [t],c_lo [USD2008/kg],c_hi [USD2008/kg]\n\
                   Canada,uranium,rar,267100,,40\nUSA,uranium,speculative,482000,,\n";
        let recs = read_stock_table(src.as_bytes(), "u", "uranium").unwrap();
        assert_eq!(recs[0].c_hi, Some(40.0));
        assert_eq!(recs[0].amount_unit, "t");
        assert_eq!(recs[1].c_hi, None);
        assert_eq!(recs[0].row, 3);
        let sums = stock_sums(&recs);
        assert_eq!(sums["rar/40"].0, 267_100.0);
        assert_eq!(sums["speculative/unassigned"].0, 482_000.0);
    }

    #[test]
    fn stock_validation() {
        let h = "region,occurrence,class,amount [Mt],c_lo [USD2008/t],c_hi [USD2008/t]\n";
        let neg = format!("{h}USA,hard_coal,reserves_proven,-5,20,50\n");
        assert!(matches!(
            read_stock_table(neg.as_bytes(), "c", "coal"),
            Err(Error::Validation(_))
        ));
        let band = format!("{h}USA,hard_coal,reserves_proven,5,50,20\n");
        assert!(matches!(
            read_stock_table(band.as_bytes(), "c", "coal"),
            Err(Error::Validation(_))
        ));
    }
}
