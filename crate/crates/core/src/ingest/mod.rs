//! Loading the canonical data tables and building the envelope database.
//!
//! A data directory holds the CSV tables listed in [`DATA_FILES`]. Stocks
//! are stored in EJ with costs in USD2008/GJ; renewable flows in PJ/y with
//! costs in USD2008/MWh.

pub mod recipes;
pub mod records;
pub mod report;
pub mod units;

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::atlas::RegionSet;
use crate::curveset::{Bound, CompositeCurve, Envelope};
use crate::distcore::Units;
use crate::error::{Error, Result};

pub use recipes::{
    build_renewable, build_stock, build_uranium, fit_uranium_classes, stock_recipes, uranium_points, InclusionRule,
    ScenarioRecipe,
};
pub use records::{
    load_renewable_params, load_stock_table, read_printed_totals, read_renewable_params, read_stock_table,
    read_summary, renewable_sums, stock_sums, PrintedTotal, RenewableParamRecord, StockRecord, SummaryRow,
};
pub use report::{BuildReport, ChecksumLine, ChecksumStatus, FitSummary, TotalLine};
pub use units::{BuildConfig, UnitTable};

/// Region key of the world-total envelope.
pub const GLOBAL: &str = "global";

pub const DATA_FILES: [&str; 9] = [
    "regions.csv",
    "summary.csv",
    "printed_totals.csv",
    "renewables.csv",
    "oil.csv",
    "gas.csv",
    "coal.csv",
    "uranium.csv",
    "thorium.csv",
];

/// Stock tables and the resource tag their rows carry.
const STOCK_TABLES: [(&str, &str); 5] = [
    ("oil", "oil.csv"),
    ("gas", "gas.csv"),
    ("coal", "coal.csv"),
    ("uranium", "uranium.csv"),
    ("thorium", "thorium.csv"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nature {
    Flow,
    Stock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    Wind,
    Solar,
    Hydro,
    Geothermal,
    Biomass,
    Ocean,
    Oil,
    Gas,
    HardCoal,
    SoftCoal,
    Uranium,
    Thorium,
}

impl Resource {
    pub const ALL: [Resource; 12] = [
        Resource::Wind,
        Resource::Solar,
        Resource::Hydro,
        Resource::Geothermal,
        Resource::Biomass,
        Resource::Ocean,
        Resource::Oil,
        Resource::Gas,
        Resource::HardCoal,
        Resource::SoftCoal,
        Resource::Uranium,
        Resource::Thorium,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Resource::Wind => "wind",
            Resource::Solar => "solar",
            Resource::Hydro => "hydro",
            Resource::Geothermal => "geothermal",
            Resource::Biomass => "biomass",
            Resource::Ocean => "ocean",
            Resource::Oil => "oil",
            Resource::Gas => "gas",
            Resource::HardCoal => "hard_coal",
            Resource::SoftCoal => "soft_coal",
            Resource::Uranium => "uranium",
            Resource::Thorium => "thorium",
        }
    }

    pub fn nature(self) -> Nature {
        match self {
            Resource::Wind
            | Resource::Solar
            | Resource::Hydro
            | Resource::Geothermal
            | Resource::Biomass
            | Resource::Ocean => Nature::Flow,
            _ => Nature::Stock,
        }
    }
}

impl std::fmt::Display for Resource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Resource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Resource::ALL
            .into_iter()
            .find(|r| r.as_str() == key)
            .ok_or_else(|| Error::Validation(format!("unknown resource '{s}'")))
    }
}

/// Envelopes of one resource, world and per region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceCurves {
    pub resource: Resource,
    pub nature: Nature,
    pub units: Units,
    pub global: Envelope,
    pub regions: BTreeMap<String, Envelope>,
    /// Alternative mode curves by scenario, keyed by region (including
    /// [`GLOBAL`]). Only biomass has scenarios.
    pub scenarios: BTreeMap<String, BTreeMap<String, CompositeCurve>>,
}

impl ResourceCurves {
    pub fn envelope(&self, region: &str) -> Option<&Envelope> {
        if region.eq_ignore_ascii_case(GLOBAL) {
            Some(&self.global)
        } else {
            self.regions.get(region)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Database {
    pub regions: Vec<String>,
    pub resources: BTreeMap<Resource, ResourceCurves>,
}

impl Database {
    pub fn get(&self, resource: Resource) -> Result<&ResourceCurves> {
        self.resources
            .get(&resource)
            .ok_or_else(|| Error::Validation(format!("database has no {resource} curves")))
    }

    pub fn envelope(&self, resource: Resource, region: &str) -> Result<&Envelope> {
        self.get(resource)?
            .envelope(region)
            .ok_or_else(|| Error::Validation(format!("no {resource} envelope for region '{region}'")))
    }

    pub fn curve(&self, resource: Resource, region: &str, bound: Bound) -> Result<&CompositeCurve> {
        Ok(self.envelope(resource, region)?.curve(bound))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&text)
    }
}

/// Loaded and validated tables.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub regions: RegionSet,
    pub summary: Vec<SummaryRow>,
    pub printed: Vec<PrintedTotal>,
    pub renewables: Vec<RenewableParamRecord>,
    /// Keyed by table name (`oil`, `gas`, `coal`, `uranium`, `thorium`).
    pub stocks: BTreeMap<String, Vec<StockRecord>>,
}

impl DataSet {
    pub fn load(dir: &Path) -> Result<Self> {
        for f in DATA_FILES {
            let p = dir.join(f);
            if !p.is_file() {
                return Err(Error::MissingFile(p));
            }
        }
        let regions = RegionSet::from_file(&dir.join("regions.csv"))?;
        let summary = read_summary(records::open(&dir.join("summary.csv"))?, "summary.csv")?;
        let printed = read_printed_totals(records::open(&dir.join("printed_totals.csv"))?, "printed_totals.csv")?;
        let renewables = load_renewable_params(&dir.join("renewables.csv"))?;
        let mut stocks = BTreeMap::new();
        for (table, file) in STOCK_TABLES {
            stocks.insert(table.to_string(), load_stock_table(&dir.join(file), table)?);
        }
        Ok(DataSet {
            regions,
            summary,
            printed,
            renewables,
            stocks,
        })
    }

    pub fn region_names(&self) -> Vec<String> {
        self.regions.names().map(str::to_string).collect()
    }

    pub fn summary_row(&self, resource: Resource) -> Result<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.resource == resource.as_str())
            .ok_or_else(|| Error::Validation(format!("summary table has no row for {resource}")))
    }

    pub fn stock(&self, table: &str) -> &[StockRecord] {
        self.stocks.get(table).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Every printed total compared with the loaded rows.
    pub fn checksums(&self) -> Vec<ChecksumLine> {
        let mut sums = BTreeMap::new();
        sums.insert("renewables".to_string(), renewable_sums(&self.renewables));
        for (t, rows) in &self.stocks {
            sums.insert(t.clone(), stock_sums(rows));
        }
        self.printed
            .iter()
            .map(|p| ChecksumLine::compare(p, sums.get(&p.table).and_then(|s| s.get(&p.key)).copied()))
            .collect()
    }
}

fn stock_table(resource: Resource) -> &'static str {
    match resource {
        Resource::HardCoal | Resource::SoftCoal => "coal",
        r => r.as_str(),
    }
}

/// Builds one resource from loaded tables. Uranium also returns its fits.
pub fn build_resource(
    resource: Resource,
    data: &DataSet,
    cfg: &BuildConfig,
) -> Result<(ResourceCurves, Vec<FitSummary>)> {
    let regions = data.region_names();
    match resource.nature() {
        Nature::Flow => {
            recipes::check_region_coverage(&data.renewables, &regions)?;
            let curves = build_renewable(resource, &data.renewables, data.summary_row(resource)?, &regions, cfg)?;
            Ok((curves, Vec::new()))
        }
        Nature::Stock => {
            let rows = data.stock(stock_table(resource));
            check_stock_regions(resource, rows, &regions)?;
            if resource == Resource::Uranium {
                build_uranium(rows, &regions, cfg)
            } else {
                Ok((build_stock(resource, rows, &regions, cfg)?, Vec::new()))
            }
        }
    }
}

/// Each of the named regions must appear in the table; other region names
/// are allowed and count toward world totals only.
fn check_stock_regions(resource: Resource, rows: &[StockRecord], regions: &[String]) -> Result<()> {
    let missing: Vec<&str> = regions
        .iter()
        .map(String::as_str)
        .filter(|g| !rows.iter().any(|r| r.region == *g))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{resource} table lacks regions {}",
            missing.join(", ")
        )))
    }
}

/// Loads every table in `data_dir` and builds all twelve resources. Failures
/// of individual resources are collected into one [`Error::Build`].
pub fn build_all(data_dir: &Path, cfg: &BuildConfig) -> Result<(Database, BuildReport)> {
    let data = DataSet::load(data_dir)?;
    build_from(&data, cfg)
}

pub fn build_from(data: &DataSet, cfg: &BuildConfig) -> Result<(Database, BuildReport)> {
    let mut report = BuildReport {
        checksums: data.checksums(),
        ..BuildReport::default()
    };
    let mut resources = BTreeMap::new();
    let mut failures = Vec::new();
    for r in Resource::ALL {
        match build_resource(r, data, cfg) {
            Ok((curves, fits)) => {
                report.fits.extend(fits);
                resources.insert(r, curves);
            }
            Err(e) => failures.push(format!("{r}: {} ({})", e, e.kind())),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Build(failures));
    }

    for (r, curves) in &resources {
        let s = data.summary_row(*r)?;
        let scale = s.to_internal()?;
        let (l, m, u) = curves.global.potentials();
        for (bound, v, target) in [
            (Bound::Lower, l, s.lower),
            (Bound::Mode, m, s.mode),
            (Bound::Upper, u, s.upper),
        ] {
            report.totals.push(TotalLine {
                resource: r.to_string(),
                bound,
                computed: v / scale,
                published: target,
                unit: s.unit.clone(),
            });
        }
    }

    let regions = data.region_names();
    for (table, rows) in &data.stocks {
        let outside: f64 = rows
            .iter()
            .filter(|r| !regions.contains(&r.region))
            .map(|r| r.amount)
            .sum();
        if outside > 0.0 {
            report.unallocated.insert(table.clone(), outside);
        }
    }
    add_notes(data, cfg, &mut report)?;
    Ok((Database { regions, resources }, report))
}

fn add_notes(data: &DataSet, cfg: &BuildConfig, report: &mut BuildReport) -> Result<()> {
    let bad: Vec<String> = report
        .checksums
        .iter()
        .filter(|c| c.status != ChecksumStatus::Exact)
        .map(|c| format!("{}:{} {} vs {} ({:?})", c.table, c.key, c.computed, c.printed, c.status))
        .collect();
    if !bad.is_empty() {
        report
            .notes
            .push(format!("row sums differing from printed totals: {}", bad.join("; ")));
    }
    let identified: f64 = data
        .stock("thorium")
        .iter()
        .filter(|r| r.class == "identified")
        .map(|r| r.amount)
        .sum();
    let th_mode = report.total("thorium", Bound::Mode).map(|t| (t.computed, t.published));
    if let Some((computed, published)) = th_mode {
        report.notes.push(format!(
            "thorium mode from RAR + inferred is {computed:.2} 1e3 EJ against {published}; the identified class alone gives {:.2}",
            cfg.units.to_energy(identified, "thorium")? / 1000.0
        ));
    }
    let (direct, fit) = fit_uranium_classes(data.stock("uranium"), &["rar", "inferred"], "rar+inferred", cfg)?;
    report.notes.push(format!(
        "uranium RAR + inferred fitted directly: A {:.0} t = {:.2} 1e3 EJ",
        direct.a,
        fit.a_energy / 1000.0
    ));
    report.fits.push(fit);
    Ok(())
}
