//! Scenario recipes: which occurrence classes enter each envelope bound, and
//! the per-resource builders that turn table rows into curves.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::records::{RenewableParamRecord, StockRecord, SummaryRow};
use super::report::FitSummary;
use super::units::BuildConfig;
use super::{Resource, ResourceCurves};
use crate::calibrate::stock_from_band;
use crate::curveset::{aggregate, scale_envelope, Bound, CompositeCurve, Envelope};
use crate::distcore::{Distribution, DistributionKind, Units};
use crate::error::{Error, Result};
use crate::fitter::{augment_with, fit_with, FitOptions, FitPoint};

pub const STOCK_QUANTITY_UNIT: &str = "EJ";
pub const STOCK_COST_UNIT: &str = "USD2008/GJ";
pub const FLOW_QUANTITY_UNIT: &str = "PJ/y";
pub const FLOW_COST_UNIT: &str = "USD2008/MWh";

pub fn stock_units() -> Units {
    Units::new(STOCK_QUANTITY_UNIT, STOCK_COST_UNIT)
}

pub fn flow_units() -> Units {
    Units::new(FLOW_QUANTITY_UNIT, FLOW_COST_UNIT)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionRule {
    pub occurrence: String,
    pub class: String,
    pub multiplier: f64,
}

impl InclusionRule {
    pub fn new(occurrence: &str, class: &str, multiplier: f64) -> Self {
        InclusionRule {
            occurrence: occurrence.into(),
            class: class.into(),
            multiplier,
        }
    }

    fn matches(&self, r: &StockRecord) -> bool {
        r.occurrence == self.occurrence && r.class == self.class
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecipe {
    pub resource: Resource,
    pub bound: Bound,
    pub rules: Vec<InclusionRule>,
}

impl ScenarioRecipe {
    /// Included amount for one region (all regions if `None`), native units.
    pub fn included_mass(&self, records: &[StockRecord], region: Option<&str>) -> f64 {
        records
            .iter()
            .filter(|r| region.is_none_or(|g| r.region == g))
            .map(|r| {
                self.rules
                    .iter()
                    .filter(|rule| rule.matches(r))
                    .map(|rule| rule.multiplier)
                    .sum::<f64>()
                    * r.amount
            })
            .sum()
    }
}

fn all(occurrence: &str, classes: &[&str], multiplier: f64) -> Vec<InclusionRule> {
    classes
        .iter()
        .map(|c| InclusionRule::new(occurrence, c, multiplier))
        .collect()
}

/// Lower, mode and upper recipes of a band-calibrated stock resource.
pub fn stock_recipes(resource: Resource, cfg: &BuildConfig) -> Result<[ScenarioRecipe; 3]> {
    let (lower, mode, upper) = match resource {
        Resource::Oil => {
            let lower = [
                all("crude", &["reserves"], 1.0),
                all("sands", &["reserves"], 1.0),
                all("extra_heavy", &["reserves"], 1.0),
            ]
            .concat();
            let mode = [
                lower.clone(),
                all("crude", &["resources"], 1.0),
                all("sands", &["resources"], 1.0),
                all("extra_heavy", &["resources"], 1.0),
                all("shale", &["resources"], 1.0),
            ]
            .concat();
            let upper = [
                all("crude", &["reserves", "resources"], 1.0),
                all("sands", &["reserves", "resources", "additional"], 1.0),
                all("extra_heavy", &["reserves", "resources", "additional"], 1.0),
                all("shale", &["resources"], 1.0 + cfg.oil_shale_upper_extra),
            ]
            .concat();
            (lower, mode, upper)
        }
        Resource::Gas => {
            let f = cfg.gas_mode_resource_fraction;
            let mode = [
                all("conventional", &["reserves"], 1.0),
                all("shale", &["reserves"], 1.0),
                all("tight", &["reserves"], 1.0),
                all("conventional", &["resources"], f),
                all("shale", &["resources"], f),
                all("tight", &["resources"], f),
                all("coalbed_methane", &["reserves"], cfg.gas_mode_cbm_fraction),
            ]
            .concat();
            let upper = ["conventional", "shale", "tight", "coalbed_methane", "hydrates"]
                .iter()
                .flat_map(|o| all(o, &["reserves", "resources"], 1.0))
                .collect();
            (all("conventional", &["reserves"], 1.0), mode, upper)
        }
        Resource::HardCoal | Resource::SoftCoal => {
            let o = resource.as_str();
            let f = cfg.coal_mode_resource_fraction;
            let mode = [
                all(o, &["reserves_proven", "reserves_probable"], 1.0),
                all(o, &["resources_proven", "resources_probable"], f),
            ]
            .concat();
            let upper = all(
                o,
                &[
                    "reserves_proven",
                    "reserves_probable",
                    "reserves_possible",
                    "resources_proven",
                    "resources_probable",
                    "resources_possible",
                ],
                1.0,
            );
            (all(o, &["reserves_proven"], 1.0), mode, upper)
        }
        Resource::Thorium => (
            all("thorium", &["rar"], 1.0),
            all("thorium", &["rar", "inferred"], 1.0),
            all("thorium", &["rar", "inferred", "identified", "prognosticated"], 1.0),
        ),
        other => return Err(Error::Recipe(format!("{other} is not built from band recipes"))),
    };
    let mk = |bound, rules| ScenarioRecipe { resource, bound, rules };
    Ok([mk(Bound::Lower, lower), mk(Bound::Mode, mode), mk(Bound::Upper, upper)])
}

/// Every rule must name a class present in the records, and included mass
/// must nest `lower <= mode <= upper` in every region.
pub fn check_recipes(recipes: &[ScenarioRecipe; 3], records: &[StockRecord]) -> Result<()> {
    let present: BTreeSet<(&str, &str)> = records
        .iter()
        .map(|r| (r.occurrence.as_str(), r.class.as_str()))
        .collect();
    for recipe in recipes {
        for rule in &recipe.rules {
            if !present.contains(&(rule.occurrence.as_str(), rule.class.as_str())) {
                return Err(Error::Recipe(format!(
                    "{} {} recipe references {}/{}, which the table does not contain",
                    recipe.resource, recipe.bound, rule.occurrence, rule.class
                )));
            }
        }
    }
    let regions: BTreeSet<&str> = records.iter().map(|r| r.region.as_str()).collect();
    for g in regions {
        let [l, m, u] = [0, 1, 2].map(|i| recipes[i].included_mass(records, Some(g)));
        if l > m || m > u {
            return Err(Error::Recipe(format!(
                "{} recipes do not nest in {g}: lower {l}, mode {m}, upper {u}",
                recipes[0].resource
            )));
        }
    }
    Ok(())
}

/// Records of one resource. Coal tables hold both coal kinds, told apart by
/// occurrence.
pub fn select_stock(resource: Resource, records: &[StockRecord]) -> Vec<&StockRecord> {
    records
        .iter()
        .filter(|r| match resource {
            Resource::HardCoal | Resource::SoftCoal => r.occurrence == resource.as_str(),
            _ => true,
        })
        .collect()
}

fn row_distribution(r: &StockRecord, multiplier: f64, commodity: &str, cfg: &BuildConfig) -> Result<Distribution> {
    let (Some(lo), Some(hi)) = (r.c_lo, r.c_hi) else {
        return Err(Error::Validation(format!(
            "{} {} {}/{} has no cost band",
            r.resource, r.region, r.occurrence, r.class
        )));
    };
    let cf = cfg.units.cost_to_per_gj(commodity)?;
    let a = cfg.units.to_energy(r.amount * multiplier, commodity)?;
    Ok(stock_from_band(a, lo * cf, hi * cf)?.with_units(stock_units()))
}

fn curve_label(resource: Resource, region: &str, bound: Bound) -> String {
    format!("{resource} {region} {bound}")
}

/// Builds a band-calibrated stock resource. One hierarchical component per
/// included row, with the rule multiplier applied to its amount.
pub fn build_stock(
    resource: Resource,
    records: &[StockRecord],
    regions: &[String],
    cfg: &BuildConfig,
) -> Result<ResourceCurves> {
    let rows: Vec<StockRecord> = select_stock(resource, records).into_iter().cloned().collect();
    if rows.is_empty() {
        return Err(Error::Recipe(format!("no rows for {resource}")));
    }
    let recipes = stock_recipes(resource, cfg)?;
    check_recipes(&recipes, &rows)?;
    let commodity = resource.as_str();

    let mut by_region: BTreeMap<&str, [CompositeCurve; 3]> = BTreeMap::new();
    for g in regions
        .iter()
        .map(String::as_str)
        .chain(rows.iter().map(|r| r.region.as_str()))
    {
        by_region
            .entry(g)
            .or_insert_with(|| Bound::ALL.map(|b| CompositeCurve::empty(curve_label(resource, g, b), stock_units())));
    }
    for r in &rows {
        if r.amount == 0.0 {
            continue;
        }
        let curves = by_region.get_mut(r.region.as_str()).expect("region registered above");
        for (i, recipe) in recipes.iter().enumerate() {
            let mult: f64 = recipe
                .rules
                .iter()
                .filter(|rule| rule.matches(r))
                .map(|rule| rule.multiplier)
                .sum();
            if mult > 0.0 {
                curves[i].push(row_distribution(r, mult, commodity, cfg)?)?;
            }
        }
    }
    assemble(
        resource,
        regions,
        by_region.into_iter().map(|(g, c)| (g.to_string(), c)).collect(),
    )
}

/// Turns per-region bound curves into envelopes. Regions outside `regions`
/// count toward the global envelope only.
fn assemble(
    resource: Resource,
    regions: &[String],
    by_region: BTreeMap<String, [CompositeCurve; 3]>,
) -> Result<ResourceCurves> {
    let mut out = BTreeMap::new();
    let mut parts: [Vec<CompositeCurve>; 3] = Default::default();
    for (g, curves) in by_region {
        for (i, c) in curves.iter().enumerate() {
            parts[i].push(c.clone());
        }
        if regions.contains(&g) {
            let [l, m, u] = curves;
            out.insert(g, Envelope::new(l, m, u)?);
        }
    }
    let [l, m, u] = [0, 1, 2].map(|i| aggregate(&parts[i]));
    let global = Envelope::new(
        l?.with_label(curve_label(resource, "global", Bound::Lower)),
        m?.with_label(curve_label(resource, "global", Bound::Mode)),
        u?.with_label(curve_label(resource, "global", Bound::Upper)),
    )?;
    Ok(ResourceCurves {
        resource,
        nature: resource.nature(),
        units: global.mode.units.clone(),
        global,
        regions: out,
        scenarios: BTreeMap::new(),
    })
}

/// Uranium cost categories: the lower bound, then the increments added for
/// the mode and the upper bound.
pub const URANIUM_GROUPS: [(&str, &[&str]); 3] = [
    ("rar", &["rar"]),
    ("inferred", &["inferred"]),
    ("prognosticated+speculative", &["prognosticated", "speculative"]),
];

/// Cumulative amount below `ceiling` for one class, treating ceilings as
/// nested steps. Rows without a ceiling are excluded.
fn class_amount_at(rows: &[&StockRecord], class: &str, ceiling: f64) -> f64 {
    let best = rows
        .iter()
        .filter(|r| r.class == class)
        .filter_map(|r| r.c_hi.map(|c| (c, r)))
        .filter(|(c, _)| *c <= ceiling)
        .map(|(c, _)| c)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))));
    match best {
        None => 0.0,
        Some(c) => rows
            .iter()
            .filter(|r| r.class == class && r.c_hi == Some(c))
            .map(|r| r.amount)
            .sum(),
    }
}

/// World `(ceiling, cumulative amount)` points for a set of classes.
pub fn uranium_points(records: &[StockRecord], classes: &[&str]) -> Vec<FitPoint> {
    let rows: Vec<&StockRecord> = records.iter().filter(|r| classes.contains(&r.class.as_str())).collect();
    let mut ceilings: Vec<f64> = records.iter().filter_map(|r| r.c_hi).collect();
    ceilings.sort_by(f64::total_cmp);
    ceilings.dedup();
    ceilings
        .into_iter()
        .map(|c| FitPoint::new(c, classes.iter().map(|k| class_amount_at(&rows, k, c)).sum()))
        .collect()
}

/// Fits the world cumulative of the given classes; quantities in tonnes,
/// costs in USD/kg.
pub fn fit_uranium_classes(
    records: &[StockRecord],
    classes: &[&str],
    label: &str,
    cfg: &BuildConfig,
) -> Result<(Distribution, FitSummary)> {
    let points = uranium_points(records, classes);
    let augmented = augment_with(&points, 0.0, cfg.uranium_saturation_multiplier)?;
    let opts = FitOptions {
        relative: cfg.uranium_relative_residuals,
        ..FitOptions::default()
    };
    let res = fit_with(DistributionKind::Hierarchical, &augmented, &opts)?;
    let observed: Vec<usize> = augmented
        .iter()
        .enumerate()
        .filter(|(_, p)| points.iter().any(|q| q == *p))
        .map(|(i, _)| i)
        .collect();
    let max_abs_residual = observed
        .iter()
        .map(|&i| res.per_point_residuals[i].abs())
        .fold(0.0, f64::max);
    let summary = FitSummary {
        label: label.to_string(),
        points: points.iter().map(|p| (p.c, p.n)).collect(),
        a_tonnes: res.dist.a,
        a_energy: cfg.units.to_energy(res.dist.a, "uranium")?,
        b: res.dist.b,
        c0: res.dist.c0,
        max_abs_residual,
        converged: res.converged,
        iterations: res.iterations,
    };
    Ok((res.dist, summary))
}

/// Builds uranium from fitted cost categories. Each category's world fit is
/// shared out to regions by their share of the category's total mass;
/// amounts without a cost category join the upper increment of their
/// region.
pub fn build_uranium(
    records: &[StockRecord],
    regions: &[String],
    cfg: &BuildConfig,
) -> Result<(ResourceCurves, Vec<FitSummary>)> {
    let resource = Resource::Uranium;
    let qf = cfg.units.ej_per_unit("uranium")?;
    let cf = cfg.units.cost_to_per_gj("uranium")?;
    let top = records.iter().filter_map(|r| r.c_hi).fold(f64::NEG_INFINITY, f64::max);

    let mut by_region: BTreeMap<String, [CompositeCurve; 3]> = BTreeMap::new();
    for g in regions.iter().chain(records.iter().map(|r| &r.region)) {
        by_region
            .entry(g.clone())
            .or_insert_with(|| Bound::ALL.map(|b| CompositeCurve::empty(curve_label(resource, g, b), stock_units())));
    }
    let mut fits = Vec::new();
    for (gi, (label, classes)) in URANIUM_GROUPS.iter().enumerate() {
        let (dist, summary) = fit_uranium_classes(records, classes, label, cfg)?;
        fits.push(summary);
        let dist = dist.rescaled(qf, cf, stock_units())?;
        let in_group = |r: &&StockRecord| classes.contains(&r.class.as_str());
        let mass_at_top = |g: Option<&str>| -> f64 {
            records
                .iter()
                .filter(in_group)
                .filter(|r| g.is_none_or(|g| r.region == g) && r.c_hi == Some(top))
                .map(|r| r.amount)
                .sum()
        };
        let world = mass_at_top(None);
        if !(world > 0.0) {
            return Err(Error::DegenerateData(format!(
                "uranium {label} has no mass at the top cost ceiling"
            )));
        }
        for (g, curves) in by_region.iter_mut() {
            let share = mass_at_top(Some(g)) / world;
            let loose: f64 = if gi == URANIUM_GROUPS.len() - 1 {
                records
                    .iter()
                    .filter(in_group)
                    .filter(|r| r.region == *g && r.c_hi.is_none())
                    .map(|r| r.amount)
                    .sum::<f64>()
                    * qf
            } else {
                0.0
            };
            let a = share * dist.a + loose;
            if a > 0.0 {
                let comp = dist.scaled(a / dist.a)?;
                for c in curves.iter_mut().skip(gi) {
                    c.push(comp.clone())?;
                }
            }
        }
    }
    let mut curves = assemble(resource, regions, by_region)?;
    curves.units = stock_units();
    Ok((curves, fits))
}

/// Renewable resources assembled from the parameter table, in table names.
pub fn renewable_members(resource: Resource) -> Result<&'static [&'static str]> {
    Ok(match resource {
        Resource::Wind => &["wind"],
        Resource::Solar => &["solar"],
        Resource::Hydro => &["hydro"],
        Resource::Geothermal => &["geothermal"],
        Resource::Biomass => &["biomass"],
        Resource::Ocean => &["wave", "tidal"],
        other => return Err(Error::Recipe(format!("{other} is not a renewable flow"))),
    })
}

/// Per-region mode curves from parameter rows; zero-potential rows add
/// nothing.
fn mode_curves(
    resource: Resource,
    rows: &[&RenewableParamRecord],
    regions: &[String],
    tag: &str,
) -> Result<BTreeMap<String, CompositeCurve>> {
    let mut out: BTreeMap<String, CompositeCurve> = regions
        .iter()
        .map(|g| {
            (
                g.clone(),
                CompositeCurve::empty(format!("{resource} {g} {tag}"), flow_units()),
            )
        })
        .collect();
    for r in rows {
        let curve = out.get_mut(&r.region).ok_or_else(|| {
            Error::Validation(format!(
                "{} row {} names unknown region '{}'",
                r.resource, r.row, r.region
            ))
        })?;
        if r.a > 0.0 {
            curve.push(Distribution::new(r.kind, r.a, r.b, r.c0)?.with_units(flow_units()))?;
        }
    }
    Ok(out)
}

/// Resource, subtype and scenario of one table series.
type SeriesKey = (String, Option<String>, Option<String>);

/// Every region must appear once per table series.
pub fn check_region_coverage(records: &[RenewableParamRecord], regions: &[String]) -> Result<()> {
    let mut seen: BTreeMap<SeriesKey, BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        let key = (r.resource.clone(), r.subtype.clone(), r.scenario.clone());
        if !seen.entry(key).or_default().insert(r.region.as_str()) {
            return Err(Error::Validation(format!(
                "{} row {}: duplicate region '{}'",
                r.resource, r.row, r.region
            )));
        }
    }
    for ((res, sub, scen), got) in &seen {
        let missing: Vec<&str> = regions
            .iter()
            .map(String::as_str)
            .filter(|g| !got.contains(g))
            .collect();
        if !missing.is_empty() {
            let series = [Some(res.as_str()), sub.as_deref(), scen.as_deref()]
                .iter()
                .flatten()
                .copied()
                .collect::<Vec<_>>()
                .join("/");
            return Err(Error::Validation(format!(
                "{series} lacks regions {}",
                missing.join(", ")
            )));
        }
    }
    Ok(())
}

/// Builds a renewable flow. The mode comes from the table parameters; lower
/// and upper bounds scale it to the published global totals, and every region
/// uses the global scale factors.
pub fn build_renewable(
    resource: Resource,
    records: &[RenewableParamRecord],
    summary: &SummaryRow,
    regions: &[String],
    cfg: &BuildConfig,
) -> Result<ResourceCurves> {
    let members = renewable_members(resource)?;
    let rows: Vec<&RenewableParamRecord> = records
        .iter()
        .filter(|r| members.contains(&r.resource.as_str()))
        .collect();
    if rows.is_empty() {
        return Err(Error::Recipe(format!("no parameter rows for {resource}")));
    }
    let mut scenarios = BTreeMap::new();
    let mode_rows: Vec<&RenewableParamRecord> = if resource == Resource::Biomass {
        let names: BTreeSet<&str> = rows.iter().filter_map(|r| r.scenario.as_deref()).collect();
        if !names.contains(cfg.biomass_mode_scenario.as_str()) {
            return Err(Error::Recipe(format!(
                "biomass mode scenario '{}' is not in the table",
                cfg.biomass_mode_scenario
            )));
        }
        for s in names {
            let subset: Vec<&RenewableParamRecord> = rows
                .iter()
                .copied()
                .filter(|r| r.scenario.as_deref() == Some(s))
                .collect();
            let mut curves = mode_curves(resource, &subset, regions, s)?;
            let global =
                aggregate(&curves.values().cloned().collect::<Vec<_>>())?.with_label(format!("{resource} global {s}"));
            curves.insert(super::GLOBAL.to_string(), global);
            scenarios.insert(s.to_string(), curves);
        }
        rows.iter()
            .copied()
            .filter(|r| r.scenario.as_deref() == Some(cfg.biomass_mode_scenario.as_str()))
            .collect()
    } else {
        rows
    };

    let modes = mode_curves(resource, &mode_rows, regions, "mode")?;
    let global_mode = aggregate(&modes.values().cloned().collect::<Vec<_>>())?.with_label(curve_label(
        resource,
        "global",
        Bound::Mode,
    ));
    let scale = summary.to_internal()?;
    let (lo, hi) = (summary.lower * scale, summary.upper * scale);
    let total = global_mode.potential();
    if !(total > 0.0) {
        return Err(Error::Recipe(format!("{resource} mode curve has no potential")));
    }
    let (fl, fu) = (lo / total, hi / total);
    if fl > 1.0 || fu < 1.0 {
        return Err(Error::Envelope(format!(
            "{resource} mode total {total} {FLOW_QUANTITY_UNIT} lies outside the published bounds [{lo}, {hi}]"
        )));
    }
    let mut out = BTreeMap::new();
    for (g, mode) in modes {
        let a = mode.potential();
        let env = scale_envelope(&mode, (fl * a).min(a), (fu * a).max(a))?;
        out.insert(g, env);
    }
    let global = scale_envelope(&global_mode, lo, hi)?;
    Ok(ResourceCurves {
        resource,
        nature: resource.nature(),
        units: flow_units(),
        global,
        regions: out,
        scenarios,
    })
}
