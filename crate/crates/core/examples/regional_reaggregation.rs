//! Splitting regional solar curves among member countries and summing them
//! into a different grouping.
//!
//! `cargo run --example regional_reaggregation`

use std::collections::BTreeMap;
use std::path::PathBuf;

use rescurve::atlas::{disaggregate_curve, reaggregate, ProxyWeights, RegionDef, RegionSet};
use rescurve::curveset::Bound;
use rescurve::ingest::{build_all, BuildConfig, Resource};

fn main() -> rescurve::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let (db, _) = build_all(&dir, &BuildConfig::default())?;
    let regions = RegionSet::from_file(&dir.join("regions.csv"))?;

    // Equal shares within each region stand in for a real proxy such as land area.
    let weights = ProxyWeights::equal(regions.countries());
    let mut countries = BTreeMap::new();
    for def in &regions.regions {
        let curve = db.curve(Resource::Solar, &def.name, Bound::Mode)?;
        countries.extend(disaggregate_curve(curve, &weights.restricted(&def.members))?);
    }
    println!("{} country curves", countries.len());

    // Two new groups plus everything else.
    let north = ["USA", "CAN", "MEX"];
    let nordic = ["NOR", "SWE", "FIN", "DNK", "ISL"];
    let named: Vec<&str> = north.iter().chain(&nordic).copied().collect();
    let rest: Vec<String> = regions
        .countries()
        .filter(|c| !named.contains(c))
        .map(str::to_string)
        .collect();
    let grouping = RegionSet::new(vec![
        RegionDef {
            name: "North America".into(),
            members: north.iter().map(|s| s.to_string()).collect(),
        },
        RegionDef {
            name: "Nordic".into(),
            members: nordic.iter().map(|s| s.to_string()).collect(),
        },
        RegionDef {
            name: "Rest of world".into(),
            members: rest,
        },
    ])?;
    let grouped = reaggregate(&countries, &grouping)?;
    let mut sum = 0.0;
    for (name, curve) in &grouped {
        sum += curve.potential();
        println!(
            "{name:<14} {:>10.0} PJ/y, {:>9.0} below 1000 USD/MWh",
            curve.potential(),
            curve.cumulative(1000.0)
        );
    }
    let regional: f64 = regions
        .regions
        .iter()
        .map(|d| db.curve(Resource::Solar, &d.name, Bound::Mode).map(|c| c.potential()))
        .sum::<rescurve::Result<f64>>()?;
    println!("sum of groups {sum:.1} PJ/y, sum of source regions {regional:.1} PJ/y");
    Ok(())
}
