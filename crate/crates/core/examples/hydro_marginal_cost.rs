//! Marginal cost of hydropower as deployment grows, read from the tabulated
//! global curve of the built database.
//!
//! `cargo run --example hydro_marginal_cost`

use std::path::PathBuf;

use rescurve::curveset::{Bound, DEFAULT_GRID_POINTS};
use rescurve::ingest::{build_all, BuildConfig, Resource, GLOBAL};

fn main() -> rescurve::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let (db, _) = build_all(&dir, &BuildConfig::default())?;
    let env = db.envelope(Resource::Hydro, GLOBAL)?;

    for bound in Bound::ALL {
        let curve = env.curve(bound);
        let table = curve.tabulate_default(DEFAULT_GRID_POINTS)?;
        println!(
            "{bound}: potential {:.0} {}",
            table.max_quantity(),
            curve.units.quantity
        );
        for q in [4000.0, 8000.0, 12000.0, 16000.0, 20000.0] {
            match table.invert(q) {
                Ok(c) => println!("  {q:>7} {}  ->  {c:>8.2} {}", curve.units.quantity, curve.units.cost),
                Err(e) => println!("  {q:>7} {}  ->  {e}", curve.units.quantity),
            }
        }
    }
    Ok(())
}
