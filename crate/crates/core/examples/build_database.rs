//! Builds the full envelope database from the bundled tables and prints the
//! build report.
//!
//! `cargo run --example build_database [DATA_DIR]`

use std::path::PathBuf;

use rescurve::ingest::{build_all, BuildConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    let (db, report) = build_all(&dir, &BuildConfig::default())?;
    print!("{}", report.render());
    println!("{} resources, {} regions", db.resources.len(), db.regions.len());
    Ok(())
}
