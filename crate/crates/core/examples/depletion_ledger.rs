//! Cumulative extraction of conventional oil against its mode curve: average
//! and marginal cost per decade under a constant extraction rate.
//!
//! `cargo run --example depletion_ledger [EJ_PER_YEAR]`

use std::path::PathBuf;

use rescurve::curveset::{Bound, DEFAULT_GRID_POINTS};
use rescurve::ingest::{build_all, BuildConfig, Nature, Resource, GLOBAL};
use rescurve::ledger::LedgerState;
use rescurve::Error;

fn main() -> rescurve::Result<()> {
    let rate: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(180.0);
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let (db, _) = build_all(&dir, &BuildConfig::default())?;
    let curve = db.curve(Resource::Oil, GLOBAL, Bound::Mode)?;
    let mut state = LedgerState::new("oil", "global mode", Nature::Stock, curve, DEFAULT_GRID_POINTS)?;
    println!("potential {:.0} EJ, extracting {rate} EJ per year", state.potential());
    println!("decade  cumulative EJ  average USD/GJ  marginal USD/GJ");

    for decade in 0.. {
        let start = 2010 + 10 * decade;
        match state.consume(10.0 * rate) {
            Ok((next, average)) => {
                state = next;
                println!(
                    "{start}s  {:>13.0}  {:>14.2}  {:>15.2}",
                    state.q(),
                    average,
                    state.marginal_cost()?
                );
            }
            Err(Error::Depletion { available, .. }) => {
                println!("{start}s  only {available:.0} EJ left; stopping");
                break;
            }
            Err(e) => return Err(e),
        }
    }
    println!("{}", state.snapshot_json()?);
    Ok(())
}
