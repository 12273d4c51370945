//! Monte Carlo draws of wind supply curves from the lower/mode/upper envelope.
//!
//! `cargo run --example envelope_sampling [N] [SEED]`

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rescurve::curveset::EnvelopeSampler;
use rescurve::ingest::{build_all, BuildConfig, Resource, GLOBAL};

fn main() -> rescurve::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let (db, _) = build_all(&dir, &BuildConfig::default())?;
    let env = db.envelope(Resource::Wind, GLOBAL)?;
    let sampler = EnvelopeSampler::new(env)?;
    let (l, m, u) = env.potentials();
    println!("wind envelope totals: lower {l:.0}, mode {m:.0}, upper {u:.0} PJ/y");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut totals = Vec::with_capacity(n);
    for _ in 0..n {
        let q: f64 = rng.gen_range(f64::EPSILON..1.0);
        totals.push(sampler.total(q)?);
    }
    totals.sort_by(f64::total_cmp);
    for p in [0.02, 0.25, 0.5, 0.75, 0.98] {
        let i = ((n - 1) as f64 * p).round() as usize;
        println!("  {:>3.0}% of draws below {:>9.0} PJ/y", 100.0 * p, totals[i]);
    }

    // A full curve for one draw: what it supplies below 150 USD/MWh.
    let curve = sampler.curve(0.9)?;
    println!(
        "draw at the 90% level: {:.0} PJ/y in total, {:.0} below 150 USD/MWh",
        curve.potential(),
        curve.cumulative(150.0)
    );
    Ok(())
}
