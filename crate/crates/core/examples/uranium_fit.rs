//! Least-squares fits of cumulative uranium resources against cost ceilings,
//! first for one resource class and then for two classes pooled.
//!
//! `cargo run --example uranium_fit`

use std::path::PathBuf;

use rescurve::distcore::DistributionKind;
use rescurve::fitter::{augment, fit_with, FitOptions};
use rescurve::ingest::{uranium_points, DataSet};

fn main() -> rescurve::Result<()> {
    let data = DataSet::load(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"))?;
    let records = data.stock("uranium");

    for classes in [&["rar"][..], &["rar", "inferred"][..]] {
        let points = uranium_points(records, classes);
        println!("{}:", classes.join(" + "));
        for p in &points {
            println!("  {:>5} USD/kg  {:>10.0} t", p.c, p.n);
        }
        let opts = FitOptions {
            relative: true,
            ..FitOptions::default()
        };
        let res = fit_with(DistributionKind::Hierarchical, &augment(&points, 0.0)?, &opts)?;
        println!(
            "  fit: A = {:.0} t, B = {:.2}, C0 = {:.2}, max residual {:.2}%, converged {}",
            res.dist.a,
            res.dist.b,
            res.dist.c0,
            100.0 * res.max_abs_residual(),
            res.converged
        );
    }
    Ok(())
}
