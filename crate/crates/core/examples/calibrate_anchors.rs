//! Calibrating a distribution from two (cost, fraction) anchors, as done for
//! resource classes known only by a total and a cost band.
//!
//! `cargo run --example calibrate_anchors`

use rescurve::calibrate::{band_with_quantiles, from_anchors, stock_from_band, Anchor, CENTRAL_90_QUANTILES};
use rescurve::distcore::DistributionKind;

fn main() -> rescurve::Result<()> {
    // 40% of 500 EJ below 5 USD/GJ and 90% below 12 USD/GJ.
    let (lo, hi) = (Anchor::new(5.0, 0.4)?, Anchor::new(12.0, 0.9)?);
    for kind in [DistributionKind::Hierarchical, DistributionKind::NearlyIdentical] {
        let d = from_anchors(kind, lo, hi, 500.0)?;
        println!(
            "{:<17} B = {:>7.4}  C0 = {:>7.4}  N(5) = {:.2}  N(12) = {:.2}",
            kind.as_str(),
            d.b,
            d.c0,
            d.cumulative(5.0),
            d.cumulative(12.0)
        );
    }

    // A stock class: 1% of the amount below the band's low cost, 90% below its high cost.
    let band = stock_from_band(2600.0, 3.0, 9.0)?;
    println!("\nstock band 3..9: B = {:.4}, C0 = {:.4}", band.b, band.c0);
    // The same band read as a central 90% interval.
    let central = band_with_quantiles(2600.0, 3.0, 9.0, CENTRAL_90_QUANTILES)?;
    println!("central 90% of 3..9: B = {:.4}, C0 = {:.4}", central.b, central.c0);

    // Anchors that cannot describe an increasing curve are rejected.
    let bad = from_anchors(DistributionKind::Hierarchical, hi, lo, 500.0);
    println!("\nswapped anchors: {}", bad.unwrap_err());
    Ok(())
}
