//! The two distribution families side by side: cumulative potential, density
//! and the inverse (marginal cost at a given quantity).
//!
//! `cargo run --example distributions`

use rescurve::distcore::{Distribution, Units};

fn main() -> rescurve::Result<()> {
    let units = Units::new("EJ", "USD/GJ");
    let hier = Distribution::hierarchical(1000.0, 8.0, 2.0)?.with_units(units.clone());
    let ident = Distribution::nearly_identical(1000.0, 3.0, 2.0)?.with_units(units.clone());

    println!(
        "cost [{}]  hierarchical N, dN/dC  |  nearly identical N, dN/dC",
        units.cost
    );
    for c in [2.0, 3.0, 4.0, 6.0, 10.0, 20.0, 50.0] {
        println!(
            "{c:>6.1}  {:>9.2} {:>8.3}  |  {:>9.2} {:>8.3}",
            hier.cumulative(c),
            hier.density(c),
            ident.cumulative(c),
            ident.density(c)
        );
    }

    println!("\nmarginal cost of the n-th {}:", units.quantity);
    for n in [100.0, 500.0, 900.0, 990.0] {
        println!("{n:>6}  {:>8.3}  |  {:>8.3}", hier.cost_at(n)?, ident.cost_at(n)?);
    }
    match hier.cost_at(1000.0) {
        Err(e) => println!("\nasking for the full potential: {e}"),
        Ok(c) => println!("\nfull potential reached at {c}"),
    }
    Ok(())
}
