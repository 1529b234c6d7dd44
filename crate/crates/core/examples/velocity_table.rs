//! Cone speeds `c(μ)` for the tight-binding, relativistic and two-particle laws.
//!
//! cargo run --example velocity_table

use entcone::velocity::{c_mu, group_velocity_sup, physical_velocity, velocity_table, DispersionLaw, GridSpec};

fn main() -> entcone::error::Result<()> {
    let laws = [
        DispersionLaw::tight_binding(1.0),
        DispersionLaw::relativistic(1.0)?,
        DispersionLaw::multi_particle(vec![1.0, 2.0])?,
    ];
    let mus = [0.1, 0.25, 0.5, 1.0];
    println!("{:<32} {:>6} {:>12}  sup at |k| -> inf", "law", "mu", "c(mu)");
    for row in velocity_table(&laws, &mus, &GridSpec::default())? {
        println!("{:<32} {:>6} {:>12.8}  {}", row.law, row.mu, row.c_of_mu, row.supremum_at_infinity);
    }
    for law in &laws {
        println!("{:<32} sup |grad omega| = {:.8}", law.label(), group_velocity_sup(law)?);
    }
    let small = c_mu(&laws[0], 0.01, &GridSpec::default())?;
    println!("tight binding c(0.01) = {:.6} (2 tau = 2)", small.c_of_mu);
    println!("tau/hbar = 500/s, spacing 500 nm: c(0) = {:e} nm/s", physical_velocity(500.0, 500.0));
    Ok(())
}
