//! Builds `H_AB` for a chain coupled to a qubit and prints its condition report.
//!
//! cargo run --example bipartite_model

use std::sync::Arc;

use entcone::lattice::{LatticeGeometry, Region};
use entcone::model::{
    b_ops, build_model, lower_bound_check, CouplingOperator, ShiftPolicy, SystemAHamiltonian, SystemBSpec,
};

fn main() -> entcone::error::Result<()> {
    let g = Arc::new(LatticeGeometry::chain(24)?);
    let y = Region::range(&g, 11, 12)?;
    for (name, coupling) in [
        ("density", CouplingOperator::density(y.clone(), &b_ops::sigma_x(2), 0.5)?),
        ("hopping-modulation", CouplingOperator::hopping_modulation(y.clone(), &b_ops::sigma_z(2), 0.5)?),
        ("random-block", CouplingOperator::random_block(y.clone(), 2, 0.5, 7)?),
    ] {
        let a = SystemAHamiltonian::nearest_neighbor(g.clone(), 1.0, None, ShiftPolicy::Auto)?;
        let b = SystemBSpec::from_levels(&[0.0, 0.5])?;
        let model = build_model(a, b, coupling, false)?;
        let r = model.report();
        println!(
            "{name:<20} dim {:>3}  alpha4 {:.6}  alpha5 {:.6}  shift_a {:.4}  min eig of H_AB+1 - (1-a)(H_0+1) {:.2e}",
            model.dim(),
            r.alpha4,
            r.alpha5,
            r.shift_a,
            lower_bound_check(&model)?
        );
    }

    let a = SystemAHamiltonian::nearest_neighbor(g.clone(), 1.0, None, ShiftPolicy::Auto)?;
    let strong = CouplingOperator::density(y, &b_ops::sigma_x(2), 50.0)?;
    match build_model(a, SystemBSpec::trivial(2)?, strong, false) {
        Err(e) => println!("g = 50: {e}"),
        Ok(_) => println!("g = 50 unexpectedly accepted"),
    }
    Ok(())
}
