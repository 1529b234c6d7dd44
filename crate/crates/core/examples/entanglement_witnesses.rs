//! Negativity, Schmidt-number witness and separability bounds on Werner states
//! and on a localized Bell pair.
//!
//! cargo run --release --example entanglement_witnesses

use std::sync::Arc;

use entcone::entanglement::{
    is_ppt, localize, negativity, schmidt_number_witness, sep_distance_bounds, SeparableSearch,
};
use entcone::evolution::DensityOperator;
use entcone::lattice::{LatticeGeometry, Region};
use entcone::linalg::{c, projector, CMat, CVec, ONE};

fn werner(p: f64) -> CMat {
    let mut psi = CVec::zeros(4);
    psi[1] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[2] = c(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
    projector(&psi) * c(p, 0.0) + CMat::identity(4, 4) * c((1.0 - p) / 4.0, 0.0)
}

fn main() -> entcone::error::Result<()> {
    let search = SeparableSearch::default();
    println!("  p    ppt   negativity  sn>=  sep lower   sep upper   exact");
    for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
        let rho = werner(p);
        let w = schmidt_number_witness(&rho, 2)?;
        let v = sep_distance_bounds(&rho, 2, 1e-3, &search)?;
        println!(
            "{p:.3}  {:<5} {:.6}    {}     {:.6}    {:.6}    {:.6}",
            is_ppt(&rho, 2, 1e-12),
            negativity(&rho, 2),
            w.witness_lower_bound,
            v.lower_bound,
            v.upper_bound,
            (0.75 * (p - 1.0 / 3.0)).max(0.0)
        );
    }

    // Bell pair (|2,0> + |3,1>)/√2 on a 6-site chain, cut by regions.
    let g = Arc::new(LatticeGeometry::chain(6)?);
    let mut psi = CVec::zeros(12);
    psi[4] = ONE;
    psi[7] = ONE;
    let gamma = DensityOperator::pure(&psi, 2)?;
    for sites in [vec![2, 3], vec![0, 1, 2, 3, 4], vec![2], vec![4, 5]] {
        let x = Region::new(&g, sites.clone())?;
        let loc = localize(&gamma, &x)?;
        let sn = if loc.weight() > 0.0 { loc.schmidt_number_witness()?.witness_lower_bound } else { 0 };
        println!("X = {sites:?}: weight {:.2}, negativity {:.3}, schmidt number >= {sn}", loc.weight(), loc.negativity());
    }
    Ok(())
}
