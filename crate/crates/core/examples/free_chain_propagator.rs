//! Free hopping on an open chain: propagator magnitudes and region leakage.
//!
//! cargo run --example free_chain_propagator

use std::sync::Arc;

use entcone::evolution::{propagator_leakage, HamiltonianSource, SpectralCache};
use entcone::lattice::{LatticeGeometry, Region};
use entcone::model::{ShiftPolicy, SystemAHamiltonian};

fn main() -> entcone::error::Result<()> {
    let g = Arc::new(LatticeGeometry::chain(64)?);
    let h = SystemAHamiltonian::nearest_neighbor(g.clone(), 1.0, None, ShiftPolicy::Auto)?;
    println!("L = 64, tau = 1, spectral shift {:.6}", h.spectral_shift());
    let cache = SpectralCache::new(h.matrix(), HamiltonianSource::SystemA)?;

    // |<32|e^{-iHt}|32+n>| spreads ballistically at speed 2.
    for t in [1.0, 3.0, 6.0] {
        let u = cache.propagator(t);
        let row: Vec<String> = (0..=16).step_by(2).map(|n| format!("{:.1e}", u[(32, 32 + n)].norm())).collect();
        println!("t = {t}: {}", row.join(" "));
    }

    let y = Region::new(&g, [20])?;
    println!("\n d   leakage at t = 1, 2, 4, 8");
    for d in [4, 8, 12, 16, 20] {
        let x = Region::range(&g, 20 + d, 63)?;
        let vals: Result<Vec<_>, _> = [1.0, 2.0, 4.0, 8.0].iter().map(|&t| propagator_leakage(&x, &y, &cache, t)).collect();
        let vals: Vec<String> = vals?.iter().map(|v| format!("{v:.3e}")).collect();
        println!("{d:>2}   {}", vals.join("  "));
    }
    Ok(())
}
