//! Fits `log v ≈ log C - μ d + μ c t` to the free-chain leakage table and
//! compares the fitted speed with `c(μ_fit)`.
//!
//! cargo run --release --example light_cone_fit

use std::sync::Arc;

use entcone::evolution::{propagator_leakage, HamiltonianSource, SpectralCache};
use entcone::lattice::{LatticeGeometry, Region};
use entcone::lightcone::{
    arrival_time, envelope_violations, fit_envelope, reference_cone_speed, velocity_at_fit, Field, FitOptions,
    ProbeRole, SweepSample,
};
use entcone::model::{ShiftPolicy, SystemAHamiltonian};

fn main() -> entcone::error::Result<()> {
    let g = Arc::new(LatticeGeometry::chain(64)?);
    let h = SystemAHamiltonian::nearest_neighbor(g.clone(), 1.0, None, ShiftPolicy::Auto)?;
    let cache = SpectralCache::new(h.matrix(), HamiltonianSource::SystemA)?;
    let y = Region::new(&g, [20])?;
    let mut samples = vec![];
    for d in 6..=24 {
        let x = Region::range(&g, 20 + d, 63)?;
        for i in 2..=32 {
            let t = 0.25 * i as f64;
            samples.push(SweepSample {
                row: samples.len(),
                probe: format!("X{d}"),
                role: ProbeRole::Far,
                d: d as f64,
                d_xq: f64::INFINITY,
                d_prime: 0.0,
                t,
                residual: 0.0,
                leakage: Some(propagator_leakage(&x, &y, &cache, t)?),
                negativity: 0.0,
                sep_lower: 0.0,
                sn_witness: 0,
                weight: 0.0,
            });
        }
    }
    let fit = fit_envelope(&samples, Field::Leakage, reference_cone_speed(1.0, 0.5), &FitOptions::default())?;
    println!(
        "mu_fit = {:.4}, c_fit = {:.4}, c(mu_fit) = {:.4}, rms = {:.3}, {} samples, {} exclusion passes",
        fit.mu_fit,
        fit.c_fit,
        velocity_at_fit(1.0, fit.mu_fit)?,
        fit.rms_log_residual,
        fit.samples_used,
        fit.exclusion_passes
    );
    println!("samples above envelope + 3 rms: {}", envelope_violations(&samples, &fit).len());
    for d in [8, 12, 16, 20, 24] {
        let t = arrival_time(&samples, Field::Leakage, d as f64, 0.05)?;
        println!("d = {d:>2}: leakage first exceeds 0.05 at t = {t:?}");
    }
    Ok(())
}
