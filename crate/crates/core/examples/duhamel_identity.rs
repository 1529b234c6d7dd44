//! Compares exact coupled evolution with the Duhamel quadrature and prints the
//! localized residual `‖χ̃_X(Γ_t - e^{tL_0}Γ_0)‖_1` on a few probes.
//!
//! cargo run --release --example duhamel_identity

use entcone::evolution::{duhamel_reconstruction, duhamel_residual_norm, evolve, ModelCaches};
use entcone::harness::config::InitialStateRecipe;
use entcone::harness::run::{build_geometry, build_scenario_model};
use entcone::harness::{make_initial_state, ScenarioConfig};
use entcone::lattice::Region;
use entcone::linalg::trace_norm;

fn main() -> entcone::error::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "fixtures/reference.toml".into());
    let cfg = ScenarioConfig::load(path.as_ref())?;
    let g = build_geometry(&cfg)?;
    let model = build_scenario_model(&cfg, &g)?;
    let caches = ModelCaches::new(&model)?;
    let q = Region::new(&g, [11])?;
    let (gamma0, _) = make_initial_state(&InitialStateRecipe::Product { site: 11, level: 0 }, &model, &q)?;

    for t in [0.5, 1.0, 2.0] {
        let (rec, n) = duhamel_reconstruction(&gamma0, t, &model, &caches, 0.01)?;
        let exact = evolve(&gamma0, &caches.coupled, t)?;
        println!("t = {t}: {n} Simpson intervals, trace-norm error {:.2e}", trace_norm(&(rec - exact.matrix())));
    }

    println!("\n d   residual at t = 1, 2, 3, 4");
    for d in [2, 4, 6, 8, 10] {
        let x = Region::range(&g, 12 + d, g.len() - 1)?;
        let vals: Result<Vec<_>, _> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&t| duhamel_residual_norm(&x, &gamma0, t, &caches))
            .collect();
        let vals: Vec<String> = vals?.iter().map(|v| format!("{v:.3e}")).collect();
        println!("{d:>2}   {}", vals.join("  "));
    }
    Ok(())
}
