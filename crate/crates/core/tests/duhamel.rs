mod common;

use common::reference_config;
use entcone::evolution::{
    duhamel_reconstruction, duhamel_residual_norm, evolve, free_evolve, localized_trace_norm, ModelCaches,
};
use entcone::harness::config::InitialStateRecipe;
use entcone::harness::make_initial_state;
use entcone::harness::run::{build_geometry, build_scenario_model};
use entcone::lattice::Region;
use entcone::linalg::trace_norm;

#[test]
fn quadrature_reconstructs_exact_evolution() {
    let cfg = reference_config();
    let g = build_geometry(&cfg).unwrap();
    let model = build_scenario_model(&cfg, &g).unwrap();
    let caches = ModelCaches::new(&model).unwrap();
    let q = Region::new(&g, cfg.regions.q.clone()).unwrap();
    // Start on Y so the integral term is far from negligible.
    for recipe in [cfg.initial_state.clone(), InitialStateRecipe::Product { site: 11, level: 0 }] {
        let (gamma0, _) = make_initial_state(&recipe, &model, &q).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let (rec, intervals) = duhamel_reconstruction(&gamma0, t, &model, &caches, 0.01).unwrap();
            let exact = evolve(&gamma0, &caches.coupled, t).unwrap();
            let err = trace_norm(&(rec - exact.matrix()));
            assert!(err < 1e-6, "{} at t = {t}: {err:e} with {intervals} intervals", recipe.label());
        }
    }
}

#[test]
fn residual_equals_localized_integral_term() {
    let cfg = reference_config();
    let g = build_geometry(&cfg).unwrap();
    let model = build_scenario_model(&cfg, &g).unwrap();
    let caches = ModelCaches::new(&model).unwrap();
    let q = Region::new(&g, cfg.regions.q.clone()).unwrap();
    let x = Region::range(&g, 20, 23).unwrap();
    for recipe in [cfg.initial_state.clone(), InitialStateRecipe::Product { site: 12, level: 1 }] {
        let (gamma0, _) = make_initial_state(&recipe, &model, &q).unwrap();
        let t = 1.0;
        let value = duhamel_residual_norm(&x, &gamma0, t, &caches).unwrap();
        let (rec, _) = duhamel_reconstruction(&gamma0, t, &model, &caches, 0.01).unwrap();
        let free = free_evolve(&gamma0, &caches.free, t).unwrap();
        let oracle = localized_trace_norm(&(rec - free.matrix()), &x, 2);
        assert!((value - oracle).abs() < 1e-6, "{value:e} vs {oracle:e}");
    }
}

#[test]
fn residual_vanishes_without_coupling() {
    let mut cfg = reference_config();
    cfg.coupling.strength = 0.0;
    let g = build_geometry(&cfg).unwrap();
    let model = build_scenario_model(&cfg, &g).unwrap();
    let caches = ModelCaches::new(&model).unwrap();
    let q = Region::new(&g, cfg.regions.q.clone()).unwrap();
    let (gamma0, _) = make_initial_state(&cfg.initial_state, &model, &q).unwrap();
    for t in [0.0, 0.7, 3.0] {
        for x in [Region::full(&g), Region::range(&g, 0, 7).unwrap(), Region::range(&g, 16, 23).unwrap()] {
            assert!(duhamel_residual_norm(&x, &gamma0, t, &caches).unwrap() <= 1e-10);
        }
    }
    let x = Region::range(&g, 0, 23).unwrap();
    assert_eq!(duhamel_residual_norm(&x, &gamma0, 0.0, &caches).unwrap(), 0.0);
}

#[test]
fn coupled_and_free_evolutions_split_once_state_meets_y() {
    let cfg = reference_config();
    let g = build_geometry(&cfg).unwrap();
    let model = build_scenario_model(&cfg, &g).unwrap();
    let caches = ModelCaches::new(&model).unwrap();
    let q = Region::new(&g, [11]).unwrap();
    let (gamma0, _) =
        make_initial_state(&InitialStateRecipe::Product { site: 11, level: 0 }, &model, &q).unwrap();
    let full = evolve(&gamma0, &caches.coupled, 0.5).unwrap();
    let free = free_evolve(&gamma0, &caches.free, 0.5).unwrap();
    assert!(trace_norm(&(full.matrix() - free.matrix())) > 1e-3);
}
