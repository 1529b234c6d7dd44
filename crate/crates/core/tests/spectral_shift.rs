use std::sync::Arc;

use entcone::evolution::{duhamel_residual_norm, evolve, propagator_leakage, DensityOperator, ModelCaches};
use entcone::lattice::{LatticeGeometry, Region};
use entcone::linalg::{identity, max_abs_entry, random_density, c, trace_norm};
use entcone::model::{b_ops, build_model, BipartiteModel, CouplingOperator, ShiftPolicy, SystemAHamiltonian, SystemBSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chain_model(shift: ShiftPolicy) -> BipartiteModel {
    let g = Arc::new(LatticeGeometry::chain(12).unwrap());
    let a = SystemAHamiltonian::nearest_neighbor(g.clone(), 1.0, None, shift).unwrap();
    let b = SystemBSpec::from_levels(&[0.0, 0.4]).unwrap();
    let i = CouplingOperator::density(Region::range(&g, 5, 6).unwrap(), &b_ops::sigma_x(2), 0.3).unwrap();
    build_model(a, b, i, false).unwrap()
}

#[test]
fn constant_shift_moves_hab_by_a_multiple_of_identity() {
    let auto = chain_model(ShiftPolicy::Auto);
    let s = auto.system_a().spectral_shift();
    assert!(s > 0.0, "free hopping has negative spectrum");
    let shifted = chain_model(ShiftPolicy::Fixed(s + 3.0));
    let diff = shifted.hab() - auto.hab() - identity(auto.dim()) * c(3.0, 0.0);
    assert!(max_abs_entry(&diff) < 1e-12);
    let g = auto.geometry().clone();
    let too_low = SystemAHamiltonian::nearest_neighbor(g, 1.0, None, ShiftPolicy::Fixed(s - 1.0));
    assert!(too_low.is_err());
}

#[test]
fn observables_are_shift_invariant() {
    let auto = chain_model(ShiftPolicy::Auto);
    let s = auto.system_a().spectral_shift();
    let shifted = chain_model(ShiftPolicy::Fixed(s + 3.0));
    let (ca, cb) = (ModelCaches::new(&auto).unwrap(), ModelCaches::new(&shifted).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let gamma0 = DensityOperator::new(random_density(&mut rng, auto.dim(), 2), 2).unwrap();
    let g = auto.geometry().clone();
    let x = Region::range(&g, 9, 11).unwrap();
    let y = Region::range(&g, 5, 6).unwrap();
    for t in [0.3, 1.0, 2.5] {
        let (ga, gb) = (evolve(&gamma0, &ca.coupled, t).unwrap(), evolve(&gamma0, &cb.coupled, t).unwrap());
        assert!(trace_norm(&(ga.matrix() - gb.matrix())) < 1e-12);
        let ra = duhamel_residual_norm(&x, &gamma0, t, &ca).unwrap();
        let rb = duhamel_residual_norm(&x, &gamma0, t, &cb).unwrap();
        assert!((ra - rb).abs() < 1e-12, "{ra} {rb}");
        let la = propagator_leakage(&x, &y, &ca.system_a, t).unwrap();
        let lb = propagator_leakage(&x, &y, &cb.system_a, t).unwrap();
        assert!((la - lb).abs() < 1e-12);
    }
}
