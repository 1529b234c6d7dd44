use std::sync::Arc;

use entcone::entanglement::{
    localize, negativity, random_schmidt_rank_state, schmidt_number_witness, schmidt_rank, sep_distance_bounds,
    SeparableSearch, RANK_TOL,
};
use entcone::evolution::DensityOperator;
use entcone::lattice::{LatticeGeometry, Region};
use entcone::linalg::{
    c, kron, partial_trace_a, partial_trace_b, projector, random_density, random_unitary, random_unit_vector,
    trace_norm, CMat, CVec, ONE,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn werner(p: f64) -> CMat {
    let mut psi = CVec::zeros(4);
    psi[1] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[2] = c(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
    projector(&psi) * c(p, 0.0) + CMat::identity(4, 4) * c((1.0 - p) / 4.0, 0.0)
}

#[test]
fn localization_never_raises_schmidt_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10ca1);
    let g = Arc::new(LatticeGeometry::chain(6).unwrap());
    let d_b = 3;
    for _ in 0..200 {
        let k = rng.gen_range(1..=3);
        let psi = random_schmidt_rank_state(&mut rng, 6, d_b, k);
        let members: Vec<usize> = (0..6).filter(|_| rng.gen_bool(0.5)).collect();
        let x = Region::new(&g, members).unwrap();
        let before = schmidt_rank(&psi, d_b, RANK_TOL).unwrap();
        let mut cut = psi.clone();
        for site in 0..6 {
            if !x.contains(site) {
                for l in 0..d_b {
                    cut[site * d_b + l] = c(0.0, 0.0);
                }
            }
        }
        let after = if cut.norm() == 0.0 { 0 } else { schmidt_rank(&cut, d_b, RANK_TOL).unwrap() };
        assert!(after <= before, "{after} > {before}");
        assert!(before <= k);
        // The localized density operator carries the same rank.
        if cut.norm() > 0.0 {
            let gamma = DensityOperator::pure(&psi, d_b).unwrap();
            let loc = localize(&gamma, &x).unwrap();
            let w = schmidt_number_witness(&loc.block(), d_b).unwrap();
            assert_eq!(w.pure_rank, Some(after));
            assert!(w.witness_lower_bound <= after);
        }
    }
}

#[test]
fn werner_ppt_boundary_sits_at_one_third() {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if entcone::entanglement::is_ppt(&werner(mid), 2, 1e-14) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 1.0 / 3.0).abs() < 1e-6, "{lo}");
}

#[test]
fn werner_distance_is_sandwiched_around_exact_value() {
    // Twirling fixes Werner states and preserves separability, so the closest
    // separable state is the boundary Werner state: dist = 3/4 (p - 1/3).
    let search = SeparableSearch::default();
    for p in [0.2, 0.5, 0.8, 1.0] {
        let exact = (0.75 * (p - 1.0 / 3.0_f64)).max(0.0);
        let v = sep_distance_bounds(&werner(p), 2, 1e-3, &search).unwrap();
        assert!(v.lower_bound <= exact + 1e-12, "p = {p}: lower {}", v.lower_bound);
        assert!(v.upper_bound >= exact - 1e-9, "p = {p}: upper {}", v.upper_bound);
        assert!(v.upper_bound - exact < 2e-3, "p = {p}: upper {} vs {exact}", v.upper_bound);
        assert!((v.lower_bound - (3.0 * p - 1.0).max(0.0) / 8.0).abs() < 1e-12);
    }
}

#[test]
fn qubit_pairs_brute_force_upper_bound() {
    // Any product of Bloch-grid pure states mixed with the best weights
    // bounds the distance from above; the search must do at least as well
    // as a coarse grid scan over single products.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let grid: Vec<CVec> = (0..8)
        .flat_map(|i| {
            (0..8).map(move |j| {
                let th = std::f64::consts::PI * (i as f64 + 0.5) / 8.0;
                let ph = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
                CVec::from_vec(vec![c((th / 2.0).cos(), 0.0), c((th / 2.0).sin() * ph.cos(), (th / 2.0).sin() * ph.sin())])
            })
        })
        .collect();
    for _ in 0..10 {
        let rank = 1 + rng.gen_range(0..3);
        let rho = random_density(&mut rng, 4, rank);
        let v = sep_distance_bounds(&rho, 2, 1e-3, &SeparableSearch::default()).unwrap();
        let mut best = f64::INFINITY;
        for a in &grid {
            for b in &grid {
                let prod = projector(&a.kronecker(b));
                best = best.min(0.5 * trace_norm(&(&rho - prod)));
            }
        }
        assert!(v.lower_bound <= v.upper_bound + 1e-12);
        assert!(v.upper_bound <= best + 1e-9, "{} > {best}", v.upper_bound);
        let marginals = kron(&partial_trace_b(&rho, 2), &partial_trace_a(&rho, 2));
        assert!(v.upper_bound <= 0.5 * trace_norm(&(&rho - marginals)) + 1e-12);
    }
}

#[test]
fn separable_mixtures_are_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let mut rho = CMat::zeros(6, 6);
        for _ in 0..5 {
            let a = random_unit_vector(&mut rng, 3);
            let b = random_unit_vector(&mut rng, 2);
            rho += projector(&a.kronecker(&b)) * c(0.2, 0.0);
        }
        let v = sep_distance_bounds(&rho, 2, 1e-3, &SeparableSearch::default()).unwrap();
        assert!(v.lower_bound < 1e-12);
        assert!(v.upper_bound < 1e-3, "{}", v.upper_bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn local_unitaries_preserve_entanglement(seed in any::<u64>(), rank in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng, 6, rank);
        let u = kron(&random_unitary(&mut rng, 3), &random_unitary(&mut rng, 2));
        let turned = &u * &rho * u.adjoint();
        prop_assert!((negativity(&rho, 2) - negativity(&turned, 2)).abs() < 1e-10);
        let (a, b) = (schmidt_number_witness(&rho, 2).unwrap(), schmidt_number_witness(&turned, 2).unwrap());
        prop_assert!((a.pt_trace_norm - b.pt_trace_norm).abs() < 1e-10);
    }

    #[test]
    fn trace_norm_duality(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_unitary(&mut rng, n) * random_density(&mut rng, n, n) * c(3.0, 0.0) - CMat::identity(n, n) * c(0.5, 0.0);
        let norm = trace_norm(&m);
        let svd = m.clone().svd(true, true);
        let optimal = svd.v_t.unwrap().adjoint() * svd.u.unwrap().adjoint();
        prop_assert!(((&optimal * &m).trace().re - norm).abs() < 1e-10 * norm.max(1.0));
        for _ in 0..5 {
            let w = random_unitary(&mut rng, n);
            prop_assert!((&w * &m).trace().re <= norm + 1e-10);
        }
    }

    #[test]
    fn verdict_sandwich(seed in any::<u64>(), rank in 1usize..5, weight in 0.01f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng, 6, rank) * c(weight, 0.0);
        let search = SeparableSearch { iterations: 40, ..SeparableSearch::default() };
        let v = sep_distance_bounds(&rho, 2, 1e-3, &search).unwrap();
        prop_assert!(v.lower_bound >= 0.0);
        prop_assert!(v.lower_bound <= v.upper_bound + 1e-12);
        prop_assert!(v.upper_bound <= weight + 1e-12);
    }

    #[test]
    fn product_states_have_rank_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_unit_vector(&mut rng, 5).kronecker(&random_unit_vector(&mut rng, 3));
        prop_assert_eq!(schmidt_rank(&psi, 3, RANK_TOL).unwrap(), 1);
        let mut bell = CVec::zeros(15);
        bell[0] = ONE;
        bell[4] = ONE;
        prop_assert_eq!(schmidt_rank(&bell, 3, RANK_TOL).unwrap(), 2);
    }
}
