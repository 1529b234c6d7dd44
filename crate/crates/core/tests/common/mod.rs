#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use entcone::evolution::{HamiltonianSource, SpectralCache};
use entcone::harness::ScenarioConfig;
use entcone::lattice::LatticeGeometry;
use entcone::model::{ShiftPolicy, SystemAHamiltonian};

/// `J_n(x) = (1/π) ∫_0^π cos(nθ - x sin θ) dθ`; the trapezoidal rule is
/// spectrally accurate for this periodic integrand.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let m = 512;
    let h = std::f64::consts::PI / m as f64;
    let f = |th: f64| (n as f64 * th - x * th.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
    for i in 1..m {
        s += f(i as f64 * h);
    }
    s * h / std::f64::consts::PI
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn reference_config() -> ScenarioConfig {
    ScenarioConfig::load(&fixture("reference.toml")).unwrap()
}

pub fn residual_config() -> ScenarioConfig {
    ScenarioConfig::load(&fixture("reference_residual.toml")).unwrap()
}

pub fn free_chain(len: usize, tau: f64) -> (Arc<LatticeGeometry>, SystemAHamiltonian, SpectralCache) {
    let g = Arc::new(LatticeGeometry::chain(len).unwrap());
    let a = SystemAHamiltonian::nearest_neighbor(g.clone(), tau, None, ShiftPolicy::Auto).unwrap();
    let cache = SpectralCache::new(a.matrix(), HamiltonianSource::SystemA).unwrap();
    (g, a, cache)
}

#[test]
fn bessel_oracle_sanity() {
    // Tabulated values.
    assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
    assert!((bessel_j(1, 2.0) - 0.576_724_807_756_873_4).abs() < 1e-15);
    assert!((bessel_j(-3, 5.0) + bessel_j(3, 5.0)).abs() < 1e-15);
    assert!((bessel_j(10, 20.0) - 0.186_482_558_023_945_2).abs() < 1e-14);
}
