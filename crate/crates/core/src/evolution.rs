//! Exact von Neumann evolution through cached spectral decompositions,
//! propagator leakage between regions, and the Duhamel split into free and
//! coupling-induced parts.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::linalg::{
    block, c, hermiticity_residual, hermitian_eigen, identity, max_abs_entry, min_eigenvalue,
    op_norm, principal_block, spectral_function, trace_norm, CMat, CVec,
};
use crate::model::BipartiteModel;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-9;

/// A (possibly sub-normalized) density operator on `ℓ²(Λ) ⊗ C^{d_B}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
    d_b: usize,
    normalization: f64,
}

impl DensityOperator {
    pub fn new(matrix: CMat, d_b: usize) -> Result<Self> {
        Self::with_normalization(matrix, d_b, 1.0)
    }

    /// Validates Hermiticity, positivity and `Tr Γ = normalization`.
    pub fn with_normalization(matrix: CMat, d_b: usize, normalization: f64) -> Result<Self> {
        if d_b == 0 || !matrix.is_square() || matrix.nrows() % d_b != 0 {
            return Err(Error::Domain(format!(
                "{}x{} matrix is not a bipartite operator with d_b = {d_b}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let residual = hermiticity_residual(&matrix);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let tr = matrix.trace().re;
        if (tr - normalization).abs() > TRACE_TOL.max(1e-12 * normalization) {
            return Err(Error::Domain(format!(
                "trace {tr} differs from normalization {normalization}"
            )));
        }
        let lowest = min_eigenvalue(&matrix);
        if lowest < -PSD_TOL {
            return Err(Error::Domain(format!("negative eigenvalue {lowest:.3e}")));
        }
        Ok(DensityOperator {
            matrix,
            d_b,
            normalization,
        })
    }

    /// `|ψ⟩⟨ψ| / ‖ψ‖²`.
    pub fn pure(psi: &CVec, d_b: usize) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::Domain("zero state vector".into()));
        }
        let v = psi / c(norm, 0.0);
        let mut m = &v * v.adjoint();
        symmetrize(&mut m);
        Self::new(m, d_b)
    }

    /// Skips validation; used for exact unitary images of valid operators.
    pub(crate) fn from_parts(matrix: CMat, d_b: usize, normalization: f64) -> Self {
        DensityOperator {
            matrix,
            d_b,
            normalization,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn d_a(&self) -> usize {
        self.matrix.nrows() / self.d_b
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

fn symmetrize(m: &mut CMat) {
    let h = (&*m + m.adjoint()) * c(0.5, 0.0);
    *m = h;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianSource {
    /// `H_AB`
    Coupled,
    /// `H_0 = H_A ⊗ 1 + 1 ⊗ H_B`
    Free,
    /// `H_A` alone
    SystemA,
    Other,
}

/// `H = U Λ U†`, enabling `e^{-iHt}` for any `t` without time stepping.
#[derive(Debug, Clone)]
pub struct SpectralCache {
    eigenvalues: DVector<f64>,
    eigenvectors: CMat,
    source: HamiltonianSource,
}

impl SpectralCache {
    pub fn new(h: &CMat, source: HamiltonianSource) -> Result<Self> {
        let residual = hermiticity_residual(h);
        if residual > HERMITIAN_TOL * h.nrows().max(1) as f64 {
            return Err(Error::NotHermitian { residual });
        }
        let (eigenvalues, eigenvectors) = hermitian_eigen(h);
        let back = spectral_function(&eigenvalues, &eigenvectors, |l| c(l, 0.0));
        let err = max_abs_entry(&(back - h));
        let scale = max_abs_entry(h).max(1.0);
        if err > RECONSTRUCTION_TOL * scale {
            return Err(Error::Numerical(format!(
                "eigendecomposition reconstruction residual {err:.3e}"
            )));
        }
        Ok(SpectralCache {
            eigenvalues,
            eigenvectors,
            source,
        })
    }

    pub fn source(&self) -> HamiltonianSource {
        self.source
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    /// `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> CMat {
        spectral_function(&self.eigenvalues, &self.eigenvectors, |l| c(0.0, -l * t).exp())
    }

    /// `e^{-iHt} M e^{iHt}`, computed in the eigenbasis.
    pub fn conjugate(&self, m: &CMat, t: f64) -> CMat {
        let u = &self.eigenvectors;
        let mut inner = u.adjoint() * m * u;
        let phases: Vec<_> = self.eigenvalues.iter().map(|&l| c(0.0, -l * t).exp()).collect();
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                inner[(i, j)] *= phases[i] * phases[j].conj();
            }
        }
        u * inner * u.adjoint()
    }
}

/// Spectral caches for the three Hamiltonians of a model.
#[derive(Debug, Clone)]
pub struct ModelCaches {
    pub coupled: SpectralCache,
    pub free: SpectralCache,
    pub system_a: SpectralCache,
}

impl ModelCaches {
    pub fn new(model: &BipartiteModel) -> Result<Self> {
        Ok(ModelCaches {
            coupled: SpectralCache::new(model.hab(), HamiltonianSource::Coupled)?,
            free: SpectralCache::new(model.h0(), HamiltonianSource::Free)?,
            system_a: SpectralCache::new(model.system_a().matrix(), HamiltonianSource::SystemA)?,
        })
    }
}

fn check_dims(gamma: &DensityOperator, cache: &SpectralCache) -> Result<()> {
    if gamma.dim() != cache.dim() {
        return Err(Error::DimensionMismatch {
            expected: cache.dim(),
            found: gamma.dim(),
        });
    }
    Ok(())
}

/// `Γ_t = e^{-iHt} Γ_0 e^{iHt}`.
pub fn evolve(gamma0: &DensityOperator, cache: &SpectralCache, t: f64) -> Result<DensityOperator> {
    check_dims(gamma0, cache)?;
    if t == 0.0 {
        return Ok(gamma0.clone());
    }
    let mut m = cache.conjugate(gamma0.matrix(), t);
    symmetrize(&mut m);
    Ok(DensityOperator::from_parts(m, gamma0.d_b(), gamma0.normalization()))
}

/// `e^{tL_0} Γ_0` under `H_0`.
pub fn free_evolve(gamma0: &DensityOperator, cache_h0: &SpectralCache, t: f64) -> Result<DensityOperator> {
    if cache_h0.source() == HamiltonianSource::Coupled {
        return Err(Error::Domain("free evolution needs the H_0 cache".into()));
    }
    evolve(gamma0, cache_h0, t)
}

/// Trace norm of `(χ_X⊗1) M (χ_X⊗1)`, computed on the X block.
pub fn localized_trace_norm(m: &CMat, x: &Region, d_b: usize) -> f64 {
    trace_norm(&principal_block(m, &x.tensor_indices(d_b)))
}

/// `‖χ̃_X(Γ_t - e^{tL_0}Γ_0)‖_1`.
pub fn duhamel_residual_norm(
    x: &Region,
    gamma0: &DensityOperator,
    t: f64,
    caches: &ModelCaches,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let full = evolve(gamma0, &caches.coupled, t)?;
    let free = free_evolve(gamma0, &caches.free, t)?;
    Ok(localized_trace_norm(&(full.matrix() - free.matrix()), x, gamma0.d_b()))
}

/// `‖χ_X e^{-iH_A s} χ_Y‖` for disjoint regions.
pub fn propagator_leakage(x: &Region, y: &Region, cache_a: &SpectralCache, s: f64) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Domain("leakage between empty regions".into()));
    }
    if !x.is_disjoint(y) {
        return Err(Error::Domain("leakage needs disjoint regions".into()));
    }
    if x.parent().len() != cache_a.dim() {
        return Err(Error::DimensionMismatch {
            expected: cache_a.dim(),
            found: x.parent().len(),
        });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let u = cache_a.propagator(s);
    Ok(op_norm(&block(&u, &x.to_vec(), &y.to_vec())))
}

/// Composite Simpson reconstruction of
/// `Γ_t = e^{tL_0}Γ_0 + ∫_0^t e^{(t-s)L_0} Î Γ_s ds`, with `ÎΓ = -i[I, Γ]`.
/// Returns the full reconstructed operator and the number of intervals used.
pub fn duhamel_reconstruction(
    gamma0: &DensityOperator,
    t: f64,
    model: &BipartiteModel,
    caches: &ModelCaches,
    max_step: f64,
) -> Result<(CMat, usize)> {
    if !(max_step > 0.0) {
        return Err(Error::Domain("quadrature step must be positive".into()));
    }
    let free = free_evolve(gamma0, &caches.free, t)?.into_matrix();
    if t == 0.0 {
        return Ok((free, 0));
    }
    let mut intervals = (t.abs() / max_step).ceil() as usize;
    intervals += intervals % 2;
    intervals = intervals.max(2);
    let h = t / intervals as f64;
    let coupling = model.coupling().matrix();
    let integrand = |s: f64| -> Result<CMat> {
        let gs = evolve(gamma0, &caches.coupled, s)?;
        let g = gs.matrix();
        let commutator = (coupling * g - g * coupling) * c(0.0, -1.0);
        Ok(caches.free.conjugate(&commutator, t - s))
    };
    let mut acc = CMat::zeros(gamma0.dim(), gamma0.dim());
    for i in 0..=intervals {
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += integrand(i as f64 * h)? * c(w, 0.0);
    }
    Ok((free + acc * c(h / 3.0, 0.0), intervals))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformBoundReport {
    /// `max_t ‖(H_0+1)Γ_t‖_1 / ‖(H_0+1)Γ_0‖_1`
    pub observed: f64,
    /// `‖(H_0+1)(H_AB+1)^{-1}‖ ‖(H_AB+1)(H_0+1)^{-1}‖`
    pub lemma_constant: f64,
    pub initial_weighted_norm: f64,
    pub worst_time: f64,
    pub passed: bool,
}

/// Weighted trace norm `‖(H_0+1)Γ_t‖_1` along `t_grid`, compared with the
/// constant obtained by commuting the weight through the evolution.
pub fn weighted_uniform_bound_check(
    gamma0: &DensityOperator,
    t_grid: &[f64],
    model: &BipartiteModel,
    caches: &ModelCaches,
) -> Result<UniformBoundReport> {
    let (a4, a5) = (model.report().alpha4, model.report().alpha5);
    if !(a4 < 1.0 && a5 < 1.0) {
        return Err(Error::ConditionsViolated { alpha4: a4, alpha5: a5 });
    }
    let n = model.dim();
    let one = identity(n);
    let weight = model.h0() + &one;
    let coupled_plus = model.hab() + &one;
    let coupled_inv = spectral_function(caches.coupled.eigenvalues(), caches.coupled.eigenvectors(), |l| {
        c(1.0 / (l + 1.0), 0.0)
    });
    let free_inv = spectral_function(caches.free.eigenvalues(), caches.free.eigenvectors(), |l| {
        c(1.0 / (l + 1.0), 0.0)
    });
    let lemma_constant = op_norm(&(&weight * coupled_inv)) * op_norm(&(coupled_plus * free_inv));
    let initial = trace_norm(&(&weight * gamma0.matrix()));
    let mut observed = 0.0f64;
    let mut worst_time = 0.0;
    for &t in t_grid {
        let gt = evolve(gamma0, &caches.coupled, t)?;
        let ratio = trace_norm(&(&weight * gt.matrix())) / initial;
        if ratio > observed {
            observed = ratio;
            worst_time = t;
        }
    }
    let report = UniformBoundReport {
        observed,
        lemma_constant,
        initial_weighted_norm: initial,
        worst_time,
        passed: observed <= lemma_constant + 1e-8,
    };
    if !report.passed {
        return Err(Error::CheckFailed(format!(
            "observed constant {observed:.12} exceeds lemma constant {lemma_constant:.12} at t = {worst_time}"
        )));
    }
    Ok(report)
}
