//! System A on the lattice, the finite system B, the localized coupling, and
//! the assembled bipartite Hamiltonian together with its structural checks.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, Region};
use crate::linalg::{
    c, hermiticity_residual, hermitian_eigen, identity, kron, max_abs_entry, min_eigenvalue,
    op_norm, principal_block, random_hermitian, spectral_function, CMat, C64, ZERO,
};

/// Entrywise tolerance for Hermiticity of user-supplied operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as "nonnegative".
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance of the relative lower-bound check.
pub const LOWER_BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShiftPolicy {
    /// Add `-λ_min` when the operator has a negative eigenvalue.
    Auto,
    Fixed(f64),
}

/// `|t_xy| <= prefactor * exp(-decay * |x - y|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalityBound {
    pub prefactor: f64,
    pub decay: f64,
}

fn apply_shift(matrix: &CMat, policy: ShiftPolicy) -> Result<(CMat, f64)> {
    let lowest = min_eigenvalue(matrix);
    let shift = match policy {
        ShiftPolicy::Auto => (-lowest).max(0.0),
        ShiftPolicy::Fixed(s) => s,
    };
    if lowest + shift < -PSD_TOL {
        return Err(Error::Domain(format!(
            "shifted operator has eigenvalue {:.3e} < 0",
            lowest + shift
        )));
    }
    let n = matrix.nrows();
    Ok((matrix + identity(n) * c(shift, 0.0), shift))
}

/// `H_A = T + V + shift` on `ℓ²(Λ)`.
#[derive(Debug, Clone)]
pub struct SystemAHamiltonian {
    geometry: Arc<LatticeGeometry>,
    hopping: BTreeMap<(usize, usize), C64>,
    potential: Vec<f64>,
    spectral_shift: f64,
    locality: Option<LocalityBound>,
    matrix: CMat,
}

impl SystemAHamiltonian {
    /// Hopping entries are given for ordered pairs; a pair given in both
    /// orientations must be conjugate-symmetric.
    pub fn new(
        geometry: Arc<LatticeGeometry>,
        hopping: impl IntoIterator<Item = ((usize, usize), C64)>,
        potential: Vec<f64>,
        shift: ShiftPolicy,
        locality: Option<LocalityBound>,
    ) -> Result<Self> {
        let n = geometry.len();
        if potential.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: potential.len(),
            });
        }
        let mut potential = potential;
        let mut canonical: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for ((x, y), t) in hopping {
            if x >= n || y >= n {
                return Err(Error::Domain(format!("hopping ({x}, {y}) outside lattice")));
            }
            if x == y {
                if t.im.abs() > HERMITIAN_TOL {
                    return Err(Error::NotHermitian { residual: t.im.abs() });
                }
                potential[x] += t.re;
                continue;
            }
            let (key, value) = if x < y { ((x, y), t) } else { ((y, x), t.conj()) };
            if let Some(prev) = canonical.get(&key) {
                let residual = (prev - value).norm();
                if residual > HERMITIAN_TOL {
                    return Err(Error::NotHermitian { residual });
                }
            } else {
                canonical.insert(key, value);
            }
        }
        if let Some(bound) = locality {
            for (&(x, y), t) in &canonical {
                let limit = bound.prefactor * (-bound.decay * geometry.site_distance(x, y)).exp();
                if t.norm() > limit * (1.0 + 1e-12) {
                    return Err(Error::Domain(format!(
                        "hopping ({x}, {y}) = {:.3e} violates locality bound {limit:.3e}",
                        t.norm()
                    )));
                }
            }
        }
        let mut raw = CMat::zeros(n, n);
        for (x, v) in potential.iter().enumerate() {
            raw[(x, x)] = c(*v, 0.0);
        }
        for (&(x, y), &t) in &canonical {
            raw[(x, y)] += t;
            raw[(y, x)] += t.conj();
        }
        let (matrix, spectral_shift) = apply_shift(&raw, shift)?;
        Ok(SystemAHamiltonian {
            geometry,
            hopping: canonical,
            potential,
            spectral_shift,
            locality,
            matrix,
        })
    }

    /// Uniform nearest-neighbour hopping `-τ` plus an on-site potential.
    pub fn nearest_neighbor(
        geometry: Arc<LatticeGeometry>,
        tau: f64,
        potential: Option<Vec<f64>>,
        shift: ShiftPolicy,
    ) -> Result<Self> {
        let n = geometry.len();
        let hopping: Vec<_> = geometry
            .nearest_neighbor_pairs()
            .into_iter()
            .map(|p| (p, c(-tau, 0.0)))
            .collect();
        let locality = LocalityBound {
            prefactor: tau.abs() * std::f64::consts::E,
            decay: 1.0,
        };
        Self::new(
            geometry,
            hopping,
            potential.unwrap_or_else(|| vec![0.0; n]),
            shift,
            Some(locality),
        )
    }

    pub fn geometry(&self) -> &Arc<LatticeGeometry> {
        &self.geometry
    }

    /// Assembled matrix including the spectral shift.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn spectral_shift(&self) -> f64 {
        self.spectral_shift
    }

    pub fn hopping(&self) -> &BTreeMap<(usize, usize), C64> {
        &self.hopping
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn locality(&self) -> Option<LocalityBound> {
        self.locality
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// The finite system B.
#[derive(Debug, Clone)]
pub struct SystemBSpec {
    hamiltonian: CMat,
    spectral_shift: f64,
}

impl SystemBSpec {
    pub fn new(hamiltonian: CMat, shift: ShiftPolicy) -> Result<Self> {
        if !hamiltonian.is_square() || hamiltonian.nrows() == 0 {
            return Err(Error::Domain("H_B must be a nonempty square matrix".into()));
        }
        let residual = hermiticity_residual(&hamiltonian);
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let (hamiltonian, spectral_shift) = apply_shift(&hamiltonian, shift)?;
        Ok(SystemBSpec {
            hamiltonian,
            spectral_shift,
        })
    }

    /// `H_B = 0` on `d_b` levels.
    pub fn trivial(d_b: usize) -> Result<Self> {
        Self::new(CMat::zeros(d_b, d_b), ShiftPolicy::Auto)
    }

    pub fn from_levels(levels: &[f64]) -> Result<Self> {
        let n = levels.len();
        let h = CMat::from_fn(n, n, |i, j| if i == j { c(levels[i], 0.0) } else { ZERO });
        Self::new(h, ShiftPolicy::Auto)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    pub fn spectral_shift(&self) -> f64 {
        self.spectral_shift
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingForm {
    /// `g Σ_{x∈Y} |x⟩⟨x| ⊗ B`.
    Density,
    /// `g Σ_{⟨x,y⟩⊂Y} (|x⟩⟨y| + |y⟩⟨x|) ⊗ B`.
    HoppingModulation,
    /// Random Hermitian block on `ℓ²(Y) ⊗ C^{d_B}`, operator norm `g`.
    RandomBlock,
}

/// The interaction `I`, exactly supported in `Y ⊗ B`.
#[derive(Debug, Clone)]
pub struct CouplingOperator {
    support: Region,
    strength: f64,
    form: CouplingForm,
    d_b: usize,
    matrix: CMat,
}

fn check_b_operator(b_op: &CMat) -> Result<()> {
    if !b_op.is_square() {
        return Err(Error::Domain("B operator must be square".into()));
    }
    let residual = hermiticity_residual(b_op);
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

impl CouplingOperator {
    pub fn density(support: Region, b_op: &CMat, strength: f64) -> Result<Self> {
        check_b_operator(b_op)?;
        let n = support.parent().len();
        let mut site_part = CMat::zeros(n, n);
        for x in support.members() {
            site_part[(x, x)] = c(strength, 0.0);
        }
        let matrix = kron(&site_part, b_op);
        Ok(Self::assemble(support, strength, CouplingForm::Density, b_op.nrows(), matrix))
    }

    pub fn hopping_modulation(support: Region, b_op: &CMat, strength: f64) -> Result<Self> {
        check_b_operator(b_op)?;
        let geom = support.parent();
        let n = geom.len();
        let pairs: Vec<_> = geom
            .nearest_neighbor_pairs()
            .into_iter()
            .filter(|&(x, y)| support.contains(x) && support.contains(y))
            .collect();
        if pairs.is_empty() {
            return Err(Error::Domain("hopping modulation needs a bond inside Y".into()));
        }
        let mut site_part = CMat::zeros(n, n);
        for (x, y) in pairs {
            site_part[(x, y)] = c(strength, 0.0);
            site_part[(y, x)] = c(strength, 0.0);
        }
        let matrix = kron(&site_part, b_op);
        Ok(Self::assemble(
            support,
            strength,
            CouplingForm::HoppingModulation,
            b_op.nrows(),
            matrix,
        ))
    }

    pub fn random_block(support: Region, d_b: usize, strength: f64, seed: u64) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Domain("random coupling needs a nonempty support".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = support.tensor_indices(d_b);
        let block = random_hermitian(&mut rng, idx.len());
        let block = &block * c(strength / op_norm(&block), 0.0);
        let n = support.parent().len() * d_b;
        let mut matrix = CMat::zeros(n, n);
        for (i, &p) in idx.iter().enumerate() {
            for (j, &q) in idx.iter().enumerate() {
                matrix[(p, q)] = block[(i, j)];
            }
        }
        Ok(Self::assemble(support, strength, CouplingForm::RandomBlock, d_b, matrix))
    }

    fn assemble(support: Region, strength: f64, form: CouplingForm, d_b: usize, matrix: CMat) -> Self {
        CouplingOperator {
            support,
            strength,
            form,
            d_b,
            matrix,
        }
    }

    pub fn support(&self) -> &Region {
        &self.support
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn form(&self) -> CouplingForm {
        self.form
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// `max |M - (χ_Y⊗1) M (χ_Y⊗1)|`; zero by construction.
    pub fn locality_residual(&self) -> f64 {
        let keep = self.support.tensor_indices(self.d_b);
        let mut mask = vec![false; self.matrix.nrows()];
        for &k in &keep {
            mask[k] = true;
        }
        let mut worst = 0.0f64;
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                if !(mask[i] && mask[j]) {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Structural diagnostics attached to every built model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub alpha4: f64,
    pub alpha5: f64,
    pub locality_residual: f64,
    pub hermiticity_residual: f64,
    pub shift_a: f64,
    pub shift_b: f64,
    /// Set when the model was built despite `alpha4 >= 1` or `alpha5 >= 1`.
    pub overridden: bool,
}

#[derive(Debug, Clone)]
pub struct BipartiteModel {
    a: SystemAHamiltonian,
    b: SystemBSpec,
    coupling: CouplingOperator,
    h0: CMat,
    hab: CMat,
    report: ConditionReport,
}

/// `H_AB = H_A ⊗ 1 + 1 ⊗ H_B + I`, refusing couplings that violate the
/// relative-boundedness conditions unless `allow_violation` is set.
pub fn build_model(
    a: SystemAHamiltonian,
    b: SystemBSpec,
    coupling: CouplingOperator,
    allow_violation: bool,
) -> Result<BipartiteModel> {
    let n = a.dim() * b.dim();
    if coupling.matrix.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: coupling.matrix.nrows(),
        });
    }
    if coupling.d_b != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: coupling.d_b,
        });
    }
    if **coupling.support.parent() != **a.geometry() {
        return Err(Error::Domain("coupling support lives on a different lattice".into()));
    }
    let residual = hermiticity_residual(&coupling.matrix);
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let h0 = kron(a.matrix(), &identity(b.dim())) + kron(&identity(a.dim()), b.hamiltonian());
    let hab = &h0 + &coupling.matrix;
    let (alpha4, alpha5) = check_condition_4_5(&h0, &coupling.matrix);
    let violated = !(alpha4 < 1.0 && alpha5 < 1.0);
    if violated && !allow_violation {
        return Err(Error::ConditionsViolated { alpha4, alpha5 });
    }
    let report = ConditionReport {
        alpha4,
        alpha5,
        locality_residual: coupling.locality_residual(),
        hermiticity_residual: hermiticity_residual(&hab),
        shift_a: a.spectral_shift(),
        shift_b: b.spectral_shift(),
        overridden: violated,
    };
    Ok(BipartiteModel {
        a,
        b,
        coupling,
        h0,
        hab,
        report,
    })
}

/// `(‖(H0+1)^{-1/2} I (H0+1)^{-1/2}‖, ‖I (H0+1)^{-1}‖)` from the spectral
/// decomposition of `H0`.
pub fn check_condition_4_5(h0: &CMat, coupling: &CMat) -> (f64, f64) {
    let (values, vectors) = hermitian_eigen(h0);
    let inv_sqrt = spectral_function(&values, &vectors, |l| c((l + 1.0).powf(-0.5), 0.0));
    let inv = spectral_function(&values, &vectors, |l| c(1.0 / (l + 1.0), 0.0));
    let alpha4 = op_norm(&(&inv_sqrt * coupling * &inv_sqrt));
    let alpha5 = op_norm(&(coupling * &inv));
    (alpha4, alpha5)
}

impl BipartiteModel {
    pub fn system_a(&self) -> &SystemAHamiltonian {
        &self.a
    }

    pub fn system_b(&self) -> &SystemBSpec {
        &self.b
    }

    pub fn coupling(&self) -> &CouplingOperator {
        &self.coupling
    }

    pub fn h0(&self) -> &CMat {
        &self.h0
    }

    pub fn hab(&self) -> &CMat {
        &self.hab
    }

    pub fn report(&self) -> &ConditionReport {
        &self.report
    }

    pub fn geometry(&self) -> &Arc<LatticeGeometry> {
        self.a.geometry()
    }

    pub fn d_a(&self) -> usize {
        self.a.dim()
    }

    pub fn d_b(&self) -> usize {
        self.b.dim()
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn check_conditions(&self) -> (f64, f64) {
        check_condition_4_5(&self.h0, self.coupling.matrix())
    }

    /// Minimum eigenvalue of `(H_AB + 1) - (1 - α4)(H_0 + 1)`; fails if it
    /// drops below `-1e-9`.
    pub fn lower_bound_check(&self) -> Result<f64> {
        lower_bound_check(self)
    }

    /// `(χ_Y ⊗ 1) H (χ_Y ⊗ 1)` restricted to the support block.
    pub fn coupling_block(&self) -> CMat {
        principal_block(self.coupling.matrix(), &self.coupling.support.tensor_indices(self.d_b()))
    }
}

pub fn lower_bound_check(model: &BipartiteModel) -> Result<f64> {
    let alpha4 = model.report.alpha4;
    if alpha4 >= 1.0 {
        return Err(Error::Domain(format!(
            "lower-bound check requires alpha4 < 1, got {alpha4:.6}"
        )));
    }
    let n = model.dim();
    let one = identity(n);
    let residual = (&model.hab + &one) - (&model.h0 + &one) * c(1.0 - alpha4, 0.0);
    let lowest = min_eigenvalue(&residual);
    if lowest < -LOWER_BOUND_TOL {
        return Err(Error::CheckFailed(format!(
            "H_AB + 1 - (1 - alpha4)(H_0 + 1) has eigenvalue {lowest:.3e}"
        )));
    }
    Ok(lowest)
}

/// Named single-system operators used by couplings and configs.
pub mod b_ops {
    use super::*;

    /// `|0⟩⟨1| + |1⟩⟨0|` embedded in `d` levels.
    pub fn sigma_x(d: usize) -> CMat {
        let mut m = CMat::zeros(d, d);
        if d >= 2 {
            m[(0, 1)] = c(1.0, 0.0);
            m[(1, 0)] = c(1.0, 0.0);
        }
        m
    }

    pub fn sigma_y(d: usize) -> CMat {
        let mut m = CMat::zeros(d, d);
        if d >= 2 {
            m[(0, 1)] = c(0.0, -1.0);
            m[(1, 0)] = c(0.0, 1.0);
        }
        m
    }

    pub fn sigma_z(d: usize) -> CMat {
        let mut m = CMat::zeros(d, d);
        if d >= 1 {
            m[(0, 0)] = c(1.0, 0.0);
        }
        if d >= 2 {
            m[(1, 1)] = c(-1.0, 0.0);
        }
        m
    }

    pub fn identity(d: usize) -> CMat {
        CMat::identity(d, d)
    }
}

/// Largest entrywise difference `H_AB - H_0 - I`; exactly zero.
pub fn assembly_residual(model: &BipartiteModel) -> f64 {
    max_abs_entry(&(&model.hab - &model.h0 - model.coupling.matrix()))
}
