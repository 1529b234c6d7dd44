//! Light-cone speed `c(μ)` for translation-invariant dispersion laws.
//!
//! For `H = ω(p)` the boosted operator `H_ζ` acts as multiplication by
//! `ω(k - iη)`, so `c(μ)` reduces to the supremum of `Im ω(k - iη) / μ` over
//! real `k` and `|η| <= μ`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, C64};

/// Default number of k-grid points.
pub const DEFAULT_K_POINTS: usize = 4096;
/// Default number of η-grid points (odd, so η = 0 is on the grid).
pub const DEFAULT_ETA_POINTS: usize = 33;
/// k window for continuum laws.
pub const CONTINUUM_K_CUTOFF: f64 = 50.0;
/// Complex-step size for first derivatives of real-analytic bands.
const COMPLEX_STEP: f64 = 1e-20;
const GOLDEN_ITERATIONS: usize = 80;

pub type BandFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

#[derive(Clone)]
pub enum DispersionKind {
    /// `ω(k) = 2τ(1 - cos k)`, the band of nearest-neighbour hopping `-τ`
    /// shifted to be nonnegative.
    TightBinding1d { tau: f64 },
    /// `ω(k) = sqrt(k² + m²)`.
    Relativistic { mass: f64 },
    /// `Σ_j sqrt(k_j² + m_j²)` over independent particles.
    MultiParticleSum { masses: Vec<f64> },
    Custom {
        label: String,
        band: BandFn,
        k_cutoff: f64,
    },
}

#[derive(Clone)]
pub struct DispersionLaw {
    kind: DispersionKind,
    strip_width: f64,
}

impl fmt::Debug for DispersionLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DispersionLaw")
            .field("label", &self.label())
            .field("strip_width", &self.strip_width)
            .finish()
    }
}

impl DispersionLaw {
    pub fn tight_binding(tau: f64) -> Self {
        DispersionLaw {
            kind: DispersionKind::TightBinding1d { tau },
            strip_width: f64::INFINITY,
        }
    }

    /// The branch point of `sqrt(k² + m²)` at `k = ±im` bounds the strip.
    pub fn relativistic(mass: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::Domain(format!("relativistic mass must be > 0, got {mass}")));
        }
        Ok(DispersionLaw {
            kind: DispersionKind::Relativistic { mass },
            strip_width: mass,
        })
    }

    pub fn multi_particle(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() || masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::Domain("multi-particle law needs positive masses".into()));
        }
        let strip_width = masses.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(DispersionLaw {
            kind: DispersionKind::MultiParticleSum { masses },
            strip_width,
        })
    }

    pub fn custom(
        label: impl Into<String>,
        band: impl Fn(C64) -> C64 + Send + Sync + 'static,
        strip_width: f64,
        k_cutoff: f64,
    ) -> Result<Self> {
        if !(strip_width > 0.0) || !(k_cutoff > 0.0) {
            return Err(Error::Domain("custom law needs positive strip width and cutoff".into()));
        }
        Ok(DispersionLaw {
            kind: DispersionKind::Custom {
                label: label.into(),
                band: Arc::new(band),
                k_cutoff,
            },
            strip_width,
        })
    }

    pub fn kind(&self) -> &DispersionKind {
        &self.kind
    }

    pub fn strip_width(&self) -> f64 {
        self.strip_width
    }

    pub fn label(&self) -> String {
        match &self.kind {
            DispersionKind::TightBinding1d { tau } => format!("tight-binding(tau={tau})"),
            DispersionKind::Relativistic { mass } => format!("relativistic(m={mass})"),
            DispersionKind::MultiParticleSum { masses } => format!("multi-particle(m={masses:?})"),
            DispersionKind::Custom { label, .. } => label.clone(),
        }
    }

    /// Default half-width of the k window.
    pub fn k_cutoff(&self) -> f64 {
        match &self.kind {
            DispersionKind::TightBinding1d { .. } => std::f64::consts::PI,
            DispersionKind::Relativistic { .. } | DispersionKind::MultiParticleSum { .. } => {
                CONTINUUM_K_CUTOFF
            }
            DispersionKind::Custom { k_cutoff, .. } => *k_cutoff,
        }
    }

    fn is_periodic(&self) -> bool {
        matches!(self.kind, DispersionKind::TightBinding1d { .. })
    }

    /// One-dimensional band functions whose contributions add up.
    fn components(&self) -> Vec<BandFn> {
        match &self.kind {
            DispersionKind::TightBinding1d { tau } => {
                let tau = *tau;
                vec![Arc::new(move |z: C64| c(2.0 * tau, 0.0) * (c(1.0, 0.0) - z.cos()))]
            }
            DispersionKind::Relativistic { mass } => vec![relativistic_band(*mass)],
            DispersionKind::MultiParticleSum { masses } => {
                masses.iter().map(|&m| relativistic_band(m)).collect()
            }
            DispersionKind::Custom { band, .. } => vec![Arc::clone(band)],
        }
    }

    /// `ω(ζ)` for single-component laws; for a multi-particle law, every
    /// particle is evaluated at the same `ζ`.
    pub fn omega(&self, z: C64) -> C64 {
        self.components().iter().map(|f| f(z)).sum()
    }
}

fn relativistic_band(mass: f64) -> BandFn {
    let m2 = c(mass * mass, 0.0);
    Arc::new(move |z: C64| (z * z + m2).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub k_points: usize,
    pub eta_points: usize,
    /// Overrides the law's default k window.
    pub k_cutoff: Option<f64>,
    pub refine: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            k_points: DEFAULT_K_POINTS,
            eta_points: DEFAULT_ETA_POINTS,
            k_cutoff: None,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityResult {
    pub mu: f64,
    pub c_of_mu: f64,
    pub grid_resolution: (usize, usize),
    pub k_cutoff: f64,
    /// `(k, η)` maximizer, one per particle.
    pub attained_at: Vec<(f64, f64)>,
    /// The maximizer sits on the edge of a non-periodic k window; the true
    /// supremum is approached as `|k| → ∞` and is not extrapolated.
    pub supremum_at_infinity: bool,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

/// Golden-section search for a maximum of `f` on `[a, b]`; returns the best
/// point evaluated, endpoints included.
fn golden_max(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut best = (a, f(a)?);
    let fb = f(b)?;
    if fb > best.1 {
        best = (b, fb);
    }
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..GOLDEN_ITERATIONS {
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.1 {
                best = (x, v);
            }
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(best)
}

fn finite(z: C64, value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            re: z.re,
            im: z.im,
            what: what.to_string(),
        })
    }
}

struct ComponentMax {
    value: f64,
    k: f64,
    eta: f64,
    k_index: usize,
}

fn maximize_component(band: &BandFn, mu: f64, k_cutoff: f64, grid: &GridSpec) -> Result<ComponentMax> {
    let ks = linspace(-k_cutoff, k_cutoff, grid.k_points.max(2));
    let etas = linspace(-mu, mu, grid.eta_points.max(2));
    let objective = |k: f64, eta: f64| -> Result<f64> {
        let z = c(k, -eta);
        finite(z, band(z).im, "Im ω(k - iη)")
    };
    let mut best = ComponentMax {
        value: f64::NEG_INFINITY,
        k: 0.0,
        eta: 0.0,
        k_index: 0,
    };
    let mut eta_index = 0;
    for (i, &k) in ks.iter().enumerate() {
        for (j, &eta) in etas.iter().enumerate() {
            let v = objective(k, eta)?;
            if v > best.value {
                best = ComponentMax { value: v, k, eta, k_index: i };
                eta_index = j;
            }
        }
    }
    if grid.refine {
        let i = best.k_index;
        let (ka, kb) = (ks[i.saturating_sub(1)], ks[(i + 1).min(ks.len() - 1)]);
        let eta0 = best.eta;
        let (k_ref, v_ref) = golden_max(|k| objective(k, eta0), ka, kb)?;
        if v_ref > best.value {
            best.value = v_ref;
            best.k = k_ref;
        }
        let j = eta_index;
        let (ea, eb) = (etas[j.saturating_sub(1)], etas[(j + 1).min(etas.len() - 1)]);
        let k0 = best.k;
        let (e_ref, v_ref) = golden_max(|e| objective(k0, e), ea, eb)?;
        if v_ref > best.value {
            best.value = v_ref;
            best.eta = e_ref;
        }
    }
    Ok(best)
}

/// `c(μ)`: supremum over the closed strip `|Im ζ| <= μ` of `Im ω(ζ) / μ`,
/// evaluated on a grid with one golden-section refinement around the grid
/// maximizer. The value is a lower approximation of the true supremum.
pub fn c_mu(law: &DispersionLaw, mu: f64, grid: &GridSpec) -> Result<VelocityResult> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be > 0, got {mu}")));
    }
    if mu >= law.strip_width() {
        return Err(Error::Domain(format!(
            "mu = {mu} outside the analyticity strip of width {}",
            law.strip_width()
        )));
    }
    let k_cutoff = grid.k_cutoff.unwrap_or_else(|| law.k_cutoff());
    let mut total = 0.0;
    let mut attained_at = Vec::new();
    let mut at_infinity = false;
    for band in law.components() {
        let m = maximize_component(&band, mu, k_cutoff, grid)?;
        total += m.value;
        attained_at.push((m.k, m.eta));
        if !law.is_periodic() && (m.k_index == 0 || m.k_index + 1 == grid.k_points.max(2)) {
            at_infinity = true;
        }
    }
    Ok(VelocityResult {
        mu,
        c_of_mu: (total / mu).max(0.0),
        grid_resolution: (grid.k_points, grid.eta_points),
        k_cutoff,
        attained_at,
        supremum_at_infinity: at_infinity,
    })
}

/// `sup_k |∇ω(k)|`; for several particles the gradient norm is maximized
/// componentwise. Continuum laws use a window of `10⁴·max(m)` so that the
/// asymptotic speed is resolved to about `10⁻⁸`.
pub fn group_velocity_sup(law: &DispersionLaw) -> Result<f64> {
    let cutoff = match law.kind() {
        DispersionKind::Relativistic { mass } => 1e4 * mass.max(1.0),
        DispersionKind::MultiParticleSum { masses } => {
            1e4 * masses.iter().copied().fold(1.0, f64::max)
        }
        _ => law.k_cutoff(),
    };
    group_velocity_sup_with(
        law,
        &GridSpec {
            k_cutoff: Some(cutoff),
            ..GridSpec::default()
        },
    )
}

pub fn group_velocity_sup_with(law: &DispersionLaw, grid: &GridSpec) -> Result<f64> {
    let cutoff = grid.k_cutoff.unwrap_or_else(|| law.k_cutoff());
    let ks = linspace(-cutoff, cutoff, grid.k_points.max(2));
    let mut sum_sq = 0.0;
    for band in law.components() {
        let speed = |k: f64| -> Result<f64> {
            let z = c(k, COMPLEX_STEP);
            finite(z, (band(z).im / COMPLEX_STEP).abs(), "ω'(k)")
        };
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, &k) in ks.iter().enumerate() {
            let v = speed(k)?;
            if v > best.1 {
                best = (i, v);
            }
        }
        let mut value = best.1;
        if grid.refine {
            let i = best.0;
            let (a, b) = (ks[i.saturating_sub(1)], ks[(i + 1).min(ks.len() - 1)]);
            value = value.max(golden_max(speed, a, b)?.1);
        }
        sum_sq += value * value;
    }
    Ok(sum_sq.sqrt())
}

/// `c(0) = 2λτ/ℏ` in physical units: rate `τ/ℏ` in 1/s and lattice spacing
/// `λ` in nm give nm/s.
pub fn physical_velocity(tau_over_hbar: f64, spacing: f64) -> f64 {
    2.0 * spacing * tau_over_hbar
}

/// Largest `|Im ω(k + iη)|` over the k grid; finite values confirm that the
/// imaginary part of the continued symbol stays bounded on that line.
pub fn strip_bound(law: &DispersionLaw, eta: f64, grid: &GridSpec) -> Result<f64> {
    if eta.abs() >= law.strip_width() {
        return Err(Error::Domain(format!("|eta| = {} outside the strip", eta.abs())));
    }
    let cutoff = grid.k_cutoff.unwrap_or_else(|| law.k_cutoff());
    let mut worst = 0.0f64;
    for k in linspace(-cutoff, cutoff, grid.k_points.max(2)) {
        let z = c(k, eta);
        let v = finite(z, law.omega(z).im, "Im ω(k + iη)")?;
        worst = worst.max(v.abs());
    }
    Ok(worst)
}

/// One row of a velocity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityRow {
    pub law: String,
    pub mu: f64,
    pub c_of_mu: f64,
    pub attained_at: Vec<(f64, f64)>,
    pub supremum_at_infinity: bool,
}

/// Pairs with `μ` outside a law's analyticity strip are skipped.
pub fn velocity_table(laws: &[DispersionLaw], mus: &[f64], grid: &GridSpec) -> Result<Vec<VelocityRow>> {
    use rayon::prelude::*;
    let jobs: Vec<(&DispersionLaw, f64)> = laws
        .iter()
        .flat_map(|l| mus.iter().filter(|&&m| m < l.strip_width()).map(move |&m| (l, m)))
        .collect();
    jobs.par_iter()
        .map(|(law, mu)| {
            let r = c_mu(law, *mu, grid)?;
            Ok(VelocityRow {
                law: law.label(),
                mu: *mu,
                c_of_mu: r.c_of_mu,
                attained_at: r.attained_at,
                supremum_at_infinity: r.supremum_at_infinity,
            })
        })
        .collect()
}
