use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BOperator, InitialStateRecipe, ScenarioConfig};
use crate::entanglement::{
    localize, schmidt_number_witness, schmidt_rank, sep_distance_bounds, SeparabilityStatus, SeparableSearch,
    RANK_TOL,
};
use crate::error::{Error, Result};
use crate::evolution::{evolve, localized_trace_norm, DensityOperator, ModelCaches};
use crate::lattice::{region_distance, LatticeGeometry, Region};
use crate::lightcone::{
    envelope_violations, fit_envelope, reference_cone_speed, velocity_at_fit, verify_theorem_a, verify_theorem_b,
    ConeFitResult, Field, FitOptions, ProbeRole, SweepSample, TheoremAReport, TheoremBReport,
};
use crate::linalg::{
    block, c, hermitian_eigen, max_abs_entry, op_norm, principal_block, spectral_function, trace_norm, CMat, CVec, ONE,
    ZERO,
};
use crate::model::{
    b_ops, build_model, lower_bound_check, BipartiteModel, CouplingForm, CouplingOperator, ShiftPolicy,
    SystemAHamiltonian, SystemBSpec,
};
use crate::velocity::{velocity_table, DispersionLaw, GridSpec, VelocityRow};
use crate::evolution::weighted_uniform_bound_check;

/// Localized weight below which the Schmidt-number witness is not evaluated.
pub const WITNESS_MIN_WEIGHT: f64 = 1e-6;
/// Localized weight below which the separable search is skipped.
pub const SEARCH_MIN_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialStateCertificate {
    pub recipe: String,
    pub pure: bool,
    pub schmidt_rank: Option<usize>,
    /// `max |Γ_0 - χ̃_Q(Γ_0)|`, zero for Q-supported recipes.
    pub support_residual: f64,
    pub negativity: f64,
    pub ppt: bool,
    /// `‖H_0 Γ_0‖_1`
    pub h0_trace_norm: f64,
    /// `‖(H_0 + 1) Γ_0‖_1`
    pub weighted_trace_norm: f64,
}

fn b_operator(op: BOperator, d: usize) -> CMat {
    match op {
        BOperator::SigmaX => b_ops::sigma_x(d),
        BOperator::SigmaY => b_ops::sigma_y(d),
        BOperator::SigmaZ => b_ops::sigma_z(d),
        BOperator::Identity => b_ops::identity(d),
    }
}

pub fn build_geometry(cfg: &ScenarioConfig) -> Result<Arc<LatticeGeometry>> {
    Ok(Arc::new(LatticeGeometry::hypercubic(&cfg.lattice.extent, cfg.lattice.metric)?))
}

pub fn build_scenario_model(cfg: &ScenarioConfig, geometry: &Arc<LatticeGeometry>) -> Result<BipartiteModel> {
    let potential = (!cfg.hopping.potential.is_empty()).then(|| cfg.hopping.potential.clone());
    let a = SystemAHamiltonian::nearest_neighbor(geometry.clone(), cfg.hopping.tau, potential, ShiftPolicy::Auto)?;
    let b = SystemBSpec::from_levels(&cfg.system_b.levels)?;
    let d_b = b.dim();
    let y = Region::new(geometry, cfg.coupling.support.iter().copied())?;
    let op = b_operator(cfg.coupling.b_operator, d_b);
    let coupling = match cfg.coupling.form {
        CouplingForm::Density => CouplingOperator::density(y, &op, cfg.coupling.strength)?,
        CouplingForm::HoppingModulation => CouplingOperator::hopping_modulation(y, &op, cfg.coupling.strength)?,
        CouplingForm::RandomBlock => CouplingOperator::random_block(y, d_b, cfg.coupling.strength, cfg.seed)?,
    };
    build_model(a, b, coupling, cfg.allow_condition_violation)
}

/// Builds `Γ_0` from a recipe and certifies the properties the protocols
/// rely on.
pub fn make_initial_state(
    recipe: &InitialStateRecipe,
    model: &BipartiteModel,
    q: &Region,
) -> Result<(DensityOperator, InitialStateCertificate)> {
    let n = model.d_a();
    let d_b = model.d_b();
    let dim = model.dim();
    let in_q = |site: usize| -> Result<()> {
        if q.contains(site) {
            Ok(())
        } else {
            Err(Error::Domain(format!("site {site} is outside Q")))
        }
    };
    let basis = |site: usize, level: usize| -> Result<usize> {
        if site >= n || level >= d_b {
            return Err(Error::Domain(format!("basis state ({site}, {level}) out of range")));
        }
        Ok(site * d_b + level)
    };
    let gamma = match recipe {
        InitialStateRecipe::BellInQ { sites } => {
            if d_b < 2 {
                return Err(Error::Domain("bell-in-q needs d_B >= 2".into()));
            }
            if sites[0] == sites[1] {
                return Err(Error::Domain("bell-in-q needs two distinct sites".into()));
            }
            in_q(sites[0])?;
            in_q(sites[1])?;
            let mut psi = CVec::zeros(dim);
            psi[basis(sites[0], 0)?] = ONE;
            psi[basis(sites[1], 1)?] = ONE;
            DensityOperator::pure(&psi, d_b)?
        }
        InitialStateRecipe::Product { site, level } => {
            let mut psi = CVec::zeros(dim);
            psi[basis(*site, *level)?] = ONE;
            DensityOperator::pure(&psi, d_b)?
        }
        InitialStateRecipe::Mixture { components } => {
            let total: f64 = components.iter().map(|m| m.weight).sum();
            if components.is_empty() || components.iter().any(|m| !(m.weight >= 0.0)) || !(total > 0.0) {
                return Err(Error::Domain("mixture needs nonnegative weights with positive sum".into()));
            }
            let mut m = CMat::zeros(dim, dim);
            for comp in components {
                let i = basis(comp.site, comp.level)?;
                m[(i, i)] += c(comp.weight / total, 0.0);
            }
            DensityOperator::new(m, d_b)?
        }
        InitialStateRecipe::Gibbs { beta } => {
            if q.is_empty() {
                return Err(Error::Domain("gibbs recipe needs a nonempty Q".into()));
            }
            if !(beta.is_finite() && *beta >= 0.0) {
                return Err(Error::Domain("beta must be finite and nonnegative".into()));
            }
            let idx = q.tensor_indices(d_b);
            let h = principal_block(model.h0(), &idx);
            let (values, vectors) = hermitian_eigen(&h);
            let lowest = values[0];
            let g = spectral_function(&values, &vectors, |l| c((-beta * (l - lowest)).exp(), 0.0));
            let z = g.trace().re;
            let mut m = CMat::zeros(dim, dim);
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    m[(i, j)] = g[(a, b)] / c(z, 0.0);
                }
            }
            DensityOperator::new(m, d_b)?
        }
    };
    let m = gamma.matrix();
    let q_idx = q.tensor_indices(d_b);
    let mut keep = vec![false; dim];
    for &i in &q_idx {
        keep[i] = true;
    }
    let outside = CMat::from_fn(dim, dim, |i, j| if keep[i] && keep[j] { ZERO } else { m[(i, j)] });
    let (values, vectors) = hermitian_eigen(m);
    let pure = values.len() < 2 || values[values.len() - 2] <= 1e-12;
    let schmidt = if pure {
        let v = vectors.column(values.len() - 1).into_owned();
        Some(schmidt_rank(&v, d_b, RANK_TOL)?)
    } else {
        None
    };
    let witness = schmidt_number_witness(m, d_b)?;
    let one = CMat::identity(dim, dim);
    let cert = InitialStateCertificate {
        recipe: recipe.label(),
        pure,
        schmidt_rank: schmidt,
        support_residual: max_abs_entry(&outside),
        negativity: crate::entanglement::negativity(m, d_b),
        ppt: witness.ppt,
        h0_trace_norm: trace_norm(&(model.h0() * m)),
        weighted_trace_norm: trace_norm(&((model.h0() + one) * m)),
    };
    if matches!(recipe, InitialStateRecipe::BellInQ { .. } | InitialStateRecipe::Gibbs { .. }) && cert.support_residual != 0.0 {
        return Err(Error::CheckFailed(format!(
            "Q-supported recipe leaks outside Q by {:.3e}",
            cert.support_residual
        )));
    }
    Ok((gamma, cert))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub sites: usize,
    pub d_b: usize,
    pub dim: usize,
    pub alpha4: f64,
    pub alpha5: f64,
    pub shift_a: f64,
    pub shift_b: f64,
    pub locality_residual: f64,
    pub hermiticity_residual: f64,
    pub overridden: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeInfo {
    pub label: String,
    pub role: ProbeRole,
    pub sites: Vec<usize>,
    pub d_xy: f64,
    pub d_xq: f64,
    pub d_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityRow {
    pub row: usize,
    pub probe: String,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub status: SeparabilityStatus,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub vacuous: bool,
    pub detail: String,
    /// Sample rows the verdict was computed from.
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub config: ScenarioConfig,
    pub crate_version: String,
    pub build: BuildSummary,
    pub certificate: InitialStateCertificate,
    pub probes: Vec<ProbeInfo>,
    pub times: Vec<f64>,
    pub samples: Vec<SweepSample>,
    pub c_ref: f64,
    pub residual_fit: Option<ConeFitResult>,
    pub residual_fit_note: Option<String>,
    pub leakage_fit: Option<ConeFitResult>,
    pub leakage_fit_note: Option<String>,
    /// `c(μ_fit)` from the residual fit.
    pub velocity_at_residual_fit: Option<f64>,
    pub velocity_at_leakage_fit: Option<f64>,
    pub velocities: Vec<VelocityRow>,
    pub lower_bound_residual: f64,
    pub uniform_bound: Option<crate::evolution::UniformBoundReport>,
    pub theorem_a: TheoremAReport,
    pub theorem_b: TheoremBReport,
    /// Which fit supplied `μ` and `c_fit` to the protocol windows.
    pub window_source: String,
    pub separability: Vec<SeparabilityRow>,
    pub verdicts: Vec<Verdict>,
    pub wall_clock_seconds: f64,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))
    }

    /// Fields the fixture comparison ignores.
    pub fn without_timing(&self) -> Self {
        RunRecord {
            wall_clock_seconds: 0.0,
            ..self.clone()
        }
    }
}

/// Concatenates sample tables of records sharing one config hash.
pub fn merge_samples(records: &[RunRecord]) -> Result<Vec<SweepSample>> {
    let Some(first) = records.first() else {
        return Ok(vec![]);
    };
    let mut out = vec![];
    for r in records {
        if r.config_hash != first.config_hash {
            return Err(Error::HashMismatch {
                left: first.config_hash.clone(),
                right: r.config_hash.clone(),
            });
        }
        out.extend(r.samples.iter().cloned());
    }
    for (i, s) in out.iter_mut().enumerate() {
        s.row = i;
    }
    Ok(out)
}

fn distance_or_zero(a: &Region, b: &Region) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Ok(f64::INFINITY);
    }
    region_distance(a, b)
}

struct Probe {
    info: ProbeInfo,
    region: Region,
    disjoint_from_y: bool,
}

fn fit_note(r: Result<ConeFitResult>) -> (Option<ConeFitResult>, Option<String>) {
    match r {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn envelope_verdict(
    name: &str,
    samples: &[SweepSample],
    fit: &Option<ConeFitResult>,
    note: &Option<String>,
    c_at_fit: Option<f64>,
    slack: f64,
) -> Verdict {
    match (fit, c_at_fit) {
        (Some(f), Some(cm)) => {
            let bad = envelope_violations(samples, f);
            let fast = f.c_fit > (1.0 + slack) * cm;
            Verdict {
                name: name.into(),
                passed: bad.is_empty() && !fast,
                vacuous: false,
                detail: format!(
                    "mu_fit = {:.6}, c_fit = {:.6}, c(mu_fit) = {:.6}, ratio = {:.4} (limit {:.2}), rms = {:.3e}, {} samples, {} above envelope",
                    f.mu_fit,
                    f.c_fit,
                    cm,
                    f.c_fit / cm,
                    1.0 + slack,
                    f.rms_log_residual,
                    f.samples_used,
                    bad.len()
                ),
                rows: f.rows_used.clone(),
            }
        }
        _ => Verdict {
            name: name.into(),
            passed: true,
            vacuous: true,
            detail: format!("no fit: {}", note.clone().unwrap_or_default()),
            rows: vec![],
        },
    }
}

/// Full sweep over the probe × time grid, fits, and protocol verdicts.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunRecord> {
    let started = Instant::now();
    cfg.validate()?;
    let ctx = |e: Error| e.context(format!("scenario {}", cfg.name));
    let geometry = build_geometry(cfg).map_err(ctx)?;
    let model = build_scenario_model(cfg, &geometry).map_err(ctx)?;
    let report = *model.report();
    let d_b = model.d_b();
    let q = Region::new(&geometry, cfg.regions.q.iter().copied()).map_err(ctx)?;
    let y = model.coupling().support().clone();
    let (gamma0, certificate) = make_initial_state(&cfg.initial_state, &model, &q).map_err(ctx)?;
    let caches = ModelCaches::new(&model).map_err(ctx)?;
    let times = cfg.time.points()?;

    let mut probes = vec![];
    for p in &cfg.probes {
        let region = Region::new(&geometry, p.members()).map_err(ctx)?;
        let d_xy = region_distance(&region, &y).map_err(ctx)?;
        let d_xq = distance_or_zero(&region, &q).map_err(ctx)?;
        let d_prime = d_xy.min(distance_or_zero(&region.complement(), &q).map_err(ctx)?);
        if p.role == ProbeRole::Far && (!region.is_disjoint(&y) || !region.is_disjoint(&q)) {
            return Err(ctx(Error::Config(format!("far probe {} must avoid Y and Q", p.label))));
        }
        if p.role == ProbeRole::Enclosing && !q.is_subset(&region) {
            return Err(ctx(Error::Config(format!("enclosing probe {} must contain Q", p.label))));
        }
        probes.push(Probe {
            info: ProbeInfo {
                label: p.label.clone(),
                role: p.role,
                sites: region.to_vec(),
                d_xy,
                d_xq,
                d_prime,
            },
            disjoint_from_y: region.is_disjoint(&y),
            region,
        });
    }

    let y_sites = y.to_vec();
    let per_time: Vec<Vec<(f64, Option<f64>, f64, usize, f64)>> = times
        .par_iter()
        .map(|&t| -> Result<_> {
            let full = evolve(&gamma0, &caches.coupled, t)?;
            let free = evolve(&gamma0, &caches.free, t)?;
            let diff = full.matrix() - free.matrix();
            let u_a = caches.system_a.propagator(t);
            probes
                .iter()
                .map(|p| {
                    let residual = if t == 0.0 { 0.0 } else { localized_trace_norm(&diff, &p.region, d_b) };
                    let leakage = p.disjoint_from_y.then(|| {
                        if t == 0.0 {
                            0.0
                        } else {
                            op_norm(&block(&u_a, &p.region.to_vec(), &y_sites))
                        }
                    });
                    let loc = localize(&full, &p.region)?;
                    let block = loc.block();
                    let negativity = crate::entanglement::negativity(&block, d_b);
                    let weight = loc.weight();
                    let sn = if weight > WITNESS_MIN_WEIGHT {
                        schmidt_number_witness(&block, d_b)?.witness_lower_bound
                    } else {
                        0
                    };
                    Ok((residual, leakage, negativity, sn, weight))
                })
                .collect()
        })
        .collect::<Result<_>>()
        .map_err(ctx)?;

    let mut samples = Vec::with_capacity(probes.len() * times.len());
    for (pi, p) in probes.iter().enumerate() {
        for (ti, &t) in times.iter().enumerate() {
            let (residual, leakage, negativity, sn_witness, weight) = per_time[ti][pi];
            samples.push(SweepSample {
                row: samples.len(),
                probe: p.info.label.clone(),
                role: p.info.role,
                d: p.info.d_xy,
                d_xq: p.info.d_xq,
                d_prime: p.info.d_prime,
                t,
                residual,
                leakage,
                negativity,
                sep_lower: negativity / d_b as f64,
                sn_witness,
                weight,
            });
        }
    }

    let an = &cfg.analysis;
    let opts = FitOptions {
        noise_floor: an.noise_floor,
        margin: an.margin,
        min_samples: an.min_samples,
    };
    let tau = cfg.hopping.tau;
    let c_ref = reference_cone_speed(tau, an.mu_ref);
    let far: Vec<SweepSample> = samples.iter().filter(|s| s.role == ProbeRole::Far).cloned().collect();
    let (residual_fit, residual_fit_note) = fit_note(fit_envelope(&far, Field::Residual, c_ref, &opts));
    let (leakage_fit, leakage_fit_note) = fit_note(fit_envelope(&far, Field::Leakage, c_ref, &opts));
    let at_fit = |f: &Option<ConeFitResult>| -> Result<Option<f64>> {
        match f {
            Some(f) if tau > 0.0 => Ok(Some(velocity_at_fit(tau, f.mu_fit)?)),
            _ => Ok(None),
        }
    };
    let velocity_at_residual_fit = at_fit(&residual_fit)?;
    let velocity_at_leakage_fit = at_fit(&leakage_fit)?;
    let velocities = if tau > 0.0 {
        velocity_table(&[DispersionLaw::tight_binding(tau)], &cfg.velocity.mu, &GridSpec::default())?
    } else {
        vec![]
    };

    let mut verdicts = vec![];
    verdicts.push(envelope_verdict(
        "residual-envelope",
        &far,
        &residual_fit,
        &residual_fit_note,
        velocity_at_residual_fit,
        an.velocity_slack,
    ));
    verdicts.push(envelope_verdict(
        "leakage-envelope",
        &far,
        &leakage_fit,
        &leakage_fit_note,
        velocity_at_leakage_fit,
        an.velocity_slack,
    ));
    verdicts.push(match (&residual_fit, &leakage_fit) {
        (Some(r), Some(l)) => {
            let rel = (r.c_fit - l.c_fit).abs() / r.c_fit.min(l.c_fit);
            let mut rows = r.rows_used.clone();
            rows.extend(&l.rows_used);
            rows.sort_unstable();
            rows.dedup();
            Verdict {
                name: "velocity-agreement".into(),
                passed: rel <= an.velocity_slack,
                vacuous: false,
                detail: format!(
                    "c_fit residual = {:.6}, leakage = {:.6}, relative gap = {:.4} (limit {:.2})",
                    r.c_fit, l.c_fit, rel, an.velocity_slack
                ),
                rows,
            }
        }
        _ => Verdict {
            name: "velocity-agreement".into(),
            passed: true,
            vacuous: true,
            detail: "needs both fits".into(),
            rows: vec![],
        },
    });

    // Window speed and decay rate: residual fit, else leakage fit, else the
    // reference cone.
    let (mu_sep, c_fit, window_source) = match (&residual_fit, &leakage_fit) {
        (Some(f), _) => (f.mu_fit, f.c_fit, "residual-fit"),
        (None, Some(f)) => (f.mu_fit, f.c_fit, "leakage-fit"),
        _ => (an.mu_ref, c_ref.max(f64::MIN_POSITIVE), "reference-cone"),
    };
    let theorem_a = verify_theorem_a(&samples, mu_sep, an.separability_speed, an.margin, c_fit, &opts);
    let mut rows_a = theorem_a.envelope_rows.clone();
    rows_a.extend(&theorem_a.negativity_rows);
    rows_a.sort_unstable();
    verdicts.push(Verdict {
        name: "separability-decay".into(),
        passed: theorem_a.passed,
        vacuous: theorem_a.vacuous,
        detail: format!(
            "2mu = {:.6}, c = {}, margin = {}, window t < {} d / {:.6} ({window_source}), log A = {}, rms = {:.3e}, {} violations",
            2.0 * mu_sep,
            an.separability_speed,
            an.margin,
            theorem_a.window_factor,
            c_fit,
            theorem_a.log_prefactor.map_or("n/a".into(), |v| format!("{v:.6}")),
            theorem_a.rms_log_residual,
            theorem_a.violations.len()
        ),
        rows: rows_a,
    });

    let k = an.k.or(certificate.schmidt_rank).unwrap_or(1);
    let theorem_b = verify_theorem_b(&samples, k, c_fit);
    verdicts.push(Verdict {
        name: "schmidt-number-persistence".into(),
        passed: theorem_b.passed,
        vacuous: theorem_b.rows_checked.is_empty(),
        detail: format!(
            "k = {k}, window t < {} d' / {:.6} ({window_source}), {} rows checked, first drops {:?}{}",
            theorem_b.window_factor,
            c_fit,
            theorem_b.rows_checked.len(),
            theorem_b.first_drop,
            if theorem_b.flags.is_empty() {
                String::new()
            } else {
                format!(", flags: {}", theorem_b.flags.join("; "))
            }
        ),
        rows: theorem_b.rows_checked.clone(),
    });

    let lower_bound_residual = lower_bound_check(&model).map_err(ctx)?;
    verdicts.push(Verdict {
        name: "lower-bound".into(),
        passed: lower_bound_residual >= -1e-9,
        vacuous: false,
        detail: format!("min eig of (H_AB + 1) - (1 - alpha4)(H_0 + 1) = {lower_bound_residual:.3e}"),
        rows: vec![],
    });

    let t_max = times.last().copied().unwrap_or(0.0);
    let n_grid = an.lemma_grid.max(2);
    let lemma_grid: Vec<f64> = (0..n_grid).map(|i| t_max * i as f64 / (n_grid - 1) as f64).collect();
    let uniform = weighted_uniform_bound_check(&gamma0, &lemma_grid, &model, &caches);
    let (uniform_bound, uniform_verdict) = match uniform {
        Ok(r) => {
            let v = Verdict {
                name: "uniform-weighted-bound".into(),
                passed: r.passed,
                vacuous: false,
                detail: format!(
                    "observed {:.9} <= lemma constant {:.9} over {n_grid} times",
                    r.observed, r.lemma_constant
                ),
                rows: vec![],
            };
            (Some(r), v)
        }
        Err(e) => (
            None,
            Verdict {
                name: "uniform-weighted-bound".into(),
                passed: false,
                vacuous: false,
                detail: e.to_string(),
                rows: vec![],
            },
        ),
    };
    verdicts.push(uniform_verdict);

    let search = SeparableSearch {
        seed: cfg.seed,
        ..SeparableSearch::default()
    };
    let mut separability = vec![];
    for p in probes.iter().filter(|p| p.info.role == ProbeRole::Far) {
        let d = p.info.d_xy.min(p.info.d_xq);
        let last = samples
            .iter()
            .rev()
            .find(|s| s.probe == p.info.label && d - an.separability_speed * s.t >= an.margin && s.weight > SEARCH_MIN_WEIGHT);
        if let Some(s) = last {
            let full = evolve(&gamma0, &caches.coupled, s.t)?;
            let block = localize(&full, &p.region)?.block();
            let v = sep_distance_bounds(&block, d_b, an.kappa, &search)?;
            separability.push(SeparabilityRow {
                row: s.row,
                probe: s.probe.clone(),
                t: s.t,
                lower: v.lower_bound,
                upper: v.upper_bound,
                status: v.status,
                converged: v.converged,
            });
        }
    }

    Ok(RunRecord {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        build: BuildSummary {
            sites: model.d_a(),
            d_b,
            dim: model.dim(),
            alpha4: report.alpha4,
            alpha5: report.alpha5,
            shift_a: report.shift_a,
            shift_b: report.shift_b,
            locality_residual: report.locality_residual,
            hermiticity_residual: report.hermiticity_residual,
            overridden: report.overridden,
        },
        certificate,
        probes: probes.into_iter().map(|p| p.info).collect(),
        times,
        samples,
        c_ref,
        residual_fit,
        residual_fit_note,
        leakage_fit,
        leakage_fit_note,
        velocity_at_residual_fit,
        velocity_at_leakage_fit,
        velocities,
        lower_bound_residual,
        uniform_bound,
        theorem_a,
        theorem_b,
        window_source: window_source.into(),
        separability,
        verdicts,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}
