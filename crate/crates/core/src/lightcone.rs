//! Exponential light-cone envelopes fitted to sweep tables, and the two
//! entanglement protocols built on them.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::velocity::{c_mu, DispersionLaw, GridSpec};

pub const DEFAULT_NOISE_FLOOR: f64 = 1e-13;
pub const DEFAULT_MARGIN: f64 = 2.0;
pub const DEFAULT_MU_REF: f64 = 0.5;
pub const MIN_FIT_SAMPLES: usize = 10;
/// Fraction of the fitted arrival time inside which the protocols assert.
pub const WINDOW_FACTOR: f64 = 0.8;
pub const NEGATIVITY_CEILING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeRole {
    /// Disjoint from both the coupling region and the entangled region.
    Far,
    /// Contains the entangled region.
    Enclosing,
}

/// One `(X, t)` point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub row: usize,
    pub probe: String,
    pub role: ProbeRole,
    /// `d_XY`
    pub d: f64,
    /// `d_XQ`
    pub d_xq: f64,
    /// `min(d_XY, d_{X^c Q})`
    pub d_prime: f64,
    pub t: f64,
    pub residual: f64,
    /// Absent when `X` meets the coupling region.
    pub leakage: Option<f64>,
    /// `(‖χ̃_X(Γ_t)^{T_B}‖_1 - Tr χ̃_X(Γ_t)) / 2`, unnormalized.
    pub negativity: f64,
    /// `negativity / d_B`, the lower bound on the distance to separable.
    pub sep_lower: f64,
    /// Schmidt-number lower bound of the normalized localization, 0 when
    /// the localized weight vanishes.
    pub sn_witness: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Field {
    Residual,
    Leakage,
    Negativity,
    SepLower,
}

impl Field {
    pub fn value(self, s: &SweepSample) -> Option<f64> {
        match self {
            Field::Residual => Some(s.residual),
            Field::Leakage => s.leakage,
            Field::Negativity => Some(s.negativity),
            Field::SepLower => Some(s.sep_lower),
        }
    }

    /// Entanglement fields see both the coupling and the initially
    /// entangled region, so their distance is `min(d_XY, d_XQ)`.
    pub fn distance(self, s: &SweepSample) -> f64 {
        match self {
            Field::Residual | Field::Leakage => s.d,
            Field::Negativity | Field::SepLower => s.d.min(s.d_xq),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Residual => "residual",
            Field::Leakage => "leakage",
            Field::Negativity => "negativity",
            Field::SepLower => "sep-lower",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub noise_floor: f64,
    pub margin: f64,
    pub min_samples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            noise_floor: DEFAULT_NOISE_FLOOR,
            margin: DEFAULT_MARGIN,
            min_samples: MIN_FIT_SAMPLES,
        }
    }
}

/// `2τ sinh(μ)/μ`, the initial exclusion cone.
pub fn reference_cone_speed(tau: f64, mu_ref: f64) -> f64 {
    if mu_ref == 0.0 {
        2.0 * tau
    } else {
        2.0 * tau * mu_ref.sinh() / mu_ref
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeFitResult {
    pub field: Field,
    pub mu_fit: f64,
    pub c_fit: f64,
    pub log_c_fit: f64,
    pub rms_log_residual: f64,
    pub samples_used: usize,
    pub noise_floor: f64,
    pub margin: f64,
    pub c_ref: f64,
    /// 2 when the exclusion was repeated with the fitted cone.
    pub exclusion_passes: usize,
    pub rows_used: Vec<usize>,
}

impl ConeFitResult {
    /// `log C - μ(d - c t)`
    pub fn log_envelope(&self, d: f64, t: f64) -> f64 {
        self.log_c_fit - self.mu_fit * (d - self.c_fit * t)
    }
}

struct Usable {
    rows: Vec<usize>,
    d: Vec<f64>,
    t: Vec<f64>,
    log_v: Vec<f64>,
}

fn usable(samples: &[SweepSample], field: Field, cone: f64, opts: &FitOptions) -> Usable {
    let mut u = Usable {
        rows: vec![],
        d: vec![],
        t: vec![],
        log_v: vec![],
    };
    for s in samples {
        let Some(v) = field.value(s) else { continue };
        let d = field.distance(s);
        if v.is_finite() && v > opts.noise_floor && d - cone * s.t > opts.margin {
            u.rows.push(s.row);
            u.d.push(d);
            u.t.push(s.t);
            u.log_v.push(v.ln());
        }
    }
    u
}

fn distinct(values: &[f64]) -> usize {
    values.iter().map(|v| v.to_bits()).collect::<BTreeSet<_>>().len()
}

fn least_squares(u: &Usable, field: Field, c_ref: f64, opts: &FitOptions) -> Result<ConeFitResult> {
    let n = u.rows.len();
    if n < opts.min_samples.max(3) {
        return Err(Error::InsufficientSamples {
            usable: n,
            required: opts.min_samples.max(3),
        });
    }
    if distinct(&u.d) < 2 {
        return Err(Error::DegenerateDesign("distance"));
    }
    if distinct(&u.t) < 2 {
        return Err(Error::DegenerateDesign("time"));
    }
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => -u.d[i],
        _ => u.t[i],
    });
    let rhs = DVector::from_column_slice(&u.log_v);
    let beta = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let (log_c, mu, mu_c) = (beta[0], beta[1], beta[2]);
    if !(mu > 0.0) {
        return Err(Error::Numerical(format!("fitted decay rate {mu:.6e} is not positive")));
    }
    let c_fit = mu_c / mu;
    if !(c_fit > 0.0) {
        return Err(Error::Numerical(format!("fitted velocity {c_fit:.6e} is not positive")));
    }
    let resid = &design * &beta - rhs;
    let rms = (resid.norm_squared() / n as f64).sqrt();
    Ok(ConeFitResult {
        field,
        mu_fit: mu,
        c_fit,
        log_c_fit: log_c,
        rms_log_residual: rms,
        samples_used: n,
        noise_floor: opts.noise_floor,
        margin: opts.margin,
        c_ref,
        exclusion_passes: 1,
        rows_used: u.rows.clone(),
    })
}

/// Least-squares fit of `log v ≈ log C - μ d + μ c t` over samples above the
/// noise floor and outside the cone `d - c_ref t > margin`; the exclusion is
/// then repeated once with the fitted cone.
pub fn fit_envelope(samples: &[SweepSample], field: Field, c_ref: f64, opts: &FitOptions) -> Result<ConeFitResult> {
    if !(c_ref >= 0.0) || !c_ref.is_finite() {
        return Err(Error::Domain(format!("reference cone speed {c_ref} must be finite and nonnegative")));
    }
    let first = least_squares(&usable(samples, field, c_ref, opts), field, c_ref, opts)?;
    match least_squares(&usable(samples, field, first.c_fit, opts), field, c_ref, opts) {
        Ok(mut second) => {
            second.exclusion_passes = 2;
            Ok(second)
        }
        Err(_) => Ok(first),
    }
}

/// Rows of usable out-of-cone samples lying above `envelope + 3·rms`.
pub fn envelope_violations(samples: &[SweepSample], fit: &ConeFitResult) -> Vec<usize> {
    let opts = FitOptions {
        noise_floor: fit.noise_floor,
        margin: fit.margin,
        min_samples: 0,
    };
    let u = usable(samples, fit.field, fit.c_fit, &opts);
    let cushion = 3.0 * fit.rms_log_residual + 1e-12;
    (0..u.rows.len())
        .filter(|&i| u.log_v[i] > fit.log_envelope(u.d[i], u.t[i]) + cushion)
        .map(|i| u.rows[i])
        .collect()
}

/// `c(μ_fit)` for the tight-binding band.
pub fn velocity_at_fit(tau: f64, mu_fit: f64) -> Result<f64> {
    Ok(c_mu(&DispersionLaw::tight_binding(tau), mu_fit, &GridSpec::default())?.c_of_mu)
}

/// Smallest grid time at which the field at distance `d` exceeds
/// `threshold`, over every sample at that distance.
pub fn arrival_time(samples: &[SweepSample], field: Field, d: f64, threshold: f64) -> Result<Option<f64>> {
    let at_d: Vec<&SweepSample> = samples.iter().filter(|s| (field.distance(s) - d).abs() < 1e-9).collect();
    if at_d.is_empty() {
        return Err(Error::Domain(format!("distance {d} is not in the sample grid")));
    }
    Ok(at_d
        .iter()
        .filter(|s| field.value(s).is_some_and(|v| v > threshold))
        .map(|s| s.t)
        .min_by(f64::total_cmp))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub row: usize,
    pub kind: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremAReport {
    pub mu: f64,
    pub c: f64,
    pub margin: f64,
    pub c_fit: f64,
    pub window_factor: f64,
    /// Fitted prefactor of `A e^{-2μ(d - ct)}`; absent when too few samples
    /// clear the noise floor.
    pub log_prefactor: Option<f64>,
    pub rms_log_residual: f64,
    pub envelope_rows: Vec<usize>,
    pub negativity_rows: Vec<usize>,
    /// Both exponents fitted freely, when enough data exists.
    pub free_fit: Option<ConeFitResult>,
    pub free_fit_note: Option<String>,
    /// First time entanglement was seen in each far probe, in or out of scope.
    pub arrivals: Vec<(String, Option<f64>)>,
    pub violations: Vec<Violation>,
    pub vacuous: bool,
    pub passed: bool,
}

/// Far probes only: the lower bound on the distance to separable must follow
/// `A e^{-2μ(d - ct)}` wherever `d - ct >= margin`, and the negativity must
/// stay below `1e-6` while `t < 0.8 d / c_fit`.
pub fn verify_theorem_a(
    samples: &[SweepSample],
    mu: f64,
    c: f64,
    margin: f64,
    c_fit: f64,
    opts: &FitOptions,
) -> TheoremAReport {
    let far: Vec<&SweepSample> = samples
        .iter()
        .filter(|s| s.role == ProbeRole::Far && s.d > 0.0 && s.d_xq > 0.0)
        .collect();
    let field = Field::SepLower;
    let scope: Vec<&SweepSample> = far
        .iter()
        .copied()
        .filter(|s| field.distance(s) - c * s.t >= margin)
        .collect();
    let fitted: Vec<(usize, f64, f64)> = scope
        .iter()
        .filter(|s| s.sep_lower > opts.noise_floor)
        .map(|s| (s.row, s.sep_lower.ln(), 2.0 * mu * (field.distance(s) - c * s.t)))
        .collect();
    let mut violations = vec![];
    let (log_prefactor, rms) = if fitted.len() >= opts.min_samples.max(1) {
        let log_a = fitted.iter().map(|(_, lv, x)| lv + x).sum::<f64>() / fitted.len() as f64;
        let rms = (fitted.iter().map(|(_, lv, x)| (lv + x - log_a).powi(2)).sum::<f64>() / fitted.len() as f64).sqrt();
        for &(row, lv, x) in &fitted {
            let bound = log_a - x + 3.0 * rms + 1e-12;
            if lv > bound {
                violations.push(Violation {
                    row,
                    kind: "above 2μ envelope".into(),
                    value: lv.exp(),
                    bound: bound.exp(),
                });
            }
        }
        (Some(log_a), rms)
    } else {
        (None, 0.0)
    };
    let mut negativity_rows = vec![];
    for s in &far {
        let d = field.distance(s);
        if s.t < WINDOW_FACTOR * d / c_fit {
            negativity_rows.push(s.row);
            if s.negativity > NEGATIVITY_CEILING {
                violations.push(Violation {
                    row: s.row,
                    kind: "negativity inside window".into(),
                    value: s.negativity,
                    bound: NEGATIVITY_CEILING,
                });
            }
        }
    }
    let far_owned: Vec<SweepSample> = far.iter().map(|s| (*s).clone()).collect();
    let (free_fit, free_fit_note) = match fit_envelope(&far_owned, field, c, opts) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut probes: Vec<String> = far.iter().map(|s| s.probe.clone()).collect();
    probes.dedup();
    let arrivals = probes
        .into_iter()
        .map(|p| {
            let first = far
                .iter()
                .filter(|s| s.probe == p && s.negativity > NEGATIVITY_CEILING)
                .map(|s| s.t)
                .min_by(f64::total_cmp);
            (p, first)
        })
        .collect();
    let vacuous = log_prefactor.is_none() && negativity_rows.is_empty();
    TheoremAReport {
        mu,
        c,
        margin,
        c_fit,
        window_factor: WINDOW_FACTOR,
        log_prefactor,
        rms_log_residual: rms,
        envelope_rows: fitted.iter().map(|f| f.0).collect(),
        negativity_rows,
        free_fit,
        free_fit_note,
        arrivals,
        passed: violations.is_empty(),
        violations,
        vacuous,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremBReport {
    pub k: usize,
    pub c_fit: f64,
    pub window_factor: f64,
    pub rows_checked: Vec<usize>,
    pub first_drop: Vec<(String, Option<f64>)>,
    pub flags: Vec<String>,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

/// Enclosing probes only: the Schmidt-number witness must stay at least `k`
/// while `t < 0.8 d' / c_fit`.
pub fn verify_theorem_b(samples: &[SweepSample], k: usize, c_fit: f64) -> TheoremBReport {
    let enclosing: Vec<&SweepSample> = samples.iter().filter(|s| s.role == ProbeRole::Enclosing).collect();
    if k <= 1 {
        return TheoremBReport {
            k,
            c_fit,
            window_factor: WINDOW_FACTOR,
            rows_checked: vec![],
            first_drop: vec![],
            flags: vec![format!("k = {k}: initial state carries no Schmidt number to protect")],
            violations: vec![],
            passed: true,
        };
    }
    let mut probes: Vec<String> = enclosing.iter().map(|s| s.probe.clone()).collect();
    probes.dedup();
    let mut rows_checked = vec![];
    let mut violations = vec![];
    let mut flags = vec![];
    let mut first_drop = vec![];
    for p in probes {
        let rows: Vec<&&SweepSample> = enclosing.iter().filter(|s| s.probe == p).collect();
        let d_prime = rows[0].d_prime;
        if d_prime <= 0.0 {
            flags.push(format!("{p}: d′ too small (d′ = {d_prime}), assertion window empty"));
        }
        let limit = WINDOW_FACTOR * d_prime / c_fit;
        for s in &rows {
            if s.t < limit {
                rows_checked.push(s.row);
                if s.sn_witness < k {
                    violations.push(Violation {
                        row: s.row,
                        kind: "witness below k".into(),
                        value: s.sn_witness as f64,
                        bound: k as f64,
                    });
                }
            }
        }
        let drop = rows
            .iter()
            .filter(|s| s.sn_witness < k)
            .map(|s| s.t)
            .min_by(f64::total_cmp);
        first_drop.push((p, drop));
    }
    TheoremBReport {
        k,
        c_fit,
        window_factor: WINDOW_FACTOR,
        rows_checked,
        first_drop,
        flags,
        passed: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(row: usize, d: f64, t: f64, residual: f64) -> SweepSample {
        SweepSample {
            row,
            probe: format!("X{d}"),
            role: ProbeRole::Far,
            d,
            d_xq: d + 9.0,
            d_prime: 0.0,
            t,
            residual,
            leakage: Some(residual),
            negativity: 0.0,
            sep_lower: 0.0,
            sn_witness: 0,
            weight: 0.0,
        }
    }

    fn synthetic(f: impl Fn(f64, f64) -> f64) -> Vec<SweepSample> {
        let mut out = vec![];
        for d in 4..=14 {
            for it in 0..=20 {
                let t = 0.2 * it as f64;
                out.push(sample(out.len(), d as f64, t, f(d as f64, t)));
            }
        }
        out
    }

    #[test]
    fn recovers_exact_exponential() {
        let s = synthetic(|d, t| 0.3 * (-0.8 * (d - 1.7 * t)).exp());
        let fit = fit_envelope(&s, Field::Residual, 2.0, &FitOptions::default()).unwrap();
        assert!((fit.mu_fit - 0.8).abs() < 1e-6);
        assert!((fit.c_fit - 1.7).abs() < 1e-6);
        assert!((fit.log_c_fit - 0.3f64.ln()).abs() < 1e-6);
        assert!(fit.rms_log_residual < 1e-9);
        assert!(envelope_violations(&s, &fit).is_empty());
    }

    #[test]
    fn below_floor_is_insufficient() {
        let s = synthetic(|_, _| 1e-20);
        let err = fit_envelope(&s, Field::Residual, 2.0, &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { usable: 0, .. }));
        assert!(err.to_string().contains("insufficient samples"));
    }

    #[test]
    fn degenerate_axes_are_named() {
        let one_d: Vec<_> = (0..20).map(|i| sample(i, 10.0, 0.1 * i as f64, 1e-3)).collect();
        let e = fit_envelope(&one_d, Field::Residual, 2.0, &FitOptions::default()).unwrap_err();
        assert!(e.to_string().contains("distance"));
        let one_t: Vec<_> = (0..20).map(|i| sample(i, 4.0 + i as f64, 0.5, 1e-3)).collect();
        let e = fit_envelope(&one_t, Field::Residual, 2.0, &FitOptions::default()).unwrap_err();
        assert!(e.to_string().contains("time"));
    }

    #[test]
    fn arrival_time_cases() {
        let s = synthetic(|d, t| 0.3 * (-0.8 * (d - 1.7 * t)).exp());
        assert_eq!(arrival_time(&s, Field::Residual, 5.0, 1e9).unwrap(), None);
        let t = arrival_time(&s, Field::Residual, 5.0, 0.1).unwrap().unwrap();
        // 0.3 e^{-0.8(5 - 1.7t)} > 0.1 first for t > 2.1333
        assert!((t - 2.2).abs() < 1e-12);
        assert!(arrival_time(&s, Field::Residual, 100.0, 0.1).is_err());
        let zero = synthetic(|_, _| 0.0);
        assert_eq!(arrival_time(&zero, Field::Residual, 4.0, 1e-10).unwrap(), None);
    }

    #[test]
    fn theorem_a_vacuous_for_product_states() {
        let s = synthetic(|_, _| 0.0);
        let r = verify_theorem_a(&s, 0.5, 2.2, 2.0, 2.0, &FitOptions::default());
        assert!(r.passed);
        assert!(r.log_prefactor.is_none());
    }

    #[test]
    fn theorem_a_excludes_points_inside_the_cone() {
        let mut s = synthetic(|_, _| 0.0);
        for x in s.iter_mut() {
            let d = x.d.min(x.d_xq);
            x.sep_lower = 0.1 * (-(d - 2.0 * x.t)).exp().min(1.0);
        }
        let r = verify_theorem_a(&s, 0.5, 2.2, 2.0, 2.0, &FitOptions::default());
        assert!(r.passed, "{:?}", r.violations);
        for row in &r.envelope_rows {
            let x = &s[*row];
            assert!(x.d - 2.2 * x.t >= 2.0);
        }
        s[3].negativity = 1e-3;
        let r = verify_theorem_a(&s, 0.5, 2.2, 2.0, 2.0, &FitOptions::default());
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].row, 3);
    }

    #[test]
    fn theorem_b_flags_zero_d_prime() {
        let s: Vec<_> = (0..5)
            .map(|i| SweepSample {
                role: ProbeRole::Enclosing,
                d_prime: 0.0,
                sn_witness: 2,
                ..sample(i, 4.0, 0.2 * i as f64, 0.0)
            })
            .collect();
        let r = verify_theorem_b(&s, 2, 2.0);
        assert!(r.passed);
        assert!(r.rows_checked.is_empty());
        assert!(r.flags[0].contains("d′ too small"));
    }

    #[test]
    fn theorem_b_reports_drop() {
        let s: Vec<_> = (0..10)
            .map(|i| SweepSample {
                role: ProbeRole::Enclosing,
                d_prime: 4.0,
                sn_witness: if i < 7 { 2 } else { 1 },
                ..sample(i, 4.0, 0.2 * i as f64, 0.0)
            })
            .collect();
        let r = verify_theorem_b(&s, 2, 4.0);
        assert!(r.passed);
        assert_eq!(r.first_drop[0].1, Some(1.4000000000000001));
        let r = verify_theorem_b(&s, 2, 0.5);
        assert!(!r.passed);
        let r = verify_theorem_b(&s, 1, 0.5);
        assert!(r.passed && r.rows_checked.is_empty());
    }

    proptest! {
        #[test]
        fn fit_is_exact_on_noiseless_data(mu in 0.2f64..2.0, c in 0.5f64..3.0, a in 0.01f64..10.0) {
            let s = synthetic(|d, t| a * (-mu * (d - c * t)).exp());
            if let Ok(fit) = fit_envelope(&s, Field::Residual, c, &FitOptions { noise_floor: 0.0, ..Default::default() }) {
                prop_assert!((fit.mu_fit - mu).abs() < 1e-8 * mu.max(1.0));
                prop_assert!((fit.c_fit - c).abs() < 1e-7 * c.max(1.0));
                prop_assert!(envelope_violations(&s, &fit).is_empty());
            }
        }
    }
}
