use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::RunRecord;
use crate::error::{Error, Result};
use crate::lightcone::{arrival_time, Field, ProbeRole, SweepSample};

pub const CSV_HEADER: [&str; 7] = ["d", "t", "residual", "leakage", "negativity", "sn_witness", "x_label"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputFormats {
    pub csv: bool,
    pub report: bool,
    pub json: bool,
    pub plots: bool,
}

impl Default for OutputFormats {
    fn default() -> Self {
        OutputFormats {
            csv: true,
            report: true,
            json: true,
            plots: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmitSummary {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(samples: &[SweepSample], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for s in samples {
        w.write_record([
            float(s.d),
            float(s.t),
            float(s.residual),
            s.leakage.map(float).unwrap_or_default(),
            float(s.negativity),
            s.sn_witness.to_string(),
            s.probe.clone(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    config_hash: &'a str,
    scenario: &'a str,
    passed: bool,
    verdicts: BTreeMap<&'a str, bool>,
    alpha4: f64,
    alpha5: f64,
    c_ref: f64,
    residual_fit: Option<(f64, f64, f64, f64)>,
    leakage_fit: Option<(f64, f64, f64, f64)>,
    velocity_at_residual_fit: Option<f64>,
    velocity_at_leakage_fit: Option<f64>,
    separability_log_prefactor: Option<f64>,
    separability_free_fit: Option<(f64, f64, f64, f64)>,
    lower_bound_residual: f64,
    uniform_bound: Option<(f64, f64)>,
    wall_clock_seconds: f64,
}

fn fit_tuple(f: &Option<crate::lightcone::ConeFitResult>) -> Option<(f64, f64, f64, f64)> {
    f.as_ref().map(|f| (f.mu_fit, f.c_fit, f.log_c_fit, f.rms_log_residual))
}

pub fn summary_json(record: &RunRecord) -> Result<String> {
    let s = Summary {
        config_hash: &record.config_hash,
        scenario: &record.config.name,
        passed: record.passed(),
        verdicts: record.verdicts.iter().map(|v| (v.name.as_str(), v.passed)).collect(),
        alpha4: record.build.alpha4,
        alpha5: record.build.alpha5,
        c_ref: record.c_ref,
        residual_fit: fit_tuple(&record.residual_fit),
        leakage_fit: fit_tuple(&record.leakage_fit),
        velocity_at_residual_fit: record.velocity_at_residual_fit,
        velocity_at_leakage_fit: record.velocity_at_leakage_fit,
        separability_log_prefactor: record.theorem_a.log_prefactor,
        separability_free_fit: fit_tuple(&record.theorem_a.free_fit),
        lower_bound_residual: record.lower_bound_residual,
        uniform_bound: record.uniform_bound.as_ref().map(|u| (u.observed, u.lemma_constant)),
        wall_clock_seconds: record.wall_clock_seconds,
    };
    Ok(serde_json::to_string_pretty(&s)?)
}

/// Plain-text report: one `key = value` per line, grouped in sections.
pub fn text_report(record: &RunRecord) -> String {
    let mut out = String::new();
    let b = &record.build;
    let _ = writeln!(out, "[run]");
    let _ = writeln!(out, "scenario = {}", record.config.name);
    let _ = writeln!(out, "config_hash = {}", record.config_hash);
    let _ = writeln!(out, "version = {}", record.crate_version);
    let _ = writeln!(out, "wall_clock_seconds = {:.3}", record.wall_clock_seconds);
    let _ = writeln!(out, "samples = {}", record.samples.len());
    let _ = writeln!(out, "\n[build]");
    let _ = writeln!(out, "sites = {}\nd_b = {}\ndim = {}", b.sites, b.d_b, b.dim);
    let _ = writeln!(out, "alpha4 = {:.12}\nalpha5 = {:.12}", b.alpha4, b.alpha5);
    let _ = writeln!(out, "shift_a = {:.12}\nshift_b = {:.12}", b.shift_a, b.shift_b);
    let _ = writeln!(out, "overridden = {}", b.overridden);
    let c = &record.certificate;
    let _ = writeln!(out, "\n[initial_state]");
    let _ = writeln!(out, "recipe = {}\npure = {}", c.recipe, c.pure);
    let _ = writeln!(out, "schmidt_rank = {:?}", c.schmidt_rank);
    let _ = writeln!(out, "support_residual = {:.3e}", c.support_residual);
    let _ = writeln!(out, "negativity = {:.12}", c.negativity);
    let _ = writeln!(out, "h0_trace_norm = {:.12}", c.h0_trace_norm);
    for (name, fit, note) in [
        ("residual_fit", &record.residual_fit, &record.residual_fit_note),
        ("leakage_fit", &record.leakage_fit, &record.leakage_fit_note),
    ] {
        let _ = writeln!(out, "\n[{name}]");
        match fit {
            Some(f) => {
                let _ = writeln!(
                    out,
                    "mu_fit = {:.9}\nc_fit = {:.9}\nlog_c_fit = {:.9}\nrms_log_residual = {:.3e}\nsamples_used = {}\nexclusion_passes = {}\nc_ref = {:.9}",
                    f.mu_fit, f.c_fit, f.log_c_fit, f.rms_log_residual, f.samples_used, f.exclusion_passes, f.c_ref
                );
            }
            None => {
                let _ = writeln!(out, "error = {}", note.clone().unwrap_or_default());
            }
        }
    }
    let _ = writeln!(out, "\n[velocity]");
    for row in &record.velocities {
        let _ = writeln!(out, "c({}) = {:.9}", row.mu, row.c_of_mu);
    }
    if let Some(v) = record.velocity_at_residual_fit {
        let _ = writeln!(out, "c(mu_fit residual) = {v:.9}");
    }
    if let Some(v) = record.velocity_at_leakage_fit {
        let _ = writeln!(out, "c(mu_fit leakage) = {v:.9}");
    }
    let _ = writeln!(out, "\n[separability]");
    for s in &record.separability {
        let _ = writeln!(
            out,
            "{} t = {:.3}: lower = {:.3e}, upper = {:.3e}, status = {:?} (row {})",
            s.probe, s.t, s.lower, s.upper, s.status, s.row
        );
    }
    for (p, t) in &record.theorem_a.arrivals {
        let _ = writeln!(out, "entanglement arrival {p} = {}", t.map_or("none".into(), |t| format!("{t:.3}")));
    }
    let _ = writeln!(out, "\n[verdicts]");
    let _ = writeln!(out, "window_factor = {}", record.theorem_a.window_factor);
    for v in &record.verdicts {
        let _ = writeln!(
            out,
            "{} = {}{}: {}",
            v.name,
            if v.passed { "PASS" } else { "FAIL" },
            if v.vacuous { " (vacuous)" } else { "" },
            v.detail
        );
        let _ = writeln!(out, "{}.rows = {}", v.name, compress_rows(&v.rows));
    }
    let _ = writeln!(out, "\noverall = {}", if record.passed() { "PASS" } else { "FAIL" });
    out
}

/// `0-4,7,9-12`
fn compress_rows(rows: &[usize]) -> String {
    let mut sorted = rows.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut parts = vec![];
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[j] + 1 {
            j += 1;
        }
        parts.push(if i == j {
            sorted[i].to_string()
        } else {
            format!("{}-{}", sorted[i], sorted[j])
        });
        i = j + 1;
    }
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join(",")
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    )
}

fn data_comment(samples: &[&SweepSample], field: Field) -> String {
    let mut s = String::from("<!-- data d,t,value\n");
    for x in samples {
        let _ = writeln!(s, "{},{},{:e}", x.d, x.t, field.value(x).unwrap_or(f64::NAN));
    }
    s.push_str("-->\n");
    s
}

fn log10_clamped(v: f64, floor: f64) -> f64 {
    v.max(floor).log10()
}

/// Heatmap of `log10 residual` over the far-probe `(d, t)` grid with the
/// fitted cone `d = c_fit t` overlaid.
pub fn heatmap_svg(record: &RunRecord) -> Option<String> {
    let far: Vec<&SweepSample> = record.samples.iter().filter(|s| s.role == ProbeRole::Far).collect();
    let mut ds: Vec<f64> = far.iter().map(|s| s.d).collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    let ts = &record.times;
    if ts.len() < 2 || ds.is_empty() {
        return None;
    }
    let floor = record.config.analysis.noise_floor;
    let lo = floor.log10();
    let hi = far
        .iter()
        .map(|s| log10_clamped(s.residual, floor))
        .fold(lo + 1.0, f64::max);
    let (t0, t1) = (ts[0], ts[ts.len() - 1]);
    let (d0, d1) = (ds[0] - 0.5, ds[ds.len() - 1] + 0.5);
    let x = |t: f64| PAD + (t - t0) / (t1 - t0) * (W - 2.0 * PAD);
    let y = |d: f64| H - PAD - (d - d0) / (d1 - d0) * (H - 2.0 * PAD);
    let cell_w = (W - 2.0 * PAD) / (ts.len() - 1) as f64;
    let cell_h = (H - 2.0 * PAD) / (d1 - d0);
    let mut s = svg_open("log10 residual over (d, t)");
    s.push_str(&data_comment(&far, Field::Residual));
    for p in &far {
        let v = (log10_clamped(p.residual, floor) - lo) / (hi - lo);
        let shade = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb(255,{shade},{shade})\"/>",
            x(p.t) - cell_w / 2.0,
            y(p.d) - cell_h / 2.0,
            cell_w,
            cell_h
        );
    }
    if let Some(f) = &record.residual_fit {
        let (ta, tb) = (t0, t1.min(d1 / f.c_fit));
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-dasharray=\"6 4\"/>",
            x(ta),
            y((f.c_fit * ta).max(d0)),
            x(tb),
            y(f.c_fit * tb)
        );
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">d = {:.3} t</text>", W - PAD - 90.0, PAD - 8.0, f.c_fit);
    }
    axes(&mut s, "t", "d", (t0, t1), (d0, d1));
    s.push_str("</svg>\n");
    Some(s)
}

fn axes(s: &mut String, xl: &str, yl: &str, xr: (f64, f64), yr: (f64, f64)) {
    let _ = writeln!(
        s,
        "<line x1=\"{PAD}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n<line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{}\" stroke=\"black\"/>",
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xl} [{:.3}, {:.3}]</text>",
        W / 2.0,
        H - 16.0,
        xr.0,
        xr.1
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">{yl} [{:.3}, {:.3}]</text>",
        H / 2.0,
        H / 2.0,
        yr.0,
        yr.1
    );
}

/// One `log10 residual` curve per far-probe distance, arrival times marked.
pub fn arrival_svg(record: &RunRecord) -> Option<String> {
    let far: Vec<&SweepSample> = record.samples.iter().filter(|s| s.role == ProbeRole::Far).collect();
    if far.is_empty() {
        return None;
    }
    let floor = record.config.analysis.noise_floor;
    let (t0, t1) = (record.times[0], *record.times.last()?);
    let span = if t1 > t0 { t1 - t0 } else { 1.0 };
    let lo = floor.log10();
    let hi = far.iter().map(|s| log10_clamped(s.residual, floor)).fold(lo + 1.0, f64::max);
    let x = |t: f64| PAD + (t - t0) / span * (W - 2.0 * PAD);
    let y = |v: f64| H - PAD - (v - lo) / (hi - lo) * (H - 2.0 * PAD);
    let mut s = svg_open("log10 residual per distance");
    s.push_str(&data_comment(&far, Field::Residual));
    let mut by_d: BTreeMap<u64, Vec<&SweepSample>> = BTreeMap::new();
    for p in &far {
        by_d.entry(p.d.to_bits()).or_default().push(p);
    }
    let n = by_d.len().max(1) as f64;
    let threshold = floor.sqrt();
    let far_owned: Vec<SweepSample> = far.iter().map(|s| (*s).clone()).collect();
    for (i, (bits, pts)) in by_d.iter().enumerate() {
        let d = f64::from_bits(*bits);
        let hue = (240.0 * i as f64 / n).round();
        let path: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", x(p.t), y(log10_clamped(p.residual, floor))))
            .collect();
        if path.len() > 1 {
            let _ = writeln!(
                s,
                "<polyline fill=\"none\" stroke=\"hsl({hue},70%,40%)\" points=\"{}\"/>",
                path.join(" ")
            );
        } else {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"hsl({hue},70%,40%)\"/>",
                x(pts[0].t),
                y(log10_clamped(pts[0].residual, floor))
            );
        }
        if let Ok(Some(ta)) = arrival_time(&far_owned, Field::Residual, d, threshold) {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"none\" stroke=\"black\"/>",
                x(ta),
                y(threshold.log10())
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{:.2}\" fill=\"hsl({hue},70%,40%)\">d = {d}</text>",
            W - PAD + 4.0,
            PAD + 14.0 * i as f64
        );
    }
    axes(&mut s, "t", "log10 residual", (t0, t1), (lo, hi));
    s.push_str("</svg>\n");
    Some(s)
}

fn write(path: PathBuf, contents: &str, summary: &mut EmitSummary) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    summary.files.push(path);
    Ok(())
}

/// Writes the requested artifacts into `dir`, creating it if needed.
pub fn emit_outputs(record: &RunRecord, formats: &OutputFormats, dir: &Path) -> Result<EmitSummary> {
    fs::create_dir_all(dir).map_err(|e| Error::from(e).context(dir.display().to_string()))?;
    let mut summary = EmitSummary::default();
    let empty = record.samples.is_empty();
    if empty {
        summary.warnings.push("sample table is empty; CSV has headers only and no plots are drawn".into());
    }
    if formats.csv {
        let path = dir.join("samples.csv");
        write_csv(&record.samples, &path).map_err(|e| e.context(path.display().to_string()))?;
        summary.files.push(path);
    }
    if formats.report {
        write(dir.join("report.txt"), &text_report(record), &mut summary)?;
        write(dir.join("summary.json"), &summary_json(record)?, &mut summary)?;
    }
    if formats.json {
        write(dir.join("record.json"), &serde_json::to_string_pretty(record)?, &mut summary)?;
    }
    if formats.plots && !empty {
        match heatmap_svg(record) {
            Some(svg) => write(dir.join("residual_heatmap.svg"), &svg, &mut summary)?,
            None => summary
                .warnings
                .push("heatmap skipped: the time grid has a single point".into()),
        }
        if let Some(svg) = arrival_svg(record) {
            write(dir.join("arrival.svg"), &svg, &mut summary)?;
        }
    }
    Ok(summary)
}
