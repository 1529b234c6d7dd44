use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use entcone::error::Result;
use entcone::harness::{emit_outputs, run_scenario, OutputFormats, RunRecord, ScenarioConfig};
use entcone::velocity::{velocity_table, DispersionLaw, GridSpec};

#[derive(Parser)]
#[command(name = "entcone", version, about = "Light-cone sweeps for a lattice particle coupled to a finite-level system")]
struct Cli {
    /// Worker threads for the sweep (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print c(μ) tables for the tight-binding and relativistic bands.
    Velocity {
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,1")]
        mu: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the sweep and write the sample table.
    Evolve(RunArgs),
    /// Run the sweep and fit the envelopes.
    Cone(RunArgs),
    /// Run every protocol; exit code 2 if a verdict fails.
    Verify(RunArgs),
    /// Re-emit outputs from a saved record.json.
    Report {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
}

impl RunArgs {
    fn load(&self) -> Result<(ScenarioConfig, PathBuf)> {
        let mut cfg = ScenarioConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(kappa) = self.kappa {
            cfg.analysis.kappa = kappa;
        }
        if let Some(mu) = &self.mu {
            cfg.velocity.mu = mu.clone();
        }
        cfg.validate()?;
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
        Ok((cfg, out))
    }
}

fn emit(record: &RunRecord, formats: OutputFormats, out: &Path) -> Result<()> {
    let summary = emit_outputs(record, &formats, out)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for f in &summary.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn print_verdicts(record: &RunRecord, names: Option<&[&str]>) -> bool {
    let mut ok = true;
    for v in &record.verdicts {
        if names.is_some_and(|n| !n.contains(&v.name.as_str())) {
            continue;
        }
        ok &= v.passed;
        println!("{:<28} {}  {}", v.name, if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    ok
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        // Fails only if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Velocity { tau, mass, mu, out } => {
            let laws = [DispersionLaw::tight_binding(tau), DispersionLaw::relativistic(mass)?];
            let rows = velocity_table(&laws, &mu, &GridSpec::default())?;
            let mut text = String::from("law,mu,c_of_mu,supremum_at_infinity\n");
            for r in &rows {
                text.push_str(&format!("{},{},{:.16e},{}\n", r.law, r.mu, r.c_of_mu, r.supremum_at_infinity));
            }
            print!("{text}");
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("velocity.csv"), text)?;
            }
            Ok(true)
        }
        Command::Evolve(args) => {
            let (cfg, out) = args.load()?;
            let record = run_scenario(&cfg)?;
            let formats = OutputFormats {
                plots: false,
                ..OutputFormats::default()
            };
            emit(&record, formats, &out)?;
            println!("{} samples, alpha4 = {:.6}, alpha5 = {:.6}", record.samples.len(), record.build.alpha4, record.build.alpha5);
            Ok(true)
        }
        Command::Cone(args) => {
            let (cfg, out) = args.load()?;
            let record = run_scenario(&cfg)?;
            emit(&record, OutputFormats::default(), &out)?;
            Ok(print_verdicts(
                &record,
                Some(&["residual-envelope", "leakage-envelope", "velocity-agreement"]),
            ))
        }
        Command::Verify(args) => {
            let (cfg, out) = args.load()?;
            let record = run_scenario(&cfg)?;
            emit(&record, OutputFormats::default(), &out)?;
            Ok(print_verdicts(&record, None))
        }
        Command::Report { record, out } => {
            let record = RunRecord::load(&record)?;
            emit(&record, OutputFormats::default(), &out)?;
            Ok(print_verdicts(&record, None))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
