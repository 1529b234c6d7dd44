//! TOML scenario schema.
//!
//! ```toml
//! name = "reference"
//! seed = 7                        # stochastic subroutines only
//! output_dir = "out/reference"
//! allow_condition_violation = false
//!
//! [lattice]
//! extent = [24]                   # n = extent.len(), sites row-major
//! metric = "manhattan"            # or "euclidean"
//!
//! [hopping]
//! tau = 1.0                       # tau = 0 requires flat = true
//! potential = []                  # per-site table, empty = zero
//!
//! [system_b]
//! levels = [0.0, 0.0]             # diagonal H_B, d_B = levels.len()
//!
//! [coupling]
//! form = "density"                # density | hopping-modulation | random-block
//! strength = 0.5
//! support = [11, 12]              # Y
//! b_operator = "sigma-x"          # sigma-x | sigma-y | sigma-z | identity
//!
//! [regions]
//! q = [2, 3]
//!
//! [[probes]]
//! label = "X4"
//! range = [16, 23]                # inclusive, or sites = [...]
//! role = "far"                    # far | enclosing
//!
//! [initial_state]
//! kind = "bell-in-q"              # bell-in-q | product | mixture | gibbs
//! sites = [2, 3]
//!
//! [time]
//! start = 0.0
//! stop = 6.0
//! step = 0.2                      # or points = [...]
//!
//! [velocity]
//! mu = [0.1, 0.25, 0.5, 1.0]
//!
//! [analysis]                      # every key optional
//! noise_floor = 1e-13
//! margin = 2.0
//! mu_ref = 0.5
//! separability_speed = 2.2
//! min_samples = 10
//! kappa = 1e-3
//! lemma_grid = 20
//! velocity_slack = 0.15           # c_fit <= (1 + slack) c(mu_fit)
//! # k = 2                         # default: Schmidt rank of the initial state
//! ```
//!
//! Sites are linear indices into the lattice.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::Metric;
use crate::lightcone::ProbeRole;
use crate::model::CouplingForm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub allow_condition_violation: bool,
    pub lattice: LatticeConfig,
    pub hopping: HoppingConfig,
    pub system_b: SystemBConfig,
    pub coupling: CouplingConfig,
    pub regions: RegionsConfig,
    #[serde(default)]
    pub probes: Vec<ProbeConfig>,
    pub initial_state: InitialStateRecipe,
    pub time: TimeGrid,
    #[serde(default)]
    pub velocity: VelocityConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub extent: Vec<usize>,
    #[serde(default)]
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoppingConfig {
    pub tau: f64,
    #[serde(default)]
    pub flat: bool,
    #[serde(default)]
    pub potential: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBConfig {
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BOperator {
    SigmaX,
    SigmaY,
    SigmaZ,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub form: CouplingForm,
    pub strength: f64,
    pub support: Vec<usize>,
    #[serde(default = "default_b_operator")]
    pub b_operator: BOperator,
}

fn default_b_operator() -> BOperator {
    BOperator::SigmaX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsConfig {
    #[serde(default)]
    pub q: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub label: String,
    #[serde(default)]
    pub range: Option<[usize; 2]>,
    #[serde(default)]
    pub sites: Vec<usize>,
    pub role: ProbeRole,
}

impl ProbeConfig {
    pub fn members(&self) -> Vec<usize> {
        match self.range {
            Some([lo, hi]) => (lo..=hi).chain(self.sites.iter().copied()).collect(),
            None => self.sites.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub site: usize,
    pub level: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialStateRecipe {
    /// `(|x₁⟩|0⟩ + |x₂⟩|1⟩)/√2`
    BellInQ { sites: [usize; 2] },
    Product { site: usize, level: usize },
    Mixture { components: Vec<MixtureComponent> },
    /// `e^{-βH_0}` restricted to `Q ⊗ B`, normalized.
    Gibbs { beta: f64 },
}

impl InitialStateRecipe {
    pub fn label(&self) -> String {
        match self {
            InitialStateRecipe::BellInQ { sites } => format!("bell-in-q({}, {})", sites[0], sites[1]),
            InitialStateRecipe::Product { site, level } => format!("product({site}, {level})"),
            InitialStateRecipe::Mixture { components } => format!("mixture({} components)", components.len()),
            InitialStateRecipe::Gibbs { beta } => format!("gibbs(beta = {beta})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub points: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(start: f64, stop: f64, step: f64) -> Self {
        TimeGrid {
            start: Some(start),
            stop: Some(stop),
            step: Some(step),
            points: vec![],
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = if !self.points.is_empty() {
            self.points.clone()
        } else {
            let (Some(a), Some(b), Some(h)) = (self.start, self.stop, self.step) else {
                return Err(Error::Config("time grid needs points or start/stop/step".into()));
            };
            if !(h > 0.0) || !(b >= a) {
                return Err(Error::Config("time grid needs step > 0 and stop >= start".into()));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            (0..=n).map(|i| a + i as f64 * h).collect()
        };
        if pts.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Config("times must be finite and nonnegative".into()));
        }
        if pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("time grid must be strictly increasing".into()));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityConfig {
    #[serde(default = "default_mu_list")]
    pub mu: Vec<f64>,
}

fn default_mu_list() -> Vec<f64> {
    vec![0.1, 0.25, 0.5, 1.0]
}

impl Default for VelocityConfig {
    fn default() -> Self {
        VelocityConfig { mu: default_mu_list() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub noise_floor: f64,
    pub margin: f64,
    pub mu_ref: f64,
    pub min_samples: usize,
    /// Cone speed bounding the separability scope `d - c t >= margin`.
    pub separability_speed: f64,
    pub kappa: f64,
    /// Points in the uniform-bound time grid.
    pub lemma_grid: usize,
    /// Schmidt number to protect; defaults to the certified rank of `Γ_0`.
    pub k: Option<usize>,
    /// Allowed relative excess of `c_fit` over `c(μ_fit)`.
    pub velocity_slack: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            noise_floor: crate::lightcone::DEFAULT_NOISE_FLOOR,
            margin: crate::lightcone::DEFAULT_MARGIN,
            mu_ref: crate::lightcone::DEFAULT_MU_REF,
            min_samples: crate::lightcone::MIN_FIT_SAMPLES,
            separability_speed: 2.2,
            kappa: 1e-3,
            lemma_grid: 20,
            k: None,
            velocity_slack: 0.15,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Self::from_toml_str(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn site_count(&self) -> usize {
        self.lattice.extent.iter().product()
    }

    pub fn d_b(&self) -> usize {
        self.system_b.levels.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.site_count();
        if self.lattice.extent.is_empty() || self.lattice.extent.contains(&0) || n < 2 {
            return Err(Error::Config("lattice needs at least two sites".into()));
        }
        if self.hopping.tau.is_nan() || self.hopping.tau < 0.0 || (self.hopping.tau == 0.0 && !self.hopping.flat) {
            return Err(Error::Config("tau must be > 0, or 0 with flat = true".into()));
        }
        if !self.hopping.potential.is_empty() && self.hopping.potential.len() != n {
            return Err(Error::Config(format!(
                "potential table has {} entries for {n} sites",
                self.hopping.potential.len()
            )));
        }
        if self.d_b() == 0 {
            return Err(Error::Config("system_b.levels must be nonempty".into()));
        }
        if self.coupling.support.is_empty() {
            return Err(Error::Config("coupling support Y must be nonempty".into()));
        }
        let inside = |what: &str, sites: &[usize]| -> Result<()> {
            match sites.iter().find(|&&s| s >= n) {
                Some(s) => Err(Error::Config(format!("{what}: site {s} outside lattice of {n} sites"))),
                None => Ok(()),
            }
        };
        inside("coupling.support", &self.coupling.support)?;
        inside("regions.q", &self.regions.q)?;
        for p in &self.probes {
            let m = p.members();
            if m.is_empty() {
                return Err(Error::Config(format!("probe {} is empty", p.label)));
            }
            inside(&format!("probe {}", p.label), &m)?;
        }
        let mut labels: Vec<&str> = self.probes.iter().map(|p| p.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("probe labels must be unique".into()));
        }
        self.time.points()?;
        if self.velocity.mu.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Config("mu list entries must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }
}
