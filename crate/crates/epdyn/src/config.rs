//! JSON scenario configuration: model, task, grids, initial state and tolerance overrides.

use crate::CliError;
use epcore::adiabatic::{AdiabaticDiamondConfig, AdiabaticStubConfig};
use epcore::models::diamond::diamond_labels;
use epcore::models::stub::stub_labels;
use epcore::models::{build_diamond, build_stub, DiamondRingParams, StubRibbonParams};
use epcore::{ComplexMatrix, ComplexVector, Tolerances, C64};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    SpectrumSweep,
    PetermannSweep,
    PcrCheck,
    Evolve,
    DensityEvolve,
    Transfer,
    EliminateCompare,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::SpectrumSweep => "spectrum-sweep",
            Task::PetermannSweep => "petermann-sweep",
            Task::PcrCheck => "pcr-check",
            Task::Evolve => "evolve",
            Task::DensityEvolve => "density-evolve",
            Task::Transfer => "transfer",
            Task::EliminateCompare => "eliminate-compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Hopping {
    /// J_n^u = `up` in every cell.
    Uniform { up: f64 },
    /// J_n^u = √n·J.
    Sqrt,
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubSpec {
    pub n: usize,
    #[serde(default = "one")]
    pub j: f64,
    pub hopping: Hopping,
    pub lambda: f64,
}

fn one() -> f64 {
    1.0
}

impl StubSpec {
    pub fn params(&self) -> StubRibbonParams {
        match &self.hopping {
            Hopping::Uniform { up } => StubRibbonParams::uniform(self.n, self.j, *up, self.lambda),
            Hopping::Sqrt => StubRibbonParams::sqrt_profile(self.n, self.j, self.lambda),
            Hopping::Explicit { values } => StubRibbonParams { n: self.n, j: self.j, up_hoppings: values.clone(), lambda: self.lambda },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondSpec {
    /// ε as [re, im]; one of the two must vanish.
    pub epsilon: [f64; 2],
    pub kappa: f64,
}

impl DiamondSpec {
    pub fn params(&self) -> Result<DiamondRingParams, CliError> {
        Ok(DiamondRingParams::from_complex(C64::new(self.epsilon[0], self.epsilon[1]), self.kappa)?)
    }
}

/// Either the realization of an ideal target model or an explicit coupled-mode config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Realization<T, C> {
    Target { target: T, kappa_aux: f64 },
    Explicit { explicit: C },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    Stub(StubSpec),
    Diamond(DiamondSpec),
    AdiabaticStub(Realization<StubSpec, AdiabaticStubConfig>),
    AdiabaticDiamond(Realization<DiamondSpec, AdiabaticDiamondConfig>),
    /// CSV with one matrix row per line as re,im pairs; relative paths resolve against the config file.
    MatrixFile { path: PathBuf },
}

/// Strictly increasing grid: explicit values, a count of points, or a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl Grid {
    pub fn resolve(&self, what: &str) -> Result<Vec<f64>, CliError> {
        let bad = |m: String| CliError::Config(format!("{what}: {m}"));
        let v = match (&self.values, self.start, self.stop, self.count, self.step) {
            (Some(v), None, None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n), None) => {
                if n == 0 {
                    return Err(bad("count must be positive".into()));
                }
                if n == 1 {
                    vec![a]
                } else {
                    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
                }
            }
            (None, Some(a), Some(b), None, Some(h)) => {
                if !(h > 0.0) || !(b >= a) {
                    return Err(bad("step grids need step > 0 and stop ≥ start".into()));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                // Snap to 12 decimals so decimal steps hit points such as 0 exactly.
                (0..=n).map(|k| ((a + h * k as f64) * 1e12).round() / 1e12).collect()
            }
            _ => return Err(bad("give either `values`, or `start`/`stop` with exactly one of `count`/`step`".into())),
        };
        if v.is_empty() {
            return Err(bad("grid is empty".into()));
        }
        if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(bad("grid must be finite and strictly increasing".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Model parameter to vary (stub: lambda, j, up; diamond: kappa, epsilon_re, epsilon_im;
    /// adiabatic models: kappa_aux).
    pub parameter: String,
    #[serde(flatten)]
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    /// Superposition of labelled sites, equal amplitudes unless `amplitudes` ([re, im] each) is given.
    Sites {
        sites: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitudes: Option<Vec<[f64; 2]>>,
    },
    /// Full amplitude vector as [re, im] pairs.
    Vector { vector: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_tol: Option<f64>,
}

impl ToleranceOverrides {
    /// Matrix defaults with the overridden fields taken verbatim.
    pub fn resolve(&self, h: &ComplexMatrix) -> Tolerances<f64> {
        let mut t = Tolerances::for_matrix(h);
        if let Some(x) = self.rank_tol {
            t.rank_tol = x;
        }
        if let Some(x) = self.cluster_tol {
            t.cluster_tol = x;
        }
        if let Some(x) = self.closure_tol {
            t.closure_tol = x;
        }
        if let Some(x) = self.coeff_tol {
            t.coeff_tol = x;
        }
        t
    }

    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("rank_tol", self.rank_tol), ("cluster_tol", self.cluster_tol), ("closure_tol", self.closure_tol), ("coeff_tol", self.coeff_tol)] {
            if let Some(x) = v {
                if !(x > 0.0) || !x.is_finite() {
                    return Err(CliError::Config(format!("{name} must be positive and finite")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    /// density-evolve: diagonal weights of a single mixed state (otherwise an ensemble).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// density-evolve: ensemble size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<usize>,
    /// density-evolve: fidelity target (default: eigenvector of the longest chain).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_basis: Option<bool>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    /// Directory of the config file, for resolving relative matrix paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version)));
        }
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Anchors a relative matrix path at the config directory so the effective config runs from anywhere.
    pub fn absolutize_paths(&mut self) -> Result<(), CliError> {
        if let ModelSpec::MatrixFile { path } = &mut self.model {
            let joined = self.base_dir.join(&*path);
            *path = std::path::absolute(&joined).map_err(|e| CliError::Config(format!("cannot resolve {}: {e}", joined.display())))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.tolerances.validate()?;
        if let Some(s) = &self.sweep {
            s.grid.resolve("sweep")?;
        }
        if let Some(t) = &self.times {
            let v = t.resolve("times")?;
            if v[0] < 0.0 {
                return Err(CliError::Config("times must be nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn sweep_values(&self) -> Result<Option<(String, Vec<f64>)>, CliError> {
        self.sweep.as_ref().map(|s| Ok((s.parameter.clone(), s.grid.resolve("sweep")?))).transpose()
    }

    pub fn time_grid(&self) -> Result<Vec<f64>, CliError> {
        self.times.as_ref().ok_or_else(|| CliError::Config("task needs a `times` grid".into()))?.resolve("times")
    }

    /// JSON written next to the output; its hash identifies the run.
    pub fn effective_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The output path does not contribute to the hash, so a re-run elsewhere carries the same identity.
    pub fn hash_input(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        serde_json::to_string(&c).expect("config serializes")
    }
}

/// A model resolved to concrete matrices.
pub enum Resolved {
    Plain { h: ComplexMatrix, labels: Vec<String>, diamond: Option<DiamondRingParams> },
    Coupled { h: ComplexMatrix, decay: Vec<f64>, aux: Vec<usize>, labels: Vec<String> },
}

impl Resolved {
    pub fn labels(&self) -> &[String] {
        match self {
            Resolved::Plain { labels, .. } | Resolved::Coupled { labels, .. } => labels,
        }
    }

    /// The lattice Hamiltonian itself, or the eliminated model with induced decay for coupled realizations.
    pub fn effective(&self) -> Result<ComplexMatrix, CliError> {
        match self {
            Resolved::Plain { h, .. } => Ok(h.clone()),
            Resolved::Coupled { h, decay, aux, .. } => Ok(epcore::adiabatic::eliminate(h, decay, aux, true)?),
        }
    }
}

fn set_param(value: &mut f64, v: f64) {
    *value = v;
}

impl ModelSpec {
    /// Copy of the model with sweep parameter `name` set to `v`.
    pub fn with_parameter(&self, name: &str, v: f64) -> Result<ModelSpec, CliError> {
        let unknown = || CliError::Config(format!("parameter `{name}` cannot be swept for this model"));
        let mut m = self.clone();
        match &mut m {
            ModelSpec::Stub(s) | ModelSpec::AdiabaticStub(Realization::Target { target: s, .. }) if name != "kappa_aux" => match name {
                "lambda" => set_param(&mut s.lambda, v),
                "j" => set_param(&mut s.j, v),
                "up" => match &mut s.hopping {
                    Hopping::Uniform { up } => set_param(up, v),
                    _ => return Err(unknown()),
                },
                _ => return Err(unknown()),
            },
            ModelSpec::Diamond(d) | ModelSpec::AdiabaticDiamond(Realization::Target { target: d, .. }) if name != "kappa_aux" => match name {
                "kappa" => set_param(&mut d.kappa, v),
                "epsilon_re" => set_param(&mut d.epsilon[0], v),
                "epsilon_im" => set_param(&mut d.epsilon[1], v),
                _ => return Err(unknown()),
            },
            ModelSpec::AdiabaticStub(Realization::Target { kappa_aux, .. }) | ModelSpec::AdiabaticDiamond(Realization::Target { kappa_aux, .. }) => {
                set_param(kappa_aux, v)
            }
            ModelSpec::AdiabaticStub(Realization::Explicit { explicit }) if name == "kappa_aux" => explicit.kappa_d.iter_mut().for_each(|k| *k = v),
            ModelSpec::AdiabaticDiamond(Realization::Explicit { explicit }) if name == "kappa_aux" => explicit.kappa_f.iter_mut().for_each(|k| *k = v),
            _ => return Err(unknown()),
        }
        Ok(m)
    }

    pub fn resolve(&self, base_dir: &Path) -> Result<Resolved, CliError> {
        Ok(match self {
            ModelSpec::Stub(s) => {
                let p = s.params();
                Resolved::Plain { h: build_stub(&p)?, labels: stub_labels(p.n), diamond: None }
            }
            ModelSpec::Diamond(d) => {
                let p = d.params()?;
                Resolved::Plain { h: build_diamond(&p)?, labels: diamond_labels(), diamond: Some(p) }
            }
            ModelSpec::AdiabaticStub(r) => {
                let cfg = match r {
                    Realization::Target { target, kappa_aux } => AdiabaticStubConfig::for_stub(&target.params(), *kappa_aux)?,
                    Realization::Explicit { explicit } => explicit.clone(),
                };
                let (h, decay) = epcore::adiabatic::build_full_stub(&cfg)?;
                Resolved::Coupled { h, decay, aux: cfg.aux_indices(), labels: stub_labels(cfg.n) }
            }
            ModelSpec::AdiabaticDiamond(r) => {
                let cfg = match r {
                    Realization::Target { target, kappa_aux } => AdiabaticDiamondConfig::for_diamond(&target.params()?, *kappa_aux)?,
                    Realization::Explicit { explicit } => explicit.clone(),
                };
                let (h, decay) = epcore::adiabatic::build_full_diamond(&cfg)?;
                Resolved::Coupled { h, decay, aux: cfg.aux_indices(), labels: diamond_labels() }
            }
            ModelSpec::MatrixFile { path } => {
                let h = read_matrix_csv(&base_dir.join(path))?;
                let labels = (0..h.nrows()).map(|i| i.to_string()).collect();
                Resolved::Plain { h, labels, diamond: None }
            }
        })
    }
}

/// Reads a square complex matrix: each line holds one row as re,im,re,im,…; `#` lines are comments.
pub fn read_matrix_csv(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read matrix file {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(format!("matrix file line {}: {e}", lineno + 1)))?;
        if nums.len() % 2 != 0 {
            return Err(CliError::Config(format!("matrix file line {}: odd number of values", lineno + 1)));
        }
        rows.push(nums.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("matrix file must hold a nonempty square matrix, got {n} rows")));
    }
    Ok(ComplexMatrix::from_shape_fn((n, n), |(i, j)| rows[i][j]))
}

/// Builds a state vector against the model's site labels.
pub fn build_state(spec: &StateSpec, labels: &[String]) -> Result<ComplexVector, CliError> {
    let dim = labels.len();
    match spec {
        StateSpec::Vector { vector } => {
            if vector.len() != dim {
                return Err(CliError::Config(format!("state vector of length {} for {dim} sites", vector.len())));
            }
            Ok(vector.iter().map(|p| C64::new(p[0], p[1])).collect())
        }
        StateSpec::Sites { sites, amplitudes } => {
            if sites.is_empty() {
                return Err(CliError::Config("state needs at least one site".into()));
            }
            let amps: Vec<C64> = match amplitudes {
                Some(a) if a.len() == sites.len() => a.iter().map(|p| C64::new(p[0], p[1])).collect(),
                Some(_) => return Err(CliError::Config("`amplitudes` must match `sites` in length".into())),
                None => vec![C64::new(1.0 / (sites.len() as f64).sqrt(), 0.0); sites.len()],
            };
            let mut v = ComplexVector::zeros(dim);
            for (s, a) in sites.iter().zip(amps) {
                let i = labels.iter().position(|l| l == s).ok_or_else(|| CliError::Config(format!("unknown site `{s}` (sites: {})", labels.join(", "))))?;
                v[i] += a;
            }
            Ok(v)
        }
    }
}
