//! Experiment configuration: a versioned TOML document with one section per concern.
//!
//! ```toml
//! version = 1
//!
//! [model]
//! length = 10
//! boundary = "open"        # or "periodic"
//! preset = "tfim"          # J Σ σxσx + g Σ σz; omit and list [[model.terms]] instead
//! coupling = 1.0           # J
//! field = 1.0              # g
//! disorder = 0.0           # couplings c·(1 + disorder·u), u uniform in [-1, 1]
//!
//! [function]
//! name = "exp_neg_beta"    # exp_neg_beta | power | identity | tabulated
//! beta = 1.0
//!
//! [run]
//! mode = "auto"            # vanilla | chiral-fast | chiral-safe | auto
//! max_iterations = 100
//! max_bond = 50            # 0 removes the cap
//! svd_cutoff = 0.0
//! max_sweeps = 4
//! sweep_tol = 1e-8
//! rel_change_tol = 1e-6
//! breakdown_tol = 1e-12
//! fixed_iterations = false
//! seed = 0
//!
//! [output]
//! dir = "ttrace-out"
//! checkpoint_every = 0     # 0 disables checkpoints
//!
//! [diagnostics]
//! trace_every = 1
//! commutation_every = 5
//! symmetry_every = 5
//! alpha = true
//! warn_threshold = 1e-6
//!
//! [bench]
//! lengths = [10, 20, 30, 40]
//! max_bonds = [50]
//! modes = ["vanilla", "chiral-fast"]
//! iterations = 50
//! repetitions = 3
//! warmup = 1
//! ```
//!
//! A custom Hamiltonian replaces `preset` with a list of terms, each with
//! either a uniform `coupling` or one value per offset in `couplings`:
//!
//! ```toml
//! [[model.terms]]
//! axis = "x"
//! block = 2
//! coupling = 1.0
//! ```

use crate::error::CliError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use ttrace::diagnostics::{MonitorSettings, SymmetryKind};
use ttrace::krylov::{LanczosMode, SpectralFunction, StoppingCriteria};
use ttrace::spin::{expected_couplings, Axis, Boundary, InteractionSpec, InteractionTerm};
use ttrace::CompressionSettings;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub function: FunctionConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub bench: BenchConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            model: ModelConfig::default(),
            function: FunctionConfig::default(),
            run: RunConfig::default(),
            output: OutputConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
            bench: BenchConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryConfig {
    Open,
    Periodic,
}

impl From<BoundaryConfig> for Boundary {
    fn from(b: BoundaryConfig) -> Self {
        match b {
            BoundaryConfig::Open => Boundary::Open,
            BoundaryConfig::Periodic => Boundary::Periodic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisConfig {
    X,
    Y,
    Z,
}

impl From<AxisConfig> for Axis {
    fn from(a: AxisConfig) -> Self {
        match a {
            AxisConfig::X => Axis::X,
            AxisConfig::Y => Axis::Y,
            AxisConfig::Z => Axis::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Tfim,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub axis: AxisConfig,
    pub block: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryConfig,
    /// Implied `tfim` when no terms are listed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default = "one")]
    pub coupling: f64,
    #[serde(default = "one")]
    pub field: f64,
    #[serde(default)]
    pub disorder: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
}

fn default_length() -> usize {
    10
}

fn default_boundary() -> BoundaryConfig {
    BoundaryConfig::Open
}

fn one() -> f64 {
    1.0
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            length: default_length(),
            boundary: default_boundary(),
            preset: None,
            coupling: 1.0,
            field: 1.0,
            disorder: 0.0,
            terms: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionName {
    #[default]
    ExpNegBeta,
    Power,
    Identity,
    Tabulated,
}

/// `f` applied to the Ritz values; only the parameter of the named function may be set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionConfig {
    pub name: FunctionName,
    /// `exp_neg_beta`; 1 when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// `power`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<i32>,
    /// `tabulated`: `[x, y]` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeConfig {
    Vanilla,
    ChiralFast,
    ChiralSafe,
    Auto,
}

impl From<ModeConfig> for LanczosMode {
    fn from(m: ModeConfig) -> Self {
        match m {
            ModeConfig::Vanilla => LanczosMode::Vanilla,
            ModeConfig::ChiralFast => LanczosMode::ChiralFast,
            ModeConfig::ChiralSafe => LanczosMode::ChiralSafe,
            ModeConfig::Auto => LanczosMode::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: ModeConfig,
    pub max_iterations: usize,
    /// `0` means no cap.
    pub max_bond: usize,
    pub svd_cutoff: f64,
    pub max_sweeps: usize,
    pub sweep_tol: f64,
    pub rel_change_tol: f64,
    pub breakdown_tol: f64,
    pub fixed_iterations: bool,
    /// Seeds the coupling disorder.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = CompressionSettings::default();
        let s = StoppingCriteria::default();
        Self {
            mode: ModeConfig::Auto,
            max_iterations: s.max_iterations,
            max_bond: c.max_bond,
            svd_cutoff: c.svd_cutoff,
            max_sweeps: c.max_sweeps,
            sweep_tol: c.sweep_tol,
            rel_change_tol: s.rel_change_tol,
            breakdown_tol: s.breakdown_tol,
            fixed_iterations: s.fixed_iterations,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: String,
    pub summary: String,
    /// Write `U_i` every this many iterations (0 disables).
    pub checkpoint_every: usize,
    /// Relative to `dir`.
    pub checkpoint_dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("ttrace-out"),
            csv: "iterations.csv".into(),
            summary: "summary.txt".into(),
            checkpoint_every: 0,
            checkpoint_dir: "checkpoints".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub trace_every: usize,
    pub commutation_every: usize,
    pub symmetry_every: usize,
    pub symmetry_kinds: Vec<String>,
    pub alpha: bool,
    pub warn_threshold: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        let m = MonitorSettings::default();
        Self {
            trace_every: m.trace_every,
            commutation_every: m.commutation_every,
            symmetry_every: m.symmetry_every,
            symmetry_kinds: m.symmetry_kinds.iter().map(|k| k.to_string()).collect(),
            alpha: m.alpha,
            warn_threshold: m.warn_threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub lengths: Vec<usize>,
    pub max_bonds: Vec<usize>,
    pub modes: Vec<ModeConfig>,
    pub iterations: usize,
    pub repetitions: usize,
    /// Leading iterations excluded from the per-run mean.
    pub warmup: usize,
    pub csv: String,
    /// Run grid points concurrently; timings are then not comparable.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            lengths: vec![10, 20, 30, 40],
            max_bonds: vec![50],
            modes: vec![ModeConfig::Vanilla, ModeConfig::ChiralFast],
            iterations: 50,
            repetitions: 3,
            warmup: 1,
            csv: "bench.csv".into(),
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Largest dense dimension the oracle will build.
    pub max_dim: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { max_dim: 1 << 12 }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses a `--set` value as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key v is present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `key.path=value`; numeric path segments index into arrays.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override '{assignment}' is not key=value")))?;
    let key = key.trim();
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(config_err(format!("override key '{key}' is malformed")));
    }
    let mut root = toml::Value::Table(std::mem::take(table));
    let outcome = set_path(&mut root, &segments, parse_value(raw.trim()), key);
    if let toml::Value::Table(t) = root {
        *table = t;
    }
    outcome
}

fn set_path(node: &mut toml::Value, path: &[&str], value: toml::Value, key: &str) -> Result<(), CliError> {
    let (seg, rest) = path.split_first().expect("path is non-empty");
    let slot = match node {
        toml::Value::Table(t) => {
            if rest.is_empty() {
                t.insert(seg.to_string(), value);
                return Ok(());
            }
            t.entry(seg.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        }
        toml::Value::Array(a) => {
            let idx: usize = seg
                .parse()
                .map_err(|_| config_err(format!("'{seg}' in '{key}' must index an array")))?;
            let len = a.len();
            let slot = a
                .get_mut(idx)
                .ok_or_else(|| config_err(format!("index {idx} in '{key}' out of range ({len} entries)")))?;
            if rest.is_empty() {
                *slot = value;
                return Ok(());
            }
            slot
        }
        _ => return Err(config_err(format!("'{key}' descends into a scalar"))),
    };
    set_path(slot, rest, value, key)
}

impl ExperimentConfig {
    /// Reads `path` (or starts from defaults), applies overrides in order, then validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| config_err(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_VERSION {
            return Err(config_err(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        self.spec()?;
        self.spectral_function()?;
        self.compression(None)
            .validate()
            .map_err(|e| config_err(format!("run: {e}")))?;
        self.stopping()
            .validate()
            .map_err(|e| config_err(format!("run: {e}")))?;
        self.monitors()?;
        let d = &self.diagnostics;
        if d.warn_threshold.is_nan() || d.warn_threshold <= 0.0 {
            return Err(config_err("diagnostics.warn_threshold must be positive"));
        }
        let b = &self.bench;
        if b.lengths.is_empty() || b.max_bonds.is_empty() || b.modes.is_empty() {
            return Err(config_err(
                "bench.lengths, bench.max_bonds and bench.modes must be non-empty",
            ));
        }
        if b.iterations == 0 || b.repetitions == 0 {
            return Err(config_err("bench.iterations and bench.repetitions must be at least 1"));
        }
        if b.lengths.contains(&0) {
            return Err(config_err("bench.lengths must be positive"));
        }
        if self.oracle.max_dim == 0 {
            return Err(config_err("oracle.max_dim must be positive"));
        }
        for (name, v) in [
            ("output.csv", &self.output.csv),
            ("output.summary", &self.output.summary),
        ] {
            if v.trim().is_empty() {
                return Err(config_err(format!("{name} must not be empty")));
            }
        }
        Ok(())
    }

    /// Hamiltonian at the configured length.
    pub fn spec(&self) -> Result<InteractionSpec, CliError> {
        self.spec_with_length(self.model.length)
    }

    /// Hamiltonian at another chain length; explicit coupling lists only fit
    /// the configured one.
    pub fn spec_with_length(&self, length: usize) -> Result<InteractionSpec, CliError> {
        let m = &self.model;
        let boundary: Boundary = m.boundary.into();
        if !m.disorder.is_finite() || m.disorder < 0.0 {
            return Err(config_err("model.disorder must be finite and non-negative"));
        }
        if length == 0 {
            return Err(config_err("model.length must be at least 1"));
        }
        let mut terms = Vec::new();
        match (m.preset, m.terms.is_empty()) {
            (Some(_), false) => return Err(config_err("model: give either preset or terms, not both")),
            (_, true) => {
                if length >= 2 {
                    terms.push(InteractionTerm::uniform(Axis::X, 2, m.coupling, length, boundary));
                }
                terms.push(InteractionTerm::uniform(Axis::Z, 1, m.field, length, boundary));
            }
            (None, false) => {
                for (n, t) in m.terms.iter().enumerate() {
                    if t.block == 0 || t.block > length {
                        return Err(config_err(format!(
                            "model.terms[{n}]: block length {} must lie in 1..={length}",
                            t.block
                        )));
                    }
                    let couplings = match (t.coupling, &t.couplings) {
                        (Some(c), None) => vec![c; expected_couplings(t.block, length, boundary)],
                        (None, Some(cs)) => {
                            if length != m.length {
                                return Err(config_err(format!(
                                    "model.terms[{n}]: explicit couplings only fit length {}",
                                    m.length
                                )));
                            }
                            cs.clone()
                        }
                        _ => {
                            return Err(config_err(format!(
                                "model.terms[{n}]: give exactly one of coupling or couplings"
                            )))
                        }
                    };
                    terms.push(InteractionTerm {
                        axis: t.axis.into(),
                        block: t.block,
                        couplings,
                    });
                }
            }
        }
        if m.disorder > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.run.seed);
            for t in &mut terms {
                for c in &mut t.couplings {
                    *c *= 1.0 + m.disorder * rng.random_range(-1.0..=1.0);
                }
            }
        }
        InteractionSpec::new(length, boundary, terms).map_err(|e| config_err(format!("model: {e}")))
    }

    pub fn spectral_function(&self) -> Result<SpectralFunction, CliError> {
        let c = &self.function;
        let given = [
            ("beta", c.beta.is_some(), FunctionName::ExpNegBeta),
            ("exponent", c.exponent.is_some(), FunctionName::Power),
            ("points", c.points.is_some(), FunctionName::Tabulated),
        ];
        if let Some((key, _, _)) = given.iter().find(|(_, set, owner)| *set && *owner != c.name) {
            return Err(config_err(format!("function.{key} does not apply to {:?}", c.name)));
        }
        let f = match c.name {
            FunctionName::ExpNegBeta => {
                let beta = c.beta.unwrap_or(1.0);
                if !beta.is_finite() {
                    return Err(config_err("function.beta must be finite"));
                }
                SpectralFunction::exp_neg_beta(beta)
            }
            FunctionName::Power => SpectralFunction::Power {
                exponent: c
                    .exponent
                    .ok_or_else(|| config_err("function.exponent is required for power"))?,
            },
            FunctionName::Identity => SpectralFunction::Identity,
            FunctionName::Tabulated => {
                let points = c
                    .points
                    .as_ref()
                    .ok_or_else(|| config_err("function.points is required for tabulated"))?;
                SpectralFunction::tabulated(points.iter().map(|p| (p[0], p[1])).collect())
                    .map_err(|e| config_err(format!("function: {e}")))?
            }
        };
        Ok(f)
    }

    /// Compression settings, with `max_bond` replaced when given.
    pub fn compression(&self, max_bond: Option<usize>) -> CompressionSettings {
        let cap = max_bond.unwrap_or(self.run.max_bond);
        CompressionSettings {
            max_bond: if cap == 0 { usize::MAX } else { cap },
            svd_cutoff: self.run.svd_cutoff,
            max_sweeps: self.run.max_sweeps,
            sweep_tol: self.run.sweep_tol,
        }
    }

    pub fn stopping(&self) -> StoppingCriteria {
        StoppingCriteria {
            max_iterations: self.run.max_iterations,
            rel_change_tol: self.run.rel_change_tol,
            breakdown_tol: self.run.breakdown_tol,
            fixed_iterations: self.run.fixed_iterations,
        }
    }

    pub fn monitors(&self) -> Result<MonitorSettings, CliError> {
        let d = &self.diagnostics;
        let kinds = d
            .symmetry_kinds
            .iter()
            .map(|s| {
                s.parse::<SymmetryKind>()
                    .map_err(|e| config_err(format!("diagnostics: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MonitorSettings {
            trace_every: d.trace_every,
            commutation_every: d.commutation_every,
            symmetry_every: d.symmetry_every,
            symmetry_kinds: kinds,
            alpha: d.alpha,
            warn_threshold: d.warn_threshold,
        })
    }
}
