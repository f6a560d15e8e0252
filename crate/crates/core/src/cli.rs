// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Every command resolves its flags and an optional TOML config into an
//! [`ExperimentConfig`], runs, and writes a CSV or JSON report that carries the
//! schema version, the seed and a SHA-256 hash of the resolved config.
//!
//! Exit codes: `0` success, `1` invariant or assertion failure, `2` usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::device::compare::{naimark_tomography, postselection_tomography, ComparisonConfig, Randomization};
use crate::device::{Connectivity, NoiseModel};
use crate::error::Error;
use crate::fixtures;
use crate::io::{self, PovmDoc};
use crate::linalg::C64;
use crate::naimark::{dilated_statistics, naimark_dilation, DilationMode};
use crate::povm::{born_probabilities, Povm};
use crate::simulation::{postselection_scheme, sample_chunked, sample_postselection, ShotRecord};
use crate::state::QuantumState;
use crate::tomography::{operational_distance, reconstruct_povm};
use crate::usd::{
    equal_probability_measurement, lemma1_bound_check, projective_simulable_optimum, random_ensemble_experiment,
    symmetric_ensemble_with_epsilon, usd_success,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Default output directory when `--output` is absent.
pub const OUT_DIR_ENV: &str = "POVMSIM_OUT_DIR";

/// Allowed deviation of the recomputed comparison table from the published
/// three-digit values.
pub const TABLE1_TOLERANCE: f64 = 0.003;

pub const STATE_NAMES: [&str; 7] = ["zero", "one", "plus", "minus", "plus-i", "minus-i", "mixed"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_) | Error::Format(_) | Error::Json(_) | Error::Io(_) => 2,
                _ => 1,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "povmsim",
    version,
    about = "Simulate generalized measurements with projective measurements and postselection"
)]
pub struct Cli {
    /// TOML file whose values override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file. Defaults to `$POVMSIM_OUT_DIR/<command>.<ext>`, else stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the postselection scheme (or the Naimark dilation) and compare
    /// with the Born rule.
    Simulate(SimulateArgs),
    /// Unambiguous discrimination bounds.
    Usd(UsdArgs),
    /// Noisy-device tomography of both realizations.
    Compare(CompareArgs),
    /// Operational distances of the shipped reconstructed measurements.
    Table1,
    /// List the shipped measurement fixtures.
    Fixtures,
    /// Export the Naimark dilation unitary of a measurement.
    Naimark(NaimarkArgs),
    /// Export the postselection scheme of a measurement.
    Scheme(SchemeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    Postselection,
    Naimark,
    Both,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Fixture name or path to a measurement JSON file.
    #[arg(long, default_value = "tetrahedral")]
    pub povm: String,
    /// State name or path to a state JSON file.
    #[arg(long, default_value = "zero")]
    pub state: String,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SchemeChoice::Postselection)]
    pub scheme: SchemeChoice,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "ensemble_source")]
pub struct UsdSource {
    /// Symmetric ensemble: `d epsilon`.
    #[arg(long, num_args = 2, value_names = ["D", "EPSILON"])]
    pub symmetric: Option<Vec<String>>,
    /// Haar-random ensemble: `d D`.
    #[arg(long, num_args = 2, value_names = ["d", "D"])]
    pub random: Option<Vec<usize>>,
    /// Ensemble JSON file.
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UsdArgs {
    #[command(flatten)]
    pub source: UsdSource,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RandomizationArg {
    Block,
    PerShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConnectivityArg {
    Full,
    OneWay,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value = "tetrahedral")]
    pub povm: String,
    /// Noise preset: `ibmx4-like` or `noiseless`.
    #[arg(long, default_value = "ibmx4-like")]
    pub noise: String,
    #[arg(long)]
    pub cnot: Option<f64>,
    #[arg(long)]
    pub su2: Option<f64>,
    #[arg(long)]
    pub readout_bias: Option<f64>,
    /// Shots for the heaviest postselection component.
    #[arg(long, default_value_t = crate::device::compare::SHOT_CAP)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SchemeChoice::Both)]
    pub scheme: SchemeChoice,
    #[arg(long, value_enum, default_value_t = RandomizationArg::Block)]
    pub randomization: RandomizationArg,
    #[arg(long, value_enum, default_value_t = ConnectivityArg::OneWay)]
    pub connectivity: ConnectivityArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Abstract,
    Register,
}

#[derive(Debug, Args)]
pub struct NaimarkArgs {
    #[arg(long, default_value = "trine")]
    pub povm: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Register)]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    #[arg(long, default_value = "tetrahedral")]
    pub povm: String,
}

/// Keys accepted in `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub noise: Option<NoiseSection>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub scheme: Option<SchemeChoice>,
    pub povm_fixture: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub preset: Option<String>,
    pub cnot: Option<f64>,
    pub su2: Option<f64>,
    pub readout_bias: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Fully resolved parameters of one run; its hash identifies the output.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub povm: Option<String>,
    /// SHA-256 of the measurement file when `povm` is a path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub povm_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub params: Value,
}

impl ExperimentConfig {
    fn new(command: &'static str) -> Self {
        ExperimentConfig {
            command,
            povm: None,
            povm_digest: None,
            state: None,
            shots: None,
            seed: None,
            scheme: None,
            noise: None,
            params: Value::Null,
        }
    }

    pub fn hash(&self) -> String {
        hex(&Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// A command result in both output shapes.
#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub result: Value,
    /// Assertions that did not hold; a non-empty list exits with code 1.
    pub failures: Vec<String>,
}

impl Report {
    fn new(config: ExperimentConfig, header: &[&str]) -> Self {
        Report {
            config,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            result: Value::Null,
            failures: Vec::new(),
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let doc = json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": self.config.command,
                    "seed": self.config.seed,
                    "config_hash": self.config.hash(),
                    "config": self.config,
                    "result": self.result,
                });
                Ok(serde_json::to_string_pretty(&doc).map_err(Error::from)? + "\n")
            }
            Format::Csv => {
                let mut out = String::new();
                let _ = writeln!(out, "# schema_version: {SCHEMA_VERSION}");
                let _ = writeln!(out, "# command: {}", self.config.command);
                if let Some(seed) = self.config.seed {
                    let _ = writeln!(out, "# seed: {seed}");
                }
                let _ = writeln!(out, "# config_hash: {}", self.config.hash());
                let mut w = csv::Writer::from_writer(Vec::new());
                let csv_err = |e: csv::Error| CliError::Core(Error::Format(e.to_string()));
                w.write_record(&self.header).map_err(csv_err)?;
                for r in &self.rows {
                    w.write_record(r).map_err(csv_err)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Core(Error::Format(e.to_string())))?;
                out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
                Ok(out)
            }
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

/// A fixture name, or a path to a measurement JSON file.
pub fn resolve_povm(source: &str) -> Result<(Povm, Option<String>), CliError> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        let digest = hex(&Sha256::digest(text.as_bytes()));
        return Ok((io::povm_from_json(&text)?, Some(digest)));
    }
    fixtures::by_name(source).map(|p| (p, None)).map_err(|e| CliError::Usage(e.to_string()))
}

/// A named probe state in dimension `dim`, or a state JSON file.
pub fn resolve_state(source: &str, dim: usize) -> Result<QuantumState, CliError> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(Error::from)?;
        let state = io::state_from_json(&text)?;
        if state.dim() != dim {
            return Err(CliError::Usage(format!("state has dimension {}, measurement has {dim}", state.dim())));
        }
        return Ok(state);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pair = |a: C64, b: C64| -> Result<QuantumState, CliError> {
        if dim < 2 {
            return Err(CliError::Usage(format!("state `{source}` needs dimension at least 2")));
        }
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[0] = a;
        v[1] = b;
        Ok(QuantumState::pure(v)?)
    };
    let (r, i) = (|x: f64| C64::new(x, 0.0), |x: f64| C64::new(0.0, x));
    match source {
        "zero" => Ok(QuantumState::basis(dim, 0)),
        "one" => pair(r(0.0), r(1.0)),
        "plus" => pair(r(h), r(h)),
        "minus" => pair(r(h), r(-h)),
        "plus-i" => pair(r(h), i(h)),
        "minus-i" => pair(r(h), i(-h)),
        "mixed" => Ok(QuantumState::maximally_mixed(dim)),
        _ => Err(CliError::Usage(format!("unknown state `{source}`; available: {}", STATE_NAMES.join(", ")))),
    }
}

fn povm_value(povm: &Povm) -> Value {
    serde_json::to_value(PovmDoc::from_povm(povm)).expect("measurement serializes")
}

fn effects_value(effects: &[crate::linalg::ComplexMatrix]) -> Value {
    serde_json::to_value(PovmDoc::from_effects(effects)).expect("effects serialize")
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::Simulate(a) => simulate(a, &file),
        Command::Usd(a) => usd(a, &file),
        Command::Compare(a) => compare(a, &file),
        Command::Table1 => table1(),
        Command::Fixtures => list_fixtures(),
        Command::Naimark(a) => naimark(a, &file),
        Command::Scheme(a) => scheme(a, &file),
    }
}

fn simulate(a: &SimulateArgs, file: &ConfigFile) -> Result<Report, CliError> {
    let source = file.povm_fixture.clone().unwrap_or_else(|| a.povm.clone());
    let shots = file.shots.unwrap_or(a.shots);
    let seed = file.seed.unwrap_or(a.seed);
    let choice = file.scheme.unwrap_or(a.scheme);
    if choice == SchemeChoice::Both {
        return Err(CliError::Usage("simulate runs one scheme: postselection or naimark".into()));
    }
    if shots == 0 {
        return Err(CliError::Usage("shots must be at least 1".into()));
    }
    let (povm, digest) = resolve_povm(&source)?;
    let state = resolve_state(&a.state, povm.dim())?;
    let mut config = ExperimentConfig::new("simulate");
    config.povm = Some(source);
    config.povm_digest = digest;
    config.state = Some(a.state.clone());
    config.shots = Some(shots);
    config.seed = Some(seed);
    config.scheme = Some(choice);

    let born = born_probabilities(&state, &povm)?;
    let n = povm.outcomes();
    let record = match choice {
        SchemeChoice::Postselection => sample_postselection(&postselection_scheme(&povm)?, &state, shots, seed)?,
        _ => {
            let dilation = naimark_dilation(&povm, DilationMode::Abstract)?;
            let probs = dilated_statistics(&dilation, &state)?;
            let picker = WeightedIndex::new(&probs).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let outcomes = sample_chunked(shots, seed, |r| picker.sample(r) as u32);
            ShotRecord { seed, outcome_count: probs.len(), fail_outcome: None, outcomes }
        }
    };
    let counts = record.counts();
    let accepted = record.success_count();
    let freqs = record.conditional_frequencies();

    let mut report = Report::new(config, &["outcome", "label", "count", "frequency", "expected", "sigma", "z"]);
    let mut outcomes = Vec::new();
    for i in 0..n {
        let sigma = (born[i] * (1.0 - born[i]) / accepted.max(1) as f64).sqrt();
        let z = if sigma > 0.0 { (freqs[i] - born[i]) / sigma } else { 0.0 };
        report.row(vec![
            i.to_string(),
            povm.labels()[i].clone(),
            counts[i].to_string(),
            num(freqs[i]),
            num(born[i]),
            num(sigma),
            format!("{z:.3}"),
        ]);
        outcomes.push(json!({
            "outcome": i, "label": povm.labels()[i], "count": counts[i],
            "frequency": freqs[i], "born": born[i], "sigma": sigma, "z": z,
        }));
    }
    let expected_rate = match choice {
        SchemeChoice::Postselection => 1.0 / povm.dim() as f64,
        _ => 1.0,
    };
    let rate = record.success_rate();
    let sigma = (expected_rate * (1.0 - expected_rate) / shots as f64).sqrt();
    let z = if sigma > 0.0 { (rate - expected_rate) / sigma } else { 0.0 };
    report.row(vec![
        "success".into(),
        String::new(),
        accepted.to_string(),
        num(rate),
        num(expected_rate),
        num(sigma),
        format!("{z:.3}"),
    ]);
    report.result = json!({
        "shots": shots,
        "accepted": accepted,
        "success_rate": rate,
        "expected_success_rate": expected_rate,
        "outcomes": outcomes,
    });
    Ok(report)
}

fn usd(a: &UsdArgs, file: &ConfigFile) -> Result<Report, CliError> {
    let seed = file.seed.unwrap_or(a.seed);
    if let Some(args) = &a.source.symmetric {
        let d: usize = args[0].parse().map_err(|_| CliError::Usage(format!("bad dimension `{}`", args[0])))?;
        let eps: f64 = args[1].parse().map_err(|_| CliError::Usage(format!("bad epsilon `{}`", args[1])))?;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(CliError::Usage(format!("epsilon must be in (0, 1) for non-orthogonal states, got {eps}")));
        }
        if d < 2 {
            return Err(CliError::Usage("d must be at least 2".into()));
        }
        let mut config = ExperimentConfig::new("usd");
        config.params = json!({ "mode": "symmetric", "d": d, "epsilon": eps });
        let sym = symmetric_ensemble_with_epsilon(d, eps)?;
        let m = equal_probability_measurement(&sym.ensemble)?;
        let p_eq = usd_success(&sym.ensemble, &m)?.success;
        let p_sp = projective_simulable_optimum(&sym.ensemble)?;
        let ratio = p_eq / p_sp;
        let (lower, upper) = (d as f64 * (1.0 - eps), d as f64);
        let band = lower <= ratio + 1e-9 && ratio <= upper + 1e-9;
        let mut report = Report::new(
            config,
            &["d", "epsilon", "p_equal", "p_sp", "ratio", "band_lower", "band_upper", "band_holds"],
        );
        report.row(vec![
            d.to_string(),
            eps.to_string(),
            num(p_eq),
            num(p_sp),
            num(ratio),
            num(lower),
            num(upper),
            band.to_string(),
        ]);
        report.result = json!({
            "d": d, "epsilon": eps, "p_equal": p_eq, "p_sp": p_sp, "ratio": ratio,
            "band_lower": lower, "band_upper": upper, "band_holds": band,
        });
        if !band {
            report.failures.push(format!("ratio {ratio} outside [{lower}, {upper}]"));
        }
        return Ok(report);
    }
    if let Some(dims) = &a.source.random {
        let (d, big_d) = (dims[0], dims[1]);
        let mut config = ExperimentConfig::new("usd");
        config.seed = Some(seed);
        config.params = json!({ "mode": "random", "d": d, "D": big_d, "trials": a.trials });
        let exp = random_ensemble_experiment(d, big_d, a.trials, seed)?;
        let mut report = Report::new(
            config,
            &["d", "D", "gamma", "trial", "lambda_min", "p_sp_upper", "ratio_lower", "ratio_upper", "seed"],
        );
        for r in &exp.rows {
            report.row(vec![
                r.d.to_string(),
                r.big_d.to_string(),
                num(r.gamma),
                r.trial.to_string(),
                format!("{:.9}", r.lambda_min),
                num(r.p_sp_upper),
                num(r.ratio_lower),
                num(r.ratio_upper),
                r.seed.to_string(),
            ]);
        }
        report.result = serde_json::to_value(&exp).map_err(Error::from)?;
        return Ok(report);
    }
    let path = a.source.ensemble.as_ref().expect("clap requires one ensemble source");
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    let ensemble = io::ensemble_from_json(&text)?;
    let mut config = ExperimentConfig::new("usd");
    config.params = json!({
        "mode": "ensemble",
        "file": path.display().to_string(),
        "digest": hex(&Sha256::digest(text.as_bytes())),
    });
    let check = lemma1_bound_check(&ensemble)?;
    let gram = ensemble.gram();
    let mut report = Report::new(
        config,
        &["states", "dim", "lambda_min", "p_povm_lower", "p_sp", "ratio", "simulated_success", "bound_holds"],
    );
    report.row(vec![
        ensemble.len().to_string(),
        ensemble.dim().to_string(),
        num(gram.min_eigenvalue()),
        num(check.p_povm_lower),
        num(check.p_sp),
        num(check.ratio),
        num(check.simulated_success),
        check.bound_ok.to_string(),
    ]);
    report.result = json!({
        "states": ensemble.len(), "dim": ensemble.dim(),
        "lambda_min": gram.min_eigenvalue(), "check": check,
    });
    if !check.bound_ok {
        report.failures.push("success bound violated".into());
    }
    Ok(report)
}

fn resolve_noise(a: &CompareArgs, file: &ConfigFile) -> Result<NoiseModel, CliError> {
    let section = file.noise.as_ref();
    let preset = section.and_then(|s| s.preset.clone()).unwrap_or_else(|| a.noise.clone());
    let base = NoiseModel::preset(&preset).map_err(|e| CliError::Usage(e.to_string()))?;
    let pick = |flag: Option<f64>, cfg: Option<f64>, default: f64| cfg.or(flag).unwrap_or(default);
    let cnot = pick(a.cnot, section.and_then(|s| s.cnot), base.cnot_depolarizing);
    let su2 = pick(a.su2, section.and_then(|s| s.su2), base.su2_depolarizing);
    let bias = pick(a.readout_bias, section.and_then(|s| s.readout_bias), base.readout_bias);
    NoiseModel::new(cnot, su2, bias).map_err(|e| CliError::Usage(e.to_string()))
}

fn compare(a: &CompareArgs, file: &ConfigFile) -> Result<Report, CliError> {
    let source = file.povm_fixture.clone().unwrap_or_else(|| a.povm.clone());
    let noise = resolve_noise(a, file)?;
    let shots = file.shots.unwrap_or(a.shots);
    if shots == 0 {
        return Err(CliError::Usage("shots must be at least 1".into()));
    }
    let seed = file.seed.unwrap_or(a.seed);
    let choice = file.scheme.unwrap_or(a.scheme);
    let (povm, digest) = resolve_povm(&source)?;
    let randomization = match a.randomization {
        RandomizationArg::Block => Randomization::Block,
        RandomizationArg::PerShot => Randomization::PerShot,
    };
    let connectivity = match a.connectivity {
        ConnectivityArg::Full => Connectivity::Full,
        ConnectivityArg::OneWay => Connectivity::OneWay,
    };
    let mut config = ExperimentConfig::new("compare");
    config.povm = Some(source);
    config.povm_digest = digest;
    config.shots = Some(shots);
    config.seed = Some(seed);
    config.scheme = Some(choice);
    config.noise = Some(noise);
    config.params = json!({ "randomization": randomization, "connectivity": connectivity });
    let cc = ComparisonConfig { noise, shot_cap: shots, seed, randomization, connectivity };

    let mut report = Report::new(
        config,
        &["scheme", "d_op", "effects", "completeness_defect", "postselection_fraction", "residual_mass", "cnots"],
    );
    let mut runs = serde_json::Map::new();
    if choice != SchemeChoice::Naimark {
        let record = postselection_tomography(&povm, &cc)?;
        let rec = reconstruct_povm(&record)?;
        let d = operational_distance(povm.effects(), &rec.effects)?;
        let fraction = record.success_fraction();
        report.row(vec![
            "postselection".into(),
            num(d),
            rec.effects.len().to_string(),
            format!("{:.3e}", rec.completeness_defect),
            num(fraction),
            String::new(),
            "0".into(),
        ]);
        runs.insert(
            "postselection".into(),
            json!({
                "d_op": d, "postselection_fraction": fraction,
                "completeness_defect": rec.completeness_defect, "effects": effects_value(&rec.effects),
            }),
        );
    }
    if choice != SchemeChoice::Postselection {
        let (record, circuit) = naimark_tomography(&povm, &cc)?;
        let rec = reconstruct_povm(&record)?;
        let d = operational_distance(povm.effects(), &rec.effects)?;
        let residual: f64 = rec.effects[povm.outcomes()..].iter().fold(0.0, |acc, e| acc + e.trace().re / 2.0);
        report.row(vec![
            "naimark".into(),
            num(d),
            rec.effects.len().to_string(),
            format!("{:.3e}", rec.completeness_defect),
            String::new(),
            num(residual),
            circuit.cnot_count().to_string(),
        ]);
        runs.insert(
            "naimark".into(),
            json!({
                "d_op": d, "residual_mass": residual, "cnots": circuit.cnot_count(),
                "completeness_defect": rec.completeness_defect, "effects": effects_value(&rec.effects),
            }),
        );
    }
    report.result = json!({ "target": povm_value(&povm), "runs": runs });
    Ok(report)
}

fn table1() -> Result<Report, CliError> {
    let config = ExperimentConfig::new("table1");
    let mut report = Report::new(
        config,
        &["povm", "naimark", "postselection", "reported_naimark", "reported_postselection", "within_tolerance"],
    );
    let mut rows = Vec::new();
    for row in fixtures::reconstruction_rows() {
        let nm = operational_distance(&row.ideal, &row.naimark)?;
        let ps = operational_distance(&row.ideal, &row.postselection)?;
        let ok = (nm - row.reported.0).abs() <= TABLE1_TOLERANCE && (ps - row.reported.1).abs() <= TABLE1_TOLERANCE;
        report.row(vec![
            row.name.into(),
            format!("{nm:.4}"),
            format!("{ps:.4}"),
            format!("{:.3}", row.reported.0),
            format!("{:.3}", row.reported.1),
            ok.to_string(),
        ]);
        rows.push(json!({
            "povm": row.name, "naimark": nm, "postselection": ps,
            "reported": [row.reported.0, row.reported.1], "within_tolerance": ok,
        }));
        if !ok {
            report.failures.push(format!("{}: ({nm:.4}, {ps:.4}) vs {:?}", row.name, row.reported));
        }
    }
    report.result = json!({ "tolerance": TABLE1_TOLERANCE, "rows": rows });
    Ok(report)
}

fn list_fixtures() -> Result<Report, CliError> {
    let mut report = Report::new(ExperimentConfig::new("fixtures"), &["name", "dim", "outcomes", "rank_one"]);
    let mut docs = Vec::new();
    for name in fixtures::POVM_NAMES {
        let p = fixtures::by_name(name)?;
        report.row(vec![name.into(), p.dim().to_string(), p.outcomes().to_string(), p.is_rank_one().to_string()]);
        docs.push(json!({ "name": name, "povm": povm_value(&p) }));
    }
    report.result = Value::Array(docs);
    Ok(report)
}

fn naimark(a: &NaimarkArgs, file: &ConfigFile) -> Result<Report, CliError> {
    let source = file.povm_fixture.clone().unwrap_or_else(|| a.povm.clone());
    let (povm, digest) = resolve_povm(&source)?;
    let mode = match a.mode {
        ModeArg::Abstract => DilationMode::Abstract,
        ModeArg::Register => DilationMode::QubitRegister,
    };
    let mut config = ExperimentConfig::new("naimark");
    config.povm = Some(source);
    config.povm_digest = digest;
    config.params = json!({ "mode": mode });
    let dil = naimark_dilation(&povm, mode)?;
    let u = dil.unitary();
    let mut report = Report::new(config, &["row", "col", "re", "im"]);
    for r in 0..u.dim() {
        for c in 0..u.dim() {
            let z = u.get(r, c);
            report.row(vec![r.to_string(), c.to_string(), format!("{:.15e}", z.re), format!("{:.15e}", z.im)]);
        }
    }
    let unitary: Value = serde_json::from_str(&dil.to_json()?).map_err(Error::from)?;
    report.result = json!({
        "extended_dim": dil.extended_dim(),
        "embedding": dil.embedding(),
        "isometry_residual": dil.isometry_residual(),
        "unitarity_residual": dil.unitarity_residual(),
        "unitary": unitary,
    });
    Ok(report)
}

fn scheme(a: &SchemeArgs, file: &ConfigFile) -> Result<Report, CliError> {
    let source = file.povm_fixture.clone().unwrap_or_else(|| a.povm.clone());
    let (povm, digest) = resolve_povm(&source)?;
    let mut config = ExperimentConfig::new("scheme");
    config.povm = Some(source);
    config.povm_digest = digest;
    let s = postselection_scheme(&povm)?;
    let mut report = Report::new(config, &["component", "weight", "plus_outcome", "vector"]);
    for (k, c) in s.components().iter().enumerate() {
        let v: Vec<String> = c.vector.iter().map(|z| format!("{:.12}{:+.12}i", z.re, z.im)).collect();
        report.row(vec![k.to_string(), num(c.weight), c.plus_outcome.to_string(), v.join(" ")]);
    }
    report.result = serde_json::from_str(&s.to_json()?).map_err(Error::from)?;
    Ok(report)
}

/// Where the report goes: `--output`, else the env directory, else stdout.
pub fn destination(cli: &Cli, env_dir: Option<PathBuf>) -> Option<PathBuf> {
    if let Some(p) = &cli.output {
        return Some(p.clone());
    }
    let name = match &cli.command {
        Command::Simulate(_) => "simulate",
        Command::Usd(_) => "usd",
        Command::Compare(_) => "compare",
        Command::Table1 => "table1",
        Command::Fixtures => "fixtures",
        Command::Naimark(_) => "naimark",
        Command::Scheme(_) => "scheme",
    };
    env_dir.map(|d| d.join(format!("{name}.{}", cli.format.extension())))
}

/// Parses `args`, runs the command, writes the report and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let env_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match execute(&cli).and_then(|report| emit(&cli, &report, env_dir).map(|()| report)) {
        Ok(report) => {
            for f in &report.failures {
                eprintln!("assertion failed: {f}");
            }
            if report.failures.is_empty() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(cli: &Cli, report: &Report, env_dir: Option<PathBuf>) -> Result<(), CliError> {
    let text = report.render(cli.format)?;
    match destination(cli, env_dir) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(Error::from)?;
            }
            std::fs::write(&path, text).map_err(Error::from)?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes()).map_err(Error::from)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("povmsim").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn simulate_trivial_is_single_outcome() {
        let r = execute(&parse(&["simulate", "--povm", "trivial", "--shots", "2000", "--seed", "1"])).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0][3], num(1.0));
    }

    #[test]
    fn unknown_fixture_is_usage_error() {
        let err = execute(&parse(&["simulate", "--povm", "nope"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("tetrahedral"));
    }

    #[test]
    fn symmetric_epsilon_zero_rejected() {
        let err = execute(&parse(&["usd", "--symmetric", "3", "0"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn symmetric_band() {
        let r = execute(&parse(&["usd", "--symmetric", "8", "0.05"])).unwrap();
        let ratio: f64 = r.rows[0][4].parse().unwrap();
        assert!((7.6 - 1e-6..=8.0 + 1e-6).contains(&ratio));
        assert!(r.failures.is_empty());
    }

    #[test]
    fn hash_tracks_config() {
        let a = execute(&parse(&["simulate", "--shots", "100", "--seed", "1"])).unwrap();
        let b = execute(&parse(&["simulate", "--shots", "100", "--seed", "2"])).unwrap();
        let c = execute(&parse(&["simulate", "--shots", "100", "--seed", "1"])).unwrap();
        assert_ne!(a.config.hash(), b.config.hash());
        assert_eq!(a.render(Format::Csv).unwrap(), c.render(Format::Csv).unwrap());
    }

    #[test]
    fn config_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 5\nshots = 300\npovm_fixture = \"trine\"\n[noise]\ncnot = 0.2\n").unwrap();
        let p = path.to_str().unwrap();
        let r = execute(&parse(&["--config", p, "simulate", "--seed", "9"])).unwrap();
        assert_eq!(r.config.seed, Some(5));
        assert_eq!(r.config.shots, Some(300));
        assert_eq!(r.config.povm.as_deref(), Some("trine"));
        let cli = parse(&["--config", p, "compare", "--cnot", "0.01"]);
        let Command::Compare(a) = &cli.command else { unreachable!() };
        let noise = resolve_noise(a, &ConfigFile::load(&path).unwrap()).unwrap();
        assert_eq!(noise.cnot_depolarizing, 0.2);
        assert_eq!(noise.readout_bias, 0.02);
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "shot = 5\n").unwrap();
        let err = execute(&parse(&["--config", path.to_str().unwrap(), "fixtures"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn env_directory_is_the_default_destination() {
        let cli = parse(&["--format", "json", "table1"]);
        assert_eq!(destination(&cli, Some("/tmp/x".into())), Some(PathBuf::from("/tmp/x/table1.json")));
        assert_eq!(destination(&cli, None), None);
        let cli = parse(&["-o", "a.csv", "table1"]);
        assert_eq!(destination(&cli, Some("/tmp/x".into())), Some(PathBuf::from("a.csv")));
    }

    #[test]
    fn named_states() {
        for name in STATE_NAMES {
            assert_eq!(resolve_state(name, 3).unwrap().dim(), 3);
        }
        assert!(resolve_state("zero", 1).is_ok());
        assert!(resolve_state("one", 1).is_err());
        assert_eq!(resolve_state("bogus", 2).unwrap_err().exit_code(), 2);
    }
}
