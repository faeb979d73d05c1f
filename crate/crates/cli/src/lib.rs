//! `clqnn` subcommands. Each one resolves its configuration from defaults,
//! an optional JSON file (`--config`, which may also be a manifest written
//! by an earlier run) and flags, in that order, then writes long-format CSV
//! and a `<command>.manifest.json` into `--out`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use clqnn_core::circuit::build_cl_qnn;
use clqnn_core::experiments::ising::{ground_energy, ising_experiment, IsingConfig, IsingRun};
use clqnn_core::experiments::toy::{toy_scan, ToyScanConfig};
use clqnn_core::experiments::wine::{classification_experiment, load_wine, ClassificationRun, WineConfig};
use clqnn_core::experiments::{median, AnsatzKind, InitKind};
use clqnn_core::optim::{OptimizerKind, TrainConfig};
use clqnn_core::report::{write_bloch_csv, write_labelled_records, write_toy_points, write_toy_rows, Manifest};
use clqnn_core::theory::{bloch_sample, lemma_suite, mc_expected_f_sq, mc_expected_grad_norm_sq, BlochMode};
use clqnn_core::{ising_hamiltonian, seed, InnerAnsatz, PauliString, PureState, RunRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

const LEMMA_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] clqnn_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use clqnn_core::Error as E;
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Data(_) => EXIT_DATA,
            Self::Core(E::Data(_) | E::Parse { .. } | E::Io(_)) => EXIT_DATA,
            Self::Core(_) => EXIT_USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "clqnn", version, about = "Trainability experiments for controlled-layer quantum neural networks")]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for CSV files and manifests.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Full-scale defaults (toy N up to 20, Ising N=16 L=6).
    #[arg(long, global = true)]
    pub full: bool,
    /// JSON config, or a manifest from an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the rotation-averaging identities on random instances.
    VerifyLemmas(LemmasArgs),
    /// Monte Carlo check of the loss and gradient-norm lower bounds.
    VerifyBounds(BoundsArgs),
    /// Toy-model scan of f² and ‖∇f‖² over qubit counts.
    Toy(ToyArgs),
    /// Variational ground-state search for the transverse-field Ising ring.
    Ising(IsingArgs),
    /// Binary wine classification.
    Wine(WineArgs),
    /// Bloch vectors of single-qubit states under two sampling schemes.
    Bloch(BlochArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::VerifyLemmas(_) => "verify-lemmas",
            Self::VerifyBounds(_) => "verify-bounds",
            Self::Toy(_) => "toy",
            Self::Ising(_) => "ising",
            Self::Wine(_) => "wine",
            Self::Bloch(_) => "bloch",
        }
    }
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a qubit count"));
    if let Some((a, b)) = s.split_once("..=").or_else(|| s.split_once("..")) {
        Ok((num(a)?, num(b)?))
    } else {
        let n = num(s)?;
        Ok((n, n))
    }
}

fn parse_pair(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two class labels like 1,2, got '{s}'"))?;
    let p = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("'{t}' is not a class label"));
    Ok((p(a)?, p(b)?))
}

#[derive(Debug, Args)]
pub struct LemmasArgs {
    /// Random instances per matrix size.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Quadrature nodes on [0, 2π).
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// CL blocks L.
    #[arg(long, short = 'l')]
    pub blocks: Option<usize>,
    /// Observable locality S.
    #[arg(long, short = 's')]
    pub s: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    /// Qubit range, e.g. 3..8 (inclusive) or a single count.
    #[arg(long, value_parser = parse_range)]
    pub n: Option<(usize, usize)>,
    #[arg(long, value_delimiter = ',')]
    pub ansatz: Option<Vec<AnsatzKind>>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Depolarizing parameter q in [0, 1]; switches to the density-matrix backend.
    #[arg(long)]
    pub noise: Option<f64>,
    /// uniform or haar-local.
    #[arg(long)]
    pub init: Option<InitKind>,
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub inner_layers: Option<usize>,
    #[arg(long)]
    pub he_layers: Option<usize>,
    /// Skip the gradient (f² only).
    #[arg(long)]
    pub no_grad: bool,
}

#[derive(Debug, Args)]
pub struct IsingArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Any of cl, random.
    #[arg(long, value_delimiter = ',')]
    pub ansatz: Option<Vec<AnsatzKind>>,
    /// Any of sgd, adam.
    #[arg(long, value_delimiter = ',')]
    pub optimizer: Option<Vec<String>>,
    #[arg(long)]
    pub sgd_lr: Option<f64>,
    #[arg(long)]
    pub adam_lr: Option<f64>,
    /// Independent seeds per (ansatz, optimizer).
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Shots per Hamiltonian term.
    #[arg(long)]
    pub shots: Option<usize>,
}

#[derive(Debug, Args)]
pub struct WineArgs {
    /// Wine data file; falls back to $WINE_DATA.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Two class labels, e.g. 1,2.
    #[arg(long, value_parser = parse_pair)]
    pub class_pair: Option<(u32, u32)>,
    #[arg(long, value_delimiter = ',')]
    pub ansatz: Option<Vec<AnsatzKind>>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Adam learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub inner_layers: Option<usize>,
    #[arg(long)]
    pub he_layers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BlochArgs {
    /// uniform or haar.
    #[arg(long)]
    pub mode: Option<BlochMode>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmasConfig {
    pub trials: usize,
    pub nodes: usize,
    pub seed: u64,
}

impl Default for LemmasConfig {
    fn default() -> Self {
        Self { trials: 100, nodes: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub n: usize,
    pub blocks: usize,
    pub s: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { n: 4, blocks: 2, s: 1, samples: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IsingCliConfig {
    pub n: usize,
    pub blocks: usize,
    pub ansatze: Vec<AnsatzKind>,
    pub optimizers: Vec<OptimizerKind>,
    pub runs: usize,
    pub iterations: usize,
    pub shots: usize,
    pub seed: u64,
}

impl Default for IsingCliConfig {
    fn default() -> Self {
        Self {
            n: 10,
            blocks: 4,
            ansatze: vec![AnsatzKind::Cl, AnsatzKind::Random],
            optimizers: vec![OptimizerKind::sgd(0.15), OptimizerKind::adam(0.01)],
            runs: 5,
            iterations: 200,
            shots: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WineCliConfig {
    pub data: Option<PathBuf>,
    pub class_pair: Option<(u32, u32)>,
    pub ansatze: Vec<AnsatzKind>,
    pub runs: usize,
    pub blocks: usize,
    pub inner_layers: usize,
    pub he_layers: usize,
    pub iterations: usize,
    pub shots: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for WineCliConfig {
    fn default() -> Self {
        Self {
            data: None,
            class_pair: None,
            ansatze: AnsatzKind::ALL.to_vec(),
            runs: 5,
            blocks: 2,
            inner_layers: 5,
            he_layers: 10,
            iterations: 200,
            shots: 100,
            batch_size: 8,
            optimizer: OptimizerKind::adam(0.01),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlochConfig {
    pub mode: BlochMode,
    pub samples: usize,
    pub seed: u64,
}

impl Default for BlochConfig {
    fn default() -> Self {
        Self { mode: BlochMode::UniformAngles, samples: 10_000, seed: 0 }
    }
}

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Overlays the JSON config file onto `base` key by key. Unknown or
/// ill-typed keys are reported with their path.
fn resolve<C: Serialize + DeserializeOwned>(command: &str, file: Option<&Path>, base: C) -> Result<C> {
    let Some(path) = file else {
        return Ok(base);
    };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    if value.get("command").is_some() && value.get("version").is_some() {
        let manifest = Manifest::from_json(&text).map_err(|e| usage(format!("manifest {}: {e}", path.display())))?;
        if manifest.command != command {
            return Err(usage(format!("manifest {} was written by '{}', not '{command}'", path.display(), manifest.command)));
        }
        value = manifest.config;
    }
    let Value::Object(overlay) = value else {
        return Err(usage(format!("config {} must be a JSON object", path.display())));
    };
    let Value::Object(mut merged) = serde_json::to_value(&base).map_err(clqnn_core::Error::from)? else {
        unreachable!("configs serialize to objects");
    };
    merged.extend(overlay);
    serde_path_to_error::deserialize(Value::Object(merged))
        .map_err(|e| usage(format!("config {}: field '{}': {}", path.display(), e.path(), e.inner())))
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> clqnn_core::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    fn manifest(mut self, mut m: Manifest) -> Result<()> {
        m.outputs = std::mem::take(&mut self.files);
        let name = format!("{}.manifest.json", m.command);
        self.write(&name, m.to_json()?.as_bytes())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

/// Parses, runs and maps the result to an exit status; errors are printed
/// to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match cli.jobs {
        Some(0) => Err(usage("--jobs must be at least 1")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| usage(format!("cannot start {j} workers: {e}")))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let name = cli.command.name();
    let file = cli.config.as_deref();
    match &cli.command {
        Command::VerifyLemmas(a) => {
            let mut c = resolve(name, file, LemmasConfig::default())?;
            set(&mut c.trials, a.trials);
            set(&mut c.nodes, a.nodes);
            set(&mut c.seed, cli.seed);
            verify_lemmas(&c, &cli.out)
        }
        Command::VerifyBounds(a) => {
            let mut c = resolve(name, file, BoundsConfig::default())?;
            set(&mut c.n, a.n);
            set(&mut c.blocks, a.blocks);
            set(&mut c.s, a.s);
            set(&mut c.samples, a.samples);
            set(&mut c.seed, cli.seed);
            verify_bounds(&c, &cli.out)
        }
        Command::Toy(a) => {
            let mut base = ToyScanConfig { n_max: 14, ..Default::default() };
            if cli.full {
                base.n_max = 20;
            }
            let mut c = resolve(name, file, base)?;
            if let Some((lo, hi)) = a.n {
                c.n_min = lo;
                c.n_max = hi;
            }
            set(&mut c.ansatze, a.ansatz.clone());
            set(&mut c.rounds, a.rounds);
            if a.noise.is_some() {
                c.noise = a.noise;
            }
            set(&mut c.init, a.init);
            set(&mut c.blocks, a.blocks);
            set(&mut c.inner_layers, a.inner_layers);
            set(&mut c.he_layers, a.he_layers);
            if a.no_grad {
                c.compute_grad = false;
            }
            set(&mut c.seed, cli.seed);
            toy(&c, &cli.out)
        }
        Command::Ising(a) => {
            let mut base = IsingCliConfig::default();
            if cli.full {
                base.n = 16;
                base.blocks = 6;
            }
            let mut c = resolve(name, file, base)?;
            set(&mut c.n, a.n);
            set(&mut c.blocks, a.blocks);
            set(&mut c.ansatze, a.ansatz.clone());
            if let Some(names) = &a.optimizer {
                c.optimizers = names
                    .iter()
                    .map(|s| match s.as_str() {
                        "sgd" => Ok(OptimizerKind::sgd(0.15)),
                        "adam" => Ok(OptimizerKind::adam(0.01)),
                        other => Err(usage(format!("unknown optimizer '{other}' (expected sgd or adam)"))),
                    })
                    .collect::<Result<_>>()?;
            }
            for opt in &mut c.optimizers {
                match opt {
                    OptimizerKind::Sgd { lr } => set(lr, a.sgd_lr),
                    OptimizerKind::Adam { lr, .. } => set(lr, a.adam_lr),
                }
            }
            set(&mut c.runs, a.runs);
            set(&mut c.iterations, a.iterations);
            set(&mut c.shots, a.shots);
            set(&mut c.seed, cli.seed);
            ising(&c, &cli.out)
        }
        Command::Wine(a) => {
            let mut c = resolve(name, file, WineCliConfig::default())?;
            if a.data.is_some() {
                c.data = a.data.clone();
            }
            if c.data.is_none() {
                c.data = std::env::var_os("WINE_DATA").map(PathBuf::from);
            }
            if a.class_pair.is_some() {
                c.class_pair = a.class_pair;
            }
            set(&mut c.ansatze, a.ansatz.clone());
            set(&mut c.runs, a.runs);
            set(&mut c.iterations, a.iterations);
            set(&mut c.shots, a.shots);
            set(&mut c.batch_size, a.batch_size);
            if let Some(lr) = a.lr {
                c.optimizer = OptimizerKind::adam(lr);
            }
            set(&mut c.blocks, a.blocks);
            set(&mut c.inner_layers, a.inner_layers);
            set(&mut c.he_layers, a.he_layers);
            set(&mut c.seed, cli.seed);
            wine(&c, &cli.out)
        }
        Command::Bloch(a) => {
            let mut c = resolve(name, file, BlochConfig::default())?;
            set(&mut c.mode, a.mode);
            set(&mut c.samples, a.samples);
            set(&mut c.seed, cli.seed);
            bloch(&c, &cli.out)
        }
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

pub fn verify_lemmas(c: &LemmasConfig, out: &Path) -> Result<Outcome> {
    let report = lemma_suite(c.trials, c.nodes, c.seed)?;
    let passed = report.passed(LEMMA_TOL);
    let mut m = Manifest::new("verify-lemmas", c.seed, to_value(c));
    m.final_metrics = json!({ "report": report, "tolerance": LEMMA_TOL, "passed": passed });
    Output::new(out)?.manifest(m)?;
    Ok(Outcome {
        passed,
        summary: format!(
            "lemma checks ({} instances per size, {} nodes): max deviation {:.3e} / {:.3e}, tolerance {LEMMA_TOL:e}: {}",
            c.trials,
            c.nodes,
            report.max_deviation_lemma2,
            report.max_deviation_lemma3,
            if passed { "ok" } else { "FAILED" }
        ),
    })
}

pub fn verify_bounds(c: &BoundsConfig, out: &Path) -> Result<Outcome> {
    if c.s == 0 || c.s > c.n {
        return Err(usage(format!("locality s={} must be in 1..={}", c.s, c.n)));
    }
    let circuit = build_cl_qnn(c.n, c.s, c.blocks, InnerAnsatz::TensorRotations)?;
    let idx: Vec<u8> = (0..c.n).map(|q| if q < c.s { 3 } else { 0 }).collect();
    let sigma = PauliString::from_indices(&idx)?;
    let zero = PureState::zero(c.n)?;
    let f = mc_expected_f_sq(&circuit, &sigma, &zero, c.samples, seed::derive(c.seed, &[0]))?;
    let g = mc_expected_grad_norm_sq(&circuit, &sigma, &zero, c.samples, seed::derive(c.seed, &[1]))?;
    let passed = f.passed && g.passed;
    let report = json!({ "observable": sigma.to_string(), "f_sq": f, "grad_norm_sq": g, "passed": passed });
    let mut m = Manifest::new("verify-bounds", c.seed, to_value(c));
    m.gate_budgets.insert("cl".into(), circuit.gate_budget());
    m.layer_counts.insert("cl".into(), circuit.layer_marks().len());
    m.bounds = json!({ "f_sq": f.bound, "grad_norm_sq": g.bound });
    m.final_metrics = report.clone();
    let mut o = Output::new(out)?;
    o.write("bounds.json", (serde_json::to_string_pretty(&report).map_err(clqnn_core::Error::from)? + "\n").as_bytes())?;
    o.manifest(m)?;
    Ok(Outcome { passed, summary: serde_json::to_string_pretty(&report).map_err(clqnn_core::Error::from)? })
}

pub fn toy(c: &ToyScanConfig, out: &Path) -> Result<Outcome> {
    let scan = toy_scan(c)?;
    let mut m = Manifest::new("toy", c.seed, to_value(c));
    let shape = c.shape();
    for n in c.n_min..=c.n_max {
        for &a in &c.ansatze {
            let circuit = shape.build(a, n, &mut seed::stream(c.seed, &[n as u64, a.code(), 0, 0]))?;
            m.gate_budgets.insert(format!("{a}/n={n}"), circuit.gate_budget());
            m.layer_counts.insert(format!("{a}/n={n}"), circuit.layer_marks().len());
        }
    }
    let cl_rows: Vec<_> = scan.rows.iter().filter(|r| r.bound_f_sq.is_some()).collect();
    if let Some(r) = cl_rows.first() {
        m.bounds = json!({ "f_sq": r.bound_f_sq, "grad_norm_sq": r.bound_grad_norm_sq });
    }
    // one-sided 3-sigma: a Monte Carlo mean can only show the bound is not violated
    let within = |mean: f64, se: f64, bound: f64| mean >= bound - 3.0 * se;
    let bounds_hold = cl_rows.iter().all(|r| {
        within(r.mean_f_sq, r.stderr_f_sq, r.bound_f_sq.unwrap_or(0.0))
            && match (r.mean_grad_norm_sq, r.stderr_grad_norm_sq, r.bound_grad_norm_sq) {
                (Some(mean), Some(se), Some(b)) => within(mean, se, b),
                _ => true,
            }
    });
    m.final_metrics = json!({ "rows": scan.rows, "cl_bounds_hold": bounds_hold });
    let mut o = Output::new(out)?;
    o.csv("toy_points.csv", |b| write_toy_points(&scan.points, b))?;
    o.csv("toy_rows.csv", |b| write_toy_rows(&scan.rows, b))?;
    o.manifest(m)?;
    let mut summary = String::from("n\tansatz\tmean_f_sq\tmean_grad_norm_sq");
    for r in &scan.rows {
        let g = r.mean_grad_norm_sq.map(|g| format!("{g:.4e}")).unwrap_or_else(|| "-".into());
        summary.push_str(&format!("\n{}\t{}\t{:.4e}\t{}", r.n, r.ansatz, r.mean_f_sq, g));
    }
    Ok(Outcome { passed: true, summary })
}

fn final_metric(records: &[RunRecord], f: impl Fn(&RunRecord) -> Option<f64>) -> f64 {
    records.last().and_then(f).unwrap_or(f64::NAN)
}

pub fn ising(c: &IsingCliConfig, out: &Path) -> Result<Outcome> {
    if c.runs == 0 {
        return Err(usage("runs must be at least 1"));
    }
    if c.ansatze.is_empty() || c.optimizers.is_empty() {
        return Err(usage("at least one ansatz and one optimizer are required"));
    }
    let jobs: Vec<(AnsatzKind, OptimizerKind, usize)> = c
        .ansatze
        .iter()
        .flat_map(|&a| c.optimizers.iter().flat_map(move |&o| (0..c.runs).map(move |r| (a, o, r))))
        .collect();
    let config_for = |a, o, r: usize| IsingConfig {
        n: c.n,
        blocks: c.blocks,
        ansatz: a,
        train: TrainConfig {
            iterations: c.iterations,
            shots: c.shots,
            batch_size: None,
            seed: seed::derive(c.seed, &[r as u64]),
            optimizer: o,
        },
    };
    // validate everything before the expensive part
    for &(a, o, r) in &jobs {
        let cfg = config_for(a, o, r);
        cfg.circuit()?;
        cfg.train.validate()?;
    }
    let e0 = ground_energy(&ising_hamiltonian(c.n)?)?;
    let runs: Vec<IsingRun> =
        jobs.par_iter().map(|&(a, o, r)| ising_experiment(&config_for(a, o, r))).collect::<clqnn_core::Result<_>>()?;

    let lowest = runs.iter().flat_map(|r| r.records.iter().filter_map(|x| x.exact_loss)).fold(f64::INFINITY, f64::min);
    let passed = lowest >= e0 - 1e-9;
    let mut m = Manifest::new("ising", c.seed, to_value(c));
    let mut groups: BTreeMap<String, Vec<&IsingRun>> = BTreeMap::new();
    for (&(a, o, r), run) in jobs.iter().zip(&runs) {
        m.gate_budgets.insert(format!("{a}/run={r}"), run.gate_budget);
        groups.entry(format!("{a}/{}", o.name())).or_default().push(run);
    }
    for &a in &c.ansatze {
        m.layer_counts.insert(a.to_string(), config_for(a, c.optimizers[0], 0).circuit()?.layer_marks().len());
    }
    m.bounds = json!({ "ground_energy": e0 });
    let mut metrics = serde_json::Map::new();
    let mut summary = format!("ground energy {e0:.6}; lowest exact loss {lowest:.6}");
    for (key, rs) in &groups {
        let fin: Vec<f64> = rs.iter().map(|r| final_metric(&r.records, |x| Some(x.loss))).collect();
        let ex: Vec<f64> = rs.iter().map(|r| final_metric(&r.records, |x| x.exact_loss)).collect();
        metrics.insert(key.clone(), json!({ "median_final_loss": median(&fin), "median_final_exact_loss": median(&ex) }));
        summary.push_str(&format!("\n{key}: median final loss {:.4} (exact {:.4})", median(&fin), median(&ex)));
    }
    metrics.insert("lowest_exact_loss".into(), json!(lowest));
    metrics.insert("above_ground_energy".into(), json!(passed));
    m.final_metrics = Value::Object(metrics);

    let labelled: Vec<(Vec<String>, &[RunRecord])> = jobs
        .iter()
        .zip(&runs)
        .map(|(&(a, o, r), run)| (vec![a.to_string(), o.name().to_string(), r.to_string()], run.records.as_slice()))
        .collect();
    let mut o = Output::new(out)?;
    o.csv("ising.csv", |b| write_labelled_records(&["ansatz", "optimizer", "run"], &labelled, b))?;
    o.manifest(m)?;
    Ok(Outcome { passed, summary })
}

pub fn wine(c: &WineCliConfig, out: &Path) -> Result<Outcome> {
    let path = c
        .data
        .clone()
        .ok_or_else(|| CliError::Data("no wine data: pass --data or set WINE_DATA".into()))?;
    if c.runs == 0 || c.ansatze.is_empty() {
        return Err(usage("runs and ansatz list must be non-empty"));
    }
    let datasets = (0..c.runs)
        .map(|r| load_wine(&path, c.class_pair, seed::derive(c.seed, &[r as u64, 0])))
        .collect::<clqnn_core::Result<Vec<_>>>()?;
    let jobs: Vec<(AnsatzKind, usize)> =
        c.ansatze.iter().flat_map(|&a| (0..c.runs).map(move |r| (a, r))).collect();
    let config_for = |a, r: usize| WineConfig {
        ansatz: a,
        blocks: c.blocks,
        inner_layers: c.inner_layers,
        he_layers: c.he_layers,
        train: TrainConfig {
            iterations: c.iterations,
            shots: c.shots,
            batch_size: Some(c.batch_size),
            seed: seed::derive(c.seed, &[r as u64, 1]),
            optimizer: c.optimizer,
        },
    };
    for &(a, r) in &jobs {
        config_for(a, r).train.validate()?;
    }
    let runs: Vec<ClassificationRun> = jobs
        .par_iter()
        .map(|&(a, r)| classification_experiment(&datasets[r], &config_for(a, r)))
        .collect::<clqnn_core::Result<_>>()?;

    let mut m = Manifest::new("wine", c.seed, to_value(c));
    let mut metrics = serde_json::Map::new();
    let mut summary = format!("class pair {:?}", datasets[0].class_pair);
    for &a in &c.ansatze {
        let mine: Vec<&ClassificationRun> =
            jobs.iter().zip(&runs).filter(|((k, _), _)| *k == a).map(|(_, r)| r).collect();
        m.gate_budgets.insert(a.to_string(), mine[0].gate_budget);
        m.layer_counts.insert(a.to_string(), config_for(a, 0).circuit()?.layer_marks().len());
        let loss: Vec<f64> = mine.iter().map(|r| final_metric(&r.records, |x| Some(x.loss))).collect();
        let err: Vec<f64> = mine.iter().map(|r| final_metric(&r.records, |x| x.test_error)).collect();
        metrics.insert(a.to_string(), json!({ "median_final_loss": median(&loss), "median_final_test_error": median(&err) }));
        summary.push_str(&format!(
            "\n{a}: median final loss {:.4}, median test error {:.4}",
            median(&loss),
            median(&err)
        ));
    }
    m.final_metrics = Value::Object(metrics);
    let labelled: Vec<(Vec<String>, &[RunRecord])> = jobs
        .iter()
        .zip(&runs)
        .map(|(&(a, r), run)| (vec![a.to_string(), r.to_string()], run.records.as_slice()))
        .collect();
    let mut o = Output::new(out)?;
    o.csv("wine.csv", |b| write_labelled_records(&["ansatz", "run"], &labelled, b))?;
    o.manifest(m)?;
    Ok(Outcome { passed: true, summary })
}

pub fn bloch(c: &BlochConfig, out: &Path) -> Result<Outcome> {
    if c.samples < 2 {
        return Err(usage("samples must be at least 2"));
    }
    let points = bloch_sample(c.mode, c.samples, &mut seed::stream(c.seed, &[]));
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    let mut var = [0.0; 3];
    for k in 0..3 {
        mean[k] = points.iter().map(|p| p[k]).sum::<f64>() / n;
        var[k] = points.iter().map(|p| (p[k] - mean[k]).powi(2)).sum::<f64>() / (n - 1.0);
    }
    let mut m = Manifest::new("bloch", c.seed, to_value(c));
    m.final_metrics = json!({ "mean": mean, "variance": var });
    let mut o = Output::new(out)?;
    o.csv("bloch.csv", |b| write_bloch_csv(&points, b))?;
    o.manifest(m)?;
    Ok(Outcome {
        passed: true,
        summary: format!("variance x {:.4} y {:.4} z {:.4}", var[0], var[1], var[2]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_pairs() {
        assert_eq!(parse_range("3..8"), Ok((3, 8)));
        assert_eq!(parse_range("3..=8"), Ok((3, 8)));
        assert_eq!(parse_range("5"), Ok((5, 5)));
        assert!(parse_range("a..3").is_err());
        assert_eq!(parse_pair("1,3"), Ok((1, 3)));
        assert!(parse_pair("1").is_err());
    }

    #[test]
    fn config_overlay_reports_field_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"trials": 3}"#).unwrap();
        let c = resolve("verify-lemmas", Some(&p), LemmasConfig::default()).unwrap();
        assert_eq!(c, LemmasConfig { trials: 3, ..Default::default() });

        fs::write(&p, r#"{"trials": "many"}"#).unwrap();
        let e = resolve("verify-lemmas", Some(&p), LemmasConfig::default()).unwrap_err();
        assert!(e.to_string().contains("trials"), "{e}");
        assert_eq!(e.exit_code(), EXIT_USAGE);

        fs::write(&p, r#"{"trails": 3}"#).unwrap();
        let e = resolve("verify-lemmas", Some(&p), LemmasConfig::default()).unwrap_err();
        assert!(e.to_string().contains("trails"), "{e}");
    }

    #[test]
    fn manifest_from_another_command_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = Manifest::new("bloch", 1, to_value(&BlochConfig::default()));
        fs::write(&p, m.to_json().unwrap()).unwrap();
        assert!(resolve("toy", Some(&p), ToyScanConfig::default()).is_err());
        assert_eq!(resolve("bloch", Some(&p), BlochConfig { samples: 5, ..Default::default() }).unwrap(), BlochConfig::default());
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(clqnn_core::Error::Data("x".into())).exit_code(), EXIT_DATA);
        assert_eq!(CliError::from(clqnn_core::Error::InvalidArgument("x".into())).exit_code(), EXIT_USAGE);
    }
}
