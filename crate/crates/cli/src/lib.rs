//! Experiment harness behind the `qstrange` binary.
//!
//! Every run writes its artifacts and a `manifest.json` into the output
//! directory. The manifest carries the full parameter set, so
//! [`replay`] can regenerate the artifacts and compare digests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qstrange::observables::DEFAULT_SAMPLE_CAP;
use qstrange::simulator::{Backend, MemoryGuard, DEFAULT_BUDGET_QUBITS};

mod commands;
pub mod manifest;
pub mod render;

pub use manifest::{Artifact, RunManifest, FAILED_MARKER, MANIFEST_FILE, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "qstrange", version, about = "Quantum simulation of a dissipative lattice map")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Iterated density of an initial image, classically and optionally on
    /// the simulator.
    Attractor(AttractorArgs),
    /// Fourier spectrum of the evolved image and its coarse-grained readout.
    Spectral(SpectralArgs),
    /// Echo fidelity and garbage error over a grid of noise strengths.
    FidelityScan(ScanArgs),
    /// Samples needed to reach a target spectral fidelity.
    Complexity(ComplexityArgs),
    /// Checkpointed reversible schedule and its end-to-end verification.
    Pebble(PebbleArgs),
    /// Re-run a recorded manifest and compare every artifact digest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    Sparse,
    Dense,
    #[default]
    Auto,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Sparse => Backend::Sparse,
            BackendArg::Dense => Backend::Dense,
            BackendArg::Auto => Backend::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    pub backend: BackendArg,
    /// Largest dense state allowed, in qubits.
    #[arg(long, default_value_t = DEFAULT_BUDGET_QUBITS)]
    pub budget: usize,
}

impl Common {
    pub fn guard(&self) -> MemoryGuard {
        MemoryGuard::new(self.budget)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AttractorArgs {
    #[arg(long = "nq", default_value_t = 6)]
    pub n_q: u32,
    #[arg(long, default_value_t = 10)]
    pub t: usize,
    /// Initial image as an N × N ASCII bitmap; the default is a disk.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Also run the circuit on the simulator.
    #[arg(long)]
    pub quantum: bool,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpectralArgs {
    #[arg(long = "nq", default_value_t = 6)]
    pub n_q: u32,
    #[arg(long, default_value_t = 10)]
    pub t: usize,
    /// Frequency qubits read out per coordinate.
    #[arg(long = "nf", default_value_t = 4)]
    pub n_f: u32,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScanArgs {
    #[arg(long = "nq", value_delimiter = ',', default_values_t = [4u32, 5])]
    pub n_q: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [6usize, 8, 10])]
    pub t: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 3e-3, 1e-2, 3e-2])]
    pub epsilon: Vec<f64>,
    /// Seeds per grid point, counting up from `--seed`.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Range of `1 - f` used by the fidelity fit.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1e-3, 0.3])]
    pub window: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ComplexityArgs {
    #[arg(long = "nq", value_delimiter = ',', default_values_t = [3u32, 4, 5])]
    pub n_q: Vec<u32>,
    #[arg(long, default_value_t = 6)]
    pub t: usize,
    #[arg(long = "nf", default_value_t = 3)]
    pub n_f: u32,
    #[arg(long, default_value_t = 0.9)]
    pub target: f64,
    #[arg(long, default_value_t = 10)]
    pub trials: u32,
    /// Largest sample count tried before giving up on a point.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CAP)]
    pub cap: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PebbleArgs {
    #[arg(long = "nq", default_value_t = 3)]
    pub n_q: u32,
    /// Checkpoint levels; the schedule covers `2^nt` iterations.
    #[arg(long = "nt", default_value_t = 4)]
    pub n_t: u32,
    /// Iterations actually run, at most `2^nt`.
    #[arg(long)]
    pub t: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest to replay.
    pub manifest: PathBuf,
    /// Where the regenerated artifacts go.
    #[arg(long, default_value = "replay")]
    pub out: PathBuf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Attractor(_) => "attractor",
            Command::Spectral(_) => "spectral",
            Command::FidelityScan(_) => "fidelity-scan",
            Command::Complexity(_) => "complexity",
            Command::Pebble(_) => "pebble",
            Command::Replay(_) => "replay",
        }
    }

    pub fn out(&self) -> &Path {
        match self {
            Command::Attractor(a) => &a.common.out,
            Command::Spectral(a) => &a.common.out,
            Command::FidelityScan(a) => &a.common.out,
            Command::Complexity(a) => &a.common.out,
            Command::Pebble(a) => &a.common.out,
            Command::Replay(a) => &a.out,
        }
    }

    /// The same run writing into `dir`.
    pub fn with_out(&self, dir: &Path) -> Command {
        let mut c = self.clone();
        match &mut c {
            Command::Attractor(a) => a.common.out = dir.into(),
            Command::Spectral(a) => a.common.out = dir.into(),
            Command::FidelityScan(a) => a.common.out = dir.into(),
            Command::Complexity(a) => a.common.out = dir.into(),
            Command::Pebble(a) => a.common.out = dir.into(),
            Command::Replay(a) => a.out = dir.into(),
        }
        c
    }
}

/// Outcome of [`replay`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub manifest: RunManifest,
    /// Artifacts whose digest differs or that were not produced again.
    pub mismatches: Vec<String>,
}

impl ReplayReport {
    pub fn is_identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Run a command and write its manifest. On failure the output directory
/// receives a `FAILED` marker and a manifest with status `failed`.
pub fn execute(command: &Command) -> Result<RunManifest> {
    if let Command::Replay(args) = command {
        let report = replay(&args.manifest, &args.out)?;
        anyhow::ensure!(
            report.is_identical(),
            "replay differs from the recorded run in: {}",
            report.mismatches.join(", ")
        );
        return Ok(report.manifest);
    }
    let mut out = manifest::Outputs::create(command.out())?;
    let start = Instant::now();
    let result = commands::run(command, &mut out);
    let duration_seconds = start.elapsed().as_secs_f64();
    let (status, error, results) = match &result {
        Ok(r) => ("ok", None, r.clone()),
        Err(e) => ("failed", Some(format!("{e:#}")), Default::default()),
    };
    let m = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        status: status.into(),
        error: error.clone(),
        run: command.clone(),
        inputs: out.inputs.clone(),
        artifacts: out.artifacts.clone(),
        results,
        duration_seconds,
    };
    m.write(out.dir())?;
    if let Some(e) = error {
        let marker = out.dir().join(FAILED_MARKER);
        std::fs::write(&marker, format!("{e}\n")).with_context(|| format!("writing {}", marker.display()))?;
    }
    result.map(|_| m)
}

/// Re-run the manifest at `path` into `out` and compare artifact digests.
pub fn replay(path: &Path, out: &Path) -> Result<ReplayReport> {
    let recorded = RunManifest::read(path)?;
    anyhow::ensure!(recorded.status == "ok", "manifest records a failed run");
    anyhow::ensure!(
        !matches!(recorded.run, Command::Replay(_)),
        "a replay manifest cannot be replayed"
    );
    for input in &recorded.inputs {
        let now = manifest::digest_file(Path::new(&input.path), input.path.clone())?;
        anyhow::ensure!(
            now.sha256 == input.sha256,
            "input {} changed since the recorded run",
            input.path
        );
    }
    let again = execute(&recorded.run.with_out(out))?;
    let mut mismatches = Vec::new();
    for a in &recorded.artifacts {
        match again.artifacts.iter().find(|b| b.path == a.path) {
            Some(b) if b == a => {}
            _ => mismatches.push(a.path.clone()),
        }
    }
    for b in &again.artifacts {
        if !recorded.artifacts.iter().any(|a| a.path == b.path) {
            mismatches.push(b.path.clone());
        }
    }
    Ok(ReplayReport {
        manifest: again,
        mismatches,
    })
}
