// Copyright 2026 The pqmselect developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `pqmselect` — memory-scored selection of hidden-layer widths, direct
//! memory probes, and the exhaustive superposed-training emulation.
//!
//! Exit codes: 0 success, 1 data/training/capacity failures, 2 usage
//! errors. Every file-producing command writes a `manifest.json` next to
//! its outputs; identical inputs produce byte-identical outputs.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pqmselect_core::crossval::make_folds;
use pqmselect_core::data::{self, Dataset, LabelColumn};
use pqmselect_core::error::{Error, Result};
use pqmselect_core::mlp::MlpConfig;
use pqmselect_core::pqm::{self, BitPattern, PqmMemory, RetrievalDistribution};
use pqmselect_core::selection::{self, SelectionConfig, SelectionMode, SelectionReport};
use pqmselect_core::superposition::{self, WeightGrid};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "pqmselect", version)]
#[command(about = "Probabilistic quantum memory simulation and architecture selection")]
struct Cli {
    /// Worker threads for ensemble/branch training (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan hidden-layer widths over a dataset and write reports.
    Select(SelectArgs),
    /// Probe a memory built from explicit bit patterns.
    Pqm(PqmArgs),
    /// Exhaustively emulate superposed training over a weight grid.
    Superposition(SuperpositionArgs),
    /// Re-emit the CSV reports from a stored JSON report.
    Report(ReportArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DataFormat {
    Proben1,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Expect,
    Sample,
}

impl From<Mode> for SelectionMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Expect => SelectionMode::Expect,
            Mode::Sample => SelectionMode::Sample,
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    /// Dataset file.
    #[arg(long)]
    dataset: PathBuf,
    /// Dataset file format.
    #[arg(long, value_enum, default_value_t = DataFormat::Proben1)]
    format: DataFormat,
    /// CSV label column: a header name, or a 0-based index if numeric.
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Cross-validation fold count κ.
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Trained networks per fold.
    #[arg(long, default_value_t = 100)]
    seeds_per_fold: usize,
    /// Memory output qubits d.
    #[arg(long, default_value_t = 100)]
    control_qubits: usize,
    /// Smallest hidden-layer width to scan.
    #[arg(long, default_value_t = 1)]
    hidden_min: usize,
    /// Largest hidden-layer width to scan.
    #[arg(long, default_value_t = 20)]
    hidden_max: usize,
    /// Scoring mode.
    #[arg(long, value_enum, default_value_t = Mode::Expect)]
    mode: Mode,
    /// Measurement draws averaged per width in sample mode.
    #[arg(long, default_value_t = 1)]
    sample_repeats: usize,
    /// Master seed; every derived stream is a pure function of it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory for results.csv, distributions.csv, results.json
    /// and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PqmArgs {
    #[command(subcommand)]
    command: PqmCommand,
}

#[derive(Subcommand)]
enum PqmCommand {
    /// Closed-form retrieval distribution (any size).
    Analytic(PqmInstance),
    /// Full circuit simulation (small sizes).
    Circuit(PqmInstance),
    /// Run both backends and report the largest per-bin deviation.
    Verify(PqmInstance),
}

#[derive(Args)]
struct PqmInstance {
    /// Stored patterns, comma separated (e.g. `00,11`).
    #[arg(long, value_delimiter = ',')]
    patterns: Vec<String>,
    /// File with one stored bit pattern per line (alternative to --patterns).
    #[arg(long)]
    memory_file: Option<PathBuf>,
    /// Probe pattern.
    #[arg(long)]
    input: String,
    /// Control-qubit count d.
    #[arg(long, default_value_t = 2)]
    control_qubits: usize,
}

#[derive(Args)]
struct SuperpositionArgs {
    /// Dataset file; omit to use the built-in seeded XOR-style set.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Dataset file format.
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    format: DataFormat,
    /// CSV label column: a header name, or a 0-based index if numeric.
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Points in the built-in synthetic dataset.
    #[arg(long, default_value_t = 16)]
    points: usize,
    /// Fold count κ.
    #[arg(long, default_value_t = 2)]
    folds: usize,
    /// Hidden-layer width of the branch networks.
    #[arg(long, default_value_t = 1)]
    hidden: usize,
    /// Bits of precision per weight.
    #[arg(long, default_value_t = 1)]
    bits: usize,
    /// Weight count of the grid; defaults to the model's parameter count.
    #[arg(long)]
    weights: Option<usize>,
    /// Control-qubit count d.
    #[arg(long, default_value_t = 10)]
    control_qubits: usize,
    /// Ceiling on the enumerated branch count.
    #[arg(long, default_value_t = superposition::DEFAULT_BRANCH_CAP)]
    max_branches: u128,
    /// Seed for the synthetic dataset and the fold shuffle.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// A results.json written by `select`.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for the re-emitted CSVs.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        // Ignore failure: the global pool can only be set once (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let outcome = match cli.command {
        Command::Select(args) => cmd_select(&args),
        Command::Pqm(args) => cmd_pqm(&args),
        Command::Superposition(args) => cmd_superposition(&args),
        Command::Report(args) => cmd_report(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn parse_label_column(spec: &str) -> LabelColumn {
    match spec.parse::<usize>() {
        Ok(index) => LabelColumn::Index(index),
        Err(_) => LabelColumn::Name(spec.to_string()),
    }
}

fn load_dataset(path: &Path, format: DataFormat, label_column: &str) -> Result<Dataset> {
    let ds = match format {
        DataFormat::Proben1 => data::load_proben1(path)?,
        DataFormat::Csv => data::load_csv(path, &parse_label_column(label_column))?,
    };
    Ok(data::normalize(ds))
}

fn cmd_select(args: &SelectArgs) -> Result<()> {
    let dataset = load_dataset(&args.dataset, args.format, &args.label_column)?;
    let config = SelectionConfig {
        kappa: args.folds,
        seeds_per_fold: args.seeds_per_fold,
        control_qubits: args.control_qubits,
        hidden_min: args.hidden_min,
        hidden_max: args.hidden_max,
        mode: args.mode.into(),
        sample_repeats: args.sample_repeats,
        master_seed: args.seed,
        mlp: MlpConfig::default(),
    };
    let (chosen, results) = selection::select(&dataset, &config)?;
    let report = SelectionReport::new(config.clone(), chosen, results);

    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("results.csv"), report.results_csv())?;
    fs::write(args.out.join("distributions.csv"), report.distributions_csv())?;
    fs::write(args.out.join("results.json"), report.to_json())?;
    let manifest = RunManifest::for_run(
        "select",
        args.seed,
        Some(&args.dataset),
        serde_json::to_value(&config).expect("config serializes"),
    )?;
    fs::write(args.out.join("manifest.json"), manifest.to_json())?;

    println!("chosen hidden neurons: {chosen}");
    Ok(())
}

fn collect_patterns(args: &PqmInstance) -> Result<Vec<BitPattern>> {
    let mut patterns: Vec<BitPattern> = Vec::new();
    for raw in &args.patterns {
        let raw = raw.trim();
        if !raw.is_empty() {
            patterns.push(raw.parse()?);
        }
    }
    if let Some(path) = &args.memory_file {
        for line in fs::read_to_string(path)?.lines() {
            let line = line.trim();
            if !line.is_empty() {
                patterns.push(line.parse()?);
            }
        }
    }
    if patterns.is_empty() {
        return Err(Error::Argument(
            "no stored patterns given (use --patterns or --memory-file)".into(),
        ));
    }
    Ok(patterns)
}

fn print_distribution(dist: &RetrievalDistribution) {
    println!("K,probability");
    for (count, p) in dist.probs().iter().enumerate() {
        println!("{count},{p}");
    }
    println!("E(X) = {}", dist.expected_ones());
    println!("P(y<=1) = {}", dist.cumulative_le(1));
}

fn cmd_pqm(args: &PqmArgs) -> Result<()> {
    let (instance, which) = match &args.command {
        PqmCommand::Analytic(i) => (i, "analytic"),
        PqmCommand::Circuit(i) => (i, "circuit"),
        PqmCommand::Verify(i) => (i, "verify"),
    };
    let patterns = collect_patterns(instance)?;
    let input: BitPattern = instance.input.trim().parse()?;
    let d = instance.control_qubits;

    let analytic = || -> Result<RetrievalDistribution> {
        PqmMemory::from_patterns(patterns.clone())?.retrieve_analytic(&input, d)
    };
    let circuit = || -> Result<RetrievalDistribution> {
        let (state, layout) = pqm::store_circuit(&patterns)?;
        pqm::retrieve_circuit(state, &layout, &input, d)
    };

    match which {
        "analytic" => print_distribution(&analytic()?),
        "circuit" => print_distribution(&circuit()?),
        _ => {
            let a = analytic()?;
            let c = circuit()?;
            print_distribution(&a);
            println!("max-abs deviation = {:e}", c.max_abs_diff(&a));
        }
    }
    Ok(())
}

fn cmd_superposition(args: &SuperpositionArgs) -> Result<()> {
    let dataset = match &args.dataset {
        Some(path) => load_dataset(path, args.format, &args.label_column)?,
        None => data::synthetic_xor(args.points, args.seed),
    };
    let config = MlpConfig {
        hidden_neurons: args.hidden,
        ..MlpConfig::default()
    };
    let param_count = config.hidden_neurons * dataset.feature_count()
        + config.hidden_neurons
        + dataset.class_count * config.hidden_neurons
        + dataset.class_count;
    let weight_count = args.weights.unwrap_or(param_count);
    let grid = WeightGrid::new(args.bits, weight_count)?;

    let folds = make_folds(dataset.len(), args.folds, args.seed)?;
    let branches = superposition::run_all_branches(
        &dataset,
        &folds,
        &grid,
        args.folds,
        args.max_branches,
        &config,
    )?;
    println!("branches={}", branches.len());

    let dist = superposition::evaluate_superposition(&branches, args.control_qubits)?;
    print_distribution(&dist);

    let oracle = superposition::mixture_oracle(&branches, args.control_qubits)?;
    let deviation = dist
        .probs()
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("oracle deviation = {deviation:e}");
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)?;
    let report = SelectionReport::from_json(&text)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("results.csv"), report.results_csv())?;
    fs::write(args.out.join("distributions.csv"), report.distributions_csv())?;
    let manifest = RunManifest::for_run(
        "report",
        report.config.master_seed,
        Some(&args.input),
        serde_json::to_value(&report.config).expect("config serializes"),
    )?;
    fs::write(args.out.join("manifest.json"), manifest.to_json())?;
    println!("chosen hidden neurons: {}", report.chosen_hidden);
    Ok(())
}
