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

//! Architecture scan: train a κ×seeds ensemble per hidden-layer width,
//! pool every network's performance bit-vector into one associative
//! memory, probe it with the all-ones pattern, and rank widths by how
//! little the control register lights up.
//!
//! Two scoring modes exist. `Expect` ranks by the exact mean `E(X)` of the
//! retrieval distribution and is fully deterministic; `Sample` draws the
//! measurement outcome(s) `n_N` like a physical run would. Lower is
//! better in both; exact ties go to the smaller hidden layer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::crossval::{self, derive_seed, PerformanceVector};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mlp::MlpConfig;
use crate::pqm::{BitPattern, PqmMemory, RetrievalDistribution};

/// Seed-stream tags; `u64::MAX`-adjacent so they cannot collide with
/// `(fold, replicate)` pairs.
const FOLD_STREAM: u64 = u64::MAX;
const SAMPLE_STREAM: u64 = u64::MAX - 1;

/// Scoring criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// Rank by the exact distribution mean `E(X)` (deterministic).
    Expect,
    /// Rank by measured 1s counts, averaged over `sample_repeats` draws.
    Sample,
}

/// Full configuration of one selection run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub kappa: usize,
    pub seeds_per_fold: usize,
    pub control_qubits: usize,
    pub hidden_min: usize,
    pub hidden_max: usize,
    pub mode: SelectionMode,
    /// Draws averaged per architecture in `Sample` mode.
    pub sample_repeats: usize,
    pub master_seed: u64,
    pub mlp: MlpConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            kappa: 10,
            seeds_per_fold: 100,
            control_qubits: 100,
            hidden_min: 1,
            hidden_max: 20,
            mode: SelectionMode::Expect,
            sample_repeats: 1,
            master_seed: 42,
            mlp: MlpConfig::default(),
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kappa < 2 {
            return Err(Error::Argument("kappa must be >= 2".into()));
        }
        if self.seeds_per_fold == 0 {
            return Err(Error::Argument("seeds_per_fold must be >= 1".into()));
        }
        if self.control_qubits == 0 {
            return Err(Error::Argument("control_qubits must be >= 1".into()));
        }
        if self.hidden_min == 0 || self.hidden_min > self.hidden_max {
            return Err(Error::Argument(format!(
                "hidden range {}..={} is empty or starts at zero",
                self.hidden_min, self.hidden_max
            )));
        }
        if self.sample_repeats == 0 {
            return Err(Error::Argument("sample_repeats must be >= 1".into()));
        }
        self.mlp.validate()
    }
}

/// Aggregate score of one hidden-layer width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureResult {
    pub hidden_neurons: usize,
    /// Mean fraction of correctly classified validation patterns over the
    /// whole ensemble.
    pub mean_accuracy: f64,
    /// Exact mean of the retrieval distribution.
    pub expected_ones: f64,
    /// Mean of the measured 1s counts (`Sample` mode only); an integer
    /// when `sample_repeats = 1`.
    pub sampled_ones: Option<f64>,
    /// `P(y <= 1)`, the probability of at most one control qubit firing.
    pub p_le_one: f64,
    /// Mean accuracy per fold (index = fold id), averaged over that
    /// fold's replicates. The memory pools every fold's vectors; this is
    /// the per-fold breakdown for analysis.
    pub fold_accuracies: Vec<f64>,
    /// Training invocations spent on this architecture.
    pub training_calls: usize,
    pub distribution: RetrievalDistribution,
}

/// Mean accuracy per fold id.
fn fold_accuracy_breakdown(vectors: &[PerformanceVector], kappa: usize) -> Vec<f64> {
    let mut totals = vec![0.0f64; kappa];
    let mut counts = vec![0usize; kappa];
    for v in vectors {
        totals[v.fold_id] += v.accuracy();
        counts[v.fold_id] += 1;
    }
    totals
        .iter()
        .zip(&counts)
        .map(|(t, &c)| if c == 0 { 0.0 } else { t / c as f64 })
        .collect()
}

/// Pools performance vectors into one memory, probes it with the all-ones
/// pattern, and returns `(mean accuracy, retrieval distribution)`.
pub fn score_performance_vectors(
    vectors: &[PerformanceVector],
    control_qubits: usize,
) -> Result<(f64, RetrievalDistribution)> {
    if vectors.is_empty() {
        return Err(Error::Argument("no performance vectors to score".into()));
    }
    let memory = PqmMemory::from_patterns(vectors.iter().map(|v| v.to_pattern()))?;
    let probe = BitPattern::all_ones(memory.k());
    let distribution = memory.retrieve_analytic(&probe, control_qubits)?;
    let mean_accuracy =
        vectors.iter().map(|v| v.accuracy()).sum::<f64>() / vectors.len() as f64;
    Ok((mean_accuracy, distribution))
}

/// Trains the full ensemble for one width and scores it.
///
/// Exactly `κ · seeds_per_fold` networks are trained (asserted by the
/// returned `training_calls`); the fold assignment depends only on
/// `(master_seed, kappa, N)`, so every width sees identical folds.
pub fn evaluate_architecture(
    dataset: &Dataset,
    hidden_neurons: usize,
    config: &SelectionConfig,
) -> Result<ArchitectureResult> {
    config.validate()?;
    let folds = crossval::make_folds(
        dataset.len(),
        config.kappa,
        derive_seed(config.master_seed, &[FOLD_STREAM]),
    )?;
    let mut mlp_config = config.mlp.clone();
    mlp_config.hidden_neurons = hidden_neurons;
    let (members, training_calls) = crossval::train_ensemble(
        dataset,
        &folds,
        &mlp_config,
        config.seeds_per_fold,
        config.master_seed,
    )?;
    let vectors: Vec<PerformanceVector> = members
        .iter()
        .map(|m| crossval::performance_vector(&m.model, dataset, &folds, m.fold_id, m.seed))
        .collect::<Result<_>>()?;

    let (mean_accuracy, distribution) =
        score_performance_vectors(&vectors, config.control_qubits)?;

    let sampled_ones = match config.mode {
        SelectionMode::Expect => None,
        SelectionMode::Sample => {
            let memory = PqmMemory::from_patterns(vectors.iter().map(|v| v.to_pattern()))?;
            let probe = BitPattern::all_ones(memory.k());
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.master_seed,
                &[SAMPLE_STREAM, hidden_neurons as u64],
            ));
            let mut total = 0u64;
            for _ in 0..config.sample_repeats {
                total += memory.sample_ones(&probe, config.control_qubits, &mut rng)?;
            }
            Some(total as f64 / config.sample_repeats as f64)
        }
    };

    Ok(ArchitectureResult {
        hidden_neurons,
        mean_accuracy,
        expected_ones: distribution.expected_ones(),
        sampled_ones,
        p_le_one: distribution.cumulative_le(1),
        fold_accuracies: fold_accuracy_breakdown(&vectors, config.kappa),
        training_calls,
        distribution,
    })
}

/// Scan criterion of one result under a mode.
fn criterion(result: &ArchitectureResult, mode: SelectionMode) -> Result<f64> {
    match mode {
        SelectionMode::Expect => Ok(result.expected_ones),
        SelectionMode::Sample => result.sampled_ones.ok_or_else(|| {
            Error::Argument("sample-mode selection needs sampled_ones values".into())
        }),
    }
}

/// Index of the winner: strictly minimal criterion, exact ties broken by
/// the smaller hidden count (results are scanned in ascending order).
pub fn pick_minimum(results: &[ArchitectureResult], mode: SelectionMode) -> Result<usize> {
    if results.is_empty() {
        return Err(Error::Argument("no architecture results to rank".into()));
    }
    let mut best = 0usize;
    let mut best_value = criterion(&results[0], mode)?;
    for (i, r) in results.iter().enumerate().skip(1) {
        let value = criterion(r, mode)?;
        if value < best_value {
            best = i;
            best_value = value;
        }
    }
    Ok(best)
}

/// Evaluates every width in the configured range and returns the chosen
/// width together with all results (ascending by hidden count).
pub fn select(dataset: &Dataset, config: &SelectionConfig) -> Result<(usize, Vec<ArchitectureResult>)> {
    config.validate()?;
    let mut results = Vec::with_capacity(config.hidden_max - config.hidden_min + 1);
    for hidden in config.hidden_min..=config.hidden_max {
        results.push(evaluate_architecture(dataset, hidden, config)?);
    }
    let winner = pick_minimum(&results, config.mode)?;
    Ok((results[winner].hidden_neurons, results))
}

/// Everything one run produces, in a reloadable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Crate version that wrote the report; reloading rejects mismatches.
    pub artifact_version: String,
    pub config: SelectionConfig,
    pub chosen_hidden: usize,
    pub results: Vec<ArchitectureResult>,
}

impl SelectionReport {
    pub fn new(config: SelectionConfig, chosen_hidden: usize, results: Vec<ArchitectureResult>) -> Self {
        SelectionReport {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            chosen_hidden,
            results,
        }
    }

    /// One row per architecture: `neurons,mean_accuracy,expected_ones,sampled_ones`.
    pub fn results_csv(&self) -> String {
        let mut out = String::from("neurons,mean_accuracy,expected_ones,sampled_ones\n");
        for r in &self.results {
            let sampled = r.sampled_ones.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.hidden_neurons, r.mean_accuracy, r.expected_ones, sampled
            ));
        }
        out
    }

    /// `d + 1` rows per architecture: `neurons,K,probability`.
    pub fn distributions_csv(&self) -> String {
        let mut out = String::from("neurons,K,probability\n");
        for r in &self.results {
            for (count, p) in r.distribution.probs().iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", r.hidden_neurons, count, p));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Reloads a stored report, rejecting files written by a different
    /// crate version.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: SelectionReport = serde_json::from_str(text)
            .map_err(|e| Error::Report(format!("cannot parse report JSON: {e}")))?;
        let current = env!("CARGO_PKG_VERSION");
        if report.artifact_version != current {
            return Err(Error::Report(format!(
                "report version {} does not match artifact version {current}",
                report.artifact_version
            )));
        }
        Ok(report)
    }
}
