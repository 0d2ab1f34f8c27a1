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

//! Desk-scale exhaustive emulation of superposed training: every
//! combination of test fold and quantized initial-weight assignment is one
//! branch, each branch trains deterministically on the remaining folds,
//! and the pooled performance vectors are scored through the memory
//! exactly as a single superposed query would be.
//!
//! Branch training is seedless — minibatch shuffling is disabled, so a
//! branch is a pure function of `(fold, weight code, data)` and the full
//! branch set can be evaluated in any order or in parallel.

use std::io::Write;

use rayon::prelude::*;

use crate::crossval::{self, FoldAssignment, PerformanceVector};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mlp::{self, MlpConfig, MlpModel};
use crate::pqm::{BitPattern, PqmMemory, RetrievalDistribution};

/// Default ceiling on the enumerated branch count.
pub const DEFAULT_BRANCH_CAP: u128 = 1 << 16;

/// Quantization grid for initial weights: each of `weight_count`
/// parameters is one of `2^bits_per_weight` evenly spaced levels on
/// `[low, high]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightGrid {
    pub bits_per_weight: usize,
    pub weight_count: usize,
    pub low: f64,
    pub high: f64,
}

impl WeightGrid {
    /// Grid over the default symmetric range `[-1, 1]`.
    pub fn new(bits_per_weight: usize, weight_count: usize) -> Result<Self> {
        Self::with_range(bits_per_weight, weight_count, -1.0, 1.0)
    }

    pub fn with_range(
        bits_per_weight: usize,
        weight_count: usize,
        low: f64,
        high: f64,
    ) -> Result<Self> {
        if bits_per_weight == 0 || weight_count == 0 {
            return Err(Error::Argument(
                "grid needs bits_per_weight >= 1 and weight_count >= 1".into(),
            ));
        }
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::Argument("grid range must be finite with low < high".into()));
        }
        Ok(WeightGrid {
            bits_per_weight,
            weight_count,
            low,
            high,
        })
    }

    /// Bits in one full weight-assignment code.
    pub fn code_bits(&self) -> usize {
        self.bits_per_weight * self.weight_count
    }

    /// The `2^bits_per_weight` levels, ascending. A level index `c` maps
    /// affinely: `low + (high - low) · c / (2^b - 1)`.
    pub fn levels(&self) -> Vec<f64> {
        let count = 1usize << self.bits_per_weight;
        let span = self.high - self.low;
        (0..count)
            .map(|c| self.low + span * c as f64 / (count - 1) as f64)
            .collect()
    }

    /// Decodes a code into `weight_count` parameter values. Weight `i`
    /// reads bits `i·b..(i+1)·b` of the code, most significant first.
    pub fn decode(&self, code: &BitPattern) -> Result<Vec<f64>> {
        if code.len() != self.code_bits() {
            return Err(Error::Argument(format!(
                "code length {} does not match grid code length {}",
                code.len(),
                self.code_bits()
            )));
        }
        let levels = self.levels();
        let b = self.bits_per_weight;
        Ok((0..self.weight_count)
            .map(|i| {
                let mut idx = 0usize;
                for bit in 0..b {
                    idx = (idx << 1) | usize::from(code.bit(i * b + bit));
                }
                levels[idx]
            })
            .collect())
    }
}

/// Enumerates every `(test fold, weight code)` branch, fold-major then
/// code-ascending (lexicographic over the code bit-strings).
///
/// Errors with the full count if `kappa · 2^(code bits)` exceeds `cap`.
pub fn enumerate_branches(
    grid: &WeightGrid,
    kappa: usize,
    cap: u128,
) -> Result<Vec<(usize, BitPattern)>> {
    if kappa == 0 {
        return Err(Error::Argument("kappa must be >= 1".into()));
    }
    let bits = grid.code_bits();
    if bits >= 64 {
        return Err(Error::Capacity {
            what: "branches",
            requested: u128::MAX,
            cap,
        });
    }
    let count = kappa as u128 * (1u128 << bits);
    if count > cap {
        return Err(Error::Capacity {
            what: "branches",
            requested: count,
            cap,
        });
    }
    let codes = 1u64 << bits;
    let mut out = Vec::with_capacity(count as usize);
    for fold in 0..kappa {
        for code in 0..codes {
            let pattern = BitPattern::from_bools(
                (0..bits).map(|i| code >> (bits - 1 - i) & 1 == 1).collect(),
            );
            out.push((fold, pattern));
        }
    }
    Ok(out)
}

/// One fully evaluated branch.
#[derive(Clone, Debug)]
pub struct BranchState {
    pub test_fold: usize,
    pub initial_code: BitPattern,
    pub trained_model: MlpModel,
    pub performance: PerformanceVector,
}

/// Trains one branch: the code decodes to the initial parameters, training
/// runs in fixed data order on every fold except `test_fold`, and the
/// performance vector is read off the test fold.
pub fn run_branch(
    test_fold: usize,
    code: &BitPattern,
    dataset: &Dataset,
    folds: &FoldAssignment,
    grid: &WeightGrid,
    config: &MlpConfig,
) -> Result<BranchState> {
    let params = grid.decode(code)?;
    let model = MlpModel::from_flat(
        dataset.feature_count(),
        config.hidden_neurons,
        dataset.class_count,
        &params,
    )?;
    let mut branch_config = config.clone();
    branch_config.shuffle = false;
    let training_indices = folds.training_indices(test_fold);
    let view = dataset.view(&training_indices);
    let (trained, _) = mlp::train(model, &view, &branch_config, 0)?;
    let performance =
        crossval::performance_vector(&trained, dataset, folds, test_fold, 0)?;
    Ok(BranchState {
        test_fold,
        initial_code: code.clone(),
        trained_model: trained,
        performance,
    })
}

/// Enumerates and runs every branch (in parallel; the output order is the
/// enumeration order regardless of thread count).
pub fn run_all_branches(
    dataset: &Dataset,
    folds: &FoldAssignment,
    grid: &WeightGrid,
    kappa: usize,
    cap: u128,
    config: &MlpConfig,
) -> Result<Vec<BranchState>> {
    let branches = enumerate_branches(grid, kappa, cap)?;
    branches
        .par_iter()
        .map(|(fold, code)| run_branch(*fold, code, dataset, folds, grid, config))
        .collect()
}

/// Scores the pooled branch performance vectors: every branch contributes
/// its vector with uniform weight, the memory is probed with the all-ones
/// pattern over `d` control qubits.
pub fn evaluate_superposition(
    branches: &[BranchState],
    d: usize,
) -> Result<RetrievalDistribution> {
    if branches.is_empty() {
        return Err(Error::Argument("no branches to evaluate".into()));
    }
    let memory =
        PqmMemory::from_patterns(branches.iter().map(|b| b.performance.to_pattern()))?;
    memory.retrieve_analytic(&BitPattern::all_ones(memory.k()), d)
}

/// Independent check of [`evaluate_superposition`]: the uniform mixture of
/// per-branch binomials `Binomial(d, sin²(π·e/(2k)))`, computed with an
/// elementary pmf recurrence instead of the log-space path.
pub fn mixture_oracle(branches: &[BranchState], d: usize) -> Result<Vec<f64>> {
    if branches.is_empty() {
        return Err(Error::Argument("no branches to evaluate".into()));
    }
    if d == 0 {
        return Err(Error::Argument("control qubit count d must be >= 1".into()));
    }
    let k = branches[0].performance.len();
    let mut probs = vec![0.0f64; d + 1];
    let weight = 1.0 / branches.len() as f64;
    for branch in branches {
        if branch.performance.len() != k {
            return Err(Error::Argument(
                "branches carry performance vectors of different lengths".into(),
            ));
        }
        let errors = k - branch.performance.ones();
        let p = (std::f64::consts::PI * errors as f64 / (2.0 * k as f64))
            .sin()
            .powi(2);
        for (count, pb) in binomial_pmf(d, p).into_iter().enumerate() {
            probs[count] += weight * pb;
        }
    }
    Ok(probs)
}

/// Binomial pmf via the ratio recurrence
/// `pmf(K+1) = pmf(K) · (d−K)/(K+1) · p/(1−p)`, anchored at whichever
/// endpoint keeps the intermediate values bounded. Anchor underflow caps
/// the usable range around d ≈ 1400; far below that for the toy branch
/// counts this oracle exists for.
fn binomial_pmf(d: usize, p: f64) -> Vec<f64> {
    let mut out = vec![0.0f64; d + 1];
    if p <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if p >= 1.0 {
        out[d] = 1.0;
        return out;
    }
    if p <= 0.5 {
        out[0] = (1.0 - p).powi(d as i32);
        let ratio = p / (1.0 - p);
        for count in 0..d {
            out[count + 1] = out[count] * ratio * (d - count) as f64 / (count + 1) as f64;
        }
    } else {
        out[d] = p.powi(d as i32);
        let ratio = (1.0 - p) / p;
        for count in (1..=d).rev() {
            out[count - 1] = out[count] * ratio * count as f64 / (d - count + 1) as f64;
        }
    }
    out
}

/// Writes branch results as `fold_id,code,bits` lines — the ensemble text
/// format with the weight code standing in for the seed column.
pub fn write_branch_vectors<W: Write>(mut writer: W, branches: &[BranchState]) -> Result<()> {
    for b in branches {
        writeln!(
            writer,
            "{},{},{}",
            b.test_fold,
            b.initial_code,
            b.performance.to_pattern()
        )?;
    }
    Ok(())
}
