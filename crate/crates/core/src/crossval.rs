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

//! κ-fold construction, per-fold ensemble training, and extraction of the
//! performance bit-vectors the memory stores.
//!
//! Determinism contract: every trained network's seed is a pure function
//! of `(master_seed, fold_id, replicate_index)` via [`derive_seed`], and
//! the ensemble list is ordered by `(fold_id, replicate_index)`, so serial
//! and parallel runs produce identical results.

use std::io::{BufRead, BufReader, Read, Write};
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mlp::{self, MlpConfig, MlpModel};
use crate::pqm::BitPattern;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable seed mixer: one splitmix64 round per component, folded into the
/// master seed. Identical on every platform, so distributing work over
/// threads cannot change any derived stream.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &p in parts {
        state = splitmix64(state ^ p);
    }
    state
}

/// Partition of `0..n` into κ equal folds plus the dropped remainder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    pub kappa: usize,
    pub fold_size: usize,
    pub fold_members: Vec<Vec<usize>>,
    /// The `n mod κ` shuffled indices that fit in no fold.
    pub dropped: Vec<usize>,
}

impl FoldAssignment {
    /// Training view for `fold_id`: every other fold's members, in fold
    /// order then position order. The dropped indices appear nowhere.
    pub fn training_indices(&self, fold_id: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.fold_size * (self.kappa - 1));
        for (f, members) in self.fold_members.iter().enumerate() {
            if f != fold_id {
                out.extend_from_slice(members);
            }
        }
        out
    }
}

/// Deals a seeded uniform shuffle of `0..n` into κ consecutive blocks of
/// `floor(n/κ)` indices; the remainder is dropped.
pub fn make_folds(n: usize, kappa: usize, seed: u64) -> Result<FoldAssignment> {
    if kappa < 2 {
        return Err(Error::Argument("fold count kappa must be >= 2".into()));
    }
    if kappa > n {
        return Err(Error::Argument(format!(
            "fold count {kappa} exceeds example count {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let fold_size = n / kappa;
    let fold_members = (0..kappa)
        .map(|f| order[f * fold_size..(f + 1) * fold_size].to_vec())
        .collect();
    Ok(FoldAssignment {
        kappa,
        fold_size,
        fold_members,
        dropped: order[kappa * fold_size..].to_vec(),
    })
}

/// One trained network of the ensemble.
#[derive(Clone, Debug)]
pub struct EnsembleMember {
    pub fold_id: usize,
    /// Task seed, `derive_seed(master, [fold_id, replicate])`.
    pub seed: u64,
    pub model: MlpModel,
}

/// Trains `κ · seeds_per_fold` networks: for every fold and replicate, a
/// fresh initialization trained on all other folds. Tasks fan out over
/// the rayon pool; the returned list is ordered by `(fold_id, replicate)`
/// regardless of thread count. The second return value counts actual
/// training invocations.
pub fn train_ensemble(
    dataset: &Dataset,
    folds: &FoldAssignment,
    config: &MlpConfig,
    seeds_per_fold: usize,
    master_seed: u64,
) -> Result<(Vec<EnsembleMember>, usize)> {
    if seeds_per_fold == 0 {
        return Err(Error::Argument("seeds_per_fold must be >= 1".into()));
    }
    config.validate()?;
    dataset.validate()?;

    let tasks: Vec<(usize, usize)> = (0..folds.kappa)
        .flat_map(|f| (0..seeds_per_fold).map(move |r| (f, r)))
        .collect();
    let training_calls = AtomicUsize::new(0);

    let members: Result<Vec<EnsembleMember>> = tasks
        .par_iter()
        .map(|&(fold_id, replicate)| {
            let task_seed = derive_seed(master_seed, &[fold_id as u64, replicate as u64]);
            let init_seed = derive_seed(task_seed, &[0]);
            let shuffle_seed = derive_seed(task_seed, &[1]);
            let train_view_indices = folds.training_indices(fold_id);
            let view = dataset.view(&train_view_indices);
            let model = mlp::init_weights(
                config,
                dataset.feature_count(),
                dataset.class_count,
                init_seed,
            )?;
            training_calls.fetch_add(1, Ordering::Relaxed);
            let (trained, _report) =
                mlp::train(model, &view, config, shuffle_seed).map_err(|e| {
                    Error::Training(format!(
                        "fold {fold_id}, seed {task_seed}: {e}"
                    ))
                })?;
            Ok(EnsembleMember {
                fold_id,
                seed: task_seed,
                model: trained,
            })
        })
        .collect();

    Ok((members?, training_calls.into_inner()))
}

/// Per-validation-pattern correctness bits of one trained network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerformanceVector {
    pub fold_id: usize,
    pub seed: u64,
    pub bits: Vec<bool>,
}

impl PerformanceVector {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Fraction of correctly classified fold members.
    pub fn accuracy(&self) -> f64 {
        self.ones() as f64 / self.bits.len() as f64
    }

    pub fn to_pattern(&self) -> BitPattern {
        BitPattern::from_bools(self.bits.clone())
    }
}

/// Evaluates `model` on the members of `fold_id`: bit `i` is 1 iff the
/// prediction for the fold's `i`-th member matches its label. `seed` is
/// carried through as the vector's identity.
pub fn performance_vector(
    model: &MlpModel,
    dataset: &Dataset,
    folds: &FoldAssignment,
    fold_id: usize,
    seed: u64,
) -> Result<PerformanceVector> {
    let members = folds
        .fold_members
        .get(fold_id)
        .ok_or_else(|| Error::Argument(format!("fold id {fold_id} outside {} folds", folds.kappa)))?;
    let mut bits = Vec::with_capacity(members.len());
    for &i in members {
        bits.push(model.predict(&dataset.features[i])? == dataset.labels[i]);
    }
    Ok(PerformanceVector {
        fold_id,
        seed,
        bits,
    })
}

/// Writes vectors as `fold_id,seed,bits` lines so a memory evaluation can
/// rerun without retraining.
pub fn write_performance_vectors<W: Write>(
    mut writer: W,
    vectors: &[PerformanceVector],
) -> Result<()> {
    for v in vectors {
        writeln!(writer, "{},{},{}", v.fold_id, v.seed, v.to_pattern())?;
    }
    Ok(())
}

/// Parses the format written by [`write_performance_vectors`].
pub fn read_performance_vectors<R: Read>(reader: R) -> Result<Vec<PerformanceVector>> {
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let fold_id: usize = fields
            .next()
            .ok_or_else(|| parse_err("missing fold_id".into()))?
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad fold_id: {e}")))?;
        let seed: u64 = fields
            .next()
            .ok_or_else(|| parse_err("missing seed".into()))?
            .trim()
            .parse()
            .map_err(|e| parse_err(format!("bad seed: {e}")))?;
        let bits_str = fields
            .next()
            .ok_or_else(|| parse_err("missing bits".into()))?
            .trim();
        if fields.next().is_some() {
            return Err(parse_err("too many fields".into()));
        }
        let pattern: BitPattern = bits_str
            .parse()
            .map_err(|e| parse_err(format!("bad bits: {e}")))?;
        out.push(PerformanceVector {
            fold_id,
            seed,
            bits: pattern.bits().to_vec(),
        });
    }
    Ok(out)
}
