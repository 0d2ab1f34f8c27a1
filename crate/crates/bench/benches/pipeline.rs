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

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pqmselect_core::crossval::make_folds;
use pqmselect_core::data;
use pqmselect_core::mlp::{self, MlpConfig};
use pqmselect_core::pqm::{self, BitPattern, PqmMemory};

/// A memory shaped like one experiment's ensemble: 1000 performance
/// vectors of 69 bits with a realistic error spread.
fn ensemble_memory() -> PqmMemory {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = 69usize;
    let patterns = (0..1000).map(|_| {
        let errors = rng.random_range(0..6usize);
        let mut bits = vec![true; k];
        for _ in 0..errors {
            let i = rng.random_range(0..k);
            bits[i] = false;
        }
        BitPattern::from_bools(bits)
    });
    PqmMemory::from_patterns(patterns).unwrap()
}

fn bench_analytic_retrieval(c: &mut Criterion) {
    let memory = ensemble_memory();
    let probe = BitPattern::all_ones(69);
    c.bench_function("retrieve_analytic_1000x69_d100", |b| {
        b.iter(|| {
            black_box(memory.retrieve_analytic(black_box(&probe), 100).unwrap());
        })
    });
}

fn bench_circuit_backend(c: &mut Criterion) {
    let patterns: Vec<BitPattern> = ["0110", "1001", "1111", "0000"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let input: BitPattern = "0110".parse().unwrap();
    c.bench_function("store_and_retrieve_circuit_k4_n4_d3", |b| {
        b.iter(|| {
            let (state, layout) = pqm::store_circuit(black_box(&patterns)).unwrap();
            black_box(pqm::retrieve_circuit(state, &layout, &input, 3).unwrap());
        })
    });
}

fn bench_sampling(c: &mut Criterion) {
    let memory = ensemble_memory();
    let probe = BitPattern::all_ones(69);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    c.bench_function("sample_ones_d100", |b| {
        b.iter(|| black_box(memory.sample_ones(&probe, 100, &mut rng).unwrap()))
    });
}

fn bench_training(c: &mut Criterion) {
    let dataset = data::synthetic_xor(200, 3);
    let indices: Vec<usize> = (0..dataset.len()).collect();
    let config = MlpConfig {
        hidden_neurons: 10,
        max_iter: 10,
        ..MlpConfig::default()
    };
    c.bench_function("train_mlp_h10_200pts_10epochs", |b| {
        b.iter(|| {
            let view = dataset.view(&indices);
            let model = mlp::init_weights(&config, 2, 2, 7).unwrap();
            black_box(mlp::train(model, &view, &config, 11).unwrap());
        })
    });
}

fn bench_folding(c: &mut Criterion) {
    c.bench_function("make_folds_699x10", |b| {
        b.iter(|| black_box(make_folds(699, 10, 42).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_analytic_retrieval,
    bench_circuit_backend,
    bench_sampling,
    bench_training,
    bench_folding
);
criterion_main!(benches);
