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

//! Probabilistic quantum memory simulation and PQM-scored selection of
//! feedforward network architectures.
//!
//! The crate is organised around the pipeline the CLI drives:
//!
//! * [`statevector`] — exact dense simulator with the storage/retrieval
//!   gate set.
//! * [`pqm`] — the associative memory itself, with a circuit backend
//!   (oracle, small sizes) and a closed-form analytic backend (any size).
//! * [`mlp`], [`data`], [`crossval`] — a minimal adam-trained classifier,
//!   dataset loaders, and the κ-fold ensemble harness that produces
//!   per-fold performance bit-vectors.
//! * [`selection`] — scores each hidden-layer width by storing its
//!   ensemble's performance vectors in a memory and querying with the
//!   all-ones pattern.
//! * [`superposition`] — desk-scale exhaustive emulation of training every
//!   quantized initial-weight assignment in every fold branch at once.

pub mod crossval;
pub mod data;
pub mod error;
pub mod mlp;
pub mod pqm;
pub mod selection;
pub mod statevector;
pub mod superposition;

pub use crossval::{derive_seed, FoldAssignment, PerformanceVector};
pub use data::{Dataset, DatasetView};
pub use error::{Error, Result};
pub use mlp::{MlpConfig, MlpModel, TrainReport};
pub use pqm::{BitPattern, PqmMemory, RegisterLayout, RetrievalDistribution};
pub use selection::{ArchitectureResult, SelectionConfig, SelectionMode, SelectionReport};
pub use statevector::{StateVector, DEFAULT_QUBIT_CAP};
pub use superposition::{BranchState, WeightGrid};
