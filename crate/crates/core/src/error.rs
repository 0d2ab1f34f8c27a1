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

//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by the simulator, the trainers and the loaders.
#[derive(Debug, Error)]
pub enum Error {
    /// A requested resource exceeds a configured hard cap (qubit counts,
    /// enumeration branch counts).
    #[error("capacity exceeded: {what} {requested} exceeds cap {cap}")]
    Capacity {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    /// A caller-supplied value is malformed or inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A qubit index is outside the register.
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitIndex { index: usize, num_qubits: usize },

    /// The same qubit was named twice where distinct indices are required.
    #[error("duplicate qubit index {0}")]
    DuplicateIndex(usize),

    /// A dataset file could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Training could not proceed (empty or single-class view, ...).
    #[error("training error: {0}")]
    Training(String),

    /// A stored report is missing fields or was written by another version.
    #[error("report error: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that indicate bad caller input rather than a
    /// runtime/data failure. The CLI maps these to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Argument(_) | Error::QubitIndex { .. } | Error::DuplicateIndex(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
