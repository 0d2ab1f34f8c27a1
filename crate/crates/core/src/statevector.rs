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

//! Exact dense state-vector simulator.
//!
//! Holds all `2^q` complex amplitudes of a `q`-qubit register and applies
//! gates by direct amplitude manipulation, so every probability it reports
//! is exact up to `f64` round-off. The gate set is the one the associative
//! memory circuits need: `X`, `H`, multi-controlled `X`, the storage
//! rotation `CS^j` and the diagonal phase pair used during retrieval.
//!
//! # Conventions
//!
//! * Qubit 0 is the least significant bit of the basis index: basis state
//!   `|b⟩` lives at index `Σ_i b_i · 2^i`.
//! * Bit-strings map character `i` to qubit `i`, so `new_basis(2, "01")`
//!   puts qubit 0 in `|0⟩` and qubit 1 in `|1⟩` (index 2).
//! * States are capped at [`DEFAULT_QUBIT_CAP`] qubits unless a larger cap
//!   is passed explicitly; the cap exists to turn an accidental exponential
//!   blow-up into an error instead of an OOM.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Default upper bound on the register size (16 M amplitudes, 256 MiB).
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Dense vector of `2^q` complex amplitudes.
#[derive(Clone, Debug)]
pub struct StateVector {
    num_qubits: usize,
    cap: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Basis state `|bits⟩` with the default qubit cap.
    ///
    /// `bits` must contain exactly `num_qubits` characters from `{'0','1'}`;
    /// character `i` is the value of qubit `i`.
    pub fn new_basis(num_qubits: usize, bits: &str) -> Result<Self> {
        Self::new_basis_with_cap(num_qubits, bits, DEFAULT_QUBIT_CAP)
    }

    /// Basis state with an explicit qubit cap.
    pub fn new_basis_with_cap(num_qubits: usize, bits: &str, cap: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::Argument("state needs at least one qubit".into()));
        }
        if num_qubits > cap {
            return Err(Error::Capacity {
                what: "qubits",
                requested: num_qubits as u128,
                cap: cap as u128,
            });
        }
        if bits.len() != num_qubits {
            return Err(Error::Argument(format!(
                "bit-string length {} does not match qubit count {}",
                bits.len(),
                num_qubits
            )));
        }
        let mut index = 0usize;
        for (i, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => index |= 1 << i,
                other => {
                    return Err(Error::Argument(format!(
                        "bit-string may only contain 0/1, found {other:?}"
                    )))
                }
            }
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            cap,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Σ|amplitude|² over the whole register.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Appends `extra` fresh qubits, each in `|0⟩`, above the current
    /// register (they become the new most significant qubits).
    pub fn append_qubits(&mut self, extra: usize) -> Result<()> {
        let total = self.num_qubits + extra;
        if total > self.cap {
            return Err(Error::Capacity {
                what: "qubits",
                requested: total as u128,
                cap: self.cap as u128,
            });
        }
        self.amps.resize(1 << total, Complex64::new(0.0, 0.0));
        self.num_qubits = total;
        Ok(())
    }

    fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.num_qubits {
            return Err(Error::QubitIndex {
                index: target,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_distinct(&self, indices: &[usize]) -> Result<()> {
        for (i, &a) in indices.iter().enumerate() {
            self.check_target(a)?;
            if indices[i + 1..].contains(&a) {
                return Err(Error::DuplicateIndex(a));
            }
        }
        Ok(())
    }

    /// Pauli X on `target`.
    pub fn apply_x(&mut self, target: usize) -> Result<()> {
        self.check_target(target)?;
        let step = 1 << target;
        for base in (0..self.amps.len()).step_by(2 * step) {
            for offset in 0..step {
                self.amps.swap(base + offset, base + offset + step);
            }
        }
        Ok(())
    }

    /// Hadamard on `target`.
    pub fn apply_h(&mut self, target: usize) -> Result<()> {
        self.check_target(target)?;
        let f = std::f64::consts::FRAC_1_SQRT_2;
        let step = 1 << target;
        for base in (0..self.amps.len()).step_by(2 * step) {
            for offset in 0..step {
                let i = base + offset;
                let j = i + step;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = f * (a + b);
                self.amps[j] = f * (a - b);
            }
        }
        Ok(())
    }

    /// Controlled X.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.apply_mcx(&[control], target)
    }

    /// Doubly controlled X.
    pub fn apply_toffoli(&mut self, control_a: usize, control_b: usize, target: usize) -> Result<()> {
        self.apply_mcx(&[control_a, control_b], target)
    }

    /// X on `target` conditioned on every qubit in `controls` being `|1⟩`.
    /// An empty control set degenerates to a plain X.
    pub fn apply_mcx(&mut self, controls: &[usize], target: usize) -> Result<()> {
        let mut all = controls.to_vec();
        all.push(target);
        self.check_distinct(&all)?;
        let mut mask = 0usize;
        for &c in controls {
            mask |= 1 << c;
        }
        let tbit = 1 << target;
        for i in 0..self.amps.len() {
            if i & mask == mask && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
        Ok(())
    }

    /// Storage rotation of the memory write circuit: on the `control = |1⟩`
    /// subspace the target pair `(|0⟩, |1⟩)` is rotated by
    ///
    /// ```text
    /// [  sqrt((j-1)/j)   1/sqrt(j) ]
    /// [ -1/sqrt(j)       sqrt((j-1)/j) ]
    /// ```
    ///
    /// `j = 1` degenerates to `[[0, 1], [-1, 0]]`, which moves the whole
    /// remaining amplitude out of the processing branch.
    pub fn apply_cs(&mut self, control: usize, target: usize, j: u64) -> Result<()> {
        self.apply_cs_block(control, target, j, false)
    }

    /// Inverse of [`Self::apply_cs`] (transpose of the rotation block).
    pub fn apply_cs_inv(&mut self, control: usize, target: usize, j: u64) -> Result<()> {
        self.apply_cs_block(control, target, j, true)
    }

    fn apply_cs_block(&mut self, control: usize, target: usize, j: u64, inverse: bool) -> Result<()> {
        self.check_distinct(&[control, target])?;
        if j == 0 {
            return Err(Error::Argument("CS gate parameter j must be >= 1".into()));
        }
        let c = ((j - 1) as f64 / j as f64).sqrt();
        let s = 1.0 / (j as f64).sqrt();
        let s = if inverse { -s } else { s };
        let cbit = 1 << control;
        let tbit = 1 << target;
        for i in 0..self.amps.len() {
            if i & cbit == cbit && i & tbit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | tbit];
                self.amps[i] = c * a0 + s * a1;
                self.amps[i | tbit] = -s * a0 + c * a1;
            }
        }
        Ok(())
    }

    /// Diagonal gate `diag(e^{iθ}, 1)` on `target`.
    ///
    /// The phase sits on the `|0⟩` component, matching the orientation of
    /// the retrieval phase operator; `θ = 0` is the identity.
    pub fn apply_phase(&mut self, target: usize, theta: f64) -> Result<()> {
        self.check_target(target)?;
        let phase = Complex64::from_polar(1.0, theta);
        let tbit = 1 << target;
        for i in 0..self.amps.len() {
            if i & tbit == 0 {
                self.amps[i] *= phase;
            }
        }
        Ok(())
    }

    /// [`Self::apply_phase`] conditioned on `control = |1⟩`.
    pub fn apply_cphase(&mut self, control: usize, target: usize, theta: f64) -> Result<()> {
        self.check_distinct(&[control, target])?;
        let phase = Complex64::from_polar(1.0, theta);
        let cbit = 1 << control;
        let tbit = 1 << target;
        for i in 0..self.amps.len() {
            if i & cbit == cbit && i & tbit == 0 {
                self.amps[i] *= phase;
            }
        }
        Ok(())
    }

    /// Exact joint distribution of the listed qubits.
    ///
    /// Entry `t` of the returned table is the probability of the outcome
    /// whose bit `i` (of `t`) is the value of `qubits[i]`. The table has
    /// `2^qubits.len()` entries and sums to 1 up to round-off. No sampling
    /// is involved.
    pub fn exact_marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_distinct(qubits)?;
        let mut table = vec![0.0f64; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut t = 0usize;
            for (bit, &q) in qubits.iter().enumerate() {
                if i >> q & 1 == 1 {
                    t |= 1 << bit;
                }
            }
            table[t] += p;
        }
        Ok(table)
    }

    /// Projective measurement of the listed qubits in the computational
    /// basis. The outcome is drawn from [`Self::exact_marginal`], the state is
    /// collapsed and renormalized, and the observed bits are returned in
    /// the order of `qubits`. Zero-probability outcomes are never drawn.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubits: &[usize], rng: &mut R) -> Result<Vec<bool>> {
        let table = self.exact_marginal(qubits)?;
        let u: f64 = rng.random();
        let mut outcome = table.len() - 1;
        let mut acc = 0.0;
        for (t, &p) in table.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            if u < acc {
                outcome = t;
                break;
            }
        }
        // u may land past the accumulated total by round-off; fall back to
        // the last outcome with support.
        if table[outcome] <= 0.0 {
            outcome = table
                .iter()
                .rposition(|&p| p > 0.0)
                .expect("state has zero norm");
        }

        let mut mask = 0usize;
        let mut want = 0usize;
        for (bit, &q) in qubits.iter().enumerate() {
            mask |= 1 << q;
            if outcome >> bit & 1 == 1 {
                want |= 1 << q;
            }
        }
        let mut norm = 0.0f64;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == want {
                norm += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        let scale = 1.0 / norm.sqrt();
        for a in &mut self.amps {
            *a *= scale;
        }
        Ok((0..qubits.len()).map(|bit| outcome >> bit & 1 == 1).collect())
    }
}
