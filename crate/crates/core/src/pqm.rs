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

//! Probabilistic quantum memory with two interchangeable backends.
//!
//! The memory stores `n` binary patterns of `k` bits in uniform
//! superposition. Probing it with an input pattern and reading `d` control
//! qubits yields a count of 1s whose distribution is a Hamming-distance
//! weighted mixture of binomials: pattern `j` at distance `d_H` from the
//! probe contributes `Binomial(d, sin²(π·d_H/(2k)))` with weight `1/n`.
//!
//! * [`store_circuit`] / [`retrieve_circuit`] run the actual storage and
//!   retrieval circuits on a [`StateVector`] and read the control-register
//!   statistics exactly. They scale exponentially and serve as the oracle
//!   for small instances.
//! * [`PqmMemory::retrieve_analytic`] evaluates the closed form directly,
//!   in log space, so it handles any size and tail probabilities down to
//!   the smallest representable doubles.
//!
//! A retrieval consumes the circuit-backend state (the superposition must
//! be rebuilt before it can be probed again), which is why
//! [`retrieve_circuit`] takes its state by value.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::StateVector;

/// Fixed-length binary pattern; bit `j` of a stored pattern maps to memory
/// qubit `j` in the circuit backend.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitPattern {
    bits: Vec<bool>,
}

impl BitPattern {
    pub fn from_bools(bits: Vec<bool>) -> Self {
        BitPattern { bits }
    }

    /// Pattern of `k` ones (the 100%-performance probe).
    pub fn all_ones(k: usize) -> Self {
        BitPattern { bits: vec![true; k] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        BitPattern {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

impl FromStr for BitPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::Argument(format!(
                        "bit pattern may only contain 0/1, found {other:?}"
                    )))
                }
            }
        }
        if bits.is_empty() {
            return Err(Error::Argument("bit pattern must be non-empty".into()));
        }
        Ok(BitPattern { bits })
    }
}

impl fmt::Display for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Number of positions in which `a` and `b` differ.
pub fn hamming(a: &BitPattern, b: &BitPattern) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "hamming distance needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count())
}

/// Stored patterns with multiplicities; the analytic memory backend.
///
/// Multiplicities model repeated patterns (identical performance vectors
/// from different trained networks): a pattern stored `m` times carries
/// weight `m/n` in every retrieval statistic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PqmMemory {
    k: usize,
    entries: Vec<(BitPattern, u64)>,
    total: u64,
}

impl PqmMemory {
    /// Builds a memory from a pattern list, aggregating duplicates into
    /// multiplicities. All patterns must share one length.
    pub fn from_patterns<I>(patterns: I) -> Result<Self>
    where
        I: IntoIterator<Item = BitPattern>,
    {
        let mut counts: BTreeMap<BitPattern, u64> = BTreeMap::new();
        let mut k = None;
        for p in patterns {
            match k {
                None => k = Some(p.len()),
                Some(len) if len != p.len() => {
                    return Err(Error::Argument(format!(
                        "pattern length {} does not match memory length {len}",
                        p.len()
                    )))
                }
                _ => {}
            }
            *counts.entry(p).or_insert(0) += 1;
        }
        let k = k.ok_or_else(|| Error::Argument("memory needs at least one pattern".into()))?;
        let entries: Vec<_> = counts.into_iter().collect();
        let total = entries.iter().map(|(_, m)| m).sum();
        Ok(PqmMemory { k, entries, total })
    }

    /// Builds a memory from explicit `(pattern, multiplicity)` entries.
    /// Equal patterns merge; multiplicities must be positive.
    pub fn with_counts(entries: Vec<(BitPattern, u64)>) -> Result<Self> {
        let mut counts: BTreeMap<BitPattern, u64> = BTreeMap::new();
        let mut k = None;
        for (p, m) in entries {
            if m == 0 {
                return Err(Error::Argument("multiplicities must be positive".into()));
            }
            match k {
                None => k = Some(p.len()),
                Some(len) if len != p.len() => {
                    return Err(Error::Argument(format!(
                        "pattern length {} does not match memory length {len}",
                        p.len()
                    )))
                }
                _ => {}
            }
            *counts.entry(p).or_insert(0) += m;
        }
        let k = k.ok_or_else(|| Error::Argument("memory needs at least one pattern".into()))?;
        let entries: Vec<_> = counts.into_iter().collect();
        let total = entries.iter().map(|(_, m)| m).sum();
        Ok(PqmMemory { k, entries, total })
    }

    /// Pattern length `k`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Total stored count `n` (multiplicities included).
    pub fn total_count(&self) -> u64 {
        self.total
    }

    /// Distinct patterns with their multiplicities, in lexicographic order.
    pub fn entries(&self) -> &[(BitPattern, u64)] {
        &self.entries
    }

    /// Closed-form distribution of the number of 1s across `d` control
    /// qubits when the memory is probed with `input`.
    ///
    /// Each term is accumulated in log space with exact log-binomial
    /// coefficients and exponentiated at the end, so tail probabilities
    /// remain representable far below anything the circuit backend could
    /// resolve. Exact-match (`d_H = 0`) and full-mismatch (`d_H = k`)
    /// patterns short-circuit to their limit bins instead of evaluating
    /// `log(0)`.
    pub fn retrieve_analytic(&self, input: &BitPattern, d: usize) -> Result<RetrievalDistribution> {
        if d == 0 {
            return Err(Error::Argument("control qubit count d must be >= 1".into()));
        }
        if input.len() != self.k {
            return Err(Error::Argument(format!(
                "input length {} does not match memory length {}",
                input.len(),
                self.k
            )));
        }
        let ln_fact = ln_factorials(d);
        let n = self.total as f64;
        let mut probs = vec![0.0f64; d + 1];
        for (pattern, mult) in &self.entries {
            let w = *mult as f64 / n;
            let dh = hamming(input, pattern)?;
            if dh == 0 {
                probs[0] += w;
                continue;
            }
            if dh == self.k {
                probs[d] += w;
                continue;
            }
            let theta = PI * dh as f64 / (2.0 * self.k as f64);
            let ln_cos = theta.cos().ln();
            let ln_sin = theta.sin().ln();
            for count in 0..=d {
                let ln_choose = ln_fact[d] - ln_fact[count] - ln_fact[d - count];
                let ln_p = ln_choose
                    + 2.0 * (d - count) as f64 * ln_cos
                    + 2.0 * count as f64 * ln_sin;
                probs[count] += w * ln_p.exp();
            }
        }
        Ok(RetrievalDistribution { probs })
    }

    /// Mean of the retrieval distribution computed without expanding it:
    /// `(d/n) Σ_j mult_j · sin²(π·d_H_j/(2k))`.
    pub fn expected_ones_closed_form(&self, input: &BitPattern, d: usize) -> Result<f64> {
        if d == 0 {
            return Err(Error::Argument("control qubit count d must be >= 1".into()));
        }
        if input.len() != self.k {
            return Err(Error::Argument(format!(
                "input length {} does not match memory length {}",
                input.len(),
                self.k
            )));
        }
        let n = self.total as f64;
        let mut acc = 0.0;
        for (pattern, mult) in &self.entries {
            let dh = hamming(input, pattern)?;
            let s = (PI * dh as f64 / (2.0 * self.k as f64)).sin();
            acc += *mult as f64 / n * s * s;
        }
        Ok(d as f64 * acc)
    }

    /// One draw of the control-register 1s count.
    ///
    /// Implemented as the equivalent two-stage mixture draw: pick a stored
    /// pattern with probability `mult/n`, then sample
    /// `Binomial(d, sin²(π·d_H/(2k)))`. A physical memory is single-use;
    /// the circuit backend reflects that by consuming its state, while this
    /// analytic draw can simply be repeated.
    pub fn sample_ones<R: Rng + ?Sized>(
        &self,
        input: &BitPattern,
        d: usize,
        rng: &mut R,
    ) -> Result<u64> {
        if d == 0 {
            return Err(Error::Argument("control qubit count d must be >= 1".into()));
        }
        if input.len() != self.k {
            return Err(Error::Argument(format!(
                "input length {} does not match memory length {}",
                input.len(),
                self.k
            )));
        }
        let pick = rng.random_range(0..self.total);
        let mut acc = 0u64;
        let mut chosen = &self.entries[self.entries.len() - 1].0;
        for (pattern, mult) in &self.entries {
            acc += mult;
            if pick < acc {
                chosen = pattern;
                break;
            }
        }
        let dh = hamming(input, chosen)?;
        if dh == 0 {
            return Ok(0);
        }
        if dh == self.k {
            return Ok(d as u64);
        }
        let s = (PI * dh as f64 / (2.0 * self.k as f64)).sin();
        let binom = Binomial::new(d as u64, s * s)
            .map_err(|e| Error::Argument(format!("binomial parameters: {e}")))?;
        Ok(binom.sample(rng))
    }
}

/// Distribution over the number of 1s observed on the `d` control qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetrievalDistribution {
    probs: Vec<f64>,
}

impl RetrievalDistribution {
    /// Wraps a raw probability table; index `K` is `P(y = K)`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Argument(
                "distribution needs at least d+1 = 2 entries".into(),
            ));
        }
        Ok(RetrievalDistribution { probs })
    }

    /// Control qubit count `d`.
    pub fn d(&self) -> usize {
        self.probs.len() - 1
    }

    /// `P(y = K)` for `K = 0..=d`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mean number of 1s, `Σ K·P(y = K)`.
    pub fn expected_ones(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(count, p)| count as f64 * p)
            .sum()
    }

    /// `P(y <= K)`.
    pub fn cumulative_le(&self, count: usize) -> f64 {
        self.probs.iter().take(count + 1).sum()
    }

    /// Largest absolute per-bin difference to another distribution.
    pub fn max_abs_diff(&self, other: &RetrievalDistribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold((self.probs.len() as i64 - other.probs.len() as i64).abs() as f64, f64::max)
    }

    /// Checks non-negativity and unit total within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for (count, &p) in self.probs.iter().enumerate() {
            if !(0.0..=1.0 + tol).contains(&p) {
                return Err(Error::Argument(format!(
                    "probability {p} at K={count} outside [0,1]"
                )));
            }
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::Argument(format!(
                "distribution sums to {total}, not 1"
            )));
        }
        Ok(())
    }
}

/// Qubit ranges of the storage/retrieval registers inside one state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    /// Probe/pattern register (`k` qubits).
    pub input: Range<usize>,
    /// The two storage utility qubits `u1`, `u2`.
    pub utility: Range<usize>,
    /// Memory register (`k` qubits).
    pub memory: Range<usize>,
    /// Control register; empty until a retrieval appends it.
    pub control: Range<usize>,
}

/// Runs the storage circuit and returns the resulting state plus its
/// register layout.
///
/// One iteration per pattern: the pattern is copied into the memory
/// register on the still-processing branch (`u2 = 1`), the match flag is
/// computed into `u1`, the `CS^{n+1-iter}` rotation peels amplitude
/// `1/sqrt(n)` off into the stored branch, and the scratch work is
/// uncomputed. After the last iteration the memory register's reduced
/// state is the uniform superposition of the stored patterns; the input
/// register is cleared back to `|0...0⟩` and both utility qubits end in
/// `|0⟩` (the `|01⟩` processing convention is restored between iterations,
/// and the processing branch carries no amplitude once every pattern is
/// in).
///
/// Duplicate patterns are accepted, but the uniform-superposition
/// postcondition is only guaranteed for distinct patterns: a stored copy
/// of the pattern currently being written also raises the match flag and
/// leaks amplitude back into the processing branch. Multiplicities belong
/// to the analytic backend.
pub fn store_circuit(patterns: &[BitPattern]) -> Result<(StateVector, RegisterLayout)> {
    if patterns.is_empty() {
        return Err(Error::Argument("cannot store an empty pattern list".into()));
    }
    let k = patterns[0].len();
    for p in patterns {
        if p.len() != k {
            return Err(Error::Argument(format!(
                "pattern length {} does not match first pattern length {k}",
                p.len()
            )));
        }
    }
    let n = patterns.len();
    let layout = RegisterLayout {
        input: 0..k,
        utility: k..k + 2,
        memory: k + 2..2 * k + 2,
    control: 2 * k + 2..2 * k + 2,
    };
    let u1 = k;
    let u2 = k + 1;
    let mem = |j: usize| k + 2 + j;

    // |p^1; 01; 0...0⟩
    let mut bits = String::with_capacity(2 * k + 2);
    for j in 0..k {
        bits.push(if patterns[0].bit(j) { '1' } else { '0' });
    }
    bits.push('0');
    bits.push('1');
    bits.extend(std::iter::repeat_n('0', k));
    let mut state = StateVector::new_basis(2 * k + 2, &bits)?;

    let memory_qubits: Vec<usize> = (0..k).map(mem).collect();
    for iter in 0..n {
        if iter > 0 {
            // Load the next pattern into the (basis-state) input register.
            for j in 0..k {
                if patterns[iter - 1].bit(j) != patterns[iter].bit(j) {
                    state.apply_x(j)?;
                }
            }
        }
        // Copy the pattern into memory on the processing branch.
        for j in 0..k {
            state.apply_toffoli(j, u2, mem(j))?;
        }
        // XNOR: memory qubit j becomes 1 iff it agrees with the input.
        for j in 0..k {
            state.apply_cnot(j, mem(j))?;
            state.apply_x(mem(j))?;
        }
        // Match flag, split, unflag.
        state.apply_mcx(&memory_qubits, u1)?;
        state.apply_cs(u1, u2, (n - iter) as u64)?;
        state.apply_mcx(&memory_qubits, u1)?;
        // Uncompute the XNOR and the copy.
        for j in (0..k).rev() {
            state.apply_x(mem(j))?;
            state.apply_cnot(j, mem(j))?;
        }
        for j in (0..k).rev() {
            state.apply_toffoli(j, u2, mem(j))?;
        }
    }
    // Clear the input register for the retrieval stage.
    for j in 0..k {
        if patterns[n - 1].bit(j) {
            state.apply_x(j)?;
        }
    }
    Ok((state, layout))
}

/// Runs the retrieval circuit against a stored state and returns the exact
/// distribution of 1s over `d` freshly appended control qubits.
///
/// The state is consumed: a stored memory supports a single retrieval, and
/// a repeat query requires running [`store_circuit`] again. Expects the
/// input register cleared to `|0...0⟩`, as `store_circuit` leaves it.
///
/// Per control qubit: Hadamard, XNOR of the probe into the memory register,
/// the `diag(e^{iπ/(2k)}, 1)` phase on every memory qubit followed by its
/// controlled `-π/k` counterpart, then the XNOR and Hadamard are undone.
/// The control statistics are read with an exact marginal, so no sampling
/// noise enters the comparison against the analytic backend.
pub fn retrieve_circuit(
    mut state: StateVector,
    layout: &RegisterLayout,
    input: &BitPattern,
    d: usize,
) -> Result<RetrievalDistribution> {
    let k = layout.memory.len();
    if input.len() != k {
        return Err(Error::Argument(format!(
            "input length {} does not match memory length {k}",
            input.len()
        )));
    }
    if d == 0 {
        return Err(Error::Argument("control qubit count d must be >= 1".into()));
    }
    let base = state.num_qubits();
    state.append_qubits(d)?;

    for j in 0..k {
        if input.bit(j) {
            state.apply_x(layout.input.start + j)?;
        }
    }
    let theta = PI / (2.0 * k as f64);
    for l in 0..d {
        let control = base + l;
        state.apply_h(control)?;
        for j in 0..k {
            state.apply_cnot(layout.input.start + j, layout.memory.start + j)?;
            state.apply_x(layout.memory.start + j)?;
        }
        // Phase layer: V on every memory qubit, then the controlled V^{-2}.
        for j in 0..k {
            state.apply_phase(layout.memory.start + j, theta)?;
        }
        for j in 0..k {
            state.apply_cphase(control, layout.memory.start + j, -2.0 * theta)?;
        }
        for j in (0..k).rev() {
            state.apply_x(layout.memory.start + j)?;
            state.apply_cnot(layout.input.start + j, layout.memory.start + j)?;
        }
        state.apply_h(control)?;
    }

    let controls: Vec<usize> = (base..base + d).collect();
    let table = state.exact_marginal(&controls)?;
    let mut probs = vec![0.0f64; d + 1];
    for (outcome, p) in table.into_iter().enumerate() {
        probs[outcome.count_ones() as usize] += p;
    }
    Ok(RetrievalDistribution { probs })
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = vec![0.0f64; n + 1];
    for i in 1..=n {
        table[i] = table[i - 1] + (i as f64).ln();
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pat(s: &str) -> BitPattern {
        s.parse().unwrap()
    }

    fn memory(patterns: &[&str]) -> PqmMemory {
        PqmMemory::from_patterns(patterns.iter().map(|s| pat(s))).unwrap()
    }

    /// Basis index of `pattern` placed in the register starting at `offset`.
    fn pattern_index(pattern: &BitPattern, offset: usize) -> usize {
        let mut idx = 0usize;
        for j in 0..pattern.len() {
            if pattern.bit(j) {
                idx |= 1 << (offset + j);
            }
        }
        idx
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&pat("0101"), &pat("0101")).unwrap(), 0);
        assert_eq!(hamming(&pat("00"), &pat("11")).unwrap(), 2);
        assert_eq!(hamming(&pat("0110"), &pat("1110")).unwrap(), 1);
        assert!(hamming(&pat("01"), &pat("011")).is_err());
    }

    #[test]
    fn pattern_parsing() {
        assert!("0x1".parse::<BitPattern>().is_err());
        assert!("".parse::<BitPattern>().is_err());
        assert_eq!(pat("0110").to_string(), "0110");
        assert_eq!(BitPattern::all_ones(3), pat("111"));
        assert_eq!(pat("010").complement(), pat("101"));
    }

    #[test]
    fn duplicates_aggregate_into_multiplicities() {
        let m = PqmMemory::from_patterns(vec![pat("01"), pat("10"), pat("01")]).unwrap();
        assert_eq!(m.total_count(), 3);
        assert_eq!(m.entries(), &[(pat("01"), 2), (pat("10"), 1)]);

        let m2 = PqmMemory::with_counts(vec![(pat("01"), 2), (pat("10"), 1)]).unwrap();
        assert_eq!(m, m2);
        assert!(PqmMemory::with_counts(vec![(pat("01"), 0)]).is_err());
    }

    #[test]
    fn store_two_patterns_gives_uniform_memory() {
        let (state, layout) = store_circuit(&[pat("01"), pat("10")]).unwrap();
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let idx01 = pattern_index(&pat("01"), layout.memory.start);
        let idx10 = pattern_index(&pat("10"), layout.memory.start);
        for (i, a) in state.amplitudes().iter().enumerate() {
            let expected = if i == idx01 || i == idx10 { amp } else { 0.0 };
            assert!(
                (a.re - expected).abs() < 1e-10 && a.im.abs() < 1e-10,
                "index {i}: amplitude {a}"
            );
        }
    }

    #[test]
    fn store_single_pattern_is_exact() {
        let (state, layout) = store_circuit(&[pat("0")]).unwrap();
        let marginal = state
            .exact_marginal(&layout.memory.clone().collect::<Vec<_>>())
            .unwrap();
        assert_eq!(marginal[0], 1.0);
    }

    #[test]
    fn store_four_random_patterns_matches_direct_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            // Four distinct random 3-bit patterns.
            let mut picks: Vec<usize> = (0..8).collect();
            for i in (1..picks.len()).rev() {
                let j = rng.random_range(0..=i);
                picks.swap(i, j);
            }
            let patterns: Vec<BitPattern> = picks[..4]
                .iter()
                .map(|&v| BitPattern::from_bools((0..3).map(|j| v >> j & 1 == 1).collect()))
                .collect();
            let (state, layout) = store_circuit(&patterns).unwrap();

            // Direct construction of the target superposition amplitudes.
            let mut expected = vec![0.0f64; state.amplitudes().len()];
            for p in &patterns {
                expected[pattern_index(p, layout.memory.start)] = 0.5;
            }
            for (i, a) in state.amplitudes().iter().enumerate() {
                assert!(
                    (a.re - expected[i]).abs() < 1e-10 && a.im.abs() < 1e-12,
                    "index {i}: {a} vs {}",
                    expected[i]
                );
            }
        }
    }

    #[test]
    fn store_rejects_bad_input() {
        assert!(store_circuit(&[]).is_err());
        assert!(store_circuit(&[pat("01"), pat("011")]).is_err());
    }

    #[test]
    fn retrieval_point_masses() {
        // Probe equal to the single stored pattern: all control qubits 0.
        let (state, layout) = store_circuit(&[pat("011")]).unwrap();
        let dist = retrieve_circuit(state, &layout, &pat("011"), 2).unwrap();
        assert!((dist.probs()[0] - 1.0).abs() < 1e-10);

        // Probe equal to the complement: all control qubits 1.
        let (state, layout) = store_circuit(&[pat("011")]).unwrap();
        let dist = retrieve_circuit(state, &layout, &pat("100"), 2).unwrap();
        assert!((dist.probs()[2] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn retrieval_two_pattern_example() {
        let (state, layout) = store_circuit(&[pat("00"), pat("11")]).unwrap();
        let dist = retrieve_circuit(state, &layout, &pat("00"), 2).unwrap();
        // Hand evaluation: the matching pattern contributes a point mass at
        // 0, the complement a point mass at 2, each with weight 1/2.
        assert!((dist.probs()[0] - 0.5).abs() < 1e-10);
        assert!(dist.probs()[1].abs() < 1e-10);
        assert!((dist.probs()[2] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn analytic_matches_hand_example() {
        let m = memory(&["00", "11"]);
        let dist = m.retrieve_analytic(&pat("00"), 2).unwrap();
        assert!((dist.probs()[0] - 0.5).abs() < 1e-15);
        assert!(dist.probs()[1].abs() < 1e-15);
        assert!((dist.probs()[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn analytic_half_distance_mean_is_half_d() {
        // Single pattern at Hamming distance k/2: sin²(π/4) = 1/2.
        let m = memory(&["1100"]);
        let ex = m
            .retrieve_analytic(&pat("0000"), 100)
            .unwrap()
            .expected_ones();
        assert!((ex - 50.0).abs() < 1e-9);
    }

    #[test]
    fn analytic_collapses_to_binomial_for_uniform_error() {
        // Every stored pattern at the same distance e: the mixture is one
        // binomial. Oracle computed directly from the pmf formula.
        let k = 8usize;
        let d = 12usize;
        let e = 3usize;
        let patterns: Vec<BitPattern> = (0..5)
            .map(|shift| {
                BitPattern::from_bools(
                    (0..k).map(|j| !(j >= shift && j < shift + e)).collect(),
                )
            })
            .collect();
        for p in &patterns {
            assert_eq!(hamming(p, &BitPattern::all_ones(k)).unwrap(), e);
        }
        let m = PqmMemory::from_patterns(patterns).unwrap();
        let dist = m.retrieve_analytic(&BitPattern::all_ones(k), d).unwrap();

        let prob = (PI * e as f64 / (2.0 * k as f64)).sin().powi(2);
        for count in 0..=d {
            let mut choose = 1.0f64;
            for i in 0..count {
                choose = choose * (d - i) as f64 / (i + 1) as f64;
            }
            let expect = choose * prob.powi(count as i32) * (1.0 - prob).powi((d - count) as i32);
            assert!(
                (dist.probs()[count] - expect).abs() < 1e-12,
                "K={count}: {} vs {expect}",
                dist.probs()[count]
            );
        }
    }

    #[test]
    fn expected_ones_two_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for _ in 0..25 {
            let k = rng.random_range(2..10usize);
            let n = rng.random_range(1..6usize);
            let patterns: Vec<BitPattern> = (0..n)
                .map(|_| BitPattern::from_bools((0..k).map(|_| rng.random()).collect()))
                .collect();
            let input = BitPattern::from_bools((0..k).map(|_| rng.random()).collect());
            let m = PqmMemory::from_patterns(patterns).unwrap();
            let d = rng.random_range(1..40usize);
            let from_dist = m.retrieve_analytic(&input, d).unwrap().expected_ones();
            let closed = m.expected_ones_closed_form(&input, d).unwrap();
            assert!(
                (from_dist - closed).abs() < 1e-9,
                "E(X) routes disagree: {from_dist} vs {closed}"
            );
        }
    }

    #[test]
    fn expected_ones_of_point_masses() {
        let m = memory(&["0101"]);
        let dist = m.retrieve_analytic(&pat("0101"), 7).unwrap();
        assert_eq!(dist.expected_ones(), 0.0);
        let dist = m.retrieve_analytic(&pat("1010"), 7).unwrap();
        assert_eq!(dist.expected_ones(), 7.0);
    }

    #[test]
    fn sample_ones_limit_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let m = memory(&["0110"]);
        for _ in 0..50 {
            assert_eq!(m.sample_ones(&pat("0110"), 9, &mut rng).unwrap(), 0);
            assert_eq!(m.sample_ones(&pat("1001"), 9, &mut rng).unwrap(), 9);
        }
    }

    #[test]
    fn sample_histogram_matches_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let m = memory(&["11110000", "11111100", "00001111"]);
        let input = BitPattern::all_ones(8);
        let d = 6usize;
        let dist = m.retrieve_analytic(&input, d).unwrap();
        let draws = 100_000usize;
        let mut counts = vec![0usize; d + 1];
        for _ in 0..draws {
            counts[m.sample_ones(&input, d, &mut rng).unwrap() as usize] += 1;
        }
        for count in 0..=d {
            let p = dist.probs()[count];
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = counts[count] as f64 / draws as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma + 1e-9,
                "K={count}: freq {freq} vs p {p}"
            );
        }
    }

    #[test]
    fn single_pattern_mean_strictly_increases_with_distance() {
        let k = 9usize;
        let input = BitPattern::all_ones(k);
        let mut last = -1.0f64;
        for distance in 0..=k {
            let stored = BitPattern::from_bools((0..k).map(|j| j >= distance).collect());
            let m = PqmMemory::from_patterns(vec![stored]).unwrap();
            let ex = m.retrieve_analytic(&input, 25).unwrap().expected_ones();
            assert!(ex > last, "E(X) not increasing at d_H={distance}");
            last = ex;
        }
    }

    #[test]
    fn backends_agree_on_random_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..20 {
            let k = rng.random_range(1..4usize);
            let n = rng.random_range(1..=std::cmp::min(3, 1 << k) as usize);
            let mut all: Vec<usize> = (0..1 << k).collect();
            for i in (1..all.len()).rev() {
                let j = rng.random_range(0..=i);
                all.swap(i, j);
            }
            let patterns: Vec<BitPattern> = all[..n]
                .iter()
                .map(|&v| BitPattern::from_bools((0..k).map(|j| v >> j & 1 == 1).collect()))
                .collect();
            let input = BitPattern::from_bools((0..k).map(|_| rng.random()).collect());
            let d = rng.random_range(1..3usize);

            let (state, layout) = store_circuit(&patterns).unwrap();
            let circuit = retrieve_circuit(state, &layout, &input, d).unwrap();
            let analytic = PqmMemory::from_patterns(patterns)
                .unwrap()
                .retrieve_analytic(&input, d)
                .unwrap();
            assert!(
                circuit.max_abs_diff(&analytic) < 1e-9,
                "k={k} d={d}: circuit {:?} vs analytic {:?}",
                circuit.probs(),
                analytic.probs()
            );
        }
    }

    #[test]
    fn memory_register_marginal_reproduces_pattern_multiset() {
        // Exhaustive over k=2 distinct pattern sets.
        for mask in 1usize..16 {
            let patterns: Vec<BitPattern> = (0..4)
                .filter(|i| mask >> i & 1 == 1)
                .map(|v| BitPattern::from_bools(vec![v & 1 == 1, v >> 1 & 1 == 1]))
                .collect();
            let n = patterns.len() as f64;
            let (state, layout) = store_circuit(&patterns).unwrap();
            let marginal = state
                .exact_marginal(&layout.memory.clone().collect::<Vec<_>>())
                .unwrap();
            let mut expected = [0.0f64; 4];
            for p in &patterns {
                expected[pattern_index(p, 0)] = 1.0 / n;
            }
            for i in 0..4 {
                assert!(
                    (marginal[i] - expected[i]).abs() < 1e-10,
                    "mask {mask} index {i}: {} vs {}",
                    marginal[i],
                    expected[i]
                );
            }
        }
    }

    #[test]
    fn deep_tails_stay_representable() {
        // A well-trained ensemble's distribution reaches astronomically
        // small tail bins; the log-space path must not flush them to zero
        // prematurely or produce NaN.
        let k = 69usize;
        let mut bits = vec![true; k];
        bits[0] = false; // one error
        let m = PqmMemory::from_patterns(vec![BitPattern::from_bools(bits)]).unwrap();
        let dist = m.retrieve_analytic(&BitPattern::all_ones(k), 100).unwrap();
        assert!(dist.probs().iter().all(|p| p.is_finite()));
        assert!(dist.probs()[90] > 0.0);
        assert!(dist.probs()[90] < 1e-280);
        dist.validate(1e-9).unwrap();
    }

    proptest! {
        #[test]
        fn analytic_distribution_is_valid(
            k in 1usize..8,
            n in 1usize..6,
            d in 1usize..16,
            seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let patterns: Vec<BitPattern> = (0..n)
                .map(|_| BitPattern::from_bools((0..k).map(|_| rng.random()).collect()))
                .collect();
            let input = BitPattern::from_bools((0..k).map(|_| rng.random()).collect());
            let m = PqmMemory::from_patterns(patterns).unwrap();
            let dist = m.retrieve_analytic(&input, d).unwrap();
            prop_assert!(dist.validate(1e-9).is_ok());
        }
    }
}
