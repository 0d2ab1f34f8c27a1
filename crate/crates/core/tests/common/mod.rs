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

//! Shared test fixtures. Each test target compiles this module on its
//! own, so helpers used by only one target look dead in the others.
#![allow(dead_code)]
//!
//! The reference benchmark files are not bundled with the repository, so
//! the integration tests generate stand-ins in the same `.dt` format. The
//! `cancer_like` fixture reproduces the benchmark's shape (699 examples,
//! 9 features, 2 classes) with a concentric-ring
//! decision structure: a single hidden unit underfits it badly while a
//! handful of units approach the ~2% label-noise floor, which is the
//! capacity/performance profile the selection pipeline is exercised on.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameters of one generated `.dt` fixture.
pub struct FixtureSpec {
    pub features: usize,
    pub classes: usize,
    pub examples: usize,
}

/// PROBEN1-style text for an arbitrary-shape fixture with random feature
/// values and labels; only good for loader/shape checks.
pub fn random_fixture_text(spec: &FixtureSpec, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<(Vec<f64>, usize)> = (0..spec.examples)
        .map(|_| {
            let feats = (0..spec.features).map(|_| rng.random::<f64>()).collect();
            let label = rng.random_range(0..spec.classes);
            (feats, label)
        })
        .collect();
    render_dt(spec, &rows)
}

/// The cancer-sized learning fixture: 699 examples, 9 features, 2 classes.
///
/// Each example is a latent 2D point that lies either inside a disc of
/// radius 0.14 (class 1) or in an annulus from 0.40 to 0.52 (class 0),
/// 50/50; the wide radial margin keeps the problem cleanly learnable
/// within a small epoch budget. Every feature is a different affine
/// projection of the latent point plus noise, so the class structure is
/// present in all nine columns yet never linearly separable: one hidden
/// unit can only cut the disc with a half-plane, while a handful of units
/// approximate the circle. 1.5% of labels are flipped so no
/// architecture reaches a perfect ensemble.
pub fn cancer_like_text(seed: u64) -> String {
    let spec = FixtureSpec {
        features: 9,
        classes: 2,
        examples: 699,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<(Vec<f64>, usize)> = (0..spec.examples)
        .map(|_| {
            let inside = rng.random::<f64>() < 0.5;
            let radius = if inside {
                rng.random::<f64>() * 0.14
            } else {
                0.40 + rng.random::<f64>() * 0.12
            };
            let angle = rng.random::<f64>() * std::f64::consts::TAU;
            let (x, y) = (radius * angle.cos(), radius * angle.sin());
            let feats = (0..spec.features)
                .map(|j| {
                    let direction = j as f64 * std::f64::consts::PI / spec.features as f64;
                    let noise = (rng.random::<f64>() - 0.5) * 0.03;
                    0.5 + direction.cos() * x + direction.sin() * y + noise
                })
                .collect();
            let mut label = usize::from(inside);
            if rng.random::<f64>() < 0.015 {
                label = 1 - label;
            }
            (feats, label)
        })
        .collect();
    render_dt(&spec, &rows)
}

fn render_dt(spec: &FixtureSpec, rows: &[(Vec<f64>, usize)]) -> String {
    let train = spec.examples / 2;
    let validation = spec.examples / 4;
    let test = spec.examples - train - validation;
    let mut out = String::new();
    writeln!(out, "bool_in=0").unwrap();
    writeln!(out, "real_in={}", spec.features).unwrap();
    writeln!(out, "bool_out={}", spec.classes).unwrap();
    writeln!(out, "real_out=0").unwrap();
    writeln!(out, "training_examples={train}").unwrap();
    writeln!(out, "validation_examples={validation}").unwrap();
    writeln!(out, "test_examples={test}").unwrap();
    for (feats, label) in rows {
        let mut line = String::new();
        for f in feats {
            write!(line, "{f:.6} ").unwrap();
        }
        for c in 0..spec.classes {
            write!(line, "{}", u8::from(*label == c)).unwrap();
            if c + 1 < spec.classes {
                line.push(' ');
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Writes fixture text to a temp file and returns the handle.
pub fn write_fixture(text: &str) -> tempfile::NamedTempFile {
    use std::io::Write;
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(text.as_bytes()).unwrap();
    file
}
