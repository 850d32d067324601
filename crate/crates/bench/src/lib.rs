// Copyright 2026 The fse-stokes Authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.

//! Fixtures shared by the benchmarks.

use fse_core::{make_config, EwaldConfig, KernelKind, SourceSystem, Strength};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform sources in `[0, side]³` with strength components in `[-1, 1)`.
pub fn random_system(kind: KernelKind, n: usize, side: f64, seed: u64) -> SourceSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n)
        .map(|_| std::array::from_fn(|_| rng.gen::<f64>() * side))
        .collect();
    let mut unit = || 2.0 * rng.gen::<f64>() - 1.0;
    let strengths = (0..n)
        .map(|_| match kind {
            KernelKind::Stresslet => Strength::Tensor(std::array::from_fn(|_| std::array::from_fn(|_| unit()))),
            _ => Strength::Vector(std::array::from_fn(|_| unit())),
        })
        .collect();
    SourceSystem::new(positions, strengths, side).expect("valid system")
}

/// A system at the density of the large-scale runs (2500 per unit volume)
/// with a configuration good to roughly 1e-8.
pub fn workload(kind: KernelKind, n: usize) -> (SourceSystem, EwaldConfig) {
    let side = (n as f64 / 2500.0).cbrt();
    let system = random_system(kind, n, side, 42);
    let grid = ((24.0 * side).round() as usize).max(4);
    let cfg = make_config(side, 7.0, 0.63, grid, 16).expect("valid configuration");
    (system, cfg)
}
