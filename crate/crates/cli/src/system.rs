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

use fse_core::{KernelKind, SourceSystem, Strength, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{param, Result};

/// Random system of `n` sources in `[0, L]³`.
///
/// The generator is ChaCha8 seeded with `seed` through `seed_from_u64`,
/// which is stable across platforms. It draws all `3n` position
/// coordinates first (`L·u`, point by point) and then every strength
/// component (`2u - 1`), so the positions do not depend on the kernel.
pub fn generate_system(kind: KernelKind, n: usize, box_side: f64, seed: u64) -> Result<SourceSystem> {
    if n == 0 {
        return param("a system needs at least one source");
    }
    if !(box_side > 0.0 && box_side.is_finite()) {
        return param(format!("box side must be positive, got {box_side}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Vec3> = (0..n)
        .map(|_| {
            let p: Vec3 = [rng.gen(), rng.gen(), rng.gen()];
            // u < 1 but L·u may round up to L; keep it inside the box
            p.map(|u: f64| (box_side * u).min(box_side))
        })
        .collect();
    let arity = kind.arity();
    let mut c = vec![0.0; arity];
    let strengths = (0..n)
        .map(|_| {
            for v in c.iter_mut() {
                *v = 2.0 * rng.gen::<f64>() - 1.0;
            }
            Strength::from_components(kind, &c)
        })
        .collect::<fse_core::Result<Vec<_>>>()?;
    Ok(SourceSystem::new(positions, strengths, box_side)?)
}
