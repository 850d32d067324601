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

//! Short-range part of the Ewald split, truncated at `r_c` and evaluated
//! with a cell list.
//!
//! The stokeslet and stresslet use the Hasimoto screening, the rotlet the
//! classical Ewald (erfc) screening.

use rayon::prelude::*;
use libm::erfc;

use crate::error::{Error, Result};
use crate::kernels::{cross, dot, quad_form, sub, KernelKind, SourceSystem, Strength, Vec3, Velocities};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// `G^R(r, ξ)·f`; caller guarantees `r ≠ 0`.
#[inline]
pub(crate) fn apply_real_kernel(kind: KernelKind, r: &Vec3, xi: f64, f: &[f64]) -> Vec3 {
    let r2 = dot(r, r);
    let rn = r2.sqrt();
    let inv_r = 1.0 / rn;
    let xr = xi * rn;
    let gauss = (-xr * xr).exp();
    let ec = erfc(xr);
    match kind {
        KernelKind::Stokeslet => {
            // 2(ξ e/√π + erfc/2r)(δ + r̂r̂) - 4ξ e/√π δ
            let a = 2.0 * (xi * gauss * FRAC_1_SQRT_PI + 0.5 * ec * inv_r);
            let b = 4.0 * xi * gauss * FRAC_1_SQRT_PI;
            let c = a * dot(r, &[f[0], f[1], f[2]]) * inv_r * inv_r;
            [
                (a - b) * f[0] + c * r[0],
                (a - b) * f[1] + c * r[1],
                (a - b) * f[2] + c * r[2],
            ]
        }
        KernelKind::Stresslet => {
            // a r̂_j r̂_l r̂_m + b (δ_jl r̂_m + δ_lm r̂_j + δ_mj r̂_l), with
            // b = ψ''' for the screened biharmonic ψ' = erfc(ξr)
            let a = -2.0 * inv_r
                * (3.0 * ec * inv_r + 2.0 * xi * FRAC_1_SQRT_PI * (3.0 + 2.0 * xr * xr) * gauss);
            let b = 4.0 * xi * xi * xi * rn * FRAC_1_SQRT_PI * gauss;
            let rh = [r[0] * inv_r, r[1] * inv_r, r[2] * inv_r];
            let rfr = quad_form(&rh, f);
            let trace = f[0] + f[4] + f[8];
            let mut u = [0.0; 3];
            for j in 0..3 {
                let row = f[3 * j] * rh[0] + f[3 * j + 1] * rh[1] + f[3 * j + 2] * rh[2];
                let col = f[j] * rh[0] + f[3 + j] * rh[1] + f[6 + j] * rh[2];
                u[j] = a * rh[j] * rfr + b * (row + rh[j] * trace + col);
            }
            u
        }
        KernelKind::Rotlet => {
            // ε_jlm r̂_m (erfc/r² + 2ξ e/(√π r)) f_l
            let c = (ec * inv_r + 2.0 * xi * FRAC_1_SQRT_PI * gauss) * inv_r * inv_r;
            let fxr = cross(&[f[0], f[1], f[2]], r);
            [c * fxr[0], c * fxr[1], c * fxr[2]]
        }
    }
}

/// Evaluates the real-space kernel `G^R(r, ξ)·f`.
pub fn eval_real_kernel(kind: KernelKind, r: Vec3, xi: f64, f: &Strength) -> Result<Vec3> {
    if f.arity() != kind.arity() {
        return Err(Error::Shape(format!("{kind} expects {} components", kind.arity())));
    }
    if !(xi > 0.0) {
        return Err(Error::Parameter(format!("xi must be positive, got {xi}")));
    }
    if dot(&r, &r) == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    Ok(apply_real_kernel(kind, &r, xi, f.components()))
}

/// Uniform spatial bucketing of source points.
///
/// Cells have side `≥ r_c`, so every source within `r_c` of a point lies in
/// the 3×3×3 block of cells around the point's cell. There is no periodic
/// wrapping: boundary cells simply have fewer neighbours.
#[derive(Clone, Debug)]
pub struct CellList {
    origin: Vec3,
    cell_side: f64,
    dims: [usize; 3],
    /// `cell_start[c]..cell_start[c + 1]` indexes `indices` for cell `c`.
    cell_start: Vec<usize>,
    indices: Vec<usize>,
}

impl CellList {
    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn num_cells(&self) -> usize {
        self.dims.iter().product()
    }

    fn linear(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    /// Cell containing `x`; points outside the covered region are clamped
    /// to the nearest boundary cell.
    pub fn cell_of(&self, x: &Vec3) -> [usize; 3] {
        let mut c = [0; 3];
        for d in 0..3 {
            let t = ((x[d] - self.origin[d]) / self.cell_side).floor();
            c[d] = if t <= 0.0 {
                0
            } else {
                (t as usize).min(self.dims[d] - 1)
            };
        }
        c
    }

    /// Source indices stored in one cell, ascending.
    pub fn bucket(&self, c: [usize; 3]) -> &[usize] {
        let l = self.linear(c);
        &self.indices[self.cell_start[l]..self.cell_start[l + 1]]
    }

    /// Cells in the 3×3×3 neighbourhood of the cell containing `x`.
    pub fn neighbor_cells(&self, x: &Vec3) -> impl Iterator<Item = [usize; 3]> + '_ {
        let c = self.cell_of(x);
        let lo = c.map(|v| v.saturating_sub(1));
        let hi = [
            (c[0] + 1).min(self.dims[0] - 1),
            (c[1] + 1).min(self.dims[1] - 1),
            (c[2] + 1).min(self.dims[2] - 1),
        ];
        (lo[0]..=hi[0]).flat_map(move |i| {
            (lo[1]..=hi[1]).flat_map(move |j| (lo[2]..=hi[2]).map(move |k| [i, j, k]))
        })
    }

    /// All candidate source indices near `x`.
    pub fn candidates<'a>(&'a self, x: &Vec3) -> impl Iterator<Item = usize> + 'a {
        self.neighbor_cells(x).flat_map(|c| self.bucket(c).iter().copied())
    }

    fn cell_ranges(&self, x: &Vec3) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.neighbor_cells(x).map(|c| {
            let l = self.linear(c);
            self.cell_start[l]..self.cell_start[l + 1]
        })
    }
}

/// Buckets the sources of `system` into cells of side at least `rc` over
/// the region `[-pad, L + pad]³`. When `rc` exceeds the region a single cell
/// holds every point.
pub fn build_cell_list(system: &SourceSystem, rc: f64, domain_pad: f64) -> Result<CellList> {
    if !(rc > 0.0) {
        return Err(Error::Parameter(format!("rc must be positive, got {rc}")));
    }
    if !(domain_pad >= 0.0) {
        return Err(Error::Parameter(format!("domain pad must be non-negative, got {domain_pad}")));
    }
    let extent = system.box_side() + 2.0 * domain_pad;
    let per_dim = ((extent / rc).floor() as usize).clamp(1, 1 << 10);
    let mut list = CellList {
        origin: [-domain_pad; 3],
        cell_side: extent / per_dim as f64,
        dims: [per_dim; 3],
        cell_start: Vec::new(),
        indices: Vec::new(),
    };
    let cells: Vec<usize> = system
        .positions()
        .iter()
        .map(|x| list.linear(list.cell_of(x)))
        .collect();
    // counting sort keeps indices ascending within each cell
    let mut counts = vec![0usize; list.num_cells() + 1];
    for &c in &cells {
        counts[c + 1] += 1;
    }
    for i in 1..counts.len() {
        counts[i] += counts[i - 1];
    }
    let mut fill = counts.clone();
    let mut indices = vec![0; cells.len()];
    for (i, &c) in cells.iter().enumerate() {
        indices[fill[c]] = i;
        fill[c] += 1;
    }
    list.cell_start = counts;
    list.indices = indices;
    Ok(list)
}

/// Truncated real-space sum `Σ_{0 < |x - x_n| ≤ r_c} G^R(x - x_n, ξ)·f_n`.
///
/// When `targets` are exactly the source positions, the `n = m` term is
/// skipped and any other zero separation is an error. For detached targets
/// only exact-zero separations are skipped.
pub fn real_space_sum(
    system: &SourceSystem,
    kind: KernelKind,
    xi: f64,
    rc: f64,
    targets: &[Vec3],
) -> Result<Velocities> {
    system.check_kind(kind)?;
    if !(xi > 0.0) {
        return Err(Error::Parameter(format!("xi must be positive, got {xi}")));
    }
    let cells = build_cell_list(system, rc, 0.0)?;
    let arity = kind.arity();
    let flat = system.flat_strengths();
    // sources permuted into cell order for locality
    let pos: Vec<Vec3> = cells.indices.iter().map(|&i| system.positions()[i]).collect();
    let mut str_sorted = Vec::with_capacity(flat.len());
    for &i in &cells.indices {
        str_sorted.extend_from_slice(&flat[i * arity..(i + 1) * arity]);
    }
    let same_points = targets == system.positions();
    let rc2 = rc * rc;
    // visiting targets cell by cell keeps the neighbouring sources in cache
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by_cached_key(|&m| cells.linear(cells.cell_of(&targets[m])));
    let sorted = order
        .par_iter()
        .map(|&m| {
            let x = &targets[m];
            let mut u = [0.0; 3];
            for range in cells.cell_ranges(x) {
                for s in range {
                    let r = sub(x, &pos[s]);
                    let r2 = dot(&r, &r);
                    if r2 > rc2 {
                        continue;
                    }
                    if r2 == 0.0 {
                        let n = cells.indices[s];
                        if same_points && n != m {
                            return Err(Error::Coincident {
                                source_index: n,
                                target_index: m,
                            });
                        }
                        continue;
                    }
                    let g = apply_real_kernel(kind, &r, xi, &str_sorted[s * arity..(s + 1) * arity]);
                    u[0] += g[0];
                    u[1] += g[1];
                    u[2] += g[2];
                }
            }
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![[0.0; 3]; targets.len()];
    for (&m, u) in order.iter().zip(sorted) {
        values[m] = u;
    }
    Ok(Velocities { values })
}

/// Dense all-pairs real-space sum with the same truncation rule, no cell list.
pub fn real_space_sum_dense(
    system: &SourceSystem,
    kind: KernelKind,
    xi: f64,
    rc: f64,
    targets: &[Vec3],
) -> Result<Velocities> {
    system.check_kind(kind)?;
    let arity = kind.arity();
    let flat = system.flat_strengths();
    let rc2 = rc * rc;
    let values = targets
        .par_iter()
        .map(|x| {
            let mut u = [0.0; 3];
            for (xn, f) in system.positions().iter().zip(flat.chunks_exact(arity)) {
                let r = sub(x, xn);
                let r2 = dot(&r, &r);
                if r2 == 0.0 || r2 > rc2 {
                    continue;
                }
                let g = apply_real_kernel(kind, &r, xi, f);
                u[0] += g[0];
                u[1] += g[1];
                u[2] += g[2];
            }
            u
        })
        .collect();
    Ok(Velocities { values })
}
