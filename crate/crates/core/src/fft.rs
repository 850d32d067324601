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

//! Cubic 3D FFTs on zero-padded data.
//!
//! The forward transform skips lines that are known to be zero (input
//! supported on the low `active³` corner) and the inverse transform only
//! finishes the lines that feed the low `keep³` corner of the output.
//! Neither transform normalizes.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct CubeFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CubeFft {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        CubeFft {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Forward transform of data whose nonzeros lie in `[0, active)³`.
    pub(crate) fn forward_pruned(&self, data: &mut [Complex64], active: usize) {
        let n = self.n;
        assert_eq!(data.len(), self.len());
        let plan = &self.forward;
        // last axis: only rows inside the active corner
        data.par_chunks_mut(n * n).take(active).for_each(|slab| {
            plan.process(&mut slab[..active * n]);
        });
        // middle axis: only slabs inside the active corner
        data.par_chunks_mut(n * n).take(active).for_each_init(
            || vec![Complex64::default(); n * n],
            |tmp, slab| transform_columns(plan.as_ref(), slab, tmp, n, n, n),
        );
        self.first_axis(data, active, n, false);
    }

    /// Inverse transform; on return `[0, keep)³` holds the result.
    pub(crate) fn inverse_pruned(&self, data: &mut [Complex64], keep: usize) {
        let n = self.n;
        assert_eq!(data.len(), self.len());
        let plan = &self.inverse;
        self.first_axis(data, n, keep, true);
        data.par_chunks_mut(n * n).take(keep).for_each_init(
            || vec![Complex64::default(); n * n],
            |tmp, slab| transform_columns(plan.as_ref(), slab, tmp, n, n, keep),
        );
        data.par_chunks_mut(n * n).take(keep).for_each(|slab| {
            plan.process(&mut slab[..keep * n]);
        });
    }

    /// Transforms along the slowest axis. Input rows `≥ read` are taken as
    /// zero; only output rows `< write` are stored.
    fn first_axis(&self, data: &mut [Complex64], read: usize, write: usize, inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.inverse } else { &self.forward };
        let mut tmp = vec![Complex64::default(); n * n];
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for j in 0..n {
            // tmp[k][i] = data[i][j][k]
            for i in 0..read {
                let row = &data[(i * n + j) * n..(i * n + j + 1) * n];
                for (k, v) in row.iter().enumerate() {
                    tmp[k * n + i] = *v;
                }
            }
            if read < n {
                for k in 0..n {
                    tmp[k * n + read..(k + 1) * n].fill(Complex64::default());
                }
            }
            plan.process_with_scratch(&mut tmp, &mut scratch);
            for i in 0..write {
                let row = &mut data[(i * n + j) * n..(i * n + j + 1) * n];
                for (k, v) in row.iter_mut().enumerate() {
                    *v = tmp[k * n + i];
                }
            }
        }
    }
}

/// Transforms the columns of a `rows × cols` row-major block, storing only
/// output rows `< write`.
fn transform_columns(
    plan: &dyn Fft<f64>,
    slab: &mut [Complex64],
    tmp: &mut [Complex64],
    rows: usize,
    cols: usize,
    write: usize,
) {
    for r in 0..rows {
        for c in 0..cols {
            tmp[c * rows + r] = slab[r * cols + c];
        }
    }
    plan.process(&mut tmp[..rows * cols]);
    for r in 0..write {
        for c in 0..cols {
            slab[r * cols + c] = tmp[c * rows + r];
        }
    }
}

/// DFT along one axis of a 3D block that is even-symmetric along that axis
/// with the given (even) period. The block stores the `period/2 + 1`
/// non-redundant samples; the result keeps output indices `0..out_len`.
/// Even real input gives even real output, so only real parts are kept.
pub(crate) fn even_dft_axis(
    src: &[f64],
    dims: [usize; 3],
    axis: usize,
    period: usize,
    out_len: usize,
) -> (Vec<f64>, [usize; 3]) {
    assert!(period % 2 == 0 && dims[axis] == period / 2 + 1);
    assert!(out_len <= period / 2 + 1);
    let mut out_dims = dims;
    out_dims[axis] = out_len;
    let strides = [dims[1] * dims[2], dims[2], 1];
    let out_strides = [out_dims[1] * out_dims[2], out_dims[2], 1];
    let (a, b) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let plan = FftPlanner::new().plan_fft_forward(period);
    let lines: Vec<(usize, usize)> = (0..dims[a]).flat_map(|p| (0..dims[b]).map(move |q| (p, q))).collect();
    let results: Vec<Vec<f64>> = lines
        .par_iter()
        .map_init(
            || vec![Complex64::default(); period],
            |buf, &(p, q)| {
                let base = p * strides[a] + q * strides[b];
                let half = period / 2;
                for i in 0..=half {
                    let v = src[base + i * strides[axis]];
                    buf[i] = Complex64::new(v, 0.0);
                    if i > 0 && i < half {
                        buf[period - i] = Complex64::new(v, 0.0);
                    }
                }
                plan.process(buf);
                buf[..out_len].iter().map(|c| c.re).collect()
            },
        )
        .collect();
    let mut out = vec![0.0; out_dims.iter().product()];
    for (&(p, q), vals) in lines.iter().zip(results) {
        let base = p * out_strides[a] + q * out_strides[b];
        for (i, v) in vals.into_iter().enumerate() {
            out[base + i * out_strides[axis]] = v;
        }
    }
    (out, out_dims)
}
