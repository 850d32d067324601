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

//! Fast free-space Ewald summation for the stokeslet, stresslet and rotlet.

pub mod error;
pub mod estimates;
pub mod ewald;
pub(crate) mod fft;
pub mod greens;
pub mod grid;
pub mod kernels;
pub mod realspace;

pub use error::{Error, Result};
pub use estimates::{
    fourier_error_estimate, real_error_estimate, select_parameters, ErrorBudget, Selection,
    SystemSummary,
};
pub use ewald::{
    fourier_sum, fourier_sum_timed, kspace_scale, make_config, quadrature, spread, spread_direct,
    total_sum, EwaldConfig, FourierField, FourierTimings,
};
pub use greens::{
    bhat_r, freespace_solve, hhat_r, precompute_mollified_green, GreenKind, MollifiedGreen,
    TruncatedGreen,
};
pub use grid::{Grid3, ScalarGrid, VectorGrid};
pub use kernels::{
    direct_sum, eval_kernel, rms_error, self_interaction, KernelKind, SourceSystem, Strength,
    Vec3, Velocities,
};
pub use realspace::{build_cell_list, eval_real_kernel, real_space_sum, CellList};

pub use rustfft::num_complex::Complex64;
