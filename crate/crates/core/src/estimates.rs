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

//! RMS truncation error estimates and parameter selection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::ewald::{make_config, EwaldConfig};
use crate::kernels::{KernelKind, SourceSystem};

/// `⟨|x - y|⁻²⟩` for independent uniform points in the unit cube.
const MEAN_INV_DIST_SQ: f64 = 5.66;

/// Largest grid size tried by [`select_parameters`].
const MAX_GRID: usize = 2048;

/// Largest `η` accepted by [`select_parameters`]. Coarser grids leave too
/// little of the screening Gaussian to damp the gridding error, and the
/// approximation error then grows well beyond what the support `P` promises.
pub const MAX_ETA: f64 = 0.5;

/// Systems with fewer sources than this put every pair in the real-space
/// sum and tune the grid to [`SMALL_SYSTEM_MARGIN`] times the tolerance.
/// With a handful of sources the velocity can be far below the typical
/// magnitude the estimates assume, and the extra work costs nothing here.
pub const SMALL_SYSTEM: usize = 32;

pub const SMALL_SYSTEM_MARGIN: f64 = 1e-3;

/// Fourier-space truncation error estimate for wavenumber cutoff `k_inf`.
pub fn fourier_error_estimate(kind: KernelKind, q: f64, xi: f64, k_inf: f64, l: f64, r: f64) -> f64 {
    let decay = (-k_inf * k_inf / (4.0 * xi * xi)).exp();
    match kind {
        KernelKind::Stokeslet => q.sqrt() * r * k_inf.powi(3) / (xi * xi * PI * l) * decay,
        KernelKind::Stresslet => {
            (7.0 * q / 6.0).sqrt() * r * k_inf.powi(4) / (xi * xi * PI * l) * decay
        }
        KernelKind::Rotlet => (8.0 * xi * xi * q / (3.0 * PI * l.powi(3) * k_inf)).sqrt() * decay,
    }
}

/// Real-space truncation error estimate for cutoff `rc`.
pub fn real_error_estimate(kind: KernelKind, q: f64, xi: f64, rc: f64, l: f64) -> f64 {
    let decay = (-xi * xi * rc * rc).exp();
    let l3 = l.powi(3);
    match kind {
        KernelKind::Stokeslet => (4.0 * q * rc / l3).sqrt() * decay,
        KernelKind::Stresslet => (112.0 * q * xi.powi(4) * rc.powi(3) / (9.0 * l3)).sqrt() * decay,
        KernelKind::Rotlet => (8.0 * q / (3.0 * l3 * rc)).sqrt() * decay,
    }
}

/// The three numbers the estimates need from a source system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub len: usize,
    pub box_side: f64,
    /// `Q = Σ_n Σ_i f_{n,i}²`.
    pub q: f64,
}

impl SystemSummary {
    pub fn of(system: &SourceSystem) -> Self {
        SystemSummary {
            len: system.len(),
            box_side: system.box_side(),
            q: system.strength_sum_sq(),
        }
    }
}

/// Predicted errors for one configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub kind: KernelKind,
    pub xi: f64,
    pub rc: f64,
    pub k_inf: f64,
    pub box_side: f64,
    pub radius: f64,
    pub q: f64,
    pub predicted_real_rms: f64,
    pub predicted_fourier_rms: f64,
}

impl ErrorBudget {
    pub fn new(kind: KernelKind, cfg: &EwaldConfig, q: f64) -> Self {
        let l = cfg.box_side();
        ErrorBudget {
            kind,
            xi: cfg.xi(),
            rc: cfg.rc(),
            k_inf: cfg.k_inf(),
            box_side: l,
            radius: cfg.radius(),
            q,
            predicted_real_rms: real_error_estimate(kind, q, cfg.xi(), cfg.rc(), l),
            predicted_fourier_rms: fourier_error_estimate(kind, q, cfg.xi(), cfg.k_inf(), l, cfg.radius()),
        }
    }

    /// Combined RMS of the two independent error sources.
    pub fn predicted_total_rms(&self) -> f64 {
        self.predicted_real_rms.hypot(self.predicted_fourier_rms)
    }
}

/// Rough RMS magnitude of the velocity field of a random system, used to
/// turn relative tolerances into absolute ones.
///
/// Averages `|G f|²` over directions and random strengths: `2|f|²/r²` for
/// the stokeslet, `4|f|²/r⁴` for the stresslet and `(2/3)|f|²/r⁴` for the
/// rotlet. The `r⁻⁴` mean is cut off at a fraction of the mean spacing.
pub fn reference_magnitude(kind: KernelKind, summary: &SystemSummary) -> f64 {
    let l = summary.box_side;
    let spacing = 0.55 * (l.powi(3) / summary.len.max(1) as f64).cbrt();
    let inv_r4 = 4.0 * PI / (l.powi(3) * spacing);
    let sq = match kind {
        KernelKind::Stokeslet => 2.0 * summary.q * MEAN_INV_DIST_SQ / (l * l),
        KernelKind::Stresslet => 4.0 * summary.q * inv_r4,
        KernelKind::Rotlet => 2.0 / 3.0 * summary.q * inv_r4,
    };
    sq.sqrt()
}

/// Gaussian support for a relative tolerance: 16 nodes give about eight
/// digits, 24 about twelve, 32 reach round-off.
pub fn support_for_tolerance(tol: f64) -> usize {
    if tol >= 4e-9 {
        16
    } else if tol >= 4e-13 {
        24
    } else {
        32
    }
}

/// Outcome of [`select_parameters`].
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub config: EwaldConfig,
    pub budget: ErrorBudget,
    /// Absolute RMS target each of the two parts was tuned to.
    pub target_rms: f64,
    /// The system is small or the real-space cutoff needed exceeds the box
    /// diagonal, so direct summation is the better choice.
    pub recommend_direct: bool,
}

/// Chooses `rc`, `M` and `P` for a relative RMS tolerance, splitting the
/// budget evenly between the real and Fourier parts. Below
/// [`SMALL_SYSTEM`] sources the cutoff spans the box diagonal and the grid
/// is tuned to a tighter tolerance.
pub fn select_parameters(
    kind: KernelKind,
    summary: &SystemSummary,
    xi: f64,
    tol: f64,
) -> Result<Selection> {
    if !(tol > 0.0 && tol.is_finite()) {
        return param(format!("tolerance must be positive, got {tol}"));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return param(format!("xi must be positive, got {xi}"));
    }
    if !(summary.box_side > 0.0) || summary.len == 0 {
        return param("system summary must describe a non-empty box");
    }
    let l = summary.box_side;
    let q = summary.q;
    let small = summary.len < SMALL_SYSTEM;
    let tol = if small { tol * SMALL_SYSTEM_MARGIN } else { tol };
    let target = 0.5 * tol * reference_magnitude(kind, summary);
    let support = support_for_tolerance(tol);

    // real space: bisection on the tail where the estimate decreases
    let lo = match kind {
        KernelKind::Stokeslet => 0.5 / xi,
        KernelKind::Stresslet => 0.5 * 3f64.sqrt() / xi,
        KernelKind::Rotlet => 1e-3 * l,
    };
    let hi = 3f64.sqrt() * l;
    let est = |rc: f64| real_error_estimate(kind, q, xi, rc, l);
    let (rc, recommend_direct) = if small {
        (hi, true)
    } else if est(lo) <= target {
        (lo, false)
    } else if est(hi) > target {
        (hi, true)
    } else {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if est(mid) <= target {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 1e-12 * b {
                break;
            }
        }
        (b, false)
    };

    // Fourier space: smallest grid meeting the target with a resolved window
    for m in 1..=MAX_GRID {
        let cfg = make_config(l, xi, rc, m, support)?;
        if cfg.eta() > MAX_ETA {
            continue;
        }
        let e = fourier_error_estimate(kind, q, xi, cfg.k_inf(), l, cfg.radius());
        if e <= target {
            let budget = ErrorBudget::new(kind, &cfg, q);
            return Ok(Selection {
                config: cfg,
                budget,
                target_rms: target,
                recommend_direct,
            });
        }
    }
    param(format!("no grid up to {MAX_GRID} meets tolerance {tol} at xi = {xi}"))
}
