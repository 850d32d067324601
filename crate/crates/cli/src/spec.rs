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

use std::path::PathBuf;

use fse_core::KernelKind;
use serde::{Deserialize, Serialize};

use crate::{param, Result};

/// Box given directly or through the number density `N/L³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoxSize {
    Side(f64),
    Density(f64),
}

impl BoxSize {
    pub fn side(&self, n: usize) -> f64 {
        match *self {
            BoxSize::Side(l) => l,
            BoxSize::Density(rho) => (n as f64 / rho).cbrt(),
        }
    }
}

/// Either a relative tolerance handed to the parameter selection or an
/// explicit `(rc, M, P)` triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Params {
    Tolerance(f64),
    Explicit { rc: f64, grid_size: usize, support: usize },
}

/// Axis swept by [`crate::run`]. Each value overrides the matching field of
/// the spec; a ξ sweep re-tunes under a tolerance and otherwise holds `ξ·rc`
/// and `M/ξ` fixed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Sweep {
    #[default]
    None,
    Support(Vec<usize>),
    Grid(Vec<usize>),
    Cutoff(Vec<f64>),
    Points(Vec<usize>),
    Xi(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub kind: KernelKind,
    pub n: usize,
    pub box_size: BoxSize,
    pub seed: u64,
    pub xi: f64,
    pub params: Params,
    pub sweep: Sweep,
    /// Largest N checked against the direct sum; larger runs report the
    /// predicted error instead.
    pub oracle_cap: usize,
    pub deterministic: bool,
    /// Timed repetitions; the median is reported.
    pub repeats: usize,
    /// Run once untimed before measuring.
    pub warmup: bool,
    /// Oversampling factor for the Green's function; `None` for the minimum.
    pub oversampling: Option<f64>,
    /// Directory for cached Green's functions.
    pub cache_dir: Option<PathBuf>,
    /// When set, the report is written here as `.csv` and `.json`.
    pub output: Option<PathBuf>,
}

impl RunSpec {
    pub const DEFAULT_ORACLE_CAP: usize = 50_000;

    /// Single run with default harness settings.
    pub fn new(kind: KernelKind, n: usize, box_size: BoxSize, xi: f64, params: Params) -> Self {
        RunSpec {
            kind,
            n,
            box_size,
            seed: 0,
            xi,
            params,
            sweep: Sweep::None,
            oracle_cap: Self::DEFAULT_ORACLE_CAP,
            deterministic: false,
            repeats: 3,
            warmup: true,
            oversampling: None,
            cache_dir: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return param("N must be at least 1");
        }
        match self.box_size {
            BoxSize::Side(v) | BoxSize::Density(v) if !(v > 0.0 && v.is_finite()) => {
                return param(format!("box side or density must be positive, got {v}"));
            }
            _ => {}
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return param(format!("xi must be positive, got {}", self.xi));
        }
        match self.params {
            Params::Tolerance(t) if !(t > 0.0 && t.is_finite()) => {
                return param(format!("tolerance must be positive, got {t}"));
            }
            Params::Explicit { rc, grid_size, support } => {
                if !(rc > 0.0 && rc.is_finite()) || grid_size == 0 || support < 2 || support % 2 != 0 {
                    return param("explicit parameters need rc > 0, M ≥ 1 and an even P ≥ 2");
                }
            }
            _ => {}
        }
        if self.repeats == 0 {
            return param("at least one timed repetition is needed");
        }
        if let Some(sf) = self.oversampling {
            if !(sf.is_finite() && sf > 0.0) {
                return param(format!("invalid oversampling factor {sf}"));
            }
        }
        match &self.sweep {
            Sweep::None => Ok(()),
            Sweep::Support(v) | Sweep::Grid(v) | Sweep::Points(v) => check_sorted(v.iter().map(|&x| x as f64)),
            Sweep::Cutoff(v) | Sweep::Xi(v) => check_sorted(v.iter().copied()),
        }
    }
}

fn check_sorted(values: impl Iterator<Item = f64>) -> Result<()> {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return param("sweep needs at least one value");
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return param("sweep values must be positive and finite");
    }
    if v.windows(2).any(|w| w[0] > w[1]) {
        return param("sweep values must be sorted ascending");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> RunSpec {
        RunSpec::new(KernelKind::Stokeslet, 100, BoxSize::Side(1.0), 5.0, Params::Tolerance(1e-6))
    }

    #[test]
    fn density_gives_side() {
        let l = BoxSize::Density(2500.0).side(1_000_000);
        assert!((l - 400f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn sweeps_must_be_sorted_and_finite() {
        let mut s = spec();
        s.sweep = Sweep::Cutoff(vec![0.3, 0.2]);
        assert!(s.validate().is_err());
        s.sweep = Sweep::Xi(vec![1.0, f64::NAN]);
        assert!(s.validate().is_err());
        s.sweep = Sweep::Grid(vec![]);
        assert!(s.validate().is_err());
        s.sweep = Sweep::Grid(vec![8, 16]);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = spec();
        s.params = Params::Explicit { rc: 0.3, grid_size: 16, support: 7 };
        assert!(s.validate().is_err());
        let mut s = spec();
        s.params = Params::Tolerance(0.0);
        assert!(s.validate().is_err());
        let mut s = spec();
        s.n = 0;
        assert!(s.validate().is_err());
    }
}
