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

//! Experiment harness around `fse_core`: random source systems, timed runs
//! checked against the direct sum, parameter sweeps and CSV/JSON reports.

mod report;
mod run;
mod spec;
mod system;

pub use report::{ErrorSource, RunRecord, RunReport, CSV_SCHEMA};
pub use run::{green_cache_path, load_or_precompute, run, sweep_xi};
pub use spec::{BoxSize, Params, RunSpec, Sweep};
pub use system::generate_system;

use thiserror::Error;

/// Harness failures, split by the exit code they map to.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parameter error: {0}")]
    Param(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    /// 2 for parameter errors, 3 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Param(_) => 2,
            HarnessError::Io(_) => 3,
        }
    }
}

impl From<fse_core::Error> for HarnessError {
    fn from(e: fse_core::Error) -> Self {
        match e {
            fse_core::Error::Io(_) | fse_core::Error::Format(_) => HarnessError::Io(e.to_string()),
            _ => HarnessError::Param(e.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Param(msg.into()))
}
