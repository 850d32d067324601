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

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Result;

/// Version of the CSV column layout. Bump on any column change.
pub const CSV_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorSource {
    /// Measured against the direct sum.
    Oracle,
    /// From the truncation error estimates; the system was above the cap.
    Predicted,
}

/// One evaluated configuration. Times are seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub kernel: String,
    pub n: usize,
    pub box_side: f64,
    pub seed: u64,
    pub xi: f64,
    pub rc: f64,
    pub grid_size: usize,
    pub support: usize,
    pub ext_grid_size: usize,
    pub eta: f64,
    pub oversampling: f64,
    pub tol: Option<f64>,
    pub rel_error: f64,
    pub abs_error: f64,
    pub error_source: ErrorSource,
    pub predicted_rms: f64,
    pub recommend_direct: bool,
    pub deterministic: bool,
    pub green_cached: bool,
    pub t_precompute: f64,
    pub t_spread: f64,
    pub t_fft: f64,
    pub t_scale: f64,
    pub t_quadrature: f64,
    pub t_realspace: f64,
    /// Evaluation time without the Green's function precomputation.
    pub t_total: f64,
    pub t_total_with_precompute: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub records: Vec<RunRecord>,
}

impl RunReport {
    /// Record with the smallest evaluation time.
    pub fn fastest(&self) -> Option<&RunRecord> {
        self.records.iter().min_by(|a, b| a.t_total.total_cmp(&b.t_total))
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.records {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json(&self, mut w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Writes `<path>.csv` and `<path>.json`.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        self.write_csv(BufWriter::new(File::create(path.with_extension("csv"))?))?;
        self.write_json(BufWriter::new(File::create(path.with_extension("json"))?))?;
        Ok(())
    }
}
