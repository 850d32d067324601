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
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fse_cli::{
    generate_system, load_or_precompute, run, sweep_xi, BoxSize, HarnessError, Params, RunReport,
    RunSpec, Sweep,
};
use fse_core::{make_config, select_parameters, KernelKind, SystemSummary};

#[derive(Parser)]
#[command(name = "fse", version, about = "Free-space spectral Ewald summation of Stokes potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration and compare with the direct sum.
    Run(Common),
    /// Evaluate a series of configurations along one axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated, ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Select parameters for --tol at the first ξ, then sweep ξ holding ξ·rc
    /// and M/ξ fixed and report the fastest.
    Tune {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ξ values; defaults to --xi alone.
        #[arg(long, value_delimiter = ',')]
        xi_values: Vec<f64>,
    },
    /// Compute the Green's function for a configuration and store it in
    /// --cache-dir.
    Precompute(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kernel {
    Stokeslet,
    Stresslet,
    Rotlet,
}

impl From<Kernel> for KernelKind {
    fn from(k: Kernel) -> Self {
        match k {
            Kernel::Stokeslet => KernelKind::Stokeslet,
            Kernel::Stresslet => KernelKind::Stresslet,
            Kernel::Rotlet => KernelKind::Rotlet,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    P,
    M,
    Rc,
    N,
    Xi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "stokeslet")]
    kernel: Kernel,
    /// Number of sources.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Box side L.
    #[arg(long = "box", conflicts_with = "density")]
    box_side: Option<f64>,
    /// Number density N/L³, used instead of --box.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, default_value_t = 7.0)]
    xi: f64,
    /// Relative RMS tolerance for automatic parameter selection.
    #[arg(long, conflicts_with_all = ["rc", "grid_m", "support_p"])]
    tol: Option<f64>,
    #[arg(long, requires_all = ["grid_m", "support_p"])]
    rc: Option<f64>,
    #[arg(long, requires_all = ["rc", "support_p"])]
    grid_m: Option<usize>,
    #[arg(long, requires_all = ["rc", "grid_m"])]
    support_p: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = RunSpec::DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
    /// Sequential reductions for bit-reproducible results.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Timed repetitions; the median is reported.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Skip the untimed warm-up run.
    #[arg(long)]
    no_warmup: bool,
    /// Oversampling factor of the Green's function precomputation.
    #[arg(long)]
    oversampling: Option<f64>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for cached Green's functions.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Common {
    fn spec(&self) -> Result<RunSpec, HarnessError> {
        let box_size = match (self.box_side, self.density) {
            (_, Some(rho)) => BoxSize::Density(rho),
            (Some(l), None) => BoxSize::Side(l),
            (None, None) => BoxSize::Side(1.0),
        };
        let params = match (self.tol, self.rc, self.grid_m, self.support_p) {
            (Some(t), ..) => Params::Tolerance(t),
            (None, Some(rc), Some(m), Some(p)) => Params::Explicit { rc, grid_size: m, support: p },
            _ => {
                return Err(HarnessError::Param(
                    "give either --tol or all of --rc, --grid-m and --support-p".into(),
                ))
            }
        };
        let mut spec = RunSpec::new(self.kernel.into(), self.n, box_size, self.xi, params);
        spec.seed = self.seed;
        spec.oracle_cap = self.oracle_cap;
        spec.deterministic = self.deterministic;
        spec.repeats = self.repeats;
        spec.warmup = !self.no_warmup;
        spec.oversampling = self.oversampling;
        spec.cache_dir = self.cache_dir.clone();
        Ok(spec)
    }

    fn emit(&self, report: &RunReport) -> Result<(), HarnessError> {
        let sink: Box<dyn Write> = match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout().lock()),
        };
        match self.format {
            Format::Csv => report.write_csv(sink),
            Format::Json => report.write_json(sink),
        }
    }
}

fn set_threads(threads: Option<usize>) -> Result<(), HarnessError> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| HarnessError::Param(format!("cannot set thread count: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run(c) => {
            set_threads(c.threads)?;
            c.emit(&run(&c.spec()?)?)
        }
        Command::Sweep { common, axis, values } => {
            set_threads(common.threads)?;
            let mut spec = common.spec()?;
            let counts = || -> Result<Vec<usize>, HarnessError> {
                values
                    .iter()
                    .map(|&v| {
                        if v >= 1.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(HarnessError::Param(format!("{v} is not a positive integer")))
                        }
                    })
                    .collect()
            };
            spec.sweep = match axis {
                Axis::P => Sweep::Support(counts()?),
                Axis::M => Sweep::Grid(counts()?),
                Axis::N => Sweep::Points(counts()?),
                Axis::Rc => Sweep::Cutoff(values.clone()),
                Axis::Xi => Sweep::Xi(values.clone()),
            };
            common.emit(&run(&spec)?)
        }
        Command::Tune { common, xi_values } => {
            set_threads(common.threads)?;
            let spec = common.spec()?;
            if !matches!(spec.params, Params::Tolerance(_)) {
                return Err(HarnessError::Param("tune needs --tol".into()));
            }
            let xis = if xi_values.is_empty() { vec![spec.xi] } else { xi_values };
            let report = sweep_xi(&spec, &xis)?;
            if let Some(best) = report.fastest() {
                eprintln!(
                    "fastest: xi = {} rc = {} M = {} P = {} ({:.3} s, relative error {:.2e})",
                    best.xi, best.rc, best.grid_size, best.support, best.t_total, best.rel_error
                );
            }
            common.emit(&report)
        }
        Command::Precompute(c) => {
            let spec = c.spec()?;
            spec.validate()?;
            let Some(dir) = &spec.cache_dir else {
                return Err(HarnessError::Param("precompute needs --cache-dir".into()));
            };
            let l = spec.box_size.side(spec.n);
            let cfg = match spec.params {
                Params::Explicit { rc, grid_size, support } => make_config(l, spec.xi, rc, grid_size, support)?,
                Params::Tolerance(tol) => {
                    let sys = generate_system(spec.kind, spec.n, l, spec.seed)?;
                    select_parameters(spec.kind, &SystemSummary::of(&sys), spec.xi, tol)?.config
                }
            };
            let cfg = match spec.oversampling {
                Some(sf) => cfg.with_oversampling(sf)?,
                None => cfg,
            };
            let (_, cached) = load_or_precompute(&cfg, spec.kind, Some(dir))?;
            let path = fse_cli::green_cache_path(dir, spec.kind, &cfg);
            let state = if cached { "already cached" } else { "written" };
            println!("{} ({state})", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
