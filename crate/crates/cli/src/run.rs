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

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use fse_core::estimates::reference_magnitude;
use fse_core::ewald::green_kind;
use fse_core::{
    direct_sum, fourier_sum_timed, make_config, real_space_sum, rms_error, select_parameters,
    self_interaction, ErrorBudget, EwaldConfig, FourierTimings, KernelKind, MollifiedGreen,
    SourceSystem, SystemSummary, Velocities,
};

use crate::report::{ErrorSource, RunRecord, RunReport, CSV_SCHEMA};
use crate::spec::{Params, RunSpec, Sweep};
use crate::system::generate_system;
use crate::{param, Result};

/// Cache file for the Green's function a configuration needs.
pub fn green_cache_path(dir: &Path, kind: KernelKind, cfg: &EwaldConfig) -> PathBuf {
    let g = format!("{:?}", green_kind(kind)).to_lowercase();
    dir.join(format!(
        "green-{g}-m{}-l{:.15e}-sf{:.15e}.fseg",
        cfg.ext_grid_size(),
        cfg.ext_side(),
        cfg.oversampling()
    ))
}

/// Loads the Green's function from `cache_dir` when a matching file exists,
/// otherwise computes it (and stores it when a directory is given). The
/// flag tells whether it came from the cache.
pub fn load_or_precompute(
    cfg: &EwaldConfig,
    kind: KernelKind,
    cache_dir: Option<&Path>,
) -> Result<(MollifiedGreen, bool)> {
    let Some(dir) = cache_dir else {
        return Ok((cfg.precompute_green(kind)?, false));
    };
    let path = green_cache_path(dir, kind, cfg);
    if path.exists() {
        let g = MollifiedGreen::load(&path)?;
        let matches = g.kind() == green_kind(kind)
            && g.grid_size() == cfg.ext_grid_size()
            && (g.domain_side() - cfg.ext_side()).abs() <= 1e-12 * cfg.ext_side();
        if matches {
            return Ok((g, true));
        }
    }
    let g = cfg.precompute_green(kind)?;
    std::fs::create_dir_all(dir)?;
    g.save(&path)?;
    Ok((g, false))
}

#[derive(Clone, Copy, Debug, Default)]
struct Overrides {
    rc: Option<f64>,
    grid_size: Option<usize>,
    support: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Point {
    n: usize,
    box_side: f64,
    xi: f64,
    overrides: Overrides,
}

#[derive(Clone, Copy, Debug, Default)]
struct Stages {
    realspace: Duration,
    fourier: FourierTimings,
    total: Duration,
}

/// Executes `spec`, sweeping if asked, and writes the report when the spec
/// names an output path.
pub fn run(spec: &RunSpec) -> Result<RunReport> {
    spec.validate()?;
    let base = Point {
        n: spec.n,
        box_side: spec.box_size.side(spec.n),
        xi: spec.xi,
        overrides: Overrides::default(),
    };
    let with = |f: &dyn Fn(&mut Point)| {
        let mut p = base;
        f(&mut p);
        p
    };
    let points: Vec<Point> = match &spec.sweep {
        Sweep::None => vec![base],
        Sweep::Support(v) => v.iter().map(|&p| with(&|q| q.overrides.support = Some(p))).collect(),
        Sweep::Grid(v) => v.iter().map(|&m| with(&|q| q.overrides.grid_size = Some(m))).collect(),
        Sweep::Cutoff(v) => v.iter().map(|&rc| with(&|q| q.overrides.rc = Some(rc))).collect(),
        Sweep::Points(v) => v
            .iter()
            .map(|&n| {
                with(&|q| {
                    q.n = n;
                    q.box_side = spec.box_size.side(n);
                })
            })
            .collect(),
        Sweep::Xi(v) => match spec.params {
            Params::Tolerance(_) => v.iter().map(|&xi| with(&|q| q.xi = xi)).collect(),
            Params::Explicit { .. } => return sweep_xi(spec, v),
        },
    };
    finish(spec, run_points(spec, &points)?)
}

/// Reruns `spec` over `xi_values`, holding `ξ·rc` and `M/ξ` at their values
/// for the first entry. Under a tolerance the baseline `(rc, M, P)` is
/// tuned at `xi_values[0]`.
pub fn sweep_xi(spec: &RunSpec, xi_values: &[f64]) -> Result<RunReport> {
    let mut base_spec = spec.clone();
    base_spec.sweep = Sweep::None;
    base_spec.validate()?;
    let Some(&xi0) = xi_values.first() else {
        return param("xi sweep needs at least one value");
    };
    if xi_values.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return param("xi values must be positive and finite");
    }
    let n = spec.n;
    let box_side = spec.box_size.side(n);
    let (rc0, m0, p0) = match spec.params {
        Params::Explicit { rc, grid_size, support } => (rc, grid_size, support),
        Params::Tolerance(tol) => {
            let sys = generate_system(spec.kind, n, box_side, spec.seed)?;
            let sel = select_parameters(spec.kind, &SystemSummary::of(&sys), xi0, tol)?;
            (sel.config.rc(), sel.config.grid_size(), sel.config.support())
        }
    };
    let points: Vec<Point> = xi_values
        .iter()
        .map(|&xi| {
            let s = xi / xi0;
            Point {
                n,
                box_side,
                xi,
                overrides: Overrides {
                    rc: Some(rc0 / s),
                    grid_size: Some(((m0 as f64 * s).round() as usize).max(1)),
                    support: Some(p0),
                },
            }
        })
        .collect();
    finish(spec, run_points(spec, &points)?)
}

fn finish(spec: &RunSpec, report: RunReport) -> Result<RunReport> {
    if let Some(path) = &spec.output {
        report.save(path)?;
    }
    Ok(report)
}

struct Resolved {
    config: EwaldConfig,
    tol: Option<f64>,
    recommend_direct: bool,
}

fn resolve(spec: &RunSpec, point: &Point, summary: &SystemSummary) -> Result<Resolved> {
    let (rc, m, p, tol, direct) = match spec.params {
        Params::Explicit { rc, grid_size, support } => (rc, grid_size, support, None, false),
        Params::Tolerance(tol) => {
            let sel = select_parameters(spec.kind, summary, point.xi, tol)?;
            let c = &sel.config;
            (c.rc(), c.grid_size(), c.support(), Some(tol), sel.recommend_direct)
        }
    };
    let o = point.overrides;
    let mut config = make_config(
        point.box_side,
        point.xi,
        o.rc.unwrap_or(rc),
        o.grid_size.unwrap_or(m),
        o.support.unwrap_or(p),
    )?
    .with_deterministic(spec.deterministic);
    if let Some(sf) = spec.oversampling {
        config = config.with_oversampling(sf)?;
    }
    Ok(Resolved {
        config,
        tol,
        recommend_direct: direct,
    })
}

fn evaluate(
    system: &SourceSystem,
    kind: KernelKind,
    cfg: &EwaldConfig,
    green: &MollifiedGreen,
) -> Result<(Velocities, Stages)> {
    let start = Instant::now();
    let x = system.positions();
    let clock = Instant::now();
    let ur = real_space_sum(system, kind, cfg.xi(), cfg.rc(), x)?;
    let realspace = clock.elapsed();
    let (uf, fourier) = fourier_sum_timed(system, cfg, kind, x, green)?;
    let mut u = &ur + &uf;
    for (v, f) in u.values.iter_mut().zip(system.strengths()) {
        let s = self_interaction(cfg.xi(), f, kind);
        for d in 0..3 {
            v[d] += s[d];
        }
    }
    let stages = Stages {
        realspace,
        fourier,
        total: start.elapsed(),
    };
    Ok((u, stages))
}

type GreenKey = (String, usize, u64, u64);

fn run_points(spec: &RunSpec, points: &[Point]) -> Result<RunReport> {
    let kind = spec.kind;
    let mut system: Option<(usize, u64, SourceSystem, Option<Velocities>)> = None;
    let mut greens: HashMap<GreenKey, (MollifiedGreen, Duration, bool)> = HashMap::new();
    let mut report = RunReport::default();
    for point in points {
        let fresh = !matches!(&system, Some((n, l, _, _)) if *n == point.n && *l == point.box_side.to_bits());
        if fresh {
            let sys = generate_system(kind, point.n, point.box_side, spec.seed)?;
            system = Some((point.n, point.box_side.to_bits(), sys, None));
        }
        let (_, _, sys, oracle) = system.as_mut().expect("system was just generated");
        let summary = SystemSummary::of(sys);
        let resolved = resolve(spec, point, &summary)?;
        let cfg = &resolved.config;

        let key = (
            format!("{:?}", green_kind(kind)),
            cfg.ext_grid_size(),
            cfg.ext_side().to_bits(),
            cfg.oversampling().to_bits(),
        );
        if !greens.contains_key(&key) {
            // one Green's function at a time keeps memory flat over M sweeps
            greens.clear();
            let clock = Instant::now();
            let (g, cached) = load_or_precompute(cfg, kind, spec.cache_dir.as_deref())?;
            greens.insert(key.clone(), (g, clock.elapsed(), cached));
        }
        let (green, t_precompute, green_cached) = &greens[&key];

        if spec.warmup {
            evaluate(sys, kind, cfg, green)?;
        }
        let mut runs = Vec::with_capacity(spec.repeats);
        for _ in 0..spec.repeats {
            runs.push(evaluate(sys, kind, cfg, green)?);
        }
        runs.sort_by_key(|(_, s)| s.total);
        let (u, stages) = runs.swap_remove(runs.len() / 2);

        let budget = ErrorBudget::new(kind, cfg, summary.q);
        let predicted = budget.predicted_total_rms();
        let (rel_error, abs_error, source) = if point.n <= spec.oracle_cap {
            if oracle.is_none() {
                *oracle = Some(direct_sum(sys, kind, sys.positions(), true)?);
            }
            let r = oracle.as_ref().expect("oracle was just computed");
            (rms_error(&u, r, true)?, rms_error(&u, r, false)?, ErrorSource::Oracle)
        } else {
            (predicted / reference_magnitude(kind, &summary), predicted, ErrorSource::Predicted)
        };

        let secs = |d: Duration| d.as_secs_f64();
        report.records.push(RunRecord {
            schema: CSV_SCHEMA,
            kernel: kind.name().to_string(),
            n: point.n,
            box_side: point.box_side,
            seed: spec.seed,
            xi: cfg.xi(),
            rc: cfg.rc(),
            grid_size: cfg.grid_size(),
            support: cfg.support(),
            ext_grid_size: cfg.ext_grid_size(),
            eta: cfg.eta(),
            oversampling: cfg.oversampling(),
            tol: resolved.tol,
            rel_error,
            abs_error,
            error_source: source,
            predicted_rms: predicted,
            recommend_direct: resolved.recommend_direct,
            deterministic: spec.deterministic,
            green_cached: *green_cached,
            t_precompute: secs(*t_precompute),
            t_spread: secs(stages.fourier.spread),
            t_fft: secs(stages.fourier.fft),
            t_scale: secs(stages.fourier.scale),
            t_quadrature: secs(stages.fourier.quadrature),
            t_realspace: secs(stages.realspace),
            t_total: secs(stages.total),
            t_total_with_precompute: secs(stages.total + *t_precompute),
        });
    }
    Ok(report)
}
