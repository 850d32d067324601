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

//! Fourier-space part of the Ewald split on a free-space grid.
//!
//! Sources are spread to a uniform grid with truncated Gaussians, the
//! smoothed field is convolved with the mollified Green's function using
//! FFTs padded to twice the grid, the result is scaled by the kernel's
//! Fourier tensor and the remaining Gaussian factor, and velocities are read
//! back with the same truncated Gaussians and the trapezoidal rule.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::fft::CubeFft;
use crate::greens::{precompute_mollified_green, GreenKind, MollifiedGreen, MIN_OVERSAMPLING};
use crate::grid::VectorGrid;
use crate::kernels::{self_interaction, KernelKind, SourceSystem, Vec3, Velocities};
use crate::realspace::real_space_sum;

/// Shape constant in `m = C √(πP)`.
pub const SHAPE_CONSTANT: f64 = 0.976;

/// Parameters of one spectral Ewald evaluation plus the quantities derived
/// from them.
#[derive(Clone, Debug, PartialEq)]
pub struct EwaldConfig {
    box_side: f64,
    xi: f64,
    rc: f64,
    grid_size: usize,
    support: usize,
    spacing: f64,
    support_width: f64,
    shape: f64,
    eta: f64,
    ext_nodes: usize,
    oversampling: f64,
    deterministic: bool,
}

/// Builds a configuration for a cube of side `box_side` with `grid_size`
/// intervals across it and a Gaussian support of `support` (even) nodes.
pub fn make_config(
    box_side: f64,
    xi: f64,
    rc: f64,
    grid_size: usize,
    support: usize,
) -> Result<EwaldConfig> {
    for (name, v) in [("box side", box_side), ("xi", xi), ("rc", rc)] {
        if !(v > 0.0 && v.is_finite()) {
            return param(format!("{name} must be positive and finite, got {v}"));
        }
    }
    if grid_size == 0 {
        return param("grid size must be positive");
    }
    if support < 2 || support % 2 != 0 {
        return param(format!("support must be a positive even integer, got {support}"));
    }
    let h = box_side / grid_size as f64;
    let d = h * support as f64;
    let m = SHAPE_CONSTANT * (PI * support as f64).sqrt();
    let eta = (xi * d / m).powi(2);
    let delta = if eta >= 1.0 {
        d
    } else {
        d.max((2.0 * (1.0 - eta)).sqrt() * m / xi)
    };
    let min_ext = ((delta / h) * (1.0 - 1e-12)).ceil() as usize;
    // extra padding keeps the FFT size free of large prime factors
    let ext_nodes = next_smooth(grid_size + min_ext) - grid_size;
    if support > grid_size + ext_nodes {
        return param(format!(
            "support {support} exceeds the extended grid of {} nodes",
            grid_size + ext_nodes
        ));
    }
    Ok(EwaldConfig {
        box_side,
        xi,
        rc,
        grid_size,
        support,
        spacing: h,
        support_width: d,
        shape: m,
        eta,
        ext_nodes,
        oversampling: MIN_OVERSAMPLING,
        deterministic: false,
    })
}

/// Smallest integer `≥ n` with no prime factor above 7.
pub fn next_smooth(n: usize) -> usize {
    (n.max(1)..)
        .find(|&c| {
            let mut r = c;
            for p in [2, 3, 5, 7] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("smooth numbers are unbounded")
}

impl EwaldConfig {
    /// Oversampling factor used when precomputing Green's functions.
    pub fn with_oversampling(mut self, sf: f64) -> Result<Self> {
        if !(sf >= MIN_OVERSAMPLING * (1.0 - 1e-12)) {
            return param(format!("oversampling factor {sf} is below 1 + √3"));
        }
        self.oversampling = sf;
        Ok(self)
    }

    /// Forces sequential reductions so results are bitwise reproducible.
    pub fn with_deterministic(mut self, on: bool) -> Self {
        self.deterministic = on;
        self
    }

    pub fn box_side(&self) -> f64 {
        self.box_side
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn rc(&self) -> f64 {
        self.rc
    }

    /// `M`: grid intervals across the original box.
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// `P`: Gaussian support in grid nodes per dimension.
    pub fn support(&self) -> usize {
        self.support
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `d = hP`.
    pub fn support_width(&self) -> f64 {
        self.support_width
    }

    /// Gaussian shape parameter `m`.
    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `δL`, a whole number of grid intervals.
    pub fn extension(&self) -> f64 {
        self.ext_nodes as f64 * self.spacing
    }

    /// `M̃ = M + δL/h`.
    pub fn ext_grid_size(&self) -> usize {
        self.grid_size + self.ext_nodes
    }

    /// `L̃ = M̃h`.
    pub fn ext_side(&self) -> f64 {
        self.ext_grid_size() as f64 * self.spacing
    }

    /// Largest resolved wavenumber `π/h`.
    pub fn k_inf(&self) -> f64 {
        PI / self.spacing
    }

    /// Truncation radius `R = √3 L̃`.
    pub fn radius(&self) -> f64 {
        3f64.sqrt() * self.ext_side()
    }

    pub fn oversampling(&self) -> f64 {
        self.oversampling
    }

    pub fn deterministic(&self) -> bool {
        self.deterministic
    }

    /// Lower corner of the extended grid, `-δL/2` in each coordinate.
    pub fn grid_origin(&self) -> Vec3 {
        [-0.5 * self.extension(); 3]
    }

    /// Exponent `α = 2ξ²/η` of the spreading Gaussian.
    pub fn gaussian_exponent(&self) -> f64 {
        2.0 * self.xi * self.xi / self.eta
    }

    /// Same configuration with a different Ewald parameter, keeping the grid.
    pub fn with_xi(&self, xi: f64) -> Result<Self> {
        let cfg = make_config(self.box_side, xi, self.rc, self.grid_size, self.support)?;
        Ok(cfg
            .with_oversampling(self.oversampling)?
            .with_deterministic(self.deterministic))
    }

    /// Precomputes the Green's function this configuration needs for `kind`.
    pub fn precompute_green(&self, kind: KernelKind) -> Result<MollifiedGreen> {
        precompute_mollified_green(
            green_kind(kind),
            self.ext_side(),
            self.ext_grid_size(),
            self.oversampling,
        )
    }

    fn check_green(&self, kind: KernelKind, green: &MollifiedGreen) -> Result<()> {
        let ok = green.kind() == green_kind(kind)
            && green.grid_size() == self.ext_grid_size()
            && (green.spacing() - self.spacing).abs() <= 1e-12 * self.spacing;
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "green function ({:?}, {} nodes, h = {}) does not match {kind} with {} nodes, h = {}",
                green.kind(),
                green.grid_size(),
                green.spacing(),
                self.ext_grid_size(),
                self.spacing
            )))
        }
    }

    fn check_targets(&self, targets: &[Vec3]) -> Result<()> {
        let l = self.box_side;
        match targets.iter().position(|x| x.iter().any(|&c| !(0.0..=l).contains(&c))) {
            Some(i) => param(format!("target {i} at {:?} lies outside [0, {l}]³", targets[i])),
            None => Ok(()),
        }
    }

    /// First node index and per-dimension Gaussian weights for a point.
    fn window(&self, x: &Vec3, table: &[f64]) -> ([usize; 3], [Vec<f64>; 3]) {
        let p = self.support;
        let h = self.spacing;
        let alpha = self.gaussian_exponent();
        let x0 = self.grid_origin()[0];
        let mut start = [0; 3];
        let mut w: [Vec<f64>; 3] = Default::default();
        for d in 0..3 {
            let t = (x[d] - x0) / h;
            let s = (t.ceil() as usize - 1) + 1 - p / 2;
            start[d] = s;
            // e^{-α(δ - jh)²} = e^{-αδ²} (e^{2αδh})^j e^{-αh²j²}
            let delta = x[d] - (x0 + s as f64 * h);
            let step = (2.0 * alpha * delta * h).exp();
            let mut pow = (-alpha * delta * delta).exp();
            w[d] = table
                .iter()
                .map(|&t| {
                    let v = pow * t;
                    pow *= step;
                    v
                })
                .collect();
        }
        (start, w)
    }

    fn square_table(&self) -> Vec<f64> {
        let ah2 = self.gaussian_exponent() * self.spacing * self.spacing;
        (0..self.support).map(|j| (-ah2 * (j * j) as f64).exp()).collect()
    }

    fn gaussian_norm(&self) -> f64 {
        (self.gaussian_exponent() / PI).powf(1.5)
    }
}

/// Green's function needed by each kernel's Fourier tensor.
pub fn green_kind(kind: KernelKind) -> GreenKind {
    match kind {
        KernelKind::Stokeslet | KernelKind::Stresslet => GreenKind::Biharmonic,
        KernelKind::Rotlet => GreenKind::Harmonic,
    }
}

fn empty_grid(cfg: &EwaldConfig, components: usize) -> Result<VectorGrid> {
    VectorGrid::zeros(
        [cfg.ext_grid_size(); 3],
        cfg.spacing,
        cfg.grid_origin(),
        components,
    )
}

/// Spreads every source to the extended grid with a truncated Gaussian of
/// `P³` nodes, using fast Gaussian gridding for the exponentials.
pub fn spread(system: &SourceSystem, cfg: &EwaldConfig, kind: KernelKind) -> Result<VectorGrid> {
    system.check_kind(kind)?;
    cfg.check_targets(system.positions())?;
    let arity = kind.arity();
    let mut grid = empty_grid(cfg, arity)?;
    let table = cfg.square_table();
    let norm = cfg.gaussian_norm();
    let n = cfg.ext_grid_size();
    let stride = n * n * n;
    let p = cfg.support;
    let add = |data: &mut [f64], idx: usize| {
        let (start, w) = cfg.window(&system.positions()[idx], &table);
        let f = system.strengths()[idx].components();
        for a in 0..p {
            let wa = norm * w[0][a];
            for b in 0..p {
                let wab = wa * w[1][b];
                let row = ((start[0] + a) * n + start[1] + b) * n + start[2];
                for (c, fc) in f.iter().enumerate() {
                    let dst = &mut data[c * stride + row..c * stride + row + p];
                    let s = wab * fc;
                    for (v, wc) in dst.iter_mut().zip(&w[2]) {
                        *v += s * wc;
                    }
                }
            }
        }
    };
    if cfg.deterministic {
        let data = grid.data_mut();
        for i in 0..system.len() {
            add(data, i);
        }
    } else {
        let len = stride * arity;
        let sum = (0..system.len())
            .into_par_iter()
            .fold(
                || vec![0.0; len],
                |mut acc, i| {
                    add(&mut acc, i);
                    acc
                },
            )
            .reduce_with(|mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            });
        if let Some(sum) = sum {
            grid.data_mut().copy_from_slice(&sum);
        }
    }
    Ok(grid)
}

/// Spreading with one exponential per grid node; reference for [`spread`].
pub fn spread_direct(system: &SourceSystem, cfg: &EwaldConfig, kind: KernelKind) -> Result<VectorGrid> {
    system.check_kind(kind)?;
    cfg.check_targets(system.positions())?;
    let mut grid = empty_grid(cfg, kind.arity())?;
    let alpha = cfg.gaussian_exponent();
    let norm = cfg.gaussian_norm();
    let table = vec![1.0; cfg.support];
    for (x, f) in system.positions().iter().zip(system.strengths()) {
        let (start, _) = cfg.window(x, &table);
        for a in 0..cfg.support {
            for b in 0..cfg.support {
                for c in 0..cfg.support {
                    let (i, j, k) = (start[0] + a, start[1] + b, start[2] + c);
                    let node = grid.node_position(i, j, k);
                    let r2: f64 = (0..3).map(|d| (x[d] - node[d]).powi(2)).sum();
                    let g = norm * (-alpha * r2).exp();
                    let idx = grid.index(i, j, k);
                    for (comp, fc) in f.components().iter().enumerate() {
                        grid.component_mut(comp)[idx] += g * fc;
                    }
                }
            }
        }
    }
    Ok(grid)
}

/// Trapezoidal quadrature of the smoothed field against the truncated
/// Gaussian centred at each target: `u(x) = h³ Σ w(node) g(x - node)`.
pub fn quadrature(field: &VectorGrid, cfg: &EwaldConfig, targets: &[Vec3]) -> Result<Velocities> {
    cfg.check_targets(targets)?;
    let n = cfg.ext_grid_size();
    if field.extents() != [n; 3] || field.components() != 3 {
        return Err(Error::Shape(format!(
            "field has extents {:?} × {}, expected [{n}; 3] × 3",
            field.extents(),
            field.components()
        )));
    }
    let table = cfg.square_table();
    let scale = cfg.gaussian_norm() * cfg.spacing.powi(3);
    let p = cfg.support;
    let values = targets
        .par_iter()
        .map(|x| {
            let (start, w) = cfg.window(x, &table);
            let mut u = [0.0; 3];
            for (c, uc) in u.iter_mut().enumerate() {
                let comp = field.component(c);
                let mut acc = 0.0;
                for a in 0..p {
                    for b in 0..p {
                        let row = ((start[0] + a) * n + start[1] + b) * n + start[2];
                        let line: f64 = comp[row..row + p].iter().zip(&w[2]).map(|(v, wc)| v * wc).sum();
                        acc += w[0][a] * w[1][b] * line;
                    }
                }
                *uc = scale * acc;
            }
            u
        })
        .collect();
    Ok(Velocities { values })
}

/// Field in wavenumber space on the padded `(2M̃)³` grid, standard FFT
/// ordering, last index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierField {
    size: usize,
    spacing: f64,
    components: Vec<Vec<Complex64>>,
}

impl FourierField {
    /// Zero-pads each component of `grid` to twice its size and transforms.
    pub fn forward(grid: &VectorGrid) -> Result<Self> {
        let [m, m1, m2] = grid.extents();
        if m != m1 || m != m2 {
            return Err(Error::Shape(format!("grid must be cubic, got {:?}", grid.extents())));
        }
        let fft = CubeFft::new(2 * m);
        let components = (0..grid.components())
            .map(|c| {
                let mut buf = vec![Complex64::default(); fft.len()];
                pad_into(&mut buf, grid.component(c), m);
                fft.forward_pruned(&mut buf, m);
                buf
            })
            .collect();
        Ok(FourierField {
            size: 2 * m,
            spacing: grid.spacing(),
            components,
        })
    }

    /// Inverse transform keeping the original `M̃³` window.
    pub fn inverse(&self, origin: Vec3) -> Result<VectorGrid> {
        let n = self.size;
        let m = n / 2;
        let fft = CubeFft::new(n);
        let mut out = VectorGrid::zeros([m; 3], self.spacing, origin, self.components.len())?;
        for (c, comp) in self.components.iter().enumerate() {
            let mut buf = comp.clone();
            fft.inverse_pruned(&mut buf, m);
            crop_into(out.component_mut(c), &buf, m);
        }
        Ok(out)
    }

    /// Padded grid size `2M̃`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.components[c]
    }

    pub fn get(&self, c: usize, i: usize, j: usize, k: usize) -> Complex64 {
        self.components[c][(i * self.size + j) * self.size + k]
    }

    /// Wavenumber of index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> f64 {
        axis_wavenumbers(self.size, self.spacing)[i]
    }
}

fn pad_into(buf: &mut [Complex64], src: &[f64], m: usize) {
    let n = 2 * m;
    for i in 0..m {
        for j in 0..m {
            let row = &src[(i * m + j) * m..(i * m + j + 1) * m];
            let dst = &mut buf[(i * n + j) * n..(i * n + j) * n + m];
            for (d, s) in dst.iter_mut().zip(row) {
                *d = Complex64::new(*s, 0.0);
            }
        }
    }
}

fn crop_into(dst: &mut [f64], buf: &[Complex64], m: usize) {
    let n = 2 * m;
    let scale = 1.0 / (n as f64).powi(3);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                dst[(i * m + j) * m + k] = buf[(i * n + j) * n + k].re * scale;
            }
        }
    }
}

fn axis_wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|i| if i <= n / 2 { i as f64 } else { i as f64 - n as f64 } * dk)
        .collect()
}

/// Tables for the pointwise multiplication in wavenumber space.
struct Scaling<'a> {
    kind: KernelKind,
    n: usize,
    k: Vec<f64>,
    /// Per-axis factor of `e^{-(1-η)k²/4ξ²}`.
    decay: Vec<f64>,
    fold: Vec<usize>,
    green: &'a [f64],
    q: usize,
    inv_4xi2: f64,
}

impl<'a> Scaling<'a> {
    fn new(cfg: &EwaldConfig, kind: KernelKind, green: &'a MollifiedGreen) -> Self {
        let n = 2 * cfg.ext_grid_size();
        let k = axis_wavenumbers(n, cfg.spacing);
        let inv_4xi2 = 0.25 / (cfg.xi * cfg.xi);
        let decay = k
            .iter()
            .map(|kk| (-(1.0 - cfg.eta) * kk * kk * inv_4xi2).exp())
            .collect();
        Scaling {
            kind,
            n,
            k,
            decay,
            fold: green.fold_table(),
            green: green.octant(),
            q: green.grid_size() + 1,
            inv_4xi2,
        }
    }

    /// Adds the contribution of input component `c` (already transformed)
    /// to the three output components over one plane `i`.
    fn accumulate_plane(&self, i: usize, c: usize, src: &[Complex64], out: [&mut [Complex64]; 3]) {
        let n = self.n;
        let q = self.q;
        let [o0, o1, o2] = out;
        for j in 0..n {
            let base = (self.fold[i] * q + self.fold[j]) * q;
            let dij = self.decay[i] * self.decay[j];
            for l in 0..n {
                let kv = [self.k[i], self.k[j], self.k[l]];
                let g = self.green[base + self.fold[l]] * dij * self.decay[l];
                let coef = self.coefficients(&kv, g, c);
                let idx = j * n + l;
                let v = src[idx];
                o0[idx] += coef[0] * v;
                o1[idx] += coef[1] * v;
                o2[idx] += coef[2] * v;
            }
        }
    }

    /// Column `c` of the kernel's Fourier tensor times `g`.
    #[inline]
    fn coefficients(&self, k: &Vec3, g: f64, c: usize) -> [Complex64; 3] {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        match self.kind {
            KernelKind::Stokeslet => {
                // -(k²δ - kk)(1 + k²/4ξ²) B̂
                let s = -g * (1.0 + k2 * self.inv_4xi2);
                let mut col = [0.0; 3];
                for (j, v) in col.iter_mut().enumerate() {
                    let delta = if j == c { k2 } else { 0.0 };
                    *v = s * (delta - k[j] * k[c]);
                }
                col.map(|v| Complex64::new(v, 0.0))
            }
            KernelKind::Stresslet => {
                // -i [(δ_jl k_m + δ_lm k_j + δ_mj k_l) k² - 2 k_j k_l k_m] (1 + k²/4ξ²) B̂
                let (l, m) = (c / 3, c % 3);
                let s = -g * (1.0 + k2 * self.inv_4xi2);
                let mut col = [Complex64::default(); 3];
                for (j, v) in col.iter_mut().enumerate() {
                    let mut t = 0.0;
                    if j == l {
                        t += k[m];
                    }
                    if l == m {
                        t += k[j];
                    }
                    if m == j {
                        t += k[l];
                    }
                    let val = t * k2 - 2.0 * k[j] * k[l] * k[m];
                    *v = Complex64::new(0.0, s * val);
                }
                col
            }
            KernelKind::Rotlet => {
                // -i ε_jcm k_m Ĥ
                let mut col = [Complex64::default(); 3];
                let (a, b) = ((c + 1) % 3, (c + 2) % 3);
                // ε_{b c a} = +1, ε_{a c b} = -1
                col[b] = Complex64::new(0.0, -g * k[a]);
                col[a] = Complex64::new(0.0, g * k[b]);
                col
            }
        }
    }
}

fn scale_into(
    scaling: &Scaling,
    c: usize,
    src: &[Complex64],
    out: &mut [Vec<Complex64>; 3],
) {
    let plane = scaling.n * scaling.n;
    let [o0, o1, o2] = out;
    src.par_chunks(plane)
        .zip(o0.par_chunks_mut(plane))
        .zip(o1.par_chunks_mut(plane))
        .zip(o2.par_chunks_mut(plane))
        .enumerate()
        .for_each(|(i, (((s, a), b), d))| scaling.accumulate_plane(i, c, s, [a, b, d]));
}

/// Applies `e^{-(1-η)k²/4ξ²} A(k)` to a transformed spread field, with the
/// mollified Green's function in place of `B̂` or `Ĥ`.
pub fn kspace_scale(
    ghat: &FourierField,
    cfg: &EwaldConfig,
    kind: KernelKind,
    green: &MollifiedGreen,
) -> Result<FourierField> {
    cfg.check_green(kind, green)?;
    if ghat.components() != kind.arity() || ghat.size != 2 * cfg.ext_grid_size() {
        return Err(Error::Shape(format!(
            "{kind} expects {} components on a {}³ grid, got {} on {}³",
            kind.arity(),
            2 * cfg.ext_grid_size(),
            ghat.components(),
            ghat.size
        )));
    }
    let scaling = Scaling::new(cfg, kind, green);
    let len = ghat.size.pow(3);
    let mut out: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::default(); len]);
    for (c, comp) in ghat.components.iter().enumerate() {
        scale_into(&scaling, c, comp, &mut out);
    }
    Ok(FourierField {
        size: ghat.size,
        spacing: ghat.spacing,
        components: out.into(),
    })
}

/// Wall-clock time spent in each stage of [`fourier_sum_timed`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FourierTimings {
    pub spread: Duration,
    pub fft: Duration,
    pub scale: Duration,
    pub quadrature: Duration,
}

/// Fourier-space velocities `u^F` at `targets`.
pub fn fourier_sum(
    system: &SourceSystem,
    cfg: &EwaldConfig,
    kind: KernelKind,
    targets: &[Vec3],
    green: &MollifiedGreen,
) -> Result<Velocities> {
    fourier_sum_timed(system, cfg, kind, targets, green).map(|(u, _)| u)
}

/// [`fourier_sum`] with per-stage timings. Transforms one input component
/// at a time into three accumulated outputs to bound memory.
pub fn fourier_sum_timed(
    system: &SourceSystem,
    cfg: &EwaldConfig,
    kind: KernelKind,
    targets: &[Vec3],
    green: &MollifiedGreen,
) -> Result<(Velocities, FourierTimings)> {
    cfg.check_green(kind, green)?;
    cfg.check_targets(targets)?;
    let mut t = FourierTimings::default();

    let clock = Instant::now();
    let grid = spread(system, cfg, kind)?;
    t.spread = clock.elapsed();

    let m = cfg.ext_grid_size();
    let fft = CubeFft::new(2 * m);
    let scaling = Scaling::new(cfg, kind, green);
    let mut out: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::default(); fft.len()]);
    let mut work = vec![Complex64::default(); fft.len()];
    for c in 0..kind.arity() {
        let clock = Instant::now();
        work.iter_mut().for_each(|v| *v = Complex64::default());
        pad_into(&mut work, grid.component(c), m);
        fft.forward_pruned(&mut work, m);
        t.fft += clock.elapsed();
        let clock = Instant::now();
        scale_into(&scaling, c, &work, &mut out);
        t.scale += clock.elapsed();
    }
    drop(work);
    let clock = Instant::now();
    let mut field = empty_grid(cfg, 3)?;
    for (c, buf) in out.iter_mut().enumerate() {
        fft.inverse_pruned(buf, m);
        crop_into(field.component_mut(c), buf, m);
    }
    drop(out);
    t.fft += clock.elapsed();

    let clock = Instant::now();
    let u = quadrature(&field, cfg, targets)?;
    t.quadrature = clock.elapsed();
    Ok((u, t))
}

/// Full Ewald sum `u^R + u^F + u^self`. The self term is applied when the
/// targets are exactly the source positions.
pub fn total_sum(
    system: &SourceSystem,
    kind: KernelKind,
    cfg: &EwaldConfig,
    targets: &[Vec3],
    green: &MollifiedGreen,
) -> Result<Velocities> {
    if (system.box_side() - cfg.box_side).abs() > 1e-12 * cfg.box_side {
        return param(format!(
            "system box side {} does not match configuration {}",
            system.box_side(),
            cfg.box_side
        ));
    }
    let mut u = real_space_sum(system, kind, cfg.xi, cfg.rc, targets)?;
    let uf = fourier_sum(system, cfg, kind, targets, green)?;
    u.add_assign(&uf);
    if targets == system.positions() {
        for (v, f) in u.values.iter_mut().zip(system.strengths()) {
            let s = self_interaction(cfg.xi, f, kind);
            for d in 0..3 {
                v[d] += s[d];
            }
        }
    }
    Ok(u)
}
