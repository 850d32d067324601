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

//! Free-space harmonic and biharmonic Green's functions on FFT grids.
//!
//! Truncating `1/r` or `r` outside a radius `R` that covers every
//! point-to-point distance in the domain leaves the solution unchanged but
//! gives a Fourier transform without the `k = 0` singularity. The transform
//! is inverted once on an oversampled grid to get an effective grid Green's
//! function on `(2M̃)³` nodes, which is then applied to right-hand sides by
//! aperiodic convolution with a padding factor of two.
//!
//! The effective Green's function is real and even in each coordinate, so
//! both it and its transform are stored as the non-redundant octant of
//! `(M̃ + 1)³` values.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::fft::{even_dft_axis, CubeFft};
use crate::grid::ScalarGrid;

/// Smallest admissible oversampling factor for a cube, `1 + √3`.
pub const MIN_OVERSAMPLING: f64 = 2.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GreenKind {
    /// `1/r`, solving `-Δφ = 4πf`.
    Harmonic,
    /// `r`, solving `Δ²φ = -8πf`.
    Biharmonic,
}

impl GreenKind {
    fn tag(self) -> u8 {
        match self {
            GreenKind::Harmonic => 0,
            GreenKind::Biharmonic => 1,
        }
    }

    fn from_tag(t: u8) -> Result<Self> {
        match t {
            0 => Ok(GreenKind::Harmonic),
            1 => Ok(GreenKind::Biharmonic),
            _ => Err(Error::Format(format!("unknown green kind tag {t}"))),
        }
    }
}

/// Fourier transform of `rect(r / 2R) / r`: `8π (sin(Rk/2) / k)²`.
pub fn hhat_r(k: f64, radius: f64) -> f64 {
    let x = 0.5 * radius * k;
    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
    // 8π (R/2)² sinc²
    2.0 * PI * radius * radius * sinc * sinc
}

/// Fourier transform of `rect(r / 2R) r`:
/// `4π ((2 - R²k²) cos Rk + 2Rk sin Rk - 2) / k⁴`, with a Taylor branch
/// below `Rk = 1` where the closed form cancels catastrophically.
pub fn bhat_r(k: f64, radius: f64) -> f64 {
    let x = radius * k;
    if x < 1.0 {
        // 4π R⁴ Σ (-1)ⁿ x²ⁿ / ((2n+1)! (2n+4))
        let x2 = x * x;
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 0..10 {
            sum += term / (2 * n + 4) as f64;
            term *= -x2 / (((2 * n + 2) * (2 * n + 3)) as f64);
        }
        4.0 * PI * radius.powi(4) * sum
    } else {
        let (s, c) = x.sin_cos();
        4.0 * PI * ((2.0 - x * x) * c + 2.0 * x * s - 2.0) / (k * k * k * k)
    }
}

/// A harmonic or biharmonic Green's function truncated at `radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedGreen {
    pub kind: GreenKind,
    pub radius: f64,
}

impl TruncatedGreen {
    /// Truncation radius covering a cube of side `side`: `R = √3·side`.
    pub fn for_cube(kind: GreenKind, side: f64) -> Self {
        TruncatedGreen {
            kind,
            radius: 3f64.sqrt() * side,
        }
    }

    pub fn spectrum(&self, k: f64) -> f64 {
        match self.kind {
            GreenKind::Harmonic => hhat_r(k, self.radius),
            GreenKind::Biharmonic => bhat_r(k, self.radius),
        }
    }
}

/// Precomputed effective Green's function for a cube of side `L̃`
/// discretized with `M̃` nodes per dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct MollifiedGreen {
    kind: GreenKind,
    grid_size: usize,
    spacing: f64,
    domain_side: f64,
    radius: f64,
    /// Transform of the effective Green's function over the `(2M̃)³`
    /// wavenumber grid, octant `|n_i| ≤ M̃`.
    spectrum: Vec<f64>,
}

/// Oversampled grid size used by the precomputation: the smallest even
/// integer not below `sf·M̃`.
pub fn oversampled_size(grid_size: usize, sf: f64) -> usize {
    let target = (sf * grid_size as f64 * (1.0 - 1e-14)).ceil() as usize;
    target + target % 2
}

/// Builds the mollified Green's function for a cube of side `domain_side`
/// with `grid_size` nodes per dimension, oversampling the truncated kernel's
/// transform by `sf ≥ 1 + √3`.
pub fn precompute_mollified_green(
    kind: GreenKind,
    domain_side: f64,
    grid_size: usize,
    sf: f64,
) -> Result<MollifiedGreen> {
    if !(domain_side > 0.0) {
        return param(format!("domain side must be positive, got {domain_side}"));
    }
    if grid_size == 0 {
        return param("grid size must be positive");
    }
    if !(sf >= MIN_OVERSAMPLING * (1.0 - 1e-12)) {
        return param(format!("oversampling factor {sf} is below 1 + √3"));
    }
    let m = grid_size;
    let h = domain_side / m as f64;
    let green = TruncatedGreen::for_cube(kind, domain_side);
    let mg = oversampled_size(m, sf);
    let half = mg / 2;
    let dk = 2.0 * PI / (mg as f64 * h);

    // truncated transform on the non-redundant octant of the oversampled grid
    let q = half + 1;
    let mut values = vec![0.0; q * q * q];
    for (idx, v) in values.iter_mut().enumerate() {
        let (a, b, c) = (idx / (q * q), (idx / q) % q, idx % q);
        let k = dk * ((a * a + b * b + c * c) as f64).sqrt();
        *v = green.spectrum(k);
    }
    // inverse transform restricted to offsets |d| ≤ M̃
    let mut dims = [q; 3];
    for axis in 0..3 {
        let (next, nd) = even_dft_axis(&values, dims, axis, mg, m + 1);
        values = next;
        dims = nd;
    }
    let scale = 1.0 / (mg as f64).powi(3);
    values.iter_mut().for_each(|v| *v *= scale);

    // forward transform of the (2M̃)³ effective Green's function
    let spectrum = physical_to_spectrum(values, m);
    Ok(MollifiedGreen {
        kind,
        grid_size: m,
        spacing: h,
        domain_side,
        radius: green.radius,
        spectrum,
    })
}

fn physical_to_spectrum(mut values: Vec<f64>, m: usize) -> Vec<f64> {
    let mut dims = [m + 1; 3];
    for axis in 0..3 {
        let (next, nd) = even_dft_axis(&values, dims, axis, 2 * m, m + 1);
        values = next;
        dims = nd;
    }
    values
}

impl MollifiedGreen {
    pub fn kind(&self) -> GreenKind {
        self.kind
    }

    /// `M̃`: nodes per dimension of the solution grid.
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `L̃`.
    pub fn domain_side(&self) -> f64 {
        self.domain_side
    }

    /// Truncation radius `R`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Stored transform at wavenumber index `(n1, n2, n3)` of the `(2M̃)³`
    /// FFT grid, in standard FFT ordering (non-negative indices first).
    #[inline]
    pub fn at_fft_index(&self, i: usize, j: usize, k: usize) -> f64 {
        let m = self.grid_size;
        let fold = |i: usize| if i <= m { i } else { 2 * m - i };
        let q = m + 1;
        self.spectrum[(fold(i) * q + fold(j)) * q + fold(k)]
    }

    /// Stored transform at `k = 0`.
    pub fn zero_mode(&self) -> f64 {
        self.spectrum[0]
    }

    /// Folded index table for one axis of the `(2M̃)³` grid.
    pub(crate) fn fold_table(&self) -> Vec<usize> {
        let m = self.grid_size;
        (0..2 * m).map(|i| if i <= m { i } else { 2 * m - i }).collect()
    }

    pub(crate) fn octant(&self) -> &[f64] {
        &self.spectrum
    }

    /// The effective Green's function in physical space, octant of offsets
    /// `0 ≤ d_i ≤ M̃`. Values carry the `h³` quadrature weight, so the
    /// entry at offset `d` approximates `h³ G(h·|d|)`.
    pub fn physical_octant(&self) -> Vec<f64> {
        let m = self.grid_size;
        let mut values = physical_to_spectrum(self.spectrum.clone(), m);
        let scale = 1.0 / (2.0 * m as f64).powi(3);
        values.iter_mut().for_each(|v| *v *= scale);
        values
    }

    /// Writes the cache file: magic `FSEG`, version, kind, `L̃`, `h`, `R`,
    /// octant extents and the little-endian `f64` payload.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&[self.kind.tag()])?;
        for x in [self.domain_side, self.spacing, self.radius] {
            w.write_all(&x.to_le_bytes())?;
        }
        let q = (self.grid_size + 1) as u64;
        for _ in 0..3 {
            w.write_all(&q.to_le_bytes())?;
        }
        for x in &self.spectrum {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let version = read_u32(&mut r)?;
        if version != CACHE_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let kind = GreenKind::from_tag(tag[0])?;
        let domain_side = read_f64(&mut r)?;
        let spacing = read_f64(&mut r)?;
        let radius = read_f64(&mut r)?;
        let ext = [read_u64(&mut r)?, read_u64(&mut r)?, read_u64(&mut r)?];
        if ext[0] != ext[1] || ext[1] != ext[2] || ext[0] < 2 {
            return Err(Error::Format(format!("unexpected extents {ext:?}")));
        }
        let q = ext[0] as usize;
        let mut payload = vec![0u8; q * q * q * 8];
        r.read_exact(&mut payload)?;
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        let spectrum = payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Ok(MollifiedGreen {
            kind,
            grid_size: q - 1,
            spacing,
            domain_side,
            radius,
            spectrum,
        })
    }
}

pub const CACHE_MAGIC: &[u8; 4] = b"FSEG";
pub const CACHE_VERSION: u32 = 1;

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Solves `-Δφ = 4πf` (harmonic) or `Δ²φ = -8πf` (biharmonic) in free
/// space for `f` sampled on the `M̃³` grid the Green's function was built
/// for, returning `φ` on the same nodes.
pub fn freespace_solve(green: &MollifiedGreen, rhs: &ScalarGrid) -> Result<ScalarGrid> {
    let m = green.grid_size();
    if rhs.extents() != [m; 3] || rhs.components() != 1 {
        return Err(Error::Shape(format!(
            "right-hand side has extents {:?} × {}, expected [{m}; 3] scalar",
            rhs.extents(),
            rhs.components()
        )));
    }
    let n = 2 * m;
    let fft = CubeFft::new(n);
    let mut buf = vec![Complex64::default(); fft.len()];
    let src = rhs.component(0);
    for i in 0..m {
        for j in 0..m {
            let row = &src[(i * m + j) * m..(i * m + j + 1) * m];
            let dst = &mut buf[(i * n + j) * n..(i * n + j) * n + m];
            for (d, s) in dst.iter_mut().zip(row) {
                *d = Complex64::new(*s, 0.0);
            }
        }
    }
    fft.forward_pruned(&mut buf, m);
    let fold = green.fold_table();
    let q = m + 1;
    let spec = green.octant();
    for i in 0..n {
        for j in 0..n {
            let base = (fold[i] * q + fold[j]) * q;
            let row = &mut buf[(i * n + j) * n..(i * n + j + 1) * n];
            for (k, v) in row.iter_mut().enumerate() {
                *v *= spec[base + fold[k]];
            }
        }
    }
    fft.inverse_pruned(&mut buf, m);
    let scale = 1.0 / (n as f64).powi(3);
    let mut out = ScalarGrid::zeros([m; 3], rhs.spacing(), rhs.origin(), 1)?;
    let dst = out.component_mut(0);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                dst[(i * m + j) * m + k] = buf[(i * n + j) * n + k].re * scale;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hhat_limits_and_zeros() {
        assert_relative_eq!(hhat_r(0.0, 2.0), 8.0 * PI, max_relative = 1e-15);
        assert!(hhat_r(2.0 * PI / 3.0, 3.0).abs() < 1e-14);
        assert_relative_eq!(hhat_r(PI, 1.0), 8.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn bhat_limits() {
        assert_relative_eq!(bhat_r(0.0, 1.0), PI, max_relative = 1e-15);
        assert_relative_eq!(bhat_r(0.0, 2.0), 16.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn bhat_matches_extended_precision() {
        // 40-digit evaluations of the closed form, R = 1.7
        let cases = [
            (0.588_235_293_529_411_8, 23.430_733_315_307_099),
            (0.588_235_294_705_882_4, 23.430_733_304_495_390),
            (0.176_470_588_235_294_13, 25.977_391_088_239_607),
            (1.470_588_235_294_117_8, 11.814_730_423_209_575),
        ];
        for (k, want) in cases {
            assert_relative_eq!(bhat_r(k, 1.7), want, max_relative = 1e-14);
        }
    }

    #[test]
    fn oversampled_size_is_even_and_large_enough() {
        for m in [1usize, 7, 16, 33, 48] {
            let g = oversampled_size(m, MIN_OVERSAMPLING);
            assert_eq!(g % 2, 0);
            assert!(g as f64 >= MIN_OVERSAMPLING * m as f64);
            assert!((g as f64) < MIN_OVERSAMPLING * m as f64 + 2.0);
        }
        assert_eq!(oversampled_size(10, 4.0), 40);
    }

    #[test]
    fn rejects_small_oversampling() {
        assert!(precompute_mollified_green(GreenKind::Harmonic, 1.0, 8, 2.0).is_err());
        assert!(precompute_mollified_green(GreenKind::Harmonic, 1.0, 8, MIN_OVERSAMPLING).is_ok());
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let g = precompute_mollified_green(GreenKind::Harmonic, 1.0, 8, 3.0).unwrap();
        let rhs = ScalarGrid::zeros([8; 3], 1.0 / 8.0, [0.0; 3], 1).unwrap();
        let phi = freespace_solve(&g, &rhs).unwrap();
        assert!(phi.component(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = precompute_mollified_green(GreenKind::Harmonic, 1.0, 8, 3.0).unwrap();
        let rhs = ScalarGrid::zeros([9; 3], 1.0 / 8.0, [0.0; 3], 1).unwrap();
        assert!(matches!(freespace_solve(&g, &rhs), Err(Error::Shape(_))));
    }
}
