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

//! Free-space Stokes Green's functions and direct summation.
//!
//! Three kernels are supported, all acting on bare source strengths (any
//! `8πμ` viscosity scaling belongs to the caller):
//!
//! * stokeslet `S_jl(r) = δ_jl / r + r_j r_l / r³`, acting on a force vector,
//! * stresslet `T_jlm(r) = -6 r_j r_l r_m / r⁵`, acting on a 3×3 tensor `f_lm`,
//! * rotlet `Ω_jl(r) = ε_jlm r_m / r³`, acting on a torque vector.
//!
//! The velocity at a target is `u_j = G_jl f_l` (or `T_jlm f_lm`).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Stokeslet,
    Stresslet,
    Rotlet,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Stokeslet, KernelKind::Stresslet, KernelKind::Rotlet];

    /// Number of strength components per source.
    pub fn arity(self) -> usize {
        match self {
            KernelKind::Stresslet => 9,
            KernelKind::Stokeslet | KernelKind::Rotlet => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Stokeslet => "stokeslet",
            KernelKind::Stresslet => "stresslet",
            KernelKind::Rotlet => "rotlet",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stokeslet" => Ok(KernelKind::Stokeslet),
            "stresslet" => Ok(KernelKind::Stresslet),
            "rotlet" => Ok(KernelKind::Rotlet),
            other => Err(Error::Parameter(format!("unknown kernel '{other}'"))),
        }
    }
}

/// Strength carried by one source.
///
/// Stokeslets and rotlets carry a vector, stresslets a full 3×3 tensor
/// `f_lm` (row `l`, column `m`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Strength {
    Vector(Vec3),
    Tensor([[f64; 3]; 3]),
}

impl Strength {
    /// Stresslet strength `f_lm = n_l q_m` from a normal `n` and density `q`.
    pub fn from_pair(q: Vec3, n: Vec3) -> Self {
        let mut t = [[0.0; 3]; 3];
        for l in 0..3 {
            for m in 0..3 {
                t[l][m] = n[l] * q[m];
            }
        }
        Strength::Tensor(t)
    }

    pub fn arity(&self) -> usize {
        match self {
            Strength::Vector(_) => 3,
            Strength::Tensor(_) => 9,
        }
    }

    /// Components in row-major order.
    pub fn components(&self) -> &[f64] {
        match self {
            Strength::Vector(v) => v.as_slice(),
            Strength::Tensor(t) => t.as_flattened(),
        }
    }

    pub fn from_components(kind: KernelKind, c: &[f64]) -> Result<Self> {
        if c.len() != kind.arity() {
            return Err(Error::Shape(format!(
                "{kind} strength needs {} components, got {}",
                kind.arity(),
                c.len()
            )));
        }
        Ok(match kind {
            KernelKind::Stresslet => Strength::Tensor([
                [c[0], c[1], c[2]],
                [c[3], c[4], c[5]],
                [c[6], c[7], c[8]],
            ]),
            _ => Strength::Vector([c[0], c[1], c[2]]),
        })
    }

    /// Sum of squared components: `|f|²` or `Σ f_lm²`.
    pub fn norm_sq(&self) -> f64 {
        self.components().iter().map(|x| x * x).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Strength::Vector(v) => Strength::Vector(v.map(|x| x * c)),
            Strength::Tensor(t) => Strength::Tensor(t.map(|row| row.map(|x| x * c))),
        }
    }

    fn check(&self, kind: KernelKind) -> Result<()> {
        if self.arity() != kind.arity() {
            return Err(Error::Shape(format!(
                "{kind} expects {} strength components, got {}",
                kind.arity(),
                self.arity()
            )));
        }
        if self.components().iter().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("non-finite strength component".into()));
        }
        Ok(())
    }
}

/// N point sources with strengths inside the cube `[0, L]³`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSystem {
    positions: Vec<Vec3>,
    strengths: Vec<Strength>,
    box_side: f64,
}

impl SourceSystem {
    pub fn new(positions: Vec<Vec3>, strengths: Vec<Strength>, box_side: f64) -> Result<Self> {
        if !(box_side > 0.0 && box_side.is_finite()) {
            return Err(Error::Parameter(format!("box side must be positive, got {box_side}")));
        }
        if positions.is_empty() {
            return Err(Error::Parameter("a source system needs at least one point".into()));
        }
        if positions.len() != strengths.len() {
            return Err(Error::Shape(format!(
                "{} positions but {} strengths",
                positions.len(),
                strengths.len()
            )));
        }
        let arity = strengths[0].arity();
        if strengths.iter().any(|s| s.arity() != arity) {
            return Err(Error::Shape("mixed strength arities".into()));
        }
        if strengths.iter().any(|s| s.components().iter().any(|x| !x.is_finite())) {
            return Err(Error::Parameter("non-finite strength component".into()));
        }
        for (i, p) in positions.iter().enumerate() {
            if p.iter().any(|&x| !(0.0..=box_side).contains(&x)) {
                return Err(Error::Parameter(format!(
                    "position {i} = {p:?} lies outside [0, {box_side}]³"
                )));
            }
        }
        Ok(SourceSystem {
            positions,
            strengths,
            box_side,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn strengths(&self) -> &[Strength] {
        &self.strengths
    }

    pub fn box_side(&self) -> f64 {
        self.box_side
    }

    /// Arity shared by all strengths.
    pub fn arity(&self) -> usize {
        self.strengths[0].arity()
    }

    /// `Q = Σ_n |f_n|²` (vector) or `Σ_n Σ_lm f_lm²` (tensor).
    pub fn strength_sum_sq(&self) -> f64 {
        self.strengths.iter().map(Strength::norm_sq).sum()
    }

    /// Copy of the system with every strength multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        SourceSystem {
            positions: self.positions.clone(),
            strengths: self.strengths.iter().map(|s| s.scaled(c)).collect(),
            box_side: self.box_side,
        }
    }

    /// Strength components packed contiguously, `arity` values per source.
    pub(crate) fn flat_strengths(&self) -> Vec<f64> {
        self.strengths
            .iter()
            .flat_map(|s| s.components().iter().copied())
            .collect()
    }

    pub(crate) fn check_kind(&self, kind: KernelKind) -> Result<()> {
        if self.arity() != kind.arity() {
            return Err(Error::Shape(format!(
                "{kind} expects {} strength components per source, system has {}",
                kind.arity(),
                self.arity()
            )));
        }
        Ok(())
    }
}

/// Velocities at a list of target points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Velocities {
    pub values: Vec<Vec3>,
}

impl Velocities {
    pub fn zeros(n: usize) -> Self {
        Velocities {
            values: vec![[0.0; 3]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Root mean square of the pointwise magnitudes.
    pub fn rms(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let s: f64 = self.values.iter().map(|u| dot(u, u)).sum();
        (s / self.values.len() as f64).sqrt()
    }

    pub(crate) fn add_assign(&mut self, other: &Velocities) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            for j in 0..3 {
                a[j] += b[j];
            }
        }
    }
}

impl std::ops::Add for &Velocities {
    type Output = Velocities;

    fn add(self, rhs: &Velocities) -> Velocities {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl std::ops::Sub for &Velocities {
    type Output = Velocities;

    fn sub(self, rhs: &Velocities) -> Velocities {
        Velocities {
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| sub(a, b))
                .collect(),
        }
    }
}

/// `G(r)·f` for a flat strength slice; caller guarantees `r ≠ 0`.
#[inline]
pub(crate) fn apply_kernel(kind: KernelKind, r: &Vec3, f: &[f64]) -> Vec3 {
    let r2 = dot(r, r);
    let inv_r = 1.0 / r2.sqrt();
    let inv_r2 = inv_r * inv_r;
    match kind {
        KernelKind::Stokeslet => {
            let rf = r[0] * f[0] + r[1] * f[1] + r[2] * f[2];
            let c = rf * inv_r2 * inv_r;
            [
                f[0] * inv_r + c * r[0],
                f[1] * inv_r + c * r[1],
                f[2] * inv_r + c * r[2],
            ]
        }
        KernelKind::Stresslet => {
            let rfr = quad_form(r, f);
            let c = -6.0 * rfr * inv_r2 * inv_r2 * inv_r;
            [c * r[0], c * r[1], c * r[2]]
        }
        KernelKind::Rotlet => {
            let c = inv_r2 * inv_r;
            let fxr = cross(&[f[0], f[1], f[2]], r);
            [c * fxr[0], c * fxr[1], c * fxr[2]]
        }
    }
}

/// `r_l f_lm r_m` for a row-major 3×3 tensor.
#[inline]
pub(crate) fn quad_form(r: &Vec3, f: &[f64]) -> f64 {
    let mut s = 0.0;
    for l in 0..3 {
        s += r[l] * (f[3 * l] * r[0] + f[3 * l + 1] * r[1] + f[3 * l + 2] * r[2]);
    }
    s
}

/// Evaluates `G(r)·f` for one kernel.
pub fn eval_kernel(kind: KernelKind, r: Vec3, f: &Strength) -> Result<Vec3> {
    f.check(kind)?;
    if dot(&r, &r) == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    Ok(apply_kernel(kind, &r, f.components()))
}

/// Exact `O(N·T)` evaluation of `u(x) = Σ_n G(x - x_n)·f_n`.
///
/// With `exclude_self` the targets must be the source positions and the
/// `n = m` term is skipped. A zero separation between any other pair is
/// reported as [`Error::Coincident`].
pub fn direct_sum(
    system: &SourceSystem,
    kind: KernelKind,
    targets: &[Vec3],
    exclude_self: bool,
) -> Result<Velocities> {
    system.check_kind(kind)?;
    if exclude_self && targets != system.positions() {
        return Err(Error::Parameter(
            "exclude_self requires targets identical to the source positions".into(),
        ));
    }
    let arity = kind.arity();
    let flat = system.flat_strengths();
    let sources = system.positions();
    let values = targets
        .par_iter()
        .enumerate()
        .map(|(m, x)| {
            let mut u = [0.0; 3];
            for (n, (xn, f)) in sources.iter().zip(flat.chunks_exact(arity)).enumerate() {
                if exclude_self && n == m {
                    continue;
                }
                let r = sub(x, xn);
                if dot(&r, &r) == 0.0 {
                    return Err(Error::Coincident {
                        source_index: n,
                        target_index: m,
                    });
                }
                let g = apply_kernel(kind, &r, f);
                u[0] += g[0];
                u[1] += g[1];
                u[2] += g[2];
            }
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Velocities { values })
}

/// Correction removing a source's own smeared contribution from the
/// Fourier-space sum: `-(4ξ/√π) f` for the stokeslet, zero otherwise.
pub fn self_interaction(xi: f64, f: &Strength, kind: KernelKind) -> Vec3 {
    match kind {
        KernelKind::Stokeslet => {
            let c = -4.0 * xi / PI.sqrt();
            let v = f.components();
            [c * v[0], c * v[1], c * v[2]]
        }
        KernelKind::Stresslet | KernelKind::Rotlet => [0.0; 3],
    }
}

/// RMS of `|u - u_ref|`, optionally divided by the RMS of `|u_ref|`.
pub fn rms_error(u: &Velocities, u_ref: &Velocities, relative: bool) -> Result<f64> {
    if u.len() != u_ref.len() {
        return Err(Error::Shape(format!(
            "velocity lists differ in length: {} vs {}",
            u.len(),
            u_ref.len()
        )));
    }
    if u.is_empty() {
        return Err(Error::Shape("empty velocity lists".into()));
    }
    let abs = (u - u_ref).rms();
    if !relative {
        return Ok(abs);
    }
    let norm = u_ref.rms();
    if norm == 0.0 {
        return Err(Error::Parameter(
            "relative error against an all-zero reference".into(),
        ));
    }
    Ok(abs / norm)
}
