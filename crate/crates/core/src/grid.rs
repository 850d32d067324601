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

//! Uniform 3D grids with one or more components per node.

use crate::error::{Error, Result};
use crate::kernels::Vec3;

/// Uniform grid with spacing `h`; node `(i, j, k)` sits at
/// `origin + h·(i, j, k)`. Values are stored component-major, each
/// component as a row-major block with the last index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid3 {
    extents: [usize; 3],
    spacing: f64,
    origin: Vec3,
    components: usize,
    data: Vec<f64>,
}

/// Grid with one value per node.
pub type ScalarGrid = Grid3;
/// Grid with several values (3 or 9) per node.
pub type VectorGrid = Grid3;

impl Grid3 {
    pub fn zeros(extents: [usize; 3], spacing: f64, origin: Vec3, components: usize) -> Result<Self> {
        if extents.contains(&0) {
            return Err(Error::Shape(format!("grid extents must be positive, got {extents:?}")));
        }
        if !(spacing > 0.0) {
            return Err(Error::Parameter(format!("grid spacing must be positive, got {spacing}")));
        }
        if components == 0 {
            return Err(Error::Shape("grid needs at least one component".into()));
        }
        let len = extents.iter().product::<usize>() * components;
        Ok(Grid3 {
            extents,
            spacing,
            origin,
            components,
            data: vec![0.0; len],
        })
    }

    /// Scalar grid filled by evaluating `f` at every node position.
    pub fn from_fn(extents: [usize; 3], spacing: f64, origin: Vec3, f: impl Fn(Vec3) -> f64) -> Result<Self> {
        let mut g = Self::zeros(extents, spacing, origin, 1)?;
        let [_, n1, n2] = extents;
        for (idx, v) in g.data.iter_mut().enumerate() {
            let (i, j, k) = (idx / (n1 * n2), (idx / n2) % n1, idx % n2);
            *v = f([
                origin[0] + spacing * i as f64,
                origin[1] + spacing * j as f64,
                origin[2] + spacing * k as f64,
            ]);
        }
        Ok(g)
    }

    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn nodes(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        [
            self.origin[0] + self.spacing * i as f64,
            self.origin[1] + self.spacing * j as f64,
            self.origin[2] + self.spacing * k as f64,
        ]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.extents[1] + j) * self.extents[2] + k
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.nodes();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.nodes();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[c * self.nodes() + self.index(i, j, k)]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `h³ Σ` of one component: trapezoidal integral over the grid.
    pub fn integral(&self, c: usize) -> f64 {
        let h3 = self.spacing.powi(3);
        self.component(c).iter().sum::<f64>() * h3
    }
}
