//! Uniform voxel grids holding scalar, vector and sign data.
//!
//! All grids share the same layout: node `(i, j, k)` sits at
//! `origin + h * (i, j, k)` and is stored at `i + nx * (j + ny * k)`.

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Smallest extent allowed along any axis; stencils need a two-node margin.
pub const MIN_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    dims: [usize; 3],
    spacing: f64,
    origin: Vec3,
}

impl GridGeometry {
    pub fn new(dims: [usize; 3], spacing: f64, origin: Vec3) -> Result<Self> {
        if dims.iter().any(|&n| n < MIN_DIM) {
            return Err(Error::InvalidGrid(format!(
                "dims {dims:?} must be at least {MIN_DIM} along every axis"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
        })
    }

    /// Cubic grid of `n^3` nodes with spacing `h`, origin at zero.
    pub fn cube(n: usize, h: f64) -> Result<Self> {
        Self::new([n; 3], h, Vec3::zeros())
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    #[inline]
    pub fn position_of(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.coords(idx);
        self.position(i, j, k)
    }

    /// Continuous index coordinates of a world-space point.
    #[inline]
    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        (p - self.origin) / self.spacing
    }

    /// World-space corner opposite to the origin.
    pub fn max_corner(&self) -> Vec3 {
        self.position(self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1)
    }

    /// Length of the bounding-box diagonal.
    pub fn diagonal(&self) -> f64 {
        (self.max_corner() - self.origin).norm()
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// Checks that `p` lies within the bounding box shrunk by `margin` cells.
    pub fn check_inside(&self, p: &Vec3, margin: f64) -> Result<()> {
        let local = self.to_local(p);
        for (axis, name) in ['x', 'y', 'z'].into_iter().enumerate() {
            let hi = (self.dims[axis] - 1) as f64 - margin;
            let v = local[axis];
            if !(v >= margin && v <= hi) {
                return Err(Error::OutOfBounds {
                    x: p.x,
                    y: p.y,
                    z: p.z,
                    axis: name,
                    value: p[axis],
                    min: self.origin[axis] + margin * self.spacing,
                    max: self.origin[axis] + hi * self.spacing,
                });
            }
        }
        Ok(())
    }

    /// Offsets of the 6-neighbours of `idx` that exist inside the grid.
    pub fn neighbors6(&self, idx: usize) -> impl Iterator<Item = usize> {
        let [i, j, k] = self.coords(idx);
        let [nx, ny, nz] = self.dims;
        let sx = 1;
        let sy = nx;
        let sz = nx * ny;
        let cand = [
            (i > 0).then(|| idx - sx),
            (i + 1 < nx).then(|| idx + sx),
            (j > 0).then(|| idx - sy),
            (j + 1 < ny).then(|| idx + sy),
            (k > 0).then(|| idx - sz),
            (k + 1 < nz).then(|| idx + sz),
        ];
        cand.into_iter().flatten()
    }

    pub fn same_geometry(&self, other: &GridGeometry) -> bool {
        self.dims == other.dims && self.spacing == other.spacing && self.origin == other.origin
    }
}

/// A scalar sample per grid node; houses level set functions and
/// characteristic functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    geom: GridGeometry,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(geom: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geom.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                geom.len(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite value at node {:?}",
                geom.coords(pos)
            )));
        }
        Ok(Self { geom, values })
    }

    pub fn filled(geom: GridGeometry, value: f64) -> Self {
        Self {
            geom,
            values: vec![value; geom.len()],
        }
    }

    /// Samples `f` at every node position.
    pub fn from_fn(geom: GridGeometry, f: impl Fn(Vec3) -> f64 + Sync) -> Self {
        use rayon::prelude::*;
        let values = (0..geom.len())
            .into_par_iter()
            .map(|idx| f(geom.position_of(idx)))
            .collect();
        Self { geom, values }
    }

    pub(crate) fn from_raw(geom: GridGeometry, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), geom.len());
        Self { geom, values }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn spacing(&self) -> f64 {
        self.geom.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.geom.index(i, j, k)]
    }

    /// Node value with indices clamped into the grid.
    #[inline]
    pub(crate) fn get_clamped(&self, i: isize, j: isize, k: isize) -> f64 {
        let [nx, ny, nz] = self.geom.dims;
        let c = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
        self.get(c(i, nx), c(j, ny), c(k, nz))
    }

    /// Applies `f` to every value, producing a new grid.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        use rayon::prelude::*;
        Self {
            geom: self.geom,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    /// True when some node is inside (negative) and some is not.
    pub fn has_interface(&self) -> bool {
        let inside = self.values.iter().any(|&v| v < 0.0);
        let outside = self.values.iter().any(|&v| v >= 0.0);
        inside && outside
    }

    pub fn sign_field(&self) -> SignField {
        SignField {
            geom: self.geom,
            inside: self.values.iter().map(|&v| v < 0.0).collect(),
        }
    }

    /// Maximum absolute difference between two grids of equal geometry.
    pub fn max_abs_diff(&self, other: &ScalarGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Three components per node; used for extended displacement fields.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGrid {
    geom: GridGeometry,
    values: Vec<Vec3>,
}

impl VectorGrid {
    pub fn new(geom: GridGeometry, values: Vec<Vec3>) -> Result<Self> {
        if values.len() != geom.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} vectors, got {}",
                geom.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidGrid("non-finite vector component".into()));
        }
        Ok(Self { geom, values })
    }

    pub fn zeros(geom: GridGeometry) -> Self {
        Self {
            geom,
            values: vec![Vec3::zeros(); geom.len()],
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Vec3] {
        &mut self.values
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Inside/outside pattern of a level set, `true` where the function is negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SignField {
    geom: GridGeometry,
    inside: Vec<bool>,
}

impl SignField {
    pub fn new(geom: GridGeometry, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != geom.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} flags, got {}",
                geom.len(),
                inside.len()
            )));
        }
        Ok(Self { geom, inside })
    }

    pub fn from_fn(geom: GridGeometry, f: impl Fn(Vec3) -> bool) -> Self {
        Self {
            geom,
            inside: (0..geom.len()).map(|idx| f(geom.position_of(idx))).collect(),
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn has_interface(&self) -> bool {
        self.inside.iter().any(|&b| b) && self.inside.iter().any(|&b| !b)
    }

    pub fn count_inside(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }
}
