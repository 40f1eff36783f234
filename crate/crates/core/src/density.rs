//! Kernel density estimates on regular grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::PointCloud;

/// Radial kernel profile, normalized in the ambient dimension so that
/// `∫ h^-D K_D(‖x‖/h) dx = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `K_D(u) = (2π)^(-D/2) exp(-u²/2)`
    Gaussian,
    /// `K_D(u) = (D + 2) / (2 V_D) (1 - u²)` on `u < 1`, `V_D` the unit-ball volume.
    Epanechnikov,
}

impl Kernel {
    /// Normalizing constant of the `dim`-dimensional kernel.
    pub fn normalization(&self, dim: usize) -> f64 {
        match self {
            Kernel::Gaussian => (2.0 * PI).powf(-(dim as f64) / 2.0),
            Kernel::Epanechnikov => (dim as f64 + 2.0) / (2.0 * unit_ball_volume(dim)),
        }
    }

    /// Unnormalized profile as a function of `u²`.
    fn profile_sq(&self, u2: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-0.5 * u2).exp(),
            Kernel::Epanechnikov => {
                if u2 < 1.0 {
                    1.0 - u2
                } else {
                    0.0
                }
            }
        }
    }

    /// Normalized `dim`-dimensional kernel at radius `u`.
    pub fn eval(&self, dim: usize, u: f64) -> f64 {
        self.normalization(dim) * self.profile_sq(u * u)
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Kernel::Gaussian),
            "epanechnikov" => Ok(Kernel::Epanechnikov),
            other => Err(Error::invalid(format!("unknown kernel '{other}'"))),
        }
    }
}

fn unit_ball_volume(dim: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = V_{d-2} · 2π / d
    let mut v = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut d = if dim.is_multiple_of(2) { 2 } else { 3 };
    while d <= dim {
        v *= 2.0 * PI / d as f64;
        d += 2;
    }
    v
}

/// Axis-aligned regular grid. Axis `a` has `resolution[a]` cells and
/// `resolution[a] + 1` vertices; vertices are stored row-major with the last
/// axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        let grid = Grid {
            lower,
            upper,
            resolution,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Cube `[lo, hi]^dim` with `res` cells per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, res: usize) -> Result<Self> {
        Grid::new(vec![lo; dim], vec![hi; dim], vec![res; dim])
    }

    /// Bounding box of `cloud` padded by `pad` on every side, with cells no
    /// wider than `max_spacing`.
    pub fn around(cloud: &PointCloud, pad: f64, max_spacing: f64) -> Result<Self> {
        let (lo, hi) = cloud
            .bounding_box()
            .ok_or_else(|| Error::invalid("point cloud must be nonempty"))?;
        if !(max_spacing > 0.0) || pad < 0.0 {
            return Err(Error::invalid("grid spacing must be > 0 and padding >= 0"));
        }
        let lower: Vec<f64> = lo.iter().map(|v| v - pad).collect();
        let upper: Vec<f64> = hi.iter().map(|v| v + pad).collect();
        let resolution = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| (((u - l) / max_spacing).ceil() as usize).max(1))
            .collect();
        Grid::new(lower, upper, resolution)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.lower.len();
        if d == 0 {
            return Err(Error::invalid("grid dimension must be positive"));
        }
        if self.upper.len() != d || self.resolution.len() != d {
            return Err(Error::invalid(
                "grid lower, upper and resolution must have equal length",
            ));
        }
        for a in 0..d {
            if !(self.lower[a].is_finite() && self.upper[a].is_finite()) {
                return Err(Error::invalid("grid bounds must be finite"));
            }
            if !(self.lower[a] < self.upper[a]) {
                return Err(Error::invalid(format!(
                    "grid requires lower < upper on axis {a}"
                )));
            }
            if self.resolution[a] == 0 {
                return Err(Error::invalid(format!(
                    "grid resolution must be positive on axis {a}"
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Vertices along each axis.
    pub fn shape(&self) -> Vec<usize> {
        self.resolution.iter().map(|r| r + 1).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.resolution.iter().map(|r| r + 1).product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.resolution[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Coordinate of vertex index `i` along `axis`.
    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        if i == self.resolution[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * self.spacing(axis)
        }
    }

    /// Row-major strides (last axis has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let shape = self.shape();
        let mut strides = vec![1; shape.len()];
        for a in (0..shape.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        strides
    }

    /// Multi-index of flat vertex `v`.
    pub fn unravel(&self, mut v: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        for a in (0..shape.len()).rev() {
            idx[a] = v % shape[a];
            v /= shape[a];
        }
        idx
    }

    pub fn vertex_coords(&self, v: usize) -> Vec<f64> {
        self.unravel(v)
            .into_iter()
            .enumerate()
            .map(|(a, i)| self.axis_coord(a, i))
            .collect()
    }

    /// Same grid shifted by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Grid {
        Grid {
            lower: self.lower.iter().zip(offset).map(|(l, o)| l + o).collect(),
            upper: self.upper.iter().zip(offset).map(|(u, o)| u + o).collect(),
            resolution: self.resolution.clone(),
        }
    }
}

/// Scalar values, one per grid vertex, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    #[serde(flatten)]
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let field = GridField { grid, values };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.values.len() != self.grid.vertex_count() {
            return Err(Error::invalid(format!(
                "field has {} values but grid has {} vertices",
                self.values.len(),
                self.grid.vertex_count()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field values must be finite"));
        }
        Ok(())
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ value · cell volume` over all vertices.
    pub fn riemann_sum(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

fn check_kde_inputs(cloud: &PointCloud, grid: &Grid, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("bandwidth h must be > 0, got {h}")));
    }
    if cloud.is_empty() {
        return Err(Error::invalid("point cloud must be nonempty"));
    }
    grid.validate()?;
    if cloud.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: cloud.dim(),
        });
    }
    Ok(())
}

/// Kernel density estimate `p̂_h(x) = (1/n) Σ h^-D K_D(‖x − X_i‖ / h)` at
/// every grid vertex.
pub fn kde_evaluate(cloud: &PointCloud, grid: &Grid, kernel: Kernel, h: f64) -> Result<GridField> {
    check_kde_inputs(cloud, grid, h)?;
    let w = 1.0 / cloud.len() as f64;
    let weights = vec![w; cloud.len()];
    Ok(kde_sum(cloud, &weights, grid, kernel, h))
}

/// Weighted estimate `Σ w_i h^-D K_D(‖x − X_i‖ / h)`. Multinomial resample
/// counts divided by `n` give a bootstrap replicate of [`kde_evaluate`].
pub fn kde_evaluate_weighted(
    cloud: &PointCloud,
    weights: &[f64],
    grid: &Grid,
    kernel: Kernel,
    h: f64,
) -> Result<GridField> {
    check_kde_inputs(cloud, grid, h)?;
    if weights.len() != cloud.len() {
        return Err(Error::invalid(format!(
            "expected {} weights, got {}",
            cloud.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "weights must sum to 1, got {total}"
        )));
    }
    Ok(kde_sum(cloud, weights, grid, kernel, h))
}

/// Weighted estimate without validating the weights. Callers guarantee
/// `weights.len() == cloud.len()` and nonnegative weights.
pub(crate) fn kde_weighted_trusted(
    cloud: &PointCloud,
    weights: &[f64],
    grid: &Grid,
    kernel: Kernel,
    h: f64,
) -> GridField {
    debug_assert_eq!(weights.len(), cloud.len());
    kde_sum(cloud, weights, grid, kernel, h)
}

// Accumulates point contributions in index order, so every vertex sees the
// same summation order regardless of kernel.
fn kde_sum(cloud: &PointCloud, weights: &[f64], grid: &Grid, kernel: Kernel, h: f64) -> GridField {
    let dim = grid.dim();
    let scale = kernel.normalization(dim) / h.powi(dim as i32);
    let mut values = vec![0.0; grid.vertex_count()];
    match kernel {
        Kernel::Gaussian => gaussian_sum(cloud, weights, grid, h, scale, &mut values),
        Kernel::Epanechnikov => compact_sum(cloud, weights, grid, kernel, h, scale, &mut values),
    }
    GridField {
        grid: grid.clone(),
        values,
    }
}

// The Gaussian factorizes over axes, so each point's bump on the grid is an
// outer product of per-axis profiles.
fn gaussian_sum(
    cloud: &PointCloud,
    weights: &[f64],
    grid: &Grid,
    h: f64,
    scale: f64,
    values: &mut [f64],
) {
    let dim = grid.dim();
    let shape = grid.shape();
    let last = dim - 1;
    let row_len = shape[last];
    let rows = values.len() / row_len;
    let axis_coords: Vec<Vec<f64>> = (0..dim)
        .map(|a| (0..shape[a]).map(|i| grid.axis_coord(a, i)).collect())
        .collect();
    let mut factors: Vec<Vec<f64>> = shape.iter().map(|&s| vec![0.0; s]).collect();
    let mut idx = vec![0usize; last];

    for (p, &w) in cloud.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for a in 0..dim {
            for (f, &x) in factors[a].iter_mut().zip(&axis_coords[a]) {
                let u = (x - p[a]) / h;
                *f = (-0.5 * u * u).exp();
            }
        }
        let amp = w * scale;
        idx.iter_mut().for_each(|i| *i = 0);
        for row in 0..rows {
            let mut coef = amp;
            for (a, &i) in idx.iter().enumerate() {
                coef *= factors[a][i];
            }
            if coef != 0.0 {
                let out = &mut values[row * row_len..(row + 1) * row_len];
                for (v, &f) in out.iter_mut().zip(&factors[last]) {
                    *v += coef * f;
                }
            }
            for a in (0..last).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }
}

// Kernels with support in the unit ball: visit only the vertices in the
// bounding box of each point's support.
fn compact_sum(
    cloud: &PointCloud,
    weights: &[f64],
    grid: &Grid,
    kernel: Kernel,
    h: f64,
    scale: f64,
    values: &mut [f64],
) {
    let dim = grid.dim();
    let shape = grid.shape();
    let strides = grid.strides();
    let mut lo = vec![0usize; dim];
    let mut hi = vec![0usize; dim];
    let mut idx = vec![0usize; dim];
    for (p, &w) in cloud.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let mut empty = false;
        for a in 0..dim {
            let sp = grid.spacing(a);
            let first = ((p[a] - h - grid.lower[a]) / sp).floor();
            let last = ((p[a] + h - grid.lower[a]) / sp).ceil();
            if last < 0.0 || first > grid.resolution[a] as f64 {
                empty = true;
                break;
            }
            lo[a] = first.max(0.0) as usize;
            hi[a] = (last as usize).min(shape[a] - 1);
        }
        if empty {
            continue;
        }
        let amp = w * scale;
        idx.copy_from_slice(&lo);
        loop {
            let mut u2 = 0.0;
            let mut flat = 0;
            for a in 0..dim {
                let u = (grid.axis_coord(a, idx[a]) - p[a]) / h;
                u2 += u * u;
                flat += idx[a] * strides[a];
            }
            let k = kernel.profile_sq(u2);
            if k != 0.0 {
                values[flat] += amp * k;
            }
            if !advance(&mut idx, &lo, &hi) {
                break;
            }
        }
    }
}

// Odometer step over the box `lo..=hi`, last axis fastest. Returns false once
// every index has been visited.
fn advance(idx: &mut [usize], lo: &[usize], hi: &[usize]) -> bool {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] <= hi[a] {
            return true;
        }
        idx[a] = lo[a];
    }
    false
}

/// Largest absolute difference between two fields over the shared grid
/// vertices.
pub fn sup_norm_diff(a: &GridField, b: &GridField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::invalid("fields must share the same grid"));
    }
    if a.values.len() != b.values.len() {
        return Err(Error::invalid("fields have different vertex counts"));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
