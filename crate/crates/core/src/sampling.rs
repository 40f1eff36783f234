//! Seeded synthetic data sources: points on a torus in ℝ³ and on a mixture
//! of circles in ℝ².

use std::f64::consts::TAU;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite sample of points in `dim`-dimensional Euclidean space, stored
/// row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be positive"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        PointCloud::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Componentwise (min, max) over all points; `None` for an empty cloud.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut pts = self.iter();
        let first = pts.next()?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for p in pts {
            for a in 0..self.dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        Some((lo, hi))
    }
}

/// A circle in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

impl CircleSpec {
    pub fn new(center: [f64; 2], radius: f64) -> Result<Self> {
        let spec = CircleSpec { center, radius };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::invalid(format!(
                "circle radius must be > 0, got {}",
                self.radius
            )));
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("circle center must be finite"));
        }
        Ok(())
    }
}

/// Default nine-circle layout: a 3×3 arrangement on a grid of pitch 1 with
/// radii alternating 0.4 and 0.3 in a checkerboard pattern.
pub fn nine_circles() -> Vec<CircleSpec> {
    let mut specs = Vec::with_capacity(9);
    for row in 0..3 {
        for col in 0..3 {
            let radius = if (row + col) % 2 == 0 { 0.4 } else { 0.3 };
            specs.push(CircleSpec {
                center: [col as f64, row as f64],
                radius,
            });
        }
    }
    specs
}

/// Master seed from which independent random streams are derived.
///
/// Stream `j` is a ChaCha8 generator seeded with
/// `mix64(mix64(master) ^ j.wrapping_mul(0x9E37_79B9_7F4A_7C15))`, where
/// `mix64` is the SplitMix64 output finalizer. The derivation is fixed; the
/// same `(master, j)` pair always yields the same stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Seed { master }
    }

    /// Seed value of child stream `j`.
    pub fn child(&self, j: u64) -> u64 {
        mix64(mix64(self.master) ^ j.wrapping_mul(GOLDEN_GAMMA))
    }

    /// A derived master seed, for handing a whole sub-computation its own
    /// family of streams.
    pub fn derive(&self, j: u64) -> Seed {
        Seed::new(self.child(j))
    }

    pub fn stream(&self, j: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.child(j))
    }
}

impl From<u64> for Seed {
    fn from(master: u64) -> Self {
        Seed::new(master)
    }
}

/// Samples `n` points uniformly (with respect to surface area) from the torus
/// `((R + r cos η) cos θ, (R + r cos η) sin θ, r sin η)`.
///
/// θ is uniform; η is drawn by rejection against the area density
/// `1 + (r/R) cos η`, normalized by its maximum `1 + r/R`.
pub fn sample_torus(big_r: f64, small_r: f64, n: usize, seed: Seed) -> Result<PointCloud> {
    if !(small_r > 0.0 && small_r.is_finite()) {
        return Err(Error::invalid(format!(
            "tube radius r must be > 0, got {small_r}"
        )));
    }
    if !(small_r < big_r && big_r.is_finite()) {
        return Err(Error::invalid(format!(
            "torus requires r < R, got r = {small_r}, R = {big_r}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("sample size n must be >= 1"));
    }
    let mut rng = seed.stream(0);
    let ratio = small_r / big_r;
    let mut coords = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let theta = TAU * rng.random::<f64>();
        let eta = loop {
            let eta = TAU * rng.random::<f64>();
            let accept = (1.0 + ratio * eta.cos()) / (1.0 + ratio);
            if rng.random::<f64>() < accept {
                break eta;
            }
        };
        let ring = big_r + small_r * eta.cos();
        coords.push(ring * theta.cos());
        coords.push(ring * theta.sin());
        coords.push(small_r * eta.sin());
    }
    PointCloud::new(3, coords)
}

/// Samples `n` points by repeatedly picking one of `specs` uniformly and then
/// a uniform angle on it. No noise is added.
pub fn sample_circles(specs: &[CircleSpec], n: usize, seed: Seed) -> Result<PointCloud> {
    Ok(sample_circles_labeled(specs, n, seed)?.0)
}

/// Like [`sample_circles`], also returning the index of the generating circle
/// for each point.
pub fn sample_circles_labeled(
    specs: &[CircleSpec],
    n: usize,
    seed: Seed,
) -> Result<(PointCloud, Vec<usize>)> {
    if specs.is_empty() {
        return Err(Error::invalid("circle list must be nonempty"));
    }
    for s in specs {
        s.validate()?;
    }
    if n == 0 {
        return Err(Error::invalid("sample size n must be >= 1"));
    }
    let mut rng = seed.stream(0);
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let which = rng.random_range(0..specs.len());
        let phi = TAU * rng.random::<f64>();
        let c = &specs[which];
        coords.push(c.center[0] + c.radius * phi.cos());
        coords.push(c.center[1] + c.radius * phi.sin());
        labels.push(which);
    }
    Ok((PointCloud::new(2, coords)?, labels))
}
