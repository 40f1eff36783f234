//! Bootstrap confidence statements.
//!
//! Two procedures share one quantile engine:
//!
//! * [`diagram_confidence`]: resample the point cloud, measure the grid
//!   sup-norm between each replicate density estimate and the original, and
//!   turn the upper quantile into a radius `c_n`. By stability of persistence
//!   under sup-norm perturbations the superlevel diagram of the true smoothed
//!   density lies within bottleneck distance `c_n` of the estimated one with
//!   probability about `1 − α`.
//! * [`landscape_band`]: resample whole diagrams, measure the sup distance
//!   between each replicate mean landscape and the sample mean, and use the
//!   quantile as the half-width of a uniform band around the mean.
//!
//! Resampling is done with multinomial counts: replicate `j` (1-based) draws
//! `n` uniform indices from stream `j` of the seed. Replicates run in parallel
//! and are gathered by index, so results do not depend on scheduling.

use std::collections::HashMap;

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{kde_evaluate, kde_weighted_trusted, sup_norm_diff, Grid, GridField, Kernel};
use crate::error::{Error, Result};
use crate::filtration::cubical_superlevel;
use crate::landscape::{diagram_to_landscape, weighted_mean, Landscape, Level};
use crate::persistence::{compute_persistence, Diagram};
use crate::sampling::{PointCloud, Seed};

/// Upper bootstrap quantile `inf{q : (1/B) Σ 1[θ_j ≥ q] ≤ α}`, realized as
/// the smallest replicate value meeting the condition: the element at
/// 0-based index `B − ⌊αB⌋` of the ascending sort, clamped to the last one.
pub fn quantile_upper(replicates: &[f64], alpha: f64) -> Result<f64> {
    if replicates.is_empty() {
        return Err(Error::invalid("quantile of an empty replicate set"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if replicates.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("replicates contain NaN"));
    }
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len();
    // αB is often an integer in exact arithmetic but not in floating point.
    let allowed = (alpha * b as f64 * (1.0 + 1e-12)).floor() as usize;
    let idx = (b - allowed.min(b)).min(b - 1);
    Ok(sorted[idx])
}

/// Replicate statistics and the resulting confidence radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub alpha: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub n: usize,
    pub q_alpha: f64,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replicates: Vec<f64>,
}

impl BootstrapSummary {
    /// Summarizes replicates `θ*_j` for a sample of size `n`; the radius is
    /// `q_α / √n`.
    pub fn from_replicates(replicates: Vec<f64>, alpha: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("sample size n must be >= 1"));
        }
        let q_alpha = quantile_upper(&replicates, alpha)?;
        Ok(BootstrapSummary {
            alpha,
            b: replicates.len(),
            n,
            q_alpha,
            radius: radius_for(q_alpha, n),
            replicates,
        })
    }

    /// Copy without the replicate values.
    pub fn without_replicates(&self) -> Self {
        BootstrapSummary {
            replicates: Vec::new(),
            ..self.clone()
        }
    }
}

// q / √n, nudged by a few ulps when that makes radius · √n reproduce q.
fn radius_for(q: f64, n: usize) -> f64 {
    let s = (n as f64).sqrt();
    let r0 = q / s;
    if r0 * s == q {
        return r0;
    }
    let (mut up, mut down) = (r0, r0);
    for _ in 0..4 {
        up = up.next_up();
        down = down.next_down();
        if up * s == q {
            return up;
        }
        if down * s == q && down >= 0.0 {
            return down;
        }
    }
    r0
}

/// Multinomial resample counts of replicate `j` for a sample of size `n`.
pub fn resample_counts(seed: Seed, j: u64, n: usize) -> Vec<u32> {
    let mut rng = seed.stream(j);
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    counts
}

fn check_bootstrap_args(b: usize, alpha: f64) -> Result<()> {
    if b == 0 {
        return Err(Error::invalid(
            "number of bootstrap replicates B must be >= 1",
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Density estimate `p̂_h` and bootstrap summary of
/// `θ*_j = √n · ‖p̂*_j − p̂_h‖_∞` over the grid.
pub fn kde_bootstrap(
    cloud: &PointCloud,
    grid: &Grid,
    kernel: Kernel,
    h: f64,
    b: usize,
    alpha: f64,
    seed: Seed,
) -> Result<(GridField, BootstrapSummary)> {
    check_bootstrap_args(b, alpha)?;
    let estimate = kde_evaluate(cloud, grid, kernel, h)?;
    let n = cloud.len();
    let sqrt_n = (n as f64).sqrt();
    let replicates = (1..=b as u64)
        .into_par_iter()
        .map(|j| {
            let weights: Vec<f64> = resample_counts(seed, j, n)
                .into_iter()
                .map(|c| c as f64 / n as f64)
                .collect();
            let replicate = kde_weighted_trusted(cloud, &weights, grid, kernel, h);
            sup_norm_diff(&replicate, &estimate).map(|d| sqrt_n * d)
        })
        .collect::<Result<Vec<f64>>>()?;
    let summary = BootstrapSummary::from_replicates(replicates, alpha, n)?;
    Ok((estimate, summary))
}

/// Superlevel persistence diagram of the density estimate together with the
/// bootstrap confidence radius for it in bottleneck distance.
pub fn diagram_confidence(
    cloud: &PointCloud,
    grid: &Grid,
    kernel: Kernel,
    h: f64,
    b: usize,
    alpha: f64,
    seed: Seed,
) -> Result<(Diagram, BootstrapSummary)> {
    let (estimate, summary) = kde_bootstrap(cloud, grid, kernel, h, b, alpha, seed)?;
    let diagram = compute_persistence(&cubical_superlevel(&estimate)?)?;
    Ok((diagram, summary))
}

/// A uniform band `center ± radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub center: Level,
    pub radius: f64,
}

impl Band {
    pub fn lower(&self, z: f64) -> f64 {
        self.center.eval(z) - self.radius
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.center.eval(z) + self.radius
    }

    /// Lower envelope clamped at zero, for plotting.
    pub fn display_lower(&self, z: f64) -> f64 {
        self.lower(z).max(0.0)
    }

    /// Whether `f` stays inside the band everywhere. Exact: both are
    /// piecewise linear, so it suffices to check the union of breakpoints.
    pub fn contains(&self, f: &Level) -> bool {
        crate::landscape::landscape_sup_diff(&self.center, f) <= self.radius
    }
}

/// Bootstrap band for the mean landscape, one per level `k = 1..=depth`.
pub fn landscape_band(
    diagrams: &[Diagram],
    depth: usize,
    b: usize,
    alpha: f64,
    seed: Seed,
) -> Result<Vec<(Band, BootstrapSummary)>> {
    if diagrams.is_empty() {
        return Err(Error::invalid("landscape band needs at least one diagram"));
    }
    let landscapes = diagrams
        .iter()
        .map(|d| diagram_to_landscape(d, depth))
        .collect::<Result<Vec<_>>>()?;
    landscape_band_from_landscapes(&landscapes, depth, b, alpha, seed)
}

// Level k of every landscape evaluated on the union of their breakpoints,
// with identical rows merged. All means are linear combinations of the rows,
// exact on `zs`.
struct LevelTable {
    zs: Vec<f64>,
    rows: Vec<Vec<f64>>,
    // Row of each landscape.
    group: Vec<usize>,
}

impl LevelTable {
    fn new(levels: &[&Level]) -> Self {
        let mut zs: Vec<f64> = levels.iter().flat_map(|l| l.zs()).collect();
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let group = levels
            .iter()
            .map(|l| {
                let row: Vec<f64> = zs.iter().map(|&z| l.eval(z)).collect();
                let key = row.iter().map(|v| v.to_bits()).collect();
                *index.entry(key).or_insert_with(|| {
                    rows.push(row);
                    rows.len() - 1
                })
            })
            .collect();
        LevelTable { zs, rows, group }
    }

    // Mean with multiplicity `counts[i]` on landscape i, out of `n` draws.
    fn combine(&self, counts: &[u32], n: usize) -> Vec<f64> {
        let mut per_row = vec![0u32; self.rows.len()];
        for (&g, &c) in self.group.iter().zip(counts) {
            per_row[g] += c;
        }
        let weights: Vec<f64> = per_row.iter().map(|&c| c as f64 / n as f64).collect();
        (0..self.zs.len())
            .map(|g| {
                self.rows
                    .iter()
                    .zip(&weights)
                    .map(|(row, w)| w * row[g])
                    .sum()
            })
            .collect()
    }
}

/// [`landscape_band`] on precomputed landscapes.
pub fn landscape_band_from_landscapes(
    landscapes: &[Landscape],
    depth: usize,
    b: usize,
    alpha: f64,
    seed: Seed,
) -> Result<Vec<(Band, BootstrapSummary)>> {
    check_bootstrap_args(b, alpha)?;
    if landscapes.is_empty() {
        return Err(Error::invalid(
            "landscape band needs at least one landscape",
        ));
    }
    if depth == 0 {
        return Err(Error::invalid("landscape depth K must be >= 1"));
    }
    let bound = landscapes[0].bound;
    if landscapes.iter().any(|l| l.bound != bound) {
        return Err(Error::invalid("diagrams have different bounds T"));
    }
    let n = landscapes.len();
    let sqrt_n = (n as f64).sqrt();
    let zero = Level::zero();
    let ones = vec![1u32; n];

    let mut tables = Vec::with_capacity(depth);
    let mut centers = Vec::with_capacity(depth);
    for k in 1..=depth {
        let levels: Vec<&Level> = landscapes
            .iter()
            .map(|l| l.level(k).unwrap_or(&zero))
            .collect();
        let table = LevelTable::new(&levels);
        centers.push(table.combine(&ones, n));
        tables.push(table);
    }

    // replicates[j][k]
    let replicates: Vec<Vec<f64>> = (1..=b as u64)
        .into_par_iter()
        .map(|j| {
            let counts = resample_counts(seed, j, n);
            tables
                .iter()
                .zip(&centers)
                .map(|(table, center)| {
                    let mean = table.combine(&counts, n);
                    let sup = mean
                        .iter()
                        .zip(center)
                        .map(|(a, c)| (a - c).abs())
                        .fold(0.0, f64::max);
                    sqrt_n * sup
                })
                .collect()
        })
        .collect();

    (0..depth)
        .map(|k| {
            let theta: Vec<f64> = replicates.iter().map(|r| r[k]).collect();
            let summary = BootstrapSummary::from_replicates(theta, alpha, n)?;
            let center = Level {
                breakpoints: tables[k]
                    .zs
                    .iter()
                    .copied()
                    .zip(centers[k].iter().copied())
                    .collect(),
            };
            Ok((
                Band {
                    center,
                    radius: summary.radius,
                },
                summary,
            ))
        })
        .collect()
}

/// Bootstrap replicate means of level `k`, computed one replicate at a time
/// through [`weighted_mean`]. Slow; kept for cross-checking.
pub fn replicate_mean(landscapes: &[Landscape], k: usize, counts: &[u32]) -> Level {
    let zero = Level::zero();
    let n = landscapes.len();
    let levels: Vec<&Level> = landscapes
        .iter()
        .map(|l| l.level(k).unwrap_or(&zero))
        .collect();
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    weighted_mean(&levels, &weights)
}
