//! Persistence landscapes as exact piecewise-linear functions.
//!
//! Level `k` of the landscape of a diagram is the pointwise `k`-th largest of
//! the tent functions of its points. Each level is stored as its breakpoints;
//! between breakpoints it is linear, and it is zero outside the first and
//! last breakpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::Diagram;

/// Tent function of the diagram point `(b, d)` at `z`: rises with slope 1
/// from the earlier endpoint to the mid-life, then falls to the later one.
/// Sublevel points (`b < d`) use the same tent with the roles swapped.
pub fn triangle(b: f64, d: f64, z: f64) -> f64 {
    let (lo, hi) = if d <= b { (d, b) } else { (b, d) };
    let mid = (lo + hi) / 2.0;
    if z >= lo && z <= mid {
        z - lo
    } else if z > mid && z <= hi {
        hi - z
    } else {
        0.0
    }
}

/// A continuous piecewise-linear function given by breakpoints `(z, value)`
/// with strictly increasing `z`. Empty means identically zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Level {
    pub breakpoints: Vec<(f64, f64)>,
}

impl Level {
    pub fn zero() -> Self {
        Level::default()
    }

    pub fn eval(&self, z: f64) -> f64 {
        let bp = &self.breakpoints;
        if bp.is_empty() || z < bp[0].0 || z > bp[bp.len() - 1].0 {
            return 0.0;
        }
        // first breakpoint with z_i >= z
        let i = bp.partition_point(|&(x, _)| x < z);
        let (z1, v1) = bp[i];
        if z1 == z || i == 0 {
            return v1;
        }
        let (z0, v0) = bp[i - 1];
        v0 + (v1 - v0) * ((z - z0) / (z1 - z0))
    }

    pub fn zs(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.iter().map(|&(z, _)| z)
    }

    pub fn max_value(&self) -> f64 {
        self.breakpoints.iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }

    /// Multiplies every value by `s`.
    pub fn scaled(&self, s: f64) -> Level {
        Level {
            breakpoints: self.breakpoints.iter().map(|&(z, v)| (z, v * s)).collect(),
        }
    }
}

/// Levels `1..=K` of a persistence landscape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub levels: Vec<Level>,
    pub bound: f64,
}

impl Landscape {
    /// Level `k` (1-based); `None` beyond the stored levels.
    pub fn level(&self, k: usize) -> Option<&Level> {
        k.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Multiplies every level by `s`.
    pub fn scaled(&self, s: f64) -> Landscape {
        Landscape {
            levels: self.levels.iter().map(|l| l.scaled(s)).collect(),
            bound: self.bound,
        }
    }
}

/// Value of level `k` at `z`; zero outside the support and for `k` beyond
/// the stored levels.
pub fn landscape_eval(l: &Landscape, k: usize, z: f64) -> f64 {
    l.level(k).map_or(0.0, |level| level.eval(z))
}

/// Exact landscape levels `1..=depth` of `diag`.
///
/// Between consecutive critical abscissae (tent endpoints, apexes, and
/// crossings of a rising edge with a falling edge) no two tents change
/// order, so every k-th maximum is linear there and the critical values are
/// exactly the breakpoints.
pub fn diagram_to_landscape(diag: &Diagram, depth: usize) -> Result<Landscape> {
    if depth == 0 {
        return Err(Error::invalid("landscape depth K must be >= 1"));
    }
    diag.validate()?;
    let mut tents: Vec<(f64, f64)> = diag
        .points
        .iter()
        .map(|p| (p.birth.min(p.death), p.birth.max(p.death)))
        .filter(|(lo, hi)| hi > lo)
        .collect();
    tents.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut critical: Vec<f64> = Vec::with_capacity(3 * tents.len());
    for &(lo, hi) in &tents {
        critical.extend([lo, (lo + hi) / 2.0, hi]);
    }
    // A rising edge of p meets a falling edge of q at (lo_p + hi_q) / 2.
    for (i, &(lo_p, hi_p)) in tents.iter().enumerate() {
        let mid_p = (lo_p + hi_p) / 2.0;
        for (j, &(lo_q, hi_q)) in tents.iter().enumerate() {
            if lo_q >= hi_p {
                break;
            }
            if i == j || hi_q <= lo_p {
                continue;
            }
            let mid_q = (lo_q + hi_q) / 2.0;
            let z = (lo_p + hi_q) / 2.0;
            if z >= lo_p && z <= mid_p && z >= mid_q && z <= hi_q {
                critical.push(z);
            }
        }
    }
    critical.sort_by(f64::total_cmp);
    critical.dedup();

    let mut levels: Vec<Vec<(f64, f64)>> = vec![Vec::new(); depth];
    let mut active: Vec<f64> = Vec::new();
    // Sweep: tents open in order of lo and close in order of hi.
    let mut by_hi: Vec<usize> = (0..tents.len()).collect();
    by_hi.sort_by(|&a, &b| tents[a].1.total_cmp(&tents[b].1));
    let mut open = vec![false; tents.len()];
    let (mut next_open, mut next_close) = (0, 0);
    let mut live: Vec<usize> = Vec::new();
    for &z in &critical {
        while next_open < tents.len() && tents[next_open].0 <= z {
            open[next_open] = true;
            live.push(next_open);
            next_open += 1;
        }
        while next_close < by_hi.len() && tents[by_hi[next_close]].1 < z {
            open[by_hi[next_close]] = false;
            next_close += 1;
        }
        live.retain(|&t| open[t]);
        active.clear();
        active.extend(live.iter().map(|&t| triangle(tents[t].1, tents[t].0, z)));
        let take = depth.min(active.len());
        if take < active.len() {
            active.select_nth_unstable_by(take, |a, b| b.total_cmp(a));
        }
        active[..take].sort_by(|a, b| b.total_cmp(a));
        for (k, level) in levels.iter_mut().enumerate() {
            let v = if k < take { active[k] } else { 0.0 };
            level.push((z, v));
        }
    }
    Ok(Landscape {
        levels: levels
            .into_iter()
            .map(|bp| Level {
                breakpoints: prune(bp),
            })
            .collect(),
        bound: diag.bound,
    })
}

// Drops zero runs: keeps a zero breakpoint only next to a nonzero one.
fn prune(bp: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let n = bp.len();
    let keep = |i: usize| {
        bp[i].1 != 0.0 || (i > 0 && bp[i - 1].1 != 0.0) || (i + 1 < n && bp[i + 1].1 != 0.0)
    };
    (0..n).filter(|&i| keep(i)).map(|i| bp[i]).collect()
}

fn merged_abscissae<'a>(levels: impl Iterator<Item = &'a Level>) -> Vec<f64> {
    let mut zs: Vec<f64> = levels.flat_map(|l| l.zs()).collect();
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    zs
}

/// Arithmetic mean of level `k` across `ls`, evaluated exactly on the union
/// of the inputs' breakpoints.
pub fn mean_landscape(ls: &[Landscape], k: usize) -> Result<Level> {
    if ls.is_empty() {
        return Err(Error::invalid("mean of an empty landscape sequence"));
    }
    if k == 0 {
        return Err(Error::invalid("landscape level k must be >= 1"));
    }
    check_bounds(ls)?;
    let zero = Level::zero();
    let levels: Vec<&Level> = ls.iter().map(|l| l.level(k).unwrap_or(&zero)).collect();
    let weights = vec![1.0 / ls.len() as f64; ls.len()];
    Ok(weighted_mean(&levels, &weights))
}

fn check_bounds(ls: &[Landscape]) -> Result<()> {
    let t = ls[0].bound;
    if ls.iter().any(|l| l.bound != t) {
        return Err(Error::invalid("landscapes have different bounds T"));
    }
    Ok(())
}

/// `Σ w_i · levels_i`, exact on the union of breakpoints. Summation runs in
/// index order.
pub fn weighted_mean(levels: &[&Level], weights: &[f64]) -> Level {
    let zs = merged_abscissae(levels.iter().copied());
    let breakpoints = zs
        .into_iter()
        .map(|z| {
            let v = levels
                .iter()
                .zip(weights)
                .map(|(l, w)| w * l.eval(z))
                .sum::<f64>();
            (z, v)
        })
        .collect();
    Level { breakpoints }
}

/// Exact `sup_z |a(z) − b(z)|`. The difference is piecewise linear, so the
/// supremum is attained at a breakpoint of `a` or `b`.
pub fn landscape_sup_diff(a: &Level, b: &Level) -> f64 {
    merged_abscissae([a, b].into_iter())
        .into_iter()
        .map(|z| (a.eval(z) - b.eval(z)).abs())
        .fold(0.0, f64::max)
}
