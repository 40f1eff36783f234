//! Bottleneck distance between persistence diagrams.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::{Diagram, DiagramPoint};

/// One side of a matched pair: a diagram point by index, or the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partner {
    Point(usize),
    Diagonal,
}

/// An optimal matching between diagrams `a` and `b`. Pairs are `(a-side,
/// b-side)`; every point of both diagrams appears exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(Partner, Partner)>,
    pub cost: f64,
}

fn linf(p: &DiagramPoint, q: &DiagramPoint) -> f64 {
    (p.birth - q.birth).abs().max((p.death - q.death).abs())
}

fn check_compatible(a: &Diagram, b: &Diagram) -> Result<()> {
    if a.direction != b.direction {
        return Err(Error::invalid(format!(
            "cannot compare a {:?} diagram with a {:?} diagram",
            a.direction, b.direction
        )));
    }
    Ok(())
}

/// Exact bottleneck distance `W∞(a, b)` with L∞ ground distance in (birth,
/// death) coordinates. Points may be matched to the diagonal at cost
/// `|b − d| / 2`. All homology dimensions present are matched together;
/// filter with [`Diagram::restrict`] first to compare one dimension.
pub fn bottleneck_distance(a: &Diagram, b: &Diagram) -> Result<f64> {
    Ok(bottleneck_matching(a, b)?.cost)
}

/// Bottleneck distance together with a matching that attains it.
pub fn bottleneck_matching(a: &Diagram, b: &Diagram) -> Result<Matching> {
    check_compatible(a, b)?;
    let (pa, pb) = (&a.points, &b.points);
    let mut candidates: Vec<f64> = Vec::with_capacity(pa.len() * pb.len() + pa.len() + pb.len());
    candidates.extend(pa.iter().chain(pb).map(DiagramPoint::half_life));
    for p in pa {
        candidates.extend(pb.iter().map(|q| linf(p, q)));
    }
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Smallest feasible candidate; the largest is always feasible.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ThresholdGraph::new(pa, pb, candidates[mid])
            .perfect_matching()
            .is_some()
        {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let r = candidates[lo];
    let mate = ThresholdGraph::new(pa, pb, r)
        .perfect_matching()
        .expect("largest candidate threshold admits a perfect matching");

    let (m, k) = (pa.len(), pb.len());
    let mut pairs = Vec::with_capacity(m + k);
    let mut cost: f64 = 0.0;
    for (left, &right) in mate.iter().enumerate() {
        let pair = match (left < m, right < k) {
            (true, true) => {
                cost = cost.max(linf(&pa[left], &pb[right]));
                (Partner::Point(left), Partner::Point(right))
            }
            (true, false) => {
                cost = cost.max(pa[left].half_life());
                (Partner::Point(left), Partner::Diagonal)
            }
            (false, true) => {
                cost = cost.max(pb[right].half_life());
                (Partner::Diagonal, Partner::Point(right))
            }
            (false, false) => continue,
        };
        pairs.push(pair);
    }
    Ok(Matching { pairs, cost })
}

// Bipartite graph for a threshold r. Left: points of a (0..m), then the
// diagonal copies of points of b (m..m+k). Right: points of b (0..k), then the
// diagonal copies of points of a (k..k+m).
struct ThresholdGraph {
    adj: Vec<Vec<usize>>,
    right: usize,
}

impl ThresholdGraph {
    fn new(pa: &[DiagramPoint], pb: &[DiagramPoint], r: f64) -> Self {
        let (m, k) = (pa.len(), pb.len());
        let mut adj = vec![Vec::new(); m + k];
        for (i, p) in pa.iter().enumerate() {
            for (j, q) in pb.iter().enumerate() {
                if linf(p, q) <= r {
                    adj[i].push(j);
                }
            }
            if p.half_life() <= r {
                adj[i].push(k + i);
            }
        }
        for (j, q) in pb.iter().enumerate() {
            let row = &mut adj[m + j];
            if q.half_life() <= r {
                row.push(j);
            }
            row.extend(k..k + m);
        }
        ThresholdGraph { adj, right: k + m }
    }

    /// Hopcroft–Karp. Returns the right partner of every left vertex when the
    /// graph has a perfect matching.
    fn perfect_matching(&self) -> Option<Vec<usize>> {
        let n = self.adj.len();
        let mut mate_l = vec![NONE; n];
        let mut mate_r = vec![NONE; self.right];
        let mut dist = vec![0usize; n];
        let mut size = 0;
        loop {
            if !self.bfs(&mate_l, &mate_r, &mut dist) {
                break;
            }
            let mut next = vec![0usize; n];
            for u in 0..n {
                if mate_l[u] == NONE && self.dfs(u, &mut mate_l, &mut mate_r, &mut dist, &mut next)
                {
                    size += 1;
                }
            }
        }
        (size == n).then_some(mate_l)
    }

    fn bfs(&self, mate_l: &[usize], mate_r: &[usize], dist: &mut [usize]) -> bool {
        let mut queue = std::collections::VecDeque::new();
        for u in 0..self.adj.len() {
            if mate_l[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = NONE;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                let w = mate_r[v];
                if w == NONE {
                    found = true;
                } else if dist[w] == NONE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        found
    }

    fn dfs(
        &self,
        u: usize,
        mate_l: &mut [usize],
        mate_r: &mut [usize],
        dist: &mut [usize],
        next: &mut [usize],
    ) -> bool {
        while next[u] < self.adj[u].len() {
            let v = self.adj[u][next[u]];
            next[u] += 1;
            let w = mate_r[v];
            if w == NONE || (dist[w] == dist[u] + 1 && self.dfs(w, mate_l, mate_r, dist, next)) {
                mate_l[u] = v;
                mate_r[v] = u;
                return true;
            }
        }
        dist[u] = NONE;
        false
    }
}

const NONE: usize = usize::MAX;

/// Points whose half-life exceeds `c`: the features whose confidence box of
/// side `2c` stays clear of the diagonal.
pub fn significant_points(diag: &Diagram, c: f64) -> Result<Diagram> {
    if !(c >= 0.0) {
        return Err(Error::invalid(format!("threshold c must be >= 0, got {c}")));
    }
    Ok(Diagram {
        points: diag
            .points
            .iter()
            .copied()
            .filter(|p| p.half_life() > c)
            .collect(),
        direction: diag.direction,
        bound: diag.bound,
    })
}
