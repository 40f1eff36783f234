//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use persboot::filtration::{Direction, RawCell};
use persboot::persistence::{Diagram, DiagramPoint};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values on a coarse lattice so ties are common.
fn lattice(rng: &mut ChaCha8Rng, hi: f64) -> f64 {
    let steps = (hi * 8.0).round() as u32;
    rng.random_range(0..=steps) as f64 / 8.0
}

pub fn random_diagram(
    rng: &mut ChaCha8Rng,
    max_points: usize,
    direction: Direction,
    bound: f64,
) -> Diagram {
    let n = rng.random_range(0..=max_points);
    let points = (0..n)
        .map(|_| {
            let (x, y) = (lattice(rng, bound), lattice(rng, bound));
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let dim = rng.random_range(0..3);
            match direction {
                Direction::Superlevel => DiagramPoint::new(hi, lo, dim),
                Direction::Sublevel => DiagramPoint::new(lo, hi, dim),
            }
        })
        .collect();
    Diagram::new(points, direction, bound).unwrap()
}

/// Like [`random_diagram`] with continuous coordinates.
pub fn random_diagram_real(
    rng: &mut ChaCha8Rng,
    max_points: usize,
    direction: Direction,
    bound: f64,
) -> Diagram {
    let n = rng.random_range(0..=max_points);
    let points = (0..n)
        .map(|_| {
            let (x, y) = (rng.random_range(0.0..=bound), rng.random_range(0.0..=bound));
            let (lo, hi) = (x.min(y), x.max(y));
            let dim = rng.random_range(0..3);
            match direction {
                Direction::Superlevel => DiagramPoint::new(hi, lo, dim),
                Direction::Sublevel => DiagramPoint::new(lo, hi, dim),
            }
        })
        .collect();
    Diagram::new(points, direction, bound).unwrap()
}

fn linf(p: &DiagramPoint, q: &DiagramPoint) -> f64 {
    (p.birth - q.birth).abs().max((p.death - q.death).abs())
}

/// Bottleneck distance by enumerating every partial matching; unmatched
/// points go to the diagonal.
pub fn exhaustive_bottleneck(a: &[DiagramPoint], b: &[DiagramPoint]) -> f64 {
    fn go(
        i: usize,
        a: &[DiagramPoint],
        b: &[DiagramPoint],
        used: &mut [bool],
        worst: f64,
        best: &mut f64,
    ) {
        if worst >= *best {
            return;
        }
        if i == a.len() {
            let rest = b
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .map(|(q, _)| q.half_life())
                .fold(worst, f64::max);
            *best = best.min(rest);
            return;
        }
        go(i + 1, a, b, used, worst.max(a[i].half_life()), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(i + 1, a, b, used, worst.max(linf(&a[i], &b[j])), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

/// Random simplicial complex with at most `max_cells` simplices and
/// lattice values monotone along faces for `direction`.
pub fn random_complex(
    rng: &mut ChaCha8Rng,
    max_cells: usize,
    direction: Direction,
) -> Vec<RawCell> {
    let later = |rng: &mut ChaCha8Rng, v: f64| -> f64 {
        let step = rng.random_range(0..3) as f64 / 4.0;
        match direction {
            Direction::Sublevel => v + step,
            Direction::Superlevel => (v - step).max(0.0),
        }
    };
    let worst = |a: f64, b: f64| match direction {
        Direction::Sublevel => a.max(b),
        Direction::Superlevel => a.min(b),
    };
    let mut cells: Vec<RawCell> = Vec::new();
    let mut faces: std::collections::BTreeMap<Vec<usize>, usize> = Default::default();
    let nv = rng.random_range(1..=7usize);
    for v in 0..nv {
        faces.insert(vec![v], cells.len());
        cells.push(RawCell {
            dim: 0,
            value: lattice(rng, 3.0),
            boundary: vec![],
        });
    }
    for dim in 1..=3usize {
        let mut candidates = Vec::new();
        subsets(nv, dim + 1, &mut Vec::new(), 0, &mut candidates);
        for s in candidates {
            if cells.len() >= max_cells {
                return cells;
            }
            let bd: Option<Vec<usize>> = (0..s.len())
                .map(|skip| {
                    let f: Vec<usize> = s
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    faces.get(&f).copied()
                })
                .collect();
            let Some(bd) = bd else { continue };
            if rng.random::<f64>() < 0.35 {
                continue;
            }
            let base = bd.iter().map(|&f| cells[f].value).reduce(worst).unwrap();
            faces.insert(s, cells.len());
            let value = later(rng, base);
            cells.push(RawCell {
                dim,
                value,
                boundary: bd,
            });
        }
    }
    cells
}

fn subsets(n: usize, k: usize, cur: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for v in start..n {
        cur.push(v);
        subsets(n, k, cur, v + 1, out);
        cur.pop();
    }
}

/// Diagram by dense left-to-right column reduction without any
/// optimization. Ties are broken by descending input index, the opposite
/// of the library, which must not change the diagram.
pub fn naive_diagram(cells: &[RawCell], direction: Direction) -> Vec<(usize, f64, f64)> {
    let n = cells.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let by_value = match direction {
            Direction::Sublevel => cells[a].value.total_cmp(&cells[b].value),
            Direction::Superlevel => cells[b].value.total_cmp(&cells[a].value),
        };
        by_value
            .then(cells[a].dim.cmp(&cells[b].dim))
            .then(b.cmp(&a))
    });
    let mut pos = vec![0; n];
    for (p, &c) in order.iter().enumerate() {
        pos[c] = p;
    }
    let mut cols: Vec<Vec<bool>> = order
        .iter()
        .map(|&c| {
            let mut col = vec![false; n];
            for &f in &cells[c].boundary {
                col[pos[f]] = true;
            }
            col
        })
        .collect();
    let low = |col: &Vec<bool>| col.iter().rposition(|&x| x);
    for j in 0..n {
        while let Some(i) = low(&cols[j]).and_then(|l| (0..j).find(|&i| low(&cols[i]) == Some(l))) {
            let (done, rest) = cols.split_at_mut(j);
            for (x, y) in rest[0].iter_mut().zip(&done[i]) {
                *x ^= y;
            }
        }
    }
    let value = |p: usize| cells[order[p]].value;
    let dim = |p: usize| cells[order[p]].dim;
    let max = cells
        .iter()
        .map(|c| c.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let essential_death = match direction {
        Direction::Superlevel => 0.0,
        Direction::Sublevel if max > 0.0 => max,
        Direction::Sublevel => 1.0,
    };
    let mut killed = vec![false; n];
    let mut out = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        if let Some(i) = low(col) {
            killed[i] = true;
            if value(i) != value(j) {
                out.push((dim(i), value(i), value(j)));
            }
        }
    }
    for (j, col) in cols.iter().enumerate() {
        if low(col).is_none() && !killed[j] && value(j) != essential_death {
            out.push((dim(j), value(j), essential_death));
        }
    }
    out.sort_by(|x, y| {
        x.0.cmp(&y.0)
            .then(x.1.total_cmp(&y.1))
            .then(x.2.total_cmp(&y.2))
    });
    out
}

/// `(dim, birth, death)` triples sorted for multiset comparison.
pub fn triples(d: &Diagram) -> Vec<(usize, f64, f64)> {
    let mut v: Vec<_> = d.points.iter().map(|p| (p.dim, p.birth, p.death)).collect();
    v.sort_by(|x, y| {
        x.0.cmp(&y.0)
            .then(x.1.total_cmp(&y.1))
            .then(x.2.total_cmp(&y.2))
    });
    v
}

/// k-th largest tent value at `z`, straight from the definition.
pub fn kmax(points: &[DiagramPoint], k: usize, z: f64) -> f64 {
    let mut vals: Vec<f64> = points
        .iter()
        .map(|p| {
            let (lo, hi) = (p.birth.min(p.death), p.birth.max(p.death));
            (z - lo).min(hi - z).max(0.0)
        })
        .collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals.get(k - 1).copied().unwrap_or(0.0)
}
