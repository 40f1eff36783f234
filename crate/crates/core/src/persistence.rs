//! Persistence diagrams by reduction of the ℤ/2 boundary matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{rips_filtration, xor_sorted, Direction, Filtration};
use crate::sampling::PointCloud;

/// One point of a diagram, in (birth, death) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
    pub dim: usize,
}

impl DiagramPoint {
    pub fn new(birth: f64, death: f64, dim: usize) -> Self {
        DiagramPoint { birth, death, dim }
    }

    /// Half the persistence, `|b − d| / 2`; also the L∞ distance to the
    /// diagonal.
    pub fn half_life(&self) -> f64 {
        (self.birth - self.death).abs() / 2.0
    }

    pub fn mid_life(&self) -> f64 {
        (self.birth + self.death) / 2.0
    }
}

/// A finite multiset of off-diagonal points. The diagonal is implicit with
/// infinite multiplicity.
///
/// Superlevel diagrams satisfy `0 ≤ death ≤ birth ≤ bound`; sublevel ones
/// `0 ≤ birth ≤ death ≤ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    pub points: Vec<DiagramPoint>,
    pub direction: Direction,
    pub bound: f64,
}

impl Diagram {
    pub fn new(points: Vec<DiagramPoint>, direction: Direction, bound: f64) -> Result<Self> {
        let d = Diagram {
            points,
            direction,
            bound,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn empty(direction: Direction, bound: f64) -> Self {
        Diagram {
            points: Vec::new(),
            direction,
            bound,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bound > 0.0 && self.bound.is_finite()) {
            return Err(Error::invalid(format!(
                "diagram bound must be > 0, got {}",
                self.bound
            )));
        }
        for p in &self.points {
            let (lo, hi) = match self.direction {
                Direction::Superlevel => (p.death, p.birth),
                Direction::Sublevel => (p.birth, p.death),
            };
            if !(0.0 <= lo && lo <= hi && hi <= self.bound) {
                return Err(Error::invalid(format!(
                    "{:?} point (birth {}, death {}) outside the diagram bounds [0, {}]",
                    self.direction, p.birth, p.death, self.bound
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points of homology dimension `dim` only.
    pub fn restrict(&self, dim: usize) -> Diagram {
        Diagram {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| p.dim == dim)
                .collect(),
            direction: self.direction,
            bound: self.bound,
        }
    }

    /// Number of points in each dimension `0..=max dim`.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let top = self.points.iter().map(|p| p.dim).max();
        let mut counts = vec![0; top.map_or(0, |d| d + 1)];
        for p in &self.points {
            counts[p.dim] += 1;
        }
        counts
    }

    /// Points sorted by (dim, birth, death), for order-insensitive comparison.
    pub fn sorted(&self) -> Diagram {
        let mut points = self.points.clone();
        points.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        Diagram {
            points,
            direction: self.direction,
            bound: self.bound,
        }
    }
}

/// A point in mid-life / half-life coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidlifePoint {
    pub x: f64,
    pub y: f64,
    pub dim: usize,
}

/// Maps `(b, d)` to `((b + d)/2, |b − d|/2)`.
pub fn diagram_to_midlife(diag: &Diagram) -> Vec<MidlifePoint> {
    diag.points
        .iter()
        .map(|p| MidlifePoint {
            x: p.mid_life(),
            y: p.half_life(),
            dim: p.dim,
        })
        .collect()
}

/// Reduction strategy. Both produce the same pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    /// Column reduction of the boundary matrix, highest dimension first,
    /// zeroing the column of every pivot row found (clearing).
    #[default]
    Twist,
    /// Reduction of the coboundary matrix in reverse filtration order, lowest
    /// dimension first, with clearing. Much cheaper on flag complexes, where
    /// most triangles would otherwise be reduced to zero.
    Cohomology,
}

/// Index-level persistence pairing of a filtration.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Pairing {
    /// `(creator, destroyer)` cell ids, sorted by creator.
    pub pairs: Vec<(usize, usize)>,
    /// Creators never destroyed, ascending.
    pub essential: Vec<usize>,
}

const NONE: usize = usize::MAX;

/// Persistence pairing of `filt` with the chosen algorithm.
pub fn persistence_pairs(filt: &Filtration, algorithm: Algorithm) -> Pairing {
    let mut pairing = match algorithm {
        Algorithm::Twist => reduce_twist(filt),
        Algorithm::Cohomology => reduce_cohomology(filt),
    };
    pairing.pairs.sort_unstable();
    pairing.essential.sort_unstable();
    pairing
}

fn reduce_twist(filt: &Filtration) -> Pairing {
    let n = filt.len();
    let top = filt.max_dim().unwrap_or(0);
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for id in 0..n {
        by_dim[filt.dim(id)].push(id);
    }
    // pivot_of[row] = column whose lowest entry is `row`
    let mut pivot_of = vec![NONE; n];
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut cleared = vec![false; n];
    let mut is_death = vec![false; n];
    let mut pairs = Vec::new();

    for d in (1..=top).rev() {
        for &j in &by_dim[d] {
            if cleared[j] {
                continue;
            }
            let mut col = filt.boundary(j).to_vec();
            while let Some(&low) = col.last() {
                let other = pivot_of[low];
                if other == NONE {
                    break;
                }
                col = xor_sorted(&col, &reduced[other]);
            }
            if let Some(&low) = col.last() {
                pivot_of[low] = j;
                cleared[low] = true;
                is_death[j] = true;
                pairs.push((low, j));
                reduced[j] = col;
            }
        }
    }
    let essential = (0..n)
        .filter(|&i| !is_death[i] && pivot_of[i] == NONE)
        .collect();
    Pairing { pairs, essential }
}

fn reduce_cohomology(filt: &Filtration) -> Pairing {
    let n = filt.len();
    let top = filt.max_dim().unwrap_or(0);
    let mut cob: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        for &f in filt.boundary(j) {
            cob[f].push(j);
        }
    }
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for id in 0..n {
        by_dim[filt.dim(id)].push(id);
    }
    // pivot_of[row] = column whose earliest coface is `row`
    let mut pivot_of = vec![NONE; n];
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut is_birth = vec![false; n];
    let mut pairs = Vec::new();

    for cells in by_dim.iter().take(top) {
        for &i in cells.iter().rev() {
            if pivot_of[i] != NONE {
                // i destroys an earlier class; its cocycle column is zero
                continue;
            }
            let mut col = std::mem::take(&mut cob[i]);
            while let Some(&piv) = col.first() {
                let other = pivot_of[piv];
                if other == NONE {
                    break;
                }
                col = xor_sorted(&col, &reduced[other]);
            }
            if let Some(&piv) = col.first() {
                pivot_of[piv] = i;
                is_birth[i] = true;
                pairs.push((i, piv));
                reduced[i] = col;
            }
        }
    }
    let essential = (0..n)
        .filter(|&i| !is_birth[i] && pivot_of[i] == NONE)
        .collect();
    Pairing { pairs, essential }
}

/// Options for [`compute_persistence_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct PersistenceOptions {
    pub algorithm: Algorithm,
    /// Diagram bound T; defaults to the largest filtration value. Rips
    /// callers pass the radius cutoff.
    pub bound: Option<f64>,
}

/// Persistence diagram of `filt` with default options.
pub fn compute_persistence(filt: &Filtration) -> Result<Diagram> {
    compute_persistence_with(filt, PersistenceOptions::default())
}

/// Persistence diagram of `filt`.
///
/// Each pair `(σ, τ)` becomes the point `(value σ, value τ)` in dimension
/// `dim σ`; equal-value pairs are dropped. Classes never destroyed get death
/// 0 in superlevel diagrams and death `bound` in sublevel ones.
pub fn compute_persistence_with(filt: &Filtration, opts: PersistenceOptions) -> Result<Diagram> {
    filt.validate()?;
    let direction = filt.direction();
    let values = filt.values();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    if !values.is_empty() && lo < 0.0 {
        return Err(Error::invalid(format!(
            "filtration values must be nonnegative, found {lo}"
        )));
    }
    let bound = match opts.bound {
        Some(t) => {
            if !(t > 0.0 && t.is_finite()) || (!values.is_empty() && hi > t) {
                return Err(Error::invalid(format!(
                    "diagram bound {t} must be positive and at least the largest value {hi}"
                )));
            }
            t
        }
        None if values.is_empty() || hi <= 0.0 => 1.0,
        None => hi,
    };
    let pairing = persistence_pairs(filt, opts.algorithm);
    let mut points = Vec::with_capacity(pairing.pairs.len() + pairing.essential.len());
    for &(s, t) in &pairing.pairs {
        if values[s] != values[t] {
            points.push(DiagramPoint::new(values[s], values[t], filt.dim(s)));
        }
    }
    let essential_death = match direction {
        Direction::Superlevel => 0.0,
        Direction::Sublevel => bound,
    };
    for &s in &pairing.essential {
        if values[s] != essential_death {
            points.push(DiagramPoint::new(values[s], essential_death, filt.dim(s)));
        }
    }
    Diagram::new(points, direction, bound)
}

/// Rips persistence of a point cloud with bound `max_radius`, reduced by
/// cohomology.
pub fn rips_persistence(cloud: &PointCloud, max_dim: usize, max_radius: f64) -> Result<Diagram> {
    let filt = rips_filtration(cloud, max_dim, max_radius)?;
    compute_persistence_with(
        &filt,
        PersistenceOptions {
            algorithm: Algorithm::Cohomology,
            bound: Some(max_radius),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{Grid, GridField};
    use crate::filtration::{cubical_superlevel, RawCell};

    fn field_1d(values: &[f64]) -> GridField {
        let grid = Grid::new(vec![0.0], vec![1.0], vec![values.len() - 1]).unwrap();
        GridField::new(grid, values.to_vec()).unwrap()
    }

    #[test]
    fn one_dimensional_hand_case() {
        let filt = cubical_superlevel(&field_1d(&[1.0, 3.0, 2.0, 4.0])).unwrap();
        for algorithm in [Algorithm::Twist, Algorithm::Cohomology] {
            let d = compute_persistence_with(
                &filt,
                PersistenceOptions {
                    algorithm,
                    bound: None,
                },
            )
            .unwrap()
            .sorted();
            assert_eq!(
                d.points,
                vec![
                    DiagramPoint::new(3.0, 2.0, 0),
                    DiagramPoint::new(4.0, 0.0, 0)
                ]
            );
            assert_eq!(d.bound, 4.0);
        }
    }

    #[test]
    fn constant_field_has_one_class() {
        let grid = Grid::cube(2, 0.0, 1.0, 4).unwrap();
        let filt = cubical_superlevel(&GridField::new(grid, vec![2.5; 25]).unwrap()).unwrap();
        let d = compute_persistence(&filt).unwrap();
        assert_eq!(d.points, vec![DiagramPoint::new(2.5, 0.0, 0)]);
    }

    #[test]
    fn unit_square_loop() {
        let cloud = PointCloud::new(2, vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap();
        let d = rips_persistence(&cloud, 2, 2.0).unwrap();
        let h1 = d.restrict(1);
        assert_eq!(h1.points, vec![DiagramPoint::new(1.0, 2f64.sqrt(), 1)]);
        // three finite H0 merges at 1 and the essential component
        let h0 = d.restrict(0).sorted();
        assert_eq!(h0.len(), 4);
        assert_eq!(h0.points[3], DiagramPoint::new(0.0, 2.0, 0));
    }

    #[test]
    fn twist_and_cohomology_agree_on_rips() {
        let cloud = crate::sampling::sample_circles(
            &crate::sampling::nine_circles(),
            60,
            crate::sampling::Seed::new(4),
        )
        .unwrap();
        let filt = rips_filtration(&cloud, 2, 0.8).unwrap();
        assert_eq!(
            persistence_pairs(&filt, Algorithm::Twist),
            persistence_pairs(&filt, Algorithm::Cohomology)
        );
    }

    #[test]
    fn hollow_triangle_has_essential_loop() {
        let raw = |dim, value, boundary: Vec<usize>| RawCell {
            dim,
            value,
            boundary,
        };
        let cells = vec![
            raw(0, 0.0, vec![]),
            raw(0, 0.0, vec![]),
            raw(0, 0.0, vec![]),
            raw(1, 1.0, vec![0, 1]),
            raw(1, 1.0, vec![1, 2]),
            raw(1, 2.0, vec![0, 2]),
        ];
        let filt = Filtration::from_cells(Direction::Sublevel, cells).unwrap();
        let d = compute_persistence_with(
            &filt,
            PersistenceOptions {
                bound: Some(3.0),
                ..Default::default()
            },
        )
        .unwrap()
        .sorted();
        assert_eq!(
            d.points,
            vec![
                DiagramPoint::new(0.0, 1.0, 0),
                DiagramPoint::new(0.0, 1.0, 0),
                DiagramPoint::new(0.0, 3.0, 0),
                DiagramPoint::new(2.0, 3.0, 1),
            ]
        );
    }

    #[test]
    fn midlife_coordinates() {
        let d = Diagram::new(
            vec![
                DiagramPoint::new(4.0, 0.0, 0),
                DiagramPoint::new(3.0, 2.0, 1),
            ],
            Direction::Superlevel,
            4.0,
        )
        .unwrap();
        let m = diagram_to_midlife(&d);
        assert_eq!((m[0].x, m[0].y), (2.0, 2.0));
        assert_eq!((m[1].x, m[1].y, m[1].dim), (2.5, 0.5, 1));
        let s2 = 2f64.sqrt();
        let sub = Diagram::new(
            vec![DiagramPoint::new(1.0, s2, 1)],
            Direction::Sublevel,
            2.0,
        )
        .unwrap();
        let m = diagram_to_midlife(&sub);
        assert_eq!((m[0].x, m[0].y), ((1.0 + s2) / 2.0, (s2 - 1.0) / 2.0));
    }

    #[test]
    fn diagram_bounds_enforced() {
        let p = DiagramPoint::new(1.0, 2.0, 0);
        assert!(Diagram::new(vec![p], Direction::Superlevel, 3.0).is_err());
        assert!(Diagram::new(vec![p], Direction::Sublevel, 3.0).is_ok());
        assert!(Diagram::new(vec![p], Direction::Sublevel, 1.5).is_err());
        assert!(Diagram::new(vec![], Direction::Sublevel, 0.0).is_err());
    }

    #[test]
    fn negative_superlevel_values_rejected() {
        let filt = cubical_superlevel(&field_1d(&[1.0, -1.0])).unwrap();
        assert!(compute_persistence(&filt).is_err());
    }
}
