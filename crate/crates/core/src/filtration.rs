//! Filtered cell complexes: cubical superlevel filtrations of grid fields and
//! Vietoris–Rips filtrations of point clouds.
//!
//! A [`Filtration`] stores its cells already sorted in filtration order; a
//! cell's id is its position in that order, and boundaries refer to ids.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::density::GridField;
use crate::error::{Error, Result};
use crate::sampling::PointCloud;

/// Which way the filtration parameter sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Cells enter in decreasing value order (superlevel sets `f ≥ t`).
    Superlevel,
    /// Cells enter in increasing value order (sublevel sets `f ≤ t`).
    Sublevel,
}

impl Direction {
    /// Compares two filtration values by entry time.
    pub fn cmp_values(self, a: f64, b: f64) -> Ordering {
        match self {
            Direction::Superlevel => b.total_cmp(&a),
            Direction::Sublevel => a.total_cmp(&b),
        }
    }
}

/// A cell not yet placed in filtration order. `boundary` holds indices into
/// the same input list.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCell {
    pub dim: usize,
    pub value: f64,
    pub boundary: Vec<usize>,
}

/// Borrowed view of one cell of a [`Filtration`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<'a> {
    pub id: usize,
    pub dim: usize,
    pub value: f64,
    pub boundary: &'a [usize],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    direction: Direction,
    dims: Vec<u8>,
    values: Vec<f64>,
    offsets: Vec<usize>,
    faces: Vec<usize>,
}

impl Filtration {
    /// Sorts `cells` into filtration order by `(value, dim, input index)` and
    /// renumbers boundaries accordingly. The result is validated.
    pub fn from_cells(direction: Direction, cells: Vec<RawCell>) -> Result<Self> {
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| {
            direction
                .cmp_values(cells[a].value, cells[b].value)
                .then(cells[a].dim.cmp(&cells[b].dim))
                .then(a.cmp(&b))
        });
        let mut position = vec![0usize; cells.len()];
        for (pos, &raw) in order.iter().enumerate() {
            position[raw] = pos;
        }
        let mut filt = Filtration::with_capacity(direction, cells.len(), 0);
        for &raw in &order {
            let c = &cells[raw];
            let mut boundary = Vec::with_capacity(c.boundary.len());
            for &f in &c.boundary {
                if f >= cells.len() {
                    return Err(Error::InvalidFiltration(format!(
                        "boundary refers to missing cell {f}"
                    )));
                }
                boundary.push(position[f]);
            }
            boundary.sort_unstable();
            filt.push(c.dim, c.value, &boundary)?;
        }
        filt.validate()?;
        Ok(filt)
    }

    fn with_capacity(direction: Direction, cells: usize, faces: usize) -> Self {
        let mut offsets = Vec::with_capacity(cells + 1);
        offsets.push(0);
        Filtration {
            direction,
            dims: Vec::with_capacity(cells),
            values: Vec::with_capacity(cells),
            offsets,
            faces: Vec::with_capacity(faces),
        }
    }

    fn push(&mut self, dim: usize, value: f64, boundary: &[usize]) -> Result<()> {
        let dim = u8::try_from(dim)
            .map_err(|_| Error::InvalidFiltration(format!("cell dimension {dim} too large")))?;
        self.dims.push(dim);
        self.values.push(value);
        self.faces.extend_from_slice(boundary);
        self.offsets.push(self.faces.len());
        Ok(())
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self, id: usize) -> usize {
        self.dims[id] as usize
    }

    pub fn value(&self, id: usize) -> f64 {
        self.values[id]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Boundary ids of cell `id`, sorted ascending.
    pub fn boundary(&self, id: usize) -> &[usize] {
        &self.faces[self.offsets[id]..self.offsets[id + 1]]
    }

    pub fn cell(&self, id: usize) -> Cell<'_> {
        Cell {
            id,
            dim: self.dim(id),
            value: self.values[id],
            boundary: self.boundary(id),
        }
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = Cell<'_>> + '_ {
        (0..self.len()).map(move |i| self.cell(i))
    }

    /// Largest cell dimension, or `None` when empty.
    pub fn max_dim(&self) -> Option<usize> {
        self.dims.iter().max().map(|&d| d as usize)
    }

    /// Number of cells of each dimension `0..=max_dim`.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim().map_or(0, |d| d + 1)];
        for &d in &self.dims {
            counts[d as usize] += 1;
        }
        counts
    }

    /// Checks finite values, monotone order, boundary dimensions,
    /// face-before-coface, and `∂∂ = 0` over ℤ/2.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFiltration(msg));
        for id in 0..self.len() {
            let v = self.values[id];
            if !v.is_finite() {
                return bad(format!("cell {id} has non-finite value"));
            }
            if id > 0 && self.direction.cmp_values(self.values[id - 1], v) == Ordering::Greater {
                return bad(format!(
                    "cell {id} breaks the {:?} value order",
                    self.direction
                ));
            }
            let dim = self.dim(id);
            let boundary = self.boundary(id);
            if dim == 0 && !boundary.is_empty() {
                return bad(format!("vertex {id} has a nonempty boundary"));
            }
            for w in boundary.windows(2) {
                if w[0] >= w[1] {
                    return bad(format!("cell {id} has repeated or unsorted boundary ids"));
                }
            }
            for &f in boundary {
                if f >= id {
                    return bad(format!("face {f} of cell {id} does not precede it"));
                }
                if self.dim(f) + 1 != dim {
                    return bad(format!(
                        "face {f} of cell {id} has dimension {}",
                        self.dim(f)
                    ));
                }
            }
            if dim >= 2 {
                let mut acc: Vec<usize> = Vec::new();
                for &f in boundary {
                    acc = xor_sorted(&acc, self.boundary(f));
                }
                if !acc.is_empty() {
                    return bad(format!("boundary of boundary of cell {id} is nonzero"));
                }
            }
        }
        Ok(())
    }

    /// Text dump, one cell per line: `id dim value boundary-ids...`.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for c in self.cells() {
            let _ = write!(out, "{} {} {:.16e}", c.id, c.dim, c.value);
            for f in c.boundary {
                let _ = write!(out, " {f}");
            }
            out.push('\n');
        }
        out
    }
}

/// Symmetric difference of two ascending id lists.
pub(crate) fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Full cubical complex on the field's grid, filtered by superlevel sets with
/// the lower-star rule: a cube's value is the minimum over its vertices.
///
/// Cubes are addressed on the doubled grid: coordinate `c_a ∈ 0..=2·res_a`,
/// even along axes where the cube is a point and odd where it spans an edge.
pub fn cubical_superlevel(field: &GridField) -> Result<Filtration> {
    field.validate()?;
    let grid = &field.grid;
    let dim = grid.dim();
    let shape: Vec<usize> = grid.resolution.iter().map(|r| 2 * r + 1).collect();
    let mut strides = vec![1usize; dim];
    for a in (0..dim.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let total: usize = shape.iter().product();

    // Per-cube values on the doubled grid.
    let vstrides = grid.strides();
    let mut values = vec![0.0f64; total];
    let mut cube_dim = vec![0u8; total];
    let mut coord = vec![0usize; dim];
    for (flat, (val, cd)) in values.iter_mut().zip(cube_dim.iter_mut()).enumerate() {
        unravel_into(flat, &shape, &mut coord);
        *cd = coord.iter().filter(|c| *c % 2 == 1).count() as u8;
        if *cd == 0 {
            let v: usize = coord.iter().zip(&vstrides).map(|(c, s)| (c / 2) * s).sum();
            *val = field.values[v];
        }
    }
    for a in 0..dim {
        for flat in 0..total {
            unravel_into(flat, &shape, &mut coord);
            if coord[a] % 2 == 1 && coord[a + 1..].iter().all(|c| c % 2 == 0) {
                values[flat] = values[flat - strides[a]].min(values[flat + strides[a]]);
            }
        }
    }

    let mut order: Vec<usize> = (0..total).collect();
    order.sort_unstable_by(|&x, &y| {
        values[y]
            .total_cmp(&values[x])
            .then(cube_dim[x].cmp(&cube_dim[y]))
            .then(x.cmp(&y))
    });
    let mut position = vec![0usize; total];
    for (pos, &flat) in order.iter().enumerate() {
        position[flat] = pos;
    }

    let faces_total: usize = cube_dim.iter().map(|&d| 2 * d as usize).sum();
    let mut filt = Filtration::with_capacity(Direction::Superlevel, total, faces_total);
    let mut boundary = Vec::with_capacity(2 * dim);
    for &flat in &order {
        unravel_into(flat, &shape, &mut coord);
        boundary.clear();
        for a in 0..dim {
            if coord[a] % 2 == 1 {
                boundary.push(position[flat - strides[a]]);
                boundary.push(position[flat + strides[a]]);
            }
        }
        boundary.sort_unstable();
        filt.push(cube_dim[flat] as usize, values[flat], &boundary)?;
    }
    Ok(filt)
}

fn unravel_into(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for a in (0..shape.len()).rev() {
        out[a] = flat % shape[a];
        flat /= shape[a];
    }
}

/// Vietoris–Rips (flag) filtration up to dimension `max_dim ≤ 2`, keeping
/// simplices whose diameter is at most `max_radius`.
///
/// Vertices enter at 0, an edge at the Euclidean length, a triangle at the
/// largest of its edge lengths.
pub fn rips_filtration(cloud: &PointCloud, max_dim: usize, max_radius: f64) -> Result<Filtration> {
    if max_dim > 2 {
        return Err(Error::Unsupported(format!(
            "Rips filtrations support max_dim <= 2, got {max_dim}"
        )));
    }
    if !(max_radius > 0.0 && max_radius.is_finite()) {
        return Err(Error::invalid(format!(
            "max_radius must be > 0, got {max_radius}"
        )));
    }
    if cloud.is_empty() {
        return Err(Error::invalid("point cloud must be nonempty"));
    }
    let n = cloud.len();
    let dist = |i: usize, j: usize| -> f64 {
        cloud
            .point(i)
            .iter()
            .zip(cloud.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };

    // Simplices in construction order: vertices, edges (lexicographic),
    // triangles (lexicographic). Keys sort them into filtration order.
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut edge_id = vec![usize::MAX; if max_dim >= 1 { n * n } else { 0 }];
    if max_dim >= 1 {
        for i in 0..n {
            for j in i + 1..n {
                let d = dist(i, j);
                if d <= max_radius {
                    edge_id[i * n + j] = edges.len();
                    edges.push((i, j, d));
                }
            }
        }
    }
    let mut triangles: Vec<([usize; 3], f64)> = Vec::new();
    if max_dim >= 2 {
        let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j, _) in &edges {
            nbrs[i].push(j);
        }
        for &(i, j, dij) in &edges {
            // k > j adjacent to both i and j; emitted in lexicographic (i, j, k) order
            for &k in &nbrs[j] {
                let ik = edge_id[i * n + k];
                if ik != usize::MAX {
                    let d = dij.max(edges[ik].2).max(edges[edge_id[j * n + k]].2);
                    triangles.push(([edge_id[i * n + j], ik, edge_id[j * n + k]], d));
                }
            }
        }
    }

    let total = n + edges.len() + triangles.len();
    // (value, dim, construction index)
    let mut keys: Vec<(f64, u8, usize)> = Vec::with_capacity(total);
    keys.extend((0..n).map(|i| (0.0, 0u8, i)));
    keys.extend(
        edges
            .iter()
            .enumerate()
            .map(|(e, &(_, _, d))| (d, 1u8, n + e)),
    );
    keys.extend(
        triangles
            .iter()
            .enumerate()
            .map(|(t, &(_, d))| (d, 2u8, n + edges.len() + t)),
    );
    keys.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut position = vec![0usize; total];
    for (pos, k) in keys.iter().enumerate() {
        position[k.2] = pos;
    }

    let mut filt = Filtration::with_capacity(
        Direction::Sublevel,
        total,
        2 * edges.len() + 3 * triangles.len(),
    );
    let mut boundary = Vec::with_capacity(3);
    for &(value, dim, raw) in &keys {
        boundary.clear();
        if dim == 1 {
            let (i, j, _) = edges[raw - n];
            boundary.extend([position[i], position[j]]);
        } else if dim == 2 {
            let (es, _) = triangles[raw - n - edges.len()];
            boundary.extend(es.iter().map(|&e| position[n + e]));
        }
        boundary.sort_unstable();
        filt.push(dim as usize, value, &boundary)?;
    }
    Ok(filt)
}
