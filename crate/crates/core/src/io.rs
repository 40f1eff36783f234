//! File formats shared by the library and the CLI.
//!
//! CSV numbers are written with 17 significant digits so every value reads
//! back bit-identically. JSON goes through `serde_json`, which also
//! round-trips `f64` exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::bootstrap::Band;
use crate::density::GridField;
use crate::error::{Error, Result};
use crate::filtration::Direction;
use crate::landscape::Landscape;
use crate::persistence::{Diagram, DiagramPoint};
use crate::sampling::{CircleSpec, PointCloud};

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!(
            "line {line}: non-finite value '{field}'"
        )));
    }
    Ok(v)
}

fn reader<R: Read>(r: R, has_header: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r)
}

/// Points, one per row, `D` comma-separated coordinates.
pub fn read_points_csv<R: Read>(r: R, has_header: bool) -> Result<PointCloud> {
    let mut coords = Vec::new();
    let mut dim = None;
    for (i, rec) in reader(r, has_header).records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("points CSV: {e}")))?;
        let line = i + 1 + has_header as usize;
        match dim {
            None => dim = Some(rec.len()),
            Some(d) if d != rec.len() => {
                return Err(Error::Parse(format!(
                    "line {line}: expected {d} fields, found {}",
                    rec.len()
                )))
            }
            _ => {}
        }
        for f in rec.iter() {
            coords.push(parse_f64(f, line)?);
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse("points CSV has no rows".into()))?;
    PointCloud::new(dim, coords)
}

pub fn write_points_csv<W: Write>(w: W, cloud: &PointCloud, header: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if header {
        out.write_record((0..cloud.dim()).map(|a| format!("x{a}")))?;
    }
    for p in cloud.iter() {
        out.write_record(p.iter().map(|&v| fmt_f64(v)))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field_json<R: Read>(r: R) -> Result<GridField> {
    let field: GridField = serde_json::from_reader(r)?;
    field.validate()?;
    Ok(field)
}

pub fn write_field_json<W: Write>(mut w: W, field: &GridField) -> Result<()> {
    serde_json::to_writer(&mut w, field)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Vertex coordinates and value per row, with a header.
pub fn write_field_csv<W: Write>(w: W, field: &GridField) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let dim = field.grid.dim();
    let mut header: Vec<String> = (0..dim).map(|a| format!("x{a}")).collect();
    header.push("value".into());
    out.write_record(&header)?;
    for (v, value) in field.values.iter().enumerate() {
        let mut row: Vec<String> = field
            .grid
            .vertex_coords(v)
            .into_iter()
            .map(fmt_f64)
            .collect();
        row.push(fmt_f64(*value));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Direction and bound of a diagram, stored next to its CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramMeta {
    pub direction: Direction,
    pub bound: f64,
}

/// `dim,birth,death` rows under a mandatory header.
pub fn write_diagram_csv<W: Write>(w: W, diag: &Diagram) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["dim", "birth", "death"])?;
    for p in &diag.points {
        out.write_record([p.dim.to_string(), fmt_f64(p.birth), fmt_f64(p.death)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_diagram_csv<R: Read>(r: R, meta: DiagramMeta) -> Result<Diagram> {
    let mut rdr = reader(r, true);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("diagram CSV: {e}")))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["dim", "birth", "death"] {
        return Err(Error::Parse(format!(
            "diagram CSV header must be dim,birth,death, got {names:?}"
        )));
    }
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("diagram CSV: {e}")))?;
        let line = i + 2;
        let dim = rec[0]
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("line {line}: bad dimension '{}'", &rec[0])))?;
        points.push(DiagramPoint::new(
            parse_f64(&rec[1], line)?,
            parse_f64(&rec[2], line)?,
            dim,
        ));
    }
    Diagram::new(points, meta.direction, meta.bound)
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<T> {
    Ok(serde_json::from_reader(r)?)
}

/// Circle layout: a JSON array of `{"center": [x, y], "radius": r}`.
pub fn read_circles_json<R: Read>(r: R) -> Result<Vec<CircleSpec>> {
    let specs: Vec<CircleSpec> = serde_json::from_reader(r)?;
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

/// `k,z,value` rows at the breakpoints of every level.
pub fn write_landscape_csv<W: Write>(w: W, l: &Landscape) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "z", "value"])?;
    for (i, level) in l.levels.iter().enumerate() {
        for &(z, v) in &level.breakpoints {
            out.write_record([(i + 1).to_string(), fmt_f64(z), fmt_f64(v)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `z,center,lower,upper` rows at the breakpoints of the band center. Lower
/// values are the formal band `center − radius`, not clamped at zero.
pub fn write_band_csv<W: Write>(w: W, band: &Band) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["z", "center", "lower", "upper"])?;
    for &(z, c) in &band.center.breakpoints {
        out.write_record([
            fmt_f64(z),
            fmt_f64(c),
            fmt_f64(c - band.radius),
            fmt_f64(c + band.radius),
        ])?;
    }
    out.flush()?;
    Ok(())
}
