//! Bootstrap inference for persistent homology.
//!
//! The crate covers the whole pipeline from samples to confidence statements:
//!
//! * [`sampling`]: seeded samplers for a torus in ℝ³ and mixtures of circles in ℝ².
//! * [`density`]: kernel density estimates on regular grids and grid sup-norms.
//! * [`filtration`]: cubical superlevel filtrations of grid fields and
//!   Vietoris–Rips filtrations of point clouds.
//! * [`persistence`]: ℤ/2 boundary-matrix reduction into persistence diagrams.
//! * [`metric`]: exact bottleneck distance between diagrams.
//! * [`landscape`]: exact piecewise-linear persistence landscapes.
//! * [`bootstrap`]: the confidence set for a density's superlevel diagram and
//!   the confidence band for a mean landscape.
//! * [`io`]: the CSV and JSON interchange formats used by the CLI.
//!
//! # Example
//!
//! ```
//! use persboot::filtration::rips_filtration;
//! use persboot::persistence::compute_persistence;
//! use persboot::sampling::PointCloud;
//!
//! let square = PointCloud::new(2, vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap();
//! let filt = rips_filtration(&square, 2, 2.0).unwrap();
//! let diagram = compute_persistence(&filt).unwrap();
//! let loops = diagram.restrict(1);
//! assert_eq!(loops.points.len(), 1);
//! assert_eq!(loops.points[0].birth, 1.0);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod density;
pub mod error;
pub mod filtration;
pub mod io;
pub mod landscape;
pub mod metric;
pub mod persistence;
pub mod sampling;

pub use error::{Error, Result};
