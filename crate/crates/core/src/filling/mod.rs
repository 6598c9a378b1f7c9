//! Polyhedral fillings of simple metric triangles.
//!
//! The boundary is embedded in the plane, a polygon through a partition of
//! the boundary is decomposed into small grid cells, the cell skeleton is
//! rescaled by 4, and every cell (and every bigon between a boundary arc and
//! its polygon side) is capped by an open box.

mod build;
mod verify;

pub use build::{fill_triangle, partition_boundary, FillAccounting, FilledTriangle, MARKERS};
pub use verify::{verify_filling, FillingReport};

use thiserror::Error;

use crate::complex::ComplexError;
use crate::geometry::GeometryError;
use crate::triangle::TriangleError;

/// Scale factor applied to Euclidean lengths of the cell skeleton.
pub const SKELETON_SCALE: f64 = 4.0;
/// Diameter constant of the filling.
pub const DIAMETER_CONSTANT: f64 = 49.0;
/// Area constant of the filling, `32 * 171`.
pub const AREA_CONSTANT: f64 = 32.0 * 171.0;
/// Arc caps have perimeter at most this multiple of their chord.
pub const ARC_CAP_FACTOR: f64 = 17.0;
/// `L0 = 5 (17/4)^2`, the area factor of an arc cap.
pub const ARC_CAP_AREA: f64 = 5.0 * (17.0 / 4.0) * (17.0 / 4.0);
/// Halvings of the requested `eps` before giving up.
pub const EPS_HALVINGS: usize = 30;
/// Fewest boundary segments per edge accepted for a filling.
pub const MIN_SEGMENTS_PER_EDGE: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FillError {
    #[error("embedded boundary is not a simple polygon; refine the sampling")]
    NonSimpleBoundary,
    #[error("triangle is degenerate: its embedded region has zero area")]
    DegenerateTriangle,
    #[error("no admissible eps after {0} halvings")]
    EpsBudget(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Triangle(#[from] TriangleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}
