//! Planar primitives, the grid decomposition of polygonal disks, and the
//! Lipschitz extension / area comparison utilities.

mod grid;
mod point;
mod polygon;

pub(crate) use grid::point_key;
pub use grid::{grid_decompose, CellKind, GridCell, GridDecomposition, MAX_HALVINGS};
pub use point::{orient, Point2};
pub(crate) use polygon::signed_area as polygon_signed_area;
pub use polygon::{
    is_simple_polygon, point_segment_distance, segment_distance, Bbox, PlanarPolygon,
};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("grid decomposition failed after {halvings} halvings (last step {last_step})")]
    DecompositionFailed { halvings: usize, last_step: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// McShane extension of sampled plane-valued data, evaluated at one query point.
///
/// `query_distances[k]` is the distance from the query point to sample `k`
/// and `boundary_values[k]` the value there. Each coordinate of the result is
/// `min_k (f_i(y_k) + L d(x, y_k))`, which is `L`-Lipschitz into the
/// `l-infinity` plane and agrees with the data at the samples when the data is
/// itself `L`-Lipschitz.
pub fn mcshane_extend<T: Scalar>(
    query_distances: &[T],
    boundary_values: &[Point2<T>],
    lipschitz: T,
) -> Result<Point2<T>, GeometryError> {
    if query_distances.is_empty() {
        return Err(GeometryError::InvalidInput("empty sample list".into()));
    }
    if query_distances.len() != boundary_values.len() {
        return Err(GeometryError::InvalidInput(format!(
            "{} distances but {} values",
            query_distances.len(),
            boundary_values.len()
        )));
    }
    if !(lipschitz > T::zero()) {
        return Err(GeometryError::InvalidInput("Lipschitz constant must be positive".into()));
    }
    if query_distances.iter().any(|d| !(*d >= T::zero())) {
        return Err(GeometryError::InvalidInput("distances must be nonnegative".into()));
    }
    let mut out = Point2::new(T::infinity(), T::infinity());
    for (d, v) in query_distances.iter().zip(boundary_values) {
        out.x = out.x.min(v.x + lipschitz * *d);
        out.y = out.y.min(v.y + lipschitz * *d);
    }
    Ok(out)
}

/// Lower bound `pi / (4 L^2) * area` for the area of a disk whose boundary
/// maps `L`-Lipschitz with nonzero degree onto the boundary of a planar
/// region of area `area`.
pub fn besicovitch_lower_bound<T: Scalar>(lipschitz: T, area: T) -> Result<T, GeometryError> {
    if !(lipschitz > T::zero()) || !(area >= T::zero()) {
        return Err(GeometryError::InvalidInput(
            "need L > 0 and a nonnegative area".into(),
        ));
    }
    Ok(T::PI() / (T::lit(4.0) * lipschitz * lipschitz) * area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mcshane_at_sample_returns_value() {
        let vals = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.5)];
        // data is 1-Lipschitz for d = 1 between the samples
        let p = mcshane_extend(&[0.0, 1.0], &vals, 1.0).unwrap();
        assert_eq!(p, vals[0]);
    }

    #[test]
    fn mcshane_two_samples() {
        let vals = [Point2::new(0.0, 0.0), Point2::new(3.0, 0.0)];
        let p = mcshane_extend(&[1.0, 1.0], &vals, 1.0).unwrap();
        assert_eq!(p, Point2::new(1.0, 1.0));
    }

    #[test]
    fn mcshane_monotone_in_l() {
        let vals = [Point2::new(0.2, -1.0), Point2::new(3.0, 0.4), Point2::new(-0.5, 2.0)];
        let d = [0.3, 1.2, 0.7];
        let a = mcshane_extend(&d, &vals, 1.0).unwrap();
        let b = mcshane_extend(&d, &vals, 2.0).unwrap();
        assert!(b.x >= a.x && b.y >= a.y);
    }

    #[test]
    fn mcshane_rejects_empty() {
        assert!(matches!(
            mcshane_extend::<f64>(&[], &[], 1.0),
            Err(GeometryError::InvalidInput(_))
        ));
    }

    #[test]
    fn besicovitch_values() {
        assert_eq!(besicovitch_lower_bound(1.0, 1.0).unwrap(), PI / 4.0);
        assert_eq!(besicovitch_lower_bound(2.0, 4.0).unwrap(), PI / 4.0);
        let a = 3.7;
        let v = besicovitch_lower_bound(4.0, a).unwrap();
        assert!((v - PI / 64.0 * a).abs() <= 1e-15);
    }
}
