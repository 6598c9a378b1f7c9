use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DistanceOracle, EdgeGlue, SurfaceError, TriangulatedMetricSurface};
use crate::complex::Orientation;
use crate::scalar::Scalar;
use crate::triangle::{spherical_triangle_area, AmbientMetric, AmbientPoint, DiscreteMetricTriangle, EdgeLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    EuclideanPatch,
    SphereOctantMesh,
    LinfPatch,
}

impl FromStr for FixtureKind {
    type Err = SurfaceError;
    fn from_str(s: &str) -> Result<Self, SurfaceError> {
        match s {
            "euclidean_patch" => Ok(FixtureKind::EuclideanPatch),
            "sphere_octant_mesh" => Ok(FixtureKind::SphereOctantMesh),
            "linf_patch" => Ok(FixtureKind::LinfPatch),
            _ => Err(SurfaceError::InvalidInput(format!("unknown fixture kind {s:?}"))),
        }
    }
}

/// Builds a fixture surface. `n` is the subdivision count of the patches
/// (ignored by the octant mesh); `segments` the samples per edge.
pub fn generate_fixture<T: Scalar>(
    kind: FixtureKind,
    n: usize,
    segments: usize,
) -> Result<TriangulatedMetricSurface<T>, SurfaceError> {
    match kind {
        FixtureKind::EuclideanPatch => euclidean_patch(n, segments),
        FixtureKind::LinfPatch => linf_patch(n, segments),
        FixtureKind::SphereOctantMesh => sphere_octant_mesh(segments),
    }
}

/// The unit square cut into `n x n` squares, each split along its
/// diagonal, with planar distances.
pub fn euclidean_patch<T: Scalar>(n: usize, segments: usize) -> Result<TriangulatedMetricSurface<T>, SurfaceError> {
    square_patch(AmbientMetric::Euclidean, n, segments)
}

/// [`euclidean_patch`] with the max-norm distance. Declared areas are
/// `pi/4` times the Euclidean areas.
pub fn linf_patch<T: Scalar>(n: usize, segments: usize) -> Result<TriangulatedMetricSurface<T>, SurfaceError> {
    square_patch(AmbientMetric::Linf, n, segments)
}

/// The unit sphere cut into eight octants by the coordinate planes.
pub fn sphere_octant_mesh<T: Scalar>(segments: usize) -> Result<TriangulatedMetricSurface<T>, SurfaceError> {
    let (o, l) = (T::zero(), T::one());
    let vertices = vec![
        [l, o, o],
        [-l, o, o],
        [o, l, o],
        [o, -l, o],
        [o, o, l],
        [o, o, -l],
    ];
    let mut faces = Vec::new();
    for (sx, x) in [(1i32, 0usize), (-1, 1)] {
        for (sy, y) in [(1i32, 2usize), (-1, 3)] {
            for (sz, z) in [(1i32, 4usize), (-1, 5)] {
                faces.push(if sx * sy * sz > 0 { [x, y, z] } else { [y, x, z] });
            }
        }
    }
    from_corners(AmbientMetric::Sphere { radius: l }, &vertices, &faces, segments)
}

fn square_patch<T: Scalar>(
    metric: AmbientMetric<T>,
    n: usize,
    segments: usize,
) -> Result<TriangulatedMetricSurface<T>, SurfaceError> {
    if n == 0 {
        return Err(SurfaceError::InvalidInput("subdivision count must be at least 1".into()));
    }
    let step = T::one() / T::from_usize_lossy(n);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([T::from_usize_lossy(i) * step, T::from_usize_lossy(j) * step, T::zero()]);
        }
    }
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    from_corners(metric, &vertices, &faces, segments)
}

/// Geodesic triangles on the given corners, glued wherever two faces share
/// a pair of corners. The oracle holds the sample positions.
fn from_corners<T: Scalar>(
    metric: AmbientMetric<T>,
    vertices: &[AmbientPoint<T>],
    faces: &[[usize; 3]],
    segments: usize,
) -> Result<TriangulatedMetricSurface<T>, SurfaceError> {
    let mut triangles = Vec::with_capacity(faces.len());
    let mut positions = Vec::with_capacity(faces.len());
    let mut open: HashMap<(usize, usize), (usize, EdgeLabel, usize)> = HashMap::new();
    let mut glue = Vec::new();
    for (t, f) in faces.iter().enumerate() {
        let corners = f.map(|k| vertices[k]);
        let (tri, pos) = DiscreteMetricTriangle::from_ambient(&metric, corners, segments)
            .map_err(|e| SurfaceError::InvalidInput(e.to_string()))?;
        let area = match &metric {
            AmbientMetric::Sphere { radius } => spherical_triangle_area(&corners, *radius),
            m => {
                let (a, b, c) = (corners[0], corners[1], corners[2]);
                let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                m.planar_area_factor().unwrap_or(T::one()) * cross.abs() / T::lit(2.0)
            }
        };
        triangles.push(tri.with_declared_area(Some(area)));
        positions.push(pos);
        for e in EdgeLabel::ALL {
            let (s, u) = (f[e.index()], f[(e.index() + 1) % 3]);
            match open.remove(&(s.min(u), s.max(u))) {
                Some((b, eb, start)) => glue.push(EdgeGlue {
                    a: b,
                    ea: eb,
                    b: t,
                    eb: e,
                    orientation: if start == s { Orientation::Forward } else { Orientation::Reverse },
                }),
                None => {
                    open.insert((s.min(u), s.max(u)), (t, e, s));
                }
            }
        }
    }
    let mesh = triangles.iter().map(|t| t.diameter()).fold(T::zero(), T::max);
    TriangulatedMetricSurface::new(triangles, glue)?
        .with_mesh(Some(mesh))
        .with_oracle(DistanceOracle { metric, positions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn euclidean_patch_one() {
        let s = euclidean_patch::<f64>(1, 4).unwrap();
        assert_eq!(s.triangles().len(), 2);
        assert_eq!(s.glue().len(), 1);
        assert!((s.triangles()[0].edge_length(EdgeLabel::Rp) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.triangles()[0].declared_area(), Some(0.5));
        assert_eq!(s.glue()[0].orientation, Orientation::Reverse);
    }

    #[test]
    fn linf_patch_one() {
        let s = linf_patch::<f64>(1, 4).unwrap();
        assert_eq!(s.triangles()[0].edge_length(EdgeLabel::Rp), 1.0);
        let want = PI / 4.0 * 0.5;
        assert!((s.triangles()[1].declared_area().unwrap() - want).abs() <= 1e-12);
    }

    #[test]
    fn octants() {
        let s = sphere_octant_mesh::<f64>(4).unwrap();
        assert_eq!(s.triangles().len(), 8);
        assert_eq!(s.glue().len(), 12);
        assert!(s.free_edges().is_empty());
        assert!(s.glue().iter().all(|g| g.orientation == Orientation::Reverse));
        for t in s.triangles() {
            for e in EdgeLabel::ALL {
                assert!((t.edge_length(e) - PI / 2.0).abs() < 1e-12);
            }
            assert!((t.declared_area().unwrap() - PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn patch_grid() {
        let s = euclidean_patch::<f64>(3, 4).unwrap();
        assert_eq!(s.triangles().len(), 18);
        assert_eq!(s.free_edges().len(), 12);
        assert!(s.glue().iter().all(|g| g.orientation == Orientation::Reverse));
    }

    #[test]
    fn unknown_kind() {
        assert!("torus".parse::<FixtureKind>().is_err());
    }
}
