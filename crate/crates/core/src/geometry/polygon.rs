use serde::{Deserialize, Serialize};

use super::point::{orient, Point2};
use super::GeometryError;
use crate::scalar::Scalar;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox<T> {
    pub min: Point2<T>,
    pub max: Point2<T>,
}

impl<T: Scalar> Bbox<T> {
    pub fn of(points: &[Point2<T>]) -> Self {
        let mut min = points[0];
        let mut max = points[0];
        for p in &points[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Bbox { min, max }
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> T {
        self.width().hypot(self.height())
    }
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct PolygonRepr<T> {
    vertices: Vec<Point2<T>>,
}

/// A closed planar polygon given by its vertex cycle.
///
/// Vertices are stored counterclockwise: construction reverses a clockwise
/// input. Simplicity is not required for construction (use
/// [`PlanarPolygon::is_simple`]), but at least three vertices with
/// consecutive vertices distinct are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PlanarPolygon<T> {
    vertices: Vec<Point2<T>>,
}

impl<T: Scalar> TryFrom<PolygonRepr<T>> for PlanarPolygon<T> {
    type Error = GeometryError;
    fn try_from(r: PolygonRepr<T>) -> Result<Self, Self::Error> {
        PlanarPolygon::new(r.vertices)
    }
}

impl<T: Scalar> PlanarPolygon<T> {
    pub fn new(mut vertices: Vec<Point2<T>>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidPolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::InvalidPolygon("non-finite coordinate".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(GeometryError::InvalidPolygon(format!(
                    "consecutive vertices {} and {} coincide",
                    i,
                    (i + 1) % n
                )));
            }
        }
        if signed_area(&vertices) < T::zero() {
            vertices.reverse();
        }
        Ok(PlanarPolygon { vertices })
    }

    /// Builds a polygon from vertices already known to be valid and
    /// counterclockwise.
    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point2<T>>) -> Self {
        debug_assert!(vertices.len() >= 3);
        PlanarPolygon { vertices }
    }

    /// Axis-aligned rectangle `[x0, x0 + w] x [y0, y0 + h]`.
    pub fn rectangle(x0: T, y0: T, w: T, h: T) -> Self {
        PlanarPolygon::from_ccw_unchecked(vec![
            Point2::new(x0, y0),
            Point2::new(x0 + w, y0),
            Point2::new(x0 + w, y0 + h),
            Point2::new(x0, y0 + h),
        ])
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1` (cyclically).
    pub fn edge(&self, i: usize) -> (Point2<T>, Point2<T>) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2<T>, Point2<T>)> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    pub fn bbox(&self) -> Bbox<T> {
        Bbox::of(&self.vertices)
    }

    pub fn signed_area(&self) -> T {
        signed_area(&self.vertices)
    }

    /// Unsigned shoelace area without a simplicity check.
    pub fn shoelace_area(&self) -> T {
        self.signed_area().abs()
    }

    /// Unsigned enclosed area; the Hausdorff 2-measure of the closed region.
    pub fn area(&self) -> Result<T, GeometryError> {
        if !self.is_simple() {
            return Err(GeometryError::InvalidPolygon("polygon is not simple".into()));
        }
        Ok(self.shoelace_area())
    }

    pub fn perimeter(&self) -> T {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    /// True iff no two non-adjacent edges meet and adjacent edges meet only at
    /// their shared vertex. Predicates use an absolute tolerance of
    /// `snap_tol * diam`.
    pub fn is_simple(&self) -> bool {
        is_simple_polygon(&self.vertices).unwrap_or(false)
    }

    /// Point-in-polygon by crossing parity. Points on the boundary give an
    /// unspecified answer.
    pub fn contains(&self, p: Point2<T>) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

pub(crate) fn signed_area<T: Scalar>(v: &[Point2<T>]) -> T {
    // relative to the first vertex to limit cancellation
    let n = v.len();
    let o = v[0];
    let mut s = T::zero();
    for i in 1..n - 1 {
        s = s + (v[i] - o).cross(v[i + 1] - o);
    }
    s / T::lit(2.0)
}

/// Simplicity test on a raw vertex cycle.
pub fn is_simple_polygon<T: Scalar>(v: &[Point2<T>]) -> Result<bool, GeometryError> {
    let n = v.len();
    if n < 3 {
        return Err(GeometryError::InvalidPolygon(format!(
            "need at least 3 vertices, got {n}"
        )));
    }
    let tol = T::snap_tol() * Bbox::of(v).diagonal();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if a.dist(b) <= tol {
            return Ok(false);
        }
    }
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        // adjacent pair (i, i+1) shares vertex b
        let c = v[(i + 2) % n];
        let (u, w) = (a - b, c - b);
        if u.cross(w).abs() <= tol * (u.norm() + w.norm()) && u.dot(w) > T::zero() {
            return Ok(false);
        }
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (v[j], v[(j + 1) % n]);
            if segment_distance(a, b, c, d) <= tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Euclidean distance between closed segments `ab` and `cd`.
pub fn segment_distance<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> T {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    let z = T::zero();
    if ((o1 > z && o2 < z) || (o1 < z && o2 > z)) && ((o3 > z && o4 < z) || (o3 < z && o4 > z)) {
        return z;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

pub fn point_segment_distance<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == T::zero() {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    p.dist(a + ab.scale(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pts: &[(f64, f64)]) -> PlanarPolygon<f64> {
        PlanarPolygon::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn unit_square_area() {
        let sq = poly(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        assert_eq!(sq.area().unwrap(), 1.0);
        assert!(sq.is_simple());
    }

    #[test]
    fn triangle_area() {
        let t = poly(&[(0., 0.), (1., 0.), (0., 1.)]);
        assert_eq!(t.area().unwrap(), 0.5);
    }

    #[test]
    fn bowtie_rejected() {
        let b = poly(&[(0., 0.), (1., 1.), (1., 0.), (0., 1.)]);
        assert!(!b.is_simple());
        assert!(matches!(b.area(), Err(GeometryError::InvalidPolygon(_))));
    }

    #[test]
    fn collinear_midpoint_is_simple() {
        let sq = poly(&[(0., 0.), (0.5, 0.), (1., 0.), (1., 1.), (0., 1.)]);
        assert!(sq.is_simple());
        assert_eq!(sq.area().unwrap(), 1.0);
    }

    #[test]
    fn spike_is_not_simple() {
        let s = poly(&[(0., 0.), (2., 0.), (1., 0.), (1., 1.)]);
        assert!(!s.is_simple());
    }

    #[test]
    fn too_few_vertices() {
        let r = PlanarPolygon::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        assert!(matches!(r, Err(GeometryError::InvalidPolygon(_))));
        assert!(is_simple_polygon::<f64>(&[Point2::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn clockwise_input_is_normalized() {
        let cw = poly(&[(0., 0.), (0., 1.), (1., 1.), (1., 0.)]);
        assert!(cw.signed_area() > 0.0);
    }

    #[test]
    fn rectangle_area_is_exact() {
        let r = PlanarPolygon::rectangle(0.0, 0.0, 2.5, 0.75);
        assert_eq!(r.area().unwrap(), 2.5 * 0.75);
        let r = PlanarPolygon::rectangle(0.25, -1.5, 2.5, 0.75);
        assert_eq!(r.area().unwrap(), 2.5 * 0.75);
    }

    #[test]
    fn generic_over_f32() {
        let sq = PlanarPolygon::<f32>::rectangle(0.0, 0.0, 2.0, 3.0);
        assert_eq!(sq.area().unwrap(), 6.0f32);
    }
}
