//! Plain SVG pictures of planar objects.

use std::fmt::Write;

use crate::geometry::{GridDecomposition, Point2};
use crate::scalar::Scalar;
use crate::triangle::{gromov_tripod, u_dir, DiscreteMetricTriangle, TriangleError};

const SIZE: f64 = 512.0;
const MARGIN: f64 = 16.0;

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn fit<T: Scalar>(points: impl Iterator<Item = Point2<T>>) -> Frame {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            let (x, y) = (p.x.to_f64_lossy(), p.y.to_f64_lossy());
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return Frame { x0: 0.0, y1: 0.0, scale: 1.0 };
        }
        let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
        Frame { x0, y1, scale: (SIZE - 2.0 * MARGIN) / span }
    }

    fn map<T: Scalar>(&self, p: Point2<T>) -> (f64, f64) {
        (
            MARGIN + (p.x.to_f64_lossy() - self.x0) * self.scale,
            MARGIN + (self.y1 - p.y.to_f64_lossy()) * self.scale,
        )
    }

    fn points<T: Scalar>(&self, pts: &[Point2<T>]) -> String {
        let mut s = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.map(p);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.3},{y:.3}");
        }
        s
    }
}

fn open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    )
}

/// The embedded image of a triangle's samples, closed into a polygon, with
/// the canonical tripod drawn over it.
pub fn embedding_svg<T: Scalar>(
    tri: &DiscreteMetricTriangle<T>,
    image: &[Point2<T>],
) -> Result<String, TriangleError> {
    let tripod = gromov_tripod(tri)?;
    let legs: Vec<Point2<T>> = tripod
        .legs()
        .iter()
        .zip(1u8..)
        .map(|(&l, j)| u_dir::<T>(j) * l)
        .collect();
    let frame = Frame::fit(image.iter().copied().chain(legs.iter().copied()).chain([Point2::origin()]));
    let mut s = open();
    let _ = writeln!(
        s,
        "  <polygon class=\"image\" fill=\"#dde8f4\" stroke=\"#1f4e79\" stroke-width=\"1\" points=\"{}\"/>",
        frame.points(image)
    );
    let (ox, oy) = frame.map(Point2::<T>::origin());
    for leg in legs {
        let (x, y) = frame.map(leg);
        let _ = writeln!(
            s,
            "  <line class=\"tripod\" x1=\"{ox:.3}\" y1=\"{oy:.3}\" x2=\"{x:.3}\" y2=\"{y:.3}\" stroke=\"#b03a2e\" stroke-width=\"2\"/>"
        );
    }
    for &i in &tri.vertex_ids() {
        let (x, y) = frame.map(image[i]);
        let _ = writeln!(s, "  <circle class=\"vertex\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" fill=\"#b03a2e\"/>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// The cells of a grid decomposition over their parent polygon.
pub fn decomposition_svg<T: Scalar>(d: &GridDecomposition<T>) -> String {
    let frame = Frame::fit(d.parent.vertices().iter().copied());
    let mut s = open();
    for c in &d.cells {
        let _ = writeln!(
            s,
            "  <polygon class=\"cell\" fill=\"none\" stroke=\"#7f8c8d\" stroke-width=\"0.5\" points=\"{}\"/>",
            frame.points(c.polygon.vertices())
        );
    }
    let _ = writeln!(
        s,
        "  <polygon class=\"parent\" fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"1.5\" points=\"{}\"/>",
        frame.points(d.parent.vertices())
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{grid_decompose, PlanarPolygon};
    use crate::triangle::{embed_triangle, AmbientMetric};

    #[test]
    fn embedding_has_tripod() {
        let corners = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.8, 0.0]];
        let (tri, _) = DiscreteMetricTriangle::<f64>::from_ambient(&AmbientMetric::Euclidean, corners, 12).unwrap();
        let img = embed_triangle(&tri).unwrap();
        let s = embedding_svg(&tri, &img).unwrap();
        assert!(s.starts_with("<svg"));
        assert_eq!(s.matches("class=\"tripod\"").count(), 3);
        assert_eq!(s.matches("class=\"vertex\"").count(), 3);
    }

    #[test]
    fn decomposition_draws_every_cell() {
        let d = grid_decompose(&PlanarPolygon::rectangle(0.0, 0.0, 1.0, 1.0), 0.5).unwrap();
        let s = decomposition_svg(&d);
        assert_eq!(s.matches("class=\"cell\"").count(), d.cells.len());
    }
}
