use serde::{Deserialize, Serialize};

use super::{gromov_tripod, DiscreteMetricTriangle, EdgeLabel, GromovTripod, TriangleError};
use super::tripod::{reconstruct, v_dir, TripodalPoint};
use crate::geometry::{PlanarPolygon, Point2};
use crate::scalar::Scalar;

/// Guaranteed window for `|F(x) - F(y)| / d(x, y)`.
pub const LOWER_RATIO: f64 = 0.25;
pub const UPPER_RATIO: f64 = 3.0;

fn project_on<T: Scalar>(legs: &GromovTripod<T>, e: EdgeLabel, s: T) -> TripodalPoint<T> {
    let (l, first, second) = match e {
        EdgeLabel::Pq => (legs.lp, 1, 2),
        EdgeLabel::Qr => (legs.lq, 2, 3),
        EdgeLabel::Rp => (legs.lr, 3, 1),
    };
    if s <= l {
        TripodalPoint::on_spine(first, l - s)
    } else {
        TripodalPoint::on_spine(second, s - l)
    }
}

/// Image of a sample under the natural projection onto the canonical tripod.
pub fn project_to_tripod<T: Scalar>(
    t: &DiscreteMetricTriangle<T>,
    sample: usize,
) -> Result<TripodalPoint<T>, TriangleError> {
    let (e, s) = t
        .locate(sample)
        .ok_or_else(|| TriangleError::InvalidInput(format!("unknown sample {sample}")))?;
    Ok(project_on(&gromov_tripod(t)?, e, s))
}

/// The embedding `F(x) = xbar + dist(x, other edges) * v_j` on every
/// sample, in sample order. The distance to the other two edges is the
/// minimum over their samples.
pub fn embed_triangle<T: Scalar>(t: &DiscreteMetricTriangle<T>) -> Result<Vec<Point2<T>>, TriangleError> {
    let legs = gromov_tripod(t)?;
    let n = t.len();
    let mut on_edge = vec![[false; 3]; n];
    for e in EdgeLabel::ALL {
        for i in t.edge_ids(e) {
            on_edge[i][e.index()] = true;
        }
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (e, s) = t.locate(i).unwrap();
        let base = reconstruct(&project_on(&legs, e, s));
        let ei = e.index();
        let mut h = T::infinity();
        for j in 0..n {
            let other = on_edge[j].iter().enumerate().any(|(k, &on)| on && k != ei);
            if other {
                h = h.min(t.dist(i, j));
            }
        }
        let sector = (ei + 1) as u8;
        out.push(base + v_dir::<T>(sector) * h);
    }
    Ok(out)
}

/// The closed polygon through the embedded samples in boundary order.
pub fn embedded_polygon<T: Scalar>(image: &[Point2<T>]) -> Result<PlanarPolygon<T>, TriangleError> {
    PlanarPolygon::new(image.to_vec()).map_err(|e| TriangleError::InvalidInput(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct BiLipschitzReport<T> {
    pub min_ratio: T,
    pub max_ratio: T,
    pub min_pair: (usize, usize),
    pub max_pair: (usize, usize),
    pub pairs: usize,
    pub pass: bool,
}

/// Distortion of `image` against the distance table over all sample pairs.
pub fn verify_bilipschitz<T: Scalar>(
    t: &DiscreteMetricTriangle<T>,
    image: &[Point2<T>],
) -> Result<BiLipschitzReport<T>, TriangleError> {
    let n = t.len();
    if image.len() != n {
        return Err(TriangleError::InvalidInput(format!(
            "image has {} points, triangle has {n} samples",
            image.len()
        )));
    }
    let mut r = BiLipschitzReport {
        min_ratio: T::infinity(),
        max_ratio: T::zero(),
        min_pair: (0, 0),
        max_pair: (0, 0),
        pairs: 0,
        pass: false,
    };
    for i in 0..n {
        for j in 0..i {
            let d = t.dist(i, j);
            let e = image[i].dist(image[j]);
            let ratio = if d > T::zero() {
                e / d
            } else if e == T::zero() {
                continue;
            } else {
                T::infinity()
            };
            r.pairs += 1;
            if ratio < r.min_ratio {
                r.min_ratio = ratio;
                r.min_pair = (j, i);
            }
            if ratio > r.max_ratio {
                r.max_ratio = ratio;
                r.max_pair = (j, i);
            }
        }
    }
    let tol = T::check_tol();
    r.pass = r.pairs == 0
        || (r.min_ratio >= T::lit(LOWER_RATIO) - tol && r.max_ratio <= T::lit(UPPER_RATIO) + tol);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::super::AmbientMetric;
    use super::*;

    fn three_four_five(seg: usize) -> DiscreteMetricTriangle<f64> {
        DiscreteMetricTriangle::from_ambient(
            &AmbientMetric::Euclidean,
            [[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 4.0, 0.0]],
            seg,
        )
        .unwrap()
        .0
    }

    #[test]
    fn projection_examples() {
        let t = three_four_five(6);
        // vertex p
        assert_eq!(project_to_tripod(&t, 0).unwrap(), TripodalPoint::on_spine(1, 1.0));
        // s = 0.5 on pq
        let t = three_four_five(6);
        let x = project_on(&gromov_tripod(&t).unwrap(), EdgeLabel::Pq, 0.5);
        assert_eq!((x.ray, x.radius), (1, 0.5));
        let x = project_on(&gromov_tripod(&t).unwrap(), EdgeLabel::Pq, 2.0);
        assert_eq!((x.ray, x.radius), (2, 1.0));
        assert!(project_to_tripod(&t, 99).is_err());
    }

    #[test]
    fn vertices_map_to_tripod_ends() {
        let t = three_four_five(6);
        let f = embed_triangle(&t).unwrap();
        let legs = gromov_tripod(&t).unwrap();
        let [p, q, r] = t.vertex_ids();
        assert_eq!(f[p], reconstruct(&TripodalPoint::on_spine(1, legs.lp)));
        assert_eq!(f[q], reconstruct(&TripodalPoint::on_spine(2, legs.lq)));
        assert_eq!(f[r], reconstruct(&TripodalPoint::on_spine(3, legs.lr)));
    }

    #[test]
    fn equilateral_window() {
        let h = 3f64.sqrt() / 2.0;
        let (t, _) = DiscreteMetricTriangle::from_ambient(
            &AmbientMetric::Euclidean,
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]],
            60,
        )
        .unwrap();
        let f = embed_triangle(&t).unwrap();
        let r = verify_bilipschitz(&t, &f).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(embedded_polygon(&f).unwrap().is_simple());
    }

    #[test]
    fn scaled_image_fails() {
        let t = three_four_five(8);
        let f: Vec<_> = embed_triangle(&t).unwrap().into_iter().map(|p| p * 10.0).collect();
        let r = verify_bilipschitz(&t, &f).unwrap();
        assert!(!r.pass);
        assert!(r.max_ratio > 10.0);
    }

    #[test]
    fn tree_triangle_lands_on_tripod() {
        // distances of a metric tree: three legs of length 1 meeting at a point
        let t = DiscreteMetricTriangle::from_fn([2.0, 2.0, 2.0], 8, |x, y| {
            let leg = |(e, s): (EdgeLabel, f64)| -> (usize, f64) {
                let k = e.index();
                if s <= 1.0 { (k, 1.0 - s) } else { ((k + 1) % 3, s - 1.0) }
            };
            let (a, b) = (leg(x), leg(y));
            if a.0 == b.0 || a.1 == 0.0 || b.1 == 0.0 { (a.1 - b.1).abs() } else { a.1 + b.1 }
        })
        .unwrap();
        let f = embed_triangle(&t).unwrap();
        for (i, p) in f.iter().enumerate() {
            let proj = reconstruct(&project_to_tripod(&t, i).unwrap());
            assert!(p.dist(proj) < 1e-12);
        }
    }

    #[test]
    fn mismatched_lengths() {
        let t = three_four_five(4);
        assert!(verify_bilipschitz(&t, &[Point2::new(0.0, 0.0)]).is_err());
    }
}
