use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{spherical_triangle_area, AmbientMetric, AmbientPoint, DiscreteMetricTriangle, TriangleError};
use crate::scalar::Scalar;

/// Ambient spaces whose geodesic triangles serve as generated inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleFamily {
    Euclidean,
    Spherical,
    Linf,
    /// A random linear image of an `l_p` plane.
    RandomNorm,
}

impl TriangleFamily {
    pub const ALL: [TriangleFamily; 4] = [
        TriangleFamily::Euclidean,
        TriangleFamily::Spherical,
        TriangleFamily::Linf,
        TriangleFamily::RandomNorm,
    ];
}

impl FromStr for TriangleFamily {
    type Err = TriangleError;
    fn from_str(s: &str) -> Result<Self, TriangleError> {
        match s {
            "euclidean" => Ok(TriangleFamily::Euclidean),
            "spherical" => Ok(TriangleFamily::Spherical),
            "linf" => Ok(TriangleFamily::Linf),
            "random_norm" => Ok(TriangleFamily::RandomNorm),
            _ => Err(TriangleError::InvalidInput(format!("unknown triangle family {s:?}"))),
        }
    }
}

fn declared<T: Scalar>(metric: &AmbientMetric<T>, c: &[AmbientPoint<T>; 3]) -> Option<T> {
    match metric {
        AmbientMetric::Sphere { radius } => Some(spherical_triangle_area(c, *radius)),
        _ => {
            let cross = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[1][1] - c[0][1]) * (c[2][0] - c[0][0]);
            metric.planar_area_factor().map(|f| f * cross.abs() / T::lit(2.0))
        }
    }
}

/// Geodesic triangle on `corners` with its declared area filled in when the
/// metric has a known area element.
pub fn ambient_triangle<T: Scalar>(
    metric: &AmbientMetric<T>,
    corners: [AmbientPoint<T>; 3],
    segments: usize,
) -> Result<DiscreteMetricTriangle<T>, TriangleError> {
    let (tri, _) = DiscreteMetricTriangle::from_ambient(metric, corners, segments)?;
    Ok(tri.with_declared_area(declared(metric, &corners)))
}

/// The fixed representative of a family: the unit equilateral triangle,
/// the octant triangle of the unit sphere, the max-norm triangle on
/// `(0,0), (1,0), (0,1)` and the `l_3` image of the unit equilateral
/// triangle under a shear.
pub fn fixture_triangle<T: Scalar>(
    family: TriangleFamily,
    segments: usize,
) -> Result<DiscreteMetricTriangle<T>, TriangleError> {
    let (o, l, h) = (T::zero(), T::one(), T::lit(0.5));
    let apex = [h, T::lit(3.0).sqrt() / T::lit(2.0), o];
    let (metric, corners) = match family {
        TriangleFamily::Euclidean => (AmbientMetric::Euclidean, [[o, o, o], [l, o, o], apex]),
        TriangleFamily::Spherical => (AmbientMetric::Sphere { radius: l }, [[l, o, o], [o, l, o], [o, o, l]]),
        TriangleFamily::Linf => (AmbientMetric::Linf, [[o, o, o], [l, o, o], [o, l, o]]),
        TriangleFamily::RandomNorm => (
            AmbientMetric::Norm { p: T::lit(3.0), map: [[l, h], [o, l]] },
            [[o, o, o], [l, o, o], apex],
        ),
    };
    ambient_triangle(&metric, corners, segments)
}

/// A random nondegenerate triangle of the family. Planar corners are drawn
/// from the unit square and spherical corners from the first octant of the
/// unit sphere; the smallest angle is kept above 10 degrees in the model
/// picture.
pub fn random_triangle<T: Scalar, R: Rng + ?Sized>(
    family: TriangleFamily,
    segments: usize,
    rng: &mut R,
) -> Result<DiscreteMetricTriangle<T>, TriangleError> {
    let metric = match family {
        TriangleFamily::Euclidean => AmbientMetric::Euclidean,
        TriangleFamily::Spherical => AmbientMetric::Sphere { radius: T::one() },
        TriangleFamily::Linf => AmbientMetric::Linf,
        TriangleFamily::RandomNorm => {
            let p = [1.0, 1.5, 3.0, f64::INFINITY][rng.gen_range(0..4)];
            let map = loop {
                let m: [[f64; 2]; 2] = [[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]];
                if (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs() > 0.3 {
                    break m;
                }
            };
            AmbientMetric::Norm { p: T::lit(p), map: map.map(|r| r.map(T::lit)) }
        }
    };
    let corners = loop {
        let c: [[f64; 3]; 3] = std::array::from_fn(|_| match family {
            TriangleFamily::Spherical => {
                let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.05..1.0));
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                v.map(|x: f64| x / n)
            }
            _ => [rng.gen::<f64>(), rng.gen::<f64>(), 0.0],
        });
        if min_angle(&c) > 10f64.to_radians() {
            break c;
        }
    };
    ambient_triangle(&metric, corners.map(|p| p.map(T::lit)), segments)
}

fn min_angle(c: &[[f64; 3]; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let (a, b, o) = (c[(i + 1) % 3], c[(i + 2) % 3], c[i]);
            let u = [a[0] - o[0], a[1] - o[1], a[2] - o[2]];
            let v = [b[0] - o[0], b[1] - o[1], b[2] - o[2]];
            let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if nu == 0.0 || nv == 0.0 {
                0.0
            } else {
                (dot / (nu * nv)).clamp(-1.0, 1.0).acos()
            }
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixture_areas() {
        let e = fixture_triangle::<f64>(TriangleFamily::Euclidean, 8).unwrap();
        assert!((e.declared_area().unwrap() - 3f64.sqrt() / 4.0).abs() < 1e-15);
        let s = fixture_triangle::<f64>(TriangleFamily::Spherical, 8).unwrap();
        assert!((s.declared_area().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((s.edge_length(crate::triangle::EdgeLabel::Pq) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let l = fixture_triangle::<f64>(TriangleFamily::Linf, 8).unwrap();
        assert!((l.declared_area().unwrap() - std::f64::consts::FRAC_PI_4 / 2.0).abs() < 1e-15);
        assert_eq!(fixture_triangle::<f64>(TriangleFamily::RandomNorm, 8).unwrap().declared_area(), None);
    }

    #[test]
    fn random_triangles_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in TriangleFamily::ALL {
            for _ in 0..5 {
                let t = random_triangle::<f64, _>(f, 6, &mut rng).unwrap();
                assert_eq!(t.len(), 18);
            }
        }
    }
}
