use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A point of an ambient model space. Planar metrics use the first two
/// coordinates; the sphere uses all three.
pub type AmbientPoint<T> = [T; 3];

/// Analytic metrics whose geodesic triangles serve as test inputs and as
/// distance oracles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum AmbientMetric<T> {
    Euclidean,
    /// Max-coordinate norm on the plane.
    Linf,
    /// Great-circle distance on the sphere of the given radius centred at 0.
    Sphere { radius: T },
    /// `|A (x - y)|_p` on the plane for an invertible `A`.
    Norm { p: T, map: [[T; 2]; 2] },
}

impl<T: Scalar> AmbientMetric<T> {
    pub fn distance(&self, a: &AmbientPoint<T>, b: &AmbientPoint<T>) -> T {
        match self {
            AmbientMetric::Euclidean => (a[0] - b[0]).hypot(a[1] - b[1]),
            AmbientMetric::Linf => (a[0] - b[0]).abs().max((a[1] - b[1]).abs()),
            AmbientMetric::Sphere { radius } => {
                let cross = cross3(a, b);
                let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                norm3(&cross).atan2(dot) * *radius
            }
            AmbientMetric::Norm { p, map } => {
                let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
                let u = map[0][0] * dx + map[0][1] * dy;
                let v = map[1][0] * dx + map[1][1] * dy;
                if p.is_infinite() {
                    u.abs().max(v.abs())
                } else {
                    (u.abs().powf(*p) + v.abs().powf(*p)).powf(T::one() / *p)
                }
            }
        }
    }

    /// Point at fraction `t` of the way from `a` to `b` along the geodesic
    /// used for triangle edges (straight segments; great-circle arcs).
    pub fn geodesic_point(&self, a: &AmbientPoint<T>, b: &AmbientPoint<T>, t: T) -> AmbientPoint<T> {
        match self {
            AmbientMetric::Sphere { radius } => {
                let ua = scale3(a, T::one() / norm3(a));
                let ub = scale3(b, T::one() / norm3(b));
                let dot = ua[0] * ub[0] + ua[1] * ub[1] + ua[2] * ub[2];
                let omega = norm3(&cross3(&ua, &ub)).atan2(dot);
                if omega == T::zero() {
                    return scale3(&ua, *radius);
                }
                let s = omega.sin();
                let wa = ((T::one() - t) * omega).sin() / s;
                let wb = (t * omega).sin() / s;
                let p = [
                    wa * ua[0] + wb * ub[0],
                    wa * ua[1] + wb * ub[1],
                    wa * ua[2] + wb * ub[2],
                ];
                scale3(&p, *radius / norm3(&p))
            }
            _ => [
                a[0] + (b[0] - a[0]) * t,
                a[1] + (b[1] - a[1]) * t,
                a[2] + (b[2] - a[2]) * t,
            ],
        }
    }

    /// Ratio of the Hausdorff 2-measure of this metric to Lebesgue measure
    /// on the plane, where it is a constant (`pi / 4` for the max norm).
    pub fn planar_area_factor(&self) -> Option<T> {
        match self {
            AmbientMetric::Euclidean => Some(T::one()),
            AmbientMetric::Linf => Some(T::FRAC_PI_4()),
            AmbientMetric::Sphere { .. } => None,
            AmbientMetric::Norm { p, map } => {
                let det = (map[0][0] * map[1][1] - map[0][1] * map[1][0]).abs();
                if *p == T::lit(2.0) {
                    Some(det)
                } else if p.is_infinite() {
                    Some(T::FRAC_PI_4() * det)
                } else {
                    None
                }
            }
        }
    }
}

fn norm3<T: Scalar>(a: &[T; 3]) -> T {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn scale3<T: Scalar>(a: &[T; 3], s: T) -> [T; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn cross3<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Area of the geodesic triangle with the given corners on the sphere of
/// radius `radius` (spherical excess times `radius^2`).
pub fn spherical_triangle_area<T: Scalar>(corners: &[AmbientPoint<T>; 3], radius: T) -> T {
    let u = corners.map(|c| scale3(&c, T::one() / norm3(&c)));
    let dot = |a: &[T; 3], b: &[T; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let triple = dot(&u[0], &cross3(&u[1], &u[2])).abs();
    let den = T::one() + dot(&u[0], &u[1]) + dot(&u[1], &u[2]) + dot(&u[2], &u[0]);
    let excess = T::lit(2.0) * triple.atan2(den);
    excess * radius * radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn octant_area_and_edges() {
        let c = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!((spherical_triangle_area(&c, 1.0) - PI / 2.0).abs() < 1e-15);
        let m = AmbientMetric::Sphere { radius: 1.0 };
        assert!((m.distance(&c[0], &c[1]) - PI / 2.0).abs() < 1e-15);
        let mid = m.geodesic_point(&c[0], &c[1], 0.5);
        assert!((m.distance(&c[0], &mid) - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn linf_factor() {
        assert_eq!(AmbientMetric::<f64>::Linf.planar_area_factor(), Some(PI / 4.0));
        let m = AmbientMetric::Linf;
        assert_eq!(m.distance(&[0.0, 0.0, 0.0], &[1.0, 1.0, 0.0]), 1.0);
    }

    #[test]
    fn norm_matches_special_cases() {
        let id = [[1.0f64, 0.0], [0.0, 1.0]];
        let a = [0.3f64, -1.2, 0.0];
        let b = [2.0, 0.7, 0.0];
        let n2 = AmbientMetric::Norm { p: 2.0, map: id }.distance(&a, &b);
        assert!((n2 - AmbientMetric::Euclidean.distance(&a, &b)).abs() < 1e-14);
        let ninf = AmbientMetric::Norm { p: f64::INFINITY, map: id }.distance(&a, &b);
        assert_eq!(ninf, AmbientMetric::Linf.distance(&a, &b));
    }
}
