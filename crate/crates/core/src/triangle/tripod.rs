use serde::{Deserialize, Serialize};

use super::{DiscreteMetricTriangle, TriangleError};
use crate::geometry::Point2;
use crate::scalar::Scalar;

/// Leg lengths of the canonical tripod: `lp = (q.r)_p`, `lq = (r.p)_q`,
/// `lr = (p.q)_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GromovTripod<T> {
    pub lp: T,
    pub lq: T,
    pub lr: T,
}

impl<T: Scalar> GromovTripod<T> {
    /// Tripod of a triangle with side lengths `d(p,q)`, `d(q,r)`, `d(r,p)`.
    pub fn from_sides(pq: T, qr: T, rp: T) -> Result<Self, TriangleError> {
        let half = T::lit(0.5);
        let legs = [(pq + rp - qr) * half, (pq + qr - rp) * half, (qr + rp - pq) * half];
        let tol = T::check_tol() * pq.max(qr).max(rp);
        if legs.iter().any(|&l| l < -tol) {
            return Err(TriangleError::InvalidMetric(
                "negative Gromov product: side lengths violate the triangle inequality".into(),
            ));
        }
        let [lp, lq, lr] = legs.map(|l| l.max(T::zero()));
        Ok(GromovTripod { lp, lq, lr })
    }

    pub fn legs(&self) -> [T; 3] {
        [self.lp, self.lq, self.lr]
    }
}

pub fn gromov_tripod<T: Scalar>(t: &DiscreteMetricTriangle<T>) -> Result<GromovTripod<T>, TriangleError> {
    let [p, q, r] = t.vertex_ids();
    GromovTripod::from_sides(t.dist(p, q), t.dist(q, r), t.dist(r, p))
}

/// Unit vector of ray `Z_j`, `u_j = exp(2 pi i (j - 1) / 3)`, for `j` in 1..=3.
pub fn u_dir<T: Scalar>(j: u8) -> Point2<T> {
    let k = T::from_u8((j + 2) % 3).unwrap();
    Point2::polar(T::one(), T::lit(2.0) * T::PI() * k / T::lit(3.0))
}

/// Bisector of sector `U_j`, `v_j = exp(i pi / 3) u_j`.
pub fn v_dir<T: Scalar>(j: u8) -> Point2<T> {
    let k = T::from_u8((j + 2) % 3).unwrap();
    Point2::polar(T::one(), T::PI() / T::lit(3.0) + T::lit(2.0) * T::PI() * k / T::lit(3.0))
}

/// Canonical form `x = radius * u_ray + height * v_sector` of a planar point.
///
/// `ray` is 1, 2 or 3 (1 when the base is the origin); `sector` is `None`
/// exactly when `height == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TripodalPoint<T> {
    pub ray: u8,
    pub radius: T,
    pub sector: Option<u8>,
    pub height: T,
}

impl<T: Scalar> TripodalPoint<T> {
    pub fn on_spine(ray: u8, radius: T) -> Self {
        let ray = if radius == T::zero() { 1 } else { ray };
        TripodalPoint { ray, radius, sector: None, height: T::zero() }
    }

    pub fn base(&self) -> Point2<T> {
        u_dir::<T>(self.ray) * self.radius
    }
}

pub fn reconstruct<T: Scalar>(x: &TripodalPoint<T>) -> Point2<T> {
    match x.sector {
        Some(k) => x.base() + v_dir::<T>(k) * x.height,
        None => x.base(),
    }
}

/// Splits `x` into its base point on the spine and its height along the
/// bisector of its sector.
pub fn sector_decompose<T: Scalar>(x: Point2<T>) -> TripodalPoint<T> {
    let scale = x.norm();
    if scale == T::zero() {
        return TripodalPoint::on_spine(1, T::zero());
    }
    let tol = T::snap_tol() * scale;
    let third = T::lit(2.0) * T::PI() / T::lit(3.0);
    let mut theta = x.y.atan2(x.x);
    if theta < T::zero() {
        theta = theta + T::lit(2.0) * T::PI();
    }
    let j = ((theta / third).floor().to_u8().unwrap_or(0)).min(2) + 1;
    let v = v_dir::<T>(j);
    let w = Point2::new(-v.y, v.x);
    let a = x.dot(w);
    let b = x.dot(v);
    let sqrt3 = T::lit(3.0).sqrt();
    let mut radius = T::lit(2.0) * a.abs() / sqrt3;
    let mut height = b - a.abs() / sqrt3;
    if radius <= tol {
        radius = T::zero();
        height = scale;
    }
    if height <= tol {
        height = T::zero();
        radius = scale;
    }
    let ray = if radius == T::zero() {
        1
    } else if a < T::zero() {
        j
    } else {
        j % 3 + 1
    };
    TripodalPoint {
        ray,
        radius,
        sector: (height > T::zero()).then_some(j),
        height,
    }
}

/// Intrinsic distance on the spine between two base points.
fn spine_distance<T: Scalar>(x: &TripodalPoint<T>, y: &TripodalPoint<T>) -> T {
    if x.ray == y.ray || x.radius == T::zero() || y.radius == T::zero() {
        (x.radius - y.radius).abs()
    } else {
        x.radius + y.radius
    }
}

/// The tripodal metric: heights add to the spine distance of the bases,
/// except that within one sector only their difference counts.
pub fn tripodal_distance<T: Scalar>(x: Point2<T>, y: Point2<T>) -> T {
    let (a, b) = (sector_decompose(x), sector_decompose(y));
    let dz = spine_distance(&a, &b);
    match (a.sector, b.sector) {
        (Some(j), Some(k)) if j == k => (a.height - b.height).abs() + dz,
        _ => a.height + b.height + dz,
    }
}
