//! Sampled metric triangles, their canonical tripod, the tripodal metric on
//! the plane and the bi-Lipschitz embedding built from it.

mod ambient;
mod embed;
mod fixtures;
mod tripod;

pub use ambient::{spherical_triangle_area, AmbientMetric, AmbientPoint};
pub use fixtures::{ambient_triangle, fixture_triangle, random_triangle, TriangleFamily};
pub use embed::{
    embed_triangle, embedded_polygon, project_to_tripod, verify_bilipschitz, BiLipschitzReport,
    LOWER_RATIO, UPPER_RATIO,
};
pub use tripod::{
    gromov_tripod, reconstruct, sector_decompose, tripodal_distance, u_dir, v_dir, GromovTripod,
    TripodalPoint,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriangleError {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLabel {
    Pq,
    Qr,
    Rp,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 3] = [EdgeLabel::Pq, EdgeLabel::Qr, EdgeLabel::Rp];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeLabel::Pq => "pq",
            EdgeLabel::Qr => "qr",
            EdgeLabel::Rp => "rp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pq" => Some(EdgeLabel::Pq),
            "qr" => Some(EdgeLabel::Qr),
            "rp" => Some(EdgeLabel::Rp),
            _ => None,
        }
    }
}

impl std::fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct EdgeSamples<T> {
    pub pq: Vec<T>,
    pub qr: Vec<T>,
    pub rp: Vec<T>,
}

impl<T> EdgeSamples<T> {
    pub fn get(&self, e: EdgeLabel) -> &[T] {
        match e {
            EdgeLabel::Pq => &self.pq,
            EdgeLabel::Qr => &self.qr,
            EdgeLabel::Rp => &self.rp,
        }
    }
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct TriangleRepr<T> {
    edges: EdgeSamples<T>,
    dist: Vec<Vec<T>>,
    #[serde(default)]
    declared_area: Option<T>,
    #[serde(default = "default_true")]
    simple: bool,
}

fn default_true() -> bool {
    true
}

/// A metric triangle known through finitely many boundary samples.
///
/// Each edge list holds arclength parameters from the edge's first vertex,
/// starting at `0` and ending at the edge length; consecutive edges share
/// their vertex. Samples are numbered around the boundary: `p`, the interior
/// samples of `pq`, `q`, those of `qr`, `r`, those of `rp`. `dist` is the full
/// distance table in that numbering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TriangleRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DiscreteMetricTriangle<T> {
    edges: EdgeSamples<T>,
    dist: Vec<Vec<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    declared_area: Option<T>,
    simple: bool,
}

impl<T: Scalar> TryFrom<TriangleRepr<T>> for DiscreteMetricTriangle<T> {
    type Error = TriangleError;
    fn try_from(r: TriangleRepr<T>) -> Result<Self, TriangleError> {
        let mut t = DiscreteMetricTriangle::new(r.edges, r.dist)?;
        t.declared_area = r.declared_area;
        t.simple = r.simple;
        Ok(t)
    }
}

impl<T: Scalar> DiscreteMetricTriangle<T> {
    /// Validates and builds a triangle. The metric axioms and the edge
    /// isometries are checked to `1e-9 * diam` (scaled for `f32`).
    pub fn new(edges: EdgeSamples<T>, dist: Vec<Vec<T>>) -> Result<Self, TriangleError> {
        for e in EdgeLabel::ALL {
            let s = edges.get(e);
            if s.len() < 2 {
                return Err(TriangleError::InvalidInput(format!("edge {e} needs at least 2 samples")));
            }
            if s[0] != T::zero() {
                return Err(TriangleError::InvalidInput(format!("edge {e} must start at 0")));
            }
            if s.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
                return Err(TriangleError::InvalidInput(format!(
                    "edge {e} parameters must be finite and strictly increasing"
                )));
            }
        }
        let tri = DiscreteMetricTriangle { edges, dist, declared_area: None, simple: true };
        tri.validate()?;
        Ok(tri)
    }

    pub fn with_declared_area(mut self, area: Option<T>) -> Self {
        self.declared_area = area;
        self
    }

    pub fn with_simple(mut self, simple: bool) -> Self {
        self.simple = simple;
        self
    }

    fn validate(&self) -> Result<(), TriangleError> {
        let n = self.len();
        if self.dist.len() != n || self.dist.iter().any(|r| r.len() != n) {
            return Err(TriangleError::InvalidInput(format!(
                "distance table must be {n} x {n} for the given edges"
            )));
        }
        let d = &self.dist;
        if d.iter().flatten().any(|x| !x.is_finite()) {
            return Err(TriangleError::InvalidMetric("non-finite distance".into()));
        }
        let diam = self.diameter();
        let tol = T::check_tol() * diam.max(T::min_positive_value());
        for i in 0..n {
            if d[i][i].abs() > tol {
                return Err(TriangleError::InvalidMetric(format!("d({i},{i}) = {}", d[i][i])));
            }
            for j in 0..i {
                if d[i][j] < -tol {
                    return Err(TriangleError::InvalidMetric(format!("negative d({i},{j})")));
                }
                if (d[i][j] - d[j][i]).abs() > tol {
                    return Err(TriangleError::InvalidMetric(format!("d({i},{j}) != d({j},{i})")));
                }
            }
        }
        for k in 0..n {
            let dk = &d[k];
            for i in 0..n {
                let dik = d[i][k];
                let di = &d[i];
                for j in 0..n {
                    if di[j] > dik + dk[j] + tol {
                        return Err(TriangleError::InvalidMetric(format!(
                            "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                        )));
                    }
                }
            }
        }
        for e in EdgeLabel::ALL {
            let ids = self.edge_ids(e);
            let s = self.edges.get(e);
            for a in 0..ids.len() {
                for b in 0..a {
                    let want = s[a] - s[b];
                    if (d[ids[a]][ids[b]] - want).abs() > tol {
                        return Err(TriangleError::InvalidMetric(format!(
                            "edge {e}: samples {b} and {a} are {} apart but their parameters differ by {want}",
                            d[ids[a]][ids[b]]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of distinct samples.
    pub fn len(&self) -> usize {
        self.edges.pq.len() + self.edges.qr.len() + self.edges.rp.len() - 3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edges(&self) -> &EdgeSamples<T> {
        &self.edges
    }

    pub fn dist(&self, i: usize, j: usize) -> T {
        self.dist[i][j]
    }

    pub fn dist_table(&self) -> &[Vec<T>] {
        &self.dist
    }

    pub fn declared_area(&self) -> Option<T> {
        self.declared_area
    }

    pub fn is_simple(&self) -> bool {
        self.simple
    }

    pub fn edge_length(&self, e: EdgeLabel) -> T {
        *self.edges.get(e).last().unwrap()
    }

    pub fn perimeter(&self) -> T {
        EdgeLabel::ALL.iter().map(|&e| self.edge_length(e)).sum()
    }

    fn offset(&self, e: EdgeLabel) -> usize {
        match e {
            EdgeLabel::Pq => 0,
            EdgeLabel::Qr => self.edges.pq.len() - 1,
            EdgeLabel::Rp => self.edges.pq.len() + self.edges.qr.len() - 2,
        }
    }

    /// Sample id of the `k`-th entry of edge `e`.
    pub fn sample_id(&self, e: EdgeLabel, k: usize) -> usize {
        (self.offset(e) + k) % self.len()
    }

    /// Sample ids along edge `e`, both endpoints included.
    pub fn edge_ids(&self, e: EdgeLabel) -> Vec<usize> {
        (0..self.edges.get(e).len()).map(|k| self.sample_id(e, k)).collect()
    }

    /// Ids of `p`, `q`, `r`.
    pub fn vertex_ids(&self) -> [usize; 3] {
        [0, self.offset(EdgeLabel::Qr), self.offset(EdgeLabel::Rp)]
    }

    /// Edge and parameter of a sample; vertices are reported on the edge
    /// they start.
    pub fn locate(&self, i: usize) -> Option<(EdgeLabel, T)> {
        if i >= self.len() {
            return None;
        }
        let e = if i < self.offset(EdgeLabel::Qr) {
            EdgeLabel::Pq
        } else if i < self.offset(EdgeLabel::Rp) {
            EdgeLabel::Qr
        } else {
            EdgeLabel::Rp
        };
        Some((e, self.edges.get(e)[i - self.offset(e)]))
    }

    /// Arclength from `p` going around the boundary through `q` and `r`.
    pub fn boundary_position(&self, i: usize) -> T {
        let (e, s) = self.locate(i).expect("sample id in range");
        match e {
            EdgeLabel::Pq => s,
            EdgeLabel::Qr => self.edge_length(EdgeLabel::Pq) + s,
            EdgeLabel::Rp => self.edge_length(EdgeLabel::Pq) + self.edge_length(EdgeLabel::Qr) + s,
        }
    }

    /// Largest sampled distance.
    pub fn diameter(&self) -> T {
        self.dist.iter().flatten().fold(T::zero(), |m, &x| m.max(x))
    }

    /// Builds a triangle whose edges are sampled uniformly with `segments`
    /// pieces each, using an arbitrary distance function on sample
    /// descriptors `(edge, parameter)`.
    pub fn from_fn(
        lengths: [T; 3],
        segments: usize,
        dist: impl Fn((EdgeLabel, T), (EdgeLabel, T)) -> T,
    ) -> Result<Self, TriangleError> {
        if segments == 0 {
            return Err(TriangleError::InvalidInput("need at least one segment per edge".into()));
        }
        let m = T::from_usize_lossy(segments);
        let param = |l: T| -> Vec<T> {
            (0..=segments)
                .map(|k| if k == segments { l } else { l * T::from_usize_lossy(k) / m })
                .collect()
        };
        let edges = EdgeSamples { pq: param(lengths[0]), qr: param(lengths[1]), rp: param(lengths[2]) };
        let probe = DiscreteMetricTriangle {
            edges: edges.clone(),
            dist: Vec::new(),
            declared_area: None,
            simple: true,
        };
        let n = probe.len();
        let loc: Vec<(EdgeLabel, T)> = (0..n).map(|i| probe.locate(i).unwrap()).collect();
        let mut table = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..i {
                let v = dist(loc[i], loc[j]);
                table[i][j] = v;
                table[j][i] = v;
            }
        }
        DiscreteMetricTriangle::new(edges, table)
    }

    /// Samples the geodesic triangle with corners `corners` in an ambient
    /// space. Returns the triangle and the ambient position of each sample.
    pub fn from_ambient(
        metric: &AmbientMetric<T>,
        corners: [AmbientPoint<T>; 3],
        segments: usize,
    ) -> Result<(Self, Vec<AmbientPoint<T>>), TriangleError> {
        let ends = [(corners[0], corners[1]), (corners[1], corners[2]), (corners[2], corners[0])];
        let lengths = ends.map(|(a, b)| metric.distance(&a, &b));
        if lengths.iter().any(|l| !(*l > T::zero())) {
            return Err(TriangleError::InvalidInput("corners must be distinct".into()));
        }
        let pos = |(e, s): (EdgeLabel, T)| -> AmbientPoint<T> {
            let (a, b) = ends[e.index()];
            metric.geodesic_point(&a, &b, s / lengths[e.index()])
        };
        let tri = DiscreteMetricTriangle::from_fn(lengths, segments, |x, y| {
            if x.0 == y.0 {
                (x.1 - y.1).abs()
            } else {
                metric.distance(&pos(x), &pos(y))
            }
        })?;
        let points = (0..tri.len()).map(|i| pos(tri.locate(i).unwrap())).collect();
        Ok((tri, points))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn three_four_five() -> DiscreteMetricTriangle<f64> {
        // p=(0,0), q=(3,0), r=(0,4) gives d(p,q)=3, d(q,r)=5, d(r,p)=4
        let m = AmbientMetric::Euclidean;
        DiscreteMetricTriangle::from_ambient(
            &m,
            [[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 4.0, 0.0]],
            6,
        )
        .unwrap()
        .0
    }

    #[test]
    fn numbering() {
        let t = three_four_five();
        assert_eq!(t.len(), 18);
        assert_eq!(t.vertex_ids(), [0, 6, 12]);
        assert_eq!(t.sample_id(EdgeLabel::Rp, 6), 0);
        assert_eq!(t.locate(7), Some((EdgeLabel::Qr, 5.0 / 6.0)));
        assert_eq!(t.dist(0, 6), 3.0);
        assert_eq!(t.dist(6, 12), 5.0);
        assert_eq!(t.boundary_position(12), 8.0);
    }

    #[test]
    fn rejects_asymmetric() {
        let t = three_four_five();
        let mut d = t.dist_table().to_vec();
        d[1][2] += 0.1;
        assert!(matches!(
            DiscreteMetricTriangle::new(t.edges().clone(), d),
            Err(TriangleError::InvalidMetric(_))
        ));
    }

    #[test]
    fn rejects_triangle_inequality_violation() {
        let t = three_four_five();
        let mut d = t.dist_table().to_vec();
        // shrink no entry but blow up one cross distance symmetrically
        d[3][15] = 10.0;
        d[15][3] = 10.0;
        assert!(matches!(
            DiscreteMetricTriangle::new(t.edges().clone(), d),
            Err(TriangleError::InvalidMetric(_))
        ));
    }

    #[test]
    fn rejects_non_isometric_edge() {
        let t = three_four_five();
        let mut e = t.edges().clone();
        e.pq[2] = 0.9;
        assert!(DiscreteMetricTriangle::new(e, t.dist_table().to_vec()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = three_four_five().with_declared_area(Some(6.0));
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["edges"]["pq"][6], 3.0);
        assert_eq!(v["declared_area"], 6.0);
        let back: DiscreteMetricTriangle<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }
}
