//! Polyhedral approximations of triangulated metric surfaces.
//!
//! Every triangle is replaced by its filling and the fillings are glued
//! along the identified edges. Certificates compare three distances on
//! edge-graph samples: the oracle distance of the surface (when known), the
//! skeleton distance of the glued complex, and the edge-graph distance.

mod approx;
mod fixtures;

pub use approx::{
    approximate_surface, measure_report, verify_isometry, IsometryCertificate, MeasureReport,
    MeasureRow, SampledPair, SurfaceApproximation, DEFAULT_SAMPLE_BUDGET,
};
pub use fixtures::{euclidean_patch, generate_fixture, linf_patch, sphere_octant_mesh, FixtureKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, MetricGraph, Orientation};
use crate::filling::FillError;
use crate::scalar::Scalar;
use crate::triangle::{AmbientMetric, AmbientPoint, DiscreteMetricTriangle, EdgeLabel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("triangle {0} has no positive declared area")]
    MissingArea(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Fill(#[from] FillError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Edge `ea` of triangle `a` is identified with edge `eb` of triangle `b`.
/// With `Reverse`, the start of one edge meets the end of the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(usize, EdgeLabel, usize, EdgeLabel, Orientation)")]
#[serde(into = "(usize, EdgeLabel, usize, EdgeLabel, Orientation)")]
pub struct EdgeGlue {
    pub a: usize,
    pub ea: EdgeLabel,
    pub b: usize,
    pub eb: EdgeLabel,
    pub orientation: Orientation,
}

impl From<(usize, EdgeLabel, usize, EdgeLabel, Orientation)> for EdgeGlue {
    fn from((a, ea, b, eb, orientation): (usize, EdgeLabel, usize, EdgeLabel, Orientation)) -> Self {
        EdgeGlue { a, ea, b, eb, orientation }
    }
}

impl From<EdgeGlue> for (usize, EdgeLabel, usize, EdgeLabel, Orientation) {
    fn from(g: EdgeGlue) -> Self {
        (g.a, g.ea, g.b, g.eb, g.orientation)
    }
}

/// Analytic distances of a surface: the ambient position of every sample
/// of every triangle, measured with one ambient metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DistanceOracle<T> {
    pub metric: AmbientMetric<T>,
    pub positions: Vec<Vec<AmbientPoint<T>>>,
}

impl<T: Scalar> DistanceOracle<T> {
    pub fn distance(&self, a: (usize, usize), b: (usize, usize)) -> T {
        self.metric.distance(&self.positions[a.0][a.1], &self.positions[b.0][b.1])
    }
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct SurfaceRepr<T> {
    triangles: Vec<DiscreteMetricTriangle<T>>,
    #[serde(default)]
    glue: Vec<EdgeGlue>,
    #[serde(default)]
    mesh: Option<T>,
    #[serde(default)]
    oracle: Option<DistanceOracle<T>>,
}

/// Triangles glued along pairs of edges, forming a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SurfaceRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TriangulatedMetricSurface<T> {
    triangles: Vec<DiscreteMetricTriangle<T>>,
    glue: Vec<EdgeGlue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mesh: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<DistanceOracle<T>>,
}

impl<T: Scalar> TryFrom<SurfaceRepr<T>> for TriangulatedMetricSurface<T> {
    type Error = SurfaceError;
    fn try_from(r: SurfaceRepr<T>) -> Result<Self, SurfaceError> {
        let mut s = TriangulatedMetricSurface::new(r.triangles, r.glue)?;
        s.mesh = r.mesh;
        if let Some(o) = r.oracle {
            s = s.with_oracle(o)?;
        }
        Ok(s)
    }
}

/// Corners of an edge as corner indices `0..3` (`p`, `q`, `r`).
fn edge_corners(e: EdgeLabel) -> (usize, usize) {
    let k = e.index();
    (k, (k + 1) % 3)
}

pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// The edge graph of a surface: samples merged across identified edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGraph<T> {
    pub graph: MetricGraph<T>,
    /// Node of sample `i` of triangle `t` is `node_of[t][i]`.
    pub node_of: Vec<Vec<usize>>,
    /// One `(triangle, sample)` per node.
    pub representative: Vec<(usize, usize)>,
}

impl<T: Scalar> TriangulatedMetricSurface<T> {
    /// Validates lengths and sample parameters of every identification,
    /// that each edge is glued at most once, and the link condition at
    /// every vertex.
    pub fn new(triangles: Vec<DiscreteMetricTriangle<T>>, glue: Vec<EdgeGlue>) -> Result<Self, SurfaceError> {
        if triangles.is_empty() {
            return Err(SurfaceError::InvalidSurface("no triangles".into()));
        }
        let nt = triangles.len();
        let mut used = vec![[false; 3]; nt];
        let mut corners = UnionFind::new(3 * nt);
        for (k, g) in glue.iter().enumerate() {
            if g.a >= nt || g.b >= nt {
                return Err(SurfaceError::InvalidSurface(format!("glue {k} names a missing triangle")));
            }
            if g.a == g.b && g.ea == g.eb {
                return Err(SurfaceError::InvalidSurface(format!("glue {k} identifies an edge with itself")));
            }
            for (t, e) in [(g.a, g.ea), (g.b, g.eb)] {
                if std::mem::replace(&mut used[t][e.index()], true) {
                    return Err(SurfaceError::InvalidSurface(format!(
                        "edge {e} of triangle {t} is glued more than once"
                    )));
                }
            }
            let sa = triangles[g.a].edges().get(g.ea);
            let sb = triangles[g.b].edges().get(g.eb);
            let (la, lb) = (*sa.last().unwrap(), *sb.last().unwrap());
            let tol = T::check_tol() * la.max(lb);
            if (la - lb).abs() > tol {
                return Err(SurfaceError::InvalidSurface(format!(
                    "glue {k}: edge lengths {la} and {lb} differ"
                )));
            }
            let matched = sa.len() == sb.len()
                && (0..sa.len()).all(|i| {
                    let other = match g.orientation {
                        Orientation::Forward => sb[i],
                        Orientation::Reverse => lb - sb[sb.len() - 1 - i],
                    };
                    (sa[i] - other).abs() <= tol
                });
            if !matched {
                return Err(SurfaceError::InvalidSurface(format!("glue {k}: sample parameters differ")));
            }
            let (a0, a1) = edge_corners(g.ea);
            let (b0, b1) = edge_corners(g.eb);
            let (b0, b1) = match g.orientation {
                Orientation::Forward => (b0, b1),
                Orientation::Reverse => (b1, b0),
            };
            corners.union(3 * g.a + a0, 3 * g.b + b0);
            corners.union(3 * g.a + a1, 3 * g.b + b1);
        }

        // link of a vertex: slots (triangle, edge, end) joined through
        // corners and through glued edges
        let slot = |t: usize, e: usize, end: usize| 6 * t + 2 * e + end;
        let mut link = UnionFind::new(6 * nt);
        for t in 0..nt {
            for c in 0..3 {
                link.union(slot(t, c, 0), slot(t, (c + 2) % 3, 1));
            }
        }
        for g in &glue {
            let flip = usize::from(g.orientation == Orientation::Reverse);
            for end in 0..2 {
                link.union(slot(g.a, g.ea.index(), end), slot(g.b, g.eb.index(), end ^ flip));
            }
        }
        let mut members: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for c in 0..3 * nt {
            members.entry(corners.find(c)).or_default().push(c);
        }
        for (v, cs) in &members {
            let mut tris: Vec<usize> = cs.iter().map(|&c| c / 3).collect();
            tris.sort_unstable();
            tris.dedup();
            if tris.len() < cs.len() {
                return Err(SurfaceError::InvalidSurface(format!(
                    "vertex {v} identifies two corners of one triangle"
                )));
            }
            let mut roots: Vec<usize> = cs.iter().map(|&c| link.find(slot(c / 3, c % 3, 0))).collect();
            roots.sort_unstable();
            roots.dedup();
            if roots.len() > 1 {
                return Err(SurfaceError::InvalidSurface(format!("link of vertex {v} is disconnected")));
            }
        }
        Ok(TriangulatedMetricSurface { triangles, glue, mesh: None, oracle: None })
    }

    pub fn with_mesh(mut self, mesh: Option<T>) -> Self {
        self.mesh = mesh;
        self
    }

    pub fn with_oracle(mut self, oracle: DistanceOracle<T>) -> Result<Self, SurfaceError> {
        let ok = oracle.positions.len() == self.triangles.len()
            && oracle.positions.iter().zip(&self.triangles).all(|(p, t)| p.len() == t.len());
        if !ok {
            return Err(SurfaceError::InvalidSurface(
                "oracle positions do not match the samples".into(),
            ));
        }
        self.oracle = Some(oracle);
        Ok(self)
    }

    pub fn triangles(&self) -> &[DiscreteMetricTriangle<T>] {
        &self.triangles
    }

    pub fn glue(&self) -> &[EdgeGlue] {
        &self.glue
    }

    pub fn mesh(&self) -> Option<T> {
        self.mesh
    }

    pub fn oracle(&self) -> Option<&DistanceOracle<T>> {
        self.oracle.as_ref()
    }

    /// Largest triangle diameter.
    pub fn measured_mesh(&self) -> T {
        self.triangles.iter().map(|t| t.diameter()).fold(T::zero(), T::max)
    }

    /// Triangle edges left unglued, in triangle order.
    pub fn free_edges(&self) -> Vec<(usize, EdgeLabel)> {
        let mut used = vec![[false; 3]; self.triangles.len()];
        for g in &self.glue {
            used[g.a][g.ea.index()] = true;
            used[g.b][g.eb.index()] = true;
        }
        (0..self.triangles.len())
            .flat_map(|t| EdgeLabel::ALL.into_iter().map(move |e| (t, e)))
            .filter(|&(t, e)| !used[t][e.index()])
            .collect()
    }

    /// Number of distinct edges after gluing.
    pub fn edge_classes(&self) -> usize {
        3 * self.triangles.len() - self.glue.len()
    }

    /// Builds the edge graph. Edge weights are arclength gaps between
    /// consecutive samples.
    pub fn edge_graph(&self) -> EdgeGraph<T> {
        let offsets: Vec<usize> = self
            .triangles
            .iter()
            .scan(0, |acc, t| {
                let o = *acc;
                *acc += t.len();
                Some(o)
            })
            .collect();
        let total = offsets.last().unwrap() + self.triangles.last().unwrap().len();
        let mut uf = UnionFind::new(total);
        for g in &self.glue {
            let (ta, tb) = (&self.triangles[g.a], &self.triangles[g.b]);
            let ia = ta.edge_ids(g.ea);
            let mut ib = tb.edge_ids(g.eb);
            if g.orientation == Orientation::Reverse {
                ib.reverse();
            }
            for (x, y) in ia.into_iter().zip(ib) {
                uf.union(offsets[g.a] + x, offsets[g.b] + y);
            }
        }
        let mut id = vec![usize::MAX; total];
        let mut representative = Vec::new();
        let mut node_of = Vec::with_capacity(self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            let mut row = Vec::with_capacity(tri.len());
            for i in 0..tri.len() {
                let r = uf.find(offsets[t] + i);
                if id[r] == usize::MAX {
                    id[r] = representative.len();
                    representative.push((t, i));
                }
                row.push(id[r]);
            }
            node_of.push(row);
        }
        let mut graph = MetricGraph::with_nodes(representative.len());
        let mut seen = std::collections::HashSet::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in EdgeLabel::ALL {
                let ids = tri.edge_ids(e);
                let s = tri.edges().get(e);
                for k in 0..ids.len() - 1 {
                    let (a, b) = (node_of[t][ids[k]], node_of[t][ids[k + 1]]);
                    if seen.insert((a.min(b), a.max(b))) {
                        graph.add_edge(a, b, s[k + 1] - s[k]).expect("distinct samples");
                    }
                }
            }
        }
        EdgeGraph { graph, node_of, representative }
    }
}

/// Validates a surface and returns its edge graph.
pub fn edge_graph<T: Scalar>(x: &TriangulatedMetricSurface<T>) -> EdgeGraph<T> {
    x.edge_graph()
}
