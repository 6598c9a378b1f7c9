//! Two-dimensional polyhedral complexes: planar faces glued isometrically
//! onto the edges of a metric graph.

mod glue;
mod graph;
mod obj;

pub use glue::{glue_complexes, glue_complexes_mapped, qualified_marker, Identification, Orientation};
pub use graph::{DiameterBracket, GraphEdge, MetricGraph, PointOnEdge, EXACT_DIAMETER_NODES};
pub use obj::to_obj;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PlanarPolygon, Point2};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexError {
    #[error("points lie in different components")]
    Unreachable,
    #[error("glued arcs have different lengths: {a} has {len_a}, {b} has {len_b}")]
    GlueLengthMismatch { a: String, b: String, len_a: f64, len_b: f64 },
    #[error("non-manifold gluing at skeleton edge {0}")]
    NonManifold(usize),
    #[error("unknown marker {0}")]
    UnknownMarker(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A planar face glued to the skeleton. Side `i` runs from `vertices[i]` to
/// `vertices[i + 1]`, is glued onto skeleton edge `edge_refs[i]`, and its
/// endpoints sit on nodes `node_refs[i]` and `node_refs[i + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Face<T> {
    #[serde(flatten)]
    pub polygon: PlanarPolygon<T>,
    pub edge_refs: Vec<usize>,
    pub node_refs: Vec<usize>,
}

impl<T: Scalar> Face<T> {
    /// Builds a face, reorienting all three lists together if the vertices
    /// run clockwise.
    pub fn new(
        mut vertices: Vec<Point2<T>>,
        mut node_refs: Vec<usize>,
        mut edge_refs: Vec<usize>,
    ) -> Result<Self, ComplexError> {
        let n = vertices.len();
        if n < 3 || node_refs.len() != n || edge_refs.len() != n {
            return Err(ComplexError::InvalidInput(format!(
                "face needs matching vertex/node/edge lists of length >= 3 ({} / {} / {})",
                n,
                node_refs.len(),
                edge_refs.len()
            )));
        }
        if crate::geometry::polygon_signed_area(&vertices) < T::zero() {
            vertices.reverse();
            node_refs.reverse();
            let old = edge_refs.clone();
            for (k, e) in edge_refs.iter_mut().enumerate() {
                *e = old[(2 * n - 2 - k) % n];
            }
        }
        let polygon = PlanarPolygon::new(vertices)
            .map_err(|e| ComplexError::InvalidInput(e.to_string()))?;
        Ok(Face { polygon, edge_refs, node_refs })
    }

    pub fn len(&self) -> usize {
        self.edge_refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_refs.is_empty()
    }

    pub fn area(&self) -> T {
        self.polygon.shoelace_area()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapKind {
    /// Capping a cell of the grid decomposition.
    Cell,
    /// Capping the bigon between a boundary arc and its polygon segment.
    Arc,
}

/// An open box (cube without bottom) glued onto a skeleton cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CapInfo<T> {
    pub kind: CapKind,
    /// Index of the cell or partition arc that was capped.
    pub source: usize,
    /// Skeleton length of the capped cycle.
    pub perimeter: T,
    pub first_face: usize,
    pub face_count: usize,
}

impl<T: Scalar> CapInfo<T> {
    /// Intrinsic diameter bound `3/4 * perimeter` of the box.
    pub fn diameter_bound(&self) -> T {
        T::lit(0.75) * self.perimeter
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DiameterBound<T> {
    pub skeleton: DiameterBracket<T>,
    /// Largest distance from a point of a face to its boundary nodes.
    pub detour: T,
    pub lower: T,
    pub upper: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub face: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub edge: Option<usize>,
}

impl Diagnostic {
    fn new(code: &str, message: String, face: Option<usize>, edge: Option<usize>) -> Self {
        Diagnostic { code: code.into(), message, face, edge }
    }
}

/// A polyhedral complex with its skeleton metric.
///
/// `markers` name oriented skeleton paths (boundary arcs); `marker_starts`
/// records the node each path starts from. `layout` optionally places the
/// skeleton nodes in space for visualization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PolyhedralComplex<T> {
    pub faces: Vec<Face<T>>,
    pub skeleton: MetricGraph<T>,
    pub boundary: Vec<usize>,
    pub markers: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub marker_starts: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub caps: Vec<CapInfo<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub layout: Vec<[T; 3]>,
}

/// A marker walked from its start: `nodes.len() == edges.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerPath<T> {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    /// Cumulative length at each node.
    pub arclength: Vec<T>,
}

impl<T: Scalar> MarkerPath<T> {
    pub fn length(&self) -> T {
        *self.arclength.last().unwrap()
    }
}

impl<T: Scalar> PolyhedralComplex<T> {
    pub fn new(skeleton: MetricGraph<T>) -> Self {
        PolyhedralComplex {
            faces: Vec::new(),
            skeleton,
            boundary: Vec::new(),
            markers: BTreeMap::new(),
            marker_starts: BTreeMap::new(),
            caps: Vec::new(),
            layout: Vec::new(),
        }
    }

    pub fn add_face(&mut self, face: Face<T>) -> usize {
        self.faces.push(face);
        self.faces.len() - 1
    }

    pub fn set_marker(&mut self, name: &str, start: usize, edges: Vec<usize>) {
        self.markers.insert(name.to_string(), edges);
        self.marker_starts.insert(name.to_string(), start);
    }

    /// Sum of face areas.
    pub fn area(&self) -> T {
        self.faces.iter().map(Face::area).sum()
    }

    /// Number of face sides glued onto each skeleton edge.
    pub fn coverage(&self) -> Vec<usize> {
        let mut c = vec![0; self.skeleton.edge_count()];
        for f in &self.faces {
            for &e in &f.edge_refs {
                if e < c.len() {
                    c[e] += 1;
                }
            }
        }
        c
    }

    /// Recomputes `boundary` as the edges covered by exactly one face.
    pub fn refresh_boundary(&mut self) {
        self.boundary = self
            .coverage()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(e, _)| e)
            .collect();
    }

    pub fn distance(&self, a: &PointOnEdge<T>, b: &PointOnEdge<T>) -> Result<T, ComplexError> {
        self.skeleton.distance(a, b)
    }

    /// Bounds on the diameter of the whole complex. Every point of a face is
    /// within `detour` of a skeleton node, where `detour` is the largest cap
    /// diameter when caps are recorded and `3/4` of the largest face
    /// perimeter otherwise.
    pub fn diameter_bound(&self) -> Result<DiameterBound<T>, ComplexError> {
        let skeleton = self.skeleton.diameter()?;
        let detour = if !self.caps.is_empty() {
            self.caps
                .iter()
                .map(CapInfo::diameter_bound)
                .fold(T::zero(), T::max)
        } else {
            self.faces
                .iter()
                .map(|f| {
                    let l: T = f.edge_refs.iter().map(|&e| self.skeleton.edge(e).len).sum();
                    T::lit(0.75) * l
                })
                .fold(T::zero(), T::max)
        };
        Ok(DiameterBound {
            skeleton,
            detour,
            lower: skeleton.lower,
            upper: skeleton.upper + detour + detour,
        })
    }

    pub fn marker_path(&self, name: &str) -> Result<MarkerPath<T>, ComplexError> {
        let edges = self
            .markers
            .get(name)
            .ok_or_else(|| ComplexError::UnknownMarker(name.into()))?;
        let start = *self
            .marker_starts
            .get(name)
            .ok_or_else(|| ComplexError::UnknownMarker(name.into()))?;
        let mut nodes = vec![start];
        let mut arclength = vec![T::zero()];
        let mut at = start;
        for &e in edges {
            if e >= self.skeleton.edge_count() {
                return Err(ComplexError::InvalidInput(format!("marker {name} names missing edge {e}")));
            }
            let ge = self.skeleton.edge(e);
            if ge.a != at && ge.b != at {
                return Err(ComplexError::InvalidInput(format!(
                    "marker {name} is not a path at edge {e}"
                )));
            }
            at = ge.other(at);
            nodes.push(at);
            arclength.push(*arclength.last().unwrap() + ge.len);
        }
        Ok(MarkerPath { nodes, edges: edges.clone(), arclength })
    }

    pub fn marker_length(&self, name: &str) -> Result<T, ComplexError> {
        Ok(self.marker_path(name)?.length())
    }

    /// `V - E + F` of the cell structure.
    pub fn euler_characteristic(&self) -> i64 {
        self.skeleton.node_count() as i64 - self.skeleton.edge_count() as i64
            + self.faces.len() as i64
    }

    /// Number of closed curves formed by the boundary edges, or `None` if
    /// some boundary node does not have exactly two boundary edges.
    pub fn boundary_cycles(&self) -> Option<usize> {
        let mut deg = vec![0usize; self.skeleton.node_count()];
        let mut sub = MetricGraph::with_nodes(self.skeleton.node_count());
        for &e in &self.boundary {
            let ge = self.skeleton.edge(e);
            deg[ge.a] += 1;
            deg[ge.b] += 1;
            sub.add_edge(ge.a, ge.b, ge.len).ok()?;
        }
        if deg.iter().any(|&d| d != 0 && d != 2) {
            return None;
        }
        let (_, label) = sub.components();
        let mut seen = std::collections::BTreeSet::new();
        for (v, &d) in deg.iter().enumerate() {
            if d == 2 {
                seen.insert(label[v]);
            }
        }
        Some(seen.len())
    }

    /// Splits skeleton edge `e` at `offset` from its `a` endpoint, updating
    /// faces, markers and layout. Returns the new node and edge ids.
    pub fn split_edge(&mut self, e: usize, offset: T) -> (usize, usize) {
        self.split_edge_in(e, offset, None)
    }

    /// Faces glued onto each skeleton edge.
    pub(crate) fn edge_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.skeleton.edge_count()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &e in &f.edge_refs {
                if e < out.len() && out[e].last() != Some(&fi) {
                    out[e].push(fi);
                }
            }
        }
        out
    }

    /// [`PolyhedralComplex::split_edge`] with an optional edge-to-face index
    /// (from [`PolyhedralComplex::edge_faces`]) that is kept up to date.
    pub(crate) fn split_edge_in(
        &mut self,
        e: usize,
        offset: T,
        mut index: Option<&mut Vec<Vec<usize>>>,
    ) -> (usize, usize) {
        let GraphEdge { a, b, len } = *self.skeleton.edge(e);
        let (m, f) = self.skeleton.split_edge(e, offset);
        if !self.layout.is_empty() {
            let t = offset / len;
            let (pa, pb) = (self.layout[a], self.layout[b]);
            self.layout.push([
                pa[0] + (pb[0] - pa[0]) * t,
                pa[1] + (pb[1] - pa[1]) * t,
                pa[2] + (pb[2] - pa[2]) * t,
            ]);
        }
        let touched: Vec<usize> = match index.as_deref_mut() {
            Some(ix) => {
                let fs = ix[e].clone();
                ix.push(fs.clone());
                fs
            }
            None => (0..self.faces.len()).collect(),
        };
        for fi in touched {
            let face = &mut self.faces[fi];
            let Some(i) = face.edge_refs.iter().position(|&x| x == e) else {
                continue;
            };
            let n = face.edge_refs.len();
            let from = face.node_refs[i];
            let vs = face.polygon.vertices();
            let (p, q) = (vs[i], vs[(i + 1) % n]);
            let (first, second, t) = if from == a { (e, f, offset / len) } else { (f, e, (len - offset) / len) };
            let mut verts = vs.to_vec();
            verts.insert(i + 1, p.lerp(q, t));
            face.polygon = PlanarPolygon::from_ccw_unchecked(verts);
            face.node_refs.insert(i + 1, m);
            face.edge_refs[i] = first;
            face.edge_refs.insert(i + 1, second);
        }
        let names: Vec<String> = self.markers.keys().cloned().collect();
        for name in names {
            let Some(k) = self.markers[&name].iter().position(|&x| x == e) else {
                continue;
            };
            let mut at = self.marker_starts.get(&name).copied().unwrap_or(a);
            let list = self.markers.get_mut(&name).unwrap();
            for &x in &list[..k] {
                let ge = self.skeleton.edge(x);
                at = ge.other(at);
            }
            if at == a {
                list.insert(k + 1, f);
            } else {
                list.insert(k, f);
            }
        }
        if let Some(pos) = self.boundary.iter().position(|&x| x == e) {
            self.boundary.insert(pos + 1, f);
        }
        (m, f)
    }

    /// Checks the structural invariants and reports each violation.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let g = &self.skeleton;
        let ne = g.edge_count();
        for (fi, face) in self.faces.iter().enumerate() {
            let n = face.len();
            if face.node_refs.len() != n || face.polygon.len() != n {
                out.push(Diagnostic::new(
                    "bad_face_refs",
                    format!("face {fi} has mismatched vertex/node/edge counts"),
                    Some(fi),
                    None,
                ));
                continue;
            }
            let mut es = face.edge_refs.clone();
            es.sort_unstable();
            es.dedup();
            if es.len() != n {
                out.push(Diagnostic::new(
                    "non_injective_face",
                    format!("face {fi} is glued twice onto one edge"),
                    Some(fi),
                    None,
                ));
            }
            if !face.polygon.is_simple() {
                out.push(Diagnostic::new(
                    "non_simple_face",
                    format!("face {fi} is not a simple polygon"),
                    Some(fi),
                    None,
                ));
            }
            for i in 0..n {
                let e = face.edge_refs[i];
                if e >= ne {
                    out.push(Diagnostic::new(
                        "bad_face_refs",
                        format!("face {fi} references missing edge {e}"),
                        Some(fi),
                        Some(e),
                    ));
                    continue;
                }
                let ge = g.edge(e);
                let (u, v) = (face.node_refs[i], face.node_refs[(i + 1) % n]);
                if !((ge.a == u && ge.b == v) || (ge.a == v && ge.b == u)) {
                    out.push(Diagnostic::new(
                        "bad_face_refs",
                        format!("face {fi} side {i} does not match the endpoints of edge {e}"),
                        Some(fi),
                        Some(e),
                    ));
                }
                let (p, q) = face.polygon.edge(i);
                let side = p.dist(q);
                if (side - ge.len).abs() > T::check_tol() * ge.len.max(T::one()) {
                    out.push(Diagnostic::new(
                        "length_mismatch",
                        format!("face {fi} side {i} has length {side}, edge {e} has {}", ge.len),
                        Some(fi),
                        Some(e),
                    ));
                }
            }
        }
        let cov = self.coverage();
        for (e, &c) in cov.iter().enumerate() {
            if c == 0 {
                out.push(Diagnostic::new(
                    "uncovered_edge",
                    format!("edge {e} is not covered by any face"),
                    None,
                    Some(e),
                ));
            } else if c > 2 {
                out.push(Diagnostic::new(
                    "non_manifold_edge",
                    format!("edge {e} is covered by {c} faces"),
                    None,
                    Some(e),
                ));
            }
        }
        let mut bd: Vec<usize> = cov
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(e, _)| e)
            .collect();
        let mut listed = self.boundary.clone();
        bd.sort_unstable();
        listed.sort_unstable();
        if bd != listed {
            out.push(Diagnostic::new(
                "boundary_mismatch",
                "boundary list differs from the edges covered once".into(),
                None,
                None,
            ));
        }
        if !g.is_connected() {
            out.push(Diagnostic::new(
                "disconnected",
                format!("skeleton has {} components", g.components().0),
                None,
                None,
            ));
        }
        for name in self.markers.keys() {
            if let Err(e) = self.marker_path(name) {
                out.push(Diagnostic::new("bad_marker", e.to_string(), None, None));
            }
        }
        out
    }
}

/// Total face area of a complex.
pub fn complex_area<T: Scalar>(c: &PolyhedralComplex<T>) -> T {
    c.area()
}

/// Path distance between two skeleton points.
pub fn skeleton_distance<T: Scalar>(
    c: &PolyhedralComplex<T>,
    a: &PointOnEdge<T>,
    b: &PointOnEdge<T>,
) -> Result<T, ComplexError> {
    c.distance(a, b)
}

pub fn skeleton_diameter_bound<T: Scalar>(
    c: &PolyhedralComplex<T>,
) -> Result<DiameterBound<T>, ComplexError> {
    c.diameter_bound()
}

pub fn validate_complex<T: Scalar>(c: &PolyhedralComplex<T>) -> Vec<Diagnostic> {
    c.validate()
}

/// A single axis-aligned rectangle face with its four-edge skeleton.
pub fn rectangle_complex<T: Scalar>(w: T, h: T) -> PolyhedralComplex<T> {
    let mut g = MetricGraph::with_nodes(4);
    let lens = [w, h, w, h];
    let edges: Vec<usize> = (0..4)
        .map(|i| g.add_edge(i, (i + 1) % 4, lens[i]).expect("positive sides"))
        .collect();
    let mut c = PolyhedralComplex::new(g);
    let z = T::zero();
    let verts = vec![Point2::new(z, z), Point2::new(w, z), Point2::new(w, h), Point2::new(z, h)];
    c.layout = verts.iter().map(|p| [p.x, p.y, z]).collect();
    c.add_face(Face::new(verts, vec![0, 1, 2, 3], edges).expect("rectangle face"));
    c.refresh_boundary();
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_area_and_diameter() {
        let c = rectangle_complex(1.0, 1.0);
        assert_eq!(c.area(), 1.0);
        assert!(c.validate().is_empty(), "{:?}", c.validate());
        let d = c.diameter_bound().unwrap();
        assert_eq!(d.lower, 2.0);
        assert!(d.upper <= 2.0 + 2.0 * 3.0);
        assert_eq!(c.euler_characteristic(), 1);
        assert_eq!(c.boundary_cycles(), Some(1));
    }

    #[test]
    fn bare_graph_diameter() {
        let mut g = MetricGraph::with_nodes(3);
        g.add_edge(0, 1, 1.0).unwrap();
        g.add_edge(1, 2, 2.0).unwrap();
        let c = PolyhedralComplex::new(g);
        let d = c.diameter_bound().unwrap();
        assert_eq!(d.upper, d.lower);
        assert_eq!(d.lower, 3.0);
    }

    #[test]
    fn uncovered_edge_is_reported() {
        let mut c = rectangle_complex(1.0, 1.0);
        let n = c.skeleton.add_node();
        c.skeleton.add_edge(0, n, 0.5).unwrap();
        let d = c.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "uncovered_edge");
    }

    #[test]
    fn length_mismatch_is_reported() {
        let mut g = MetricGraph::with_nodes(4);
        let lens = [1.0, 1.0, 1.0, 1.5];
        let edges: Vec<usize> = (0..4).map(|i| g.add_edge(i, (i + 1) % 4, lens[i]).unwrap()).collect();
        let mut c = PolyhedralComplex::new(g);
        let verts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        c.add_face(Face::new(verts, vec![0, 1, 2, 3], edges).unwrap());
        c.refresh_boundary();
        let d = c.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "length_mismatch");
    }

    #[test]
    fn clockwise_face_is_reoriented_consistently() {
        let mut g = MetricGraph::with_nodes(3);
        let e0 = g.add_edge(0, 1, 1.0).unwrap();
        let e1 = g.add_edge(1, 2, 2f64.sqrt()).unwrap();
        let e2 = g.add_edge(2, 0, 1.0).unwrap();
        let mut c = PolyhedralComplex::new(g);
        // clockwise: (0,0) -> (0,1) -> (1,0)
        let verts = vec![Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)];
        c.add_face(Face::new(verts, vec![0, 1, 2], vec![e0, e1, e2]).unwrap());
        c.refresh_boundary();
        assert!(c.validate().is_empty(), "{:?}", c.validate());
    }

    #[test]
    fn split_edge_keeps_structure() {
        let mut c = rectangle_complex(1.0, 2.0);
        c.set_marker("side", 1, vec![1]);
        let (m, f) = c.split_edge(1, 0.5);
        c.refresh_boundary();
        assert!(c.validate().is_empty(), "{:?}", c.validate());
        assert_eq!(c.skeleton.edge(1).len, 0.5);
        assert_eq!(c.skeleton.edge(f).len, 1.5);
        assert_eq!(c.layout[m], [1.0, 0.5, 0.0]);
        let p = c.marker_path("side").unwrap();
        assert_eq!(p.nodes, vec![1, m, 2]);
        assert_eq!(p.length(), 2.0);
        assert_eq!(c.faces[0].len(), 5);
    }

    #[test]
    fn json_shape() {
        let c = rectangle_complex(1.0, 1.0);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["faces"][0]["edge_refs"], serde_json::json!([0, 1, 2, 3]));
        assert_eq!(v["skeleton"]["edges"][1], serde_json::json!([1, 2, 1.0]));
        assert_eq!(v["boundary"], serde_json::json!([0, 1, 2, 3]));
        let back: PolyhedralComplex<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
