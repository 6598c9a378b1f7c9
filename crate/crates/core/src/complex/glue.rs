use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ComplexError, GraphEdge, MetricGraph, PolyhedralComplex};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Forward,
    Reverse,
}

/// Glue marker `a` onto marker `b`; with `Reverse`, the start of `a` meets
/// the end of `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identification {
    pub a: String,
    pub b: String,
    pub orientation: Orientation,
}

impl Identification {
    pub fn new(a: impl Into<String>, b: impl Into<String>, orientation: Orientation) -> Self {
        Identification { a: a.into(), b: b.into(), orientation }
    }
}

/// Marker name of `name` from part `part` after a multi-part glue.
pub fn qualified_marker(part: usize, name: &str) -> String {
    format!("{part}:{name}")
}

fn disjoint_union<T: Scalar>(mut parts: Vec<PolyhedralComplex<T>>) -> PolyhedralComplex<T> {
    if parts.len() == 1 {
        return parts.pop().unwrap();
    }
    let total_nodes = parts.iter().map(|p| p.skeleton.node_count()).sum();
    let mut g = MetricGraph::with_nodes(total_nodes);
    let mut out = PolyhedralComplex::new(MetricGraph::default());
    let with_layout = parts.iter().all(|p| !p.layout.is_empty());
    let mut shift_x = T::zero();
    let (mut node_off, mut edge_off) = (0, 0);
    for (pi, part) in parts.into_iter().enumerate() {
        for e in part.skeleton.edges() {
            g.add_edge(e.a + node_off, e.b + node_off, e.len)
                .expect("edges of a valid part");
        }
        let face_off = out.faces.len();
        for mut f in part.faces {
            f.node_refs.iter_mut().for_each(|v| *v += node_off);
            f.edge_refs.iter_mut().for_each(|e| *e += edge_off);
            out.faces.push(f);
        }
        for (name, edges) in &part.markers {
            let q = qualified_marker(pi, name);
            out.markers.insert(q.clone(), edges.iter().map(|e| e + edge_off).collect());
            if let Some(&s) = part.marker_starts.get(name) {
                out.marker_starts.insert(q, s + node_off);
            }
        }
        for mut cap in part.caps {
            cap.first_face += face_off;
            out.caps.push(cap);
        }
        if with_layout {
            let (lo, hi) = part
                .layout
                .iter()
                .fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
            for p in &part.layout {
                out.layout.push([p[0] - lo + shift_x, p[1], p[2]]);
            }
            shift_x = shift_x + (hi - lo) * T::lit(1.1) + T::one();
        }
        node_off += part.skeleton.node_count();
        edge_off += part.skeleton.edge_count();
    }
    out.skeleton = g;
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn grow(&mut self, n: usize) {
        while self.parent.len() < n {
            self.parent.push(self.parent.len());
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Keeps the smaller id as representative.
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            self.parent[hi] = lo;
        }
    }
}

/// Breakpoint positions of both paths, merged within `tol`.
fn merged_breaks<T: Scalar>(a: &[T], b: &[T], scale: T, tol: T) -> Vec<T> {
    let mut all: Vec<T> = a[1..a.len() - 1]
        .iter()
        .copied()
        .chain(b[1..b.len() - 1].iter().map(|&x| x * scale))
        .collect();
    all.sort_by(crate::scalar::cmp);
    let mut out: Vec<T> = Vec::new();
    for x in all {
        if out.last().map_or(true, |&l| x - l > tol) {
            out.push(x);
        }
    }
    out
}

/// Splits the marker path so that it has a node at each of `positions`
/// (given as arclength from the path start; `scale` maps them to this path).
fn refine_path<T: Scalar>(
    c: &mut PolyhedralComplex<T>,
    name: &str,
    positions: &[T],
    scale: T,
    tol: T,
    index: &mut Vec<Vec<usize>>,
) -> Result<(), ComplexError> {
    for &p0 in positions {
        let p = p0 * scale;
        let path = c.marker_path(name)?;
        let k = path.arclength.partition_point(|&s| s < p);
        let near = |i: usize| i < path.arclength.len() && (path.arclength[i] - p).abs() <= tol;
        if near(k) || (k > 0 && near(k - 1)) {
            continue;
        }
        if k == 0 || k >= path.arclength.len() {
            continue;
        }
        let e = path.edges[k - 1];
        let from = path.nodes[k - 1];
        let off = p - path.arclength[k - 1];
        let GraphEdge { a, len, .. } = *c.skeleton.edge(e);
        let off_a = if from == a { off } else { len - off };
        c.split_edge_in(e, off_a, Some(index));
    }
    Ok(())
}

/// Glues complexes along pairs of marked boundary arcs.
///
/// With more than one part, markers are renamed `"{part}:{name}"` (see
/// [`qualified_marker`]) and identifications must use the qualified names.
/// Both arcs are first refined to a common subdivision; matching nodes and
/// edges are then merged. Faces, areas and caps carry over unchanged.
pub fn glue_complexes<T: Scalar>(
    parts: &[PolyhedralComplex<T>],
    identifications: &[Identification],
) -> Result<PolyhedralComplex<T>, ComplexError> {
    glue_complexes_mapped(parts.to_vec(), identifications).map(|(c, _)| c)
}

/// [`glue_complexes`], also returning for every part the glued node of
/// each of its skeleton nodes.
pub fn glue_complexes_mapped<T: Scalar>(
    parts: Vec<PolyhedralComplex<T>>,
    identifications: &[Identification],
) -> Result<(PolyhedralComplex<T>, Vec<Vec<usize>>), ComplexError> {
    if parts.is_empty() {
        return Err(ComplexError::InvalidInput("nothing to glue".into()));
    }
    let sizes: Vec<usize> = parts.iter().map(|p| p.skeleton.node_count()).collect();
    let mut c = disjoint_union(parts);
    let mut index = c.edge_faces();
    let mut pairs: Vec<(Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>)> = Vec::new();

    for id in identifications {
        let pa = c.marker_path(&id.a)?;
        let pb = c.marker_path(&id.b)?;
        let (la, lb) = (pa.length(), pb.length());
        if (la - lb).abs() > T::check_tol() * la.max(lb) {
            return Err(ComplexError::GlueLengthMismatch {
                a: id.a.clone(),
                b: id.b.clone(),
                len_a: la.to_f64_lossy(),
                len_b: lb.to_f64_lossy(),
            });
        }
        let tol = T::check_tol() * la.max(lb);
        let b_arc: Vec<T> = match id.orientation {
            Orientation::Forward => pb.arclength.clone(),
            Orientation::Reverse => pb.arclength.iter().rev().map(|&s| lb - s).collect(),
        };
        let breaks = merged_breaks(&pa.arclength, &b_arc, la / lb, tol);
        refine_path(&mut c, &id.a, &breaks, T::one(), tol, &mut index)?;
        let b_breaks: Vec<T> = match id.orientation {
            Orientation::Forward => breaks.clone(),
            Orientation::Reverse => breaks.iter().rev().map(|&s| la - s).collect(),
        };
        refine_path(&mut c, &id.b, &b_breaks, lb / la, tol, &mut index)?;

        let pa = c.marker_path(&id.a)?;
        let mut pb = c.marker_path(&id.b)?;
        if id.orientation == Orientation::Reverse {
            pb.nodes.reverse();
            pb.edges.reverse();
        }
        if pa.edges.len() != pb.edges.len() {
            return Err(ComplexError::InvalidInput(format!(
                "{} and {} have no common subdivision",
                id.a, id.b
            )));
        }
        for (&ea, &eb) in pa.edges.iter().zip(&pb.edges) {
            let (x, y) = (c.skeleton.edge(ea).len, c.skeleton.edge(eb).len);
            if (x - y).abs() > tol {
                return Err(ComplexError::GlueLengthMismatch {
                    a: id.a.clone(),
                    b: id.b.clone(),
                    len_a: x.to_f64_lossy(),
                    len_b: y.to_f64_lossy(),
                });
            }
        }
        pairs.push((pa.nodes, pb.nodes, pa.edges, pb.edges));
    }

    let mut nodes = UnionFind::new(c.skeleton.node_count());
    let mut edges = UnionFind::new(c.skeleton.edge_count());
    nodes.grow(c.skeleton.node_count());
    edges.grow(c.skeleton.edge_count());
    for (na, nb, ea, eb) in &pairs {
        for (&x, &y) in na.iter().zip(nb) {
            nodes.union(x, y);
        }
        for (&x, &y) in ea.iter().zip(eb) {
            edges.union(x, y);
        }
    }

    let nn = c.skeleton.node_count();
    let mut node_map = vec![usize::MAX; nn];
    let mut next = 0;
    for v in 0..nn {
        let r = nodes.find(v);
        if node_map[r] == usize::MAX {
            node_map[r] = next;
            next += 1;
        }
        node_map[v] = node_map[r];
    }
    let ne = c.skeleton.edge_count();
    let mut edge_map = vec![usize::MAX; ne];
    let mut g = MetricGraph::with_nodes(next);
    for e in 0..ne {
        let r = edges.find(e);
        if r == e {
            let ge = c.skeleton.edge(e);
            let (a, b) = (node_map[ge.a], node_map[ge.b]);
            edge_map[e] = g.add_edge(a, b, ge.len).map_err(|_| {
                ComplexError::InvalidInput(format!("gluing collapses edge {e} to a loop"))
            })?;
        }
    }
    for e in 0..ne {
        let r = edges.find(e);
        edge_map[e] = edge_map[r];
    }

    for f in &mut c.faces {
        f.node_refs.iter_mut().for_each(|v| *v = node_map[*v]);
        f.edge_refs.iter_mut().for_each(|e| *e = edge_map[*e]);
    }
    for list in c.markers.values_mut() {
        list.iter_mut().for_each(|e| *e = edge_map[*e]);
    }
    for s in c.marker_starts.values_mut() {
        *s = node_map[*s];
    }
    if !c.layout.is_empty() {
        let mut layout = vec![[T::zero(); 3]; next];
        for v in (0..nn).rev() {
            layout[node_map[v]] = c.layout[v];
        }
        c.layout = layout;
    }
    c.skeleton = g;
    let markers: BTreeMap<_, _> = std::mem::take(&mut c.markers);
    c.markers = markers;
    c.refresh_boundary();
    if let Some((e, _)) = c.coverage().iter().enumerate().find(|(_, &k)| k > 2) {
        return Err(ComplexError::NonManifold(e));
    }
    let mut off = 0;
    let maps = sizes
        .iter()
        .map(|&n| {
            off += n;
            node_map[off - n..off].to_vec()
        })
        .collect();
    Ok((c, maps))
}
