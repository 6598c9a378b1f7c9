use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::ComplexError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GraphEdge<T> {
    pub a: usize,
    pub b: usize,
    pub len: T,
}

impl<T: Scalar> GraphEdge<T> {
    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// A point on a graph edge, `offset` measured from the edge's `a` endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PointOnEdge<T> {
    pub edge: usize,
    pub offset: T,
}

impl<T> PointOnEdge<T> {
    pub fn new(edge: usize, offset: T) -> Self {
        PointOnEdge { edge, offset }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct GraphRepr<T> {
    nodes: Vec<usize>,
    edges: Vec<(usize, usize, T)>,
}

/// Undirected multigraph with positive edge lengths and its path metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr<T>", into = "GraphRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct MetricGraph<T> {
    edges: Vec<GraphEdge<T>>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl<T: Scalar> From<MetricGraph<T>> for GraphRepr<T> {
    fn from(g: MetricGraph<T>) -> Self {
        GraphRepr {
            nodes: (0..g.node_count()).collect(),
            edges: g.edges.iter().map(|e| (e.a, e.b, e.len)).collect(),
        }
    }
}

impl<T: Scalar> TryFrom<GraphRepr<T>> for MetricGraph<T> {
    type Error = ComplexError;
    fn try_from(r: GraphRepr<T>) -> Result<Self, ComplexError> {
        if r.nodes.iter().enumerate().any(|(i, &n)| i != n) {
            return Err(ComplexError::InvalidInput(
                "node ids must be 0..n listed in order".into(),
            ));
        }
        let mut g = MetricGraph::with_nodes(r.nodes.len());
        for (a, b, len) in r.edges {
            g.add_edge(a, b, len)?;
        }
        Ok(g)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct State<T> {
    dist: T,
    node: usize,
}

impl<T: Scalar> Eq for State<T> {}

impl<T: Scalar> Ord for State<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on distance, then on node id
        crate::scalar::cmp(&o.dist, &self.dist).then_with(|| o.node.cmp(&self.node))
    }
}

impl<T: Scalar> PartialOrd for State<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Lower and upper bounds on the diameter of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DiameterBracket<T> {
    pub lower: T,
    pub upper: T,
    pub exact: bool,
}

/// Node counts up to this size get an exact all-pairs diameter.
pub const EXACT_DIAMETER_NODES: usize = 3000;

impl<T: Scalar> Default for MetricGraph<T> {
    fn default() -> Self {
        MetricGraph::with_nodes(0)
    }
}

impl<T: Scalar> MetricGraph<T> {
    pub fn with_nodes(n: usize) -> Self {
        MetricGraph {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize, len: T) -> Result<usize, ComplexError> {
        if a >= self.adj.len() || b >= self.adj.len() {
            return Err(ComplexError::InvalidInput(format!("edge ({a}, {b}) names a missing node")));
        }
        if a == b {
            return Err(ComplexError::InvalidInput(format!("loop edge at node {a}")));
        }
        if !(len > T::zero()) || !len.is_finite() {
            return Err(ComplexError::InvalidInput(format!(
                "edge ({a}, {b}) has non-positive length {len}"
            )));
        }
        let id = self.edges.len();
        self.edges.push(GraphEdge { a, b, len });
        self.adj[a].push((b, id));
        self.adj[b].push((a, id));
        Ok(id)
    }

    /// Splits edge `e` at `offset` from its `a` endpoint. The first part keeps
    /// id `e`; returns the new node and the id of the second part.
    pub(crate) fn split_edge(&mut self, e: usize, offset: T) -> (usize, usize) {
        let GraphEdge { a, b, len } = self.edges[e];
        let m = self.adj.len();
        let f = self.edges.len();
        self.edges[e] = GraphEdge { a, b: m, len: offset };
        self.edges.push(GraphEdge { a: m, b, len: len - offset });
        for slot in self.adj[a].iter_mut() {
            if slot.1 == e {
                slot.0 = m;
            }
        }
        for slot in self.adj[b].iter_mut() {
            if slot.1 == e {
                *slot = (m, f);
            }
        }
        self.adj.push(vec![(a, e), (b, f)]);
        (m, f)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> &GraphEdge<T> {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[GraphEdge<T>] {
        &self.edges
    }

    /// `(neighbour, edge id)` pairs at `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn total_length(&self) -> T {
        self.edges.iter().map(|e| e.len).sum()
    }

    /// Shortest-path distances from a set of weighted sources. Unreached
    /// nodes get `+inf`.
    pub fn dijkstra(&self, sources: &[(usize, T)]) -> Vec<T> {
        self.dijkstra_within(sources, T::infinity())
    }

    /// Like [`MetricGraph::dijkstra`], but stops once every remaining node
    /// is farther than `radius`; those keep `+inf`.
    pub fn dijkstra_within(&self, sources: &[(usize, T)], radius: T) -> Vec<T> {
        let mut dist = vec![T::infinity(); self.node_count()];
        let mut heap = BinaryHeap::new();
        for &(s, d0) in sources {
            if d0 < dist[s] {
                dist[s] = d0;
                heap.push(State { dist: d0, node: s });
            }
        }
        while let Some(State { dist: d, node: u }) = heap.pop() {
            if d > radius {
                break;
            }
            if d > dist[u] {
                continue;
            }
            for &(v, e) in &self.adj[u] {
                let nd = d + self.edges[e].len;
                if nd < dist[v] && nd <= radius {
                    dist[v] = nd;
                    heap.push(State { dist: nd, node: v });
                }
            }
        }
        dist
    }

    pub fn distances_from(&self, s: usize) -> Vec<T> {
        self.dijkstra(&[(s, T::zero())])
    }

    fn check_point(&self, p: &PointOnEdge<T>) -> Result<(), ComplexError> {
        let tol = T::check_tol();
        match self.edges.get(p.edge) {
            None => Err(ComplexError::InvalidInput(format!("no edge {}", p.edge))),
            Some(e) if !(p.offset >= -tol * e.len && p.offset <= e.len * (T::one() + tol)) => {
                Err(ComplexError::InvalidInput(format!(
                    "offset {} outside edge {} of length {}",
                    p.offset, p.edge, e.len
                )))
            }
            Some(_) => Ok(()),
        }
    }

    /// Sources seeding a search from a point on an edge.
    pub fn point_sources(&self, p: &PointOnEdge<T>) -> [(usize, T); 2] {
        let e = &self.edges[p.edge];
        let off = p.offset.max(T::zero()).min(e.len);
        [(e.a, off), (e.b, e.len - off)]
    }

    /// Distance from a precomputed distance field to a point on an edge.
    pub fn field_at(&self, field: &[T], p: &PointOnEdge<T>) -> T {
        let e = &self.edges[p.edge];
        let off = p.offset.max(T::zero()).min(e.len);
        (field[e.a] + off).min(field[e.b] + e.len - off)
    }

    /// Exact path distance between two points on edges.
    pub fn distance(&self, p: &PointOnEdge<T>, q: &PointOnEdge<T>) -> Result<T, ComplexError> {
        self.check_point(p)?;
        self.check_point(q)?;
        let field = self.dijkstra(&self.point_sources(p));
        let mut d = self.field_at(&field, q);
        if p.edge == q.edge {
            d = d.min((p.offset - q.offset).abs());
        }
        if d.is_finite() {
            Ok(d)
        } else {
            Err(ComplexError::Unreachable)
        }
    }

    pub fn node_distance(&self, a: usize, b: usize) -> Result<T, ComplexError> {
        if a >= self.node_count() || b >= self.node_count() {
            return Err(ComplexError::InvalidInput(format!("no node {}", a.max(b))));
        }
        let d = self.distances_from(a)[b];
        if d.is_finite() {
            Ok(d)
        } else {
            Err(ComplexError::Unreachable)
        }
    }

    /// Connected components as a node labelling.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut label = vec![usize::MAX; self.node_count()];
        let mut count = 0;
        for s in 0..self.node_count() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() == 0 || self.components().0 == 1
    }

    /// Largest node-to-node distance. Exact for graphs of at most
    /// [`EXACT_DIAMETER_NODES`] nodes; otherwise bracketed by repeated
    /// farthest-point sweeps (`max ecc <= diam <= min 2 ecc`).
    ///
    /// Points in edge interiors can lie up to half an edge length beyond the
    /// node diameter; see [`MetricGraph::point_diameter_bound`].
    pub fn diameter(&self) -> Result<DiameterBracket<T>, ComplexError> {
        let n = self.node_count();
        if n == 0 {
            return Ok(DiameterBracket { lower: T::zero(), upper: T::zero(), exact: true });
        }
        if !self.is_connected() {
            return Err(ComplexError::Unreachable);
        }
        if n <= EXACT_DIAMETER_NODES {
            let mut best = T::zero();
            for s in 0..n {
                let m = self.distances_from(s).into_iter().fold(T::zero(), T::max);
                best = best.max(m);
            }
            return Ok(DiameterBracket { lower: best, upper: best, exact: true });
        }
        let mut lower = T::zero();
        let mut upper = T::infinity();
        let mut s = 0;
        for _ in 0..8 {
            let d = self.distances_from(s);
            let (far, ecc) = d
                .iter()
                .enumerate()
                .fold((s, T::zero()), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
            lower = lower.max(ecc);
            upper = upper.min(ecc + ecc);
            if far == s {
                break;
            }
            s = far;
        }
        Ok(DiameterBracket { lower, upper, exact: false })
    }

    /// Upper bound on the distance between arbitrary points of the graph,
    /// including edge interiors.
    pub fn point_diameter_bound(&self) -> Result<T, ComplexError> {
        let d = self.diameter()?;
        let longest = self.edges.iter().map(|e| e.len).fold(T::zero(), T::max);
        Ok(d.upper + longest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MetricGraph<f64> {
        let mut g = MetricGraph::with_nodes(3);
        g.add_edge(0, 1, 3.0).unwrap();
        g.add_edge(1, 2, 4.0).unwrap();
        g.add_edge(0, 2, 5.0).unwrap();
        g
    }

    #[test]
    fn direct_edge_wins() {
        let g = triangle();
        assert_eq!(g.node_distance(0, 2).unwrap(), 5.0);
    }

    #[test]
    fn same_edge_points() {
        let g = triangle();
        let d = g
            .distance(&PointOnEdge::new(1, 0.5), &PointOnEdge::new(1, 3.25))
            .unwrap();
        assert_eq!(d, 2.75);
        let p = PointOnEdge::new(2, 1.0);
        assert_eq!(g.distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn across_edges() {
        let g = triangle();
        // 1 along edge 0 from node 0, and 1 along edge 1 from node 1
        let d = g
            .distance(&PointOnEdge::new(0, 1.0), &PointOnEdge::new(1, 1.0))
            .unwrap();
        assert_eq!(d, 3.0);
    }

    #[test]
    fn unreachable() {
        let mut g = MetricGraph::<f64>::with_nodes(4);
        g.add_edge(0, 1, 1.0).unwrap();
        g.add_edge(2, 3, 1.0).unwrap();
        assert_eq!(g.node_distance(0, 3), Err(ComplexError::Unreachable));
        assert!(!g.is_connected());
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = MetricGraph::<f64>::with_nodes(2);
        assert!(g.add_edge(0, 1, 0.0).is_err());
        assert!(g.add_edge(0, 0, 1.0).is_err());
        assert!(g.add_edge(0, 2, 1.0).is_err());
    }

    #[test]
    fn square_cycle_diameter() {
        let mut g = MetricGraph::<f64>::with_nodes(4);
        for i in 0..4 {
            g.add_edge(i, (i + 1) % 4, 1.0).unwrap();
        }
        let d = g.diameter().unwrap();
        assert!(d.exact);
        assert_eq!(d.lower, 2.0);
    }

    #[test]
    fn swept_bracket_contains_exact() {
        let n = EXACT_DIAMETER_NODES + 10;
        let mut g = MetricGraph::<f64>::with_nodes(n);
        for i in 0..n - 1 {
            g.add_edge(i, i + 1, 1.0 + (i % 3) as f64).unwrap();
        }
        let exact: f64 = g.total_length();
        let d = g.diameter().unwrap();
        assert!(!d.exact);
        assert!(d.lower <= exact && exact <= d.upper);
        assert_eq!(d.lower, exact);
    }

    #[test]
    fn json_round_trip() {
        let g = triangle();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"nodes":[0,1,2],"edges":[[0,1,3.0],[1,2,4.0],[0,2,5.0]]}"#);
        let back: MetricGraph<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
