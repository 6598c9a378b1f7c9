use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{FillError, ARC_CAP_AREA, EPS_HALVINGS, MIN_SEGMENTS_PER_EDGE, SKELETON_SCALE};
use crate::complex::{CapInfo, CapKind, Face, MetricGraph, PolyhedralComplex};
use crate::geometry::{
    grid_decompose, is_simple_polygon, point_segment_distance, polygon_signed_area, CellKind,
    PlanarPolygon, Point2,
};
use crate::scalar::Scalar;
use crate::triangle::{embed_triangle, DiscreteMetricTriangle, EdgeLabel};

/// Bookkeeping of a filling, kept for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FillAccounting<T> {
    pub eps_requested: T,
    pub eps_used: T,
    pub halvings: usize,
    /// Sample ids of the partition points, in boundary order from `p`.
    pub partition: Vec<usize>,
    /// The polygon through the embedded partition points.
    pub polygon: PlanarPolygon<T>,
    /// Area of the polygon through all embedded samples.
    pub omega_area: T,
    pub polygon_area: T,
    /// Largest sampled distance of the triangle.
    pub diameter: T,
    /// Longest partition arc.
    pub max_arc: T,
    /// Whether every sample is a partition point.
    pub resolution_limited: bool,
    /// Whether `L0 * eps * perimeter <= area(Omega)` holds at `eps_used`.
    pub area_slack_met: bool,
    pub eps_prime: T,
    pub cells: usize,
    pub interior_cells: usize,
    pub perimeter_square_sum: T,
    pub cell_cap_area: T,
    pub arc_cap_area: T,
    /// Largest ratio of an arc cap perimeter to its arc length.
    pub max_arc_cap_ratio: T,
}

/// A polyhedral disk filling a metric triangle. `sample_nodes[i]` is the
/// skeleton node of boundary sample `i`; markers `beta1`, `beta2`, `beta3`
/// run along `pq`, `qr`, `rp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FilledTriangle<T> {
    pub complex: PolyhedralComplex<T>,
    pub sample_nodes: Vec<usize>,
    pub accounting: FillAccounting<T>,
}

pub const MARKERS: [&str; 3] = ["beta1", "beta2", "beta3"];

/// Picks partition points among the samples so that every arc is shorter
/// than `eps` where the sampling allows it. Vertices are always included;
/// interior breakpoints are spread evenly along each edge.
pub fn partition_boundary<T: Scalar>(tri: &DiscreteMetricTriangle<T>, eps: T) -> Vec<usize> {
    let mut out = Vec::new();
    for e in EdgeLabel::ALL {
        let s = tri.edges().get(e);
        let k = s.len() - 1;
        let len = s[k];
        let arcs = (len / eps).floor().to_usize().unwrap_or(usize::MAX).saturating_add(1);
        let chosen: Vec<usize> = if arcs >= k {
            (0..=k).collect()
        } else {
            let mut c = vec![0];
            for i in 1..arcs {
                let target = len * T::from_usize_lossy(i) / T::from_usize_lossy(arcs);
                let lo = c.last().unwrap() + 1;
                let hi = k - (arcs - i);
                let mut j = s.partition_point(|&x| x < target).clamp(lo, hi);
                if j > lo && (target - s[j - 1]) < (s[j] - target) {
                    j -= 1;
                }
                c.push(j);
            }
            c.push(k);
            if c.windows(2).all(|w| s[w[1]] - s[w[0]] < eps) {
                c
            } else {
                let mut g = vec![0];
                let mut cur = 0;
                while cur < k {
                    let mut next = cur + 1;
                    while next < k && s[next + 1] - s[cur] < eps {
                        next += 1;
                    }
                    g.push(next);
                    cur = next;
                }
                g
            }
        };
        out.extend(chosen[..chosen.len() - 1].iter().map(|&j| tri.sample_id(e, j)));
    }
    out
}

struct Cycle {
    nodes: Vec<usize>,
    edges: Vec<usize>,
}

enum Corner<T> {
    Node(usize),
    Split(usize, T),
}

struct CapSpec<T> {
    kind: CapKind,
    source: usize,
    cycle: Cycle,
    corners: Vec<Corner<T>>,
    chord: T,
}

struct Refined<T> {
    nodes: Vec<usize>,
    offsets: Vec<T>,
    subedges: Vec<usize>,
}

/// Fills `tri` by a polyhedral disk.
///
/// `eps` is halved (at most [`EPS_HALVINGS`] times) until `34 eps` is below
/// the triangle diameter, the partition polygon has at most twice the area
/// of the embedded region, and either `L0 * eps * perimeter <= area` or the
/// partition already uses every sample.
pub fn fill_triangle<T: Scalar>(
    tri: &DiscreteMetricTriangle<T>,
    eps: T,
) -> Result<FilledTriangle<T>, FillError> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(FillError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if !tri.is_simple() {
        return Err(FillError::InvalidInput("triangle is not marked simple".into()));
    }
    for e in EdgeLabel::ALL {
        if tri.edges().get(e).len() - 1 < MIN_SEGMENTS_PER_EDGE {
            return Err(FillError::InvalidInput(format!(
                "edge {e} has fewer than {MIN_SEGMENTS_PER_EDGE} segments"
            )));
        }
    }
    let image = embed_triangle(tri)?;
    let n = tri.len();
    let diam = tri.diameter();
    let omega_area = polygon_signed_area(&image);
    if omega_area.abs() <= T::lit(1e-12) * diam * diam {
        return Err(FillError::DegenerateTriangle);
    }
    if omega_area < T::zero() || !is_simple_polygon(&image)? {
        return Err(FillError::NonSimpleBoundary);
    }
    let perimeter = tri.perimeter();

    let mut eps_used = eps;
    let mut halvings = 0;
    let (partition, polygon) = loop {
        let part = partition_boundary(tri, eps_used);
        let pts: Vec<Point2<T>> = part.iter().map(|&i| image[i]).collect();
        let limited = part.len() == n;
        let area = polygon_signed_area(&pts);
        let simple = area > T::zero() && is_simple_polygon(&pts)?;
        let small = T::lit(34.0) * eps_used < diam;
        let slack = T::lit(ARC_CAP_AREA) * eps_used * perimeter <= omega_area;
        if small && simple && area <= T::lit(2.0) * omega_area && (slack || limited) {
            break (part, PlanarPolygon::new(pts)?);
        }
        if halvings == EPS_HALVINGS {
            return Err(if limited && !simple {
                FillError::NonSimpleBoundary
            } else {
                FillError::EpsBudget(EPS_HALVINGS)
            });
        }
        eps_used = eps_used / T::lit(2.0);
        halvings += 1;
    };
    let dec = grid_decompose(&polygon, eps_used)?;

    let scale = T::lit(SKELETON_SCALE);
    let mut layout: Vec<[T; 3]> = Vec::new();
    let mut base_edges: Vec<(usize, usize, T)> = Vec::new();
    let mut side_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut key_node: HashMap<(u64, u64), usize> = HashMap::new();

    let mut caps: Vec<CapSpec<T>> = Vec::new();
    for (k, cell) in dec.cells.iter().enumerate() {
        let nodes: Vec<usize> = cell
            .polygon
            .vertices()
            .iter()
            .map(|&p| {
                *key_node.entry(crate::geometry::point_key(p)).or_insert_with(|| {
                    layout.push([p.x, p.y, T::zero()]);
                    layout.len() - 1
                })
            })
            .collect();
        let m = nodes.len();
        let edges = (0..m)
            .map(|i| {
                let (u, v) = (nodes[i], nodes[(i + 1) % m]);
                let key = (u.min(v), u.max(v));
                *side_index.entry(key).or_insert_with(|| {
                    let (pu, pv) = (cell.polygon.vertices()[i], cell.polygon.vertices()[(i + 1) % m]);
                    base_edges.push((u, v, scale * pu.dist(pv)));
                    base_edges.len() - 1
                })
            })
            .collect();
        caps.push(CapSpec {
            kind: CapKind::Cell,
            source: k,
            cycle: Cycle { nodes, edges },
            corners: Vec::new(),
            chord: T::zero(),
        });
    }
    let grid_nodes = layout.len();
    let tol = T::check_tol() * polygon.bbox().diagonal();

    // partition points onto skeleton nodes
    let mut sample_nodes = vec![usize::MAX; n];
    for &i in &partition {
        let p = image[i];
        let node = match key_node.get(&crate::geometry::point_key(p)) {
            Some(&v) => v,
            None => {
                let (v, d) = (0..grid_nodes)
                    .map(|v| (v, Point2::new(layout[v][0], layout[v][1]).dist(p)))
                    .fold((usize::MAX, T::infinity()), |a, b| if b.1 < a.1 { b } else { a });
                if d > tol {
                    return Err(FillError::InvalidInput(format!(
                        "partition point {i} is not a vertex of the decomposition"
                    )));
                }
                v
            }
        };
        sample_nodes[i] = node;
    }

    // step lengths between consecutive samples, measured along their edge
    let mut step_len = vec![T::zero(); n];
    for e in EdgeLabel::ALL {
        let s = tri.edges().get(e);
        for k in 0..s.len() - 1 {
            step_len[tri.sample_id(e, k)] = s[k + 1] - s[k];
        }
    }

    let mlen = partition.len();
    let mut arc_nodes: Vec<Vec<usize>> = Vec::with_capacity(mlen);
    let mut arc_edges: Vec<Vec<usize>> = Vec::with_capacity(mlen);
    let mut max_arc = T::zero();
    for m in 0..mlen {
        let (a, b) = (partition[m], partition[(m + 1) % mlen]);
        let mut nodes = vec![sample_nodes[a]];
        let mut edges = Vec::new();
        let mut arc = T::zero();
        let mut i = a;
        loop {
            let j = (i + 1) % n;
            let node = if j == b {
                sample_nodes[b]
            } else {
                layout.push([image[j].x, image[j].y, T::zero()]);
                sample_nodes[j] = layout.len() - 1;
                layout.len() - 1
            };
            base_edges.push((*nodes.last().unwrap(), node, step_len[i]));
            edges.push(base_edges.len() - 1);
            nodes.push(node);
            arc = arc + step_len[i];
            i = j;
            if i == b {
                break;
            }
        }
        max_arc = max_arc.max(arc);
        arc_nodes.push(nodes);
        arc_edges.push(edges);
    }

    // polygon sides as chains of cell sides
    for m in 0..mlen {
        let (pa, pb) = (image[partition[m]], image[partition[(m + 1) % mlen]]);
        let (na, nb) = (sample_nodes[partition[m]], sample_nodes[partition[(m + 1) % mlen]]);
        let dir = pb - pa;
        let len2 = dir.dot(dir);
        let (lo, hi) = (
            Point2::new(pa.x.min(pb.x) - tol, pa.y.min(pb.y) - tol),
            Point2::new(pa.x.max(pb.x) + tol, pa.y.max(pb.y) + tol),
        );
        let mut on: Vec<(T, usize)> = (0..grid_nodes)
            .filter(|&v| v != na && v != nb)
            .filter_map(|v| {
                let p = Point2::new(layout[v][0], layout[v][1]);
                if p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y {
                    return None;
                }
                (point_segment_distance(p, pa, pb) <= tol).then(|| ((p - pa).dot(dir) / len2, v))
            })
            .collect();
        on.sort_by(|x, y| crate::scalar::cmp(&x.0, &y.0));
        let mut chain = vec![na];
        chain.extend(on.iter().map(|x| x.1));
        chain.push(nb);
        let mut chain_edges = Vec::with_capacity(chain.len() - 1);
        for w in chain.windows(2) {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            let e = side_index.get(&key).copied().ok_or_else(|| {
                FillError::InvalidInput(format!("polygon side {m} is not covered by cell sides"))
            })?;
            chain_edges.push(e);
        }
        let mut nodes = arc_nodes[m].clone();
        let mut back: Vec<usize> = chain[..chain.len() - 1].iter().rev().copied().collect();
        back.pop();
        nodes.extend(back);
        let mut edges = arc_edges[m].clone();
        edges.extend(chain_edges.iter().rev());
        let arc: T = arc_edges[m].iter().map(|&e| base_edges[e].2).sum();
        caps.push(CapSpec {
            kind: CapKind::Arc,
            source: m,
            cycle: Cycle { nodes, edges },
            corners: Vec::new(),
            chord: arc,
        });
    }

    // corner positions at quarter perimeters, splitting edges where needed
    let mut requests: Vec<Vec<T>> = vec![Vec::new(); base_edges.len()];
    for cap in &mut caps {
        let lens: Vec<T> = cap.cycle.edges.iter().map(|&e| base_edges[e].2).collect();
        let total: T = lens.iter().copied().sum();
        let side = total / T::lit(4.0);
        let ctol = T::snap_tol() * total;
        let mut corners = vec![Corner::Node(cap.cycle.nodes[0])];
        let mut cum = T::zero();
        let mut i = 0;
        for j in 1..4 {
            let target = side * T::from_usize_lossy(j);
            while cum + lens[i] < target - ctol {
                cum = cum + lens[i];
                i += 1;
            }
            let next = cum + lens[i];
            let c = if (target - cum).abs() <= ctol {
                Corner::Node(cap.cycle.nodes[i])
            } else if (next - target).abs() <= ctol {
                Corner::Node(cap.cycle.nodes[(i + 1) % lens.len()])
            } else {
                let e = cap.cycle.edges[i];
                let off = target - cum;
                let off_a = if base_edges[e].0 == cap.cycle.nodes[i] { off } else { lens[i] - off };
                requests[e].push(off_a);
                Corner::Split(e, off_a)
            };
            corners.push(c);
        }
        cap.corners = corners;
    }

    let mut refined: Vec<Refined<T>> = Vec::with_capacity(base_edges.len());
    let mut sub: Vec<(usize, usize, T)> = Vec::new();
    for (e, &(a, b, len)) in base_edges.iter().enumerate() {
        let mut offs = std::mem::take(&mut requests[e]);
        offs.sort_by(crate::scalar::cmp);
        let etol = T::snap_tol() * len;
        let mut offsets = vec![T::zero()];
        for o in offs {
            if o - *offsets.last().unwrap() > etol && len - o > etol {
                offsets.push(o);
            }
        }
        offsets.push(len);
        let mut nodes = vec![a];
        for &o in &offsets[1..offsets.len() - 1] {
            let t = o / len;
            let (pa, pb) = (layout[a], layout[b]);
            layout.push([
                pa[0] + (pb[0] - pa[0]) * t,
                pa[1] + (pb[1] - pa[1]) * t,
                pa[2] + (pb[2] - pa[2]) * t,
            ]);
            nodes.push(layout.len() - 1);
        }
        nodes.push(b);
        let subedges = (0..nodes.len() - 1)
            .map(|k| {
                sub.push((nodes[k], nodes[k + 1], offsets[k + 1] - offsets[k]));
                sub.len() - 1
            })
            .collect();
        refined.push(Refined { nodes, offsets, subedges });
    }

    let mut graph = MetricGraph::with_nodes(layout.len());
    for &(a, b, len) in &sub {
        graph.add_edge(a, b, len)?;
    }

    // expands a base-edge path walked from `start` into refined nodes/edges
    let expand = |start: usize, edges: &[usize]| -> (Vec<usize>, Vec<usize>) {
        let mut nodes = vec![start];
        let mut out = Vec::new();
        let mut at = start;
        for &e in edges {
            let r = &refined[e];
            if base_edges[e].0 == at {
                nodes.extend(&r.nodes[1..]);
                out.extend(&r.subedges);
                at = base_edges[e].1;
            } else {
                nodes.extend(r.nodes[..r.nodes.len() - 1].iter().rev());
                out.extend(r.subedges.iter().rev());
                at = base_edges[e].0;
            }
        }
        (nodes, out)
    };

    let mut complex = PolyhedralComplex::new(MetricGraph::default());
    let mut cap_infos = Vec::with_capacity(caps.len());
    let mut cell_cap_area = T::zero();
    let mut arc_cap_area = T::zero();
    let mut max_arc_cap_ratio = T::zero();
    for cap in &caps {
        let (mut nodes, edges) = expand(cap.cycle.nodes[0], &cap.cycle.edges);
        nodes.pop();
        let lens: Vec<T> = edges.iter().map(|&e| graph.edge(e).len).collect();
        let total: T = lens.iter().copied().sum();
        let side = total / T::lit(4.0);
        let corner_nodes: Vec<usize> = cap
            .corners
            .iter()
            .map(|c| match *c {
                Corner::Node(v) => v,
                Corner::Split(e, off) => {
                    let r = &refined[e];
                    let k = (1..r.offsets.len() - 1)
                        .min_by(|&x, &y| {
                            crate::scalar::cmp(&(r.offsets[x] - off).abs(), &(r.offsets[y] - off).abs())
                        })
                        .expect("split node present");
                    r.nodes[k]
                }
            })
            .collect();
        let mut idx = vec![0usize];
        for &c in &corner_nodes[1..] {
            let from = *idx.last().unwrap() + 1;
            let k = nodes[from..]
                .iter()
                .position(|&v| v == c)
                .ok_or_else(|| FillError::InvalidInput("cap corner not on its cycle".into()))?;
            idx.push(from + k);
        }
        idx.push(nodes.len());

        let first_face = complex.faces.len();
        let tops: Vec<usize> = corner_nodes
            .iter()
            .map(|&c| {
                let p = layout[c];
                layout.push([p[0], p[1], p[2] + side]);
                graph.add_node()
            })
            .collect();
        let mut vert = Vec::with_capacity(4);
        for j in 0..4 {
            vert.push(graph.add_edge(corner_nodes[j], tops[j], side)?);
        }
        let mut top = Vec::with_capacity(4);
        for j in 0..4 {
            top.push(graph.add_edge(tops[j], tops[(j + 1) % 4], side)?);
        }
        let z = T::zero();
        for j in 0..4 {
            let (from, to) = (idx[j], idx[j + 1]);
            let mut verts = Vec::new();
            let mut vnodes = Vec::new();
            let mut vedges = Vec::new();
            let mut x = z;
            for k in from..to {
                verts.push(Point2::new(x, z));
                vnodes.push(nodes[k]);
                vedges.push(edges[k]);
                x = x + lens[k];
            }
            verts.push(Point2::new(side, z));
            vnodes.push(nodes[to % nodes.len()]);
            vedges.push(vert[(j + 1) % 4]);
            verts.push(Point2::new(side, side));
            vnodes.push(tops[(j + 1) % 4]);
            vedges.push(top[j]);
            verts.push(Point2::new(z, side));
            vnodes.push(tops[j]);
            vedges.push(vert[j]);
            complex.add_face(Face::new(verts, vnodes, vedges)?);
        }
        complex.add_face(Face::new(
            vec![
                Point2::new(z, z),
                Point2::new(side, z),
                Point2::new(side, side),
                Point2::new(z, side),
            ],
            tops.clone(),
            top.clone(),
        )?);
        let area = T::lit(5.0) * side * side;
        match cap.kind {
            CapKind::Cell => cell_cap_area = cell_cap_area + area,
            CapKind::Arc => {
                arc_cap_area = arc_cap_area + area;
                max_arc_cap_ratio = max_arc_cap_ratio.max(total / cap.chord);
            }
        }
        cap_infos.push(CapInfo {
            kind: cap.kind,
            source: cap.source,
            perimeter: total,
            first_face,
            face_count: 5,
        });
    }

    for (j, e) in EdgeLabel::ALL.iter().enumerate() {
        let ids = tri.edge_ids(*e);
        let (first, last) = (ids[0], *ids.last().unwrap());
        let m0 = partition.iter().position(|&x| x == first).expect("vertex in partition");
        let mut edges = Vec::new();
        let mut m = m0;
        loop {
            let (_, ex) = expand(arc_nodes[m][0], &arc_edges[m]);
            edges.extend(ex);
            m = (m + 1) % mlen;
            if partition[m] == last {
                break;
            }
        }
        complex.set_marker(MARKERS[j], sample_nodes[first], edges);
    }

    complex.skeleton = graph;
    complex.caps = cap_infos;
    complex.layout = layout;
    complex.refresh_boundary();

    let accounting = FillAccounting {
        eps_requested: eps,
        eps_used,
        halvings,
        resolution_limited: partition.len() == n,
        area_slack_met: T::lit(ARC_CAP_AREA) * eps_used * perimeter <= omega_area,
        polygon_area: polygon.shoelace_area(),
        polygon,
        partition,
        omega_area,
        diameter: diam,
        max_arc,
        eps_prime: dec.eps_prime,
        cells: dec.cells.len(),
        interior_cells: dec.count(CellKind::Interior),
        perimeter_square_sum: dec.perimeter_square_sum(),
        cell_cap_area,
        arc_cap_area,
        max_arc_cap_ratio,
    };
    Ok(FilledTriangle { complex, sample_nodes, accounting })
}
