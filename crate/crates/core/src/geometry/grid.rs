//! Decomposition of a simple polygon into small cells by a square grid.
//!
//! The cells are the faces of the arrangement formed by the polygon boundary
//! and the grid lines inside it. The arrangement is built globally so that
//! neighbouring cells share vertices bit for bit: every crossing of a
//! polygon edge with a grid line is computed once, and every grid line is
//! split at all arrangement vertices lying on it.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{GeometryError, PlanarPolygon, Point2};
use crate::scalar::Scalar;

/// Number of step halvings tried before giving up.
pub const MAX_HALVINGS: usize = 40;

/// Grid vertices beyond this count are refused rather than allocated.
const MAX_GRID_NODES: f64 = 2.0e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    /// A full grid square contained in the polygon.
    Interior,
    /// A piece of a grid square cut by the polygon boundary.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GridCell<T> {
    #[serde(flatten)]
    pub polygon: PlanarPolygon<T>,
    pub kind: CellKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct GridDecomposition<T> {
    pub eps_prime: T,
    /// Grid anchor: the minimum corner of the parent's bounding box.
    pub origin: Point2<T>,
    pub cells: Vec<GridCell<T>>,
    pub parent: PlanarPolygon<T>,
}

impl<T: Scalar> GridDecomposition<T> {
    pub fn total_area(&self) -> T {
        self.cells.iter().map(|c| c.polygon.shoelace_area()).sum()
    }

    pub fn max_perimeter(&self) -> T {
        self.cells
            .iter()
            .map(|c| c.polygon.perimeter())
            .fold(T::zero(), T::max)
    }

    /// `sum_k perimeter(P_k)^2`.
    pub fn perimeter_square_sum(&self) -> T {
        self.cells
            .iter()
            .map(|c| {
                let l = c.polygon.perimeter();
                l * l
            })
            .sum()
    }

    pub fn count(&self, kind: CellKind) -> usize {
        self.cells.iter().filter(|c| c.kind == kind).count()
    }

    /// The 1-skeleton as a list of undirected segments, each listed once.
    pub fn skeleton_segments(&self) -> Vec<(Point2<T>, Point2<T>)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for cell in &self.cells {
            for (a, b) in cell.polygon.edges() {
                let (ka, kb) = (point_key(a), point_key(b));
                let k = if ka <= kb { (ka, kb) } else { (kb, ka) };
                if seen.insert(k) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Exact identity of a point, with `-0.0` folded onto `0.0`.
pub(crate) fn point_key<T: Scalar>(p: Point2<T>) -> (u64, u64) {
    (
        (p.x.to_f64_lossy() + 0.0).to_bits(),
        (p.y.to_f64_lossy() + 0.0).to_bits(),
    )
}

/// Decomposes `poly` into cells of perimeter below `eps`.
///
/// The grid is anchored at the bounding box minimum. The step starts at the
/// largest power-of-two fraction of the bounding box side with
/// `4 * step < eps` and is halved until every closed grid square meets at
/// most two boundary edges, every cell perimeter is below `eps`, and
/// `sum perimeter^2 <= 17 * area`.
pub fn grid_decompose<T: Scalar>(
    poly: &PlanarPolygon<T>,
    eps: T,
) -> Result<GridDecomposition<T>, GeometryError> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(GeometryError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if !poly.is_simple() {
        return Err(GeometryError::InvalidPolygon("polygon is not simple".into()));
    }
    let bb = poly.bbox();
    let side = bb.width().max(bb.height());
    let area = poly.shoelace_area();
    if !(side > T::zero()) || !(area > T::zero()) {
        return Err(GeometryError::InvalidPolygon("polygon has zero area".into()));
    }
    let tol = T::snap_tol() * bb.diagonal();
    let two = T::lit(2.0);
    let four = T::lit(4.0);

    let mut step = side;
    while four * step >= eps {
        step = step / two;
    }
    for _ in 0..=MAX_HALVINGS {
        let nodes = (bb.width() / step + T::lit(2.0)).to_f64_lossy()
            * (bb.height() / step + T::lit(2.0)).to_f64_lossy();
        if nodes > MAX_GRID_NODES {
            break;
        }
        let grid = Grid::new(bb.min, step, bb.max);
        if let Some(cells) = grid.decompose(poly, eps, area, tol) {
            return Ok(GridDecomposition {
                eps_prime: step,
                origin: bb.min,
                cells,
                parent: poly.clone(),
            });
        }
        step = step / two;
    }
    Err(GeometryError::DecompositionFailed {
        halvings: MAX_HALVINGS,
        last_step: step.to_f64_lossy(),
    })
}

struct Grid<T> {
    origin: Point2<T>,
    step: T,
    xs: Vec<T>,
    ys: Vec<T>,
}

fn grid_lines<T: Scalar>(start: T, step: T, end: T) -> Vec<T> {
    let mut out = vec![start];
    let mut i = 1usize;
    while *out.last().unwrap() < end {
        out.push(start + step * T::from_usize_lossy(i));
        i += 1;
    }
    if out.len() == 1 {
        out.push(start + step);
    }
    out
}

impl<T: Scalar> Grid<T> {
    fn new(origin: Point2<T>, step: T, max: Point2<T>) -> Self {
        Grid {
            origin,
            step,
            xs: grid_lines(origin.x, step, max.x),
            ys: grid_lines(origin.y, step, max.y),
        }
    }

    fn nearest(&self, v: T, start: T, lines: &[T]) -> usize {
        let f = ((v - start) / self.step).round();
        let f = f.max(T::zero()).min(T::from_usize_lossy(lines.len() - 1));
        f.to_usize().unwrap_or(0)
    }

    fn snap(&self, v: T, start: T, lines: &[T], tol: T) -> T {
        let c = lines[self.nearest(v, start, lines)];
        if (v - c).abs() <= tol {
            c
        } else {
            v
        }
    }

    fn vline(&self, x: T) -> Option<usize> {
        let i = self.nearest(x, self.origin.x, &self.xs);
        (self.xs[i] == x).then_some(i)
    }

    fn hline(&self, y: T) -> Option<usize> {
        let j = self.nearest(y, self.origin.y, &self.ys);
        (self.ys[j] == y).then_some(j)
    }

    fn floor_index(&self, v: T, start: T) -> i64 {
        ((v - start) / self.step).floor().to_i64().unwrap_or(i64::MIN)
    }

    fn gridness(&self, p: Point2<T>) -> u8 {
        self.vline(p.x).is_some() as u8 + self.hline(p.y).is_some() as u8
    }

    /// Grid squares whose closed region contains `p`.
    fn squares_of_point(&self, p: Point2<T>) -> Vec<(i64, i64)> {
        let xi = match self.vline(p.x) {
            Some(i) => vec![i as i64 - 1, i as i64],
            None => vec![self.floor_index(p.x, self.origin.x)],
        };
        let yj = match self.hline(p.y) {
            Some(j) => vec![j as i64 - 1, j as i64],
            None => vec![self.floor_index(p.y, self.origin.y)],
        };
        let mut out = Vec::with_capacity(4);
        for &i in &xi {
            for &j in &yj {
                out.push((i, j));
            }
        }
        out
    }

    fn decompose(
        &self,
        poly: &PlanarPolygon<T>,
        eps: T,
        area: T,
        tol: T,
    ) -> Option<Vec<GridCell<T>>> {
        let (x0, y0) = (self.origin.x, self.origin.y);
        let mut verts: Vec<Point2<T>> = poly
            .vertices()
            .iter()
            .map(|p| {
                Point2::new(
                    self.snap(p.x, x0, &self.xs, tol),
                    self.snap(p.y, y0, &self.ys, tol),
                )
            })
            .collect();
        verts.dedup();
        while verts.len() > 1 && verts.first() == verts.last() {
            verts.pop();
        }
        if verts.len() < 3 {
            return None;
        }
        let n = verts.len();

        // Crossing coordinates used for the inside/outside parity of grid
        // segments, with each line perturbed towards negative coordinates.
        let mut vhits: Vec<Vec<T>> = vec![Vec::new(); self.xs.len()];
        let mut hhits: Vec<Vec<T>> = vec![Vec::new(); self.ys.len()];
        // Arrangement vertices lying on each grid line.
        let mut vpts: Vec<Vec<T>> = vec![Vec::new(); self.xs.len()];
        let mut hpts: Vec<Vec<T>> = vec![Vec::new(); self.ys.len()];
        let mut vpieces: HashSet<(usize, u64, u64)> = HashSet::new();
        let mut hpieces: HashSet<(usize, u64, u64)> = HashSet::new();
        let mut pieces: Vec<(Point2<T>, Point2<T>)> = Vec::new();
        let mut square_edges: HashMap<(i64, i64), Vec<usize>> = HashMap::new();

        for k in 0..n {
            let a = verts[k];
            let b = verts[(k + 1) % n];
            let mut pts: Vec<(T, Point2<T>)> = Vec::new();

            let (lo, hi) = (a.x.min(b.x), a.x.max(b.x));
            for i in self.line_range(lo, hi, x0, &self.xs) {
                let c = self.xs[i];
                if !(lo < c && c <= hi) {
                    continue;
                }
                if c == hi {
                    vhits[i].push(if a.x == hi { a.y } else { b.y });
                } else {
                    let t = (c - a.x) / (b.x - a.x);
                    let y = self.snap(a.y + t * (b.y - a.y), y0, &self.ys, tol);
                    vhits[i].push(y);
                    pts.push((t, Point2::new(c, y)));
                }
            }
            let (lo, hi) = (a.y.min(b.y), a.y.max(b.y));
            for j in self.line_range(lo, hi, y0, &self.ys) {
                let c = self.ys[j];
                if !(lo < c && c <= hi) {
                    continue;
                }
                if c == hi {
                    hhits[j].push(if a.y == hi { a.x } else { b.x });
                } else {
                    let t = (c - a.y) / (b.y - a.y);
                    let x = self.snap(a.x + t * (b.x - a.x), x0, &self.xs, tol);
                    hhits[j].push(x);
                    pts.push((t, Point2::new(x, c)));
                }
            }
            pts.sort_by(|p, q| crate::scalar::cmp(&p.0, &q.0));

            let mut seq = vec![a];
            for (_, p) in pts.into_iter().chain(std::iter::once((T::one(), b))) {
                let last = *seq.last().unwrap();
                if last == p {
                    continue;
                }
                if last.dist(p) <= tol {
                    let last_is_a = seq.len() == 1;
                    if p == b && !last_is_a {
                        *seq.last_mut().unwrap() = p;
                    } else if p != b && !last_is_a && self.gridness(p) > self.gridness(last) {
                        *seq.last_mut().unwrap() = p;
                    }
                    continue;
                }
                seq.push(p);
            }
            if *seq.last().unwrap() != b {
                seq.push(b);
            }
            if seq.len() < 2 {
                return None;
            }

            for &p in &seq {
                if let Some(i) = self.vline(p.x) {
                    vpts[i].push(p.y);
                }
                if let Some(j) = self.hline(p.y) {
                    hpts[j].push(p.x);
                }
                for sq in self.squares_of_point(p) {
                    note_square(&mut square_edges, sq, k);
                }
            }
            for w in seq.windows(2) {
                let (p, q) = (w[0], w[1]);
                pieces.push((p, q));
                let m = p.lerp(q, T::lit(0.5));
                let mut sq_x = vec![self.floor_index(m.x, x0)];
                let mut sq_y = vec![self.floor_index(m.y, y0)];
                if p.x == q.x {
                    if let Some(i) = self.vline(p.x) {
                        let (ylo, yhi) = (p.y.min(q.y), p.y.max(q.y));
                        vpieces.insert((i, key1(ylo), key1(yhi)));
                        sq_x = vec![i as i64 - 1, i as i64];
                    }
                }
                if p.y == q.y {
                    if let Some(j) = self.hline(p.y) {
                        let (xlo, xhi) = (p.x.min(q.x), p.x.max(q.x));
                        hpieces.insert((j, key1(xlo), key1(xhi)));
                        sq_y = vec![j as i64 - 1, j as i64];
                    }
                }
                for &i in &sq_x {
                    for &j in &sq_y {
                        note_square(&mut square_edges, (i, j), k);
                    }
                }
            }
        }
        if square_edges.values().any(|e| e.len() > 2) {
            return None;
        }

        let mut arr = Arrangement::default();
        for &(p, q) in &pieces {
            arr.add_half_edge(p, q);
        }
        for (i, hits) in vhits.iter_mut().enumerate() {
            if hits.is_empty() {
                continue;
            }
            hits.sort_by(crate::scalar::cmp);
            let mut stops = std::mem::take(&mut vpts[i]);
            stops.extend_from_slice(&self.ys);
            stops.sort_by(crate::scalar::cmp);
            stops.dedup();
            let c = self.xs[i];
            for w in stops.windows(2) {
                let (ya, yb) = (w[0], w[1]);
                if vpieces.contains(&(i, key1(ya), key1(yb))) {
                    continue;
                }
                let mid = (ya + yb) / T::lit(2.0);
                if hits.partition_point(|h| *h < mid) % 2 == 1 {
                    arr.add_segment(Point2::new(c, ya), Point2::new(c, yb));
                }
            }
        }
        for (j, hits) in hhits.iter_mut().enumerate() {
            if hits.is_empty() {
                continue;
            }
            hits.sort_by(crate::scalar::cmp);
            let mut stops = std::mem::take(&mut hpts[j]);
            stops.extend_from_slice(&self.xs);
            stops.sort_by(crate::scalar::cmp);
            stops.dedup();
            let c = self.ys[j];
            for w in stops.windows(2) {
                let (xa, xb) = (w[0], w[1]);
                if hpieces.contains(&(j, key1(xa), key1(xb))) {
                    continue;
                }
                let mid = (xa + xb) / T::lit(2.0);
                if hits.partition_point(|h| *h < mid) % 2 == 1 {
                    arr.add_segment(Point2::new(xa, c), Point2::new(xb, c));
                }
            }
        }

        let faces = arr.faces()?;
        let sq_area = self.step * self.step;
        let mut cells = Vec::with_capacity(faces.len());
        let mut total = T::zero();
        let mut sum_sq = T::zero();
        for face in faces {
            let poly = PlanarPolygon::from_ccw_unchecked(face);
            let a = poly.signed_area();
            if !(a > T::zero()) {
                return None;
            }
            let l = poly.perimeter();
            if !(l < eps) {
                return None;
            }
            total = total + a;
            sum_sq = sum_sq + l * l;
            let bb = poly.bbox();
            let square = (a - sq_area).abs() <= T::check_tol() * sq_area
                && (bb.width() - self.step).abs() <= tol
                && (bb.height() - self.step).abs() <= tol;
            cells.push(GridCell {
                polygon: poly,
                kind: if square { CellKind::Interior } else { CellKind::Boundary },
            });
        }
        if (total - area).abs() > T::check_tol() * area {
            return None;
        }
        if sum_sq > T::lit(17.0) * area {
            return None;
        }
        cells.sort_by_key(|c| {
            let bb = c.polygon.bbox();
            let m = bb.min.lerp(bb.max, T::lit(0.5));
            (self.floor_index(m.y, y0), self.floor_index(m.x, x0))
        });
        Some(cells)
    }

    fn line_range(&self, lo: T, hi: T, start: T, lines: &[T]) -> std::ops::Range<usize> {
        let a = self.nearest(lo, start, lines).saturating_sub(1);
        let b = (self.nearest(hi, start, lines) + 2).min(lines.len());
        a..b
    }
}

fn key1<T: Scalar>(v: T) -> u64 {
    (v.to_f64_lossy() + 0.0).to_bits()
}

fn note_square(map: &mut HashMap<(i64, i64), Vec<usize>>, sq: (i64, i64), edge: usize) {
    let e = map.entry(sq).or_default();
    if !e.contains(&edge) {
        e.push(edge);
    }
}

/// Planar half-edge arrangement whose every half-edge has a bounded face on
/// its left.
#[derive(Default)]
struct Arrangement<T> {
    index: HashMap<(u64, u64), usize>,
    pos: Vec<Point2<T>>,
    half: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,
}

impl<T: Scalar> Arrangement<T> {
    fn vertex(&mut self, p: Point2<T>) -> usize {
        let k = point_key(p);
        if let Some(&v) = self.index.get(&k) {
            return v;
        }
        let v = self.pos.len();
        self.index.insert(k, v);
        self.pos.push(p);
        self.out.push(Vec::new());
        v
    }

    fn add_half_edge(&mut self, p: Point2<T>, q: Point2<T>) {
        let (u, v) = (self.vertex(p), self.vertex(q));
        self.out[u].push(self.half.len());
        self.half.push((u, v));
    }

    fn add_segment(&mut self, p: Point2<T>, q: Point2<T>) {
        self.add_half_edge(p, q);
        self.add_half_edge(q, p);
    }

    fn angle(&self, u: usize, v: usize) -> T {
        let d = self.pos[v] - self.pos[u];
        d.y.atan2(d.x)
    }

    /// Traces every face by always taking the sharpest left turn.
    fn faces(&self) -> Option<Vec<Vec<Point2<T>>>> {
        let two_pi = T::lit(2.0) * T::PI();
        let mut next = vec![usize::MAX; self.half.len()];
        for (h, &(u, v)) in self.half.iter().enumerate() {
            let back = self.angle(v, u);
            let mut best: Option<(T, usize)> = None;
            for &e in &self.out[v] {
                let w = self.half[e].1;
                let mut d = back - self.angle(v, w);
                while d <= T::zero() {
                    d = d + two_pi;
                }
                while d > two_pi {
                    d = d - two_pi;
                }
                if w == u {
                    d = two_pi;
                }
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, e));
                }
            }
            next[h] = best?.1;
        }
        let mut used = vec![false; self.half.len()];
        let mut faces = Vec::new();
        for start in 0..self.half.len() {
            if used[start] {
                continue;
            }
            let mut face = Vec::new();
            let mut h = start;
            loop {
                if used[h] {
                    if h != start {
                        return None;
                    }
                    break;
                }
                used[h] = true;
                face.push(self.pos[self.half[h].0]);
                h = next[h];
                if face.len() > self.half.len() {
                    return None;
                }
            }
            if face.len() < 3 {
                return None;
            }
            faces.push(face);
        }
        Some(faces)
    }
}
