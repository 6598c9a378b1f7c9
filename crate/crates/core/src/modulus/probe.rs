use serde::{Deserialize, Serialize};

use super::ModulusError;
use crate::complex::{MetricGraph, PolyhedralComplex};
use crate::scalar::Scalar;
use crate::surface::SurfaceApproximation;

const CG_TOL: f64 = 1e-10;
const CG_MAX_ITERATIONS: usize = 200_000;

/// Face areas shared out to their sides in proportion to side length, so
/// that the weights sum to the total area.
pub fn face_area_weights<T: Scalar>(c: &PolyhedralComplex<T>) -> Vec<T> {
    let g = &c.skeleton;
    let mut w = vec![T::zero(); g.edge_count()];
    for f in &c.faces {
        let per: T = f.edge_refs.iter().map(|&e| g.edge(e).len).sum();
        let a = f.area();
        for &e in &f.edge_refs {
            w[e] = w[e] + a * g.edge(e).len / per;
        }
    }
    w
}

/// Effective conductance between node sets `a` (held at 0) and `b` (held
/// at 1), with the potential. Edges with zero conductance are ignored.
pub fn effective_conductance<T: Scalar>(
    g: &MetricGraph<T>,
    conductance: &[T],
    a: &[usize],
    b: &[usize],
) -> Result<(T, Vec<T>), ModulusError> {
    let n = g.node_count();
    let mut fixed = vec![None; n];
    for &v in a {
        fixed[v] = Some(T::zero());
    }
    for &v in b {
        if fixed[v].is_some() {
            return Err(ModulusError::InvalidInput("node sets must be disjoint".into()));
        }
        fixed[v] = Some(T::one());
    }
    let mut u: Vec<T> = fixed.iter().map(|f| f.unwrap_or(T::zero())).collect();
    let mut diag = vec![T::zero(); n];
    for (e, ge) in g.edges().iter().enumerate() {
        diag[ge.a] = diag[ge.a] + conductance[e];
        diag[ge.b] = diag[ge.b] + conductance[e];
    }
    let free = |v: usize| fixed[v].is_none() && diag[v] > T::zero();
    // L_II x = rhs, with rhs = conductance-weighted fixed neighbours
    let apply = |x: &[T], out: &mut [T]| {
        out.iter_mut().for_each(|o| *o = T::zero());
        for (e, ge) in g.edges().iter().enumerate() {
            let c = conductance[e];
            if c == T::zero() {
                continue;
            }
            let (fa, fb) = (free(ge.a), free(ge.b));
            if fa {
                out[ge.a] = out[ge.a] + c * x[ge.a];
                if fb {
                    out[ge.a] = out[ge.a] - c * x[ge.b];
                }
            }
            if fb {
                out[ge.b] = out[ge.b] + c * x[ge.b];
                if fa {
                    out[ge.b] = out[ge.b] - c * x[ge.a];
                }
            }
        }
    };
    let mut rhs = vec![T::zero(); n];
    for (e, ge) in g.edges().iter().enumerate() {
        let c = conductance[e];
        if free(ge.a) && !free(ge.b) {
            rhs[ge.a] = rhs[ge.a] + c * u[ge.b];
        }
        if free(ge.b) && !free(ge.a) {
            rhs[ge.b] = rhs[ge.b] + c * u[ge.a];
        }
    }
    let dot = |x: &[T], y: &[T]| x.iter().zip(y).map(|(&p, &q)| p * q).sum::<T>();
    let precond = |r: &[T], z: &mut [T]| {
        for v in 0..n {
            z[v] = if free(v) { r[v] / diag[v] } else { T::zero() };
        }
    };
    let mut x = vec![T::zero(); n];
    let mut r = rhs.clone();
    let mut z = vec![T::zero(); n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let stop = T::lit(CG_TOL) * dot(&rhs, &rhs).sqrt();
    let mut ap = vec![T::zero(); n];
    let mut converged = dot(&r, &r).sqrt() <= stop;
    for _ in 0..CG_MAX_ITERATIONS {
        if converged {
            break;
        }
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for v in 0..n {
            x[v] = x[v] + alpha * p[v];
            r[v] = r[v] - alpha * ap[v];
        }
        converged = dot(&r, &r).sqrt() <= stop;
        precond(&r, &mut z);
        let rz2 = dot(&r, &z);
        let beta = rz2 / rz;
        rz = rz2;
        for v in 0..n {
            p[v] = z[v] + beta * p[v];
        }
    }
    if !converged {
        return Err(ModulusError::InvalidInput("conductance solve did not converge".into()));
    }
    for v in 0..n {
        if free(v) {
            u[v] = x[v];
        }
    }
    let energy = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, ge)| {
            let d = u[ge.a] - u[ge.b];
            conductance[e] * d * d
        })
        .sum();
    Ok((energy, u))
}

/// Boundary nodes within boundary distance `radius` of `node`.
pub fn boundary_ball<T: Scalar>(c: &PolyhedralComplex<T>, node: usize, radius: T) -> Vec<usize> {
    let g = &c.skeleton;
    let mut sub = MetricGraph::with_nodes(g.node_count());
    for &e in &c.boundary {
        let ge = g.edge(e);
        sub.add_edge(ge.a, ge.b, ge.len).expect("valid edge");
    }
    let d = sub.dijkstra_within(&[(node, T::zero())], radius);
    (0..d.len()).filter(|&v| d[v] <= radius).collect()
}

/// One approximation level with two boundary continua.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeLevel<T> {
    pub complex: PolyhedralComplex<T>,
    pub e: Vec<usize>,
    pub f: Vec<usize>,
}

impl<T: Scalar> ProbeLevel<T> {
    /// Continua around two edge-graph nodes of a surface approximation:
    /// the boundary balls of the given radius about their skeleton images.
    pub fn around(approx: &SurfaceApproximation<T>, a: usize, b: usize, radius: T) -> Self {
        let c = &approx.complex;
        ProbeLevel {
            e: boundary_ball(c, approx.correspondence[a], radius),
            f: boundary_ball(c, approx.correspondence[b], radius),
            complex: c.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ProbeRow<T> {
    pub level: usize,
    pub value: T,
    /// Shortest length of a separating curve.
    pub eta: T,
    pub area: T,
    /// `area / eta^2`, the energy of the admissible density `1 / eta`.
    pub bound: T,
    pub diam_e: T,
    pub diam_f: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ProbeReport<T> {
    pub delta: T,
    pub rows: Vec<ProbeRow<T>>,
    pub max_value: T,
    pub bounded: bool,
}

/// Lower bound on the skeleton diameter of a node set by two sweeps.
fn set_diameter<T: Scalar>(g: &MetricGraph<T>, set: &[usize]) -> T {
    let far = |s: usize| {
        let d = g.distances_from(s);
        set.iter()
            .map(|&v| (v, d[v]))
            .fold((s, T::zero()), |a, b| if b.1 > a.1 { b } else { a })
    };
    let (v, _) = far(set[0]);
    far(v).1
}

/// Separating modulus of `E` and `F` at each level.
///
/// On a disk with `E` and `F` disjoint boundary arcs, the curves separating
/// `E` from `F` are the curves joining the two complementary boundary arcs
/// `A` and `B` off `E` and `F`. Their modulus is computed exactly as the
/// effective conductance between `A` and `B` with conductances `w / len^2`
/// and face-area weights `w`, and compared against `area / eta^2`.
pub fn modulus_boundedness_probe<T: Scalar>(
    levels: &[ProbeLevel<T>],
    delta: T,
) -> Result<ProbeReport<T>, ModulusError> {
    let mut rows = Vec::with_capacity(levels.len());
    for (k, level) in levels.iter().enumerate() {
        let c = &level.complex;
        let g = &c.skeleton;
        let n = g.node_count();
        if level.e.is_empty() || level.f.is_empty() {
            return Err(ModulusError::Precondition(format!("level {k}: empty continuum")));
        }
        let (diam_e, diam_f) = (set_diameter(g, &level.e), set_diameter(g, &level.f));
        if diam_e < delta || diam_f < delta {
            return Err(ModulusError::Precondition(format!(
                "level {k}: continuum diameters {diam_e} and {diam_f} are below delta = {delta}"
            )));
        }
        let mut blocked = vec![false; n];
        for &v in level.e.iter().chain(&level.f) {
            blocked[v] = true;
        }
        // complementary arcs: components of the boundary off E and F
        let mut arcs = crate::surface::UnionFind::new(n);
        let mut on_boundary = vec![false; n];
        for &e in &c.boundary {
            let ge = g.edge(e);
            on_boundary[ge.a] = true;
            on_boundary[ge.b] = true;
            if !blocked[ge.a] && !blocked[ge.b] {
                arcs.union(ge.a, ge.b);
            }
        }
        let mut roots: Vec<usize> = (0..n).filter(|&v| on_boundary[v] && !blocked[v]).map(|v| arcs.find(v)).collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.len() != 2 {
            return Err(ModulusError::Precondition(format!(
                "level {k}: E and F must leave exactly two complementary boundary arcs, found {}",
                roots.len()
            )));
        }
        let side: Vec<usize> = (0..n).filter(|&v| on_boundary[v] && !blocked[v]).collect();
        let a: Vec<usize> = side.iter().copied().filter(|&v| arcs.find(v) == roots[0]).collect();
        let b: Vec<usize> = side.iter().copied().filter(|&v| arcs.find(v) == roots[1]).collect();

        let weights = face_area_weights(c);
        let conductance: Vec<T> = g
            .edges()
            .iter()
            .zip(&weights)
            .map(|(ge, &w)| {
                if blocked[ge.a] || blocked[ge.b] {
                    T::zero()
                } else {
                    w / (ge.len * ge.len)
                }
            })
            .collect();
        let sources: Vec<(usize, T)> = a.iter().map(|&v| (v, T::zero())).collect();
        let mut pruned = MetricGraph::with_nodes(n);
        for (e, ge) in g.edges().iter().enumerate() {
            if conductance[e] > T::zero() {
                pruned.add_edge(ge.a, ge.b, ge.len).expect("valid edge");
            }
        }
        let d = pruned.dijkstra(&sources);
        let eta = b.iter().map(|&v| d[v]).fold(T::infinity(), T::min);
        let (value, _) = effective_conductance(g, &conductance, &a, &b)?;
        let area = c.area();
        let bound = area / (eta * eta);
        rows.push(ProbeRow {
            level: k,
            value,
            eta,
            area,
            bound,
            diam_e,
            diam_f,
            pass: value <= bound * (T::one() + T::check_tol()),
        });
    }
    let max_value = rows.iter().map(|r| r.value).fold(T::zero(), T::max);
    let bounded = rows.iter().all(|r| r.pass);
    Ok(ProbeReport { delta, rows, max_value, bounded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::rectangle_complex;
    use crate::modulus::{discrete_modulus, path_graph, ModulusProblem};

    #[test]
    fn conductance_matches_modulus_on_a_path() {
        let (g, a, b) = path_graph(&[1.0, 2.0, 1.0]);
        let cond: Vec<f64> = g.edges().iter().map(|e| 1.0 / e.len).collect();
        let (c, u) = effective_conductance(&g, &cond, &[a], &[b]).unwrap();
        assert!((c - 0.25).abs() < 1e-12);
        assert!((u[1] - 0.25).abs() < 1e-12);
        let m = discrete_modulus(&ModulusProblem::connect(g, vec![a], vec![b], 1e-12)).unwrap();
        assert!((m.value - c).abs() < 1e-9);
    }

    #[test]
    fn face_weights_sum_to_area() {
        let c = rectangle_complex(2.0, 3.0);
        let w: f64 = face_area_weights(&c).iter().sum();
        assert!((w - 6.0).abs() < 1e-12);
    }

    #[test]
    fn delta_too_large() {
        let mut c = rectangle_complex(1.0, 1.0);
        for e in 0..4 {
            let len = c.skeleton.edge(e).len;
            c.split_edge(e, len / 2.0);
        }
        let level = ProbeLevel { complex: c.clone(), e: vec![0], f: vec![2] };
        assert!(matches!(
            modulus_boundedness_probe(&[level], 0.5),
            Err(ModulusError::Precondition(_))
        ));
    }
}
