use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SurfaceError, TriangulatedMetricSurface};
use crate::complex::{glue_complexes_mapped, qualified_marker, Identification, PolyhedralComplex};
use crate::filling::{fill_triangle, FillAccounting, FilledTriangle, AREA_CONSTANT, MARKERS};
use crate::scalar::Scalar;

pub const DEFAULT_SAMPLE_BUDGET: usize = 2000;
const MAX_SOURCES: usize = 16;

/// A glued filling of a whole surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SurfaceApproximation<T> {
    pub complex: PolyhedralComplex<T>,
    /// Skeleton node of every edge-graph node.
    pub correspondence: Vec<usize>,
    pub fills: Vec<FillAccounting<T>>,
    /// Face area of each triangle's filling.
    pub part_areas: Vec<T>,
    pub eps: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SampledPair<T> {
    pub a: usize,
    pub b: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d_lower: Option<T>,
    pub d_n: T,
    pub d_graph_upper: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct MeasureRow<T> {
    pub triangle: usize,
    pub declared: T,
    pub filled: T,
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct MeasureReport<T> {
    pub rows: Vec<MeasureRow<T>>,
    pub declared_total: T,
    pub filled_total: T,
    pub global_ratio: T,
    pub bound: T,
    pub pass: bool,
}

/// Distances compared on sampled edge-graph pairs.
///
/// `eps_estimate` is the largest `d_graph_upper - d_lower` when an oracle
/// exists and the largest `d_graph_upper - d_n` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct IsometryCertificate<T> {
    pub eps: T,
    pub eps_estimate: T,
    /// Largest `d_graph_upper - d_n`.
    pub distortion: T,
    /// Largest `d_lower - d_n`; positive values are shortcuts.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shortcut: Option<T>,
    pub seed: u64,
    pub pairs: Vec<SampledPair<T>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub measure: Option<MeasureReport<T>>,
    pub upper_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub measure_ok: Option<bool>,
    pub pass: bool,
}

fn fill_all<T: Scalar>(
    x: &TriangulatedMetricSurface<T>,
    eps: T,
) -> Result<Vec<FilledTriangle<T>>, SurfaceError> {
    let tris = x.triangles();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(tris.len());
    let mut slots: Vec<Option<Result<FilledTriangle<T>, SurfaceError>>> = vec![None; tris.len()];
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w..tris.len())
                        .step_by(workers)
                        .map(|t| (t, fill_triangle(&tris[t], eps).map_err(SurfaceError::from)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (t, r) in h.join().expect("filling worker panicked") {
                slots[t] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every triangle filled")).collect()
}

/// Fills every triangle with parameter `eps` and glues the fillings along
/// the identifications of `x`.
pub fn approximate_surface<T: Scalar>(
    x: &TriangulatedMetricSurface<T>,
    eps: T,
) -> Result<SurfaceApproximation<T>, SurfaceError> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(SurfaceError::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let fills = fill_all(x, eps)?;
    let nt = fills.len();
    let name = |t: usize, e: crate::triangle::EdgeLabel| {
        let m = MARKERS[e.index()];
        if nt > 1 {
            qualified_marker(t, m)
        } else {
            m.to_string()
        }
    };
    let ids: Vec<Identification> = x
        .glue()
        .iter()
        .map(|g| Identification::new(name(g.a, g.ea), name(g.b, g.eb), g.orientation))
        .collect();
    let (mut parts, mut samples, mut accounting) = (Vec::new(), Vec::new(), Vec::new());
    for f in fills {
        parts.push(f.complex);
        samples.push(f.sample_nodes);
        accounting.push(f.accounting);
    }
    let part_areas = parts.iter().map(PolyhedralComplex::area).collect();
    let (complex, maps) = glue_complexes_mapped(parts, &ids)?;

    let eg = x.edge_graph();
    let mut correspondence = vec![usize::MAX; eg.graph.node_count()];
    for (t, sample_nodes) in samples.iter().enumerate() {
        for (i, &v) in sample_nodes.iter().enumerate() {
            let node = maps[t][v];
            let g = eg.node_of[t][i];
            if correspondence[g] == usize::MAX {
                correspondence[g] = node;
            } else if correspondence[g] != node {
                return Err(SurfaceError::InvalidSurface(format!(
                    "sample {i} of triangle {t} did not meet its glued copies"
                )));
            }
        }
    }
    Ok(SurfaceApproximation {
        complex,
        correspondence,
        fills: accounting,
        part_areas,
        eps,
    })
}

/// Per-triangle and global ratios of filling area to declared area.
pub fn measure_report<T: Scalar>(
    x: &TriangulatedMetricSurface<T>,
    approx: &SurfaceApproximation<T>,
) -> Result<MeasureReport<T>, SurfaceError> {
    let mut rows = Vec::with_capacity(x.triangles().len());
    for (t, tri) in x.triangles().iter().enumerate() {
        let declared = match tri.declared_area() {
            Some(a) if a > T::zero() => a,
            _ => return Err(SurfaceError::MissingArea(t)),
        };
        let filled = approx.part_areas[t];
        rows.push(MeasureRow { triangle: t, declared, filled, ratio: filled / declared });
    }
    let declared_total: T = rows.iter().map(|r| r.declared).sum();
    let filled_total: T = rows.iter().map(|r| r.filled).sum();
    let global_ratio = filled_total / declared_total;
    let bound = T::lit(AREA_CONSTANT);
    Ok(MeasureReport { rows, declared_total, filled_total, global_ratio, bound, pass: global_ratio <= bound })
}

/// Samples up to `budget` pairs of edge-graph nodes (from at most 16
/// sources, seeded) and compares oracle, skeleton and edge-graph distances.
pub fn verify_isometry<T: Scalar>(
    x: &TriangulatedMetricSurface<T>,
    approx: &SurfaceApproximation<T>,
    budget: usize,
    seed: u64,
) -> IsometryCertificate<T> {
    let eg = x.edge_graph();
    let n = eg.graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = sample(&mut rng, n, n.min(MAX_SOURCES)).into_vec();
    let per_source = budget.div_ceil(sources.len().max(1)).min(n.saturating_sub(1));
    let tol = T::check_tol() * x.measured_mesh().max(T::one());
    let oracle = x.oracle();

    let mut pairs = Vec::new();
    for &s in &sources {
        if pairs.len() >= budget {
            break;
        }
        let targets: Vec<usize> = sample(&mut rng, n, (per_source + 1).min(n))
            .into_iter()
            .filter(|&t| t != s)
            .take(per_source)
            .collect();
        let dg = eg.graph.distances_from(s);
        let radius = targets.iter().map(|&t| dg[t]).fold(T::zero(), T::max) + tol;
        let dn = approx
            .complex
            .skeleton
            .dijkstra_within(&[(approx.correspondence[s], T::zero())], radius);
        for t in targets {
            if pairs.len() >= budget {
                break;
            }
            pairs.push(SampledPair {
                a: s,
                b: t,
                d_lower: oracle.map(|o| o.distance(eg.representative[s], eg.representative[t])),
                d_n: dn[approx.correspondence[t]],
                d_graph_upper: dg[t],
            });
        }
    }

    let distortion = pairs.iter().map(|p| p.d_graph_upper - p.d_n).fold(T::zero(), T::max);
    let shortcut = oracle.map(|_| {
        pairs
            .iter()
            .map(|p| p.d_lower.unwrap() - p.d_n)
            .fold(T::neg_infinity(), T::max)
    });
    let eps_estimate = match oracle {
        Some(_) => pairs
            .iter()
            .map(|p| p.d_graph_upper - p.d_lower.unwrap())
            .fold(T::zero(), T::max),
        None => distortion,
    };
    let upper_ok = pairs.iter().all(|p| p.d_n <= p.d_graph_upper + tol);
    let lower_ok = shortcut.map(|s| s <= tol);
    let measure = measure_report(x, approx).ok();
    let measure_ok = measure.as_ref().map(|m| m.pass);
    let pass = upper_ok && lower_ok != Some(false) && measure_ok != Some(false);
    IsometryCertificate {
        eps: approx.eps,
        eps_estimate,
        distortion,
        shortcut,
        seed,
        pairs,
        measure,
        upper_ok,
        lower_ok,
        measure_ok,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{euclidean_patch, TriangulatedMetricSurface};

    #[test]
    fn square_patch_sandwich() {
        let x = euclidean_patch::<f64>(1, 16).unwrap();
        let a = approximate_surface(&x, 0.2).unwrap();
        assert!(a.complex.validate().is_empty());
        assert_eq!(a.complex.euler_characteristic(), 1);
        assert_eq!(a.complex.boundary_cycles(), Some(1));
        let total: f64 = a.part_areas.iter().sum();
        assert!((a.complex.area() - total).abs() <= 1e-9 * total);
        let c = verify_isometry(&x, &a, 500, 7);
        assert_eq!(c.pairs.len(), 500);
        assert!(c.pass, "{:?}", (c.distortion, c.shortcut, c.measure_ok));
        for p in &c.pairs {
            assert!(p.d_lower.unwrap() <= p.d_n + 1e-9 && p.d_n <= p.d_graph_upper + 1e-9);
        }
    }

    #[test]
    fn single_triangle_is_its_filling() {
        let x = euclidean_patch::<f64>(1, 16).unwrap();
        let one = TriangulatedMetricSurface::new(vec![x.triangles()[0].clone()], vec![]).unwrap();
        let a = approximate_surface(&one, 0.2).unwrap();
        let f = fill_triangle(&one.triangles()[0], 0.2).unwrap();
        assert_eq!(a.complex, f.complex);
    }

    #[test]
    fn missing_area() {
        let x = euclidean_patch::<f64>(1, 16).unwrap();
        let t = x.triangles()[0].clone().with_declared_area(None);
        let one = TriangulatedMetricSurface::new(vec![t], vec![]).unwrap();
        let a = approximate_surface(&one, 0.2).unwrap();
        assert_eq!(measure_report(&one, &a), Err(SurfaceError::MissingArea(0)));
    }
}
