use serde::{Deserialize, Serialize};

use super::build::{FilledTriangle, MARKERS};
use super::{FillError, AREA_CONSTANT, DIAMETER_CONSTANT};
use crate::scalar::Scalar;
use crate::triangle::{DiscreteMetricTriangle, EdgeLabel};

/// Result of checking a filling against its four properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FillingReport<T> {
    pub diameter_upper: T,
    pub diameter_ratio: T,
    pub diameter_ok: bool,
    pub area: T,
    /// Area the ratio is taken against.
    pub reference_area: T,
    /// False when the triangle carries no declared area and the reference is
    /// `pi/64` times the embedded area.
    pub area_declared: bool,
    pub area_ratio: T,
    pub area_ok: bool,
    /// Largest error of a marker length or a same-edge distance.
    pub marker_error: T,
    pub markers_ok: bool,
    /// Largest `d(x, y) - d_S(x, y)` over boundary sample pairs.
    pub distance_deficit: T,
    pub distance_pairs: usize,
    pub distance_ok: bool,
    pub euler_characteristic: i64,
    pub boundary_cycles: Option<usize>,
    pub diagnostics: usize,
    pub structure_ok: bool,
    pub pass: bool,
}

const EXACT_TOL: f64 = 1e-9;

/// Checks diameter, area, boundary isometry and the no-shortcut property of
/// a filling, plus its disk structure.
pub fn verify_filling<T: Scalar>(
    tri: &DiscreteMetricTriangle<T>,
    filled: &FilledTriangle<T>,
) -> Result<FillingReport<T>, FillError> {
    let c = &filled.complex;
    let diam = tri.diameter();
    let bound = c.diameter_bound()?;
    let diameter_ratio = bound.upper / diam;

    let area = c.area();
    let (reference_area, area_declared) = match tri.declared_area() {
        Some(a) => (a, true),
        None => (T::PI() / T::lit(64.0) * filled.accounting.omega_area, false),
    };
    let area_ratio = area / reference_area;

    let tol = T::lit(EXACT_TOL);
    let mut marker_error = T::zero();
    for (j, e) in EdgeLabel::ALL.iter().enumerate() {
        let path = c.marker_path(MARKERS[j])?;
        let s = tri.edges().get(*e);
        let ids = tri.edge_ids(*e);
        let mut at = 0;
        for (k, &i) in ids.iter().enumerate() {
            let node = filled.sample_nodes[i];
            let pos = path.nodes[at..]
                .iter()
                .position(|&v| v == node)
                .ok_or_else(|| FillError::InvalidInput(format!("sample {i} is off marker {}", MARKERS[j])))?;
            at += pos;
            marker_error = marker_error.max((path.arclength[at] - s[k]).abs());
        }
        marker_error = marker_error.max((path.length() - tri.edge_length(*e)).abs());
    }

    let n = tri.len();
    let mut deficit = T::zero();
    for i in 0..n {
        let radius = (0..n).map(|j| tri.dist(i, j)).fold(T::zero(), T::max) + tol;
        let field = c.skeleton.dijkstra_within(&[(filled.sample_nodes[i], T::zero())], radius);
        for j in 0..n {
            let ds = field[filled.sample_nodes[j]];
            deficit = deficit.max(tri.dist(i, j) - ds);
            if tri.locate(i).map(|x| x.0) == tri.locate(j).map(|x| x.0) && i != j {
                let (_, si) = tri.locate(i).unwrap();
                let (_, sj) = tri.locate(j).unwrap();
                marker_error = marker_error.max((ds - (si - sj).abs()).abs());
            }
        }
    }

    let diagnostics = c.validate().len();
    let euler = c.euler_characteristic();
    let cycles = c.boundary_cycles();
    let structure_ok = diagnostics == 0 && euler == 1 && cycles == Some(1);
    let diameter_ok = diameter_ratio <= T::lit(DIAMETER_CONSTANT);
    let area_ok = area_ratio <= T::lit(AREA_CONSTANT);
    let markers_ok = marker_error <= tol;
    let distance_ok = deficit <= tol;
    Ok(FillingReport {
        diameter_upper: bound.upper,
        diameter_ratio,
        diameter_ok,
        area,
        reference_area,
        area_declared,
        area_ratio,
        area_ok,
        marker_error,
        markers_ok,
        distance_deficit: deficit,
        distance_pairs: n * n,
        distance_ok,
        euler_characteristic: euler,
        boundary_cycles: cycles,
        diagnostics,
        structure_ok,
        pass: structure_ok && diameter_ok && area_ok && markers_ok && distance_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filling::fill_triangle;
    use crate::triangle::AmbientMetric;

    #[test]
    fn euclidean_filling_passes() {
        let h = 3f64.sqrt() / 2.0;
        let t = DiscreteMetricTriangle::from_ambient(
            &AmbientMetric::Euclidean,
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]],
            16,
        )
        .unwrap()
        .0
        .with_declared_area(Some(3f64.sqrt() / 4.0));
        let f = fill_triangle(&t, 1.0).unwrap();
        let r = verify_filling(&t, &f).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.area_declared);
    }
}
