use super::{Family, ModulusProblem, WeightRule};
use crate::complex::MetricGraph;
use crate::scalar::Scalar;

/// A path with the given edge lengths; returns the graph and its two ends.
pub fn path_graph<T: Scalar>(lens: &[T]) -> (MetricGraph<T>, usize, usize) {
    let mut g = MetricGraph::with_nodes(lens.len() + 1);
    for (i, &l) in lens.iter().enumerate() {
        g.add_edge(i, i + 1, l).expect("positive length");
    }
    (g, 0, lens.len())
}

/// Node-disjoint paths of the given total lengths, each split in two
/// edges; returns the graph and the start and end nodes.
pub fn disjoint_paths<T: Scalar>(lens: &[T]) -> (MetricGraph<T>, Vec<usize>, Vec<usize>) {
    let mut g = MetricGraph::with_nodes(3 * lens.len());
    let (mut from, mut to) = (Vec::new(), Vec::new());
    for (k, &l) in lens.iter().enumerate() {
        let half = l / T::lit(2.0);
        g.add_edge(3 * k, 3 * k + 1, half).expect("positive length");
        g.add_edge(3 * k + 1, 3 * k + 2, l - half).expect("positive length");
        from.push(3 * k);
        to.push(3 * k + 2);
    }
    (g, from, to)
}

/// Width of the strip around grid line `i` of `n + 1` lines at spacing
/// `h`: half a step on the two outer lines.
fn strip<T: Scalar>(i: usize, n: usize, h: T) -> T {
    if i == 0 || i == n {
        h / T::lit(2.0)
    } else {
        h
    }
}

/// The `n x n` grid on the unit square joining its left side to its right
/// side, with strip-area weights.
pub fn unit_square_grid<T: Scalar>(n: usize, tol: T) -> ModulusProblem<T> {
    let h = T::one() / T::from_usize_lossy(n);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut g = MetricGraph::with_nodes((n + 1) * (n + 1));
    let mut weights = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            if i < n {
                g.add_edge(id(i, j), id(i + 1, j), h).expect("positive length");
                weights.push(h * strip(j, n, h));
            }
            if j < n {
                g.add_edge(id(i, j), id(i, j + 1), h).expect("positive length");
                weights.push(h * strip(i, n, h));
            }
        }
    }
    let from = (0..=n).map(|j| id(0, j)).collect();
    let to = (0..=n).map(|j| id(n, j)).collect();
    ModulusProblem {
        graph: g,
        weights,
        weight_rule: WeightRule::Strip,
        family: Family::Connect { from, to },
        tol,
    }
}

/// The round annulus `1 <= |z| <= radius` on a log-polar grid, set up for
/// the family of cycles separating the two boundary circles. Between the
/// boundary circles sit `rings` circles of `sectors` nodes, one at the
/// log-midpoint of each of `rings` equal log-steps, and each carrying the
/// full strip of its step.
pub fn round_annulus<T: Scalar>(radius: T, rings: usize, sectors: usize, tol: T) -> ModulusProblem<T> {
    let step = |k: usize| radius.powf(T::from_usize_lossy(k) / T::from_usize_lossy(rings));
    let mid = |k: usize| radius.powf((T::from_usize_lossy(k) + T::lit(0.5)) / T::from_usize_lossy(rings));
    let mut r = vec![T::one()];
    r.extend((0..rings).map(mid));
    r.push(radius);
    let last = rings + 1;
    let dtheta = T::TAU() / T::from_usize_lossy(sectors);
    let id = |i: usize, j: usize| i * sectors + j;
    let mut g = MetricGraph::with_nodes((last + 1) * sectors);
    let (mut weights, mut winding) = (Vec::new(), Vec::new());
    for i in 0..=last {
        let h = match i {
            0 => (r[1] - r[0]) / T::lit(2.0),
            _ if i == last => (r[last] - r[last - 1]) / T::lit(2.0),
            _ => step(i) - step(i - 1),
        };
        for j in 0..sectors {
            let len = r[i] * dtheta;
            g.add_edge(id(i, j), id(i, (j + 1) % sectors), len).expect("positive length");
            weights.push(len * h);
            winding.push(i8::from(j + 1 == sectors));
            if i < last {
                let len = r[i + 1] - r[i];
                g.add_edge(id(i, j), id(i + 1, j), len).expect("positive length");
                weights.push(len * (r[i] + r[i + 1]) / T::lit(2.0) * dtheta);
                winding.push(0);
            }
        }
    }
    ModulusProblem {
        graph: g,
        weights,
        weight_rule: WeightRule::Strip,
        family: Family::Separate {
            from: (0..sectors).map(|j| id(0, j)).collect(),
            to: (0..sectors).map(|j| id(last, j)).collect(),
            winding,
            cut: (0..=last).map(|i| id(i, 0)).collect(),
        },
        tol,
    }
}
