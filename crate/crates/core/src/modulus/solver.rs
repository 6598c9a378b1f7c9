use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Family, ModulusError, ModulusProblem, ModulusResult};
use crate::complex::MetricGraph;
use crate::scalar::Scalar;

/// Tolerance of the quadratic subproblem.
pub const QP_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 20_000;
/// Copies of the graph on each side in the cyclic cover.
const COVER_SHEETS: i32 = 2;

struct Item<T> {
    dist: T,
    state: usize,
}

impl<T: Scalar> PartialEq for Item<T> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Item<T> {}

impl<T: Scalar> Ord for Item<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        crate::scalar::cmp(&o.dist, &self.dist).then_with(|| o.state.cmp(&self.state))
    }
}

impl<T: Scalar> PartialOrd for Item<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Dijkstra over `states` states with neighbours produced by `step`.
/// Returns distances and, per state, the `(previous state, edge)` used.
fn search<T: Scalar>(
    states: usize,
    sources: &[usize],
    mut step: impl FnMut(usize, &mut Vec<(usize, usize, T)>),
) -> (Vec<T>, Vec<Option<(usize, usize)>>) {
    let mut dist = vec![T::infinity(); states];
    let mut pred = vec![None; states];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = T::zero();
        heap.push(Item { dist: T::zero(), state: s });
    }
    let mut out = Vec::new();
    while let Some(Item { dist: d, state: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        out.clear();
        step(u, &mut out);
        for &(v, e, c) in &out {
            let nd = d + c;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some((u, e));
                heap.push(Item { dist: nd, state: v });
            }
        }
    }
    (dist, pred)
}

fn walk_back(pred: &[Option<(usize, usize)>], mut s: usize) -> Vec<usize> {
    let mut edges = Vec::new();
    while let Some((u, e)) = pred[s] {
        edges.push(e);
        s = u;
    }
    edges.reverse();
    edges
}

/// Shortest `rho`-length member of the family, if the family is nonempty.
fn shortest_member<T: Scalar>(
    graph: &MetricGraph<T>,
    cost: &[T],
    family: &Family,
) -> Option<(T, Vec<usize>)> {
    let n = graph.node_count();
    match family {
        Family::Connect { from, to } => {
            let (dist, pred) = search(n, from, |u, out| {
                for &(v, e) in graph.neighbors(u) {
                    out.push((v, e, cost[e]));
                }
            });
            let target = to
                .iter()
                .copied()
                .filter(|&t| dist[t].is_finite())
                .min_by(|&a, &b| crate::scalar::cmp(&dist[a], &dist[b]).then(a.cmp(&b)))?;
            Some((dist[target], walk_back(&pred, target)))
        }
        Family::Separate { from, to, winding, cut } => {
            let mut blocked = vec![false; n];
            for &v in from.iter().chain(to) {
                blocked[v] = true;
            }
            let sheets = (2 * COVER_SHEETS + 1) as usize;
            let lift = |v: usize, k: i32| v * sheets + (k + COVER_SHEETS) as usize;
            let mut best: Option<(T, Vec<usize>)> = None;
            for &c in cut.iter().filter(|&&c| !blocked[c]) {
                let (dist, pred) = search(n * sheets, &[lift(c, 0)], |s, out| {
                    let (u, k) = (s / sheets, (s % sheets) as i32 - COVER_SHEETS);
                    for &(v, e) in graph.neighbors(u) {
                        if blocked[v] {
                            continue;
                        }
                        let w = i32::from(winding[e]);
                        let k2 = if graph.edge(e).a == u { k + w } else { k - w };
                        if k2.abs() <= COVER_SHEETS {
                            out.push((lift(v, k2), e, cost[e]));
                        }
                    }
                });
                let d = dist[lift(c, 1)];
                if d.is_finite() && best.as_ref().map_or(true, |b| d < b.0) {
                    best = Some((d, walk_back(&pred, lift(c, 1))));
                }
            }
            best
        }
    }
}

/// Dual coordinate ascent for `min sum w rho^2` subject to
/// `sum_{e in path} len(e) rho(e) >= 1` over the constraint paths.
struct Qp<T> {
    paths: Vec<Vec<usize>>,
    norms: Vec<T>,
    mu: Vec<T>,
    rho: Vec<T>,
}

impl<T: Scalar> Qp<T> {
    fn add(&mut self, path: Vec<usize>, lens: &[T], weights: &[T]) {
        self.norms.push(path.iter().map(|&e| lens[e] * lens[e] / weights[e]).sum());
        self.paths.push(path);
        self.mu.push(T::zero());
    }

    fn solve(&mut self, lens: &[T], weights: &[T], tol: T) -> usize {
        for sweep in 1..=MAX_SWEEPS {
            let mut worst = T::zero();
            for k in 0..self.paths.len() {
                let path = &self.paths[k];
                let gap = T::one() - path.iter().map(|&e| lens[e] * self.rho[e]).sum::<T>();
                let viol = if self.mu[k] > T::zero() { gap.abs() } else { gap.max(T::zero()) };
                worst = worst.max(viol);
                let next = (self.mu[k] + gap / self.norms[k]).max(T::zero());
                let d = next - self.mu[k];
                if d != T::zero() {
                    self.mu[k] = next;
                    for &e in path {
                        self.rho[e] = self.rho[e] + d * lens[e] / weights[e];
                    }
                }
            }
            if worst <= tol {
                return sweep;
            }
        }
        MAX_SWEEPS
    }
}

/// Solves a modulus problem by constraint generation: the shortest member
/// of the family under the current density is added as a constraint and
/// the quadratic subproblem re-solved, until every member has `rho`-length
/// at least `1 - tol`.
pub fn discrete_modulus<T: Scalar>(p: &ModulusProblem<T>) -> Result<ModulusResult<T>, ModulusError> {
    p.validate()?;
    let g = &p.graph;
    let lens: Vec<T> = g.edges().iter().map(|e| e.len).collect();
    let budget = 10 * g.edge_count();
    let qp_tol = (p.tol * T::lit(0.1)).min(T::lit(QP_TOL)).max(T::epsilon() * T::lit(16.0));
    let mut qp = Qp { paths: Vec::new(), norms: Vec::new(), mu: Vec::new(), rho: vec![T::zero(); g.edge_count()] };
    let mut iterations = 0;
    let mut min_length;
    loop {
        let cost: Vec<T> = lens.iter().zip(&qp.rho).map(|(&l, &r)| l * r.max(T::zero())).collect();
        let Some((len, path)) = shortest_member(g, &cost, &p.family) else {
            if qp.paths.is_empty() {
                return Ok(ModulusResult {
                    value: T::zero(),
                    density: Vec::new(),
                    active_paths: Vec::new(),
                    min_length: T::infinity(),
                    lower: T::zero(),
                    upper: T::zero(),
                    duality_gap: T::zero(),
                    iterations: 0,
                    weight_rule: p.weight_rule,
                });
            }
            return Err(ModulusError::InvalidInput("family vanished during the solve".into()));
        };
        min_length = len;
        if len >= T::one() - p.tol || iterations >= budget {
            break;
        }
        if !qp.paths.contains(&path) {
            qp.add(path, &lens, &p.weights);
        }
        qp.solve(&lens, &p.weights, qp_tol);
        iterations += 1;
    }

    for r in &mut qp.rho {
        *r = r.max(T::zero());
    }
    let value: T = qp.rho.iter().zip(&p.weights).map(|(&r, &w)| r * r * w).sum();
    let dual = T::lit(2.0) * qp.mu.iter().copied().sum::<T>() - value;
    let lower = dual.max(T::zero());
    let scale = min_length.min(T::one());
    let upper = if scale > T::zero() { value / (scale * scale) } else { T::infinity() };
    if min_length < T::one() - p.tol {
        return Err(ModulusError::Unconverged {
            iterations,
            lower: lower.to_f64_lossy(),
            upper: upper.to_f64_lossy(),
        });
    }
    let active_paths = qp
        .paths
        .iter()
        .zip(&qp.mu)
        .filter(|(_, &m)| m > T::zero())
        .map(|(path, _)| path.clone())
        .collect();
    Ok(ModulusResult {
        value,
        density: qp.rho,
        active_paths,
        min_length,
        lower,
        upper,
        duality_gap: (value - dual).max(T::zero()),
        iterations,
        weight_rule: p.weight_rule,
    })
}

/// [`discrete_modulus`] for a `Connect` family.
pub fn discrete_modulus_connect<T: Scalar>(p: &ModulusProblem<T>) -> Result<ModulusResult<T>, ModulusError> {
    match p.family {
        Family::Connect { .. } => discrete_modulus(p),
        _ => Err(ModulusError::InvalidInput("expected a connect family".into())),
    }
}

/// [`discrete_modulus`] for a `Separate` family.
pub fn discrete_modulus_separate<T: Scalar>(p: &ModulusProblem<T>) -> Result<ModulusResult<T>, ModulusError> {
    match p.family {
        Family::Separate { .. } => discrete_modulus(p),
        _ => Err(ModulusError::InvalidInput("expected a separate family".into())),
    }
}
