//! Discrete 2-modulus of path and cycle families on metric graphs.
//!
//! A density `rho` assigns a value to every edge; the `rho`-length of a path
//! is `sum rho(e) len(e)` and the energy is `sum rho(e)^2 w(e)` for an area
//! element `w`. The modulus of a family is the least energy of a density
//! giving every member `rho`-length at least 1.

mod fixtures;
mod probe;
mod solver;

pub use fixtures::{disjoint_paths, path_graph, round_annulus, unit_square_grid};
pub use probe::{
    boundary_ball, effective_conductance, face_area_weights, modulus_boundedness_probe, ProbeLevel,
    ProbeReport, ProbeRow,
};
pub use solver::{discrete_modulus, discrete_modulus_connect, discrete_modulus_separate, QP_TOL};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::MetricGraph;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModulusError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no convergence after {iterations} iterations; modulus lies in [{lower}, {upper}]")]
    Unconverged { iterations: usize, lower: f64, upper: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// How edge weights stand for area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// `w(e) = len(e)`: one-dimensional energy.
    Length,
    /// `w(e) = len(e) * h` with `h` the transverse width of the edge's strip.
    Strip,
    /// Face areas shared out to their sides in proportion to length.
    FaceArea,
    Custom,
}

/// The curve family whose modulus is sought.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// Paths joining a node of `from` to a node of `to`.
    Connect { from: Vec<usize>, to: Vec<usize> },
    /// Cycles winding once around an annulus, avoiding `from` and `to`.
    /// `winding[e]` is the number of times edge `e` (walked from `a` to
    /// `b`) crosses a fixed cut from one boundary to the other, and `cut`
    /// lists the nodes on that cut.
    Separate {
        from: Vec<usize>,
        to: Vec<usize>,
        winding: Vec<i8>,
        cut: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ModulusProblem<T> {
    pub graph: MetricGraph<T>,
    pub weights: Vec<T>,
    pub weight_rule: WeightRule,
    pub family: Family,
    pub tol: T,
}

impl<T: Scalar> ModulusProblem<T> {
    /// Connect problem with `w(e) = len(e)`.
    pub fn connect(graph: MetricGraph<T>, from: Vec<usize>, to: Vec<usize>, tol: T) -> Self {
        let weights = graph.edges().iter().map(|e| e.len).collect();
        ModulusProblem {
            graph,
            weights,
            weight_rule: WeightRule::Length,
            family: Family::Connect { from, to },
            tol,
        }
    }

    pub fn with_weights(mut self, weights: Vec<T>, rule: WeightRule) -> Self {
        self.weights = weights;
        self.weight_rule = rule;
        self
    }

    fn validate(&self) -> Result<(), ModulusError> {
        let n = self.graph.node_count();
        if self.weights.len() != self.graph.edge_count() {
            return Err(ModulusError::InvalidInput(format!(
                "{} weights for {} edges",
                self.weights.len(),
                self.graph.edge_count()
            )));
        }
        if self.weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(ModulusError::InvalidInput("weights must be positive".into()));
        }
        if !(self.tol > T::zero()) {
            return Err(ModulusError::InvalidInput("tolerance must be positive".into()));
        }
        let (from, to) = match &self.family {
            Family::Connect { from, to } => (from, to),
            Family::Separate { from, to, winding, .. } => {
                if winding.len() != self.graph.edge_count() {
                    return Err(ModulusError::InvalidInput("one winding number per edge".into()));
                }
                (from, to)
            }
        };
        if from.is_empty() || to.is_empty() {
            return Err(ModulusError::InvalidInput("node sets must be nonempty".into()));
        }
        if from.iter().chain(to).any(|&v| v >= n) {
            return Err(ModulusError::InvalidInput("node out of range".into()));
        }
        if from.iter().any(|v| to.contains(v)) {
            return Err(ModulusError::InvalidInput("node sets must be disjoint".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ModulusResult<T> {
    /// Energy of the returned density.
    pub value: T,
    pub density: Vec<T>,
    /// Constraint paths (edge lists) with positive multiplier.
    pub active_paths: Vec<Vec<usize>>,
    /// Shortest `rho`-length over the whole family at the end.
    pub min_length: T,
    /// Certified bracket on the discrete modulus.
    pub lower: T,
    pub upper: T,
    pub duality_gap: T,
    pub iterations: usize,
    pub weight_rule: WeightRule,
}
