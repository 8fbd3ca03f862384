use nalgebra::DVector;

use super::{Flow, SolverDiagnostics};
use crate::error::{Error, Result};
use crate::graph::{Graph, ProblemSpec};

/// Entropy below this counts as zero when the temperature is infinite.
const ZERO_ENTROPY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalValues {
    /// `U = sum r_ij phi(x_ij)`.
    pub energy: f64,
    /// `G = sum x_ij ln(x_ij / (x_i. w_ij))`.
    pub entropy: f64,
    /// `F = U + T G`.
    pub free_energy: f64,
    /// Per-node divergence `K_i(X || W)`; zero on unvisited nodes.
    pub per_node_kl: DVector<f64>,
}

/// Energy, entropy and free energy of an arbitrary flow.
///
/// At `beta = 0` the temperature is infinite: `F = U` when `G` vanishes and
/// `+inf` otherwise.
pub fn evaluate_functionals(graph: &Graph, spec: &ProblemSpec, flow: &Flow) -> Result<FunctionalValues> {
    for i in 0..flow.n() {
        for j in 0..flow.n() {
            if flow.get(i, j) > 0.0 && !graph.has_edge(i, j) {
                return Err(Error::SupportViolation { i, j });
            }
        }
    }
    Ok(functionals_unchecked(graph, spec, flow))
}

pub(crate) fn functionals_unchecked(graph: &Graph, spec: &ProblemSpec, flow: &Flow) -> FunctionalValues {
    let n = flow.n();
    let w = graph.w();
    let r = graph.r();
    let mut energy = 0.0;
    let mut entropy = 0.0;
    let mut per_node_kl = DVector::zeros(n);
    for i in 0..n {
        let out = flow.row_sums()[i];
        let mut node_sum = 0.0;
        for j in graph.successors(i) {
            let x = flow.get(i, j);
            if x > 0.0 {
                energy += r[(i, j)] * phi(spec.p, x);
                node_sum += x * (x / (out * w[(i, j)])).ln();
            }
        }
        entropy += node_sum;
        if out > 0.0 {
            per_node_kl[i] = node_sum / out;
        }
    }
    let free_energy = if spec.beta > 0.0 {
        energy + entropy / spec.beta
    } else if entropy.abs() <= ZERO_ENTROPY * flow.total_time().max(1.0) {
        energy
    } else {
        f64::INFINITY
    };
    FunctionalValues {
        energy,
        entropy,
        free_energy,
        per_node_kl,
    }
}

pub(crate) fn phi(p: f64, x: f64) -> f64 {
    if p == 1.0 {
        x
    } else {
        x.powf(p)
    }
}

/// Residual of the minimum-free-energy identity
/// `F = sum r_ij [phi(x_ij) - phi'(x_ij) x_ij] + lambda_t - lambda_s`.
///
/// With `phi(x) = x^p` the bracket is `(1 - p) x^p`, which vanishes for `p = 1`.
pub fn verify_min_free_energy_identity(
    graph: &Graph,
    spec: &ProblemSpec,
    flow: &Flow,
    diagnostics: &SolverDiagnostics,
) -> f64 {
    let values = functionals_unchecked(graph, spec, flow);
    let correction: f64 = graph
        .edges()
        .map(|(i, j)| graph.r()[(i, j)] * (1.0 - spec.p) * phi(spec.p, flow.get(i, j)))
        .sum();
    let lambda = &diagnostics.lambda;
    (values.free_energy - (correction + lambda[spec.t] - lambda[spec.s])).abs()
}
