use nalgebra::DMatrix;

use super::system::TargetSystem;
use super::{diagnostics_for, Flow, SolverDiagnostics};
use crate::error::{Error, Result};
use crate::graph::{Graph, ProblemSpec};

/// Flows below this are clamped before evaluating `phi'` when `p < 1`.
const SUB_UNIT_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    /// Starting (and maximal) damping factor.
    pub initial_damping: f64,
    /// Max-norm fixed-point residual at which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            initial_damping: 0.5,
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PowerSolution {
    pub flow: Flow,
    pub diagnostics: SolverDiagnostics,
    pub iterations: usize,
    /// `max |S(X) - X|` at the returned flow.
    pub residual: f64,
}

/// Arc costs `r_ij phi'(x_ij)` with `phi(x) = x^p`.
fn marginal_costs(graph: &Graph, p: f64, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut costs = graph.r().clone();
    if p == 1.0 {
        return costs;
    }
    for (i, j) in graph.edges() {
        let flow = if p < 1.0 {
            x[(i, j)].max(SUB_UNIT_CLAMP)
        } else {
            x[(i, j)].max(0.0)
        };
        costs[(i, j)] *= p * flow.powf(p - 1.0);
    }
    costs
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Flow minimizing `sum r_ij x_ij^p + T G(X)`.
///
/// Damped iteration `X <- (1 - eta) X + eta S(X)`, where `S` solves the
/// linear problem with costs frozen at `r phi'(X)`, starting from the random
/// walk. `eta` is halved whenever the residual grows and relaxed back
/// towards `initial_damping` otherwise.
pub fn solve_power_flow(graph: &Graph, spec: &ProblemSpec, opts: &FixedPointOptions) -> Result<PowerSolution> {
    spec.validate(graph)?;
    let (s, t, beta) = (spec.s, spec.t, spec.beta);
    let start = TargetSystem::new(graph, t, 0.0, graph.r())?;
    let mut x = start.flow_from(s)?.0;
    let mut eta = opts.initial_damping;
    let mut previous = f64::INFINITY;
    let mut residual = f64::INFINITY;

    for iteration in 1..=opts.max_iterations {
        let system = TargetSystem::new(graph, t, beta, &marginal_costs(graph, spec.p, &x))?;
        let (next, visits) = system.flow_from(s)?;
        residual = max_abs_diff(&next, &x);
        if residual < opts.tolerance {
            // Keep whichever of X and S(X) is closer to being a fixed point.
            let follow_up = TargetSystem::new(graph, t, beta, &marginal_costs(graph, spec.p, &next))?;
            let (after, after_visits) = follow_up.flow_from(s)?;
            let next_residual = max_abs_diff(&after, &next);
            let (flow, system, visits, residual) = if next_residual <= residual {
                (next, follow_up, after_visits, next_residual)
            } else {
                (x, system, visits, residual)
            };
            let flow = Flow::new(flow, s, t, 1.0);
            let diagnostics = diagnostics_for(graph, spec, &system, &visits, &flow)?;
            return Ok(PowerSolution {
                flow,
                diagnostics,
                iterations: iteration,
                residual,
            });
        }
        if residual > previous {
            eta *= 0.5;
        } else {
            eta = (eta * 1.05).min(opts.initial_damping);
        }
        previous = residual;
        x = x * (1.0 - eta) + next * eta;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generators, simple_symmetric_graph};
    use crate::solver::{solve_linear_flow, verify_min_free_energy_identity};
    use approx::assert_relative_eq;

    fn triangle() -> Graph {
        simple_symmetric_graph(&DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 })).unwrap()
    }

    #[test]
    fn parallel_resistors_split_two_to_one() {
        let g = triangle();
        let spec = ProblemSpec::new(0, 2, 50.0).with_exponent(2.0);
        let sol = solve_power_flow(&g, &spec, &FixedPointOptions::default()).unwrap();
        assert!(sol.iterations <= 10_000);
        assert_relative_eq!(sol.flow.get(0, 2), 2.0 / 3.0, epsilon = 1e-6);
        assert_relative_eq!(sol.flow.get(0, 1), 1.0 / 3.0, epsilon = 1e-6);
        assert_relative_eq!(sol.flow.get(1, 2), 1.0 / 3.0, epsilon = 1e-6);
        assert!(sol.flow.conservation_residual() < 1e-10);
    }

    #[test]
    fn returned_flow_is_a_fixed_point() {
        let g = generators::graph_b();
        let spec = ProblemSpec::new(2, 6, 3.0).with_exponent(2.0);
        let opts = FixedPointOptions::default();
        let sol = solve_power_flow(&g, &spec, &opts).unwrap();
        let again = TargetSystem::new(&g, 6, 3.0, &marginal_costs(&g, 2.0, sol.flow.x()))
            .unwrap()
            .flow_from(2)
            .unwrap()
            .0;
        assert!(max_abs_diff(&again, sol.flow.x()) < opts.tolerance);
        let residual = verify_min_free_energy_identity(&g, &spec, &sol.flow, &sol.diagnostics);
        assert!(residual < 1e-6 * (1.0 + sol.diagnostics.free_energy.abs()));
        let correction: f64 = g.edges().map(|(i, j)| -g.r()[(i, j)] * sol.flow.get(i, j).powi(2)).sum();
        assert!(correction < 0.0);
    }

    #[test]
    fn zero_beta_ignores_the_exponent() {
        let g = generators::path(2).unwrap();
        let spec = ProblemSpec::new(0, 1, 0.0).with_exponent(2.0);
        let power = solve_power_flow(&g, &spec, &FixedPointOptions::default()).unwrap();
        let linear = solve_linear_flow(&g, &ProblemSpec::new(0, 1, 0.0)).unwrap();
        assert_eq!(power.flow.x(), linear.flow.x());
    }

    #[test]
    fn unit_exponent_matches_linear_solver() {
        let g = generators::graph_c();
        let spec = ProblemSpec::new(2, 7, 0.7);
        let power = solve_power_flow(&g, &spec, &FixedPointOptions::default()).unwrap();
        let linear = solve_linear_flow(&g, &spec).unwrap();
        assert!(max_abs_diff(power.flow.x(), linear.flow.x()) < 1e-12);
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let g = generators::graph_b();
        let spec = ProblemSpec::new(2, 6, 50.0).with_exponent(2.0);
        let opts = FixedPointOptions {
            max_iterations: 3,
            ..Default::default()
        };
        assert!(matches!(
            solve_power_flow(&g, &spec, &opts),
            Err(Error::NoConvergence { iterations: 3, .. })
        ));
    }

    #[test]
    fn sub_unit_exponent_needs_opt_in() {
        let g = generators::graph_b();
        let spec = ProblemSpec::new(2, 6, 1.0).with_exponent(0.5);
        assert!(matches!(
            solve_power_flow(&g, &spec, &FixedPointOptions::default()),
            Err(Error::InvalidExponent { .. })
        ));
        let sol = solve_power_flow(&g, &spec.allow_sub_unit_exponent(), &FixedPointOptions::default());
        if let Ok(sol) = sol {
            assert!(sol.flow.conservation_residual() < 1e-10);
        }
    }
}
