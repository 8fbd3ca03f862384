//! Free-energy-minimizing source-target flows.
//!
//! For `phi(x) = x` the optimum is obtained in one factorization
//! ([`solve_linear_flow`]); for `phi(x) = x^p` with `p != 1` the arc costs
//! `r_ij phi'(x_ij)` depend on the flow and [`solve_power_flow`] iterates to a
//! fixed point.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Graph, ProblemSpec};

mod functionals;
mod power;
pub(crate) mod system;

pub use functionals::{evaluate_functionals, verify_min_free_energy_identity, FunctionalValues};
pub use power::{solve_power_flow, FixedPointOptions, PowerSolution};
pub use system::{MIN_SURVIVAL, SAFE_EXPONENT_SCALE};

use system::TargetSystem;

/// Expected transition counts of a flow sent from `s` and absorbed at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    x: DMatrix<f64>,
    s: usize,
    t: usize,
    value: f64,
    row_sums: DVector<f64>,
    col_sums: DVector<f64>,
    total_time: f64,
}

impl Flow {
    pub fn new(x: DMatrix<f64>, s: usize, t: usize, value: f64) -> Self {
        let n = x.nrows();
        let row_sums = DVector::from_fn(n, |i, _| x.row(i).iter().sum());
        let col_sums = DVector::from_fn(n, |j, _| x.column(j).iter().sum());
        let total_time = row_sums.iter().sum();
        Flow {
            x,
            s,
            t,
            value,
            row_sums,
            col_sums,
            total_time,
        }
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[(i, j)]
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// `x_i.`
    pub fn row_sums(&self) -> &DVector<f64> {
        &self.row_sums
    }

    /// `x_.i`
    pub fn col_sums(&self) -> &DVector<f64> {
        &self.col_sums
    }

    /// `x_..`, the expected number of transitions.
    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    /// `max_i |x_i. - x_.i - v (delta_is - delta_it)|`.
    pub fn conservation_residual(&self) -> f64 {
        (0..self.n())
            .map(|i| {
                let expected = if i == self.s {
                    self.value
                } else if i == self.t {
                    -self.value
                } else {
                    0.0
                };
                (self.row_sums[i] - self.col_sums[i] - expected).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of positivity, absorption at `t` and the support
    /// of `W`, together with conservation.
    pub fn admissibility_residual(&self, graph: &Graph) -> f64 {
        let mut worst = self.conservation_residual();
        for i in 0..self.n() {
            for j in 0..self.n() {
                let x = self.x[(i, j)];
                worst = worst.max(-x);
                if i == self.t || !graph.has_edge(i, j) {
                    worst = worst.max(x.abs());
                }
            }
        }
        worst
    }
}

/// By-products of a solve. Vectors of length `n - 1` are indexed by
/// [`SolverDiagnostics::nodes`] (all nodes except the target).
#[derive(Debug, Clone)]
pub struct SolverDiagnostics {
    pub beta: f64,
    pub nodes: Vec<usize>,
    /// `v_ij = w_ij exp(-beta r_ij phi'(x_ij))` over non-target nodes.
    pub v: DMatrix<f64>,
    /// `q_i = v_it`.
    pub q: DVector<f64>,
    /// Survival probabilities; may underflow to 0 at large beta, see `log_z`.
    pub z: DVector<f64>,
    /// `ln z_i`, accurate even when `z_i` underflows.
    pub log_z: DVector<f64>,
    /// One-step killing probabilities `rho_i = 1 - sum_k v_ik`.
    pub rho: DVector<f64>,
    /// Expected visits `m_si` from the source in the killed chain.
    pub m_s_row: DVector<f64>,
    log_m_s_row: DVector<f64>,
    /// Multipliers over all `n` nodes, `lambda_t = 0`.
    pub lambda: DVector<f64>,
    pub free_energy: f64,
    pub energy: f64,
    pub entropy: f64,
    pub total_time: f64,
    source_slot: usize,
}

impl SolverDiagnostics {
    /// `ln z_s`.
    pub fn log_z_source(&self) -> f64 {
        self.log_z[self.source_slot]
    }

    /// Survival probabilities over all nodes, with `z_t = 1`.
    pub fn z_extended(&self, target: usize) -> DVector<f64> {
        let n = self.nodes.len() + 1;
        let mut out = DVector::from_element(n, 1.0);
        for (a, &i) in self.nodes.iter().enumerate() {
            out[i] = self.z[a];
        }
        debug_assert_eq!(out[target], 1.0);
        out
    }

    /// `a_i = x_i. exp(-beta lambda_i) = m_si / z_s`.
    pub fn auxiliary_a(&self) -> DVector<f64> {
        let log_zs = self.log_z_source();
        self.log_m_s_row.map(|lm| (lm - log_zs).exp())
    }

    /// `b_j = exp(beta lambda_j) = z_j`.
    pub fn auxiliary_b(&self) -> DVector<f64> {
        self.log_z.map(f64::exp)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub flow: Flow,
    pub diagnostics: SolverDiagnostics,
}

/// Heated shortest-path flow (`p = 1`), one factorization.
pub fn solve_linear_flow(graph: &Graph, spec: &ProblemSpec) -> Result<Solution> {
    spec.validate(graph)?;
    if spec.p != 1.0 {
        return Err(Error::InvalidExponent {
            p: spec.p,
            reason: "the one-shot solver handles p = 1 only",
        });
    }
    let system = TargetSystem::new(graph, spec.t, spec.beta, graph.r())?;
    assemble(graph, spec, &system)
}

/// Solves with whichever method `spec.p` calls for, using default
/// fixed-point options when `p != 1`.
pub fn solve(graph: &Graph, spec: &ProblemSpec) -> Result<Solution> {
    if spec.p == 1.0 {
        solve_linear_flow(graph, spec)
    } else {
        solve_power_flow(graph, spec, &FixedPointOptions::default()).map(|p| Solution {
            flow: p.flow,
            diagnostics: p.diagnostics,
        })
    }
}

pub(crate) fn assemble(graph: &Graph, spec: &ProblemSpec, system: &TargetSystem) -> Result<Solution> {
    let (x, visits) = system.flow_from(spec.s)?;
    let flow = Flow::new(x, spec.s, spec.t, 1.0);
    let diagnostics = diagnostics_for(graph, spec, system, &visits, &flow)?;
    Ok(Solution { flow, diagnostics })
}

pub(crate) fn diagnostics_for(
    graph: &Graph,
    spec: &ProblemSpec,
    system: &TargetSystem,
    visits: &DVector<f64>,
    flow: &Flow,
) -> Result<SolverDiagnostics> {
    let beta = spec.beta;
    let nodes = system.nodes().to_vec();
    let m = nodes.len();
    let w = graph.w();
    let costs = system.costs();
    let kernel = |i: usize, j: usize| {
        if graph.has_edge(i, j) {
            w[(i, j)] * (-beta * costs[(i, j)]).exp()
        } else {
            0.0
        }
    };
    let v = DMatrix::from_fn(m, m, |a, b| kernel(nodes[a], nodes[b]));
    let q = DVector::from_fn(m, |a, _| kernel(nodes[a], spec.t));
    let rho = DVector::from_fn(m, |a, _| {
        let i = nodes[a];
        graph
            .successors(i)
            .map(|j| w[(i, j)] * -(-beta * costs[(i, j)]).exp_m1())
            .sum::<f64>()
    });
    let log_z = DVector::from_fn(m, |a, _| system.ln_z(a));
    let z = log_z.map(f64::exp);
    let shift = system.shift();
    let source_slot = system.slot(spec.s).expect("source is not the target");
    let log_m_s_row = DVector::from_fn(m, |a, _| {
        visits[a].ln() + beta * (shift[nodes[a]] - shift[spec.s])
    });
    let m_s_row = log_m_s_row.map(f64::exp);
    let lambda = system.multipliers()?;
    let values = functionals::functionals_unchecked(graph, spec, flow);
    Ok(SolverDiagnostics {
        beta,
        nodes,
        v,
        q,
        z,
        log_z,
        rho,
        m_s_row,
        log_m_s_row,
        lambda,
        free_energy: values.free_energy,
        energy: values.energy,
        entropy: values.entropy,
        total_time: flow.total_time(),
        source_slot,
    })
}

/// Flow of value `v` obtained by scaling every entry (for a unit flow the
/// result has value exactly `v`).
pub fn scale_flow(flow: &Flow, v: f64) -> Flow {
    Flow::new(flow.x() * v, flow.s(), flow.t(), flow.value() * v)
}

/// `alpha X + (1 - alpha) Y` for flows sharing endpoints and value.
pub fn mix_flows(x: &Flow, y: &Flow, alpha: f64) -> Result<Flow> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidMixture(alpha));
    }
    if x.s() != y.s()
        || x.t() != y.t()
        || x.n() != y.n()
        || (x.value() - y.value()).abs() > 1e-12 * x.value().abs().max(1.0)
    {
        return Err(Error::IncompatibleEndpoints);
    }
    let mixed = x.x() * alpha + y.x() * (1.0 - alpha);
    Ok(Flow::new(mixed, x.s(), x.t(), x.value()))
}
