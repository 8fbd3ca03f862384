//! Per-target linear system of the killed chain, in potential-shifted form.
//!
//! With `d_i` the least cost from `i` to the target under arc costs `c`, the
//! chain `v_ij = w_ij exp(-beta c_ij)` is replaced by the similar matrix
//! `v~_ij = w_ij exp(-beta (c_ij + d_j - d_i))`. Every exponent is a
//! non-positive reduced cost, so `z~ = (I - V~)^-1 q~` stays of order one for
//! any beta, and flows are recovered from ratios of shifted quantities:
//! `x_ij = m~_si v~_ij z~_j / z~_s`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// `beta * max cost * n` above this leaves reduced costs resolved to worse
/// than about 2e-4 in the exponent.
pub const SAFE_EXPONENT_SCALE: f64 = 1e12;

/// Survival probabilities (shifted) below this are treated as exhausted.
pub const MIN_SURVIVAL: f64 = 1e-300;

pub(crate) struct TargetSystem<'g> {
    graph: &'g Graph,
    target: usize,
    beta: f64,
    /// Reduced index -> node.
    nodes: Vec<usize>,
    /// Node -> reduced index.
    slot: Vec<Option<usize>>,
    costs: DMatrix<f64>,
    shift: Vec<f64>,
    v: DMatrix<f64>,
    q: DVector<f64>,
    lu: LU<f64, Dyn, Dyn>,
    lu_transposed: LU<f64, Dyn, Dyn>,
    z: DVector<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Least cost from every node to `target` (Dijkstra on reversed arcs).
pub(crate) fn costs_to_target(graph: &Graph, costs: &DMatrix<f64>, target: usize) -> Vec<f64> {
    let n = graph.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[target] = 0.0;
    heap.push(Entry(0.0, target));
    while let Some(Entry(d, j)) = heap.pop() {
        if d > dist[j] {
            continue;
        }
        for i in 0..n {
            if graph.has_edge(i, j) {
                let candidate = d + costs[(i, j)];
                if candidate < dist[i] {
                    dist[i] = candidate;
                    heap.push(Entry(candidate, i));
                }
            }
        }
    }
    dist
}

pub(crate) fn check_guard(graph: &Graph, costs: &DMatrix<f64>, beta: f64) -> Result<()> {
    let max_cost = graph.edges().map(|(i, j)| costs[(i, j)]).fold(0.0, f64::max);
    let scale = max_cost * graph.n() as f64;
    if scale > 0.0 && beta * scale >= SAFE_EXPONENT_SCALE {
        return Err(Error::UnderflowGuardTripped {
            beta,
            limit: SAFE_EXPONENT_SCALE / scale,
        });
    }
    Ok(())
}

impl<'g> TargetSystem<'g> {
    /// Builds and factorizes `I - V~` for `target` under arc `costs`
    /// (finite and >= 0 on the support of `W`).
    pub fn new(graph: &'g Graph, target: usize, beta: f64, costs: &DMatrix<f64>) -> Result<Self> {
        check_guard(graph, costs, beta)?;
        let n = graph.n();
        let nodes: Vec<usize> = (0..n).filter(|&i| i != target).collect();
        let mut slot = vec![None; n];
        for (k, &i) in nodes.iter().enumerate() {
            slot[i] = Some(k);
        }
        let shift = if beta > 0.0 {
            costs_to_target(graph, costs, target)
        } else {
            vec![0.0; n]
        };
        let w = graph.w();
        let shifted = |i: usize, j: usize| {
            if w[(i, j)] > 0.0 {
                let reduced = (costs[(i, j)] + shift[j] - shift[i]).max(0.0);
                w[(i, j)] * (-beta * reduced).exp()
            } else {
                0.0
            }
        };
        let m = n - 1;
        let v = DMatrix::from_fn(m, m, |a, b| shifted(nodes[a], nodes[b]));
        let q = DVector::from_fn(m, |a, _| shifted(nodes[a], target));
        let system = DMatrix::identity(m, m) - &v;
        let lu_transposed = system.transpose().lu();
        let lu = system.lu();
        let unreachable = |reason: &str| Error::TargetUnreachableAtBeta {
            beta,
            reason: reason.to_string(),
        };
        let z = lu
            .solve(&q)
            .ok_or_else(|| unreachable("I - V is singular"))?;
        if z.iter().any(|zi| !zi.is_finite() || *zi < MIN_SURVIVAL) {
            return Err(unreachable("survival probability underflow"));
        }
        Ok(TargetSystem {
            graph,
            target,
            beta,
            nodes,
            slot,
            costs: costs.clone(),
            shift,
            v,
            q,
            lu,
            lu_transposed,
            z,
        })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn slot(&self, node: usize) -> Option<usize> {
        self.slot[node]
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn costs(&self) -> &DMatrix<f64> {
        &self.costs
    }

    /// `ln z_i` for reduced index `a`, without forming the (possibly
    /// underflowing) unshifted survival probability.
    pub fn ln_z(&self, a: usize) -> f64 {
        self.z[a].ln() - self.beta * self.shift[self.nodes[a]]
    }

    /// Row `s` of the shifted fundamental matrix, `m~_s.`.
    pub fn visits_from(&self, s: usize) -> Result<DVector<f64>> {
        let a = self.slot[s].ok_or(Error::SameEndpoints(s))?;
        let mut e = DVector::zeros(self.nodes.len());
        e[a] = 1.0;
        self.lu_transposed
            .solve(&e)
            .ok_or_else(|| Error::TargetUnreachableAtBeta {
                beta: self.beta,
                reason: "I - V is singular".into(),
            })
    }

    /// Flow matrix from `s` given its shifted visit row.
    pub fn flow_with_visits(&self, s: usize, visits: &DVector<f64>) -> DMatrix<f64> {
        let n = self.graph.n();
        let t = self.target;
        let zs = self.z[self.slot[s].expect("source differs from target")];
        let mut x = DMatrix::zeros(n, n);
        for (a, &i) in self.nodes.iter().enumerate() {
            let scale = visits[a] / zs;
            if scale == 0.0 {
                continue;
            }
            for (b, &j) in self.nodes.iter().enumerate() {
                let vij = self.v[(a, b)];
                if vij > 0.0 {
                    x[(i, j)] = scale * vij * self.z[b];
                }
            }
            x[(i, t)] = scale * self.q[a];
        }
        x
    }

    pub fn flow_from(&self, s: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let visits = self.visits_from(s)?;
        Ok((self.flow_with_visits(s, &visits), visits))
    }

    /// Expected trip length `x^{st}_..` for every source (NaN at the target):
    /// `(M~ z~)_s / z~_s`.
    pub fn total_times(&self) -> Result<Vec<f64>> {
        let y = self
            .lu
            .solve(&self.z)
            .ok_or_else(|| Error::TargetUnreachableAtBeta {
                beta: self.beta,
                reason: "I - V is singular".into(),
            })?;
        let mut out = vec![f64::NAN; self.graph.n()];
        for (a, &i) in self.nodes.iter().enumerate() {
            out[i] = y[a] / self.z[a];
        }
        Ok(out)
    }

    /// Lagrange multipliers gauged by `lambda_t = 0`.
    ///
    /// For `beta > 0` this is `T ln z_i`. At `beta = 0` it is the limit
    /// `-h_i`, with `h` the expected accumulated cost to the target.
    pub fn multipliers(&self) -> Result<DVector<f64>> {
        let n = self.graph.n();
        let mut lambda = DVector::zeros(n);
        if self.beta > 0.0 {
            let temperature = 1.0 / self.beta;
            for (a, &i) in self.nodes.iter().enumerate() {
                lambda[i] = temperature * self.z[a].ln() - self.shift[i];
            }
        } else {
            let w = self.graph.w();
            let step_cost = DVector::from_fn(self.nodes.len(), |a, _| {
                let i = self.nodes[a];
                self.graph
                    .successors(i)
                    .map(|j| w[(i, j)] * self.costs[(i, j)])
                    .sum::<f64>()
            });
            let h = self
                .lu
                .solve(&step_cost)
                .ok_or_else(|| Error::TargetUnreachableAtBeta {
                    beta: self.beta,
                    reason: "I - W is singular".into(),
                })?;
            for (a, &i) in self.nodes.iter().enumerate() {
                lambda[i] = -h[a];
            }
        }
        Ok(lambda)
    }
}
