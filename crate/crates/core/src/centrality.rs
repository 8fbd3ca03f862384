//! Net flows and all-pairs flow centralities.
//!
//! For linear costs the killed-chain matrix depends on the target only, so
//! [`mean_flow_centrality`] factorizes once per target and reuses it for
//! every source. Targets are processed in parallel and reduced in target
//! order, so tables do not depend on the thread count.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, ProblemSpec};
use crate::solver::system::TargetSystem;
use crate::solver::{solve_linear_flow, solve_power_flow, FixedPointOptions, Flow};

/// `nu_ij = |x_ij - x_ji|` and its row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct NetFlow {
    pub nu: DMatrix<f64>,
    pub node_net: DVector<f64>,
}

pub fn net_flow(flow: &Flow) -> NetFlow {
    let nu = net_matrix(flow.x());
    let node_net = row_sums(&nu);
    NetFlow { nu, node_net }
}

fn net_matrix(x: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| (x[(i, j)] - x[(j, i)]).abs())
}

fn row_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(m.nrows(), |i, _| m.row(i).iter().sum())
}

/// Flow indices averaged over all ordered pairs `s != t`.
#[derive(Debug, Clone)]
pub struct CentralityTable {
    pub beta: f64,
    pub p: f64,
    /// `<x_ij>`
    pub mean_flow: DMatrix<f64>,
    /// `<x_i.>`
    pub node_mean_flow: DVector<f64>,
    /// `c_ij = <x_ij> / <x_..>`
    pub rel_mean_flow: DMatrix<f64>,
    /// `c_i = c_i.`
    pub rel_node: DVector<f64>,
    /// `<nu_ij>`
    pub mean_net_flow: DMatrix<f64>,
    /// `<nu_i.>`
    pub node_mean_net_flow: DVector<f64>,
    /// `<x_..>`, the mean trip length.
    pub grand_total: f64,
    /// `T^out_s`: mean trip length from `s` over all targets.
    pub closeness_out: DVector<f64>,
    /// `T^in_t`: mean trip length to `t` over all sources.
    pub closeness_in: DVector<f64>,
}

impl CentralityTable {
    /// `<x_ij> + <x_ji>`, the mean flow through an undirected edge.
    pub fn symmetrized_mean_flow(&self) -> DMatrix<f64> {
        &self.mean_flow + self.mean_flow.transpose()
    }
}

struct TargetSums {
    flow: DMatrix<f64>,
    net: DMatrix<f64>,
    /// `x^{st}_..` indexed by source.
    totals: Vec<f64>,
}

fn pair_error(s: usize, t: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Pair {
        s,
        t,
        source: Box::new(e),
    }
}

fn sums_for_target(graph: &Graph, beta: f64, p: f64, t: usize) -> Result<TargetSums> {
    let n = graph.n();
    let mut sums = TargetSums {
        flow: DMatrix::zeros(n, n),
        net: DMatrix::zeros(n, n),
        totals: vec![0.0; n],
    };
    let sources = (0..n).filter(|&s| s != t);
    let mut add = |s: usize, x: DMatrix<f64>| {
        sums.net += net_matrix(&x);
        sums.totals[s] = x.sum();
        sums.flow += x;
    };
    if p == 1.0 {
        let first = if t == 0 { 1 } else { 0 };
        let system = TargetSystem::new(graph, t, beta, graph.r()).map_err(pair_error(first, t))?;
        for s in sources {
            let (x, _) = system.flow_from(s).map_err(pair_error(s, t))?;
            add(s, x);
        }
    } else {
        let opts = FixedPointOptions::default();
        for s in sources {
            let spec = ProblemSpec::new(s, t, beta).with_exponent(p).allow_sub_unit_exponent();
            let sol = solve_power_flow(graph, &spec, &opts).map_err(pair_error(s, t))?;
            add(s, sol.flow.x().clone());
        }
    }
    Ok(sums)
}

/// Mean flow, relative mean flow, mean net flow and closeness indices at
/// inverse temperature `beta` with cost exponent `p`.
pub fn mean_flow_centrality(graph: &Graph, beta: f64, p: f64) -> Result<CentralityTable> {
    let n = graph.n();
    ProblemSpec::new(0, 1, beta)
        .with_exponent(p)
        .allow_sub_unit_exponent()
        .validate(graph)?;
    let per_target: Vec<TargetSums> = (0..n)
        .into_par_iter()
        .map(|t| sums_for_target(graph, beta, p, t))
        .collect::<Result<_>>()?;

    let pairs = (n * (n - 1)) as f64;
    let mut flow = DMatrix::zeros(n, n);
    let mut net = DMatrix::zeros(n, n);
    let mut closeness_out = DVector::zeros(n);
    let mut closeness_in = DVector::zeros(n);
    for (t, sums) in per_target.iter().enumerate() {
        flow += &sums.flow;
        net += &sums.net;
        for s in (0..n).filter(|&s| s != t) {
            closeness_out[s] += sums.totals[s];
            closeness_in[t] += sums.totals[s];
        }
    }
    let mean_flow = flow / pairs;
    let mean_net_flow = net / pairs;
    closeness_out /= (n - 1) as f64;
    closeness_in /= (n - 1) as f64;
    let grand_total = mean_flow.sum();
    let rel_mean_flow = &mean_flow / grand_total;
    Ok(CentralityTable {
        beta,
        p,
        node_mean_flow: row_sums(&mean_flow),
        rel_node: row_sums(&rel_mean_flow),
        node_mean_net_flow: row_sums(&mean_net_flow),
        mean_flow,
        rel_mean_flow,
        mean_net_flow,
        grand_total,
        closeness_out,
        closeness_in,
    })
}

/// `x^{st}_.. + x^{ts}_..` for linear costs.
pub fn commute_time(graph: &Graph, s: usize, t: usize, beta: f64) -> Result<f64> {
    let there = solve_linear_flow(graph, &ProblemSpec::new(s, t, beta))?;
    let back = solve_linear_flow(graph, &ProblemSpec::new(t, s, beta))?;
    Ok(there.flow.total_time() + back.flow.total_time())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub beta: f64,
    /// Correlation with the profile at the smallest grid value; `None` when
    /// either profile is constant.
    pub corr0: Option<f64>,
    /// Correlation with the profile at the largest grid value.
    pub corr_inf: Option<f64>,
    pub sum: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CorrelationSweep {
    pub rows: Vec<CorrelationRow>,
    /// `<nu_i.>` at each grid value.
    pub node_net_flow: Vec<DVector<f64>>,
}

impl CorrelationSweep {
    /// Grid value maximizing `sum`, if the maximum is not at either end.
    pub fn interior_maximum(&self) -> Option<f64> {
        let (k, _) = self
            .rows
            .iter()
            .enumerate()
            .filter_map(|(k, row)| row.sum.map(|s| (k, s)))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        (k > 0 && k + 1 < self.rows.len()).then(|| self.rows[k].beta)
    }
}

/// Pearson correlation, `None` for a (numerically) constant input.
pub fn pearson(a: &DVector<f64>, b: &DVector<f64>) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.sum() / n, b.sum() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let degenerate = |ss: f64, v: &DVector<f64>| ss.sqrt() <= 1e-12 * v.amax() * n.sqrt();
    if degenerate(saa, a) || degenerate(sbb, b) {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty".into()));
    }
    if let Some(bad) = grid.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(Error::InvalidGrid(format!("value {bad} is not a finite non-negative beta")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("values must be strictly increasing".into()));
    }
    Ok(())
}

/// Node mean net flow at each grid value, correlated across nodes with its
/// profile at both ends of the grid.
pub fn centrality_correlation(graph: &Graph, beta_grid: &[f64]) -> Result<CorrelationSweep> {
    check_grid(beta_grid)?;
    let node_net_flow: Vec<DVector<f64>> = beta_grid
        .iter()
        .map(|&beta| mean_flow_centrality(graph, beta, 1.0).map(|t| t.node_mean_net_flow))
        .collect::<Result<_>>()?;
    let first = &node_net_flow[0];
    let last = node_net_flow.last().unwrap();
    let rows = beta_grid
        .iter()
        .zip(&node_net_flow)
        .map(|(&beta, profile)| {
            let corr0 = pearson(profile, first);
            let corr_inf = pearson(profile, last);
            CorrelationRow {
                beta,
                corr0,
                corr_inf,
                sum: corr0.zip(corr_inf).map(|(a, b)| a + b),
            }
        })
        .collect();
    Ok(CorrelationSweep { rows, node_net_flow })
}

/// `<x_..>` for linear costs, from total times only.
pub fn mean_total_time(graph: &Graph, beta: f64) -> Result<f64> {
    let n = graph.n();
    let per_target: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|t| {
            let system = TargetSystem::new(graph, t, beta, graph.r())
                .map_err(pair_error(if t == 0 { 1 } else { 0 }, t))?;
            Ok(system.total_times()?.iter().filter(|x| !x.is_nan()).sum::<f64>())
        })
        .collect::<Result<_>>()?;
    Ok(per_target.iter().sum::<f64>() / (n * (n - 1)) as f64)
}

/// Central difference of `<x_..>` with respect to the resistance of arc
/// `(i, j)`, with absolute step `step`.
pub fn trip_duration_sensitivity(graph: &Graph, beta: f64, edge: (usize, usize), step: f64) -> Result<f64> {
    let (i, j) = edge;
    graph.check_node(i)?;
    graph.check_node(j)?;
    let r = graph.resistance(i, j).ok_or(Error::NotAnEdge { i, j })?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidStep(step));
    }
    let up = mean_total_time(&graph.with_resistance(i, j, r + step)?, beta)?;
    let down = mean_total_time(&graph.with_resistance(i, j, r - step)?, beta)?;
    Ok((up - down) / (2.0 * step))
}
