//! Reference computations for cross-checking the solver.
//!
//! Nothing here goes through the solver's factorizations: linear systems are
//! solved with a private Gauss-Jordan routine, shortest paths with a plain
//! O(n^2) Dijkstra, and killed walks are simulated step by step.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, ProblemSpec};

/// Solves `a x = b` for every column of `b` by Gauss-Jordan elimination with
/// partial pivoting. Returns `None` when a pivot falls below `1e-13` times
/// the largest entry of `a`.
fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        for k in 0..n {
            a[col][k] /= p;
        }
        for v in b[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row == col || a[row][col] == 0.0 {
                continue;
            }
            let f = a[row][col];
            for k in 0..n {
                a[row][k] -= f * a[col][k];
            }
            for k in 0..b[row].len() {
                b[row][k] -= f * b[col][k];
            }
        }
    }
    Some(b)
}

/// Expected edge traversal counts of the `W`-walk started at `s` and
/// absorbed at `t`, from the fundamental matrix `N = (I - Q)^-1`.
pub fn absorbing_chain_visits(graph: &Graph, s: usize, t: usize) -> Result<DMatrix<f64>> {
    graph.check_node(s)?;
    graph.check_node(t)?;
    if s == t {
        return Err(Error::SameEndpoints(s));
    }
    let n = graph.n();
    let transient: Vec<usize> = (0..n).filter(|&i| i != t).collect();
    let m = transient.len();
    let w = graph.w();
    // Solve (I - Q)^T u = e_s, so u_i = N_si.
    let a: Vec<Vec<f64>> = (0..m)
        .map(|row| {
            (0..m)
                .map(|col| {
                    let identity = if row == col { 1.0 } else { 0.0 };
                    identity - w[(transient[col], transient[row])]
                })
                .collect()
        })
        .collect();
    let b: Vec<Vec<f64>> = transient.iter().map(|&i| vec![if i == s { 1.0 } else { 0.0 }]).collect();
    let visits = gauss_jordan(a, b).ok_or(Error::TargetUnreachable { s, t })?;
    let mut x = DMatrix::zeros(n, n);
    for (k, &i) in transient.iter().enumerate() {
        for j in 0..n {
            x[(i, j)] = visits[k][0] * w[(i, j)];
        }
    }
    Ok(x)
}

/// Least total resistance from `s` to `t` and one optimal node sequence.
pub fn dijkstra_path(graph: &Graph, s: usize, t: usize) -> Result<(f64, Vec<usize>)> {
    graph.check_node(s)?;
    graph.check_node(t)?;
    let n = graph.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[s] = 0.0;
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&i| !done[i] && dist[i].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        for v in 0..n {
            if let Some(r) = graph.resistance(u, v) {
                if dist[u] + r < dist[v] {
                    dist[v] = dist[u] + r;
                    prev[v] = u;
                }
            }
        }
    }
    if !dist[t].is_finite() {
        return Err(Error::TargetUnreachable { s, t });
    }
    let mut route = vec![t];
    while *route.last().unwrap() != s {
        route.push(prev[*route.last().unwrap()]);
    }
    route.reverse();
    Ok((dist[t], route))
}

pub fn dijkstra_cost(graph: &Graph, s: usize, t: usize) -> Result<f64> {
    dijkstra_path(graph, s, t).map(|(cost, _)| cost)
}

/// Currents for a unit current injected at `s` and extracted at `t`, with
/// conductance `1/r_ij` on each undirected edge. Entry `(i, j)` holds the
/// current flowing from `i` to `j` when positive, 0 otherwise.
pub fn electric_current(graph: &Graph, s: usize, t: usize) -> Result<DMatrix<f64>> {
    graph.check_node(s)?;
    graph.check_node(t)?;
    if s == t {
        return Err(Error::SameEndpoints(s));
    }
    let n = graph.n();
    for (i, j) in graph.edges() {
        match graph.resistance(j, i) {
            Some(back) if back == graph.r()[(i, j)] => {}
            _ => return Err(Error::SingularNetwork),
        }
    }
    // Grounded Laplacian: potential at t fixed to 0.
    let free: Vec<usize> = (0..n).filter(|&i| i != t).collect();
    let slot = |i: usize| free.iter().position(|&k| k == i);
    let mut a = vec![vec![0.0; free.len()]; free.len()];
    for (i, j) in graph.edges() {
        let g = 1.0 / graph.r()[(i, j)];
        if let Some(a_i) = slot(i) {
            a[a_i][a_i] += g;
            if let Some(a_j) = slot(j) {
                a[a_i][a_j] -= g;
            }
        }
    }
    let b: Vec<Vec<f64>> = free.iter().map(|&i| vec![if i == s { 1.0 } else { 0.0 }]).collect();
    let phi = gauss_jordan(a, b).ok_or(Error::SingularNetwork)?;
    let potential = |i: usize| slot(i).map_or(0.0, |k| phi[k][0]);
    let mut current = DMatrix::zeros(n, n);
    for (i, j) in graph.edges() {
        let c = (potential(i) - potential(j)) / graph.r()[(i, j)];
        if c > 0.0 {
            current[(i, j)] = c;
        }
    }
    Ok(current)
}

#[derive(Debug, Clone)]
pub struct KilledWalkStats {
    /// Mean transition counts per surviving walk.
    pub edge_counts: DMatrix<f64>,
    /// Fraction of walks absorbed at the target.
    pub survival_rate: f64,
    /// Standard error of `survival_rate`.
    pub survival_se: f64,
    pub n_walks: usize,
    pub n_survivors: usize,
    /// Standard errors of `edge_counts`. Entries whose sample variance is
    /// zero are floored at `1 / n_survivors`.
    pub standard_errors: DMatrix<f64>,
}

/// Simulates the extended chain literally: from `i` move to `j` with
/// probability `w_ij exp(-beta r_ij)`, otherwise die. Walks reaching `t`
/// are kept. Each walk draws from its own stream `(seed, walk index)`.
pub fn simulate_killed_walks(graph: &Graph, spec: &ProblemSpec, n_walks: usize, seed: u64) -> Result<KilledWalkStats> {
    spec.validate(graph)?;
    if spec.p != 1.0 {
        return Err(Error::InvalidExponent {
            p: spec.p,
            reason: "killed walks are simulated for linear costs only",
        });
    }
    let n = graph.n();
    let (s, t) = (spec.s, spec.t);
    let succ: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            (0..n)
                .filter_map(|j| {
                    graph
                        .resistance(i, j)
                        .map(|r| (j, graph.w()[(i, j)] * (-spec.beta * r).exp()))
                })
                .collect()
        })
        .collect();

    let walk = |index: usize| -> Option<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let mut counts = vec![0u32; n * n];
        let mut here = s;
        while here != t {
            let mut u: f64 = rng.random();
            let mut next = None;
            for &(j, p) in &succ[here] {
                if u < p {
                    next = Some(j);
                    break;
                }
                u -= p;
            }
            let j = next?;
            counts[here * n + j] += 1;
            here = j;
        }
        Some(counts)
    };

    let (sums, squares, survivors) = (0..n_walks)
        .into_par_iter()
        .filter_map(walk)
        .fold(
            || (vec![0u64; n * n], vec![0u64; n * n], 0usize),
            |(mut sum, mut sq, k), counts| {
                for (idx, &c) in counts.iter().enumerate() {
                    sum[idx] += c as u64;
                    sq[idx] += (c as u64) * (c as u64);
                }
                (sum, sq, k + 1)
            },
        )
        .reduce(
            || (vec![0u64; n * n], vec![0u64; n * n], 0usize),
            |(mut a, mut b, k), (c, d, l)| {
                for idx in 0..n * n {
                    a[idx] += c[idx];
                    b[idx] += d[idx];
                }
                (a, b, k + l)
            },
        );

    if survivors == 0 {
        return Err(Error::AllWalksKilled { n_walks });
    }
    let k = survivors as f64;
    let mut edge_counts = DMatrix::zeros(n, n);
    let mut standard_errors = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mean = sums[i * n + j] as f64 / k;
            let variance = if survivors > 1 {
                ((squares[i * n + j] as f64 - k * mean * mean) / (k - 1.0)).max(0.0)
            } else {
                0.0
            };
            edge_counts[(i, j)] = mean;
            standard_errors[(i, j)] = (variance / k).sqrt().max(1.0 / k);
        }
    }
    let survival_rate = k / n_walks as f64;
    let survival_se = (survival_rate * (1.0 - survival_rate) / n_walks as f64)
        .sqrt()
        .max(1.0 / n_walks as f64);
    Ok(KilledWalkStats {
        edge_counts,
        survival_rate,
        survival_se,
        n_walks,
        n_survivors: survivors,
        standard_errors,
    })
}
