//! Weighted directed graphs carrying a reference Markov chain `W` and an
//! arc resistance matrix `R`.
//!
//! A [`Graph`] is only ever constructed through validation, so every value of
//! the type has a row-stochastic `W`, strictly positive finite resistances on
//! the support of `W`, and a strongly connected support. Resistances off the
//! support are stored as `f64::INFINITY` and never enter any arithmetic.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub mod generators;

/// Row sums of `W` must match 1 within this tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    w: DMatrix<f64>,
    r: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    /// Transition matrix.
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Resistance matrix, `INFINITY` off the support of `W`.
    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.w[(i, j)] > 0.0
    }

    pub fn resistance(&self, i: usize, j: usize) -> Option<f64> {
        self.has_edge(i, j).then(|| self.r[(i, j)])
    }

    /// Directed arcs `(i, j)` with `w_ij > 0`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| (0..n).filter(move |&j| self.has_edge(i, j)).map(move |j| (i, j)))
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&j| self.has_edge(i, j))
    }

    /// Number of arcs leaving `i` (the degree, for symmetric graphs).
    pub fn out_degree(&self, i: usize) -> usize {
        self.successors(i).count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Largest resistance on the support.
    pub fn max_resistance(&self) -> f64 {
        self.edges().map(|(i, j)| self.r[(i, j)]).fold(0.0, f64::max)
    }

    /// True when `R` is symmetric on a symmetric support.
    pub fn is_symmetric(&self) -> bool {
        self.edges()
            .all(|(i, j)| self.has_edge(j, i) && self.r[(i, j)] == self.r[(j, i)])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::Parse(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.n()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Copy of the graph with the resistance of arc `(i, j)` replaced.
    pub fn with_resistance(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        self.check_node(i)?;
        self.check_node(j)?;
        if !self.has_edge(i, j) {
            return Err(Error::NotAnEdge { i, j });
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::ZeroOrNegativeResistanceOnEdge { i, j, value });
        }
        let mut g = self.clone();
        g.r[(i, j)] = value;
        Ok(g)
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node < self.n() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node, n: self.n() })
        }
    }
}

/// Validates a `(W, R)` pair and returns the graph it defines.
///
/// Entries of `R` where `w_ij = 0` are ignored and replaced by the infinite
/// sentinel, so re-validating `(g.w(), g.r())` returns `g` unchanged.
pub fn validate_graph(w: DMatrix<f64>, r: DMatrix<f64>) -> Result<Graph> {
    let n = w.nrows();
    if w.ncols() != n || r.nrows() != n || r.ncols() != n {
        return Err(Error::DimensionMismatch {
            w_rows: w.nrows(),
            w_cols: w.ncols(),
            r_rows: r.nrows(),
            r_cols: r.ncols(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    for i in 0..n {
        for j in 0..n {
            let value = w[(i, j)];
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::NegativeEntry { i, j, value });
            }
        }
        let sum: f64 = w.row(i).iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::NotStochastic { row: i, sum });
        }
    }
    let mut r = r;
    for i in 0..n {
        for j in 0..n {
            if w[(i, j)] > 0.0 {
                let value = r[(i, j)];
                if !(value > 0.0 && value.is_finite()) {
                    return Err(Error::ZeroOrNegativeResistanceOnEdge { i, j, value });
                }
            } else {
                r[(i, j)] = f64::INFINITY;
            }
        }
    }
    let support = |i: usize, j: usize| w[(i, j)] > 0.0;
    if let Some(unreached) = first_unreached(n, &support)
        .or_else(|| first_unreached(n, &|i: usize, j: usize| support(j, i)))
    {
        return Err(Error::NotIrreducible { unreached });
    }
    Ok(Graph { w, r, labels: None })
}

/// Breadth-first search from node 0; returns the first node not reached.
fn first_unreached(n: usize, arc: &dyn Fn(usize, usize) -> bool) -> Option<usize> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && arc(i, j) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.iter().position(|&s| !s)
}

/// Simple symmetric model: uniform transitions and unit resistances on the
/// edges of an undirected 0/1 adjacency matrix.
pub fn simple_symmetric_graph(adjacency: &DMatrix<f64>) -> Result<Graph> {
    let ones = DMatrix::from_element(adjacency.nrows(), adjacency.ncols(), 1.0);
    simple_symmetric_graph_with_resistances(adjacency, &ones)
}

/// Uniform transitions on existing edges, with caller-supplied resistances
/// (read only on edges).
pub fn simple_symmetric_graph_with_resistances(
    adjacency: &DMatrix<f64>,
    resistances: &DMatrix<f64>,
) -> Result<Graph> {
    let n = adjacency.nrows();
    if adjacency.ncols() != n || resistances.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            w_rows: adjacency.nrows(),
            w_cols: adjacency.ncols(),
            r_rows: resistances.nrows(),
            r_cols: resistances.ncols(),
        });
    }
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    for i in 0..n {
        for j in 0..n {
            let a = adjacency[(i, j)];
            if (a != 0.0 && a != 1.0) || a != adjacency[(j, i)] || (i == j && a != 0.0) {
                return Err(Error::NotSymmetric { i, j });
            }
        }
    }
    if let Some(unreached) = first_unreached(n, &|i, j| adjacency[(i, j)] > 0.0) {
        return Err(Error::Disconnected { unreached });
    }
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let degree: f64 = adjacency.row(i).iter().sum();
        for j in 0..n {
            if adjacency[(i, j)] > 0.0 {
                w[(i, j)] = 1.0 / degree;
            }
        }
    }
    validate_graph(w, resistances.clone())
}

/// Source, target, inverse temperature and cost exponent of one flow problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub s: usize,
    pub t: usize,
    pub beta: f64,
    /// Exponent of the cost shape `phi(x) = x^p`.
    pub p: f64,
    /// Opt-in for `0 < p < 1`, where the optimum need not be unique.
    pub allow_sub_unit_exponent: bool,
}

impl ProblemSpec {
    pub fn new(s: usize, t: usize, beta: f64) -> Self {
        ProblemSpec {
            s,
            t,
            beta,
            p: 1.0,
            allow_sub_unit_exponent: false,
        }
    }

    pub fn with_exponent(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn allow_sub_unit_exponent(mut self) -> Self {
        self.allow_sub_unit_exponent = true;
        self
    }

    /// Temperature `1/beta` (infinite at `beta = 0`).
    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn validate(&self, graph: &Graph) -> Result<()> {
        graph.check_node(self.s)?;
        graph.check_node(self.t)?;
        if self.s == self.t {
            return Err(Error::SameEndpoints(self.s));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidBeta(self.beta));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidExponent {
                p: self.p,
                reason: "must be finite and > 0",
            });
        }
        if self.p < 1.0 && !self.allow_sub_unit_exponent {
            return Err(Error::InvalidExponent {
                p: self.p,
                reason: "p < 1 requires the explicit sub-unit opt-in",
            });
        }
        Ok(())
    }
}
