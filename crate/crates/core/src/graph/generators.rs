//! Builtin test networks and seeded random graphs.
//!
//! Node numbering of the builtin graphs:
//!
//! * `A`: `m x m` grid, node `row * m + col`; source at corner 0, target at
//!   the opposite corner `m*m - 1`.
//! * `B`: cliques `{0..3}` and `{4..7}`, bridges `0-4` and `1-5`; source 2,
//!   target 6.
//! * `C`: cliques `{0..4}` and `{5..9}`; unit path `0-10-11-12-13-5`;
//!   high-resistance path `1-14-6` with `r = 10` per edge; source 2, target 7.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{simple_symmetric_graph, simple_symmetric_graph_with_resistances, validate_graph, Graph};
use crate::error::{Error, Result};

/// Default side of graph A.
pub const GRAPH_A_SIDE: usize = 7;
/// Resistance of each edge on graph C's short-cut path.
pub const GRAPH_C_HIGH_RESISTANCE: f64 = 10.0;

/// A generated graph together with its designated endpoints and layout notes.
#[derive(Debug, Clone)]
pub struct Builtin {
    pub name: String,
    pub graph: Graph,
    pub source: usize,
    pub target: usize,
    /// Undirected edges joining the clusters (empty when there are none).
    pub bridges: Vec<(usize, usize)>,
    pub notes: Vec<String>,
}

impl Builtin {
    pub fn is_bridge(&self, i: usize, j: usize) -> bool {
        self.bridges
            .iter()
            .any(|&(a, b)| (a, b) == (i, j) || (b, a) == (i, j))
    }

    /// Human-readable node listing.
    pub fn describe(&self) -> String {
        let mut out = format!(
            "graph {}: {} nodes, {} directed arcs\nsource {} target {}\n",
            self.name,
            self.graph.n(),
            self.graph.edge_count(),
            self.source,
            self.target
        );
        for note in &self.notes {
            out.push_str(note);
            out.push('\n');
        }
        out
    }
}

fn link(a: &mut DMatrix<f64>, i: usize, j: usize) {
    a[(i, j)] = 1.0;
    a[(j, i)] = 1.0;
}

fn clique(a: &mut DMatrix<f64>, nodes: std::ops::Range<usize>) {
    for i in nodes.clone() {
        for j in nodes.clone() {
            if i != j {
                a[(i, j)] = 1.0;
            }
        }
    }
}

pub fn grid_adjacency(m: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m * m, m * m);
    for row in 0..m {
        for col in 0..m {
            let i = row * m + col;
            if col + 1 < m {
                link(&mut a, i, i + 1);
            }
            if row + 1 < m {
                link(&mut a, i, i + m);
            }
        }
    }
    a
}

/// `m x m` square grid under the simple symmetric model.
pub fn grid(m: usize) -> Result<Graph> {
    if m < 2 {
        return Err(Error::TooFewNodes(m * m));
    }
    simple_symmetric_graph(&grid_adjacency(m))
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Result<Graph> {
    let mut a = DMatrix::zeros(n, n);
    for i in 1..n {
        link(&mut a, i - 1, i);
    }
    simple_symmetric_graph(&a)
}

/// Two `K_k` cliques joined by the edges `0-k` and `1-(k+1)`.
pub fn two_cliques(k: usize) -> Result<Graph> {
    if k < 3 {
        return Err(Error::Parse(format!(
            "cliques:{k} needs k >= 3 so the endpoints avoid the bridges"
        )));
    }
    let mut a = DMatrix::zeros(2 * k, 2 * k);
    clique(&mut a, 0..k);
    clique(&mut a, k..2 * k);
    link(&mut a, 0, k);
    link(&mut a, 1, k + 1);
    simple_symmetric_graph(&a)
}

pub fn graph_a() -> Graph {
    grid(GRAPH_A_SIDE).expect("grid generator")
}

pub fn graph_b() -> Graph {
    two_cliques(4).expect("two-clique generator")
}

pub fn graph_c() -> Graph {
    let n = 15;
    let mut a = DMatrix::zeros(n, n);
    let mut r = DMatrix::from_element(n, n, 1.0);
    clique(&mut a, 0..5);
    clique(&mut a, 5..10);
    let unit_path = [0, 10, 11, 12, 13, 5];
    for pair in unit_path.windows(2) {
        link(&mut a, pair[0], pair[1]);
    }
    for (i, j) in [(1, 14), (14, 6)] {
        link(&mut a, i, j);
        r[(i, j)] = GRAPH_C_HIGH_RESISTANCE;
        r[(j, i)] = GRAPH_C_HIGH_RESISTANCE;
    }
    simple_symmetric_graph_with_resistances(&a, &r).expect("graph C generator")
}

fn parse_size(spec: &str, what: &str) -> Result<usize> {
    spec.parse()
        .map_err(|_| Error::Parse(format!("bad {what} size {spec:?}")))
}

/// Resolves a builtin name: `A`, `B`, `C`, `grid:MxM`, `path:N` or `cliques:K`.
pub fn builtin(name: &str) -> Result<Builtin> {
    let (kind, arg) = match name.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (name, None),
    };
    match (kind, arg) {
        ("A", None) => builtin_grid(GRAPH_A_SIDE, "A"),
        ("grid", Some(arg)) => {
            let (rows, cols) = arg
                .split_once('x')
                .ok_or_else(|| Error::Parse(format!("grid size must be MxM, got {arg:?}")))?;
            let m = parse_size(rows, "grid")?;
            if parse_size(cols, "grid")? != m {
                return Err(Error::Parse("only square grids are supported".into()));
            }
            builtin_grid(m, name)
        }
        ("B", None) => builtin_cliques(4, "B"),
        ("cliques", Some(arg)) => builtin_cliques(parse_size(arg, "clique")?, name),
        ("path", Some(arg)) => {
            let n = parse_size(arg, "path")?;
            Ok(Builtin {
                name: name.to_string(),
                graph: path(n)?,
                source: 0,
                target: n - 1,
                bridges: Vec::new(),
                notes: vec![format!("nodes 0..{} along the path", n - 1)],
            })
        }
        ("C", None) => Ok(Builtin {
            name: "C".into(),
            graph: graph_c(),
            source: 2,
            target: 7,
            bridges: vec![(0, 10), (10, 11), (11, 12), (12, 13), (13, 5), (1, 14), (14, 6)],
            notes: vec![
                "clique 1: nodes 0-4; clique 2: nodes 5-9".into(),
                "unit-resistance path: 0-10-11-12-13-5".into(),
                format!("high-resistance path (r = {GRAPH_C_HIGH_RESISTANCE}): 1-14-6"),
            ],
        }),
        _ => Err(Error::Parse(format!("unknown builtin graph {name:?}"))),
    }
}

fn builtin_grid(m: usize, name: &str) -> Result<Builtin> {
    Ok(Builtin {
        name: name.to_string(),
        graph: grid(m)?,
        source: 0,
        target: m * m - 1,
        bridges: Vec::new(),
        notes: vec![format!("{m}x{m} grid, node = row*{m} + col")],
    })
}

fn builtin_cliques(k: usize, name: &str) -> Result<Builtin> {
    Ok(Builtin {
        name: name.to_string(),
        graph: two_cliques(k)?,
        source: 2,
        target: k + 2,
        bridges: vec![(0, k), (1, k + 1)],
        notes: vec![
            format!("clique 1: nodes 0-{}; clique 2: nodes {}-{}", k - 1, k, 2 * k - 1),
            format!("bridges: 0-{} and 1-{}", k, k + 1),
        ],
    })
}

/// Erdős–Rényi adjacency conditioned on connectivity (redrawn until connected).
pub fn erdos_renyi_adjacency(n: usize, edge_prob: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < edge_prob {
                    link(&mut a, i, j);
                }
            }
        }
        if simple_symmetric_graph(&a).is_ok() {
            return a;
        }
    }
}

/// Connected random graph under the simple symmetric model. With
/// `resistance_range = Some((lo, hi))` symmetric resistances are drawn
/// uniformly from `[lo, hi)`; otherwise they are 1.
pub fn random_connected(
    n: usize,
    edge_prob: f64,
    resistance_range: Option<(f64, f64)>,
    seed: u64,
) -> Graph {
    let a = erdos_renyi_adjacency(n, edge_prob, seed);
    let mut r = DMatrix::from_element(n, n, 1.0);
    if let Some((lo, hi)) = resistance_range {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_7e5);
        for i in 0..n {
            for j in i + 1..n {
                let value = rng.random_range(lo..hi);
                r[(i, j)] = value;
                r[(j, i)] = value;
            }
        }
    }
    simple_symmetric_graph_with_resistances(&a, &r).expect("connected by construction")
}

/// Random (generally non-reversible) transition matrix on the support of
/// `graph`, keeping its resistances.
pub fn random_chain_on_support(graph: &Graph, seed: u64) -> Graph {
    let n = graph.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let succ: Vec<usize> = graph.successors(i).collect();
        let draws: Vec<f64> = succ.iter().map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = draws.iter().sum();
        for (&j, d) in succ.iter().zip(&draws) {
            w[(i, j)] = d / total;
        }
        // Absorb rounding so the row sum is 1 to the last bit.
        let sum: f64 = w.row(i).iter().sum();
        w[(i, succ[0])] += 1.0 - sum;
    }
    validate_graph(w, graph.r().clone()).expect("same support as a valid graph")
}
