//! File formats: graph JSON and edge-list CSV input, CSV/JSON/DOT output.
//!
//! Floats are written in their shortest round-trip form so outputs are
//! byte-stable.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::calibration::{AbacusCurve, BracketEnd, CalibrationReport};
use crate::centrality::{CentralityTable, CorrelationSweep};
use crate::error::{Error, Result};
use crate::graph::{simple_symmetric_graph_with_resistances, validate_graph, Graph};
use crate::solver::{Flow, Solution};

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    from: usize,
    to: usize,
    w: f64,
    r: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphRecord {
    n: usize,
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Parses `{"n": .., "edges": [{"from", "to", "w", "r"}, ..], "labels": [..]}`.
pub fn parse_graph_json(text: &str) -> Result<Graph> {
    let record: GraphRecord = serde_json::from_str(text)?;
    let n = record.n;
    let mut w = DMatrix::zeros(n, n);
    let mut r = DMatrix::from_element(n, n, f64::INFINITY);
    for e in &record.edges {
        if e.from >= n || e.to >= n {
            return Err(Error::NodeOutOfRange {
                node: e.from.max(e.to),
                n,
            });
        }
        w[(e.from, e.to)] = e.w;
        r[(e.from, e.to)] = e.r;
    }
    let graph = validate_graph(w, r)?;
    match record.labels {
        Some(labels) => graph.with_labels(labels),
        None => Ok(graph),
    }
}

pub fn graph_to_json(graph: &Graph) -> String {
    let record = GraphRecord {
        n: graph.n(),
        edges: graph
            .edges()
            .map(|(i, j)| EdgeRecord {
                from: i,
                to: j,
                w: graph.w()[(i, j)],
                r: graph.r()[(i, j)],
            })
            .collect(),
        labels: graph.labels().map(<[String]>::to_vec),
    };
    serde_json::to_string_pretty(&record).expect("graph records serialize")
}

/// Parses an undirected `i,j,r` edge list (optional header) into the simple
/// symmetric model with the given resistances.
pub fn parse_edge_csv(text: &str) -> Result<Graph> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut edges = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected i,j,r", line + 1)));
        }
        let parsed = (
            record[0].parse::<usize>(),
            record[1].parse::<usize>(),
            record[2].parse::<f64>(),
        );
        match parsed {
            (Ok(i), Ok(j), Ok(r)) => edges.push((i, j, r)),
            _ if line == 0 => continue,
            _ => return Err(Error::Parse(format!("line {}: expected i,j,r", line + 1))),
        }
    }
    let n = edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
    let mut adjacency = DMatrix::zeros(n, n);
    let mut r = DMatrix::from_element(n, n, 1.0);
    for (i, j, value) in edges {
        for (a, b) in [(i, j), (j, i)] {
            adjacency[(a, b)] = 1.0;
            r[(a, b)] = value;
        }
    }
    simple_symmetric_graph_with_resistances(&adjacency, &r)
}

/// Loads a graph file, choosing the format by extension (`.json` or `.csv`).
pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => parse_graph_json(&text),
        Some("csv") => parse_edge_csv(&text),
        _ => Err(Error::Parse(format!(
            "{}: unknown graph format (expected .json or .csv)",
            path.display()
        ))),
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// `i,j,x,net` for every arc of the support.
pub fn write_flow_csv<W: Write>(out: W, graph: &Graph, flow: &Flow) -> Result<()> {
    let mut wtr = csv_writer(out);
    wtr.write_record(["i", "j", "x", "net"])?;
    for (i, j) in graph.edges() {
        let net = flow.get(i, j) - flow.get(j, i);
        wtr.write_record([i.to_string(), j.to_string(), num(flow.get(i, j)), num(net)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `{"z", "lambda", "U", "G", "F", "total_time"}`, with `z` over all nodes
/// (`z_t = 1`).
pub fn diagnostics_json(solution: &Solution) -> String {
    let d = &solution.diagnostics;
    let value = json!({
        "z": d.z_extended(solution.flow.t()).as_slice(),
        "lambda": d.lambda.as_slice(),
        "U": d.energy,
        "G": d.entropy,
        "F": d.free_energy,
        "total_time": d.total_time,
    });
    serde_json::to_string_pretty(&value).expect("diagnostics serialize")
}

/// `i,j,mean_flow,rel_mean_flow,mean_net_flow` for every arc of the support.
pub fn write_centrality_edges<W: Write>(out: W, graph: &Graph, table: &CentralityTable) -> Result<()> {
    let mut wtr = csv_writer(out);
    wtr.write_record(["i", "j", "mean_flow", "rel_mean_flow", "mean_net_flow"])?;
    for (i, j) in graph.edges() {
        wtr.write_record([
            i.to_string(),
            j.to_string(),
            num(table.mean_flow[(i, j)]),
            num(table.rel_mean_flow[(i, j)]),
            num(table.mean_net_flow[(i, j)]),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `i,mean_flow,rel,mean_net_flow,closeness_out,closeness_in`.
pub fn write_centrality_nodes<W: Write>(out: W, table: &CentralityTable) -> Result<()> {
    let mut wtr = csv_writer(out);
    wtr.write_record(["i", "mean_flow", "rel", "mean_net_flow", "closeness_out", "closeness_in"])?;
    for i in 0..table.node_mean_flow.len() {
        wtr.write_record([
            i.to_string(),
            num(table.node_mean_flow[i]),
            num(table.rel_node[i]),
            num(table.node_mean_net_flow[i]),
            num(table.closeness_out[i]),
            num(table.closeness_in[i]),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `beta,corr0,corr_inf,sum`; undefined correlations are left empty.
pub fn write_correlation_csv<W: Write>(out: W, sweep: &CorrelationSweep) -> Result<()> {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let mut wtr = csv_writer(out);
    wtr.write_record(["beta", "corr0", "corr_inf", "sum"])?;
    for row in &sweep.rows {
        wtr.write_record([num(row.beta), opt(row.corr0), opt(row.corr_inf), opt(row.sum)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_abacus_csv<W: Write>(out: W, curve: &AbacusCurve) -> Result<()> {
    let mut wtr = csv_writer(out);
    wtr.write_record(["beta", "total_time"])?;
    for (beta, time) in curve.betas.iter().zip(&curve.total_times) {
        wtr.write_record([num(*beta), num(*time)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn calibration_json(report: &CalibrationReport) -> String {
    let pinned = report.pinned.map(|end| match end {
        BracketEnd::Lower => "lower",
        BracketEnd::Upper => "upper",
    });
    let value = json!({
        "T_hat": report.t_hat,
        "beta_hat": report.beta_hat,
        "residual": report.residual,
        "bracket": [report.bracket.0, report.bracket.1],
        "monotone": report.monotone,
        "pinned": pinned,
        "crossings": report.crossings,
        "diagnostic": report.diagnostic,
    });
    serde_json::to_string_pretty(&value).expect("report serializes")
}

/// Graphviz colour for `value` on a 10-step grey ramp scaled by `max`:
/// `gray90` for zero up to `gray0` (black) at the maximum.
pub fn grey_level(value: f64, max: f64) -> String {
    let step = if max > 0.0 {
        (9.0 * (value / max).clamp(0.0, 1.0)).round() as u32
    } else {
        0
    };
    format!("gray{}", 90 - 10 * step)
}

/// Directed DOT graph with one arc per support entry, shaded by `values`.
pub fn write_dot<W: Write>(mut out: W, graph: &Graph, values: &DMatrix<f64>, name: &str) -> Result<()> {
    let max = graph.edges().map(|(i, j)| values[(i, j)]).fold(0.0, f64::max);
    writeln!(out, "digraph {name} {{")?;
    writeln!(out, "  node [shape=circle];")?;
    for i in 0..graph.n() {
        match graph.labels() {
            Some(labels) => writeln!(out, "  {i} [label={:?}];", labels[i])?,
            None => writeln!(out, "  {i};")?,
        }
    }
    for (i, j) in graph.edges() {
        let v = values[(i, j)];
        writeln!(
            out,
            "  {i} -> {j} [color={}, label=\"{}\"];",
            grey_level(v, max),
            num(v)
        )?;
    }
    writeln!(out, "}}")?;
    Ok(())
}
