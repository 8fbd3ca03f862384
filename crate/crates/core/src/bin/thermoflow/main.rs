mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use nalgebra::DMatrix;

use args::*;
use thermoflow::calibration::{build_abacus, calibrate_from_energy, calibrate_from_total_time, default_beta_grid, log_grid};
use thermoflow::centrality::{centrality_correlation, mean_flow_centrality};
use thermoflow::graph::generators::{self, Builtin};
use thermoflow::oracles::{absorbing_chain_visits, dijkstra_cost, simulate_killed_walks};
use thermoflow::{io as tio, solve, solve_linear_flow, Error, Flow, Graph, ProblemSpec};

enum Failure {
    /// Bad invocation: exit status 2.
    Config(String),
    /// Error raised by the library: exit status 1.
    Module(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Module(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Module(Error::Io(e))
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Source {
    graph: Graph,
    builtin: Option<Builtin>,
    name: String,
}

fn load(args: &GraphArgs) -> std::result::Result<Source, Failure> {
    let path = Path::new(&args.graph);
    let is_file = path.extension().is_some_and(|e| e == "json" || e == "csv");
    if is_file {
        let graph = tio::load_graph(path)?;
        return Ok(Source {
            graph,
            builtin: None,
            name: args.graph.clone(),
        });
    }
    match generators::builtin(&args.graph) {
        Ok(b) => Ok(Source {
            graph: b.graph.clone(),
            name: b.name.clone(),
            builtin: Some(b),
        }),
        Err(e) => Err(Failure::Config(format!("--graph: {e}"))),
    }
}

impl Source {
    fn endpoints(&self, e: &EndpointArgs) -> std::result::Result<(usize, usize), Failure> {
        let s = e.s.or(self.builtin.as_ref().map(|b| b.source));
        let t = e.t.or(self.builtin.as_ref().map(|b| b.target));
        match (s, t) {
            (Some(s), Some(t)) => Ok((s, t)),
            _ => Err(Failure::Config("--s and --t are required for graph files".into())),
        }
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(path: &Option<PathBuf>, text: &str) -> Outcome {
    let mut out = output(path)?;
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn parse_grid(grid: &GridArgs) -> std::result::Result<Vec<f64>, Failure> {
    let Some(text) = &grid.betas else {
        return Ok(default_beta_grid());
    };
    let bad = || Failure::Config(format!("--betas: cannot parse {text:?}"));
    if let Some(rest) = text.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.parse().map_err(|_| bad())?;
        let hi: f64 = hi.parse().map_err(|_| bad())?;
        let n: usize = n.parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return Err(bad());
        }
        return Ok(log_grid(lo, hi, n));
    }
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn spec_for(s: usize, t: usize, beta: f64, e: &ExponentArgs) -> ProblemSpec {
    let spec = ProblemSpec::new(s, t, beta).with_exponent(e.p);
    if e.allow_sub_unit {
        spec.allow_sub_unit_exponent()
    } else {
        spec
    }
}

fn run_flow(a: &FlowArgs) -> Outcome {
    let src = load(&a.graph)?;
    let (s, t) = src.endpoints(&a.endpoints)?;
    let solution = solve(&src.graph, &spec_for(s, t, a.beta, &a.exponent))?;
    let mut out = output(&a.out)?;
    tio::write_flow_csv(&mut out, &src.graph, &solution.flow)?;
    out.flush()?;
    if let Some(path) = &a.dot {
        let mut dot = BufWriter::new(File::create(path)?);
        tio::write_dot(&mut dot, &src.graph, solution.flow.x(), "flow")?;
        dot.flush()?;
    }
    if let Some(path) = &a.diagnostics {
        std::fs::write(path, tio::diagnostics_json(&solution) + "\n")?;
    }
    Ok(())
}

fn run_centrality(a: &CentralityArgs) -> Outcome {
    let src = load(&a.graph)?;
    if a.exponent.p < 1.0 && !a.exponent.allow_sub_unit {
        return Err(Error::InvalidExponent {
            p: a.exponent.p,
            reason: "p < 1 requires the explicit sub-unit opt-in",
        }
        .into());
    }
    let table = mean_flow_centrality(&src.graph, a.beta, a.exponent.p)?;
    let mut edges = output(&a.edges)?;
    tio::write_centrality_edges(&mut edges, &src.graph, &table)?;
    edges.flush()?;
    if let Some(path) = &a.nodes {
        tio::write_centrality_nodes(BufWriter::new(File::create(path)?), &table)?;
    }
    if let Some(path) = &a.dot {
        let mut dot = BufWriter::new(File::create(path)?);
        tio::write_dot(&mut dot, &src.graph, &table.mean_net_flow, "centrality")?;
        dot.flush()?;
    }
    Ok(())
}

fn run_abacus(a: &AbacusArgs) -> Outcome {
    let src = load(&a.graph)?;
    let (s, t) = src.endpoints(&a.endpoints)?;
    let grid = parse_grid(&a.grid)?;
    let curve = build_abacus(&src.graph, s, t, &grid)?.with_graph_id(src.name);
    let mut out = output(&a.out)?;
    tio::write_abacus_csv(&mut out, &curve)?;
    out.flush()?;
    Ok(())
}

fn read_observed_flow(path: &Path, graph: &Graph, s: usize, t: usize) -> std::result::Result<Flow, Failure> {
    let n = graph.n();
    let mut x = DMatrix::zeros(n, n);
    let mut reader = csv::Reader::from_path(path).map_err(Error::from)?;
    for record in reader.records() {
        let record = record.map_err(Error::from)?;
        let field = |k: usize| record.get(k).unwrap_or("").trim().to_string();
        let parse_err = || Error::Parse(format!("{}: expected i,j,x rows", path.display()));
        let i: usize = field(0).parse().map_err(|_| parse_err())?;
        let j: usize = field(1).parse().map_err(|_| parse_err())?;
        let v: f64 = field(2).parse().map_err(|_| parse_err())?;
        graph.check_node(i)?;
        graph.check_node(j)?;
        x[(i, j)] = v;
    }
    let value = x.row(s).sum() - x.column(s).sum();
    Ok(Flow::new(x, s, t, value))
}

fn run_calibrate(a: &CalibrateArgs) -> Outcome {
    let src = load(&a.graph)?;
    let (s, t) = src.endpoints(&a.endpoints)?;
    let text = if let Some(path) = &a.flow {
        let observed = read_observed_flow(path, &src.graph, s, t)?;
        tio::calibration_json(&calibrate_from_energy(&src.graph, s, t, &observed)?)
    } else {
        let time = a.time.expect("clap requires --flow or --time");
        let curve = build_abacus(&src.graph, s, t, &parse_grid(&a.grid)?)?;
        let t_hat = calibrate_from_total_time(&curve, time)?;
        serde_json::to_string_pretty(&serde_json::json!({
            "T_hat": t_hat,
            "beta_hat": 1.0 / t_hat,
            "observed_time": time,
        }))
        .expect("json")
    };
    write_text(&a.out, &text)
}

fn run_correlate(a: &CorrelateArgs) -> Outcome {
    let src = load(&a.graph)?;
    let sweep = centrality_correlation(&src.graph, &parse_grid(&a.grid)?)?;
    let mut out = output(&a.out)?;
    tio::write_correlation_csv(&mut out, &sweep)?;
    out.flush()?;
    Ok(())
}

fn run_generate(a: &GenerateArgs) -> Outcome {
    let src = load(&a.graph)?;
    if a.describe {
        let text = match &src.builtin {
            Some(b) => b.describe(),
            None => format!("graph {}: {} nodes, {} directed arcs\n", src.name, src.graph.n(), src.graph.edge_count()),
        };
        return write_text(&a.out, text.trim_end());
    }
    write_text(&a.out, &tio::graph_to_json(&src.graph))
}

fn run_crosscheck(a: &CrosscheckArgs) -> Outcome {
    let src = load(&a.graph)?;
    let (s, t) = src.endpoints(&a.endpoints)?;
    let g = &src.graph;
    let mut rows: Vec<(String, f64, f64)> = Vec::new();

    let walk = solve_linear_flow(g, &ProblemSpec::new(s, t, 0.0))?;
    let visits = absorbing_chain_visits(g, s, t)?;
    rows.push(("beta=0 vs absorbing chain".into(), (walk.flow.x() - visits).amax(), 1e-9));

    let cold = solve_linear_flow(g, &ProblemSpec::new(s, t, 50.0))?;
    let shortest = dijkstra_cost(g, s, t)?;
    rows.push(("beta=50 energy vs dijkstra".into(), (cold.diagnostics.energy - shortest).abs(), 1e-3));

    let spec = ProblemSpec::new(s, t, a.beta);
    let sol = solve_linear_flow(g, &spec)?;
    let mc = simulate_killed_walks(g, &spec, a.walks, a.seed)?;
    let worst = g
        .edges()
        .map(|(i, j)| (mc.edge_counts[(i, j)] - sol.flow.get(i, j)).abs() / mc.standard_errors[(i, j)])
        .fold(0.0, f64::max);
    rows.push((format!("beta={} monte carlo edges (SE units)", a.beta), worst, 3.0));
    let zs = sol.diagnostics.log_z_source().exp();
    rows.push((
        format!("beta={} monte carlo survival (SE units)", a.beta),
        (mc.survival_rate - zs).abs() / mc.survival_se,
        3.0,
    ));

    let mut out = io::stdout().lock();
    writeln!(out, "{:<44} {:>14} {:>10}  result", "check", "value", "tolerance")?;
    for (name, value, tol) in rows {
        let verdict = if value < tol { "PASS" } else { "FAIL" };
        writeln!(out, "{name:<44} {value:>14.6e} {tol:>10.1e}  {verdict}")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Flow(a) => run_flow(a),
        Command::Centrality(a) => run_centrality(a),
        Command::Abacus(a) => run_abacus(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Correlate(a) => run_correlate(a),
        Command::Generate(a) => run_generate(a),
        Command::Crosscheck(a) => run_crosscheck(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Module(e)) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("ERROR {}: {}", e.code(), message);
            ExitCode::from(1)
        }
        Err(Failure::Config(message)) => {
            eprintln!("ERROR CONFIG: {message}");
            ExitCode::from(2)
        }
    }
}
