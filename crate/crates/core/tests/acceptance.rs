//! Acceptance suite: one line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thermoflow::calibration::{
    build_abacus, calibrate_from_energy, calibrate_from_total_time, default_beta_grid, log_grid,
};
use thermoflow::centrality::{centrality_correlation, mean_flow_centrality};
use thermoflow::graph::generators::{self, Builtin};
use thermoflow::oracles::{absorbing_chain_visits, dijkstra_path, electric_current, simulate_killed_walks};
use thermoflow::{
    evaluate_functionals, mix_flows, simple_symmetric_graph, solve_linear_flow, solve_power_flow, FixedPointOptions,
    Graph, ProblemSpec,
};

type Verdict = (bool, String);

const BETAS: [f64; 5] = [0.0, 0.1, 1.0, 10.0, 50.0];

fn builtins() -> Vec<Builtin> {
    ["A", "B", "C"].iter().map(|n| generators::builtin(n).unwrap()).collect()
}

/// 50 seeded connected graphs with 5..=30 nodes under the simple symmetric model.
fn random_graphs() -> Vec<Graph> {
    (0..50u64)
        .map(|k| generators::random_connected(5 + (k as usize * 11) % 26, 0.2, None, 20_000 + k))
        .collect()
}

fn criterion_1() -> Verdict {
    let mut cases: Vec<(Graph, usize, usize)> = builtins().into_iter().map(|b| (b.graph, b.source, b.target)).collect();
    for g in random_graphs() {
        let n = g.n();
        cases.push((g, 0, n - 1));
    }
    let mut worst: f64 = 0.0;
    let mut solves = 0;
    for (g, s, t) in &cases {
        for pair in [(*s, *t), (*t, *s)] {
            for beta in BETAS {
                let sol = solve_linear_flow(g, &ProblemSpec::new(pair.0, pair.1, beta)).unwrap();
                worst = worst.max(sol.flow.admissibility_residual(g));
                solves += 1;
            }
        }
    }
    (worst < 1e-10, format!("{solves} solves, worst residual {worst:.2e} (tol 1e-10)"))
}

fn criterion_2() -> Verdict {
    let mut cases: Vec<(Graph, usize, usize)> = builtins().into_iter().map(|b| (b.graph, b.source, b.target)).collect();
    for g in random_graphs() {
        let n = g.n();
        cases.push((g, 0, n - 1));
    }
    let (mut flow_gap, mut z_gap): (f64, f64) = (0.0, 0.0);
    for (g, s, t) in &cases {
        let sol = solve_linear_flow(g, &ProblemSpec::new(*s, *t, 0.0)).unwrap();
        let visits = absorbing_chain_visits(g, *s, *t).unwrap();
        flow_gap = flow_gap.max((sol.flow.x() - visits).amax());
        z_gap = sol.diagnostics.z.iter().fold(z_gap, |m, z| m.max((z - 1.0).abs()));
    }
    (
        flow_gap < 1e-9 && z_gap < 1e-12,
        format!("{} graphs, max |X - N W| {flow_gap:.2e} (tol 1e-9), max |z - 1| {z_gap:.2e} (tol 1e-12)", cases.len()),
    )
}

fn criterion_3() -> Verdict {
    let c = generators::builtin("C").unwrap();
    let (g, s, t) = (&c.graph, c.source, c.target);
    let sol = solve_linear_flow(g, &ProblemSpec::new(s, t, 50.0)).unwrap();
    let (cost, route) = dijkstra_path(g, s, t).unwrap();
    let on_route = route
        .windows(2)
        .map(|hop| sol.flow.get(hop[0], hop[1]))
        .fold(f64::INFINITY, f64::min);
    let f = sol.diagnostics.free_energy;
    let u = sol.diagnostics.energy;
    let ok = on_route >= 0.999 && (f - cost).abs() < 1e-3;
    (
        ok,
        format!(
            "min flow along Dijkstra route {on_route:.6} (need >= 0.999); |F - d| = {:.4e} (tol 1e-3), \
             F = {f:.6}, d = {cost}, |U - d| = {:.2e}, T*G = {:.4e}",
            (f - cost).abs(),
            (u - cost).abs(),
            sol.diagnostics.entropy / 50.0
        ),
    )
}

fn criterion_4() -> Verdict {
    let (mut lambda_gap, mut z_gap): (f64, f64) = (0.0, 0.0);
    for b in builtins() {
        for beta in BETAS {
            let sol = solve_linear_flow(&b.graph, &ProblemSpec::new(b.source, b.target, beta)).unwrap();
            let d = &sol.diagnostics;
            let f = d.free_energy;
            let scale = 1.0 + f.abs();
            lambda_gap = lambda_gap.max((f - (d.lambda[b.target] - d.lambda[b.source])).abs() / scale);
            if beta > 0.0 {
                z_gap = z_gap.max((f + d.log_z_source() / beta).abs() / scale);
            }
        }
    }
    (
        lambda_gap < 1e-8 && z_gap < 1e-8,
        format!("max |F - (lambda_t - lambda_s)|/(1+|F|) {lambda_gap:.2e}, max |F + T ln z_s|/(1+|F|) {z_gap:.2e} (beta > 0), tol 1e-8"),
    )
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let graphs = builtins();
    let mut arcs: Vec<(usize, usize, usize)> = Vec::new();
    for (k, b) in graphs.iter().enumerate() {
        arcs.extend(b.graph.edges().filter(|&(i, _)| i != b.target).map(|(i, j)| (k, i, j)));
    }
    arcs.shuffle(&mut rng);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for &(k, i, j) in arcs.iter().take(20) {
        let b = &graphs[k];
        for beta in [0.5, 5.0] {
            let spec = ProblemSpec::new(b.source, b.target, beta);
            let x = solve_linear_flow(&b.graph, &spec).unwrap().flow.get(i, j);
            let r = b.graph.r()[(i, j)];
            let h = 1e-5 * r;
            let f = |value: f64| {
                let g = b.graph.with_resistance(i, j, value).unwrap();
                solve_linear_flow(&g, &spec).unwrap().diagnostics.free_energy
            };
            let derivative = (f(r + h) - f(r - h)) / (2.0 * h);
            worst = worst.max((derivative - x).abs() / x.abs().max(1e-6));
            checked += 1;
        }
    }
    (worst < 1e-4, format!("{checked} (edge, beta) cases, worst relative error {worst:.2e} (tol 1e-4)"))
}

fn criterion_6() -> Verdict {
    let grid = log_grid(1e-3, 50.0, 30);
    let mut details = Vec::new();
    let mut ok = true;
    for b in builtins() {
        let curve = build_abacus(&b.graph, b.source, b.target, &grid).unwrap();
        let worst_rise = curve
            .total_times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        ok &= curve.is_non_increasing();
        details.push(format!(
            "{}: {:.4} -> {:.4} (largest step {worst_rise:.2e})",
            b.name,
            curve.total_times[0],
            curve.total_times[29]
        ));
    }
    (ok, details.join("; "))
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
    (hi - lo) / hi.abs()
}

fn criterion_7() -> Verdict {
    let mut ok = true;
    let mut details = Vec::new();
    for b in builtins() {
        let g = &b.graph;
        let table = mean_flow_centrality(g, 0.0, 1.0).unwrap();
        let edge_spread = spread(g.edges().map(|(i, j)| table.mean_flow[(i, j)]));
        let degree_spread = spread((0..g.n()).map(|i| table.node_mean_flow[i] / g.out_degree(i) as f64));
        ok &= edge_spread < 1e-8 && degree_spread < 1e-8;
        let mut line = format!("{}: edge spread {edge_spread:.1e}, node/degree spread {degree_spread:.1e}", b.name);
        if !b.bridges.is_empty() {
            let bridge_min = b
                .bridges
                .iter()
                .map(|&(i, j)| table.mean_net_flow[(i, j)])
                .fold(f64::INFINITY, f64::min);
            let k = cluster_size(&b);
            let intra_max = g
                .edges()
                .filter(|&(i, j)| i < 2 * k && j < 2 * k && (i < k) == (j < k))
                .map(|(i, j)| table.mean_net_flow[(i, j)])
                .fold(0.0, f64::max);
            ok &= bridge_min > intra_max;
            line.push_str(&format!(", min bridge net flow {bridge_min:.4} vs max intra-clique {intra_max:.4}"));
        }
        details.push(line);
    }
    (ok, details.join("; "))
}

/// Clique size of the builtin two-cluster graphs (B: 4, C: 5).
fn cluster_size(b: &Builtin) -> usize {
    match b.name.as_str() {
        "B" => 4,
        "C" => 5,
        other => panic!("graph {other} has no cliques"),
    }
}

fn criterion_8() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for b in builtins() {
        let table = mean_flow_centrality(&b.graph, 50.0, 1.0).unwrap();
        let symmetric_gap = (table.symmetrized_mean_flow() - &table.mean_net_flow).amax();
        let directed_gap = (&table.mean_flow - &table.mean_net_flow).amax();
        worst = worst.max(symmetric_gap);
        details.push(format!("{}: {symmetric_gap:.2e} (directed <x_ij> gap {directed_gap:.3})", b.name));
    }
    (
        worst < 1e-3,
        format!("max |<x_ij> + <x_ji> - <nu_ij>| at beta=50: {} (tol 1e-3)", details.join(", ")),
    )
}

fn criterion_9() -> Verdict {
    let triangle = simple_symmetric_graph(&DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 })).unwrap();
    let mut cases = vec![(triangle, 0, 2)];
    for k in 0..10u64 {
        let n = 5 + (k as usize * 3) % 11;
        cases.push((generators::random_connected(n, 0.3, None, 90_000 + k), 0, n - 1));
    }
    let opts = FixedPointOptions::default();
    let mut gaps = Vec::new();
    let mut max_iterations = 0;
    let mut converged = true;
    for (g, s, t) in &cases {
        let spec = ProblemSpec::new(*s, *t, 50.0).with_exponent(2.0);
        match solve_power_flow(g, &spec, &opts) {
            Ok(sol) => {
                max_iterations = max_iterations.max(sol.iterations);
                gaps.push((sol.flow.x() - electric_current(g, *s, *t).unwrap()).amax());
            }
            Err(_) => {
                converged = false;
                gaps.push(f64::INFINITY);
            }
        }
    }
    let worst_random = gaps[1..].iter().copied().fold(0.0, f64::max);
    (
        converged && gaps.iter().all(|&g| g < 1e-6),
        format!(
            "parallel resistors gap {:.2e}; random graphs worst gap {worst_random:.2e} (tol 1e-6); max iterations {max_iterations} (cap 10000)",
            gaps[0]
        ),
    )
}

fn criterion_10() -> Verdict {
    let b = generators::builtin("B").unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    for beta in [0.5, 2.0] {
        let spec = ProblemSpec::new(b.source, b.target, beta);
        let sol = solve_linear_flow(&b.graph, &spec).unwrap();
        let mc = simulate_killed_walks(&b.graph, &spec, 100_000, 1).unwrap();
        let worst = b
            .graph
            .edges()
            .map(|(i, j)| (mc.edge_counts[(i, j)] - sol.flow.get(i, j)).abs() / mc.standard_errors[(i, j)])
            .fold(0.0, f64::max);
        let zs = sol.diagnostics.log_z_source().exp();
        let survival = (mc.survival_rate - zs).abs() / mc.survival_se;
        ok &= worst < 3.0 && survival < 3.0;
        details.push(format!(
            "beta={beta}: worst edge {worst:.2} SE, survival {survival:.2} SE ({} survivors)",
            mc.n_survivors
        ));
    }
    (ok, details.join("; "))
}

fn criterion_11() -> Verdict {
    let mut ok = true;
    let (mut energy_worst, mut time_worst): (f64, f64) = (0.0, 0.0);
    for name in ["B", "C"] {
        let b = generators::builtin(name).unwrap();
        let curve = build_abacus(&b.graph, b.source, b.target, &default_beta_grid()).unwrap();
        for t0 in [0.05, 0.2, 1.0, 5.0] {
            let sol = solve_linear_flow(&b.graph, &ProblemSpec::new(b.source, b.target, 1.0 / t0)).unwrap();
            let report = calibrate_from_energy(&b.graph, b.source, b.target, &sol.flow).unwrap();
            energy_worst = energy_worst.max((report.t_hat / t0).ln().abs());
            let t_hat = calibrate_from_total_time(&curve, sol.flow.total_time()).unwrap();
            time_worst = time_worst.max((t0 / t_hat - 1.0).abs());
        }
    }
    ok &= energy_worst < 1e-3 && time_worst < 0.02;
    (
        ok,
        format!("energy rule max |ln(T_hat/T0)| {energy_worst:.2e} (tol 1e-3); abacus max |beta_hat/beta0 - 1| {time_worst:.4} (tol 0.02)"),
    )
}

fn criterion_12() -> Verdict {
    let c = generators::builtin("C").unwrap();
    let sweep = centrality_correlation(&c.graph, &default_beta_grid()).unwrap();
    match sweep.interior_maximum() {
        Some(beta) => {
            let soft = (0.01..=0.2).contains(&beta);
            (
                true,
                format!(
                    "interior maximum of the sum curve at beta = {beta:.4}; soft interval [0.01, 0.2] {}",
                    if soft { "met" } else { "missed" }
                ),
            )
        }
        None => (false, "sum curve has no interior maximum".into()),
    }
}

fn criterion_13() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..100u64 {
        let n = rng.random_range(4..20);
        let g = generators::random_connected(n, 0.3, Some((0.5, 2.0)), 130_000 + k);
        let other = generators::random_chain_on_support(&g, 131_000 + k);
        let (s, t) = (0, n - 1);
        let x = solve_linear_flow(&g, &ProblemSpec::new(s, t, rng.random_range(0.0..20.0))).unwrap().flow;
        let y = solve_linear_flow(&other, &ProblemSpec::new(s, t, rng.random_range(0.0..20.0))).unwrap().flow;
        let alpha: f64 = rng.random();
        let spec = ProblemSpec::new(s, t, 1.0);
        let entropy = |f| evaluate_functionals(&g, &spec, f).unwrap().entropy;
        let mixed = mix_flows(&x, &y, alpha).unwrap();
        let excess = entropy(&mixed) - (alpha * entropy(&x) + (1.0 - alpha) * entropy(&y));
        worst = worst.max(excess);
    }
    (worst <= 1e-12, format!("100 pairs, max G(mix) - convex combination {worst:.2e} (tol 1e-12)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 13] = [
        ("conservation and support", criterion_1),
        ("random-walk oracle equivalence", criterion_2),
        ("shortest-path limit", criterion_3),
        ("free-energy identities", criterion_4),
        ("sensitivity identity", criterion_5),
        ("monotone abacus", criterion_6),
        ("mean-flow structure at beta=0", criterion_7),
        ("low-temperature convergence of indices", criterion_8),
        ("electric mode", criterion_9),
        ("Monte Carlo cross-check", criterion_10),
        ("calibration round-trip", criterion_11),
        ("correlation sweep", criterion_12),
        ("entropy convexity", criterion_13),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        let tag = if ok { "PASS" } else { "FAIL" };
        failures += usize::from(!ok);
        println!("[{tag}] {:>2}. {name}: {detail} [{} ms]", k + 1, start.elapsed().as_millis());
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
