//! Reading a temperature off observed paths.
//!
//! Two rules are provided: match the energy of an observed flow
//! ([`calibrate_from_energy`]), or match an observed trip length against the
//! total-time curve ([`build_abacus`], [`calibrate_from_total_time`]).

use rayon::prelude::*;

use crate::centrality::check_grid;
use crate::error::{Error, Result};
use crate::graph::{Graph, ProblemSpec};
use crate::solver::system::{costs_to_target, TargetSystem};
use crate::solver::{evaluate_functionals, solve_linear_flow, Flow};

/// Temperature bracket searched by [`calibrate_from_energy`].
pub const TEMPERATURE_BRACKET: (f64, f64) = (1e-6, 1e3);

const MONOTONICITY_POINTS: usize = 41;
const DENSE_POINTS: usize = 400;

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// 40 log-spaced values over `[1e-3, 50]`.
pub fn default_beta_grid() -> Vec<f64> {
    log_grid(1e-3, 50.0, 40)
}

/// Expected trip length `x_..` from `s` to `t` as a function of beta.
#[derive(Debug, Clone, PartialEq)]
pub struct AbacusCurve {
    pub betas: Vec<f64>,
    pub total_times: Vec<f64>,
    pub graph_id: Option<String>,
    pub s: usize,
    pub t: usize,
}

impl AbacusCurve {
    pub fn with_graph_id(mut self, id: impl Into<String>) -> Self {
        self.graph_id = Some(id.into());
        self
    }

    pub fn is_non_increasing(&self) -> bool {
        self.total_times.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn build_abacus(graph: &Graph, s: usize, t: usize, beta_grid: &[f64]) -> Result<AbacusCurve> {
    check_grid(beta_grid)?;
    for &beta in beta_grid {
        ProblemSpec::new(s, t, beta).validate(graph)?;
    }
    let total_times = beta_grid
        .par_iter()
        .map(|&beta| Ok(TargetSystem::new(graph, t, beta, graph.r())?.total_times()?[s]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(AbacusCurve {
        betas: beta_grid.to_vec(),
        total_times,
        graph_id: None,
        s,
        t,
    })
}

/// Inverts the curve at `observed_time`, interpolating linearly in `ln beta`
/// (linearly in `beta` on a segment starting at `beta = 0`). Returns the
/// temperature `1 / beta_hat`. A value found exactly on the curve maps to its
/// grid beta (the largest one if the curve is flat there).
pub fn calibrate_from_total_time(curve: &AbacusCurve, observed_time: f64) -> Result<f64> {
    let times = &curve.total_times;
    let min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(observed_time >= min && observed_time <= max) {
        return Err(Error::OutsideCurveRange {
            observed: observed_time,
            min,
            max,
        });
    }
    if let Some(k) = times.iter().rposition(|&x| x == observed_time) {
        return Ok(1.0 / curve.betas[k]);
    }
    for k in 0..times.len() - 1 {
        let (a, b) = (times[k], times[k + 1]);
        if (a - observed_time) * (b - observed_time) < 0.0 {
            let frac = (observed_time - a) / (b - a);
            let (b0, b1) = (curve.betas[k], curve.betas[k + 1]);
            let beta = if b0 > 0.0 {
                (b0.ln() + frac * (b1.ln() - b0.ln())).exp()
            } else {
                b0 + frac * (b1 - b0)
            };
            return Ok(1.0 / beta);
        }
    }
    unreachable!("observed time lies within the curve range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketEnd {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub t_hat: f64,
    pub beta_hat: f64,
    /// `|U(X(T_hat)) - U(observed)|`.
    pub residual: f64,
    pub bracket: (f64, f64),
    /// Whether `U(X(T))` was found non-decreasing over the bracket.
    pub monotone: bool,
    /// Set when the observed energy lies beyond the bracket's energy range
    /// and `t_hat` was clamped to that end.
    pub pinned: Option<BracketEnd>,
    /// Every temperature reproducing the observed energy, when the curve
    /// had to be searched on a dense grid.
    pub crossings: Vec<f64>,
    pub diagnostic: Option<String>,
}

fn energy_at(graph: &Graph, s: usize, t: usize, temperature: f64) -> Result<f64> {
    Ok(solve_linear_flow(graph, &ProblemSpec::new(s, t, 1.0 / temperature))?
        .diagnostics
        .energy)
}

/// Bisection in `ln T` for `U(T) = target` on `[lo, hi]`, assuming
/// `U(lo) - target` and `U(hi) - target` have opposite signs.
fn bisect(graph: &Graph, s: usize, t: usize, target: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = energy_at(graph, s, t, lo)? - target;
    for _ in 0..200 {
        if hi / lo <= 1.0 + 1e-13 {
            break;
        }
        let mid = (lo * hi).sqrt();
        let f_mid = energy_at(graph, s, t, mid)? - target;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Temperature at which the optimal flow has the same energy as `observed`.
///
/// `U(observed)` must lie between the least-cost path energy and the
/// random-walk energy. Values beyond the energies reached at the bracket
/// ends pin `t_hat` to that end. Monotonicity of `U(X(T))` is checked on a
/// log grid first; bisection is used when it holds and a dense grid search
/// reporting every crossing otherwise.
pub fn calibrate_from_energy(graph: &Graph, s: usize, t: usize, observed: &Flow) -> Result<CalibrationReport> {
    ProblemSpec::new(s, t, 1.0).validate(graph)?;
    if observed.s() != s || observed.t() != t || observed.n() != graph.n() {
        return Err(Error::IncompatibleEndpoints);
    }
    let u_obs = evaluate_functionals(graph, &ProblemSpec::new(s, t, 1.0), observed)?.energy / observed.value();
    let shortest = costs_to_target(graph, graph.r(), t)[s];
    let random_walk = solve_linear_flow(graph, &ProblemSpec::new(s, t, 0.0))?.diagnostics.energy;
    let tol = 1e-9 * (1.0 + random_walk.abs());
    if u_obs < shortest - tol || u_obs > random_walk + tol {
        return Err(Error::TargetOutsideRange {
            observed: u_obs,
            lo: shortest,
            hi: random_walk,
        });
    }

    let (t_lo, t_hi) = TEMPERATURE_BRACKET;
    let grid = log_grid(t_lo, t_hi, MONOTONICITY_POINTS);
    let energies = grid
        .par_iter()
        .map(|&temp| energy_at(graph, s, t, temp))
        .collect::<Result<Vec<f64>>>()?;
    let slack = 1e-12 * (1.0 + random_walk.abs());
    let monotone = energies.windows(2).all(|w| w[1] >= w[0] - slack);
    let (u_lo, u_hi) = (energies[0], *energies.last().unwrap());

    let report = |t_hat: f64, pinned, crossings, diagnostic| -> Result<CalibrationReport> {
        Ok(CalibrationReport {
            t_hat,
            beta_hat: 1.0 / t_hat,
            residual: (energy_at(graph, s, t, t_hat)? - u_obs).abs(),
            bracket: TEMPERATURE_BRACKET,
            monotone,
            pinned,
            crossings,
            diagnostic,
        })
    };

    if monotone {
        if u_obs <= u_lo {
            let note = format!("observed energy {u_obs} is at or below U(T = {t_lo}) = {u_lo}; pinned to the lower bracket");
            return report(t_lo, Some(BracketEnd::Lower), Vec::new(), Some(note));
        }
        if u_obs >= u_hi {
            let note = format!("observed energy {u_obs} is at or above U(T = {t_hi}) = {u_hi}; pinned to the upper bracket");
            return report(t_hi, Some(BracketEnd::Upper), Vec::new(), Some(note));
        }
        let k = energies.iter().position(|&u| u >= u_obs).unwrap();
        if energies[k] == u_obs {
            return report(grid[k], None, Vec::new(), None);
        }
        let t_hat = bisect(graph, s, t, u_obs, grid[k - 1], grid[k])?;
        return report(t_hat, None, Vec::new(), None);
    }

    let dense = log_grid(t_lo, t_hi, DENSE_POINTS);
    let values = dense
        .par_iter()
        .map(|&temp| energy_at(graph, s, t, temp))
        .collect::<Result<Vec<f64>>>()?;
    let mut crossings = Vec::new();
    for k in 0..dense.len() - 1 {
        let (a, b) = (values[k] - u_obs, values[k + 1] - u_obs);
        if a == 0.0 {
            crossings.push(dense[k]);
        } else if a * b < 0.0 {
            crossings.push(bisect(graph, s, t, u_obs, dense[k], dense[k + 1])?);
        }
    }
    if *values.last().unwrap() == u_obs {
        crossings.push(t_hi);
    }
    let Some(&first) = crossings.first() else {
        return Err(Error::NonBracketed { observed: u_obs });
    };
    let note = format!("U(X(T)) is not monotone over the bracket; {} crossing(s) found", crossings.len());
    report(first, None, crossings, Some(note))
}
