//! Temperature-controlled source-target flows on weighted graphs.
//!
//! At inverse temperature `beta = 0` the optimal flow is the random walk
//! defined by the transition matrix `W`; as `beta` grows it concentrates on
//! least-resistance paths. On top of the solver sit all-pairs flow
//! centralities, temperature calibration from observed paths, and a set of
//! independent reference implementations used for cross-checking.

pub mod calibration;
pub mod centrality;
pub mod error;
pub mod graph;
pub mod io;
pub mod oracles;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{simple_symmetric_graph, validate_graph, Graph, ProblemSpec};
pub use solver::{
    evaluate_functionals, mix_flows, scale_flow, solve, solve_linear_flow, solve_power_flow,
    verify_min_free_energy_identity, FixedPointOptions, Flow, FunctionalValues, PowerSolution, Solution,
    SolverDiagnostics,
};
