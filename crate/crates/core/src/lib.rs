//! Exact allocation of monitoring depth to network devices.
//!
//! Every device is monitored up to exactly one cumulative inspection layer
//! (Ethernet, then IP, transport and application). Deeper layers detect a
//! larger fraction of attacks but cost more. Given a global resource budget,
//! a minimum layer for critical devices and a per-device maximum layer, the
//! crate finds the allocation maximizing the expected weighted number of
//! detected attacks, `sum_i w_i * p_i * d_layer(i)`.
//!
//! The problem is a bounded multiple-choice knapsack. Three exact engines
//! are provided ([`solver::solve_bruteforce`], [`solver::solve_dp`],
//! [`solver::solve_bnb`]); they agree on status, objective and assignment
//! under a shared canonical tie-break.
//!
//! All numeric code is generic over a [`Scalar`] (`f32` or `f64`). The
//! `*64` aliases below are the double-precision instantiations used by the
//! command-line tool.

pub mod formulation;
pub mod model;
pub mod montecarlo;
mod scalar;
pub mod solver;
pub mod sweep;

pub use formulation::{admissible_layers, build_profit_matrix, export_lp, write_lp, ChoiceSet, LpError};
pub use model::{
    min_feasible_budget, validate_instance, Allocation, Assignment, Device, Instance, Layer, LayerSchedule,
    ModelError,
};
pub use montecarlo::{estimate_detection, estimate_detection_paired, PairedSimulation, SimulationResult};
pub use scalar::Scalar;
pub use solver::{solve, Engine, SolveError, SolveOutcome, SolveStats, SolveStatus, SolverOptions};
pub use sweep::{contribution_breakdown, run_sweep, Contribution, EntryStatus, SweepEntry, SweepReport};

pub type LayerSchedule64 = LayerSchedule<f64>;
pub type Device64 = Device<f64>;
pub type Instance64 = Instance<f64>;
pub type Allocation64 = Allocation<f64>;
pub type SolveOutcome64 = SolveOutcome<f64>;
pub type SweepReport64 = SweepReport<f64>;

pub type LayerSchedule32 = LayerSchedule<f32>;
pub type Device32 = Device<f32>;
pub type Instance32 = Instance<f32>;
pub type Allocation32 = Allocation<f32>;
pub type SolveOutcome32 = SolveOutcome<f32>;
pub type SweepReport32 = SweepReport<f32>;
