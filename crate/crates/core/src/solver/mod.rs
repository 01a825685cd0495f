//! Exact solving engines.
//!
//! All engines return the same canonical optimum: among allocations whose
//! objective is within [`TIE_TOLERANCE`] of the best, the one with minimal
//! total cost, then the lexicographically smallest layer vector in device
//! input order.
//!
//! Costs are handled in "units": when every layer cost becomes integral
//! after multiplying by a power of ten (at most 10^3), the engines work on
//! those exact integers so that budget checks and cost ties are free of
//! rounding. Otherwise the raw costs are used.

mod bnb;
mod bruteforce;
mod dp;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::{build_profit_matrix, ChoiceSet};
use crate::model::{min_feasible_budget, Allocation, Instance, ModelError};
use crate::scalar::Scalar;

pub use bnb::{solve_bnb, RelaxationBound};
pub use bruteforce::solve_bruteforce;
pub use dp::solve_dp;

/// Two objectives closer than this are considered tied.
pub const TIE_TOLERANCE: f64 = 1e-9;
/// Slack used when pruning search nodes by their objective bound.
pub const PRUNE_TOLERANCE: f64 = 1e-12;
/// Largest power of ten tried when scaling costs to integers.
pub const MAX_COST_SCALE_EXPONENT: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[serde(rename = "brute")]
    BruteForce,
    Dp,
    Bnb,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::BruteForce, Engine::Dp, Engine::Bnb];

    pub fn name(self) -> &'static str {
        match self {
            Engine::BruteForce => "brute",
            Engine::Dp => "dp",
            Engine::Bnb => "bnb",
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brute" | "bruteforce" => Ok(Engine::BruteForce),
            "dp" => Ok(Engine::Dp),
            "bnb" => Ok(Engine::Bnb),
            other => Err(format!("unknown engine `{other}` (expected brute, dp or bnb)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    /// Maximum number of layer vectors brute force may enumerate.
    pub enumeration_guard: u64,
    /// Maximum number of cells in one dynamic-programming table.
    pub dp_state_limit: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { enumeration_guard: 10_000_000, dp_state_limit: 200_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("brute force would enumerate {combinations} layer vectors, above the guard of {guard}")]
    EnumerationTooLarge { combinations: u128, guard: u64 },
    #[error("layer costs cannot be scaled to integers by a power of ten up to 10^{MAX_COST_SCALE_EXPONENT}")]
    NonIntegerCosts,
    #[error("dynamic programming table would need {states} states, above the limit of {limit}")]
    DpTableTooLarge { states: u128, limit: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

/// Work counters of one solve. `work` counts enumerated vectors, table
/// transitions or search nodes depending on the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub work: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<T = f64> {
    pub status: SolveStatus,
    /// Present iff `status` is `Optimal`.
    pub allocation: Option<Allocation<T>>,
    /// Cheapest possible allocation cost, reported as a diagnostic.
    pub min_feasible_budget: T,
    pub engine: Engine,
    pub stats: SolveStats,
}

impl<T: Scalar> SolveOutcome<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn objective(&self) -> Option<T> {
        self.allocation.as_ref().map(|a| a.objective)
    }

    /// Status, objective bits and layer vector; the fields every engine
    /// must agree on.
    pub fn same_solution(&self, other: &Self) -> bool {
        self.status == other.status
            && match (&self.allocation, &other.allocation) {
                (None, None) => true,
                (Some(a), Some(b)) => a == b,
                _ => false,
            }
    }
}

/// Solves `instance` with the chosen engine.
pub fn solve<T: Scalar>(
    instance: &Instance<T>,
    engine: Engine,
    options: &SolverOptions,
) -> Result<SolveOutcome<T>, SolveError> {
    match engine {
        Engine::BruteForce => bruteforce::solve_with(instance, options),
        Engine::Dp => dp::solve_with(instance, options),
        Engine::Bnb => solve_bnb(instance),
    }
}

/// Instance in knapsack form with costs expressed in units.
pub(crate) struct Prepared<T> {
    pub sets: Vec<ChoiceSet<T>>,
    pub budget: T,
    /// `Some(k)` when costs were scaled by `10^k` to exact integers.
    pub scale: Option<u32>,
    pub min_cost: T,
    pub tie: T,
    pub prune: T,
}

impl<T: Scalar> Prepared<T> {
    pub fn new(instance: &Instance<T>) -> Result<Self, SolveError> {
        instance.validate()?;
        let mut sets = build_profit_matrix(instance);
        let costs: Vec<T> = instance.schedule.layers.iter().map(|l| l.cost).collect();
        let scale = integral_scale(&costs);
        let budget = match scale {
            Some(k) => {
                let factor = T::lit(10f64.powi(k as i32));
                for set in &mut sets {
                    for c in &mut set.costs {
                        *c = (*c * factor).round();
                    }
                }
                // with integral costs, flooring the budget leaves the feasible set unchanged
                let b = instance.budget * factor;
                let nearest = b.round();
                if (b - nearest).abs() <= T::lit(1e-9) * T::one().max(nearest) {
                    nearest
                } else {
                    b.floor()
                }
            }
            None => instance.budget,
        };
        let min_cost = sets.iter().map(|s| s.costs.iter().copied().fold(T::infinity(), T::min)).fold(T::zero(), |a, c| a + c);
        Ok(Self { sets, budget, scale, min_cost, tie: T::lit(TIE_TOLERANCE), prune: T::lit(PRUNE_TOLERANCE) })
    }

    pub fn is_infeasible(&self) -> bool {
        self.min_cost > self.budget
    }

    /// Unit cost and objective of a layer vector, summed in device order.
    pub fn evaluate(&self, layers: &[usize]) -> (T, T) {
        let mut cost = T::zero();
        let mut objective = T::zero();
        for (set, &l) in self.sets.iter().zip(layers) {
            cost = cost + set.cost(l);
            objective = objective + set.profit(l);
        }
        (cost, objective)
    }
}

/// Smallest `k <= MAX_COST_SCALE_EXPONENT` such that every cost times `10^k`
/// is an exactly representable integer.
fn integral_scale<T: Scalar>(costs: &[T]) -> Option<u32> {
    let limit = T::one() / T::epsilon();
    (0..=MAX_COST_SCALE_EXPONENT).find(|&k| {
        let factor = T::lit(10f64.powi(k as i32));
        costs.iter().all(|&c| {
            let x = c * factor;
            let r = x.round();
            r < limit && (x - r).abs() <= T::lit(1e-9) * T::one().max(r)
        })
    })
}

pub(crate) fn infeasible<T: Scalar>(instance: &Instance<T>, engine: Engine, work: u64, started: Instant) -> SolveOutcome<T> {
    SolveOutcome {
        status: SolveStatus::Infeasible,
        allocation: None,
        min_feasible_budget: min_feasible_budget(instance),
        engine,
        stats: SolveStats { work, elapsed: started.elapsed() },
    }
}

pub(crate) fn optimal<T: Scalar>(
    instance: &Instance<T>,
    layers: &[usize],
    engine: Engine,
    work: u64,
    started: Instant,
) -> SolveOutcome<T> {
    SolveOutcome {
        status: SolveStatus::Optimal,
        allocation: Some(Allocation::from_layers(instance, layers)),
        min_feasible_budget: min_feasible_budget(instance),
        engine,
        stats: SolveStats { work, elapsed: started.elapsed() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::six_device_instance;

    #[test]
    fn scale_detection() {
        assert_eq!(integral_scale(&[1.0, 2.0, 4.0, 7.0]), Some(0));
        assert_eq!(integral_scale(&[0.5, 1.25]), Some(2));
        assert_eq!(integral_scale(&[0.1, 0.2, 0.3]), Some(1));
        assert_eq!(integral_scale(&[0.0001]), None);
        assert_eq!(integral_scale(&[std::f64::consts::PI]), None);
    }

    #[test]
    fn fractional_budget_is_floored_for_integral_costs() {
        let p = Prepared::new(&six_device_instance(10.7)).unwrap();
        assert_eq!(p.scale, Some(0));
        assert_eq!(p.budget, 10.0);
        assert_eq!(p.min_cost, 9.0);
    }

    #[test]
    fn decimal_costs_are_scaled() {
        let mut inst = six_device_instance(1.0);
        for (layer, c) in inst.schedule.layers.iter_mut().zip([0.1, 0.2, 0.4, 0.7]) {
            layer.cost = c;
        }
        let p = Prepared::new(&inst).unwrap();
        assert_eq!(p.scale, Some(1));
        assert_eq!(p.budget, 10.0);
        assert_eq!(p.sets[1].costs, vec![2.0, 4.0]);
    }

    #[test]
    fn engine_names_round_trip() {
        for e in Engine::ALL {
            assert_eq!(e.name().parse::<Engine>().unwrap(), e);
        }
        assert!("simplex".parse::<Engine>().is_err());
    }
}
