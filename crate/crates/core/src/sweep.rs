//! Budget sweeps: the same instance solved at a list of budgets, with the
//! layer chosen per device and each device's share of the objective.

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{Allocation, Instance, ModelError};
use crate::scalar::Scalar;
use crate::solver::{solve, Engine, SolveOutcome, SolverOptions};

/// A device's term `w * p * d_layer` of the objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution<T = f64> {
    pub device_id: String,
    pub layer: usize,
    pub contribution: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum EntryStatus<T = f64> {
    Optimal { allocation: Allocation<T>, contributions: Vec<Contribution<T>> },
    Infeasible { min_feasible_budget: T },
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry<T = f64> {
    pub budget: T,
    #[serde(flatten)]
    pub status: EntryStatus<T>,
}

impl<T: Scalar> SweepEntry<T> {
    pub fn allocation(&self) -> Option<&Allocation<T>> {
        match &self.status {
            EntryStatus::Optimal { allocation, .. } => Some(allocation),
            _ => None,
        }
    }

    pub fn objective(&self) -> Option<T> {
        self.allocation().map(|a| a.objective)
    }

    pub fn status_name(&self) -> &'static str {
        match self.status {
            EntryStatus::Optimal { .. } => "optimal",
            EntryStatus::Infeasible { .. } => "infeasible",
            EntryStatus::Error { .. } => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport<T = f64> {
    pub engine: Engine,
    /// Sorted by ascending budget, one per requested budget.
    pub entries: Vec<SweepEntry<T>>,
}

/// Per-device objective terms of `allocation`, in instance device order.
pub fn contribution_breakdown<T: Scalar>(
    allocation: &Allocation<T>,
    instance: &Instance<T>,
) -> Result<Vec<Contribution<T>>, ModelError> {
    let layers = allocation.layers_for(instance)?;
    Ok(instance
        .devices
        .iter()
        .zip(layers)
        .map(|(device, layer)| Contribution {
            device_id: device.id.clone(),
            layer,
            contribution: device.profit(&instance.schedule, layer),
        })
        .collect())
}

/// Solves `instance` once per budget (the instance's own budget is ignored).
///
/// Budgets are solved independently and in parallel; the report is
/// assembled in ascending budget order so the output does not depend on
/// scheduling. A failing budget becomes an `Error` entry.
pub fn run_sweep<T: Scalar>(
    instance: &Instance<T>,
    budgets: &[T],
    engine: Engine,
    options: &SolverOptions,
) -> SweepReport<T> {
    let mut sorted = budgets.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let entries = sorted
        .par_iter()
        .map(|&budget| {
            let inst = instance.with_budget(budget);
            SweepEntry { budget, status: entry_status(&inst, solve(&inst, engine, options)) }
        })
        .collect();
    SweepReport { engine, entries }
}

fn entry_status<T: Scalar>(
    instance: &Instance<T>,
    outcome: Result<SolveOutcome<T>, crate::solver::SolveError>,
) -> EntryStatus<T> {
    match outcome {
        Ok(out) => match out.allocation {
            Some(allocation) => {
                let contributions = contribution_breakdown(&allocation, instance).expect("solver output matches instance");
                EntryStatus::Optimal { allocation, contributions }
            }
            None => EntryStatus::Infeasible { min_feasible_budget: out.min_feasible_budget },
        },
        Err(e) => EntryStatus::Error { message: e.to_string() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::six_device_instance;
    use crate::model::Assignment;

    const SIX_DEVICE_BUDGETS: [f64; 8] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];

    #[test]
    fn six_device_sweep_statuses() {
        let report = run_sweep(&six_device_instance(0.0), &SIX_DEVICE_BUDGETS, Engine::Dp, &SolverOptions::default());
        assert_eq!(report.entries.len(), 8);
        assert_eq!(report.entries[0].status, EntryStatus::Infeasible { min_feasible_budget: 9.0 });
        assert!(report.entries[1..].iter().all(|e| e.status_name() == "optimal"));
    }

    #[test]
    fn saturated_contributions() {
        let report = run_sweep(&six_device_instance(0.0), &[40.0], Engine::Bnb, &SolverOptions::default());
        let EntryStatus::Optimal { allocation, contributions } = &report.entries[0].status else {
            panic!("expected optimal");
        };
        let expected = [0.9481, 1.3896, 0.21375, 4.9115, 5.8311, 4.7215];
        for (c, e) in contributions.iter().zip(expected) {
            assert!((c.contribution - e).abs() < 1e-12, "{c:?}");
        }
        let sum = contributions.iter().fold(0.0, |acc, c| acc + c.contribution);
        assert_eq!(sum, allocation.objective);
        assert!((allocation.objective - 18.01555).abs() < 1e-9);
    }

    #[test]
    fn budgets_are_sorted() {
        let report = run_sweep(&six_device_instance(0.0), &[20.0, 9.0, 5.0], Engine::BruteForce, &SolverOptions::default());
        let budgets: Vec<f64> = report.entries.iter().map(|e| e.budget).collect();
        assert_eq!(budgets, vec![5.0, 9.0, 20.0]);
        assert!((report.entries[1].objective().unwrap() - 5.9872).abs() < 1e-9);
    }

    #[test]
    fn negative_budget_becomes_error_entry() {
        let report = run_sweep(&six_device_instance(0.0), &[-1.0, 10.0], Engine::Dp, &SolverOptions::default());
        assert_eq!(report.entries[0].status_name(), "error");
        assert_eq!(report.entries[1].status_name(), "optimal");
    }

    #[test]
    fn breakdown_values() {
        let inst = six_device_instance(40.0);
        let alloc = Allocation::from_layers(&inst, &[4, 3, 4, 4, 4, 4]);
        let parts = contribution_breakdown(&alloc, &inst).unwrap();
        assert!((parts[3].contribution - 4.9115).abs() < 1e-12);

        let mut zero = inst.clone();
        zero.devices[2].weight = 0.0;
        let parts = contribution_breakdown(&alloc, &zero).unwrap();
        assert_eq!(parts[2].contribution, 0.0);

        let low = Allocation::from_layers(&inst, &[1, 2, 2, 2, 1, 1]);
        let parts = contribution_breakdown(&low, &inst).unwrap();
        let sum = parts.iter().fold(0.0, |acc, c| acc + c.contribution);
        assert!((sum - 5.9872).abs() < 1e-12);
    }

    #[test]
    fn breakdown_rejects_unknown_device() {
        let inst = six_device_instance(40.0);
        let mut alloc = Allocation::from_layers(&inst, &[4, 3, 4, 4, 4, 4]);
        alloc.assignment[0] = Assignment { device_id: "ghost".into(), layer: 1 };
        assert_eq!(contribution_breakdown(&alloc, &inst), Err(ModelError::UnknownDevice("ghost".into())));
    }
}
