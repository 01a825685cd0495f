//! Multiple-choice knapsack dynamic program over exact integer costs.
//!
//! `forward[k][c]` is the best objective of the first `k` devices at total
//! unit cost exactly `c`, accumulated in device order, so its maximum is
//! bit-identical to the best objective found by enumeration. A suffix table
//! drives the lexicographic reconstruction of the canonical allocation.

use std::time::Instant;

use super::{infeasible, optimal, Engine, Prepared, SolveError, SolveOutcome, SolverOptions};
use crate::formulation::ChoiceSet;
use crate::model::Instance;
use crate::scalar::Scalar;

pub fn solve_dp<T: Scalar>(instance: &Instance<T>) -> Result<SolveOutcome<T>, SolveError> {
    solve_with(instance, &SolverOptions::default())
}

struct UnitSet<T> {
    min_layer: usize,
    costs: Vec<usize>,
    profits: Vec<T>,
}

impl<T: Scalar> UnitSet<T> {
    fn from_choice(set: &ChoiceSet<T>) -> Option<Self> {
        let costs = set.costs.iter().map(|c| c.to_usize()).collect::<Option<Vec<_>>>()?;
        Some(Self { min_layer: set.min_layer, costs, profits: set.profits.clone() })
    }

    fn options(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.costs.iter().zip(&self.profits).enumerate().map(move |(k, (&c, &p))| (self.min_layer + k, c, p))
    }
}

pub(super) fn solve_with<T: Scalar>(
    instance: &Instance<T>,
    options: &SolverOptions,
) -> Result<SolveOutcome<T>, SolveError> {
    let started = Instant::now();
    let prepared = Prepared::new(instance)?;
    if prepared.scale.is_none() {
        return Err(SolveError::NonIntegerCosts);
    }
    if prepared.is_infeasible() {
        return Ok(infeasible(instance, Engine::Dp, 0, started));
    }
    let sets: Vec<UnitSet<T>> =
        prepared.sets.iter().map(UnitSet::from_choice).collect::<Option<_>>().ok_or(SolveError::NonIntegerCosts)?;

    // spending above the most expensive allocation is pointless
    let max_total: u128 = sets.iter().map(|s| s.costs.iter().copied().max().unwrap_or(0) as u128).sum();
    let budget_units = prepared.budget.to_u128().unwrap_or(u128::MAX);
    let cap = budget_units.min(max_total);
    let states = (sets.len() as u128 + 1) * (cap + 1);
    if states > options.dp_state_limit as u128 / 2 {
        return Err(SolveError::DpTableTooLarge { states: states * 2, limit: options.dp_state_limit });
    }
    let cap = cap as usize;
    let n = sets.len();
    let neg = T::neg_infinity();
    let mut work = 0u64;

    let mut forward = vec![vec![neg; cap + 1]; n + 1];
    forward[0][0] = T::zero();
    for (k, set) in sets.iter().enumerate() {
        let (prev, next) = forward.split_at_mut(k + 1);
        relax(&prev[k], &mut next[0], set, &mut work);
    }

    let mut suffix = vec![vec![neg; cap + 1]; n + 1];
    suffix[n][0] = T::zero();
    for k in (0..n).rev() {
        let (head, tail) = suffix.split_at_mut(k + 1);
        relax(&tail[0], &mut head[k], &sets[k], &mut work);
    }

    let last = &forward[n];
    let best = last.iter().copied().fold(neg, T::max);
    if best == neg {
        return Ok(infeasible(instance, Engine::Dp, work, started));
    }
    let threshold = best - prepared.tie;
    let target = last.iter().position(|&v| v >= threshold).expect("best objective is reachable");

    let mut layers = Vec::with_capacity(n);
    let mut prefix = T::zero();
    let mut remaining = target;
    for k in 0..n {
        let (layer, cost, profit) = sets[k]
            .options()
            .find(|&(_, c, p)| {
                c <= remaining && completes(&sets[k + 1..], &suffix[k + 1], prefix + p, remaining - c, threshold)
            })
            .expect("a completion reaching the threshold exists at every step");
        layers.push(layer);
        prefix = prefix + profit;
        remaining -= cost;
    }
    debug_assert_eq!(remaining, 0);
    Ok(optimal(instance, &layers, Engine::Dp, work, started))
}

/// One knapsack stage: `to[c] = max over options of from[c - cost] + profit`.
fn relax<T: Scalar>(from: &[T], to: &mut [T], set: &UnitSet<T>, work: &mut u64) {
    for (c, slot) in to.iter_mut().enumerate() {
        for (_, cost, profit) in set.options() {
            if cost <= c {
                let prev = from[c - cost];
                if prev > T::neg_infinity() {
                    *work += 1;
                    let v = prev + profit;
                    if v > *slot {
                        *slot = v;
                    }
                }
            }
        }
    }
}

/// Whether some completion of the remaining devices at exactly `remaining`
/// units reaches `threshold` when summed forward from `start`.
///
/// The suffix table sums in reverse order, which can differ from the
/// forward sum by a few ulps; near the threshold the forward maximum is
/// recomputed exactly.
fn completes<T: Scalar>(rest: &[UnitSet<T>], suffix: &[T], start: T, remaining: usize, threshold: T) -> bool {
    let tail = suffix[remaining];
    if tail == T::neg_infinity() {
        return false;
    }
    let estimate = start + tail;
    let margin = T::lit(1e-12) * T::one().max(threshold.abs());
    if (estimate - threshold).abs() > margin {
        return estimate >= threshold;
    }
    let mut row = vec![T::neg_infinity(); remaining + 1];
    row[0] = start;
    for set in rest {
        let mut next = vec![T::neg_infinity(); remaining + 1];
        let mut scratch = 0;
        relax(&row, &mut next, set, &mut scratch);
        row = next;
    }
    row[remaining] >= threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::six_device_instance;
    use crate::solver::{solve_bruteforce, SolveStatus};

    #[test]
    fn matches_bruteforce_at_ten() {
        let inst = six_device_instance(10.0);
        let dp = solve_dp(&inst).unwrap();
        let bf = solve_bruteforce(&inst).unwrap();
        assert!(dp.same_solution(&bf), "{dp:?} vs {bf:?}");
    }

    #[test]
    fn minimum_budget_puts_everyone_at_minimum() {
        let inst = six_device_instance(9.0);
        let alloc = solve_dp(&inst).unwrap().allocation.unwrap();
        let mins: Vec<usize> = inst.devices.iter().map(|d| inst.min_layer(d)).collect();
        assert_eq!(alloc.layers(), mins);
    }

    #[test]
    fn infeasible_at_five() {
        assert_eq!(solve_dp(&six_device_instance(5.0)).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn rejects_irrational_costs() {
        let mut inst = six_device_instance(10.0);
        inst.schedule.layers[1].cost = std::f64::consts::E;
        assert_eq!(solve_dp(&inst).unwrap_err(), SolveError::NonIntegerCosts);
    }

    #[test]
    fn huge_budget_is_capped() {
        let out = solve_dp(&six_device_instance(1e12)).unwrap();
        assert_eq!(out.allocation.unwrap().layers(), vec![4, 3, 4, 4, 4, 4]);
    }

    #[test]
    fn exact_completion_agrees_with_table() {
        let inst = six_device_instance(15.0);
        let prepared = Prepared::new(&inst).unwrap();
        let sets: Vec<UnitSet<f64>> = prepared.sets.iter().map(|s| UnitSet::from_choice(s).unwrap()).collect();
        // forced slow path: threshold equal to the table estimate
        let mut suffix = vec![vec![f64::NEG_INFINITY; 40]; sets.len() + 1];
        suffix[sets.len()][0] = 0.0;
        let mut w = 0;
        for k in (0..sets.len()).rev() {
            let (head, tail) = suffix.split_at_mut(k + 1);
            relax(&tail[0], &mut head[k], &sets[k], &mut w);
        }
        let estimate = suffix[0][12];
        assert!(completes(&sets, &suffix[0], 0.0, 12, estimate - 1e-15));
        assert!(!completes(&sets, &suffix[0], 0.0, 12, estimate + 1e-6));
    }
}
