//! Depth-first branch-and-bound over devices in input order.
//!
//! The node bound is the LP relaxation of the remaining multiple-choice
//! knapsack: every remaining device starts at its cheapest admissible layer,
//! then upgrades along the upper convex hull of its (cost, profit) points
//! are taken greedily by profit gain per unit cost, the last one
//! fractionally.
//!
//! The search runs twice. The first pass finds the best objective, visiting
//! deeper layers first. The second pass visits layer vectors in
//! lexicographic order and keeps the cheapest one within the tie tolerance
//! of that objective.

use std::time::Instant;

use super::{infeasible, optimal, Engine, Prepared, SolveError, SolveOutcome};
use crate::formulation::ChoiceSet;
use crate::model::Instance;
use crate::scalar::Scalar;

pub fn solve_bnb<T: Scalar>(instance: &Instance<T>) -> Result<SolveOutcome<T>, SolveError> {
    let started = Instant::now();
    let prepared = Prepared::new(instance)?;
    if prepared.is_infeasible() {
        return Ok(infeasible(instance, Engine::Bnb, 1, started));
    }
    let bound = RelaxationBound::new(&prepared.sets);
    let mut search = Search {
        sets: &prepared.sets,
        bound: &bound,
        budget: prepared.budget,
        prune: prepared.prune,
        layers: Vec::with_capacity(prepared.sets.len()),
        nodes: 0,
        best: T::neg_infinity(),
        threshold: T::zero(),
        cheapest: None,
    };
    search.maximize(0, T::zero(), T::zero());
    if search.best == T::neg_infinity() {
        return Ok(infeasible(instance, Engine::Bnb, search.nodes, started));
    }
    search.threshold = search.best - prepared.tie;
    search.layers.clear();
    search.canonical(0, T::zero(), T::zero());
    let nodes = search.nodes;
    let (_, layers) = search.cheapest.expect("the best vector lies within the tie tolerance");
    Ok(optimal(instance, &layers, Engine::Bnb, nodes, started))
}

#[derive(Debug, Clone, Copy)]
struct Upgrade<T> {
    cost: T,
    gain: T,
}

/// Fractional-relaxation upper bound on the objective of any completion of
/// devices `depth..`.
#[derive(Debug, Clone)]
pub struct RelaxationBound<T = f64> {
    base_cost: Vec<T>,
    base_profit: Vec<T>,
    upgrades: Vec<Vec<Upgrade<T>>>,
}

impl<T: Scalar> RelaxationBound<T> {
    pub fn new(sets: &[ChoiceSet<T>]) -> Self {
        let n = sets.len();
        let mut base_cost = vec![T::zero(); n + 1];
        let mut base_profit = vec![T::zero(); n + 1];
        let mut upgrades: Vec<Vec<Upgrade<T>>> = vec![Vec::new(); n + 1];
        for k in (0..n).rev() {
            let (cost, profit, hull) = hull_upgrades(&sets[k]);
            base_cost[k] = base_cost[k + 1] + cost;
            base_profit[k] = base_profit[k + 1] + profit;
            let mut merged = upgrades[k + 1].clone();
            merged.extend(hull);
            merged.sort_by(|a, b| (b.gain * a.cost).partial_cmp(&(a.gain * b.cost)).unwrap_or(std::cmp::Ordering::Equal));
            upgrades[k] = merged;
        }
        Self { base_cost, base_profit, upgrades }
    }

    /// Cheapest possible cost of devices `depth..`.
    pub fn min_cost(&self, depth: usize) -> T {
        self.base_cost[depth]
    }

    /// Upper bound on the objective of devices `depth..` within `residual`
    /// budget, or `None` when even the cheapest completion does not fit.
    pub fn bound(&self, depth: usize, residual: T) -> Option<T> {
        let mut room = residual - self.base_cost[depth];
        if room < T::zero() {
            return None;
        }
        let mut total = self.base_profit[depth];
        for up in &self.upgrades[depth] {
            if up.cost <= room {
                room = room - up.cost;
                total = total + up.gain;
            } else {
                total = total + up.gain * room / up.cost;
                break;
            }
        }
        Some(total)
    }
}

/// Cheapest layer (highest profit among equally cheap ones) and the upgrade
/// steps along the upper convex hull from there; steps have strictly
/// positive cost and strictly decreasing gain per cost.
fn hull_upgrades<T: Scalar>(set: &ChoiceSet<T>) -> (T, T, Vec<Upgrade<T>>) {
    let mut points: Vec<(T, T)> = set.costs.iter().copied().zip(set.profits.iter().copied()).collect();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
    let (base_cost, base_profit) = points[0];
    let mut frontier: Vec<(T, T)> = vec![points[0]];
    for &(c, p) in &points[1..] {
        let &(lc, lp) = frontier.last().unwrap();
        if p <= lp || c == lc {
            continue;
        }
        while frontier.len() >= 2 {
            let (c1, p1) = frontier[frontier.len() - 2];
            let (c2, p2) = frontier[frontier.len() - 1];
            // drop the middle point when it lies on or below the chord
            if (p2 - p1) * (c - c1) <= (p - p1) * (c2 - c1) {
                frontier.pop();
            } else {
                break;
            }
        }
        frontier.push((c, p));
    }
    let steps = frontier.windows(2).map(|w| Upgrade { cost: w[1].0 - w[0].0, gain: w[1].1 - w[0].1 }).collect();
    (base_cost, base_profit, steps)
}

struct Search<'a, T> {
    sets: &'a [ChoiceSet<T>],
    bound: &'a RelaxationBound<T>,
    budget: T,
    prune: T,
    layers: Vec<usize>,
    nodes: u64,
    best: T,
    threshold: T,
    cheapest: Option<(T, Vec<usize>)>,
}

impl<T: Scalar> Search<'_, T> {
    fn maximize(&mut self, depth: usize, cost: T, objective: T) {
        self.nodes += 1;
        if depth == self.sets.len() {
            if objective > self.best {
                self.best = objective;
            }
            return;
        }
        match self.bound.bound(depth, self.budget - cost) {
            Some(b) if objective + b > self.best + self.prune => {}
            _ => return,
        }
        let set = &self.sets[depth];
        for layer in set.layers().rev() {
            let c = cost + set.cost(layer);
            if c + self.bound.min_cost(depth + 1) > self.budget {
                continue;
            }
            self.layers.push(layer);
            self.maximize(depth + 1, c, objective + set.profit(layer));
            self.layers.pop();
        }
    }

    fn canonical(&mut self, depth: usize, cost: T, objective: T) {
        self.nodes += 1;
        if depth == self.sets.len() {
            if objective >= self.threshold && self.cheapest.as_ref().is_none_or(|(c, _)| cost < *c) {
                self.cheapest = Some((cost, self.layers.clone()));
            }
            return;
        }
        // later leaves are lexicographically larger, so only a strictly
        // cheaper one can replace the incumbent
        if let Some((best_cost, _)) = &self.cheapest {
            if cost + self.bound.min_cost(depth) >= *best_cost {
                return;
            }
        }
        match self.bound.bound(depth, self.budget - cost) {
            Some(b) if objective + b >= self.threshold - self.prune => {}
            _ => return,
        }
        let set = &self.sets[depth];
        for layer in set.layers() {
            let c = cost + set.cost(layer);
            if c + self.bound.min_cost(depth + 1) > self.budget {
                continue;
            }
            self.layers.push(layer);
            self.canonical(depth + 1, c, objective + set.profit(layer));
            self.layers.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::build_profit_matrix;
    use crate::model::tests::six_device_instance;
    use crate::solver::{solve_bruteforce, SolveStatus};

    #[test]
    fn matches_bruteforce_at_fifteen() {
        let inst = six_device_instance(15.0);
        let a = solve_bnb(&inst).unwrap();
        let b = solve_bruteforce(&inst).unwrap();
        assert!(a.same_solution(&b), "{a:?} vs {b:?}");
    }

    #[test]
    fn saturated_budget_has_integral_root() {
        let inst = six_device_instance(40.0);
        let sets = build_profit_matrix(&inst);
        let rb = RelaxationBound::new(&sets);
        let root = rb.bound(0, 40.0).unwrap();
        let all_max: f64 = sets.iter().map(|s| s.profit(s.max_layer)).sum();
        assert!((root - all_max).abs() < 1e-12);
        let out = solve_bnb(&inst).unwrap();
        assert_eq!(out.allocation.unwrap().layers(), vec![4, 3, 4, 4, 4, 4]);
    }

    #[test]
    fn infeasible_at_root() {
        let out = solve_bnb(&six_device_instance(5.0)).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
        assert_eq!(out.stats.work, 1);
    }

    #[test]
    fn hull_skips_dominated_and_concave_points() {
        let set = ChoiceSet {
            device_id: "x".into(),
            min_layer: 1,
            max_layer: 4,
            // layer 2 lies below the chord from layer 1 to layer 3
            profits: vec![1.0, 1.5, 4.0, 4.5],
            costs: vec![1.0, 2.0, 3.0, 10.0],
        };
        let (c, p, steps) = hull_upgrades(&set);
        assert_eq!((c, p), (1.0, 1.0));
        assert_eq!(steps.len(), 2);
        assert_eq!((steps[0].cost, steps[0].gain), (2.0, 3.0));
        assert_eq!((steps[1].cost, steps[1].gain), (7.0, 0.5));
    }

    #[test]
    fn hull_handles_non_monotone_costs() {
        let set = ChoiceSet {
            device_id: "x".into(),
            min_layer: 1,
            max_layer: 3,
            profits: vec![1.0, 2.0, 3.0],
            costs: vec![5.0, 1.0, 5.0],
        };
        let (c, p, steps) = hull_upgrades(&set);
        assert_eq!((c, p), (1.0, 2.0));
        assert_eq!(steps.len(), 1);
        assert_eq!((steps[0].cost, steps[0].gain), (4.0, 1.0));
    }
}
