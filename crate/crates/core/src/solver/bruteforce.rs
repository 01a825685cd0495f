//! Exhaustive enumeration over the Cartesian product of admissible layers.
//! Serves as the reference oracle for the other engines.

use std::time::Instant;

use super::{infeasible, optimal, Engine, Prepared, SolveError, SolveOutcome, SolverOptions};
use crate::model::Instance;
use crate::scalar::Scalar;

pub fn solve_bruteforce<T: Scalar>(instance: &Instance<T>) -> Result<SolveOutcome<T>, SolveError> {
    solve_with(instance, &SolverOptions::default())
}

pub(super) fn solve_with<T: Scalar>(
    instance: &Instance<T>,
    options: &SolverOptions,
) -> Result<SolveOutcome<T>, SolveError> {
    let started = Instant::now();
    let prepared = Prepared::new(instance)?;
    let combinations = prepared
        .sets
        .iter()
        .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128))
        .unwrap_or(u128::MAX);
    if combinations > options.enumeration_guard as u128 {
        return Err(SolveError::EnumerationTooLarge { combinations, guard: options.enumeration_guard });
    }
    if prepared.is_infeasible() {
        return Ok(infeasible(instance, Engine::BruteForce, 0, started));
    }

    // first pass: best objective; second pass: cheapest, then first in
    // lexicographic order, among the near-ties
    let mut best = T::neg_infinity();
    let mut work = 0u64;
    for_each_vector(&prepared, |layers| {
        work += 1;
        let (cost, objective) = prepared.evaluate(layers);
        if cost <= prepared.budget && objective > best {
            best = objective;
        }
    });

    let threshold = best - prepared.tie;
    let mut chosen: Option<(T, Vec<usize>)> = None;
    for_each_vector(&prepared, |layers| {
        work += 1;
        let (cost, objective) = prepared.evaluate(layers);
        if cost <= prepared.budget && objective >= threshold && chosen.as_ref().is_none_or(|(c, _)| cost < *c) {
            chosen = Some((cost, layers.to_vec()));
        }
    });

    match chosen {
        Some((_, layers)) => Ok(optimal(instance, &layers, Engine::BruteForce, work, started)),
        None => Ok(infeasible(instance, Engine::BruteForce, work, started)),
    }
}

/// Visits every admissible layer vector in lexicographic order.
fn for_each_vector<T: Scalar>(prepared: &Prepared<T>, mut visit: impl FnMut(&[usize])) {
    let sets = &prepared.sets;
    let mut layers: Vec<usize> = sets.iter().map(|s| s.min_layer).collect();
    loop {
        visit(&layers);
        let mut k = sets.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if layers[k] < sets[k].max_layer {
                layers[k] += 1;
                break;
            }
            layers[k] = sets[k].min_layer;
        }
    }
}
