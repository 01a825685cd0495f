//! Monte Carlo check of what the objective means.
//!
//! Each trial attacks every device independently with probability `p_i`;
//! an attacked device monitored up to layer `l` detects the attack with
//! probability `d_l`. The trial score is the total weight of detected
//! attacks, whose expectation is exactly the allocation objective.
//!
//! Random numbers come from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Every trial draws exactly two uniforms per device,
//! in device order (attack, then detection), whether or not the device is
//! attacked. Allocations simulated with the same seed therefore see common
//! random numbers. When trials are split into `P` partitions, partition `j`
//! runs trials `[j*N/P, (j+1)*N/P)` on stream `j` of the same seed, and
//! partial statistics are merged in partition order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{Allocation, Instance, ModelError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationResult {
    pub trials: u64,
    pub mean_detected_weight: f64,
    pub sample_std_error: f64,
    pub seed: u64,
}

impl SimulationResult {
    /// `(mean - expected) / std_error`; zero when both the error and the
    /// deviation vanish.
    pub fn z_score(&self, expected: f64) -> f64 {
        let dev = self.mean_detected_weight - expected;
        if self.sample_std_error > 0.0 {
            dev / self.sample_std_error
        } else if dev.abs() <= 1e-12 * expected.abs().max(1.0) {
            0.0
        } else {
            dev.signum() * f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub trials: u64,
    pub seed: u64,
    pub partitions: usize,
    /// Run partitions on the rayon pool; the result is identical either way.
    pub parallel: bool,
}

impl SimulationConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, partitions: 1, parallel: false }
    }

    pub fn partitioned(mut self, partitions: usize, parallel: bool) -> Self {
        self.partitions = partitions.max(1);
        self.parallel = parallel;
        self
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    fn result(self, seed: u64) -> SimulationResult {
        let std_error = if self.n > 1 { (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt() } else { 0.0 };
        SimulationResult { trials: self.n, mean_detected_weight: self.mean, sample_std_error: std_error, seed }
    }
}

/// Per-device parameters resolved for one allocation.
struct Profile {
    weight: Vec<f64>,
    attack: Vec<f64>,
    detect: Vec<f64>,
}

impl Profile {
    fn new<T: Scalar>(allocation: &Allocation<T>, instance: &Instance<T>) -> Result<Self, ModelError> {
        let layers = allocation.layers_for(instance)?;
        Ok(Self {
            weight: instance.devices.iter().map(|d| d.weight.as_f64()).collect(),
            attack: instance.devices.iter().map(|d| d.attack_prob.as_f64()).collect(),
            detect: layers.iter().map(|&l| instance.schedule.detection(l).as_f64()).collect(),
        })
    }

    fn score(&self, draws: &[(f64, f64)]) -> f64 {
        let mut total = 0.0;
        for (i, &(u_attack, u_detect)) in draws.iter().enumerate() {
            if u_attack < self.attack[i] && u_detect < self.detect[i] {
                total += self.weight[i];
            }
        }
        total
    }
}

fn partition_rng(seed: u64, partition: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(partition as u64);
    rng
}

fn partition_range(trials: u64, partitions: usize, j: usize) -> u64 {
    let p = partitions as u128;
    let lo = (trials as u128 * j as u128 / p) as u64;
    let hi = (trials as u128 * (j as u128 + 1) / p) as u64;
    hi - lo
}

fn run_partitions<R: Send>(config: &SimulationConfig, job: impl Fn(usize, u64) -> R + Sync) -> Vec<R> {
    let parts = config.partitions.max(1);
    if config.parallel {
        (0..parts).into_par_iter().map(|j| job(j, partition_range(config.trials, parts, j))).collect()
    } else {
        (0..parts).map(|j| job(j, partition_range(config.trials, parts, j))).collect()
    }
}

fn draw(rng: &mut ChaCha8Rng, draws: &mut [(f64, f64)]) {
    for slot in draws.iter_mut() {
        *slot = (rng.gen::<f64>(), rng.gen::<f64>());
    }
}

/// Simulates `trials` independent attack rounds against `allocation`.
pub fn estimate_detection<T: Scalar>(
    allocation: &Allocation<T>,
    instance: &Instance<T>,
    trials: u64,
    seed: u64,
) -> Result<SimulationResult, ModelError> {
    estimate_detection_with(allocation, instance, &SimulationConfig::new(trials, seed))
}

pub fn estimate_detection_with<T: Scalar>(
    allocation: &Allocation<T>,
    instance: &Instance<T>,
    config: &SimulationConfig,
) -> Result<SimulationResult, ModelError> {
    assert!(config.trials >= 1, "at least one trial is required");
    let profile = Profile::new(allocation, instance)?;
    let n = instance.devices.len();
    let parts = run_partitions(config, |j, count| {
        let mut rng = partition_rng(config.seed, j);
        let mut draws = vec![(0.0, 0.0); n];
        let mut m = Moments::default();
        for _ in 0..count {
            draw(&mut rng, &mut draws);
            m.push(profile.score(&draws));
        }
        m
    });
    Ok(parts.into_iter().fold(Moments::default(), Moments::merge).result(config.seed))
}

/// Two allocations simulated on common random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedSimulation {
    pub base: SimulationResult,
    pub alternative: SimulationResult,
    /// Smallest per-trial difference `alternative - base`.
    pub min_trial_difference: f64,
    /// Trials in which the alternative scored lower than the base.
    pub trials_alternative_lower: u64,
}

pub fn estimate_detection_paired<T: Scalar>(
    base: &Allocation<T>,
    alternative: &Allocation<T>,
    instance: &Instance<T>,
    config: &SimulationConfig,
) -> Result<PairedSimulation, ModelError> {
    assert!(config.trials >= 1, "at least one trial is required");
    let pa = Profile::new(base, instance)?;
    let pb = Profile::new(alternative, instance)?;
    let n = instance.devices.len();
    let parts = run_partitions(config, |j, count| {
        let mut rng = partition_rng(config.seed, j);
        let mut draws = vec![(0.0, 0.0); n];
        let (mut ma, mut mb) = (Moments::default(), Moments::default());
        let mut min_diff = f64::INFINITY;
        let mut lower = 0u64;
        for _ in 0..count {
            draw(&mut rng, &mut draws);
            let (a, b) = (pa.score(&draws), pb.score(&draws));
            ma.push(a);
            mb.push(b);
            min_diff = min_diff.min(b - a);
            if b < a {
                lower += 1;
            }
        }
        (ma, mb, min_diff, lower)
    });
    let mut ma = Moments::default();
    let mut mb = Moments::default();
    let mut min_diff = f64::INFINITY;
    let mut lower = 0;
    for (a, b, d, l) in parts {
        ma = ma.merge(a);
        mb = mb.merge(b);
        min_diff = min_diff.min(d);
        lower += l;
    }
    Ok(PairedSimulation {
        base: ma.result(config.seed),
        alternative: mb.result(config.seed),
        min_trial_difference: min_diff,
        trials_alternative_lower: lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::six_device_instance;
    use crate::model::{Device, LayerSchedule};

    #[test]
    fn no_attacks_means_zero() {
        let mut inst = six_device_instance(40.0);
        for d in &mut inst.devices {
            d.attack_prob = 0.0;
        }
        let alloc = Allocation::from_layers(&inst, &[4, 3, 4, 4, 4, 4]);
        let r = estimate_detection(&alloc, &inst, 10_000, 7).unwrap();
        assert_eq!(r.mean_detected_weight, 0.0);
        assert_eq!(r.sample_std_error, 0.0);
    }

    #[test]
    fn certain_detection_is_exact() {
        let inst = Instance {
            schedule: LayerSchedule::from_rates_and_costs(&[1.0], &[1.0]),
            devices: vec![Device::new("a", 1.0, 1.0, 1)],
            alpha: 1,
            budget: 1.0,
        };
        let alloc = Allocation::from_layers(&inst, &[1]);
        let r = estimate_detection(&alloc, &inst, 1000, 3).unwrap();
        assert_eq!(r.mean_detected_weight, 1.0);
        assert_eq!(r.sample_std_error, 0.0);
        assert_eq!(r.z_score(1.0), 0.0);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let inst = six_device_instance(40.0);
        let alloc = Allocation::from_layers(&inst, &[4, 3, 4, 4, 4, 4]);
        let a = estimate_detection(&alloc, &inst, 5000, 11).unwrap();
        let b = estimate_detection(&alloc, &inst, 5000, 11).unwrap();
        assert_eq!(a, b);
        let c = estimate_detection(&alloc, &inst, 5000, 12).unwrap();
        assert_ne!(a.mean_detected_weight, c.mean_detected_weight);
    }

    #[test]
    fn parallel_partitions_match_sequential() {
        let inst = six_device_instance(40.0);
        let alloc = Allocation::from_layers(&inst, &[4, 3, 4, 4, 4, 4]);
        let seq = estimate_detection_with(&alloc, &inst, &SimulationConfig::new(10_001, 5).partitioned(7, false)).unwrap();
        let par = estimate_detection_with(&alloc, &inst, &SimulationConfig::new(10_001, 5).partitioned(7, true)).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.trials, 10_001);
    }

    #[test]
    fn partition_sizes_cover_all_trials() {
        let total: u64 = (0..7).map(|j| partition_range(100, 7, j)).sum();
        assert_eq!(total, 100);
    }

    #[test]
    fn single_trial_is_a_subset_sum() {
        let inst = six_device_instance(40.0);
        let alloc = Allocation::from_layers(&inst, &[4, 3, 4, 4, 4, 4]);
        let r = estimate_detection(&alloc, &inst, 1, 99).unwrap();
        let weights: Vec<f64> = inst.devices.iter().map(|d| d.weight).collect();
        let reachable = (0u32..1 << weights.len()).any(|mask| {
            let s: f64 = weights.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, w)| w).sum();
            s == r.mean_detected_weight
        });
        assert!(reachable, "{r:?}");
        assert_eq!(r.sample_std_error, 0.0);
    }

    #[test]
    fn paired_upgrade_never_hurts() {
        let inst = six_device_instance(40.0);
        let low = Allocation::from_layers(&inst, &[4, 2, 4, 4, 4, 4]);
        let high = Allocation::from_layers(&inst, &[4, 3, 4, 4, 4, 4]);
        let p = estimate_detection_paired(&low, &high, &inst, &SimulationConfig::new(20_000, 1)).unwrap();
        assert_eq!(p.trials_alternative_lower, 0);
        assert!(p.min_trial_difference >= 0.0);
        assert!(p.alternative.mean_detected_weight >= p.base.mean_detected_weight);
        let solo = estimate_detection(&high, &inst, 20_000, 1).unwrap();
        assert_eq!(solo, p.alternative);
    }
}
