//! Test-only oracles and instance generators, independent of the solver
//! code paths they check.

#![allow(dead_code)]

use layerguard::{Device, Instance, LayerSchedule};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn six_device_instance(budget: f64) -> Instance {
    let schedule = LayerSchedule::from_rates_and_costs(&[0.2, 0.5, 0.8, 0.95], &[1.0, 2.0, 4.0, 7.0]);
    let devices = vec![
        Device::new("dev_1", 1.0, 0.998, 4),
        Device::new("dev_2", 3.0, 0.579, 4).critical().with_max_layer(3),
        Device::new("dev_3", 5.0, 0.045, 4).critical(),
        Device::new("dev_4", 10.0, 0.517, 4).critical(),
        Device::new("dev_5", 9.0, 0.682, 4),
        Device::new("dev_6", 7.0, 0.71, 4),
    ];
    Instance { schedule, devices, alpha: 2, budget }
}

pub const SIX_DEVICE_BUDGETS: [f64; 8] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];

/// Random instance with up to `max_devices` devices, up to four layers and
/// integer costs in 1..=9. When `tie_heavy` is set, weights, probabilities
/// and detection rates come from small dyadic grids so exact objective ties
/// are common.
pub fn random_instance<R: Rng>(rng: &mut R, max_devices: usize, tie_heavy: bool) -> Instance {
    let layers = rng.gen_range(1..=4);
    let detection: Vec<f64> = if tie_heavy {
        let mut grid = [0.25, 0.5, 0.75, 1.0];
        grid.shuffle(rng);
        let mut picked = grid[..layers].to_vec();
        picked.sort_by(|a, b| a.partial_cmp(b).unwrap());
        picked
    } else {
        let mut v: Vec<f64> = Vec::new();
        while v.len() < layers {
            let d: f64 = rng.gen_range(0.01..=1.0);
            if v.iter().all(|&x| (x - d).abs() > 1e-6) {
                v.push(d);
            }
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let costs: Vec<f64> = (0..layers).map(|_| rng.gen_range(1..=9) as f64).collect();
    let alpha = rng.gen_range(1..=layers);
    let n = rng.gen_range(1..=max_devices);
    let devices = (0..n)
        .map(|i| {
            let critical = rng.gen_bool(0.4);
            let lo = if critical { alpha } else { 1 };
            let max_layer = if rng.gen_bool(0.5) { layers } else { rng.gen_range(lo..=layers) };
            let (weight, attack_prob) = if tie_heavy {
                (*[0.0, 1.0, 2.0, 4.0].choose(rng).unwrap(), *[0.0, 0.5, 1.0].choose(rng).unwrap())
            } else {
                (rng.gen_range(0.0..10.0), rng.gen_range(0.0..=1.0))
            };
            Device { id: format!("d{i}"), name: format!("device {i}"), weight, attack_prob, critical, max_layer }
        })
        .collect::<Vec<_>>();
    let schedule = LayerSchedule::from_rates_and_costs(&detection, &costs);
    // budgets mostly between the cheapest and the most expensive allocation
    let (mut lo, mut hi) = (0.0, 0.0);
    for d in &devices {
        let first = if d.critical { alpha } else { 1 };
        let admissible = &costs[first - 1..d.max_layer];
        lo += admissible.iter().cloned().fold(f64::INFINITY, f64::min);
        hi += admissible.iter().cloned().fold(0.0, f64::max);
    }
    let budget = rng.gen_range((lo as u32).saturating_sub(3)..=(hi as u32 + 3)) as f64;
    Instance { schedule, devices, alpha, budget }
}

/// 0/1 matrix `y[i][l-1]` of a layer vector.
pub fn y_matrix(layers: &[usize], layer_count: usize) -> Vec<Vec<u8>> {
    layers
        .iter()
        .map(|&l| (1..=layer_count).map(|k| u8::from(k == l)).collect())
        .collect()
}

/// Checks the four constraints of the integer program on the raw `y`
/// matrix: budget, exactly one layer, critical minimum, feasibility cap.
pub fn check_constraints(instance: &Instance, y: &[Vec<u8>]) -> Result<(), String> {
    let layers = instance.schedule.layers.len();
    if y.len() != instance.devices.len() {
        return Err("row count".into());
    }
    let mut used = 0.0;
    for row in y {
        for (l, &v) in row.iter().enumerate() {
            used += instance.schedule.layers[l].cost * v as f64;
        }
    }
    if used > instance.budget + 1e-9 {
        return Err(format!("budget: {used} > {}", instance.budget));
    }
    for (device, row) in instance.devices.iter().zip(y) {
        if row.len() != layers {
            return Err("column count".into());
        }
        let all: u32 = row.iter().map(|&v| v as u32).sum();
        if all != 1 {
            return Err(format!("{}: sum_l y = {all}", device.id));
        }
        if device.critical {
            let tail: u32 = row[instance.alpha - 1..].iter().map(|&v| v as u32).sum();
            if tail != 1 {
                return Err(format!("{}: critical minimum violated", device.id));
            }
        }
        if device.max_layer < layers {
            let head: u32 = row[..device.max_layer].iter().map(|&v| v as u32).sum();
            if head != 1 {
                return Err(format!("{}: feasibility cap violated", device.id));
            }
        }
    }
    Ok(())
}

/// Canonical optimum over the unpruned grid `{1..L}^n` filtered by the
/// constraint checker. Returns `(layers, objective, cost)`.
pub fn unpruned_optimum(instance: &Instance) -> Option<(Vec<usize>, f64, f64)> {
    let n = instance.devices.len();
    let layers = instance.schedule.layers.len();
    let mut feasible: Vec<(Vec<usize>, f64, f64)> = Vec::new();
    let mut v = vec![1usize; n];
    loop {
        if check_constraints(instance, &y_matrix(&v, layers)).is_ok() {
            let mut obj = 0.0;
            let mut cost = 0.0;
            for (d, &l) in instance.devices.iter().zip(&v) {
                obj += (d.weight * d.attack_prob) * instance.schedule.layers[l - 1].detection;
                cost += instance.schedule.layers[l - 1].cost;
            }
            feasible.push((v.clone(), obj, cost));
        }
        let mut k = n;
        loop {
            if k == 0 {
                let best = feasible.iter().map(|f| f.1).fold(f64::NEG_INFINITY, f64::max);
                // feasible is in lexicographic order; min_by keeps the first minimum
                return feasible
                    .into_iter()
                    .filter(|f| f.1 >= best - 1e-9)
                    .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
            }
            k -= 1;
            if v[k] < layers {
                v[k] += 1;
                break;
            }
            v[k] = 1;
        }
    }
}
