//! Domain types: the layer schedule, devices, problem instances and solved
//! allocations, plus instance validation.
//!
//! Layers are 1-based throughout (`1` = Ethernet only, `L` = deepest).

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("device id `{0}` appears more than once")]
    DuplicateDeviceId(String),
    #[error("detection rates must be strictly increasing: layer {layer} ({next}) does not exceed layer {prev_layer} ({prev})", prev_layer = layer - 1)]
    DetectionRatesNotIncreasing { layer: usize, prev: f64, next: f64 },
    #[error("{what} = {value} is outside its admissible range")]
    ProbabilityOutOfRange { what: String, value: f64 },
    #[error("critical device `{device}` has max_layer {max_layer} below the critical minimum {alpha}")]
    CriticalCapConflict { device: String, max_layer: usize, alpha: usize },
    #[error("instance has no devices")]
    EmptyDeviceList,
    #[error("{what} = {value} must be a finite non-negative number")]
    NegativeCostOrWeight { what: String, value: f64 },
    #[error("layer schedule has no layers")]
    EmptySchedule,
    #[error("alpha = {alpha} must lie in [1, {layers}]")]
    AlphaOutOfRange { alpha: usize, layers: usize },
    #[error("device `{device}` has max_layer {max_layer}, expected a value in [1, {layers}]")]
    MaxLayerOutOfRange { device: String, max_layer: usize, layers: usize },
    #[error("allocation references unknown device `{0}`")]
    UnknownDevice(String),
}

/// One monitoring depth: the fraction of attacks it detects and its cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer<T = f64> {
    pub detection: T,
    pub cost: T,
}

/// Ordered monitoring layers; `layers[0]` is layer 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSchedule<T = f64> {
    pub layers: Vec<Layer<T>>,
}

impl<T: Scalar> LayerSchedule<T> {
    pub fn new(layers: Vec<Layer<T>>) -> Self {
        Self { layers }
    }

    /// Builds a schedule from parallel detection-rate and cost slices.
    pub fn from_rates_and_costs(detection: &[T], cost: &[T]) -> Self {
        assert_eq!(detection.len(), cost.len(), "detection and cost lengths differ");
        Self {
            layers: detection.iter().zip(cost).map(|(&d, &c)| Layer { detection: d, cost: c }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Layer `l` (1-based).
    pub fn layer(&self, l: usize) -> &Layer<T> {
        &self.layers[l - 1]
    }

    pub fn detection(&self, l: usize) -> T {
        self.layer(l).detection
    }

    pub fn cost(&self, l: usize) -> T {
        self.layer(l).cost
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device<T = f64> {
    pub id: String,
    pub name: String,
    /// Importance `w_i`.
    pub weight: T,
    /// Probability `p_i` that the device is attacked.
    pub attack_prob: T,
    /// Critical devices must be monitored at least up to `alpha`.
    pub critical: bool,
    /// Deepest admissible layer (`L` when unconstrained).
    pub max_layer: usize,
}

impl<T: Scalar> Device<T> {
    /// An uncapped, non-critical device whose display name equals its id.
    pub fn new(id: impl Into<String>, weight: T, attack_prob: T, layers: usize) -> Self {
        let id = id.into();
        Self { name: id.clone(), id, weight, attack_prob, critical: false, max_layer: layers }
    }

    pub fn critical(mut self) -> Self {
        self.critical = true;
        self
    }

    pub fn with_max_layer(mut self, max_layer: usize) -> Self {
        self.max_layer = max_layer;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Objective coefficient at layer `l`: `(w * p) * d_l`.
    ///
    /// The association order is fixed so every engine produces bit-identical
    /// objective values.
    pub fn profit(&self, schedule: &LayerSchedule<T>, l: usize) -> T {
        (self.weight * self.attack_prob) * schedule.detection(l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance<T = f64> {
    pub schedule: LayerSchedule<T>,
    pub devices: Vec<Device<T>>,
    /// Minimum layer for critical devices.
    pub alpha: usize,
    /// Total resources available for monitoring.
    pub budget: T,
}

impl<T: Scalar> Instance<T> {
    pub fn layer_count(&self) -> usize {
        self.schedule.len()
    }

    /// Lowest admissible layer of `device`.
    pub fn min_layer(&self, device: &Device<T>) -> usize {
        if device.critical {
            self.alpha
        } else {
            1
        }
    }

    pub fn device_index(&self, id: &str) -> Option<usize> {
        self.devices.iter().position(|d| d.id == id)
    }

    /// Same instance with a different budget.
    pub fn with_budget(&self, budget: T) -> Self {
        Self { budget, ..self.clone() }
    }

    /// Sum of the most expensive admissible layer cost of each device; any
    /// budget at or above this value admits every allocation.
    pub fn max_useful_budget(&self) -> T {
        self.devices
            .iter()
            .map(|d| {
                (self.min_layer(d)..=d.max_layer).map(|l| self.schedule.cost(l)).fold(T::zero(), T::max)
            })
            .fold(T::zero(), |acc, c| acc + c)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let layers = self.schedule.len();
        if layers == 0 {
            return Err(ModelError::EmptySchedule);
        }
        for (idx, layer) in self.schedule.layers.iter().enumerate() {
            let d = layer.detection;
            if !(d > T::zero() && d <= T::one()) {
                return Err(ModelError::ProbabilityOutOfRange {
                    what: format!("detection rate of layer {}", idx + 1),
                    value: d.as_f64(),
                });
            }
            non_negative(layer.cost, || format!("cost of layer {}", idx + 1))?;
            if idx > 0 {
                let prev = self.schedule.layers[idx - 1].detection;
                if d <= prev {
                    return Err(ModelError::DetectionRatesNotIncreasing {
                        layer: idx + 1,
                        prev: prev.as_f64(),
                        next: d.as_f64(),
                    });
                }
            }
        }
        if self.alpha < 1 || self.alpha > layers {
            return Err(ModelError::AlphaOutOfRange { alpha: self.alpha, layers });
        }
        non_negative(self.budget, || "budget".to_string())?;
        if self.devices.is_empty() {
            return Err(ModelError::EmptyDeviceList);
        }
        let mut seen = HashSet::with_capacity(self.devices.len());
        for device in &self.devices {
            if !seen.insert(device.id.as_str()) {
                return Err(ModelError::DuplicateDeviceId(device.id.clone()));
            }
            non_negative(device.weight, || format!("weight of `{}`", device.id))?;
            let p = device.attack_prob;
            if !(p >= T::zero() && p <= T::one()) {
                return Err(ModelError::ProbabilityOutOfRange {
                    what: format!("attack_prob of `{}`", device.id),
                    value: p.as_f64(),
                });
            }
            if device.max_layer < 1 || device.max_layer > layers {
                return Err(ModelError::MaxLayerOutOfRange {
                    device: device.id.clone(),
                    max_layer: device.max_layer,
                    layers,
                });
            }
            if device.critical && device.max_layer < self.alpha {
                return Err(ModelError::CriticalCapConflict {
                    device: device.id.clone(),
                    max_layer: device.max_layer,
                    alpha: self.alpha,
                });
            }
        }
        Ok(())
    }
}

fn non_negative<T: Scalar>(value: T, what: impl FnOnce() -> String) -> Result<(), ModelError> {
    if value.is_finite() && value >= T::zero() {
        Ok(())
    } else {
        Err(ModelError::NegativeCostOrWeight { what: what(), value: value.as_f64() })
    }
}

/// Checks every instance invariant and hands the instance back unchanged.
pub fn validate_instance<T: Scalar>(raw: Instance<T>) -> Result<Instance<T>, ModelError> {
    raw.validate()?;
    Ok(raw)
}

/// Smallest budget for which a feasible allocation exists: each device at
/// its cheapest admissible layer, summed in device order.
///
/// With non-decreasing layer costs this is the cost of `alpha` for critical
/// devices and of layer 1 for the rest.
pub fn min_feasible_budget<T: Scalar>(instance: &Instance<T>) -> T {
    instance
        .devices
        .iter()
        .map(|d| {
            (instance.min_layer(d)..=d.max_layer)
                .map(|l| instance.schedule.cost(l))
                .fold(T::infinity(), T::min)
        })
        .fold(T::zero(), |acc, c| acc + c)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub device_id: String,
    pub layer: usize,
}

/// A solved allocation: one layer per device, in device input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation<T = f64> {
    pub assignment: Vec<Assignment>,
    pub total_cost: T,
    pub objective: T,
}

impl<T: Scalar> Allocation<T> {
    /// Builds the allocation for a layer vector given in device order.
    /// Cost and objective are accumulated in ascending device order.
    pub fn from_layers(instance: &Instance<T>, layers: &[usize]) -> Self {
        assert_eq!(layers.len(), instance.devices.len(), "one layer per device");
        let mut total_cost = T::zero();
        let mut objective = T::zero();
        let assignment = instance
            .devices
            .iter()
            .zip(layers)
            .map(|(device, &layer)| {
                total_cost = total_cost + instance.schedule.cost(layer);
                objective = objective + device.profit(&instance.schedule, layer);
                Assignment { device_id: device.id.clone(), layer }
            })
            .collect();
        Self { assignment, total_cost, objective }
    }

    /// Layer vector in assignment order.
    pub fn layers(&self) -> Vec<usize> {
        self.assignment.iter().map(|a| a.layer).collect()
    }

    pub fn layer_of(&self, device_id: &str) -> Option<usize> {
        self.assignment.iter().find(|a| a.device_id == device_id).map(|a| a.layer)
    }

    /// Resolves the assignment against `instance`, returning the layer of
    /// every instance device in device order.
    pub fn layers_for(&self, instance: &Instance<T>) -> Result<Vec<usize>, ModelError> {
        let mut layers = vec![None; instance.devices.len()];
        for a in &self.assignment {
            let idx = instance.device_index(&a.device_id).ok_or_else(|| ModelError::UnknownDevice(a.device_id.clone()))?;
            layers[idx] = Some(a.layer);
        }
        layers
            .into_iter()
            .zip(&instance.devices)
            .map(|(l, d)| l.ok_or_else(|| ModelError::UnknownDevice(d.id.clone())))
            .collect()
    }

    /// Lists every allocation invariant the allocation breaks on `instance`.
    pub fn violations(&self, instance: &Instance<T>) -> Vec<String> {
        let mut out = Vec::new();
        let layers = match self.layers_for(instance) {
            Ok(layers) => layers,
            Err(e) => return vec![e.to_string()],
        };
        if self.assignment.len() != instance.devices.len() {
            out.push(format!(
                "{} assignments for {} devices",
                self.assignment.len(),
                instance.devices.len()
            ));
        }
        for (device, &layer) in instance.devices.iter().zip(&layers) {
            if layer < instance.min_layer(device) || layer > device.max_layer {
                out.push(format!(
                    "device `{}` at layer {layer}, admissible [{}, {}]",
                    device.id,
                    instance.min_layer(device),
                    device.max_layer
                ));
            }
        }
        if out.is_empty() {
            let recomputed = Allocation::from_layers(instance, &layers);
            if recomputed.total_cost != self.total_cost || recomputed.objective != self.objective {
                out.push("stored cost or objective disagrees with the assignment".to_string());
            }
            let slack = T::epsilon() * T::lit((instance.devices.len() + 1) as f64) * instance.budget.max(T::one());
            if self.total_cost > instance.budget + slack {
                out.push(format!("total cost {} exceeds budget {}", self.total_cost, instance.budget));
            }
        }
        out
    }
}
