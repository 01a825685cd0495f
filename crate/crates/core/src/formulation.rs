//! Multiple-choice knapsack form of an instance.
//!
//! The critical minimum and the feasibility cap only bound the single layer
//! chosen for a device, so they are folded into each device's admissible
//! layer range instead of being kept as rows.

use std::fmt::Write as _;
use std::io;
use std::ops::RangeInclusive;
use std::path::Path;

use thiserror::Error;

use crate::model::{Device, Instance};
use crate::scalar::Scalar;

/// The admissible layers of one device with their objective coefficients
/// and costs. `profits[k]` and `costs[k]` belong to layer `min_layer + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceSet<T = f64> {
    pub device_id: String,
    pub min_layer: usize,
    pub max_layer: usize,
    pub profits: Vec<T>,
    pub costs: Vec<T>,
}

impl<T: Scalar> ChoiceSet<T> {
    pub fn layers(&self) -> RangeInclusive<usize> {
        self.min_layer..=self.max_layer
    }

    pub fn len(&self) -> usize {
        self.profits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profits.is_empty()
    }

    pub fn profit(&self, layer: usize) -> T {
        self.profits[layer - self.min_layer]
    }

    pub fn cost(&self, layer: usize) -> T {
        self.costs[layer - self.min_layer]
    }
}

/// `[alpha, max_layer]` for critical devices, `[1, max_layer]` otherwise.
pub fn admissible_layers<T: Scalar>(device: &Device<T>, instance: &Instance<T>) -> RangeInclusive<usize> {
    instance.min_layer(device)..=device.max_layer
}

/// One [`ChoiceSet`] per device, in device input order.
pub fn build_profit_matrix<T: Scalar>(instance: &Instance<T>) -> Vec<ChoiceSet<T>> {
    instance
        .devices
        .iter()
        .map(|device| {
            let range = admissible_layers(device, instance);
            ChoiceSet {
                device_id: device.id.clone(),
                min_layer: *range.start(),
                max_layer: *range.end(),
                profits: range.clone().map(|l| device.profit(&instance.schedule, l)).collect(),
                costs: range.map(|l| instance.schedule.cost(l)).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("device id `{0}` cannot be used in an LP variable name (allowed: ASCII letters, digits, `_`, `.`)")]
    UnsupportedIdentifier(String),
    #[error("failed to write LP file: {0}")]
    IoFailure(#[from] io::Error),
}

const TERMS_PER_LINE: usize = 6;

/// LP variable name of device `id` at `layer`.
pub fn lp_variable(id: &str, layer: usize) -> String {
    format!("y_{id}_{layer}")
}

fn lp_safe(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn write_terms<T: Scalar>(out: &mut String, terms: &[(T, String)]) {
    for (k, (coef, var)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        if k == 0 {
            let _ = write!(out, " {coef} {var}");
        } else {
            let _ = write!(out, " + {coef} {var}");
        }
    }
}

/// Renders the integer program in LP text format.
///
/// Binary variables `y_<device>_<layer>` exist only for admissible layers.
/// The program has a maximization objective, one `budget` row and one
/// `one_<device>` exactly-one row per device.
pub fn export_lp<T: Scalar>(instance: &Instance<T>) -> Result<String, LpError> {
    if let Some(bad) = instance.devices.iter().find(|d| !lp_safe(&d.id)) {
        return Err(LpError::UnsupportedIdentifier(bad.id.clone()));
    }
    let sets = build_profit_matrix(instance);
    let mut objective = Vec::new();
    let mut budget = Vec::new();
    for set in &sets {
        for l in set.layers() {
            objective.push((set.profit(l), lp_variable(&set.device_id, l)));
            budget.push((set.cost(l), lp_variable(&set.device_id, l)));
        }
    }

    let mut out = String::new();
    out.push_str("\\ layered intrusion detection monitoring allocation\n");
    let _ = writeln!(out, "\\ devices: {}, layers: {}, alpha: {}", sets.len(), instance.layer_count(), instance.alpha);
    out.push_str("Maximize\n obj:");
    write_terms(&mut out, &objective);
    out.push_str("\nSubject To\n budget:");
    write_terms(&mut out, &budget);
    let _ = writeln!(out, " <= {}", instance.budget);
    for set in &sets {
        let _ = write!(out, " one_{}:", set.device_id);
        let ones: Vec<(T, String)> = set.layers().map(|l| (T::one(), lp_variable(&set.device_id, l))).collect();
        write_terms(&mut out, &ones);
        out.push_str(" = 1\n");
    }
    out.push_str("Binary\n");
    for set in &sets {
        let vars: Vec<String> = set.layers().map(|l| lp_variable(&set.device_id, l)).collect();
        let _ = writeln!(out, " {}", vars.join(" "));
    }
    out.push_str("End\n");
    Ok(out)
}

/// Writes [`export_lp`] output to `path`.
pub fn write_lp<T: Scalar>(instance: &Instance<T>, path: impl AsRef<Path>) -> Result<(), LpError> {
    let text = export_lp(instance)?;
    std::fs::write(path, text)?;
    Ok(())
}
