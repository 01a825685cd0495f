//! TOML instance files.
//!
//! ```toml
//! alpha = 2
//! budget = 10            # or: budgets = [5, 10, 15]
//!
//! [[layers]]
//! detection = 0.2
//! cost = 1
//!
//! [[devices]]
//! id = "dev_1"
//! name = "Workstation"   # optional, defaults to the id
//! weight = 1
//! attack_prob = 0.998
//! critical = false       # optional
//! max_layer = 4          # optional, defaults to the deepest layer
//! preset = "laptop"      # optional, supplies weight and attack_prob
//!
//! [presets.laptop]       # optional, overrides the built-in role values
//! weight = 4
//! attack_prob = 0.2
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use layerguard::{validate_instance, Device, Instance, Layer, LayerSchedule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerEntry {
    pub detection: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack_prob: Option<f64>,
    #[serde(default)]
    pub critical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_layer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub weight: f64,
    pub attack_prob: f64,
}

/// Role presets for common device types.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Presets {
    pub database_server: Option<Preset>,
    pub router: Option<Preset>,
    pub matter_door_lock: Option<Preset>,
    pub laptop: Option<Preset>,
    pub iot_sensor: Option<Preset>,
}

impl Presets {
    pub const NAMES: [&'static str; 5] = ["database_server", "router", "matter_door_lock", "laptop", "iot_sensor"];

    /// Built-in role values.
    pub fn builtin(name: &str) -> Option<Preset> {
        let (weight, attack_prob) = match name {
            "database_server" => (10.0, 0.6),
            "router" => (8.0, 0.4),
            "matter_door_lock" => (6.0, 0.8),
            "laptop" => (4.0, 0.2),
            "iot_sensor" => (2.0, 0.3),
            _ => return None,
        };
        Some(Preset { weight, attack_prob })
    }

    fn declared(&self, name: &str) -> Option<Preset> {
        match name {
            "database_server" => self.database_server,
            "router" => self.router,
            "matter_door_lock" => self.matter_door_lock,
            "laptop" => self.laptop,
            "iot_sensor" => self.iot_sensor,
            _ => None,
        }
    }

    pub fn resolve(&self, name: &str) -> Option<Preset> {
        self.declared(name).or_else(|| Self::builtin(name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub alpha: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<f64>>,
    pub layers: Vec<LayerEntry>,
    pub devices: Vec<DeviceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presets: Option<Presets>,
}

/// A parsed file: the validated instance (budget set to the single budget,
/// or 0 when the file only lists a sweep) and the budgets it declares.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedInstance {
    pub instance: Instance,
    pub budget: Option<f64>,
    pub budgets: Option<Vec<f64>>,
}

impl ParsedInstance {
    /// The instance for a single solve: `budget`, or a one-element `budgets`.
    pub fn single(&self) -> Result<Instance> {
        let budget = match (&self.budget, &self.budgets) {
            (Some(b), _) => *b,
            (None, Some(list)) if list.len() == 1 => list[0],
            (None, Some(list)) => bail!("file lists {} budgets; a single `budget` is required here", list.len()),
            (None, None) => bail!("missing field `budget`"),
        };
        let inst = validate_instance(self.instance.with_budget(budget))?;
        Ok(inst)
    }

    /// Budgets for a sweep: the override if given, else `budgets`, else `budget`.
    pub fn sweep_budgets(&self, override_list: Option<Vec<f64>>) -> Result<Vec<f64>> {
        let list = override_list
            .or_else(|| self.budgets.clone())
            .or_else(|| self.budget.map(|b| vec![b]))
            .ok_or_else(|| anyhow!("missing field `budgets`"))?;
        if list.is_empty() {
            bail!("empty budget list");
        }
        Ok(list)
    }
}

pub fn parse_str(text: &str) -> Result<ParsedInstance> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| anyhow!("{}", e.to_string().trim_end()))?;
    file.into_parsed()
}

pub fn read(path: &Path) -> Result<ParsedInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_str(&text).with_context(|| format!("invalid instance file {}", path.display()))
}

impl InstanceFile {
    pub fn into_parsed(self) -> Result<ParsedInstance> {
        let layer_count = self.layers.len();
        let schedule = LayerSchedule::new(
            self.layers.iter().map(|l| Layer { detection: l.detection, cost: l.cost }).collect(),
        );
        let presets = self.presets.clone().unwrap_or_default();
        let devices = self
            .devices
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let ctx = || format!("devices[{k}] (`{}`)", d.id);
                let preset = match &d.preset {
                    Some(name) => Some(presets.resolve(name).ok_or_else(|| {
                        anyhow!("{}: unknown preset `{name}` (expected one of {})", ctx(), Presets::NAMES.join(", "))
                    })?),
                    None => None,
                };
                let weight = d
                    .weight
                    .or(preset.map(|p| p.weight))
                    .ok_or_else(|| anyhow!("{}: missing field `weight`", ctx()))?;
                let attack_prob = d
                    .attack_prob
                    .or(preset.map(|p| p.attack_prob))
                    .ok_or_else(|| anyhow!("{}: missing field `attack_prob`", ctx()))?;
                Ok(Device {
                    id: d.id.clone(),
                    name: d.name.clone().unwrap_or_else(|| d.id.clone()),
                    weight,
                    attack_prob,
                    critical: d.critical,
                    max_layer: d.max_layer.unwrap_or(layer_count),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let instance = Instance { schedule, devices, alpha: self.alpha, budget: self.budget.unwrap_or(0.0) };
        let instance = validate_instance(instance)?;
        Ok(ParsedInstance { instance, budget: self.budget, budgets: self.budgets })
    }

    /// File form of a single-budget instance, with every field explicit.
    pub fn from_instance(instance: &Instance) -> Self {
        Self {
            alpha: instance.alpha,
            budget: Some(instance.budget),
            budgets: None,
            layers: instance.schedule.layers.iter().map(|l| LayerEntry { detection: l.detection, cost: l.cost }).collect(),
            devices: instance
                .devices
                .iter()
                .map(|d| DeviceEntry {
                    id: d.id.clone(),
                    name: Some(d.name.clone()),
                    weight: Some(d.weight),
                    attack_prob: Some(d.attack_prob),
                    critical: d.critical,
                    max_layer: Some(d.max_layer),
                    preset: None,
                })
                .collect(),
            presets: None,
        }
    }
}

pub fn to_toml(instance: &Instance) -> String {
    toml::to_string(&InstanceFile::from_instance(instance)).expect("instance files always serialize")
}
