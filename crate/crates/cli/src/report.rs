//! Output rendering: human-readable tables, JSON, and the sweep CSV tables.
//!
//! Sweep CSV schemas (column order is fixed):
//!
//! * `assignments.csv`: `budget,device_id,layer,layer_cost`
//! * `contributions.csv`: `budget,device_id,contribution,objective,total_cost,status`
//!
//! Rows of infeasible or failed budgets keep `budget`, `device_id` and
//! `status`, with the numeric columns left empty.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::Result;
use layerguard::{
    contribution_breakdown, Contribution, EntryStatus, Instance, SimulationResult, SolveOutcome, SweepReport,
};
use serde::Serialize;

pub const ASSIGNMENTS_HEADER: [&str; 4] = ["budget", "device_id", "layer", "layer_cost"];
pub const CONTRIBUTIONS_HEADER: [&str; 6] = ["budget", "device_id", "contribution", "objective", "total_cost", "status"];

/// Display name of a cumulative monitoring depth.
pub fn layer_name(layer: usize) -> String {
    const NAMES: [&str; 4] = [
        "Ethernet",
        "Ethernet + IP",
        "Ethernet + IP + transport",
        "Ethernet + IP + transport + application",
    ];
    NAMES.get(layer.wrapping_sub(1)).map_or_else(|| format!("layer {layer}"), |s| s.to_string())
}

#[derive(Debug, Serialize)]
pub struct SolveJson<'a> {
    pub status: &'static str,
    pub engine: &'a str,
    pub budget: f64,
    pub min_feasible_budget: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub devices: Option<Vec<Contribution>>,
}

fn status_name(outcome: &SolveOutcome) -> &'static str {
    if outcome.is_optimal() {
        "optimal"
    } else {
        "infeasible"
    }
}

pub fn solve_table(instance: &Instance, outcome: &SolveOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "status: {} (engine {})", status_name(outcome), outcome.engine);
    let _ = writeln!(out, "budget: {}", instance.budget);
    let Some(alloc) = &outcome.allocation else {
        let _ = writeln!(
            out,
            "no allocation fits the budget; minimum feasible budget is {}",
            outcome.min_feasible_budget
        );
        return out;
    };
    let parts = contribution_breakdown(alloc, instance).expect("allocation belongs to instance");
    let id_w = instance.devices.iter().map(|d| d.id.len()).max().unwrap_or(0).max(6);
    let name_w = instance.devices.iter().map(|d| d.name.len()).max().unwrap_or(0).max(4);
    let _ = writeln!(
        out,
        "{:<id_w$}  {:<name_w$}  {:>5}  {:<39}  {:>6}  {:>12}",
        "device", "name", "layer", "monitoring", "cost", "contribution"
    );
    for (device, part) in instance.devices.iter().zip(&parts) {
        let _ = writeln!(
            out,
            "{:<id_w$}  {:<name_w$}  {:>5}  {:<39}  {:>6}  {:>12.6}",
            device.id,
            device.name,
            part.layer,
            layer_name(part.layer),
            instance.schedule.cost(part.layer),
            part.contribution
        );
    }
    let _ = writeln!(out, "total cost: {}", alloc.total_cost);
    let _ = writeln!(out, "objective: {}", alloc.objective);
    out
}

pub fn solve_json(instance: &Instance, outcome: &SolveOutcome) -> Result<String> {
    let devices = outcome
        .allocation
        .as_ref()
        .map(|a| contribution_breakdown(a, instance))
        .transpose()?;
    let doc = SolveJson {
        status: status_name(outcome),
        engine: outcome.engine.name(),
        budget: instance.budget,
        min_feasible_budget: outcome.min_feasible_budget,
        total_cost: outcome.allocation.as_ref().map(|a| a.total_cost),
        objective: outcome.objective(),
        devices,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Single-budget CSV in the contributions schema.
pub fn solve_csv(instance: &Instance, outcome: &SolveOutcome) -> Result<String> {
    let report = SweepReport {
        engine: outcome.engine,
        entries: vec![layerguard::SweepEntry {
            budget: instance.budget,
            status: match &outcome.allocation {
                Some(a) => EntryStatus::Optimal {
                    allocation: a.clone(),
                    contributions: contribution_breakdown(a, instance)?,
                },
                None => EntryStatus::Infeasible { min_feasible_budget: outcome.min_feasible_budget },
            },
        }],
    };
    let mut buf = Vec::new();
    write_contributions(&mut buf, instance, &report)?;
    Ok(String::from_utf8(buf)?)
}

pub fn write_assignments<W: Write>(out: W, instance: &Instance, report: &SweepReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ASSIGNMENTS_HEADER)?;
    for entry in &report.entries {
        let budget = entry.budget.to_string();
        match &entry.status {
            EntryStatus::Optimal { contributions, .. } => {
                for c in contributions {
                    w.write_record([
                        budget.as_str(),
                        &c.device_id,
                        &c.layer.to_string(),
                        &instance.schedule.cost(c.layer).to_string(),
                    ])?;
                }
            }
            _ => {
                for d in &instance.devices {
                    w.write_record([budget.as_str(), &d.id, "", ""])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_contributions<W: Write>(out: W, instance: &Instance, report: &SweepReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONTRIBUTIONS_HEADER)?;
    for entry in &report.entries {
        let budget = entry.budget.to_string();
        match &entry.status {
            EntryStatus::Optimal { allocation, contributions } => {
                let objective = allocation.objective.to_string();
                let cost = allocation.total_cost.to_string();
                for c in contributions {
                    w.write_record([
                        budget.as_str(),
                        &c.device_id,
                        &c.contribution.to_string(),
                        &objective,
                        &cost,
                        "optimal",
                    ])?;
                }
            }
            _ => {
                for d in &instance.devices {
                    w.write_record([budget.as_str(), &d.id, "", "", "", entry.status_name()])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_summary(report: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>8}  {:<10}  {:>10}  {:>12}", "budget", "status", "total_cost", "objective");
    for e in &report.entries {
        match &e.status {
            EntryStatus::Optimal { allocation, .. } => {
                let _ = writeln!(
                    out,
                    "{:>8}  {:<10}  {:>10}  {:>12.6}",
                    e.budget, "optimal", allocation.total_cost, allocation.objective
                );
            }
            EntryStatus::Infeasible { min_feasible_budget } => {
                let _ = writeln!(out, "{:>8}  {:<10}  (minimum feasible budget {min_feasible_budget})", e.budget, "infeasible");
            }
            EntryStatus::Error { message } => {
                let _ = writeln!(out, "{:>8}  {:<10}  {message}", e.budget, "error");
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct SimulationJson {
    pub objective: f64,
    pub generator: &'static str,
    #[serde(flatten)]
    pub result: SimulationResult,
    pub z_score: f64,
}

pub const GENERATOR: &str = "ChaCha8";

pub fn simulation_table(objective: f64, r: &SimulationResult) -> String {
    format!(
        "objective: {objective}\nempirical mean: {}\nstandard error: {}\nz-score: {:.4}\ntrials: {}\nseed: {} ({GENERATOR})\n",
        r.mean_detected_weight,
        r.sample_std_error,
        r.z_score(objective),
        r.trials,
        r.seed
    )
}

pub fn simulation_json(objective: f64, r: &SimulationResult) -> Result<String> {
    let doc = SimulationJson { objective, generator: GENERATOR, result: *r, z_score: r.z_score(objective) };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn simulation_csv(objective: f64, r: &SimulationResult) -> String {
    format!(
        "objective,mean_detected_weight,sample_std_error,z_score,trials,seed\n{objective},{},{},{},{},{}\n",
        r.mean_detected_weight,
        r.sample_std_error,
        r.z_score(objective),
        r.trials,
        r.seed
    )
}
