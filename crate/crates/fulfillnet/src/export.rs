//! File formats for solver outputs: CSV tables with exact decimal
//! quantities (no float formatting anywhere) and JSON dumps carrying exact
//! scaled integers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::Assignment;
use crate::dynamics::{ConvergenceReport, DynamicsTrace};
use crate::equilibrium::EquilibriumSolution;
use crate::instance::{Instance, InstanceError};
use crate::quantity::{weighted_sum, Quantity};
use crate::regionalize::{RegionPart, Regionalization, RegionalizedSolution};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("malformed document: {0}")]
    Parse(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n', ';']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Assignment rows (demand_id, fc_id, flow, distance) with a totals footer
/// carrying the flow sum and exact cost.
pub fn assignment_csv(instance: &Instance, x: &Assignment) -> String {
    let scale = instance.scale();
    let mut out = String::from("demand_id,fc_id,flow,distance\n");
    let mut total_flow: u64 = 0;
    for (i, j, amount) in x.entries() {
        total_flow += amount;
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_field(&instance.demands()[i].id),
            csv_field(&instance.fcs()[j].id),
            amount,
            instance.distance(i, j).decimal_string(scale),
        ));
    }
    out.push_str(&format!(
        "total,,{},{}\n",
        total_flow,
        x.cost().decimal_string(scale)
    ));
    out
}

/// Backlog rows (fc_id, backlog).
pub fn backlogs_csv(instance: &Instance, sol: &EquilibriumSolution) -> String {
    let scale = instance.scale();
    let mut out = String::from("fc_id,backlog\n");
    for (j, f) in instance.fcs().iter().enumerate() {
        out.push_str(&format!(
            "{},{}\n",
            csv_field(&f.id),
            sol.backlogs[j].decimal_string(scale)
        ));
    }
    out
}

/// Delay rows (demand_id, delay, assigned_fcs); multiple FCs are joined
/// with '|'.
pub fn delays_csv(instance: &Instance, sol: &EquilibriumSolution) -> String {
    let scale = instance.scale();
    let mut out = String::from("demand_id,delay,assigned_fcs\n");
    for (i, d) in instance.demands().iter().enumerate() {
        let assigned: Vec<&str> = (0..instance.n_fcs())
            .filter(|&j| sol.assignment.flow(i, j) > 0)
            .map(|j| instance.fcs()[j].id.as_str())
            .collect();
        out.push_str(&format!(
            "{},{},{}\n",
            csv_field(&d.id),
            sol.delays[i].decimal_string(scale),
            csv_field(&assigned.join("|")),
        ));
    }
    out
}

/// Per-region rows plus a totals summary row.
pub fn regional_summary_csv(instance: &Instance, sol: &RegionalizedSolution) -> String {
    let scale = instance.scale();
    let mut out =
        String::from("region,demands,fcs,total_demand,total_capacity,cost,delay\n");
    for (p, region) in sol.regions.iter().enumerate() {
        let demand: u64 = region
            .part
            .demands
            .iter()
            .map(|&i| instance.demands()[i].quantity)
            .sum();
        let capacity: u64 = region
            .part
            .fcs
            .iter()
            .map(|&j| instance.fcs()[j].capacity)
            .sum();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p,
            region.part.demands.len(),
            region.part.fcs.len(),
            demand,
            capacity,
            region.solution.assignment.cost().decimal_string(scale),
            region.solution.total_delay.decimal_string(scale),
        ));
    }
    out.push_str(&format!(
        "total,{},{},{},{},,{}\n",
        instance.n_demands(),
        sol.regions.iter().map(|r| r.part.fcs.len()).sum::<usize>(),
        instance.total_demand(),
        instance.total_capacity(),
        sol.total_delay.decimal_string(scale),
    ));
    out
}

/// Trace rows (t, fc_id, backlog), one row per sampled step per FC.
pub fn trace_csv(instance: &Instance, trace: &DynamicsTrace) -> String {
    let scale = instance.scale();
    let mut out = String::from("t,fc_id,backlog\n");
    for sample in &trace.samples {
        for (j, f) in instance.fcs().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                sample.time.decimal_string(scale),
                csv_field(&f.id),
                sample.backlogs[j].decimal_string(scale),
            ));
        }
    }
    out
}

// --- JSON solution dump -----------------------------------------------

#[derive(Serialize, Deserialize)]
struct SolutionDoc {
    scale: u64,
    cost: i64,
    total_delay: i64,
    backlogs: Vec<BacklogDoc>,
    delays: Vec<DelayDoc>,
    flows: Vec<FlowDoc>,
}

#[derive(Serialize, Deserialize)]
struct BacklogDoc {
    fc: String,
    backlog: i64,
}

#[derive(Serialize, Deserialize)]
struct DelayDoc {
    demand: String,
    delay: i64,
}

#[derive(Serialize, Deserialize)]
struct FlowDoc {
    demand: String,
    fc: String,
    flow: u64,
}

/// Serializes a solution with exact scaled integers.
pub fn save_solution(instance: &Instance, sol: &EquilibriumSolution) -> Vec<u8> {
    let doc = SolutionDoc {
        scale: instance.scale(),
        cost: sol.assignment.cost().raw(),
        total_delay: sol.total_delay.raw(),
        backlogs: instance
            .fcs()
            .iter()
            .zip(&sol.backlogs)
            .map(|(f, b)| BacklogDoc {
                fc: f.id.clone(),
                backlog: b.raw(),
            })
            .collect(),
        delays: instance
            .demands()
            .iter()
            .zip(&sol.delays)
            .map(|(d, delta)| DelayDoc {
                demand: d.id.clone(),
                delay: delta.raw(),
            })
            .collect(),
        flows: sol
            .assignment
            .entries()
            .map(|(i, j, amount)| FlowDoc {
                demand: instance.demands()[i].id.clone(),
                fc: instance.fcs()[j].id.clone(),
                flow: amount,
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("solution serialization");
    bytes.push(b'\n');
    bytes
}

/// Loads a solution dump back against its instance. The assignment cost is
/// recomputed from the flows; backlogs, delays, and the stated total delay
/// are taken as-is so that verification can catch inconsistencies.
pub fn load_solution(
    instance: &Instance,
    source: &[u8],
) -> Result<EquilibriumSolution, ExportError> {
    let doc: SolutionDoc =
        serde_json::from_slice(source).map_err(|e| ExportError::Parse(e.to_string()))?;
    let mut backlogs = vec![Quantity::ZERO; instance.n_fcs()];
    for b in &doc.backlogs {
        backlogs[instance.fc_index(&b.fc)?] = Quantity(b.backlog);
    }
    let mut delays = vec![Quantity::ZERO; instance.n_demands()];
    for d in &doc.delays {
        delays[instance.demand_index(&d.demand)?] = Quantity(d.delay);
    }
    let mut flows = std::collections::BTreeMap::new();
    for f in &doc.flows {
        let key = (instance.demand_index(&f.demand)?, instance.fc_index(&f.fc)?);
        *flows.entry(key).or_insert(0) += f.flow;
    }
    Ok(EquilibriumSolution {
        assignment: Assignment::from_flows(instance, flows),
        backlogs,
        delays,
        total_delay: Quantity(doc.total_delay),
    })
}

// --- Regionalization file ----------------------------------------------

#[derive(Serialize, Deserialize)]
struct RegionalizationDoc {
    parts: Vec<PartDoc>,
}

#[derive(Serialize, Deserialize)]
struct PartDoc {
    demands: Vec<String>,
    fcs: Vec<String>,
}

/// Serializes a regionalization as id lists.
pub fn save_regionalization(instance: &Instance, reg: &Regionalization) -> Vec<u8> {
    let doc = RegionalizationDoc {
        parts: reg
            .parts
            .iter()
            .map(|part| PartDoc {
                demands: part
                    .demands
                    .iter()
                    .map(|&i| instance.demands()[i].id.clone())
                    .collect(),
                fcs: part
                    .fcs
                    .iter()
                    .map(|&j| instance.fcs()[j].id.clone())
                    .collect(),
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("regionalization serialization");
    bytes.push(b'\n');
    bytes
}

/// Parses a regionalization file against an instance, resolving ids.
pub fn load_regionalization(
    instance: &Instance,
    source: &[u8],
) -> Result<Regionalization, ExportError> {
    let doc: RegionalizationDoc =
        serde_json::from_slice(source).map_err(|e| ExportError::Parse(e.to_string()))?;
    let mut parts = Vec::with_capacity(doc.parts.len());
    for part in &doc.parts {
        let mut demands = Vec::with_capacity(part.demands.len());
        for id in &part.demands {
            demands.push(instance.demand_index(id)?);
        }
        let mut fcs = Vec::with_capacity(part.fcs.len());
        for id in &part.fcs {
            fcs.push(instance.fc_index(id)?);
        }
        parts.push(RegionPart { demands, fcs });
    }
    Ok(Regionalization { parts })
}

// --- Simulation summary --------------------------------------------------

#[derive(Serialize)]
struct SimulationSummaryDoc<'a> {
    scale: u64,
    steps: u64,
    floor_events: u64,
    clipped_mass: String,
    final_max_residual: i64,
    mean_max_residual: i64,
    oscillating: bool,
    final_backlogs: Vec<BacklogDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

/// JSON summary of a simulation run and its distance to the static
/// equilibrium.
pub fn simulation_summary_json(
    instance: &Instance,
    trace: &DynamicsTrace,
    report: &ConvergenceReport,
) -> Vec<u8> {
    let last = trace.samples.last().expect("trace has samples");
    let doc = SimulationSummaryDoc {
        scale: instance.scale(),
        steps: last.step,
        floor_events: trace.floor_events,
        clipped_mass: trace.clipped_mass.to_string(),
        final_max_residual: report.final_max_residual.raw(),
        mean_max_residual: report.mean_max_residual.raw(),
        oscillating: report.oscillating,
        final_backlogs: instance
            .fcs()
            .iter()
            .zip(&last.backlogs)
            .map(|(f, b)| BacklogDoc {
                fc: f.id.clone(),
                backlog: b.raw(),
            })
            .collect(),
        note: None,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("summary serialization");
    bytes.push(b'\n');
    bytes
}

/// Recomputes the stored total delay of a solution document (sanity helper
/// for round-trip tests).
pub fn recompute_total_delay(instance: &Instance, sol: &EquilibriumSolution) -> Quantity {
    weighted_sum(
        instance
            .demands()
            .iter()
            .zip(&sol.delays)
            .map(|(d, &delta)| (d.quantity, delta)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{min_delay_equilibrium, verify_equilibrium};
    use crate::quantity::DEFAULT_SCALE;

    fn q(units: i64) -> Quantity {
        Quantity(units * DEFAULT_SCALE as i64)
    }

    fn sample_instance() -> Instance {
        Instance::line(
            vec![("d0".into(), q(0), 1), ("d1".into(), q(0), 1)],
            vec![("near".into(), q(1), 1), ("far".into(), q(5), 1)],
        )
        .unwrap()
    }

    #[test]
    fn assignment_csv_has_totals_footer() {
        let instance = sample_instance();
        let sol = min_delay_equilibrium(&instance).unwrap();
        let csv = assignment_csv(&instance, &sol.assignment);
        let last = csv.lines().last().unwrap();
        assert!(last.starts_with("total,,2,"));
        assert!(csv.starts_with("demand_id,fc_id,flow,distance\n"));
    }

    #[test]
    fn solution_json_round_trips_and_verifies() {
        let instance = sample_instance();
        let sol = min_delay_equilibrium(&instance).unwrap();
        let bytes = save_solution(&instance, &sol);
        let reloaded = load_solution(&instance, &bytes).unwrap();
        assert_eq!(reloaded, sol);
        assert!(verify_equilibrium(&instance, &reloaded).is_pass());
        assert_eq!(recompute_total_delay(&instance, &reloaded), sol.total_delay);
    }

    #[test]
    fn regionalization_round_trips_by_id() {
        let instance = sample_instance();
        let reg = Regionalization {
            parts: vec![
                RegionPart {
                    demands: vec![0],
                    fcs: vec![1],
                },
                RegionPart {
                    demands: vec![1],
                    fcs: vec![0],
                },
            ],
        };
        let bytes = save_regionalization(&instance, &reg);
        let reloaded = load_regionalization(&instance, &bytes).unwrap();
        assert_eq!(reloaded, reg);
        let err = load_regionalization(&instance, br#"{"parts":[{"demands":["nope"],"fcs":[]}]}"#);
        assert!(err.is_err());
    }

    #[test]
    fn csv_fields_are_escaped() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("a\"b"), "\"a\"\"b\"");
    }

    #[test]
    fn backlog_and_delay_tables_use_exact_decimals() {
        let instance = sample_instance();
        let sol = min_delay_equilibrium(&instance).unwrap();
        let backlogs = backlogs_csv(&instance, &sol);
        assert!(backlogs.contains("near,4\n"));
        assert!(backlogs.contains("far,0\n"));
        let delays = delays_csv(&instance, &sol);
        assert!(delays.lines().any(|l| l.starts_with("d0,5,")));
    }
}
