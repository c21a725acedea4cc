//! Discrete-time fluid simulation of greedy fulfillment.
//!
//! Demand node i injects D_i units per unit time; FC j processes C_j units
//! per unit time and carries a queue q_j whose backlog is β_j(t) = q_j / C_j
//! time units. Each step the demand rate is routed to the FCs minimizing
//! ℓ_ij + β_j(t), ties split uniformly, and queues advance by
//! q_j ← max(0, q_j + inflow_j·Δt − C_j·Δt).
//!
//! State is kept in exact integers: queues are stored premultiplied so that
//! β_j in scale units is q_j / C_j, inflows are integer splits with the
//! remainder dealt to the lowest FC indices, and per-step mass conservation
//! (injected = processed + Δq) is an identity, not an approximation. The
//! one nonexact feature, the max(0, ·) floor, is counted when it clips.
//!
//! Convergence of the greedy dynamics to the static equilibrium backlogs is
//! measured and reported, never asserted; the one hard guarantee is that a
//! state initialized from equilibrium backlogs and routed by the
//! equilibrium assignment's proportions is an exact fixed point.

use thiserror::Error;

use crate::assignment::{Assignment, AssignmentError};
use crate::equilibrium::EquilibriumSolution;
use crate::instance::Instance;
use crate::quantity::Quantity;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("time step must be positive")]
    NonPositiveDt,
    #[error("sample interval must be positive")]
    ZeroSampleInterval,
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error("initial backlog vector has {got} entries, instance has {expected} fcs")]
    BacklogLength { expected: usize, got: usize },
    #[error("trace covers {trace} fcs, solution covers {solution}")]
    FcCountMismatch { trace: usize, solution: usize },
}

/// How the per-step demand rate is routed.
#[derive(Debug, Clone)]
pub enum Routing {
    /// To the argmin of ℓ_ij + β_j(t), ties split uniformly.
    Greedy,
    /// Fixed proportions of an assignment (stationarity checks).
    Proportional(Assignment),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Δt in scale units of time.
    pub dt: Quantity,
    pub steps: u64,
    /// Record every this many steps (the final state is always recorded).
    pub sample_every: u64,
    pub routing: Routing,
    /// Starting backlogs; zero queues when absent.
    pub initial_backlogs: Option<Vec<Quantity>>,
}

impl SimConfig {
    pub fn greedy(dt: Quantity, steps: u64) -> SimConfig {
        SimConfig {
            dt,
            steps,
            sample_every: (steps / 1000).max(1),
            routing: Routing::Greedy,
            initial_backlogs: None,
        }
    }
}

/// Backlog snapshot at one sampled step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSample {
    pub step: u64,
    /// Elapsed time in scale units.
    pub time: Quantity,
    pub backlogs: Vec<Quantity>,
}

/// Sampled backlog trajectories plus bookkeeping of the queue floor.
#[derive(Debug, Clone)]
pub struct DynamicsTrace {
    pub samples: Vec<TraceSample>,
    /// Steps on which some queue was clipped at zero.
    pub floor_events: u64,
    /// Demand mass discarded by the floor, in queue units.
    pub clipped_mass: i128,
}

impl DynamicsTrace {
    pub fn n_fcs(&self) -> usize {
        self.samples.first().map_or(0, |s| s.backlogs.len())
    }

    pub fn final_backlogs(&self) -> &[Quantity] {
        &self.samples.last().expect("trace has samples").backlogs
    }
}

fn rounded_div(numer: i128, denom: i128) -> i128 {
    (2 * numer + denom) / (2 * denom)
}

/// Runs the fluid dynamics for `config.steps` steps of length `config.dt`.
pub fn simulate(instance: &Instance, config: &SimConfig) -> Result<DynamicsTrace, DynamicsError> {
    if config.dt.raw() <= 0 {
        return Err(DynamicsError::NonPositiveDt);
    }
    if config.sample_every == 0 {
        return Err(DynamicsError::ZeroSampleInterval);
    }
    let nd = instance.n_demands();
    let nf = instance.n_fcs();
    let tau = config.dt.raw() as i128;
    let table = instance.distance_table();
    let capacities: Vec<i128> = instance.fcs().iter().map(|f| f.capacity as i128).collect();

    // Queues premultiplied by capacity: beta_j = queues[j] / capacities[j].
    let mut queues: Vec<i128> = match &config.initial_backlogs {
        None => vec![0; nf],
        Some(backlogs) => {
            if backlogs.len() != nf {
                return Err(DynamicsError::BacklogLength {
                    expected: nf,
                    got: backlogs.len(),
                });
            }
            backlogs
                .iter()
                .zip(&capacities)
                .map(|(b, &c)| b.raw() as i128 * c)
                .collect()
        }
    };
    if let Routing::Proportional(x) = &config.routing {
        x.validate_for(instance)?;
    }

    let backlog_of = |queues: &[i128], j: usize| -> i128 {
        if capacities[j] == 0 {
            0
        } else {
            rounded_div(queues[j], capacities[j])
        }
    };
    let snapshot = |step: u64, queues: &[i128]| TraceSample {
        step,
        time: Quantity(
            i64::try_from(step as i128 * tau).expect("simulation time overflow"),
        ),
        backlogs: (0..nf)
            .map(|j| Quantity(i64::try_from(backlog_of(queues, j)).expect("backlog overflow")))
            .collect(),
    };

    let mut samples = vec![snapshot(0, &queues)];
    let mut floor_events = 0u64;
    let mut clipped_mass: i128 = 0;
    let mut inflow = vec![0i128; nf];

    for step in 1..=config.steps {
        inflow.fill(0);
        match &config.routing {
            Routing::Greedy => {
                for i in 0..nd {
                    let quantity = instance.demands()[i].quantity;
                    if quantity == 0 {
                        continue;
                    }
                    let mut best: i128 = i128::MAX;
                    for j in 0..nf {
                        if capacities[j] == 0 {
                            continue;
                        }
                        let offer = table[i][j].raw() as i128 + backlog_of(&queues, j);
                        if offer < best {
                            best = offer;
                        }
                    }
                    let argmin: Vec<usize> = (0..nf)
                        .filter(|&j| {
                            capacities[j] != 0
                                && table[i][j].raw() as i128 + backlog_of(&queues, j) == best
                        })
                        .collect();
                    let mass = quantity as i128 * tau;
                    let share = mass / argmin.len() as i128;
                    let mut remainder = mass % argmin.len() as i128;
                    for &j in &argmin {
                        inflow[j] += share;
                        if remainder > 0 {
                            inflow[j] += 1;
                            remainder -= 1;
                        }
                    }
                }
            }
            Routing::Proportional(x) => {
                for (_, j, amount) in x.entries() {
                    inflow[j] += amount as i128 * tau;
                }
            }
        }
        // Routed mass per step always sums to the injected demand rate.
        debug_assert_eq!(
            inflow.iter().sum::<i128>(),
            instance.total_demand() as i128 * tau
        );
        let mut clipped_this_step = false;
        for j in 0..nf {
            let drained = queues[j] + inflow[j] - capacities[j] * tau;
            if drained < 0 {
                clipped_this_step = true;
                clipped_mass += -drained;
                queues[j] = 0;
            } else {
                queues[j] = drained;
            }
        }
        if clipped_this_step {
            floor_events += 1;
        }
        if step % config.sample_every == 0 || step == config.steps {
            samples.push(snapshot(step, &queues));
        }
    }

    Ok(DynamicsTrace {
        samples,
        floor_events,
        clipped_mass,
    })
}

/// How far the simulated backlogs sit from the static equilibrium values.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// max_j |β_j(T) − β*_j| at the final sample.
    pub final_max_residual: Quantity,
    /// Time-average over samples of the max residual.
    pub mean_max_residual: Quantity,
    pub per_fc_final_residual: Vec<Quantity>,
    /// True when the residual did not decay between the last two sample
    /// windows; reported, never asserted.
    pub oscillating: bool,
}

/// Compares a trace against static equilibrium backlogs.
pub fn compare_to_static(
    trace: &DynamicsTrace,
    sol: &EquilibriumSolution,
) -> Result<ConvergenceReport, DynamicsError> {
    let nf = trace.n_fcs();
    if nf != sol.backlogs.len() {
        return Err(DynamicsError::FcCountMismatch {
            trace: nf,
            solution: sol.backlogs.len(),
        });
    }
    let max_residual = |sample: &TraceSample| -> i64 {
        sample
            .backlogs
            .iter()
            .zip(&sol.backlogs)
            .map(|(b, b_star)| (b.raw() - b_star.raw()).abs())
            .max()
            .unwrap_or(0)
    };
    let final_sample = trace.samples.last().expect("trace has samples");
    let per_fc_final_residual: Vec<Quantity> = final_sample
        .backlogs
        .iter()
        .zip(&sol.backlogs)
        .map(|(b, b_star)| Quantity((b.raw() - b_star.raw()).abs()))
        .collect();
    let residuals: Vec<i64> = trace.samples.iter().map(max_residual).collect();
    let mean = residuals.iter().map(|&r| r as i128).sum::<i128>() / residuals.len() as i128;

    // Compare the max residual over the last tenth of samples against the
    // tenth before it.
    let window = (residuals.len() / 10).max(1);
    let last = residuals[residuals.len() - window..]
        .iter()
        .max()
        .copied()
        .unwrap_or(0);
    let previous = residuals
        [residuals.len().saturating_sub(2 * window)..residuals.len() - window]
        .iter()
        .max()
        .copied()
        .unwrap_or(last);
    Ok(ConvergenceReport {
        final_max_residual: Quantity(residuals.last().copied().unwrap_or(0)),
        mean_max_residual: Quantity(i64::try_from(mean).expect("mean residual overflow")),
        per_fc_final_residual,
        oscillating: last > previous,
    })
}
