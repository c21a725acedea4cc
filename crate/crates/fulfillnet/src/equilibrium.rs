//! Equilibrium backlogs and delays.
//!
//! An equilibrium solution is a set of backlogs β_j ≥ 0 and an assignment
//! such that (1) no FC exceeds its capacity, (2) every demand is assigned
//! only to FCs minimizing ℓ_ij + β_j, and (3) FCs with spare capacity have
//! β_j = 0. Equilibria are exactly the optimal primal/dual pairs of the
//! transportation LP and its dual
//!
//!   max  Σ D_i δ_i − Σ C_j β_j
//!   s.t. δ_i − β_j ≤ ℓ_ij,  β ≥ 0
//!
//! The minimum-delay equilibrium comes from single-source shortest paths on
//! the residual graph of a minimum-cost assignment: vertices are a root r,
//! the FCs, and the (split) demands; r reaches each FC at weight 0, each
//! assigned pair contributes an arc FC→demand of weight −ℓ_ij, and each
//! unassigned pair an arc demand→FC of weight +ℓ_ij. With β_j and δ_i set to
//! the negated path distances, the result simultaneously minimizes every
//! δ_i over all equilibria.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::assignment::{min_cost_assignment, Assignment, AssignmentError};
use crate::instance::Instance;
use crate::quantity::{weighted_sum, Quantity};

/// An assignment together with the backlogs and delays supporting it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumSolution {
    pub assignment: Assignment,
    /// β_j per FC index, in scale units of time.
    pub backlogs: Vec<Quantity>,
    /// δ_i per demand index: min_j ℓ_ij + β_j.
    pub delays: Vec<Quantity>,
    /// Σ_i D_i δ_i.
    pub total_delay: Quantity,
}

impl EquilibriumSolution {
    fn assemble(
        instance: &Instance,
        assignment: Assignment,
        backlogs: Vec<Quantity>,
        delays: Vec<Quantity>,
    ) -> EquilibriumSolution {
        let total_delay = weighted_sum(
            instance
                .demands()
                .iter()
                .zip(&delays)
                .map(|(d, &delay)| (d.quantity, delay)),
        );
        EquilibriumSolution {
            assignment,
            backlogs,
            delays,
            total_delay,
        }
    }
}

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error("assignment cost {given} is not minimal (optimum {optimal})")]
    NotMinimumCost { given: Quantity, optimal: Quantity },
    #[error("negative cycle in residual graph: assignment is not minimum cost")]
    NegativeCycle,
    #[error("instance exceeds oracle bound (total demand {total_demand} > 8 or {n_fcs} fcs > 3)")]
    OracleBound { total_demand: u64, n_fcs: usize },
    #[error("oracle requires distances in whole base units")]
    OracleNeedsBaseUnits,
    #[error("oracle found no equilibrium within the backlog bound")]
    OracleExhausted,
}

/// One split part of a demand: `amount` units of demand `demand` wholly
/// assigned to FC `fc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitPart {
    pub demand: usize,
    pub fc: usize,
    pub amount: u64,
}

/// The residual graph of an integral assignment in which every split part
/// ships to exactly one FC. Built from a minimum-cost assignment it contains
/// no negative-weight cycle.
pub struct ResidualGraph {
    n_vertices: usize,
    n_fcs: usize,
    // Arcs grouped by tail for the label-correcting pass.
    heads: Vec<Vec<(usize, i64)>>,
}

impl ResidualGraph {
    /// Vertex 0 is the root; FCs occupy 1..=n_fcs; parts follow.
    pub fn build(instance: &Instance, parts: &[SplitPart]) -> ResidualGraph {
        let nf = instance.n_fcs();
        let n_vertices = 1 + nf + parts.len();
        let mut heads = vec![Vec::new(); n_vertices];
        for j in 0..nf {
            heads[0].push((1 + j, 0));
        }
        for (p, part) in parts.iter().enumerate() {
            let part_vertex = 1 + nf + p;
            for j in 0..nf {
                let weight = instance.distance(part.demand, j).raw();
                if j == part.fc {
                    heads[1 + j].push((part_vertex, -weight));
                } else {
                    heads[part_vertex].push((1 + j, weight));
                }
            }
        }
        ResidualGraph {
            n_vertices,
            n_fcs: nf,
            heads,
        }
    }

    pub fn fc_vertex(&self, j: usize) -> usize {
        1 + j
    }

    pub fn part_vertex(&self, p: usize) -> usize {
        1 + self.n_fcs + p
    }

    /// Label-correcting (FIFO Bellman-Ford) shortest paths from the root,
    /// tolerating negative arc weights. Errors on a negative cycle.
    pub fn shortest_paths_from_root(&self) -> Result<Vec<i128>, EquilibriumError> {
        const UNREACHED: i128 = i128::MAX / 2;
        let n = self.n_vertices;
        let mut dist = vec![UNREACHED; n];
        let mut in_queue = vec![false; n];
        let mut enqueues = vec![0u32; n];
        let mut queue = VecDeque::new();
        dist[0] = 0;
        queue.push_back(0);
        in_queue[0] = true;
        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            let du = dist[u];
            for &(v, w) in &self.heads[u] {
                let dv = du + w as i128;
                if dv < dist[v] {
                    dist[v] = dv;
                    if !in_queue[v] {
                        enqueues[v] += 1;
                        if enqueues[v] as usize > n {
                            return Err(EquilibriumError::NegativeCycle);
                        }
                        in_queue[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(dist)
    }

    pub fn has_negative_cycle(&self) -> bool {
        matches!(
            self.shortest_paths_from_root(),
            Err(EquilibriumError::NegativeCycle)
        )
    }
}

fn duals_from_assignment(
    instance: &Instance,
    x: &Assignment,
) -> Result<(Vec<Quantity>, Vec<Quantity>), EquilibriumError> {
    let parts: Vec<SplitPart> = x
        .entries()
        .map(|(demand, fc, amount)| SplitPart { demand, fc, amount })
        .collect();
    let graph = ResidualGraph::build(instance, &parts);
    let dist = graph.shortest_paths_from_root()?;

    let backlogs: Vec<Quantity> = (0..instance.n_fcs())
        .map(|j| {
            let beta = -dist[graph.fc_vertex(j)];
            assert!(beta >= 0, "root reaches every fc at weight <= 0");
            Quantity(i64::try_from(beta).expect("backlog overflow"))
        })
        .collect();

    let mut delays: Vec<Option<Quantity>> = vec![None; instance.n_demands()];
    for (p, part) in parts.iter().enumerate() {
        let delta = Quantity(
            i64::try_from(-dist[graph.part_vertex(p)]).expect("delay overflow"),
        );
        match delays[part.demand] {
            None => delays[part.demand] = Some(delta),
            // Split parts of one demand share a location and the binding
            // dual constraints, so their delays provably coincide.
            Some(existing) => assert_eq!(
                existing, delta,
                "split parts of one demand received different delays"
            ),
        }
    }
    let delays: Vec<Quantity> = delays
        .into_iter()
        .enumerate()
        .map(|(i, delta)| {
            delta.unwrap_or_else(|| {
                // Demands with zero quantity ship nothing; their delay is
                // still the best offer across FCs.
                (0..instance.n_fcs())
                    .map(|j| instance.distance(i, j).checked_add(backlogs[j]))
                    .min()
                    .unwrap_or(Quantity::ZERO)
            })
        })
        .collect();
    Ok((backlogs, delays))
}

/// Computes the minimum-delay equilibrium solution: a minimum-cost
/// assignment plus the unique backlogs and delays minimizing every δ_i
/// simultaneously.
pub fn min_delay_equilibrium(
    instance: &Instance,
) -> Result<EquilibriumSolution, EquilibriumError> {
    let x = min_cost_assignment(instance)?;
    let (backlogs, delays) = duals_from_assignment(instance, &x)?;
    Ok(EquilibriumSolution::assemble(instance, x, backlogs, delays))
}

/// The minimum-delay duals paired with a caller-supplied minimum-cost
/// assignment. The delays and backlogs are independent of which optimal
/// assignment is fixed.
pub fn equilibrium_delay_of(
    instance: &Instance,
    x: &Assignment,
) -> Result<EquilibriumSolution, EquilibriumError> {
    x.validate_for(instance)?;
    let optimal = min_cost_assignment(instance)?.cost();
    if x.cost() != optimal {
        return Err(EquilibriumError::NotMinimumCost {
            given: x.cost(),
            optimal,
        });
    }
    let (backlogs, delays) = duals_from_assignment(instance, x)?;
    Ok(EquilibriumSolution::assemble(
        instance,
        x.clone(),
        backlogs,
        delays,
    ))
}

/// A violated equilibrium condition, reported by [`verify_equilibrium`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Σ_j x_ij ≠ D_i.
    FlowConservation {
        demand: usize,
        shipped: u64,
        required: u64,
    },
    /// Σ_i x_ij > C_j.
    CapacityExceeded { fc: usize, load: u64, capacity: u64 },
    NegativeBacklog { fc: usize },
    /// δ_i − β_j > ℓ_ij for some pair.
    DualInfeasible { demand: usize, fc: usize },
    /// δ_i differs from min_j ℓ_ij + β_j.
    DelayNotMinimal {
        demand: usize,
        stated: Quantity,
        minimum: Quantity,
    },
    /// x_ij > 0 but j is not in argmin_j ℓ_ij + β_j.
    SupportNotTight { demand: usize, fc: usize },
    /// FC with spare capacity carries a positive backlog.
    SlackWithBacklog { fc: usize },
    /// The assignment is not a minimum-cost assignment.
    CostSuboptimal { cost: Quantity, optimal: Quantity },
    /// Stored total delay differs from Σ D_i δ_i.
    TotalDelayMismatch { stated: Quantity, computed: Quantity },
}

/// The outcome of verification: pass, or the list of violated conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact check of the equilibrium conditions plus dual feasibility and
/// cost-optimality of the assignment. Violations are returned, never thrown.
pub fn verify_equilibrium(instance: &Instance, sol: &EquilibriumSolution) -> Verdict {
    let mut violations = Vec::new();
    let nd = instance.n_demands();
    let nf = instance.n_fcs();

    let totals = sol.assignment.demand_totals(nd);
    for (i, d) in instance.demands().iter().enumerate() {
        if totals[i] != d.quantity {
            violations.push(Violation::FlowConservation {
                demand: i,
                shipped: totals[i],
                required: d.quantity,
            });
        }
    }
    let loads = sol.assignment.fc_loads(nf);
    for (j, f) in instance.fcs().iter().enumerate() {
        if loads[j] > f.capacity {
            violations.push(Violation::CapacityExceeded {
                fc: j,
                load: loads[j],
                capacity: f.capacity,
            });
        }
    }
    for (j, &beta) in sol.backlogs.iter().enumerate() {
        if beta.raw() < 0 {
            violations.push(Violation::NegativeBacklog { fc: j });
        }
    }
    for i in 0..nd {
        let mut minimum: Option<Quantity> = None;
        for j in 0..nf {
            let offer = instance.distance(i, j).checked_add(sol.backlogs[j]);
            minimum = Some(minimum.map_or(offer, |m| m.min(offer)));
            if sol.delays[i].checked_sub(sol.backlogs[j]) > instance.distance(i, j) {
                violations.push(Violation::DualInfeasible { demand: i, fc: j });
            }
        }
        if let Some(minimum) = minimum {
            if sol.delays[i] != minimum {
                violations.push(Violation::DelayNotMinimal {
                    demand: i,
                    stated: sol.delays[i],
                    minimum,
                });
            }
        }
    }
    // The argmin is a set; membership, never a unique choice, is checked.
    for (i, j, _) in sol.assignment.entries() {
        if sol.delays[i] != instance.distance(i, j).checked_add(sol.backlogs[j]) {
            violations.push(Violation::SupportNotTight { demand: i, fc: j });
        }
    }
    for (j, f) in instance.fcs().iter().enumerate() {
        if loads[j] < f.capacity && sol.backlogs[j].raw() > 0 {
            violations.push(Violation::SlackWithBacklog { fc: j });
        }
    }
    match min_cost_assignment(instance) {
        Ok(optimal) => {
            if sol.assignment.cost() != optimal.cost() {
                violations.push(Violation::CostSuboptimal {
                    cost: sol.assignment.cost(),
                    optimal: optimal.cost(),
                });
            }
        }
        Err(_) => violations.push(Violation::CostSuboptimal {
            cost: sol.assignment.cost(),
            optimal: Quantity::ZERO,
        }),
    }
    let computed = weighted_sum(
        instance
            .demands()
            .iter()
            .zip(&sol.delays)
            .map(|(d, &delta)| (d.quantity, delta)),
    );
    if computed != sol.total_delay {
        violations.push(Violation::TotalDelayMismatch {
            stated: sol.total_delay,
            computed,
        });
    }
    Verdict { violations }
}

/// The bipartite graph of tight dual constraints δ_i = ℓ_ij + β_j. It
/// contains the support of every minimum-cost assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TightEdgeGraph {
    pub n_demands: usize,
    pub n_fcs: usize,
    /// (demand index, fc index) pairs, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl TightEdgeGraph {
    /// Connected components as (demand indices, fc indices) pairs, in order
    /// of their smallest vertex. Isolated FCs form their own components;
    /// demands always have at least one tight edge in a valid solution.
    pub fn components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = self.n_demands + self.n_fcs;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        for &(i, j) in &self.edges {
            let a = find(&mut parent, i);
            let b = find(&mut parent, self.n_demands + j);
            parent[a.max(b)] = a.min(b);
        }
        let mut groups: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for v in 0..n {
            let root = find(&mut parent, v);
            let entry = groups.entry(root).or_default();
            if v < self.n_demands {
                entry.0.push(v);
            } else {
                entry.1.push(v - self.n_demands);
            }
        }
        groups.into_values().collect()
    }

    /// True when every component contains an FC with zero backlog; holds for
    /// minimum-delay solutions.
    pub fn every_component_has_zero_backlog_fc(&self, backlogs: &[Quantity]) -> bool {
        self.components()
            .iter()
            .all(|(_, fcs)| fcs.iter().any(|&j| backlogs[j] == Quantity::ZERO))
    }
}

/// Collects the exact tight-edge set of a verified equilibrium solution.
pub fn tight_edges(instance: &Instance, sol: &EquilibriumSolution) -> TightEdgeGraph {
    let mut edges = Vec::new();
    for i in 0..instance.n_demands() {
        for j in 0..instance.n_fcs() {
            if sol.delays[i] == instance.distance(i, j).checked_add(sol.backlogs[j]) {
                edges.push((i, j));
            }
        }
    }
    TightEdgeGraph {
        n_demands: instance.n_demands(),
        n_fcs: instance.n_fcs(),
        edges,
    }
}

/// A backlog/delay pair enumerated by the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumDual {
    pub backlogs: Vec<Quantity>,
    pub delays: Vec<Quantity>,
    pub total_delay: Quantity,
}

struct OracleGrid {
    instance_scale: i64,
    steps_per_fc: i64,
}

fn oracle_grid(instance: &Instance) -> Result<OracleGrid, EquilibriumError> {
    let total_demand = instance.total_demand();
    let nf = instance.n_fcs();
    if total_demand > 8 || nf > 3 {
        return Err(EquilibriumError::OracleBound {
            total_demand,
            n_fcs: nf,
        });
    }
    let scale = instance.scale() as i64;
    let mut max_units: i64 = 0;
    for i in 0..instance.n_demands() {
        for j in 0..nf {
            let d = instance.distance(i, j).raw();
            if d % scale != 0 {
                return Err(EquilibriumError::OracleNeedsBaseUnits);
            }
            max_units = max_units.max(d / scale);
        }
    }
    // Safe upper bound on any equilibrium backlog: total delay is at most a
    // D-factor above the optimum, which itself is at most D * max ℓ.
    Ok(OracleGrid {
        instance_scale: scale,
        steps_per_fc: max_units * total_demand as i64 + 1,
    })
}

fn for_each_equilibrium(
    instance: &Instance,
    mut visit: impl FnMut(&[Quantity], &[Quantity], Quantity, &BTreeMap<(usize, usize), u64>),
) -> Result<(), EquilibriumError> {
    let grid = oracle_grid(instance)?;
    let nd = instance.n_demands();
    let nf = instance.n_fcs();
    let table = instance.distance_table();
    let demands: Vec<u64> = instance.demands().iter().map(|d| d.quantity).collect();
    let capacities: Vec<u64> = instance.fcs().iter().map(|f| f.capacity).collect();
    let total_demand: u64 = demands.iter().sum();

    let mut counters = vec![0i64; nf];
    loop {
        let backlogs: Vec<Quantity> = counters
            .iter()
            .map(|&c| Quantity(c * grid.instance_scale))
            .collect();
        let saturated_capacity: u64 = (0..nf)
            .filter(|&j| counters[j] > 0)
            .map(|j| capacities[j])
            .sum();
        if saturated_capacity <= total_demand {
            let delays: Vec<Quantity> = (0..nd)
                .map(|i| {
                    (0..nf)
                        .map(|j| table[i][j].checked_add(backlogs[j]))
                        .min()
                        .unwrap_or(Quantity::ZERO)
                })
                .collect();
            let forced: Vec<bool> = counters.iter().map(|&c| c > 0).collect();
            let allowed =
                |i: usize, j: usize| table[i][j].checked_add(backlogs[j]) == delays[i];
            if let Some(flows) = feasibility_matching(&demands, &capacities, &forced, allowed)
            {
                let total_delay =
                    weighted_sum(demands.iter().zip(&delays).map(|(&d, &delta)| (d, delta)));
                visit(&backlogs, &delays, total_delay, &flows);
            }
        }
        // Advance the mixed-radix counter over the backlog grid.
        let mut axis = 0;
        loop {
            if axis == nf {
                return Ok(());
            }
            counters[axis] += 1;
            if counters[axis] < grid.steps_per_fc {
                break;
            }
            counters[axis] = 0;
            axis += 1;
        }
    }
}

/// Existence check for an assignment supported on the tight arcs that ships
/// all demand, respects capacities, and saturates every FC with β_j > 0.
/// Solved as a feasible-circulation problem with lower bounds.
fn feasibility_matching(
    demands: &[u64],
    capacities: &[u64],
    forced: &[bool],
    allowed: impl Fn(usize, usize) -> bool,
) -> Option<BTreeMap<(usize, usize), u64>> {
    let nd = demands.len();
    let nf = capacities.len();
    // Vertices: 0 = super source, 1 = super sink, 2 = source, 3 = sink,
    // demands at 4.., FCs after them.
    let s_star = 0;
    let t_star = 1;
    let source = 2;
    let sink = 3;
    let demand_v = |i: usize| 4 + i;
    let fc_v = |j: usize| 4 + nd + j;
    let mut graph = MaxFlow::new(4 + nd + nf);

    // Source→demand arcs carry lower bound = upper bound = D_i.
    let mut required: u64 = 0;
    for (i, &d) in demands.iter().enumerate() {
        if d > 0 {
            graph.add_edge(s_star, demand_v(i), d);
            graph.add_edge(source, t_star, d);
            required += d;
        }
    }
    let mut pair_edges = BTreeMap::new();
    for i in 0..nd {
        for j in 0..nf {
            if demands[i] > 0 && allowed(i, j) {
                let e = graph.add_edge(demand_v(i), fc_v(j), demands[i]);
                pair_edges.insert((i, j), e);
            }
        }
    }
    for (j, &c) in capacities.iter().enumerate() {
        if forced[j] {
            // Lower bound C_j on the fc→sink arc.
            if c > 0 {
                graph.add_edge(s_star, sink, c);
                graph.add_edge(fc_v(j), t_star, c);
                required += c;
            }
        } else {
            graph.add_edge(fc_v(j), sink, c);
        }
    }
    graph.add_edge(sink, source, u64::MAX / 2);

    if graph.max_flow(s_star, t_star) != required {
        return None;
    }
    let mut flows = BTreeMap::new();
    for ((i, j), e) in pair_edges {
        let amount = graph.flow_on(e);
        if amount > 0 {
            flows.insert((i, j), amount);
        }
    }
    Some(flows)
}

struct MaxFlow {
    to: Vec<usize>,
    cap: Vec<u64>,
    initial_cap: Vec<u64>,
    adj: Vec<Vec<usize>>,
}

impl MaxFlow {
    fn new(nodes: usize) -> MaxFlow {
        MaxFlow {
            to: Vec::new(),
            cap: Vec::new(),
            initial_cap: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let idx = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.initial_cap.push(cap);
        self.to.push(from);
        self.cap.push(0);
        self.initial_cap.push(0);
        self.adj[from].push(idx);
        self.adj[to].push(idx + 1);
        idx
    }

    fn flow_on(&self, edge: usize) -> u64 {
        self.initial_cap[edge] - self.cap[edge]
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> u64 {
        let mut total = 0u64;
        loop {
            let mut parent_edge = vec![usize::MAX; self.adj.len()];
            let mut queue = VecDeque::from([source]);
            let mut seen = vec![false; self.adj.len()];
            seen[source] = true;
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && !seen[v] {
                        seen[v] = true;
                        parent_edge[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let mut bottleneck = u64::MAX;
            let mut v = sink;
            while v != source {
                let e = parent_edge[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = sink;
            while v != source {
                let e = parent_edge[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            total += bottleneck;
        }
    }
}

/// Exhaustive oracle for the minimum-delay equilibrium: enumerates integral
/// backlog vectors on a bounded grid (step one base unit), checks each for a
/// feasible equilibrium assignment, and returns the minimum-total-delay
/// equilibrium found. Independent of the residual-graph solver. Bounds:
/// total demand ≤ 8, at most 3 FCs, distances in whole base units.
pub fn brute_force_min_delay(
    instance: &Instance,
) -> Result<EquilibriumSolution, EquilibriumError> {
    let mut best: Option<EquilibriumSolution> = None;
    for_each_equilibrium(instance, |backlogs, delays, total_delay, flows| {
        let better = match &best {
            None => true,
            Some(b) => total_delay < b.total_delay,
        };
        if better {
            best = Some(EquilibriumSolution {
                assignment: Assignment::from_flows(instance, flows.clone()),
                backlogs: backlogs.to_vec(),
                delays: delays.to_vec(),
                total_delay,
            });
        }
    })?;
    best.ok_or(EquilibriumError::OracleExhausted)
}

/// Enumerates every equilibrium dual on the oracle grid (test oracle for
/// the simultaneous-minimality of the solver's delay vector).
pub fn enumerate_equilibrium_duals(
    instance: &Instance,
) -> Result<Vec<EquilibriumDual>, EquilibriumError> {
    let mut all = Vec::new();
    for_each_equilibrium(instance, |backlogs, delays, total_delay, _| {
        all.push(EquilibriumDual {
            backlogs: backlogs.to_vec(),
            delays: delays.to_vec(),
            total_delay,
        });
    })?;
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantity::DEFAULT_SCALE;

    fn q(units: i64) -> Quantity {
        Quantity(units * DEFAULT_SCALE as i64)
    }

    #[test]
    fn single_pair_has_zero_backlog() {
        let instance =
            Instance::line(vec![("d0".into(), q(0), 1)], vec![("f0".into(), q(7), 1)]).unwrap();
        let sol = min_delay_equilibrium(&instance).unwrap();
        assert_eq!(sol.backlogs, vec![Quantity::ZERO]);
        assert_eq!(sol.delays, vec![q(7)]);
        assert_eq!(sol.total_delay, q(7));
        assert!(verify_equilibrium(&instance, &sol).is_pass());
        let oracle = brute_force_min_delay(&instance).unwrap();
        assert_eq!(oracle.backlogs, sol.backlogs);
        assert_eq!(oracle.delays, sol.delays);
    }

    #[test]
    fn balanced_diagonal_needs_no_backlogs() {
        let instance = Instance::matrix(
            vec![vec![q(1), q(10)], vec![q(10), q(1)]],
            vec![("d0".into(), 1), ("d1".into(), 1)],
            vec![("f0".into(), 1), ("f1".into(), 1)],
        )
        .unwrap();
        let sol = min_delay_equilibrium(&instance).unwrap();
        assert_eq!(sol.backlogs, vec![Quantity::ZERO, Quantity::ZERO]);
        assert_eq!(sol.delays, vec![q(1), q(1)]);
        let oracle = brute_force_min_delay(&instance).unwrap();
        assert_eq!(oracle.total_delay, sol.total_delay);
        assert_eq!(oracle.delays, sol.delays);
    }

    #[test]
    fn overloaded_near_fc_accumulates_backlog() {
        // Two demands at 0; the close FC (distance 1) holds one unit, the far
        // FC (distance 5) the other. The close FC must carry backlog 4 so
        // both demands see delay 5.
        let instance = Instance::line(
            vec![("d0".into(), q(0), 1), ("d1".into(), q(0), 1)],
            vec![("near".into(), q(1), 1), ("far".into(), q(5), 1)],
        )
        .unwrap();
        let sol = min_delay_equilibrium(&instance).unwrap();
        assert_eq!(sol.backlogs, vec![q(4), Quantity::ZERO]);
        assert_eq!(sol.delays, vec![q(5), q(5)]);
        assert!(verify_equilibrium(&instance, &sol).is_pass());
        let oracle = brute_force_min_delay(&instance).unwrap();
        assert_eq!(oracle.total_delay, sol.total_delay);
        assert_eq!(oracle.delays, sol.delays);
        assert_eq!(oracle.backlogs, sol.backlogs);
    }

    #[test]
    fn strong_duality_holds_exactly() {
        let instance = Instance::line(
            vec![
                ("d0".into(), q(0), 3),
                ("d1".into(), q(2), 2),
                ("d2".into(), q(6), 1),
            ],
            vec![("f0".into(), q(1), 4), ("f1".into(), q(5), 2)],
        )
        .unwrap();
        let sol = min_delay_equilibrium(&instance).unwrap();
        let delay_side: i128 = instance
            .demands()
            .iter()
            .zip(&sol.delays)
            .map(|(d, delta)| d.quantity as i128 * delta.raw() as i128)
            .sum();
        let backlog_side: i128 = instance
            .fcs()
            .iter()
            .zip(&sol.backlogs)
            .map(|(f, beta)| f.capacity as i128 * beta.raw() as i128)
            .sum();
        assert_eq!(
            delay_side - backlog_side,
            sol.assignment.cost().raw() as i128
        );
    }

    #[test]
    fn perturbed_backlog_fails_verification() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 1), ("d1".into(), q(0), 1)],
            vec![("near".into(), q(1), 1), ("far".into(), q(5), 1)],
        )
        .unwrap();
        let mut sol = min_delay_equilibrium(&instance).unwrap();
        sol.backlogs[0] = sol.backlogs[0].checked_add(Quantity(1));
        let verdict = verify_equilibrium(&instance, &sol);
        assert!(!verdict.is_pass());
        assert!(verdict.violations.iter().any(|v| matches!(
            v,
            Violation::SupportNotTight { .. } | Violation::DelayNotMinimal { .. }
        )));
    }

    #[test]
    fn suboptimal_assignment_fails_cost_check() {
        let instance = Instance::matrix(
            vec![vec![q(1), q(2)], vec![q(2), q(1)]],
            vec![("d0".into(), 1), ("d1".into(), 1)],
            vec![("f0".into(), 1), ("f1".into(), 1)],
        )
        .unwrap();
        let mut flows = BTreeMap::new();
        flows.insert((0, 1), 1);
        flows.insert((1, 0), 1);
        let crossed = Assignment::from_flows(&instance, flows);
        let err = equilibrium_delay_of(&instance, &crossed).unwrap_err();
        assert!(matches!(err, EquilibriumError::NotMinimumCost { .. }));
        // Anti-diagonal assignment with compensating backlogs: the used arcs
        // are tight but the cost check still flags it.
        let sol = EquilibriumSolution {
            assignment: Assignment::from_flows(&instance, {
                let mut flows = BTreeMap::new();
                flows.insert((0, 1), 1);
                flows.insert((1, 0), 1);
                flows
            }),
            backlogs: vec![q(1), q(1)],
            delays: vec![q(2), q(2)],
            total_delay: q(4),
        };
        let verdict = verify_equilibrium(&instance, &sol);
        assert!(verdict
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CostSuboptimal { .. })));
    }

    #[test]
    fn delays_unique_across_optimal_assignments() {
        // Symmetric square: both diagonal matchings are optimal.
        let instance = Instance::matrix(
            vec![vec![q(2), q(2)], vec![q(2), q(2)]],
            vec![("d0".into(), 1), ("d1".into(), 1)],
            vec![("f0".into(), 1), ("f1".into(), 1)],
        )
        .unwrap();
        let mut direct = BTreeMap::new();
        direct.insert((0, 0), 1);
        direct.insert((1, 1), 1);
        let mut crossed = BTreeMap::new();
        crossed.insert((0, 1), 1);
        crossed.insert((1, 0), 1);
        let a =
            equilibrium_delay_of(&instance, &Assignment::from_flows(&instance, direct)).unwrap();
        let b =
            equilibrium_delay_of(&instance, &Assignment::from_flows(&instance, crossed)).unwrap();
        assert_eq!(a.delays, b.delays);
        assert_eq!(a.backlogs, b.backlogs);
    }

    #[test]
    fn residual_graph_of_suboptimal_assignment_has_negative_cycle() {
        let instance = Instance::matrix(
            vec![vec![q(1), q(10)], vec![q(10), q(1)]],
            vec![("d0".into(), 1), ("d1".into(), 1)],
            vec![("f0".into(), 1), ("f1".into(), 1)],
        )
        .unwrap();
        let crossed = [
            SplitPart {
                demand: 0,
                fc: 1,
                amount: 1,
            },
            SplitPart {
                demand: 1,
                fc: 0,
                amount: 1,
            },
        ];
        assert!(ResidualGraph::build(&instance, &crossed).has_negative_cycle());
        let direct = [
            SplitPart {
                demand: 0,
                fc: 0,
                amount: 1,
            },
            SplitPart {
                demand: 1,
                fc: 1,
                amount: 1,
            },
        ];
        assert!(!ResidualGraph::build(&instance, &direct).has_negative_cycle());
    }

    #[test]
    fn tight_edges_single_pair() {
        let instance =
            Instance::line(vec![("d0".into(), q(0), 1)], vec![("f0".into(), q(7), 1)]).unwrap();
        let sol = min_delay_equilibrium(&instance).unwrap();
        let graph = tight_edges(&instance, &sol);
        assert_eq!(graph.edges, vec![(0, 0)]);
        assert!(graph.every_component_has_zero_backlog_fc(&sol.backlogs));
    }

    #[test]
    fn tight_component_chain_shares_zero_backlog_fc() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 1), ("d1".into(), q(0), 1)],
            vec![("near".into(), q(1), 1), ("far".into(), q(5), 1)],
        )
        .unwrap();
        let sol = min_delay_equilibrium(&instance).unwrap();
        let graph = tight_edges(&instance, &sol);
        let components = graph.components();
        assert_eq!(components.len(), 1);
        assert!(graph.every_component_has_zero_backlog_fc(&sol.backlogs));
    }

    #[test]
    fn oracle_agrees_on_simultaneous_minimality() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 2), ("d1".into(), q(3), 1)],
            vec![("f0".into(), q(1), 2), ("f1".into(), q(4), 1)],
        )
        .unwrap();
        let sol = min_delay_equilibrium(&instance).unwrap();
        let all = enumerate_equilibrium_duals(&instance).unwrap();
        assert!(!all.is_empty());
        for dual in &all {
            for (i, &delta) in sol.delays.iter().enumerate() {
                assert!(delta <= dual.delays[i]);
            }
        }
    }

    #[test]
    fn oracle_rejects_out_of_bounds() {
        let instance =
            Instance::line(vec![("d0".into(), q(0), 9)], vec![("f0".into(), q(1), 9)]).unwrap();
        assert!(matches!(
            brute_force_min_delay(&instance),
            Err(EquilibriumError::OracleBound { .. })
        ));
    }

    #[test]
    fn fixing_the_solver_assignment_changes_nothing() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 2), ("d1".into(), q(4), 3)],
            vec![("f0".into(), q(1), 3), ("f1".into(), q(5), 2)],
        )
        .unwrap();
        let direct = min_delay_equilibrium(&instance).unwrap();
        let x = min_cost_assignment(&instance).unwrap();
        let fixed = equilibrium_delay_of(&instance, &x).unwrap();
        assert_eq!(fixed, direct);
    }

    #[test]
    fn continuous_line_tight_edges_split_at_the_second_fc() {
        // Every demand is tight against the FC at 0; tightness against the
        // FC at 0.4 (backlog 0.4) starts at position 0.4.
        let instance = crate::generators::generate_continuous_line(10).unwrap();
        let sol = min_delay_equilibrium(&instance).unwrap();
        assert_eq!(sol.backlogs[1], Quantity(400_000));
        let graph = tight_edges(&instance, &sol);
        for i in 0..instance.n_demands() {
            let position = instance.distance(i, 0);
            assert!(graph.edges.contains(&(i, 0)), "demand {i} vs fc0");
            assert_eq!(
                graph.edges.contains(&(i, 1)),
                position >= Quantity(400_000),
                "demand {i} vs fc1"
            );
        }
    }

    #[test]
    fn chain_instance_has_one_tight_component_with_free_terminal_fc() {
        let instance = crate::generators::generate_line_lb(3, 10, 100).unwrap();
        let sol = min_delay_equilibrium(&instance).unwrap();
        let graph = tight_edges(&instance, &sol);
        let components = graph.components();
        assert_eq!(components.len(), 1, "chain must be one tight component");
        let (_, fcs) = &components[0];
        assert!(fcs.contains(&2));
        assert_eq!(sol.backlogs[2], Quantity::ZERO);
        assert!(graph.every_component_has_zero_backlog_fc(&sol.backlogs));
    }
}
