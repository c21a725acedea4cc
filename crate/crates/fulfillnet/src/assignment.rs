//! Minimum-cost assignment of demand to FCs: the transportation problem
//!
//!   minimize   Σ_ij ℓ_ij x_ij
//!   subject to Σ_j x_ij = D_i   for every demand i
//!              Σ_i x_ij ≤ C_j   for every FC j
//!              x ≥ 0
//!
//! solved by successive shortest augmenting paths with node potentials on
//! exact integer weights. With integer demands and capacities the returned
//! flows are integral (transportation polytope integrality). An exhaustive
//! unit-parcel oracle covers small instances independently of the solver.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeMap};

use thiserror::Error;

use crate::instance::{DemandNode, Instance, InstanceError, Location, Metric};
use crate::quantity::Quantity;

/// A feasible flow from demands to FCs with its exact total cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    flows: BTreeMap<(usize, usize), u64>,
    cost: Quantity,
}

impl Assignment {
    pub fn from_flows(
        instance: &Instance,
        flows: BTreeMap<(usize, usize), u64>,
    ) -> Assignment {
        let mut cost: i128 = 0;
        for (&(i, j), &amount) in &flows {
            cost += instance.distance(i, j).raw() as i128 * amount as i128;
        }
        Assignment {
            flows,
            cost: Quantity(i64::try_from(cost).expect("assignment cost overflow")),
        }
    }

    /// Flow entries in (demand index, fc index) order; zero entries omitted.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.flows.iter().map(|(&(i, j), &amount)| (i, j, amount))
    }

    pub fn flow(&self, demand: usize, fc: usize) -> u64 {
        self.flows.get(&(demand, fc)).copied().unwrap_or(0)
    }

    pub fn cost(&self) -> Quantity {
        self.cost
    }

    /// Total flow arriving at each FC.
    pub fn fc_loads(&self, n_fcs: usize) -> Vec<u64> {
        let mut loads = vec![0u64; n_fcs];
        for (&(_, j), &amount) in &self.flows {
            loads[j] += amount;
        }
        loads
    }

    /// Total flow leaving each demand.
    pub fn demand_totals(&self, n_demands: usize) -> Vec<u64> {
        let mut totals = vec![0u64; n_demands];
        for (&(i, _), &amount) in &self.flows {
            totals[i] += amount;
        }
        totals
    }

    /// Checks that the flow ships every demand within FC capacities.
    pub fn validate_for(&self, instance: &Instance) -> Result<(), AssignmentError> {
        let totals = self.demand_totals(instance.n_demands());
        for (i, d) in instance.demands().iter().enumerate() {
            if totals[i] != d.quantity {
                return Err(AssignmentError::InvalidAssignment(format!(
                    "demand {:?} ships {} of {}",
                    d.id, totals[i], d.quantity
                )));
            }
        }
        let loads = self.fc_loads(instance.n_fcs());
        for (j, f) in instance.fcs().iter().enumerate() {
            if loads[j] > f.capacity {
                return Err(AssignmentError::InvalidAssignment(format!(
                    "fc {:?} is loaded {} over capacity {}",
                    f.id,
                    loads[j],
                    f.capacity
                )));
            }
        }
        if self.flows.keys().any(|&(i, j)| {
            i >= instance.n_demands() || j >= instance.n_fcs()
        }) {
            return Err(AssignmentError::InvalidAssignment(
                "flow references out-of-range node".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum AssignmentError {
    #[error("infeasible instance: total demand {demand} exceeds capacity {capacity}")]
    Infeasible { demand: u128, capacity: u128 },
    #[error("instance exceeds enumeration bound (total demand {total_demand} > 12 or {n_fcs} fcs > 4)")]
    EnumerationBound { total_demand: u64, n_fcs: usize },
    #[error("assignment does not fit instance: {0}")]
    InvalidAssignment(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

const INF: i64 = i64::MAX / 4;

struct FlowNetwork {
    // Edge lists: edge k and its reverse k^1 are stored adjacently.
    to: Vec<usize>,
    cap: Vec<u64>,
    cost: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> FlowNetwork {
        FlowNetwork {
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u64, cost: i64) -> usize {
        let idx = self.to.len();
        self.to.push(to);
        self.cap.push(cap);
        self.cost.push(cost);
        self.to.push(from);
        self.cap.push(0);
        self.cost.push(-cost);
        self.adj[from].push(idx);
        self.adj[to].push(idx + 1);
        idx
    }
}

/// Computes an integral optimal solution of the transportation LP.
///
/// Deterministic: nodes, arcs, and heap ordering are fixed functions of the
/// instance, and shortest-path parents update only on strict improvement, so
/// ties resolve to the first path in (demand index, fc index) arc order.
pub fn min_cost_assignment(instance: &Instance) -> Result<Assignment, AssignmentError> {
    let nd = instance.n_demands();
    let nf = instance.n_fcs();
    let total_demand: u128 = instance.demands().iter().map(|d| d.quantity as u128).sum();
    let total_capacity: u128 = instance.fcs().iter().map(|f| f.capacity as u128).sum();
    if total_demand > total_capacity {
        return Err(AssignmentError::Infeasible {
            demand: total_demand,
            capacity: total_capacity,
        });
    }

    let table = instance.distance_table();
    let source = 0usize;
    let sink = nd + nf + 1;
    let demand_node = |i: usize| 1 + i;
    let fc_node = |j: usize| 1 + nd + j;

    let mut net = FlowNetwork::new(nd + nf + 2);
    for (i, d) in instance.demands().iter().enumerate() {
        net.add_edge(source, demand_node(i), d.quantity, 0);
    }
    let mut pair_edge = vec![vec![0usize; nf]; nd];
    for i in 0..nd {
        for (j, row) in table[i].iter().enumerate() {
            pair_edge[i][j] = net.add_edge(demand_node(i), fc_node(j), u64::MAX, row.raw());
        }
    }
    for (j, f) in instance.fcs().iter().enumerate() {
        net.add_edge(fc_node(j), sink, f.capacity, 0);
    }

    let n = net.adj.len();
    let mut potential = vec![0i64; n];
    let mut dist = vec![INF; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut shipped: u128 = 0;

    while shipped < total_demand {
        dist.fill(INF);
        parent_edge.fill(usize::MAX);
        dist[source] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, source)));
        while let Some(Reverse((du, u))) = heap.pop() {
            if du > dist[u] {
                continue;
            }
            for &e in &net.adj[u] {
                if net.cap[e] == 0 {
                    continue;
                }
                let v = net.to[e];
                let reduced = net.cost[e] + potential[u] - potential[v];
                debug_assert!(reduced >= 0, "negative reduced cost");
                let dv = du + reduced;
                if dv < dist[v] {
                    dist[v] = dv;
                    parent_edge[v] = e;
                    heap.push(Reverse((dv, v)));
                }
            }
        }
        if dist[sink] >= INF {
            // Unreachable under the feasibility invariant; defensive guard.
            return Err(AssignmentError::Infeasible {
                demand: total_demand,
                capacity: total_capacity,
            });
        }
        let sink_dist = dist[sink];
        for v in 0..n {
            potential[v] += dist[v].min(sink_dist);
        }
        let mut bottleneck = u64::MAX;
        let mut v = sink;
        while v != source {
            let e = parent_edge[v];
            bottleneck = bottleneck.min(net.cap[e]);
            v = net.to[e ^ 1];
        }
        let remaining = total_demand - shipped;
        let push = (bottleneck as u128).min(remaining) as u64;
        let mut v = sink;
        while v != source {
            let e = parent_edge[v];
            net.cap[e] -= push;
            net.cap[e ^ 1] += push;
            v = net.to[e ^ 1];
        }
        shipped += push as u128;
    }

    let mut flows = BTreeMap::new();
    for i in 0..nd {
        for j in 0..nf {
            let e = pair_edge[i][j];
            let amount = net.cap[e ^ 1];
            if amount > 0 {
                flows.insert((i, j), amount);
            }
        }
    }
    Ok(Assignment::from_flows(instance, flows))
}

/// Exhaustive oracle: enumerates every assignment of unit demand parcels to
/// FCs respecting capacities and returns one of minimum cost. Independent of
/// the shortest-path solver. Bounds: total demand ≤ 12 and at most 4 FCs.
pub fn brute_force_min_cost(instance: &Instance) -> Result<Assignment, AssignmentError> {
    let total_demand = instance.total_demand();
    let nf = instance.n_fcs();
    if total_demand > 12 || nf > 4 {
        return Err(AssignmentError::EnumerationBound {
            total_demand,
            n_fcs: nf,
        });
    }
    let total_capacity: u128 = instance.fcs().iter().map(|f| f.capacity as u128).sum();
    if (total_demand as u128) > total_capacity {
        return Err(AssignmentError::Infeasible {
            demand: total_demand as u128,
            capacity: total_capacity,
        });
    }

    // Unit parcels in demand index order.
    let mut parcels = Vec::with_capacity(total_demand as usize);
    for (i, d) in instance.demands().iter().enumerate() {
        for _ in 0..d.quantity {
            parcels.push(i);
        }
    }
    let table = instance.distance_table();
    let mut remaining: Vec<u64> = instance.fcs().iter().map(|f| f.capacity).collect();
    let mut choice = vec![0usize; parcels.len()];
    let mut best: Option<(i128, Vec<usize>)> = None;

    fn search(
        parcel: usize,
        parcels: &[usize],
        table: &[Vec<Quantity>],
        remaining: &mut [u64],
        choice: &mut [usize],
        cost_so_far: i128,
        best: &mut Option<(i128, Vec<usize>)>,
    ) {
        if let Some((best_cost, _)) = best {
            if cost_so_far >= *best_cost {
                return;
            }
        }
        if parcel == parcels.len() {
            *best = Some((cost_so_far, choice.to_vec()));
            return;
        }
        let i = parcels[parcel];
        for j in 0..remaining.len() {
            if remaining[j] == 0 {
                continue;
            }
            remaining[j] -= 1;
            choice[parcel] = j;
            search(
                parcel + 1,
                parcels,
                table,
                remaining,
                choice,
                cost_so_far + table[i][j].raw() as i128,
                best,
            );
            remaining[j] += 1;
        }
    }

    search(0, &parcels, &table, &mut remaining, &mut choice, 0, &mut best);
    let (_, choices) = best.expect("feasible instance admits an assignment");
    let mut flows: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (parcel, &j) in choices.iter().enumerate() {
        *flows.entry((parcels[parcel], j)).or_insert(0) += 1;
    }
    Ok(Assignment::from_flows(instance, flows))
}

/// The result of splitting demands along an integral assignment: an
/// equivalent instance in which every demand ships to exactly one FC.
#[derive(Debug, Clone)]
pub struct SplitInstance {
    pub instance: Instance,
    /// For each split demand, the index of the original demand it came from.
    pub origins: Vec<usize>,
    /// For each split demand, the FC index it is assigned to.
    pub assigned_fc: Vec<usize>,
}

impl SplitInstance {
    /// The assignment induced on the split instance; its cost equals the
    /// cost of the assignment the split was built from.
    pub fn induced_assignment(&self) -> Assignment {
        let mut flows = BTreeMap::new();
        for (p, &j) in self.assigned_fc.iter().enumerate() {
            let quantity = self.instance.demands()[p].quantity;
            if quantity > 0 {
                flows.insert((p, j), quantity);
            }
        }
        Assignment::from_flows(&self.instance, flows)
    }
}

/// Splits each demand into one part per FC it uses in `x`. Demands wholly
/// assigned to a single FC are kept unchanged (same id); parts of a split
/// demand are named `"{id}@{fc_id}"`. Zero demands are dropped.
pub fn split_demands(
    instance: &Instance,
    x: &Assignment,
) -> Result<SplitInstance, AssignmentError> {
    x.validate_for(instance)?;
    let mut demands: Vec<DemandNode> = Vec::new();
    let mut origins = Vec::new();
    let mut assigned_fc = Vec::new();
    let mut kept_rows: Vec<usize> = Vec::new();
    for (i, d) in instance.demands().iter().enumerate() {
        let uses: Vec<(usize, u64)> = (0..instance.n_fcs())
            .filter_map(|j| {
                let amount = x.flow(i, j);
                (amount > 0).then_some((j, amount))
            })
            .collect();
        for &(j, amount) in &uses {
            let id = if uses.len() == 1 {
                d.id.clone()
            } else {
                format!("{}@{}", d.id, instance.fcs()[j].id)
            };
            demands.push(DemandNode {
                id,
                loc: d.loc.clone(),
                quantity: amount,
            });
            origins.push(i);
            assigned_fc.push(j);
            kept_rows.push(i);
        }
    }
    let metric = match instance.metric() {
        Metric::Matrix(rows) => Metric::Matrix(
            kept_rows.iter().map(|&i| rows[i].clone()).collect(),
        ),
        other => other.clone(),
    };
    let fcs = instance.fcs().to_vec();
    let split = Instance::new(demands, fcs, metric, instance.scale())?;
    // Matrix locations address rows by list position; re-check alignment.
    debug_assert!(origins
        .iter()
        .enumerate()
        .all(|(p, &i)| !matches!(instance.demands()[i].loc, Location::Implicit)
            || split.distance(p, 0) == instance.distance(i, 0)
            || instance.n_fcs() == 0));
    Ok(SplitInstance {
        instance: split,
        origins,
        assigned_fc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantity::DEFAULT_SCALE;

    fn q(units: i64) -> Quantity {
        Quantity(units * DEFAULT_SCALE as i64)
    }

    #[test]
    fn assigns_unique_nearest_fc() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 1)],
            vec![("f0".into(), q(1), 1), ("f1".into(), q(2), 1)],
        )
        .unwrap();
        let x = min_cost_assignment(&instance).unwrap();
        assert_eq!(x.flow(0, 0), 1);
        assert_eq!(x.flow(0, 1), 0);
        assert_eq!(x.cost(), q(1));
    }

    #[test]
    fn diagonal_matching_on_matrix() {
        let instance = Instance::matrix(
            vec![vec![q(1), q(2)], vec![q(2), q(1)]],
            vec![("d0".into(), 1), ("d1".into(), 1)],
            vec![("f0".into(), 1), ("f1".into(), 1)],
        )
        .unwrap();
        let x = min_cost_assignment(&instance).unwrap();
        assert_eq!(x.cost(), q(2));
        let oracle = brute_force_min_cost(&instance).unwrap();
        assert_eq!(oracle.cost(), q(2));
    }

    #[test]
    fn oracle_on_single_pair() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 1)],
            vec![("f0".into(), q(7), 1)],
        )
        .unwrap();
        let x = brute_force_min_cost(&instance).unwrap();
        assert_eq!(x.flow(0, 0), 1);
        assert_eq!(x.cost(), q(7));
    }

    #[test]
    fn oracle_rejects_oversized_instances() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 13)],
            vec![("f0".into(), q(1), 13)],
        )
        .unwrap();
        assert!(matches!(
            brute_force_min_cost(&instance),
            Err(AssignmentError::EnumerationBound { .. })
        ));
    }

    #[test]
    fn split_demand_keeps_cost_and_location() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 3)],
            vec![("a".into(), q(1), 2), ("b".into(), q(2), 2)],
        )
        .unwrap();
        let mut flows = BTreeMap::new();
        flows.insert((0, 0), 2);
        flows.insert((0, 1), 1);
        let x = Assignment::from_flows(&instance, flows);
        let split = split_demands(&instance, &x).unwrap();
        assert_eq!(split.instance.n_demands(), 2);
        assert_eq!(split.instance.demands()[0].id, "d0@a");
        assert_eq!(split.instance.demands()[0].quantity, 2);
        assert_eq!(split.instance.demands()[1].id, "d0@b");
        assert_eq!(split.instance.demands()[1].quantity, 1);
        assert_eq!(split.induced_assignment().cost(), x.cost());
        // Re-solving the split instance returns the same cost.
        assert_eq!(min_cost_assignment(&split.instance).unwrap().cost(), x.cost());
    }

    #[test]
    fn split_leaves_single_fc_demand_unchanged() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 2)],
            vec![("f0".into(), q(1), 2)],
        )
        .unwrap();
        let x = min_cost_assignment(&instance).unwrap();
        let split = split_demands(&instance, &x).unwrap();
        assert_eq!(split.instance.demands()[0].id, "d0");
        assert_eq!(split.instance.n_demands(), 1);
    }

    #[test]
    fn solver_matches_oracle_on_small_instances() {
        // A handful of fixed shapes; the full randomized suite lives in the
        // integration tests.
        let instances = vec![
            Instance::matrix(
                vec![
                    vec![q(4), q(1), q(3)],
                    vec![q(2), q(0), q(5)],
                    vec![q(3), q(2), q(2)],
                ],
                vec![("d0".into(), 2), ("d1".into(), 3), ("d2".into(), 1)],
                vec![("f0".into(), 2), ("f1".into(), 2), ("f2".into(), 4)],
            )
            .unwrap(),
            Instance::line(
                vec![
                    ("d0".into(), q(0), 2),
                    ("d1".into(), q(5), 1),
                    ("d2".into(), q(9), 3),
                ],
                vec![("f0".into(), q(2), 4), ("f1".into(), q(8), 4)],
            )
            .unwrap(),
        ];
        for instance in instances {
            let fast = min_cost_assignment(&instance).unwrap();
            let slow = brute_force_min_cost(&instance).unwrap();
            assert_eq!(fast.cost(), slow.cost());
            fast.validate_for(&instance).unwrap();
        }
    }

    #[test]
    fn discretized_line_cost_matches_oracle_at_small_n() {
        let instance = crate::generators::generate_continuous_line(10).unwrap();
        let fast = min_cost_assignment(&instance).unwrap();
        let slow = brute_force_min_cost(&instance).unwrap();
        assert_eq!(fast.cost(), slow.cost());
        // cost/n approaches 0.3 as n grows; at n=10 the midpoint grid gives
        // exactly 0.3 per unit.
        assert_eq!(fast.cost(), Quantity(3 * DEFAULT_SCALE as i64));
    }

    #[test]
    fn deterministic_across_runs() {
        let instance = Instance::line(
            vec![
                ("d0".into(), q(0), 2),
                ("d1".into(), q(2), 2),
                ("d2".into(), q(4), 2),
            ],
            vec![("f0".into(), q(1), 3), ("f1".into(), q(3), 3)],
        )
        .unwrap();
        let a = min_cost_assignment(&instance).unwrap();
        let b = min_cost_assignment(&instance).unwrap();
        assert_eq!(a, b);
    }
}
