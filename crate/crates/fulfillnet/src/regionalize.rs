//! Regionalized solutions: paired partitions of demands and FCs, each part
//! solved as an independent equilibrium.
//!
//! Regionalization trades the efficiency of one global equilibrium against
//! the backlog chains it can build up. The constructions here are:
//!
//! - the k-part regionalization (one FC per part) whose total delay equals
//!   the minimum assignment cost exactly, with every backlog zero;
//! - scale decompositions for line and q-dimensional Euclidean metrics:
//!   demands are bucketed by the distance scale of their matched FC and
//!   spread over well-separated grid segments, giving at most
//!   (2+⌈√q⌉)^q·⌈log₂ ρ⌉ regions and total delay within a constant factor
//!   (6 on the line, 4√q+2 in general) of the minimum assignment cost;
//! - exhaustive search over FC groupings for a fixed demand partition.
//!
//! The minimum assignment cost lower-bounds the delay of every regionalized
//! solution; `solve_regionalized` checks this on every call.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::assignment::min_cost_assignment;
use crate::equilibrium::{min_delay_equilibrium, EquilibriumError, EquilibriumSolution};
use crate::instance::{Instance, InstanceError, Location, Metric};
use crate::quantity::Quantity;

/// One part of a regionalization: demand indices paired with FC indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegionPart {
    pub demands: Vec<usize>,
    pub fcs: Vec<usize>,
}

/// A paired partition: every demand in exactly one part, every FC in at
/// most one part, and supply covering demand within each part.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Regionalization {
    pub parts: Vec<RegionPart>,
}

#[derive(Debug, Error)]
pub enum RegionError {
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Assignment(#[from] crate::assignment::AssignmentError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("demand index {0} appears in no part")]
    DemandUncovered(usize),
    #[error("demand index {0} appears in more than one part")]
    DemandRepeated(usize),
    #[error("fc index {0} appears in more than one part")]
    FcRepeated(usize),
    #[error("part {part} references out-of-range index {index}")]
    IndexOutOfRange { part: usize, index: usize },
    #[error("part {part} has demand {demand} exceeding its supply {capacity}")]
    PartInfeasible {
        part: usize,
        demand: u64,
        capacity: u64,
    },
    #[error("operation requires unit demands")]
    NonUnitDemands,
    #[error("operation requires unit demands and unit capacities")]
    NonUnitQuantities,
    #[error("operation requires the {0} metric")]
    WrongMetric(&'static str),
    #[error("fc grouping search bound exceeded ({n_fcs} fcs > 8)")]
    SearchBound { n_fcs: usize },
    #[error("no feasible fc allocation exists for the given demand partition")]
    NoFeasibleAllocation,
}

impl Regionalization {
    pub fn validate(&self, instance: &Instance) -> Result<(), RegionError> {
        let nd = instance.n_demands();
        let nf = instance.n_fcs();
        let mut demand_seen = vec![false; nd];
        let mut fc_seen = vec![false; nf];
        for (p, part) in self.parts.iter().enumerate() {
            for &i in &part.demands {
                if i >= nd {
                    return Err(RegionError::IndexOutOfRange { part: p, index: i });
                }
                if demand_seen[i] {
                    return Err(RegionError::DemandRepeated(i));
                }
                demand_seen[i] = true;
            }
            for &j in &part.fcs {
                if j >= nf {
                    return Err(RegionError::IndexOutOfRange { part: p, index: j });
                }
                if fc_seen[j] {
                    return Err(RegionError::FcRepeated(j));
                }
                fc_seen[j] = true;
            }
            let demand: u64 = part
                .demands
                .iter()
                .map(|&i| instance.demands()[i].quantity)
                .sum();
            let capacity: u64 = part.fcs.iter().map(|&j| instance.fcs()[j].capacity).sum();
            if demand > capacity {
                return Err(RegionError::PartInfeasible {
                    part: p,
                    demand,
                    capacity,
                });
            }
        }
        if let Some(i) = demand_seen.iter().position(|s| !s) {
            return Err(RegionError::DemandUncovered(i));
        }
        Ok(())
    }
}

/// One solved region: the part (parent-instance indices) and its
/// equilibrium, indexed by position within the part's lists.
#[derive(Debug, Clone)]
pub struct RegionSolution {
    pub part: RegionPart,
    pub solution: EquilibriumSolution,
}

/// A regionalization with each part solved to its minimum-delay
/// equilibrium.
#[derive(Debug, Clone)]
pub struct RegionalizedSolution {
    pub regions: Vec<RegionSolution>,
    /// Σ over regions of Σ_i D_i δ_i.
    pub total_delay: Quantity,
    /// Cost of a minimum-cost assignment of the whole instance, a lower
    /// bound on `total_delay`.
    pub global_min_cost: Quantity,
}

impl RegionalizedSolution {
    /// Backlog of a parent-instance FC, if it belongs to any part.
    pub fn fc_backlog(&self, fc: usize) -> Option<Quantity> {
        for region in &self.regions {
            if let Some(pos) = region.part.fcs.iter().position(|&j| j == fc) {
                return Some(region.solution.backlogs[pos]);
            }
        }
        None
    }

    /// Delay of a parent-instance demand.
    pub fn demand_delay(&self, demand: usize) -> Option<Quantity> {
        for region in &self.regions {
            if let Some(pos) = region.part.demands.iter().position(|&i| i == demand) {
                return Some(region.solution.delays[pos]);
            }
        }
        None
    }
}

/// Solves every part of `reg` independently and sums the delays. The total
/// can never drop below the global minimum assignment cost; this is checked
/// on every call.
pub fn solve_regionalized(
    instance: &Instance,
    reg: &Regionalization,
) -> Result<RegionalizedSolution, RegionError> {
    reg.validate(instance)?;
    let mut regions = Vec::with_capacity(reg.parts.len());
    let mut total_delay = Quantity::ZERO;
    for part in &reg.parts {
        let sub = instance.restrict(&part.demands, &part.fcs)?;
        let solution = min_delay_equilibrium(&sub)?;
        total_delay = total_delay.checked_add(solution.total_delay);
        regions.push(RegionSolution {
            part: part.clone(),
            solution,
        });
    }
    let global_min_cost = min_cost_assignment(instance)?.cost();
    assert!(
        total_delay >= global_min_cost,
        "regionalized delay {total_delay} fell below the assignment cost {global_min_cost}"
    );
    Ok(RegionalizedSolution {
        regions,
        total_delay,
        global_min_cost,
    })
}

/// Partitions the FCs into k singleton parts and attaches each unit demand
/// to the part of the FC serving it in a minimum-cost assignment. The
/// resulting solution has total delay exactly the minimum assignment cost
/// and every backlog zero.
pub fn k_regionalization(instance: &Instance) -> Result<Regionalization, RegionError> {
    if instance.demands().iter().any(|d| d.quantity != 1) {
        return Err(RegionError::NonUnitDemands);
    }
    let x = min_cost_assignment(instance)?;
    let mut parts: Vec<RegionPart> = (0..instance.n_fcs())
        .map(|j| RegionPart {
            demands: Vec::new(),
            fcs: vec![j],
        })
        .collect();
    for (i, j, _) in x.entries() {
        parts[j].demands.push(i);
    }
    Ok(Regionalization { parts })
}

/// A demand and the FC it is matched to in the minimum-cost assignment,
/// with the grid segment (one coordinate per dimension) it falls in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketMember {
    pub demand: usize,
    pub fc: usize,
    pub matched_distance: Quantity,
    pub segment: Vec<i64>,
}

/// Demands whose matched distance falls in the scale class
/// (min·2^{d−1}, min·2^d]; scale index 0 collects zero-distance matches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleBucket {
    pub scale_index: u32,
    pub members: Vec<BucketMember>,
}

/// A scale decomposition: the regionalization plus the bucket and segment
/// structure it was built from.
#[derive(Debug, Clone)]
pub struct ScaleDecomposition {
    pub regionalization: Regionalization,
    pub buckets: Vec<ScaleBucket>,
    /// Normalization unit: the minimum nonzero demand-FC distance.
    pub min_nonzero_distance: Quantity,
    /// Grid anchor: per-dimension minimum coordinate over all nodes.
    pub origin: Vec<Quantity>,
    /// Residue modulus B (3 on the line, 2+⌈√q⌉ in dimension q).
    pub modulus: u32,
    /// Per part: the segment of each demand (aligned with the part's demand
    /// list), or None for the sink part holding unmatched FCs.
    pub part_segments: Vec<Option<Vec<Vec<i64>>>>,
}

/// Count of parts that actually contain demand.
impl ScaleDecomposition {
    pub fn nonempty_region_count(&self) -> usize {
        self.regionalization
            .parts
            .iter()
            .filter(|p| !p.demands.is_empty())
            .count()
    }
}

fn point_coords(loc: &Location) -> &[Quantity] {
    match loc {
        Location::Point(p) => p,
        _ => unreachable!("scale decompositions run on coordinate metrics"),
    }
}

fn ceil_sqrt(q: usize) -> u32 {
    let mut s = 0u32;
    while (s as usize) * (s as usize) < q {
        s += 1;
    }
    s
}

/// Scale decomposition on the line metric: B = 3, at most 3·⌈log₂ ρ⌉
/// nonempty regions, total delay at most 6× the minimum assignment cost.
pub fn line_scale_decomposition(instance: &Instance) -> Result<ScaleDecomposition, RegionError> {
    if !matches!(instance.metric(), Metric::Line) {
        return Err(RegionError::WrongMetric("line"));
    }
    scale_decomposition(instance, 1, 3)
}

/// Scale decomposition in q-dimensional Euclidean space: B = 2+⌈√q⌉, at
/// most B^q·⌈log₂ ρ⌉ nonempty regions, total delay at most (4√q+2)× the
/// minimum assignment cost.
pub fn euclidean_scale_decomposition(
    instance: &Instance,
) -> Result<ScaleDecomposition, RegionError> {
    let dim = match instance.metric() {
        Metric::Euclidean { dim } => *dim,
        _ => return Err(RegionError::WrongMetric("euclidean")),
    };
    scale_decomposition(instance, dim, 2 + ceil_sqrt(dim))
}

fn scale_decomposition(
    instance: &Instance,
    dim: usize,
    modulus: u32,
) -> Result<ScaleDecomposition, RegionError> {
    if instance.demands().iter().any(|d| d.quantity != 1)
        || instance.fcs().iter().any(|f| f.capacity != 1)
    {
        return Err(RegionError::NonUnitQuantities);
    }
    let x = min_cost_assignment(instance)?;

    // Normalize so the minimum nonzero pair distance is one unit. If every
    // pair distance is zero the whole instance collapses into one region.
    let min_nonzero = instance
        .aspect_ratio()
        .map(|r| r.min_nonzero)
        .unwrap_or(Quantity(1));

    let mut origin = vec![Quantity(i64::MAX); dim];
    for loc in instance
        .demands()
        .iter()
        .map(|d| &d.loc)
        .chain(instance.fcs().iter().map(|f| &f.loc))
    {
        for (k, &c) in point_coords(loc).iter().enumerate() {
            origin[k] = origin[k].min(c);
        }
    }

    let mut matched = vec![false; instance.n_fcs()];
    let mut bucket_map: BTreeMap<u32, Vec<BucketMember>> = BTreeMap::new();
    for (i, j, _) in x.entries() {
        matched[j] = true;
        let distance = instance.distance(i, j);
        // Scale index: smallest d ≥ 1 with distance ≤ min·2^d; zero
        // distances get index 0 and a single shared region.
        let scale_index = if distance == Quantity::ZERO {
            0
        } else {
            let mut d = 1u32;
            while (min_nonzero.raw() as i128) << d < distance.raw() as i128 {
                d += 1;
            }
            d
        };
        let segment = if scale_index == 0 {
            vec![0; dim]
        } else {
            let side = (min_nonzero.raw() as i128) << (scale_index + 1);
            point_coords(&instance.demands()[i].loc)
                .iter()
                .zip(&origin)
                .map(|(&c, &o)| {
                    let offset = c.raw() as i128 - o.raw() as i128;
                    i64::try_from(offset / side).expect("segment index overflow")
                })
                .collect()
        };
        bucket_map.entry(scale_index).or_default().push(BucketMember {
            demand: i,
            fc: j,
            matched_distance: distance,
            segment,
        });
    }

    // Group members into regions by (scale index, segment residues mod B).
    let mut region_map: BTreeMap<(u32, Vec<i64>), Vec<&BucketMember>> = BTreeMap::new();
    let buckets: Vec<ScaleBucket> = bucket_map
        .into_iter()
        .map(|(scale_index, members)| ScaleBucket {
            scale_index,
            members,
        })
        .collect();
    for bucket in &buckets {
        for member in &bucket.members {
            let residues: Vec<i64> = member
                .segment
                .iter()
                .map(|&s| s.rem_euclid(modulus as i64))
                .collect();
            region_map
                .entry((bucket.scale_index, residues))
                .or_default()
                .push(member);
        }
    }

    let mut parts = Vec::new();
    let mut part_segments = Vec::new();
    for members in region_map.values() {
        let mut part = RegionPart::default();
        let mut segments = Vec::new();
        for member in members {
            part.demands.push(member.demand);
            part.fcs.push(member.fc);
            segments.push(member.segment.clone());
        }
        parts.push(part);
        part_segments.push(Some(segments));
    }
    // FCs untouched by the matching go to a sink part with no demand.
    let unmatched: Vec<usize> = (0..instance.n_fcs()).filter(|&j| !matched[j]).collect();
    if !unmatched.is_empty() {
        parts.push(RegionPart {
            demands: Vec::new(),
            fcs: unmatched,
        });
        part_segments.push(None);
    }

    Ok(ScaleDecomposition {
        regionalization: Regionalization { parts },
        buckets,
        min_nonzero_distance: min_nonzero,
        origin,
        modulus,
        part_segments,
    })
}

/// Geographic grid regionalization for planar instances: FCs are split
/// into nx bands by x-coordinate and each band into ny cells by
/// y-coordinate, then demands are packed greedily into the nearest cell
/// with spare capacity. Deterministic; errors if the packing cannot place
/// some demand.
pub fn grid_regionalization(
    instance: &Instance,
    nx: usize,
    ny: usize,
) -> Result<Regionalization, RegionError> {
    if !matches!(instance.metric(), Metric::Euclidean { dim: 2 }) {
        return Err(RegionError::WrongMetric("planar euclidean"));
    }
    if nx == 0 || ny == 0 {
        return Err(RegionError::NoFeasibleAllocation);
    }
    let coord = |loc: &Location, axis: usize| -> Quantity {
        point_coords(loc)[axis]
    };
    let mut fc_order: Vec<usize> = (0..instance.n_fcs()).collect();
    fc_order.sort_by_key(|&j| (coord(&instance.fcs()[j].loc, 0), j));
    let chunk_sizes = |len: usize, chunks: usize| -> Vec<usize> {
        (0..chunks)
            .map(|c| len / chunks + usize::from(c < len % chunks))
            .collect()
    };
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut cursor = 0;
    for band_size in chunk_sizes(fc_order.len(), nx) {
        let mut band: Vec<usize> = fc_order[cursor..cursor + band_size].to_vec();
        cursor += band_size;
        band.sort_by_key(|&j| (coord(&instance.fcs()[j].loc, 1), j));
        let mut inner = 0;
        for cell_size in chunk_sizes(band.len(), ny) {
            if cell_size > 0 {
                cells.push(band[inner..inner + cell_size].to_vec());
            }
            inner += cell_size;
        }
    }

    let mut remaining: Vec<u64> = cells
        .iter()
        .map(|cell| cell.iter().map(|&j| instance.fcs()[j].capacity).sum())
        .collect();
    let mut parts: Vec<RegionPart> = cells
        .iter()
        .map(|cell| RegionPart {
            demands: Vec::new(),
            fcs: {
                let mut fcs = cell.clone();
                fcs.sort_unstable();
                fcs
            },
        })
        .collect();

    let mut demand_order: Vec<usize> = (0..instance.n_demands()).collect();
    demand_order.sort_by_key(|&i| (std::cmp::Reverse(instance.demands()[i].quantity), i));
    for i in demand_order {
        let quantity = instance.demands()[i].quantity;
        let mut ranked: Vec<(Quantity, usize)> = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let nearest = cell
                    .iter()
                    .map(|&j| instance.distance(i, j))
                    .min()
                    .expect("cells are nonempty");
                (nearest, c)
            })
            .collect();
        ranked.sort();
        let placed = ranked
            .iter()
            .find(|&&(_, c)| remaining[c] >= quantity)
            .map(|&(_, c)| c);
        match placed {
            Some(c) => {
                remaining[c] -= quantity;
                parts[c].demands.push(i);
            }
            None => return Err(RegionError::NoFeasibleAllocation),
        }
    }
    for part in &mut parts {
        part.demands.sort_unstable();
    }
    Ok(Regionalization { parts })
}

/// A segment of a scale-decomposition region in which no demand is served
/// by a zero-backlog FC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentViolation {
    pub part: usize,
    pub segment: Vec<i64>,
}

/// Verifies that within each occupied segment of each region, at least one
/// FC with zero backlog serves some demand of that segment. Holds for every
/// minimum-delay solve of a scale decomposition.
pub fn zero_beta_per_segment_check(
    decomp: &ScaleDecomposition,
    sol: &RegionalizedSolution,
) -> Vec<SegmentViolation> {
    let mut violations = Vec::new();
    for (p, segments) in decomp.part_segments.iter().enumerate() {
        let Some(segments) = segments else { continue };
        let region = &sol.regions[p];
        let mut by_segment: BTreeMap<&Vec<i64>, Vec<usize>> = BTreeMap::new();
        for (pos, segment) in segments.iter().enumerate() {
            by_segment.entry(segment).or_default().push(pos);
        }
        for (segment, positions) in by_segment {
            let served_by_free_fc = positions.iter().any(|&pos| {
                region
                    .solution
                    .assignment
                    .entries()
                    .any(|(i, j, _)| i == pos && region.solution.backlogs[j] == Quantity::ZERO)
            });
            if !served_by_free_fc {
                violations.push(SegmentViolation {
                    part: p,
                    segment: segment.clone(),
                });
            }
        }
    }
    violations
}

/// Exhaustively assigns FCs to a fixed demand partition (each FC to one
/// part or left unused) and returns the allocation minimizing total delay.
/// Bounded to at most 8 FCs.
pub fn search_best_fc_grouping(
    instance: &Instance,
    demand_parts: &[Vec<usize>],
) -> Result<(Regionalization, RegionalizedSolution), RegionError> {
    let nf = instance.n_fcs();
    if nf > 8 {
        return Err(RegionError::SearchBound { n_fcs: nf });
    }
    let r = demand_parts.len();
    let part_demand: Vec<u64> = demand_parts
        .iter()
        .map(|part| part.iter().map(|&i| instance.demands()[i].quantity).sum())
        .collect();

    let mut best: Option<(Regionalization, RegionalizedSolution)> = None;
    // allocation[j] in 0..r places FC j in that part; r leaves it unused.
    let mut allocation = vec![0usize; nf];
    loop {
        let mut part_capacity = vec![0u64; r];
        for (j, &a) in allocation.iter().enumerate() {
            if a < r {
                part_capacity[a] += instance.fcs()[j].capacity;
            }
        }
        if part_demand
            .iter()
            .zip(&part_capacity)
            .all(|(&d, &c)| d <= c)
        {
            let parts: Vec<RegionPart> = demand_parts
                .iter()
                .enumerate()
                .map(|(p, demands)| RegionPart {
                    demands: demands.clone(),
                    fcs: allocation
                        .iter()
                        .enumerate()
                        .filter_map(|(j, &a)| (a == p).then_some(j))
                        .collect(),
                })
                .collect();
            let reg = Regionalization { parts };
            let sol = solve_regionalized(instance, &reg)?;
            let better = match &best {
                None => true,
                Some((_, b)) => sol.total_delay < b.total_delay,
            };
            if better {
                best = Some((reg, sol));
            }
        }
        // Mixed-radix increment over allocations.
        let mut axis = 0;
        loop {
            if axis == nf {
                return best.ok_or(RegionError::NoFeasibleAllocation);
            }
            allocation[axis] += 1;
            if allocation[axis] <= r {
                break;
            }
            allocation[axis] = 0;
            axis += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantity::DEFAULT_SCALE;

    fn q(units: i64) -> Quantity {
        Quantity(units * DEFAULT_SCALE as i64)
    }

    fn unit_line(demands: &[i64], fcs: &[i64]) -> Instance {
        Instance::line(
            demands
                .iter()
                .enumerate()
                .map(|(i, &p)| (format!("d{i}"), q(p), 1))
                .collect(),
            fcs.iter()
                .enumerate()
                .map(|(j, &p)| (format!("f{j}"), q(p), 1))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_region_matches_global_equilibrium() {
        let instance = unit_line(&[0, 3, 5], &[1, 4, 9]);
        let reg = Regionalization {
            parts: vec![RegionPart {
                demands: vec![0, 1, 2],
                fcs: vec![0, 1, 2],
            }],
        };
        let sol = solve_regionalized(&instance, &reg).unwrap();
        let global = min_delay_equilibrium(&instance).unwrap();
        assert_eq!(sol.total_delay, global.total_delay);
    }

    #[test]
    fn k_regionalization_reaches_min_cost_with_zero_backlogs() {
        let instance = unit_line(&[0, 0, 6], &[1, 5, 9]);
        let reg = k_regionalization(&instance).unwrap();
        assert_eq!(reg.parts.len(), instance.n_fcs());
        let sol = solve_regionalized(&instance, &reg).unwrap();
        assert_eq!(sol.total_delay, sol.global_min_cost);
        for region in &sol.regions {
            assert!(region
                .solution
                .backlogs
                .iter()
                .all(|&b| b == Quantity::ZERO));
        }
    }

    #[test]
    fn k_regionalization_rejects_non_unit_demands() {
        let instance = Instance::line(
            vec![("d0".into(), q(0), 2)],
            vec![("f0".into(), q(1), 2)],
        )
        .unwrap();
        assert!(matches!(
            k_regionalization(&instance),
            Err(RegionError::NonUnitDemands)
        ));
    }

    #[test]
    fn rejects_infeasible_part() {
        let instance = unit_line(&[0, 1], &[0, 1]);
        let reg = Regionalization {
            parts: vec![
                RegionPart {
                    demands: vec![0, 1],
                    fcs: vec![0],
                },
                RegionPart {
                    demands: vec![],
                    fcs: vec![1],
                },
            ],
        };
        assert!(matches!(
            solve_regionalized(&instance, &reg),
            Err(RegionError::PartInfeasible { .. })
        ));
    }

    #[test]
    fn validates_partition_shape() {
        let instance = unit_line(&[0, 1], &[0, 1]);
        let uncovered = Regionalization {
            parts: vec![RegionPart {
                demands: vec![0],
                fcs: vec![0, 1],
            }],
        };
        assert!(matches!(
            uncovered.validate(&instance),
            Err(RegionError::DemandUncovered(1))
        ));
        let repeated = Regionalization {
            parts: vec![
                RegionPart {
                    demands: vec![0, 1],
                    fcs: vec![0, 1],
                },
                RegionPart {
                    demands: vec![1],
                    fcs: vec![],
                },
            ],
        };
        assert!(matches!(
            repeated.validate(&instance),
            Err(RegionError::DemandRepeated(1))
        ));
    }

    #[test]
    fn far_apart_pairs_decompose_to_min_cost() {
        // Two demand-FC pairs at distance 1, far apart: each pair lands in
        // its own segment and no backlogs arise.
        let instance = unit_line(&[0, 100], &[1, 101]);
        let decomp = line_scale_decomposition(&instance).unwrap();
        let sol = solve_regionalized(&instance, &decomp.regionalization).unwrap();
        assert_eq!(sol.total_delay, sol.global_min_cost);
        assert!(zero_beta_per_segment_check(&decomp, &sol).is_empty());
        assert!(decomp.nonempty_region_count() <= 3);
    }

    #[test]
    fn line_decomposition_respects_region_and_delay_bounds() {
        let instance = unit_line(&[0, 2, 7, 30, 33, 64], &[1, 3, 9, 29, 35, 62]);
        let decomp = line_scale_decomposition(&instance).unwrap();
        let rho = instance.aspect_ratio().unwrap();
        assert!(decomp.nonempty_region_count() <= 3 * rho.ceil_log2() as usize);
        let sol = solve_regionalized(&instance, &decomp.regionalization).unwrap();
        assert!(sol.total_delay.raw() as i128 <= 6 * sol.global_min_cost.raw() as i128);
        assert!(zero_beta_per_segment_check(&decomp, &sol).is_empty());
    }

    #[test]
    fn euclidean_dim_one_uses_modulus_three() {
        let instance = Instance::euclidean(
            1,
            vec![("d0".into(), vec![q(0)], 1), ("d1".into(), vec![q(10)], 1)],
            vec![("f0".into(), vec![q(1)], 1), ("f1".into(), vec![q(11)], 1)],
        )
        .unwrap();
        let decomp = euclidean_scale_decomposition(&instance).unwrap();
        assert_eq!(decomp.modulus, 3);
    }

    #[test]
    fn scale_decomposition_rejects_wrong_metric_and_quantities() {
        let matrix = Instance::matrix(
            vec![vec![q(1)]],
            vec![("d0".into(), 1)],
            vec![("f0".into(), 1)],
        )
        .unwrap();
        assert!(matches!(
            line_scale_decomposition(&matrix),
            Err(RegionError::WrongMetric("line"))
        ));
        let heavy = Instance::line(
            vec![("d0".into(), q(0), 2)],
            vec![("f0".into(), q(1), 2)],
        )
        .unwrap();
        assert!(matches!(
            line_scale_decomposition(&heavy),
            Err(RegionError::NonUnitQuantities)
        ));
    }

    #[test]
    fn segment_check_flags_forced_backlog() {
        let instance = unit_line(&[0, 100], &[1, 101]);
        let decomp = line_scale_decomposition(&instance).unwrap();
        let mut sol = solve_regionalized(&instance, &decomp.regionalization).unwrap();
        for region in &mut sol.regions {
            for beta in &mut region.solution.backlogs {
                *beta = q(1);
            }
        }
        assert!(!zero_beta_per_segment_check(&decomp, &sol).is_empty());
    }

    #[test]
    fn fc_grouping_search_finds_cheaper_allocation() {
        // Demands at 0 and 10; FCs at 1, 9, 11. Fixing each demand in its own
        // part, the best allocation serves each demand locally.
        let instance = unit_line(&[0, 10], &[1, 9, 11]);
        let (reg, sol) =
            search_best_fc_grouping(&instance, &[vec![0], vec![1]]).unwrap();
        assert_eq!(sol.total_delay, q(2));
        assert_eq!(reg.parts[1].fcs, vec![1]);
        assert!(reg.parts[0].fcs.contains(&0));
    }

    #[test]
    fn grid_regionalization_packs_feasibly() {
        let instance = Instance::euclidean(
            2,
            vec![
                ("d0".into(), vec![q(1), q(1)], 2),
                ("d1".into(), vec![q(9), q(1)], 2),
                ("d2".into(), vec![q(1), q(9)], 2),
                ("d3".into(), vec![q(9), q(9)], 2),
            ],
            vec![
                ("f0".into(), vec![q(0), q(0)], 2),
                ("f1".into(), vec![q(10), q(0)], 2),
                ("f2".into(), vec![q(0), q(10)], 2),
                ("f3".into(), vec![q(10), q(10)], 2),
            ],
        )
        .unwrap();
        let reg = grid_regionalization(&instance, 2, 2).unwrap();
        assert_eq!(reg.parts.len(), 4);
        reg.validate(&instance).unwrap();
        let sol = solve_regionalized(&instance, &reg).unwrap();
        assert_eq!(sol.total_delay, sol.global_min_cost);
    }

    #[test]
    fn fc_grouping_search_respects_bound() {
        let instance = unit_line(&[0], &[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        assert!(matches!(
            search_best_fc_grouping(&instance, &[vec![0]]),
            Err(RegionError::SearchBound { n_fcs: 9 })
        ));
    }

    #[test]
    fn chain_unit_variant_decomposes_within_six_times_optimum() {
        let (k, l) = (4u64, 9u64);
        let instance = crate::generators::generate_line_lb(k, 1, l).unwrap();
        let decomp = line_scale_decomposition(&instance).unwrap();
        let sol = solve_regionalized(&instance, &decomp.regionalization).unwrap();
        // The k-region optimum is 1 + (k-1) + L.
        assert_eq!(
            sol.global_min_cost,
            crate::generators::line_lb_k_region_delay(k, 1, l)
        );
        assert!(sol.total_delay.raw() as i128 <= 6 * sol.global_min_cost.raw() as i128);
        assert!(zero_beta_per_segment_check(&decomp, &sol).is_empty());
    }

    #[test]
    fn single_occupied_hypercube_is_one_region() {
        // All pairs at the same distance scale inside one segment.
        let instance = Instance::euclidean(
            2,
            vec![
                ("d0".into(), vec![q(0), q(0)], 1),
                ("d1".into(), vec![q(2), q(0)], 1),
            ],
            vec![
                ("f0".into(), vec![q(1), q(0)], 1),
                ("f1".into(), vec![q(3), q(0)], 1),
            ],
        )
        .unwrap();
        let decomp = euclidean_scale_decomposition(&instance).unwrap();
        assert_eq!(decomp.nonempty_region_count(), 1);
        let sol = solve_regionalized(&instance, &decomp.regionalization).unwrap();
        let total = sol.total_delay.raw() as i128;
        let optimum = sol.global_min_cost.raw() as i128;
        let spare = total - 2 * optimum;
        assert!(spare <= 0 || spare * spare <= 32 * optimum * optimum);
    }

    #[test]
    fn fc_grouping_search_recovers_tree_figure_value() {
        let figure = crate::generators::generate_tree2(100, 1).unwrap();
        let clusters = vec![vec![0, 1], vec![2, 3]];
        let (_, best) = search_best_fc_grouping(&figure.instance, &clusters).unwrap();
        assert_eq!(best.total_delay, q(206));
    }
}
