//! Deterministic instance builders: the worked line examples, the figure
//! reconstructions with their reference regionalizations, and the synthetic
//! nationwide family.
//!
//! Figure geometries are known only up to their published delay values, so
//! each figure generator solves its own output and fails with a
//! reconstruction-mismatch error if any reference value is off.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::assignment::{min_cost_assignment, AssignmentError};
use crate::instance::{Instance, InstanceError};
use crate::quantity::{Quantity, DEFAULT_SCALE};
use crate::regionalize::{
    solve_regionalized, RegionError, RegionPart, Regionalization,
};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("n = {n} does not quantize: {required} must divide the scale {scale}")]
    NotRepresentable { n: u64, required: u64, scale: u64 },
    #[error("figure {figure} reconstruction mismatch: {detail}")]
    ReconstructionMismatch { figure: String, detail: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

fn q_units(units: i64) -> Quantity {
    Quantity(units.checked_mul(DEFAULT_SCALE as i64).expect("unit overflow"))
}

/// Discretization of the unit-line example: `n` unit demands at the midpoint
/// grid (i + 1/2)/n, FCs at 0 and 0.4 with capacity n/2 each.
pub fn generate_continuous_line(n: u64) -> Result<Instance, GeneratorError> {
    if n == 0 || n % 2 != 0 {
        return Err(GeneratorError::InvalidParams(format!(
            "n must be even and positive, got {n}"
        )));
    }
    let scale = DEFAULT_SCALE;
    if scale % (2 * n) != 0 {
        return Err(GeneratorError::NotRepresentable {
            n,
            required: 2 * n,
            scale,
        });
    }
    if scale % 5 != 0 {
        return Err(GeneratorError::NotRepresentable {
            n,
            required: 5,
            scale,
        });
    }
    let step = (scale / (2 * n)) as i64;
    let demands = (0..n)
        .map(|i| (format!("d{i}"), Quantity((2 * i as i64 + 1) * step), 1))
        .collect();
    let fcs = vec![
        ("f0".to_string(), Quantity::ZERO, n / 2),
        ("f1".to_string(), Quantity(2 * scale as i64 / 5), n / 2),
    ];
    Ok(Instance::line(demands, fcs)?)
}

/// The chain instance showing a 1-regionalized delay a demand-factor above
/// the k-regionalized delay: k segments, the leftmost holding D′ units of
/// demand against an FC of capacity D′ at unit distance, unit pairs after
/// it, and a final segment of length L+1.
pub fn generate_line_lb(k: u64, dprime: u64, l: u64) -> Result<Instance, GeneratorError> {
    if k < 2 || dprime == 0 {
        return Err(GeneratorError::InvalidParams(format!(
            "need k >= 2 and dprime >= 1, got k={k} dprime={dprime}"
        )));
    }
    let mut demands = Vec::new();
    let mut fcs = Vec::new();
    for s in 1..=k {
        let quantity = if s == 1 { dprime } else { 1 };
        demands.push((format!("i{s}"), q_units(s as i64 - 1), quantity));
        let fc_pos = if s == k { k + l } else { s };
        fcs.push((format!("j{s}"), q_units(fc_pos as i64), quantity));
    }
    Ok(Instance::line(demands, fcs)?)
}

/// Closed form for the 1-region minimum delay of [`generate_line_lb`]:
/// D′(L+k) + (k−1)(L+1) + (k−1)(k−2)/2.
pub fn line_lb_one_region_delay(k: u64, dprime: u64, l: u64) -> Quantity {
    let k = k as i64;
    let dprime = dprime as i64;
    let l = l as i64;
    q_units(dprime * (l + k) + (k - 1) * (l + 1) + (k - 1) * (k - 2) / 2)
}

/// Closed form for the k-region delay of [`generate_line_lb`]:
/// D′ + k − 1 + L.
pub fn line_lb_k_region_delay(k: u64, dprime: u64, l: u64) -> Quantity {
    q_units(dprime as i64 + k as i64 - 1 + l as i64)
}

/// The expected 1-region backlogs of [`generate_line_lb`]:
/// β_s = L + (k−s) for s < k, β_k = 0.
pub fn line_lb_expected_backlogs(k: u64, l: u64) -> Vec<Quantity> {
    (1..=k)
        .map(|s| {
            if s == k {
                Quantity::ZERO
            } else {
                q_units(l as i64 + (k - s) as i64)
            }
        })
        .collect()
}

/// The k-regionalization pairing each segment's demand with its own FC.
pub fn line_lb_k_regionalization(k: u64) -> Regionalization {
    Regionalization {
        parts: (0..k as usize)
            .map(|s| RegionPart {
                demands: vec![s],
                fcs: vec![s],
            })
            .collect(),
    }
}

/// A line figure with a fixed demand partition on which the best FC
/// grouping beats the grouping induced by the global assignment.
#[derive(Debug, Clone)]
pub struct LineNoncontigFigure {
    pub instance: Instance,
    /// The fixed partition: left demand alone, right two together.
    pub demand_partition: Vec<Vec<usize>>,
    /// Grouping the FCs as the global minimum-cost assignment pairs them.
    pub global_grouping: Regionalization,
    pub global_grouping_delay: Quantity,
    /// The best FC grouping for the same demand partition.
    pub best_grouping: Regionalization,
    pub best_grouping_delay: Quantity,
}

/// Three unit demands at 0, 1, 3 and three unit FCs at 0, 3, 6. With the
/// left demand fixed in its own region, grouping FCs by the global
/// assignment costs 8 while the best grouping costs 7 (it hands the middle
/// FC to the left demand). Solver-verified on construction.
pub fn generate_line_noncontig() -> Result<LineNoncontigFigure, GeneratorError> {
    let instance = Instance::line(
        vec![
            ("d0".into(), q_units(0), 1),
            ("d1".into(), q_units(1), 1),
            ("d2".into(), q_units(3), 1),
        ],
        vec![
            ("f0".into(), q_units(0), 1),
            ("f1".into(), q_units(3), 1),
            ("f2".into(), q_units(6), 1),
        ],
    )?;
    let demand_partition = vec![vec![0], vec![1, 2]];

    let x = min_cost_assignment(&instance)?;
    let fc_of = |i: usize| (0..3).find(|&j| x.flow(i, j) > 0).expect("unit demand");
    let global_grouping = Regionalization {
        parts: vec![
            RegionPart {
                demands: vec![0],
                fcs: vec![fc_of(0)],
            },
            RegionPart {
                demands: vec![1, 2],
                fcs: {
                    let mut fcs = vec![fc_of(1), fc_of(2)];
                    fcs.sort_unstable();
                    fcs
                },
            },
        ],
    };
    let global_sol = solve_regionalized(&instance, &global_grouping)?;
    let (best_grouping, best_sol) =
        crate::regionalize::search_best_fc_grouping(&instance, &demand_partition)?;

    let mismatch = |detail: String| GeneratorError::ReconstructionMismatch {
        figure: "line-noncontig".into(),
        detail,
    };
    if global_sol.total_delay != q_units(8) {
        return Err(mismatch(format!(
            "global-assignment grouping delay {} != 8",
            global_sol.total_delay
        )));
    }
    if best_sol.total_delay != q_units(7) {
        return Err(mismatch(format!(
            "best grouping delay {} != 7",
            best_sol.total_delay
        )));
    }
    if x.cost() >= q_units(7) {
        return Err(mismatch(format!("assignment cost {} not below 7", x.cost())));
    }
    Ok(LineNoncontigFigure {
        instance,
        demand_partition,
        global_grouping,
        global_grouping_delay: global_sol.total_delay,
        best_grouping,
        best_grouping_delay: best_sol.total_delay,
    })
}

/// The two-cluster tree figure: the contiguous 2-regionalization that keeps
/// the (unique) global assignment costs 4L, while a different assignment on
/// the same demand partition costs only 2L + 6ε.
#[derive(Debug, Clone)]
pub struct Tree2Figure {
    pub instance: Instance,
    pub global_grouping: Regionalization,
    pub global_grouping_delay: Quantity,
    pub alternate_grouping: Regionalization,
    pub alternate_grouping_delay: Quantity,
}

/// Two hubs an ε-edge apart, each hosting two unit demands, one FC at ε and
/// one at L. Pre: ε < L.
pub fn generate_tree2(l: u64, eps: u64) -> Result<Tree2Figure, GeneratorError> {
    if eps == 0 || eps >= l {
        return Err(GeneratorError::InvalidParams(format!(
            "need 0 < eps < L, got eps={eps} l={l}"
        )));
    }
    let tree = crate::instance::TreeMetric::new(
        vec![
            "h1".into(),
            "h2".into(),
            "n1".into(),
            "n2".into(),
            "m1".into(),
            "m2".into(),
        ],
        &[
            ("h1".into(), "h2".into(), q_units(eps as i64)),
            ("h1".into(), "n1".into(), q_units(eps as i64)),
            ("h2".into(), "n2".into(), q_units(eps as i64)),
            ("h1".into(), "m1".into(), q_units(l as i64)),
            ("h2".into(), "m2".into(), q_units(l as i64)),
        ],
    )?;
    let instance = Instance::tree(
        tree,
        vec![
            ("i11".into(), "h1", 1),
            ("i12".into(), "h1", 1),
            ("i21".into(), "h2", 1),
            ("i22".into(), "h2", 1),
        ],
        vec![
            ("c1".into(), "n1", 1),
            ("c2".into(), "n2", 1),
            ("f1".into(), "m1", 1),
            ("f2".into(), "m2", 1),
        ],
    )?;
    // FCs: c1=0, c2=1, f1=2, f2=3. The global assignment serves each hub
    // from its own close and far FC.
    let global_grouping = Regionalization {
        parts: vec![
            RegionPart {
                demands: vec![0, 1],
                fcs: vec![0, 2],
            },
            RegionPart {
                demands: vec![2, 3],
                fcs: vec![1, 3],
            },
        ],
    };
    // The alternate assignment hands both close FCs to hub 1 and both far
    // FCs to hub 2.
    let alternate_grouping = Regionalization {
        parts: vec![
            RegionPart {
                demands: vec![0, 1],
                fcs: vec![0, 1],
            },
            RegionPart {
                demands: vec![2, 3],
                fcs: vec![2, 3],
            },
        ],
    };
    let global_sol = solve_regionalized(&instance, &global_grouping)?;
    let alternate_sol = solve_regionalized(&instance, &alternate_grouping)?;

    let l = l as i64;
    let eps = eps as i64;
    let mismatch = |detail: String| GeneratorError::ReconstructionMismatch {
        figure: "tree2-2-parts".into(),
        detail,
    };
    if global_sol.total_delay != q_units(4 * l) {
        return Err(mismatch(format!(
            "global grouping delay {} != 4L",
            global_sol.total_delay
        )));
    }
    if alternate_sol.total_delay != q_units(2 * l + 6 * eps) {
        return Err(mismatch(format!(
            "alternate grouping delay {} != 2L+6eps",
            alternate_sol.total_delay
        )));
    }
    let opt = min_cost_assignment(&instance)?.cost();
    if opt != q_units(2 * l + 2 * eps) {
        return Err(mismatch(format!("assignment cost {opt} != 2L+2eps")));
    }
    Ok(Tree2Figure {
        instance,
        global_grouping,
        global_grouping_delay: global_sol.total_delay,
        alternate_grouping,
        alternate_grouping_delay: alternate_sol.total_delay,
    })
}

/// The r-cluster tree figure and its three reference regionalizations.
#[derive(Debug, Clone)]
pub struct TreeRFigure {
    pub instance: Instance,
    /// Cluster regions keeping the global assignment: delay r²L.
    pub contiguous_global: Regionalization,
    pub contiguous_global_delay: Quantity,
    /// Cluster regions with redistributed FCs: delay rL + (3r²−r)ε.
    pub contiguous_alternate: Regionalization,
    pub contiguous_alternate_delay: Quantity,
    /// Mixed-cluster regions keeping the global assignment:
    /// delay rL + r(r−1)ε.
    pub noncontiguous_global: Regionalization,
    pub noncontiguous_global_delay: Quantity,
}

/// r hub clusters around a star center (ε edges). Cluster t hosts r unit
/// demands, r−1 close FCs at ε, and one far FC at L. Pre: ε < L.
pub fn generate_tree_r(r: u64, l: u64, eps: u64) -> Result<TreeRFigure, GeneratorError> {
    if r < 2 {
        return Err(GeneratorError::InvalidParams(format!(
            "need r >= 2, got {r}"
        )));
    }
    if eps == 0 || eps >= l {
        return Err(GeneratorError::InvalidParams(format!(
            "need 0 < eps < L, got eps={eps} l={l}"
        )));
    }
    let r = r as usize;
    let mut nodes = vec!["c".to_string()];
    let mut edges = Vec::new();
    for t in 0..r {
        let hub = format!("h{t}");
        edges.push(("c".to_string(), hub.clone(), q_units(eps as i64)));
        for a in 0..r - 1 {
            let leaf = format!("n{t}_{a}");
            edges.push((hub.clone(), leaf.clone(), q_units(eps as i64)));
            nodes.push(leaf);
        }
        let far = format!("m{t}");
        edges.push((hub.clone(), far.clone(), q_units(l as i64)));
        nodes.push(far);
        nodes.push(hub);
    }
    let tree = crate::instance::TreeMetric::new(nodes, &edges)?;

    let mut demands = Vec::new();
    let mut fcs = Vec::new();
    let mut hub_names = Vec::new();
    for t in 0..r {
        hub_names.push(format!("h{t}"));
    }
    // Demand index t*r + s; close FC index t*(r-1) + a; far FC index
    // r*(r-1) + t.
    for t in 0..r {
        for s in 0..r {
            demands.push((format!("i{t}_{s}"), hub_names[t].as_str(), 1));
        }
    }
    let mut close_nodes = Vec::new();
    for t in 0..r {
        for a in 0..r - 1 {
            close_nodes.push(format!("n{t}_{a}"));
        }
    }
    for (idx, node) in close_nodes.iter().enumerate() {
        fcs.push((format!("cf{idx}"), node.as_str(), 1));
    }
    let mut far_nodes = Vec::new();
    for t in 0..r {
        far_nodes.push(format!("m{t}"));
    }
    for (t, node) in far_nodes.iter().enumerate() {
        fcs.push((format!("ff{t}"), node.as_str(), 1));
    }
    let instance = Instance::tree(tree, demands, fcs)?;

    let demand_idx = |t: usize, s: usize| t * r + s;
    let close_idx = |t: usize, a: usize| t * (r - 1) + a;
    let far_idx = |t: usize| r * (r - 1) + t;

    let contiguous_global = Regionalization {
        parts: (0..r)
            .map(|t| RegionPart {
                demands: (0..r).map(|s| demand_idx(t, s)).collect(),
                fcs: (0..r - 1)
                    .map(|a| close_idx(t, a))
                    .chain([far_idx(t)])
                    .collect(),
            })
            .collect(),
    };
    // Deal the r(r−1) close FCs r apiece to the first r−1 clusters; the
    // last cluster takes every far FC.
    let flat_close: Vec<usize> = (0..r)
        .flat_map(|t| (0..r - 1).map(move |a| close_idx(t, a)))
        .collect();
    let contiguous_alternate = Regionalization {
        parts: (0..r)
            .map(|t| RegionPart {
                demands: (0..r).map(|s| demand_idx(t, s)).collect(),
                fcs: if t < r - 1 {
                    flat_close[t * r..(t + 1) * r].to_vec()
                } else {
                    (0..r).map(far_idx).collect()
                },
            })
            .collect(),
    };
    // Keep the global pairs but group them across clusters: the far-served
    // demands form one region, the close pairs fill the rest r apiece.
    let close_pairs: Vec<(usize, usize)> = (0..r)
        .flat_map(|t| (0..r - 1).map(move |a| (demand_idx(t, a), close_idx(t, a))))
        .collect();
    let mut noncontig_parts: Vec<RegionPart> = close_pairs
        .chunks(r)
        .map(|chunk| RegionPart {
            demands: chunk.iter().map(|&(i, _)| i).collect(),
            fcs: chunk.iter().map(|&(_, j)| j).collect(),
        })
        .collect();
    noncontig_parts.push(RegionPart {
        demands: (0..r).map(|t| demand_idx(t, r - 1)).collect(),
        fcs: (0..r).map(far_idx).collect(),
    });
    let noncontiguous_global = Regionalization {
        parts: noncontig_parts,
    };

    let contiguous_global_sol = solve_regionalized(&instance, &contiguous_global)?;
    let contiguous_alternate_sol = solve_regionalized(&instance, &contiguous_alternate)?;
    let noncontiguous_global_sol = solve_regionalized(&instance, &noncontiguous_global)?;

    let ri = r as i64;
    let li = l as i64;
    let ei = eps as i64;
    let expect = [
        ("contiguous-global", contiguous_global_sol.total_delay, q_units(ri * ri * li)),
        (
            "contiguous-alternate",
            contiguous_alternate_sol.total_delay,
            q_units(ri * li + (3 * ri * ri - ri) * ei),
        ),
        (
            "noncontiguous-global",
            noncontiguous_global_sol.total_delay,
            q_units(ri * li + ri * (ri - 1) * ei),
        ),
    ];
    for (name, got, want) in expect {
        if got != want {
            return Err(GeneratorError::ReconstructionMismatch {
                figure: "trees-r-parts".into(),
                detail: format!("{name} delay {got} != expected {want}"),
            });
        }
    }
    Ok(TreeRFigure {
        instance,
        contiguous_global,
        contiguous_global_delay: contiguous_global_sol.total_delay,
        contiguous_alternate,
        contiguous_alternate_delay: contiguous_alternate_sol.total_delay,
        noncontiguous_global,
        noncontiguous_global_delay: noncontiguous_global_sol.total_delay,
    })
}

/// Parameters of the synthetic nationwide family. `alpha` interpolates the
/// capacity vector between the equal split (0) and the Voronoi capacities
/// (scale), in scale units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_demands: usize,
    pub n_fcs: usize,
    /// α in scale units: 0 ≤ alpha ≤ DEFAULT_SCALE.
    pub alpha: Quantity,
    pub clusters: usize,
    /// Cluster radius in scale units.
    pub spread: Quantity,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            n_demands: 160,
            n_fcs: 16,
            alpha: Quantity(DEFAULT_SCALE as i64),
            clusters: 6,
            spread: q_units(40),
        }
    }
}

/// Seeded planar instance mimicking a national retailer: demands cluster
/// around population centers, FC sites are biased away from the densest
/// areas, and capacities blend the Voronoi vector C^(v) with the equal
/// split C^(e) as α·C^(v) + (1−α)·C^(e), floored with the shortfall topped
/// up one unit at a time onto the least-capacitated FCs.
pub fn generate_synthetic_national(
    config: &SyntheticConfig,
) -> Result<Instance, GeneratorError> {
    if config.n_demands == 0 || config.n_fcs == 0 || config.clusters == 0 {
        return Err(GeneratorError::InvalidParams(
            "n_demands, n_fcs and clusters must be positive".into(),
        ));
    }
    let scale = DEFAULT_SCALE as i64;
    if config.alpha.raw() < 0 || config.alpha.raw() > scale {
        return Err(GeneratorError::InvalidParams(format!(
            "alpha {} outside [0, 1]",
            config.alpha
        )));
    }
    if config.spread.raw() <= 0 {
        return Err(GeneratorError::InvalidParams("spread must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let extent = q_units(1000).raw();

    // Population centers, weighted so early clusters dominate.
    let centers: Vec<(i64, i64)> = (0..config.clusters)
        .map(|_| {
            (
                rng.gen_range(extent / 10..=9 * extent / 10),
                rng.gen_range(extent / 10..=9 * extent / 10),
            )
        })
        .collect();
    let weights: Vec<f64> = (0..config.clusters).map(|c| 1.0 / (c as f64 + 1.0)).collect();
    let weight_total: f64 = weights.iter().sum();

    let mut demands = Vec::with_capacity(config.n_demands);
    for i in 0..config.n_demands {
        let mut pick = rng.gen::<f64>() * weight_total;
        let mut cluster = 0;
        for (c, &w) in weights.iter().enumerate() {
            if pick < w {
                cluster = c;
                break;
            }
            pick -= w;
        }
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        let radius = -(config.spread.raw() as f64) * (1.0 - rng.gen::<f64>()).ln();
        let (cx, cy) = centers[cluster];
        let x = (cx as f64 + radius * angle.cos()).round() as i64;
        let y = (cy as f64 + radius * angle.sin()).round() as i64;
        let x = x.clamp(0, extent);
        let y = y.clamp(0, extent);
        let quantity = 1 + (-(4.0) * (1.0 - rng.gen::<f64>()).ln()).floor() as u64;
        demands.push((
            format!("d{i}"),
            vec![Quantity(x), Quantity(y)],
            quantity.min(24),
        ));
    }

    // FC sites: rejection-sample away from the densest centers.
    let mut fc_positions = Vec::with_capacity(config.n_fcs);
    for _ in 0..config.n_fcs {
        let mut best: Option<(i64, (i64, i64))> = None;
        let mut chosen = None;
        for _ in 0..32 {
            let cand = (
                rng.gen_range(0..=extent),
                rng.gen_range(0..=extent),
            );
            let nearest = centers
                .iter()
                .map(|&(cx, cy)| {
                    let dx = (cand.0 - cx) as i128;
                    let dy = (cand.1 - cy) as i128;
                    dx * dx + dy * dy
                })
                .min()
                .unwrap();
            let nearest = (nearest as f64).sqrt() as i64;
            let accept_prob = (nearest as f64 / (extent as f64 / 3.0)).clamp(0.05, 1.0);
            if best.map_or(true, |(score, _)| nearest > score) {
                best = Some((nearest, cand));
            }
            if rng.gen::<f64>() < accept_prob {
                chosen = Some(cand);
                break;
            }
        }
        let (x, y) = chosen.unwrap_or_else(|| best.expect("at least one candidate").1);
        fc_positions.push((x, y));
    }

    // Voronoi capacities: each demand counts toward its nearest FC, ties to
    // the lowest FC index.
    let mut voronoi = vec![0u64; config.n_fcs];
    for (_, pos, quantity) in &demands {
        let mut best_j = 0;
        let mut best_d = i128::MAX;
        for (j, &(fx, fy)) in fc_positions.iter().enumerate() {
            let dx = pos[0].raw() as i128 - fx as i128;
            let dy = pos[1].raw() as i128 - fy as i128;
            let d = dx * dx + dy * dy;
            if d < best_d {
                best_d = d;
                best_j = j;
            }
        }
        voronoi[best_j] += quantity;
    }
    let total_demand: u64 = demands.iter().map(|(_, _, d)| d).sum();

    // Equal capacities: floor split with the remainder on the first FCs.
    let k = config.n_fcs as u64;
    let equal: Vec<u64> = (0..config.n_fcs)
        .map(|j| total_demand / k + u64::from((j as u64) < total_demand % k))
        .collect();

    // Blend and floor, then top the shortfall onto the least-capacitated.
    let alpha = config.alpha.raw() as u128;
    let complement = (scale - config.alpha.raw()) as u128;
    let mut capacities: Vec<u64> = (0..config.n_fcs)
        .map(|j| {
            let blended = alpha * voronoi[j] as u128 + complement * equal[j] as u128;
            (blended / scale as u128) as u64
        })
        .collect();
    let mut shortfall = total_demand - capacities.iter().sum::<u64>().min(total_demand);
    while shortfall > 0 {
        let j = (0..config.n_fcs)
            .min_by_key(|&j| (capacities[j], j))
            .expect("at least one fc");
        capacities[j] += 1;
        shortfall -= 1;
    }

    let fcs = fc_positions
        .into_iter()
        .enumerate()
        .map(|(j, (x, y))| {
            (
                format!("f{j}"),
                vec![Quantity(x), Quantity(y)],
                capacities[j],
            )
        })
        .collect();
    Ok(Instance::euclidean(2, demands, fcs)?)
}
