//! Seeded instance samplers shared by the integration suites.
#![allow(dead_code)] // each test binary uses a different subset

use fulfillnet::instance::{Instance, TreeMetric};
use fulfillnet::quantity::{Quantity, DEFAULT_SCALE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q_units(units: i64) -> Quantity {
    Quantity(units * DEFAULT_SCALE as i64)
}

fn random_quantities(
    rng: &mut ChaCha8Rng,
    nd: usize,
    nf: usize,
    max_quantity: u64,
    unit_demands: bool,
) -> (Vec<u64>, Vec<u64>) {
    let demands: Vec<u64> = (0..nd)
        .map(|_| {
            if unit_demands {
                1
            } else {
                rng.gen_range(0..=max_quantity)
            }
        })
        .collect();
    let total: u64 = demands.iter().sum();
    let mut capacities: Vec<u64> = (0..nf).map(|_| rng.gen_range(0..=max_quantity + 1)).collect();
    let mut have: u64 = capacities.iter().sum();
    let mut j = 0;
    while have < total {
        capacities[j % nf] += 1;
        have += 1;
        j += 1;
    }
    (demands, capacities)
}

/// Random instance over all four metric kinds with integer quantities.
/// Distances are exact but not necessarily whole base units (Euclidean).
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    max_demands: usize,
    max_fcs: usize,
    max_quantity: u64,
    unit_demands: bool,
) -> Instance {
    let nd = rng.gen_range(1..=max_demands);
    let nf = rng.gen_range(1..=max_fcs);
    let (demands, capacities) = random_quantities(rng, nd, nf, max_quantity, unit_demands);
    match rng.gen_range(0..4u8) {
        0 => Instance::line(
            demands
                .iter()
                .enumerate()
                .map(|(i, &d)| (format!("d{i}"), q_units(rng.gen_range(0..=30)), d))
                .collect(),
            capacities
                .iter()
                .enumerate()
                .map(|(j, &c)| (format!("f{j}"), q_units(rng.gen_range(0..=30)), c))
                .collect(),
        )
        .unwrap(),
        1 => Instance::euclidean(
            2,
            demands
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    (
                        format!("d{i}"),
                        vec![q_units(rng.gen_range(0..=30)), q_units(rng.gen_range(0..=30))],
                        d,
                    )
                })
                .collect(),
            capacities
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    (
                        format!("f{j}"),
                        vec![q_units(rng.gen_range(0..=30)), q_units(rng.gen_range(0..=30))],
                        c,
                    )
                })
                .collect(),
        )
        .unwrap(),
        2 => {
            let n_nodes = rng.gen_range(2..=6usize);
            let names: Vec<String> = (0..n_nodes).map(|v| format!("v{v}")).collect();
            let edges: Vec<(String, String, Quantity)> = (1..n_nodes)
                .map(|v| {
                    (
                        names[rng.gen_range(0..v)].clone(),
                        names[v].clone(),
                        q_units(rng.gen_range(1..=8)),
                    )
                })
                .collect();
            let tree = TreeMetric::new(names.clone(), &edges).unwrap();
            Instance::tree(
                tree,
                demands
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| {
                        (format!("d{i}"), names[rng.gen_range(0..n_nodes)].clone(), d)
                    })
                    .collect::<Vec<_>>()
                    .iter()
                    .map(|(id, node, d)| (id.clone(), node.as_str(), *d))
                    .collect(),
                capacities
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| {
                        (format!("f{j}"), names[rng.gen_range(0..n_nodes)].clone(), c)
                    })
                    .collect::<Vec<_>>()
                    .iter()
                    .map(|(id, node, c)| (id.clone(), node.as_str(), *c))
                    .collect(),
            )
            .unwrap()
        }
        _ => Instance::matrix(
            (0..nd)
                .map(|_| (0..nf).map(|_| q_units(rng.gen_range(0..=12))).collect())
                .collect(),
            demands
                .iter()
                .enumerate()
                .map(|(i, &d)| (format!("d{i}"), d))
                .collect(),
            capacities
                .iter()
                .enumerate()
                .map(|(j, &c)| (format!("f{j}"), c))
                .collect(),
        )
        .unwrap(),
    }
}

/// Random instance inside the minimum-delay oracle bounds: total demand at
/// most 8, at most 3 FCs, and every distance a whole number of base units.
pub fn random_oracle_instance(rng: &mut ChaCha8Rng) -> Instance {
    let nd = rng.gen_range(1..=4usize);
    let nf = rng.gen_range(1..=3usize);
    let demands: Vec<u64> = {
        let mut left = 8u64;
        (0..nd)
            .map(|_| {
                let d = rng.gen_range(0..=left.min(3));
                left -= d;
                d
            })
            .collect()
    };
    let total: u64 = demands.iter().sum();
    let mut capacities: Vec<u64> = (0..nf).map(|_| rng.gen_range(0..=4u64)).collect();
    let mut have: u64 = capacities.iter().sum();
    let mut j = 0;
    while have < total {
        capacities[j % nf] += 1;
        have += 1;
        j += 1;
    }
    if rng.gen_bool(0.5) {
        Instance::line(
            demands
                .iter()
                .enumerate()
                .map(|(i, &d)| (format!("d{i}"), q_units(rng.gen_range(0..=6)), d))
                .collect(),
            capacities
                .iter()
                .enumerate()
                .map(|(j, &c)| (format!("f{j}"), q_units(rng.gen_range(0..=6)), c))
                .collect(),
        )
        .unwrap()
    } else {
        Instance::matrix(
            (0..nd)
                .map(|_| (0..nf).map(|_| q_units(rng.gen_range(0..=5))).collect())
                .collect(),
            demands
                .iter()
                .enumerate()
                .map(|(i, &d)| (format!("d{i}"), d))
                .collect(),
            capacities
                .iter()
                .enumerate()
                .map(|(j, &c)| (format!("f{j}"), c))
                .collect(),
        )
        .unwrap()
    }
}

/// Random unit line instance with n matched pairs, demand positions on odd
/// multiples of 0.001 and FC positions on even ones, so no pair distance is
/// zero and the aspect ratio is well defined.
pub fn random_unit_line(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let demands = (0..n)
        .map(|i| {
            (
                format!("d{i}"),
                Quantity((2 * rng.gen_range(0..=1000i64) + 1) * 1000),
                1,
            )
        })
        .collect();
    let fcs = (0..n)
        .map(|j| {
            (
                format!("f{j}"),
                Quantity(2 * rng.gen_range(0..=1000i64) * 1000),
                1,
            )
        })
        .collect();
    Instance::line(demands, fcs).unwrap()
}

/// Random unit planar instance with the same parity trick per axis.
pub fn random_unit_planar(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let demands = (0..n)
        .map(|i| {
            (
                format!("d{i}"),
                vec![
                    Quantity((2 * rng.gen_range(0..=500i64) + 1) * 1000),
                    Quantity((2 * rng.gen_range(0..=500i64) + 1) * 1000),
                ],
                1,
            )
        })
        .collect();
    let fcs = (0..n)
        .map(|j| {
            (
                format!("f{j}"),
                vec![
                    Quantity(2 * rng.gen_range(0..=500i64) * 1000),
                    Quantity(2 * rng.gen_range(0..=500i64) * 1000),
                ],
                1,
            )
        })
        .collect();
    Instance::euclidean(2, demands, fcs).unwrap()
}
