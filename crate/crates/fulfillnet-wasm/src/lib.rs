//! Browser bindings for the fulfillment-network solvers. Three
//! parameter-explorable views, each returning a JSON document the static
//! page renders onto canvases:
//!
//! - `line_explorer`: the unit-line instance with a movable second FC;
//!   equilibrium backlogs/delays against the split-at-0.5 regionalization.
//! - `synthetic_map`: a seeded planar instance with the capacity mix
//!   slider; global equilibrium versus a 2x2 geographic regionalization.
//! - `alpha_sweep`: delay and minimum assignment cost across the mix grid.

use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

use fulfillnet::equilibrium::min_delay_equilibrium;
use fulfillnet::generators::{generate_synthetic_national, SyntheticConfig};
use fulfillnet::instance::{Instance, Location};
use fulfillnet::quantity::{Quantity, DEFAULT_SCALE};
use fulfillnet::regionalize::{
    grid_regionalization, solve_regionalized, RegionPart, Regionalization,
};

fn units(q: Quantity) -> f64 {
    q.raw() as f64 / DEFAULT_SCALE as f64
}

fn parse_fraction(text: &str, name: &str) -> Result<Quantity, String> {
    let value = Quantity::parse_decimal(text, DEFAULT_SCALE)
        .map_err(|e| format!("{name}: {e}"))?;
    if value.raw() < 0 || value.raw() > DEFAULT_SCALE as i64 {
        return Err(format!("{name} must lie in [0, 1]"));
    }
    Ok(value)
}

#[derive(Serialize)]
struct LineExplorerDoc {
    n: u64,
    fc2_pos: f64,
    demand_pos: Vec<f64>,
    global_delays: Vec<f64>,
    global_backlogs: Vec<f64>,
    global_mean_delay: f64,
    regional_mean_delay: f64,
    min_cost_mean: f64,
}

/// Unit-line explorer: n unit demands on the midpoint grid, FC1 at 0 and
/// FC2 at `fc2_pos` (capacity n/2 each), compared against the
/// regionalization splitting the line at 0.5.
#[wasm_bindgen]
pub fn line_explorer(n: u32, fc2_pos: &str) -> Result<String, String> {
    let n = n as u64;
    if n < 2 || n % 2 != 0 {
        return Err("n must be even and at least 2".into());
    }
    let scale = DEFAULT_SCALE;
    if scale % (2 * n) != 0 {
        return Err(format!("n={n} does not quantize on the midpoint grid"));
    }
    let fc2 = parse_fraction(fc2_pos, "fc2_pos")?;
    let step = (scale / (2 * n)) as i64;
    let demands: Vec<(String, Quantity, u64)> = (0..n)
        .map(|i| (format!("d{i}"), Quantity((2 * i as i64 + 1) * step), 1))
        .collect();
    let fcs = vec![
        ("f0".to_string(), Quantity::ZERO, n / 2),
        ("f1".to_string(), fc2, n / 2),
    ];
    let instance = Instance::line(demands, fcs).map_err(|e| e.to_string())?;
    let sol = min_delay_equilibrium(&instance).map_err(|e| e.to_string())?;

    // Split at 0.5: the midpoint grid puts exactly n/2 demands on each side.
    let half = (n / 2) as usize;
    let reg = Regionalization {
        parts: vec![
            RegionPart {
                demands: (0..half).collect(),
                fcs: vec![0],
            },
            RegionPart {
                demands: (half..n as usize).collect(),
                fcs: vec![1],
            },
        ],
    };
    let regional = solve_regionalized(&instance, &reg).map_err(|e| e.to_string())?;

    let doc = LineExplorerDoc {
        n,
        fc2_pos: units(fc2),
        demand_pos: instance
            .demands()
            .iter()
            .map(|d| match &d.loc {
                Location::Point(p) => units(p[0]),
                _ => unreachable!("line metric"),
            })
            .collect(),
        global_delays: sol.delays.iter().map(|&d| units(d)).collect(),
        global_backlogs: sol.backlogs.iter().map(|&b| units(b)).collect(),
        global_mean_delay: units(sol.total_delay) / n as f64,
        regional_mean_delay: units(regional.total_delay) / n as f64,
        min_cost_mean: units(sol.assignment.cost()) / n as f64,
    };
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct MapNodeDoc {
    x: f64,
    y: f64,
    size: u64,
    value: f64,
}

#[derive(Serialize)]
struct SyntheticMapDoc {
    extent: f64,
    demands: Vec<MapNodeDoc>,
    fcs: Vec<MapNodeDoc>,
    max_backlog: f64,
    total_delay: f64,
    min_cost: f64,
    regional_delay: f64,
    improvement_percent: f64,
}

/// Seeded planar instance under the given capacity mix; demands carry their
/// equilibrium delay, FCs their backlog, plus a 2x2 regional comparison.
#[wasm_bindgen]
pub fn synthetic_map(
    seed: u32,
    alpha: &str,
    demands: u32,
    fcs: u32,
    clusters: u32,
) -> Result<String, String> {
    let config = SyntheticConfig {
        seed: seed as u64,
        n_demands: demands as usize,
        n_fcs: fcs as usize,
        alpha: parse_fraction(alpha, "alpha")?,
        clusters: clusters as usize,
        ..SyntheticConfig::default()
    };
    let instance = generate_synthetic_national(&config).map_err(|e| e.to_string())?;
    let sol = min_delay_equilibrium(&instance).map_err(|e| e.to_string())?;
    let reg = grid_regionalization(&instance, 2, 2).map_err(|e| e.to_string())?;
    let regional = solve_regionalized(&instance, &reg).map_err(|e| e.to_string())?;

    let point = |loc: &Location| match loc {
        Location::Point(p) => (units(p[0]), units(p[1])),
        _ => unreachable!("planar metric"),
    };
    let improvement = if sol.total_delay.raw() > 0 {
        (sol.total_delay.raw() - regional.total_delay.raw()) as f64 * 100.0
            / sol.total_delay.raw() as f64
    } else {
        0.0
    };
    let doc = SyntheticMapDoc {
        extent: 1000.0,
        demands: instance
            .demands()
            .iter()
            .zip(&sol.delays)
            .map(|(d, &delay)| {
                let (x, y) = point(&d.loc);
                MapNodeDoc {
                    x,
                    y,
                    size: d.quantity,
                    value: units(delay),
                }
            })
            .collect(),
        fcs: instance
            .fcs()
            .iter()
            .zip(&sol.backlogs)
            .map(|(f, &backlog)| {
                let (x, y) = point(&f.loc);
                MapNodeDoc {
                    x,
                    y,
                    size: f.capacity,
                    value: units(backlog),
                }
            })
            .collect(),
        max_backlog: sol.backlogs.iter().map(|&b| units(b)).fold(0.0, f64::max),
        total_delay: units(sol.total_delay),
        min_cost: units(sol.assignment.cost()),
        regional_delay: units(regional.total_delay),
        improvement_percent: improvement,
    };
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SweepPointDoc {
    alpha: f64,
    total_delay: f64,
    min_cost: f64,
}

/// Delay and minimum assignment cost across an evenly spaced alpha grid.
#[wasm_bindgen]
pub fn alpha_sweep(
    seed: u32,
    points: u32,
    demands: u32,
    fcs: u32,
    clusters: u32,
) -> Result<String, String> {
    if points < 2 {
        return Err("points must be at least 2".into());
    }
    let scale = DEFAULT_SCALE as i64;
    let mut rows = Vec::with_capacity(points as usize);
    for p in 0..points {
        let alpha = Quantity(scale * p as i64 / (points as i64 - 1));
        let config = SyntheticConfig {
            seed: seed as u64,
            n_demands: demands as usize,
            n_fcs: fcs as usize,
            alpha,
            clusters: clusters as usize,
            ..SyntheticConfig::default()
        };
        let instance = generate_synthetic_national(&config).map_err(|e| e.to_string())?;
        let sol = min_delay_equilibrium(&instance).map_err(|e| e.to_string())?;
        rows.push(SweepPointDoc {
            alpha: units(alpha),
            total_delay: units(sol.total_delay),
            min_cost: units(sol.assignment.cost()),
        });
    }
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}
