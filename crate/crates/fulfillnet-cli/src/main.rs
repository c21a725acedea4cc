//! Batch front end: generates instances, solves global and regionalized
//! equilibria, runs the fluid simulator, sweeps capacity mixes, and
//! verifies solutions. Every command writing artifacts also writes a
//! manifest with checksums; outputs are deterministic given (arguments,
//! seed).
//!
//! Exit codes: 0 success, 2 usage, 3 infeasible or malformed input,
//! 4 internal-invariant failure.

mod chart;
mod manifest;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use fulfillnet::assignment::min_cost_assignment;
use fulfillnet::dynamics::{compare_to_static, simulate, SimConfig};
use fulfillnet::equilibrium::{
    min_delay_equilibrium, verify_equilibrium, EquilibriumError, EquilibriumSolution,
};
use fulfillnet::export;
use fulfillnet::generators::{self, GeneratorError, SyntheticConfig};
use fulfillnet::instance::{load_instance, save_instance, Instance};
use fulfillnet::quantity::{Quantity, DEFAULT_SCALE};
use fulfillnet::regionalize::{
    euclidean_scale_decomposition, grid_regionalization, k_regionalization,
    line_scale_decomposition, solve_regionalized, RegionError, Regionalization,
    RegionalizedSolution,
};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "fulfillnet", version, about = "Fulfillment-network solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance (and any reference regionalizations).
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Solve the minimum-delay equilibrium, globally or per region.
    Solve {
        instance: PathBuf,
        /// Regionalization file; solves region by region when given.
        #[arg(long)]
        regions: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Construct a regionalization and write it as a decomposition file.
    Regionalize {
        instance: PathBuf,
        /// One of: k, line-scale, euclidean-scale, grid.
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 2)]
        nx: usize,
        #[arg(long, default_value_t = 2)]
        ny: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the greedy fluid dynamics and report distance to equilibrium.
    Simulate {
        instance: PathBuf,
        /// Time step as a decimal, e.g. 0.01.
        #[arg(long)]
        dt: String,
        #[arg(long)]
        steps: u64,
        #[arg(long = "sample-every")]
        sample_every: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the synthetic capacity mix and plot delay against alpha.
    SweepAlpha {
        #[arg(long)]
        seed: u64,
        /// Comma-separated alpha grid, e.g. 0,0.25,0.5,0.75,1.
        #[arg(long)]
        alphas: String,
        #[arg(long, default_value_t = 160)]
        demands: usize,
        #[arg(long, default_value_t = 16)]
        fcs: usize,
        #[arg(long, default_value_t = 6)]
        clusters: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a regionalized solve against the global equilibrium.
    Compare {
        instance: PathBuf,
        regions: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a solution file against the equilibrium conditions.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// n unit demands on the midpoint grid of [0,1], FCs at 0 and 0.4.
    ContinuousLine {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// The chain instance with D' units behind k-1 unit segments and a
    /// final segment of length L+1.
    LineLb {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        dprime: u64,
        #[arg(long = "L")]
        l: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// The 3-demand line figure (grouping delays 8 vs 7).
    LineNoncontig {
        #[arg(long)]
        out: PathBuf,
    },
    /// The two-cluster tree figure (4L vs 2L+6eps).
    Tree2 {
        #[arg(long = "L")]
        l: u64,
        #[arg(long)]
        eps: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// The r-cluster tree figure (r^2 L vs rL+(3r^2-r)eps vs rL+r(r-1)eps).
    TreeR {
        #[arg(long)]
        r: u64,
        #[arg(long = "L")]
        l: u64,
        #[arg(long)]
        eps: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded planar instance with clustered demand and blended capacities.
    Synthetic {
        #[arg(long)]
        seed: u64,
        /// Capacity mix in [0,1]: 1 = Voronoi, 0 = equal split.
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long, default_value_t = 160)]
        demands: usize,
        #[arg(long, default_value_t = 16)]
        fcs: usize,
        #[arg(long, default_value_t = 6)]
        clusters: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Input(m) => write!(f, "infeasible input: {m}"),
            CliError::Internal(m) => write!(f, "internal invariant failure: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Input(e.to_string())
    }
}

impl From<EquilibriumError> for CliError {
    fn from(e: EquilibriumError) -> CliError {
        match e {
            EquilibriumError::NegativeCycle | EquilibriumError::OracleExhausted => {
                CliError::Internal(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<RegionError> for CliError {
    fn from(e: RegionError) -> CliError {
        match e {
            RegionError::Equilibrium(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<GeneratorError> for CliError {
    fn from(e: GeneratorError) -> CliError {
        match e {
            GeneratorError::ReconstructionMismatch { .. } => CliError::Internal(e.to_string()),
            GeneratorError::InvalidParams(m) => CliError::Usage(m),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli)));
    let code = match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal invariant failure (panic)");
            4
        }
    };
    std::process::exit(code);
}

/// Quantization scale: FE_SCALE overrides the default of 10^6 and must be a
/// positive power of ten.
fn scale_from_env() -> Result<u64, CliError> {
    match std::env::var("FE_SCALE") {
        Err(_) => Ok(DEFAULT_SCALE),
        Ok(text) => {
            let value: u64 = text
                .parse()
                .map_err(|_| CliError::Usage(format!("FE_SCALE {text:?} is not an integer")))?;
            let mut probe = value;
            while probe > 1 && probe % 10 == 0 {
                probe /= 10;
            }
            if value == 0 || probe != 1 {
                return Err(CliError::Usage(format!(
                    "FE_SCALE must be a positive power of ten, got {value}"
                )));
            }
            Ok(value)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let scale = scale_from_env()?;
    match cli.command {
        Command::Generate { kind } => cmd_generate(kind, scale),
        Command::Solve {
            instance,
            regions,
            out,
        } => cmd_solve(&instance, regions.as_deref(), &out, scale),
        Command::Regionalize {
            instance,
            mode,
            nx,
            ny,
            out,
        } => cmd_regionalize(&instance, &mode, nx, ny, &out, scale),
        Command::Simulate {
            instance,
            dt,
            steps,
            sample_every,
            out,
        } => cmd_simulate(&instance, &dt, steps, sample_every, &out, scale),
        Command::SweepAlpha {
            seed,
            alphas,
            demands,
            fcs,
            clusters,
            out,
        } => cmd_sweep_alpha(seed, &alphas, demands, fcs, clusters, &out, scale),
        Command::Compare {
            instance,
            regions,
            out,
        } => cmd_compare(&instance, &regions, &out, scale),
        Command::Verify { instance, solution } => cmd_verify(&instance, &solution, scale),
    }
}

fn read_instance(path: &Path, scale: u64) -> Result<(Instance, Vec<u8>), CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let instance = load_instance(&bytes, scale)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((instance, bytes))
}

fn write_artifact(
    out_dir: &Path,
    name: &str,
    bytes: &[u8],
    manifest: &mut RunManifest,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join(name), bytes)?;
    manifest.record_output(name, bytes);
    Ok(())
}

fn mean_delay_text(total: Quantity, units: u64, scale: u64) -> String {
    if units == 0 {
        return "0".to_string();
    }
    format!(
        "{:.6}",
        total.raw() as f64 / units as f64 / scale as f64
    )
}

fn cmd_generate(kind: GenerateKind, scale: u64) -> Result<(), CliError> {
    let (out_dir, seed) = match &kind {
        GenerateKind::ContinuousLine { out, .. }
        | GenerateKind::LineLb { out, .. }
        | GenerateKind::LineNoncontig { out }
        | GenerateKind::Tree2 { out, .. }
        | GenerateKind::TreeR { out, .. } => (out.clone(), None),
        GenerateKind::Synthetic { out, seed, .. } => (out.clone(), Some(*seed)),
    };
    let mut manifest = RunManifest::new("generate", scale, seed);
    match kind {
        GenerateKind::ContinuousLine { n, .. } => {
            let instance = generators::generate_continuous_line(n)?;
            write_artifact(&out_dir, "instance.json", &save_instance(&instance), &mut manifest)?;
            println!(
                "generated continuous-line n={n}: {} demands, 2 fcs",
                instance.n_demands()
            );
        }
        GenerateKind::LineLb { k, dprime, l, .. } => {
            let instance = generators::generate_line_lb(k, dprime, l)?;
            write_artifact(&out_dir, "instance.json", &save_instance(&instance), &mut manifest)?;
            let reg = generators::line_lb_k_regionalization(k);
            write_artifact(
                &out_dir,
                "k-regionalization.json",
                &export::save_regionalization(&instance, &reg),
                &mut manifest,
            )?;
            println!(
                "generated line-lb k={k} dprime={dprime} L={l}: 1-region delay {} / {k}-region delay {}",
                generators::line_lb_one_region_delay(k, dprime, l).decimal_string(scale),
                generators::line_lb_k_region_delay(k, dprime, l).decimal_string(scale),
            );
        }
        GenerateKind::LineNoncontig { .. } => {
            let figure = generators::generate_line_noncontig()?;
            write_artifact(
                &out_dir,
                "instance.json",
                &save_instance(&figure.instance),
                &mut manifest,
            )?;
            write_artifact(
                &out_dir,
                "grouping-global.json",
                &export::save_regionalization(&figure.instance, &figure.global_grouping),
                &mut manifest,
            )?;
            write_artifact(
                &out_dir,
                "grouping-best.json",
                &export::save_regionalization(&figure.instance, &figure.best_grouping),
                &mut manifest,
            )?;
            println!(
                "generated line-noncontig: global-grouping delay {} / best-grouping delay {}",
                figure.global_grouping_delay.decimal_string(scale),
                figure.best_grouping_delay.decimal_string(scale),
            );
        }
        GenerateKind::Tree2 { l, eps, .. } => {
            let figure = generators::generate_tree2(l, eps)?;
            write_artifact(
                &out_dir,
                "instance.json",
                &save_instance(&figure.instance),
                &mut manifest,
            )?;
            write_artifact(
                &out_dir,
                "grouping-global.json",
                &export::save_regionalization(&figure.instance, &figure.global_grouping),
                &mut manifest,
            )?;
            write_artifact(
                &out_dir,
                "grouping-alternate.json",
                &export::save_regionalization(&figure.instance, &figure.alternate_grouping),
                &mut manifest,
            )?;
            println!(
                "generated tree2 L={l} eps={eps}: global-grouping delay {} / alternate delay {}",
                figure.global_grouping_delay.decimal_string(scale),
                figure.alternate_grouping_delay.decimal_string(scale),
            );
        }
        GenerateKind::TreeR { r, l, eps, .. } => {
            let figure = generators::generate_tree_r(r, l, eps)?;
            write_artifact(
                &out_dir,
                "instance.json",
                &save_instance(&figure.instance),
                &mut manifest,
            )?;
            for (name, reg) in [
                ("grouping-contiguous-global.json", &figure.contiguous_global),
                (
                    "grouping-contiguous-alternate.json",
                    &figure.contiguous_alternate,
                ),
                (
                    "grouping-noncontiguous-global.json",
                    &figure.noncontiguous_global,
                ),
            ] {
                write_artifact(
                    &out_dir,
                    name,
                    &export::save_regionalization(&figure.instance, reg),
                    &mut manifest,
                )?;
            }
            println!(
                "generated tree-r r={r} L={l} eps={eps}: delays {} / {} / {}",
                figure.contiguous_global_delay.decimal_string(scale),
                figure.contiguous_alternate_delay.decimal_string(scale),
                figure.noncontiguous_global_delay.decimal_string(scale),
            );
        }
        GenerateKind::Synthetic {
            seed,
            alpha,
            demands,
            fcs,
            clusters,
            ..
        } => {
            let alpha = Quantity::parse_decimal(&alpha, DEFAULT_SCALE)
                .map_err(|e| CliError::Usage(format!("--alpha: {e}")))?;
            let config = SyntheticConfig {
                seed,
                n_demands: demands,
                n_fcs: fcs,
                alpha,
                clusters,
                ..SyntheticConfig::default()
            };
            let instance = generators::generate_synthetic_national(&config)?;
            write_artifact(&out_dir, "instance.json", &save_instance(&instance), &mut manifest)?;
            println!(
                "generated synthetic seed={seed}: {} demands ({} units), {} fcs",
                instance.n_demands(),
                instance.total_demand(),
                instance.n_fcs()
            );
        }
    }
    manifest.write(&out_dir)?;
    Ok(())
}

fn regional_csvs(
    instance: &Instance,
    sol: &RegionalizedSolution,
) -> (String, String) {
    let scale = instance.scale();
    let mut backlogs = String::from("fc_id,backlog\n");
    let mut delays = String::from("demand_id,delay,assigned_fcs\n");
    for region in &sol.regions {
        for (jj, &j) in region.part.fcs.iter().enumerate() {
            backlogs.push_str(&format!(
                "{},{}\n",
                instance.fcs()[j].id,
                region.solution.backlogs[jj].decimal_string(scale)
            ));
        }
        for (ii, &i) in region.part.demands.iter().enumerate() {
            let assigned: Vec<&str> = region
                .part
                .fcs
                .iter()
                .enumerate()
                .filter(|&(jj, _)| region.solution.assignment.flow(ii, jj) > 0)
                .map(|(_, &j)| instance.fcs()[j].id.as_str())
                .collect();
            delays.push_str(&format!(
                "{},{},{}\n",
                instance.demands()[i].id,
                region.solution.delays[ii].decimal_string(scale),
                assigned.join("|")
            ));
        }
    }
    (backlogs, delays)
}

fn cmd_solve(
    instance_path: &Path,
    regions: Option<&Path>,
    out_dir: &Path,
    scale: u64,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("solve", scale, None);
    let (instance, bytes) = read_instance(instance_path, scale)?;
    manifest.record_input(instance_path, &bytes);
    match regions {
        None => {
            let sol = min_delay_equilibrium(&instance)?;
            write_artifact(
                out_dir,
                "solution.json",
                &export::save_solution(&instance, &sol),
                &mut manifest,
            )?;
            write_artifact(
                out_dir,
                "assignment.csv",
                export::assignment_csv(&instance, &sol.assignment).as_bytes(),
                &mut manifest,
            )?;
            write_artifact(
                out_dir,
                "backlogs.csv",
                export::backlogs_csv(&instance, &sol).as_bytes(),
                &mut manifest,
            )?;
            write_artifact(
                out_dir,
                "delays.csv",
                export::delays_csv(&instance, &sol).as_bytes(),
                &mut manifest,
            )?;
            println!(
                "cost={} total_delay={} demand_units={} mean_delay={}",
                sol.assignment.cost().decimal_string(scale),
                sol.total_delay.decimal_string(scale),
                instance.total_demand(),
                mean_delay_text(sol.total_delay, instance.total_demand(), scale),
            );
        }
        Some(regions_path) => {
            let region_bytes = std::fs::read(regions_path)
                .map_err(|e| CliError::Input(format!("{}: {e}", regions_path.display())))?;
            manifest.record_input(regions_path, &region_bytes);
            let reg = export::load_regionalization(&instance, &region_bytes)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let sol = solve_regionalized(&instance, &reg)?;
            write_artifact(
                out_dir,
                "regional_summary.csv",
                export::regional_summary_csv(&instance, &sol).as_bytes(),
                &mut manifest,
            )?;
            let (backlogs, delays) = regional_csvs(&instance, &sol);
            write_artifact(out_dir, "backlogs.csv", backlogs.as_bytes(), &mut manifest)?;
            write_artifact(out_dir, "delays.csv", delays.as_bytes(), &mut manifest)?;
            println!(
                "regions={} total_delay={} min_cost={} demand_units={} mean_delay={}",
                sol.regions.len(),
                sol.total_delay.decimal_string(scale),
                sol.global_min_cost.decimal_string(scale),
                instance.total_demand(),
                mean_delay_text(sol.total_delay, instance.total_demand(), scale),
            );
        }
    }
    manifest.write(out_dir)?;
    Ok(())
}

fn cmd_regionalize(
    instance_path: &Path,
    mode: &str,
    nx: usize,
    ny: usize,
    out_dir: &Path,
    scale: u64,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("regionalize", scale, None);
    let (instance, bytes) = read_instance(instance_path, scale)?;
    manifest.record_input(instance_path, &bytes);
    let reg: Regionalization = match mode {
        "k" => k_regionalization(&instance)?,
        "line-scale" => line_scale_decomposition(&instance)?.regionalization,
        "euclidean-scale" => euclidean_scale_decomposition(&instance)?.regionalization,
        "grid" => grid_regionalization(&instance, nx, ny)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown mode {other:?}; expected k, line-scale, euclidean-scale, or grid"
            )))
        }
    };
    write_artifact(
        out_dir,
        "regionalization.json",
        &export::save_regionalization(&instance, &reg),
        &mut manifest,
    )?;
    let nonempty = reg.parts.iter().filter(|p| !p.demands.is_empty()).count();
    println!(
        "mode={mode} parts={} nonempty_regions={nonempty}",
        reg.parts.len()
    );
    manifest.write(out_dir)?;
    Ok(())
}

fn cmd_simulate(
    instance_path: &Path,
    dt_text: &str,
    steps: u64,
    sample_every: Option<u64>,
    out_dir: &Path,
    scale: u64,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("simulate", scale, None);
    let (instance, bytes) = read_instance(instance_path, scale)?;
    manifest.record_input(instance_path, &bytes);
    let dt = Quantity::parse_decimal(dt_text, scale)
        .map_err(|e| CliError::Usage(format!("--dt: {e}")))?;
    let mut config = SimConfig::greedy(dt, steps);
    if let Some(every) = sample_every {
        config.sample_every = every;
    }
    let trace = simulate(&instance, &config).map_err(|e| CliError::Input(e.to_string()))?;
    let sol = min_delay_equilibrium(&instance)?;
    let report = compare_to_static(&trace, &sol).map_err(|e| CliError::Input(e.to_string()))?;
    write_artifact(
        out_dir,
        "trace.csv",
        export::trace_csv(&instance, &trace).as_bytes(),
        &mut manifest,
    )?;
    write_artifact(
        out_dir,
        "summary.json",
        &export::simulation_summary_json(&instance, &trace, &report),
        &mut manifest,
    )?;
    println!(
        "steps={steps} final_max_residual={} oscillating={}",
        report.final_max_residual.decimal_string(scale),
        report.oscillating
    );
    manifest.write(out_dir)?;
    Ok(())
}

fn cmd_sweep_alpha(
    seed: u64,
    alphas_text: &str,
    demands: usize,
    fcs: usize,
    clusters: usize,
    out_dir: &Path,
    scale: u64,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("sweep-alpha", scale, Some(seed));
    let mut alphas = Vec::new();
    for part in alphas_text.split(',') {
        let alpha = Quantity::parse_decimal(part.trim(), DEFAULT_SCALE)
            .map_err(|e| CliError::Usage(format!("--alphas entry {part:?}: {e}")))?;
        if alpha.raw() < 0 || alpha.raw() > DEFAULT_SCALE as i64 {
            return Err(CliError::Usage(format!(
                "--alphas entry {part:?} outside [0,1]"
            )));
        }
        alphas.push((part.trim().to_string(), alpha));
    }
    if alphas.is_empty() {
        return Err(CliError::Usage("--alphas must list at least one value".into()));
    }

    let mut csv = String::from("alpha,total_delay,min_cost\n");
    let mut delay_points = Vec::new();
    let mut cost_points = Vec::new();
    for (label, alpha) in &alphas {
        let config = SyntheticConfig {
            seed,
            n_demands: demands,
            n_fcs: fcs,
            alpha: *alpha,
            clusters,
            ..SyntheticConfig::default()
        };
        let instance = generators::generate_synthetic_national(&config)?;
        let sol = min_delay_equilibrium(&instance)?;
        let delay_text = sol.total_delay.decimal_string(scale);
        let cost_text = sol.assignment.cost().decimal_string(scale);
        csv.push_str(&format!("{label},{delay_text},{cost_text}\n"));
        let x = alpha.raw() as f64 / DEFAULT_SCALE as f64;
        delay_points.push(chart::ChartPoint {
            x,
            y: sol.total_delay.raw() as f64 / scale as f64,
            x_label: label.clone(),
            y_label: delay_text,
        });
        cost_points.push(chart::ChartPoint {
            x,
            y: sol.assignment.cost().raw() as f64 / scale as f64,
            x_label: label.clone(),
            y_label: cost_text,
        });
    }
    let svg = chart::line_chart(
        &format!("Delay versus alpha (seed {seed})"),
        "alpha",
        "total delay",
        &[
            chart::Series {
                name: "minimum-delay equilibrium".into(),
                color: "#1f77b4".into(),
                points: delay_points,
            },
            chart::Series {
                name: "minimum assignment cost".into(),
                color: "#ff7f0e".into(),
                points: cost_points,
            },
        ],
    );
    write_artifact(out_dir, "sweep.csv", csv.as_bytes(), &mut manifest)?;
    write_artifact(out_dir, "sweep.svg", svg.as_bytes(), &mut manifest)?;
    print!("{csv}");
    manifest.write(out_dir)?;
    Ok(())
}

/// Improvement percentage (g−r)/g rendered with four decimal places via
/// integer arithmetic.
fn improvement_percent(global: Quantity, regional: Quantity) -> String {
    if global.raw() <= 0 {
        return "0".to_string();
    }
    let millionths =
        (global.raw() as i128 - regional.raw() as i128) * 1_000_000 / global.raw() as i128;
    let sign = if millionths < 0 { "-" } else { "" };
    let magnitude = millionths.unsigned_abs();
    let whole = magnitude / 10_000;
    let frac = magnitude % 10_000;
    let mut text = format!("{sign}{whole}.{frac:04}");
    while text.ends_with('0') {
        text.pop();
    }
    if text.ends_with('.') {
        text.pop();
    }
    text
}

fn cmd_compare(
    instance_path: &Path,
    regions_path: &Path,
    out_dir: &Path,
    scale: u64,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("compare", scale, None);
    let (instance, bytes) = read_instance(instance_path, scale)?;
    manifest.record_input(instance_path, &bytes);
    let region_bytes = std::fs::read(regions_path)
        .map_err(|e| CliError::Input(format!("{}: {e}", regions_path.display())))?;
    manifest.record_input(regions_path, &region_bytes);
    let reg = export::load_regionalization(&instance, &region_bytes)
        .map_err(|e| CliError::Input(e.to_string()))?;

    let global = min_delay_equilibrium(&instance)?;
    let regional = solve_regionalized(&instance, &reg)?;
    let improvement = improvement_percent(global.total_delay, regional.total_delay);
    let csv = format!(
        "global_delay,regional_delay,min_cost,improvement_percent\n{},{},{},{}\n",
        global.total_delay.decimal_string(scale),
        regional.total_delay.decimal_string(scale),
        regional.global_min_cost.decimal_string(scale),
        improvement,
    );
    write_artifact(out_dir, "comparison.csv", csv.as_bytes(), &mut manifest)?;
    println!(
        "global_delay={} regional_delay={} improvement_percent={}",
        global.total_delay.decimal_string(scale),
        regional.total_delay.decimal_string(scale),
        improvement,
    );
    manifest.write(out_dir)?;
    Ok(())
}

fn cmd_verify(instance_path: &Path, solution_path: &Path, scale: u64) -> Result<(), CliError> {
    let (instance, _) = read_instance(instance_path, scale)?;
    let bytes = std::fs::read(solution_path)
        .map_err(|e| CliError::Input(format!("{}: {e}", solution_path.display())))?;
    let sol: EquilibriumSolution = export::load_solution(&instance, &bytes)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let verdict = verify_equilibrium(&instance, &sol);
    if verdict.is_pass() {
        // A passing solution's cost also certifies the assignment optimum.
        let optimal = min_cost_assignment(&instance)
            .map(|x| x.cost().decimal_string(scale))
            .unwrap_or_else(|_| "?".into());
        println!("verification: pass (cost={optimal})");
        Ok(())
    } else {
        for violation in &verdict.violations {
            println!("violation: {violation:?}");
        }
        Err(CliError::Input(format!(
            "{} equilibrium condition(s) violated",
            verdict.violations.len()
        )))
    }
}
