//! `ips-lab`: validate instances, export achievable-set geometry, solve
//! fairness-penalty problems, detect cherry-picking, generate synthetic
//! instances, draw simplex partitions, and run the battery/search
//! experiments — with byte-deterministic CSV/JSON outputs and run manifests
//! for exact reproduction.

mod manifest;
mod output;

use clap::{Parser, Subcommand};
use ips_lab_core::cherrypick::{
    clean_optimum_battery, detect, forced_cherrypick_search, tradeoff_sweep, SearchConfig,
};
use ips_lab_core::generators::{generate, standard_battery, DensityId, GeneratorConfig, GeneratorKind};
use ips_lab_core::ips::IpsGeometry;
use ips_lab_core::json::{groups_to_problem, parse_instance, write_groups, write_instance};
use ips_lab_core::metrics::{check_first_quadrant_condition, FairnessId, MetricId};
use ips_lab_core::multilabel::{weller_limit_partition, weller_partition, LimitRatioMatrix};
use ips_lab_core::problem::GroupedProblem;
use ips_lab_core::solver::{solve_grid, FairnessProblemSpec};
use manifest::{manifest_path, sha256_hex, RunManifest};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "ips-lab",
    version,
    about = "Achievable-performance geometry and fairness-penalty experiments for grouped binary classifiers",
    long_about = None,
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
pub enum Command {
    /// Check instance invariants and print per-group base rates.
    Validate { instance: PathBuf },

    /// Export one group's frontier polylines as CSV (columns:
    /// frontier,tnr,tpr) and optionally a self-contained SVG plot.
    Ips {
        instance: PathBuf,
        #[arg(long)]
        group: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },

    /// Maximize metric_scale*L - c*U over the product of group achievable
    /// sets; write near-optimal pairs as CSV (columns: tnr0,tpr0,tnr1,tpr1,
    /// objective,fairness,frontier_dist0,frontier_dist1).
    Solve {
        instance: PathBuf,
        /// accuracy | precision | immediate_utility:<t> |
        /// saturating:<a>,<b>,<cap_tnr>,<cap_tpr>
        #[arg(long)]
        metric: String,
        /// dp | eo | er | predictive_parity
        #[arg(long)]
        fairness: String,
        /// Penalty weight on the fairness measure.
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        metric_scale: f64,
        /// Grid pitch; accepts fractions like 1/256.
        #[arg(long, default_value = "1/256")]
        h: String,
        #[arg(long, default_value_t = 1e-6)]
        opt_tol: f64,
        #[arg(long)]
        out: PathBuf,
    },

    /// Solve, then classify the near-optimal set by frontier distance;
    /// write a JSON report.
    Detect {
        instance: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        fairness: String,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        metric_scale: f64,
        #[arg(long, default_value = "1/256")]
        h: String,
        #[arg(long, default_value_t = 1e-6)]
        opt_tol: f64,
        /// Frontier-distance tolerance; defaults to 4h.
        #[arg(long)]
        cp_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Scan finite-difference partials of the squared fairness measure for
    /// first-quadrant violations; print a JSON report.
    CheckFqc {
        instance: PathBuf,
        #[arg(long)]
        fairness: String,
        #[arg(long, default_value_t = 8)]
        grid_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Build a synthetic instance (kinds: two_point, binned, adversarial,
    /// lemma) and write it as canonical JSON.
    Generate {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long, default_value_t = 0.1)]
        eps_prime: f64,
        #[arg(long, default_value_t = 8)]
        bins: usize,
        #[arg(long, default_value_t = 2)]
        coarse_bins: usize,
        /// uniform | tent | u_shape
        #[arg(long, default_value = "uniform")]
        density: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },

    /// Label a barycentric simplex grid by weighted argmax (columns:
    /// c0,...,c{n-1},labels with labels joined by '|').
    Weller {
        /// Comma-separated interior weights, e.g. 0.25,0.25,0.5.
        #[arg(long, conflicts_with = "limit_ratios")]
        omega: Option<String>,
        /// JSON file {"entries": [[...], ...]} with numbers or "inf".
        #[arg(long)]
        limit_ratios: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },

    /// Battery and search experiments.
    Experiment {
        #[command(subcommand)]
        experiment: Experiment,
    },

    /// Trade-off curve across penalty weights (columns: c,best_value,
    /// best_metric,fairness_at_opt,exists_clean).
    Sweep {
        instance: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        fairness: String,
        /// Range start:end:step or a comma-separated list.
        #[arg(long)]
        c: String,
        #[arg(long, default_value = "1/256")]
        h: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },

    /// Re-execute a recorded run; outputs are byte-identical to the
    /// original (SVG included at path level only).
    Rerun {
        manifest: PathBuf,
        /// Redirect every output into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
pub enum Experiment {
    /// For every (instance, metric, c, fairness in {dp,eo,er}) cell, check
    /// that a clean (frontier-only) near-optimum exists (columns: instance,
    /// metric,c,fairness,exists_clean,grid_best,frontier_best,slack,
    /// minmax_frontier_dist).
    Theorem6 {
        #[arg(long)]
        battery: PathBuf,
        #[arg(long, default_value = "1/256")]
        h: String,
        /// Defaults to 4h.
        #[arg(long)]
        cp_tol: Option<f64>,
        /// Semicolon-separated metric list.
        #[arg(long, default_value = "accuracy;immediate_utility:0.3;precision")]
        metrics: String,
        /// Comma-separated penalty weights.
        #[arg(long, default_value = "0.5,2,8")]
        cs: String,
        #[arg(long)]
        out: PathBuf,
    },

    /// Sweep adversarial instances, multipliers, and saturating caps under
    /// predictive parity for a cell whose near-optimal set cherry-picks
    /// entirely; write the finding (or the full log) as JSON.
    Theorem8 {
        /// Optional JSON config; defaults to the standard sweep.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },

    /// Write the standard 20-instance battery file.
    MakeBattery {
        #[arg(long)]
        out: PathBuf,
    },
}

// ---------------------------------------------------------------------------
// Error plumbing: exit 2 for input problems, 1 for internal failures.
// ---------------------------------------------------------------------------

pub struct CliError {
    code: u8,
    message: String,
}

type CliResult<T> = Result<T, CliError>;

impl From<ips_lab_core::Error> for CliError {
    fn from(e: ips_lab_core::Error) -> Self {
        CliError {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError {
        code: 1,
        message: format!("writing {}: {e}", path.display()),
    })
}

fn load_instance(path: &Path) -> CliResult<GroupedProblem<f64>> {
    Ok(parse_instance(&read_file(path)?)?)
}

// ---------------------------------------------------------------------------
// Small parsers
// ---------------------------------------------------------------------------

fn parse_pitch(text: &str) -> CliResult<f64> {
    let value = if let Some((num, den)) = text.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| input_error(format!("bad pitch `{text}`")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| input_error(format!("bad pitch `{text}`")))?;
        n / d
    } else {
        text.trim()
            .parse()
            .map_err(|_| input_error(format!("bad pitch `{text}`")))?
    };
    Ok(value)
}

fn parse_metric(text: &str) -> CliResult<MetricId<f64>> {
    Ok(text.parse::<MetricId<f64>>()?)
}

fn parse_fairness(text: &str) -> CliResult<FairnessId> {
    Ok(text.parse::<FairnessId>()?)
}

fn parse_f64_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| input_error(format!("bad number `{part}`")))
        })
        .collect()
}

/// `start:end:step` inclusive of the endpoint (within a half-step), or a
/// comma list.
fn parse_c_values(text: &str) -> CliResult<Vec<f64>> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(input_error(format!("bad range `{text}`, want start:end:step")));
        }
        let start: f64 = parts[0].parse().map_err(|_| input_error("bad range start"))?;
        let end: f64 = parts[1].parse().map_err(|_| input_error("bad range end"))?;
        let step: f64 = parts[2].parse().map_err(|_| input_error("bad range step"))?;
        if step <= 0.0 || end < start {
            return Err(input_error("range must ascend with positive step"));
        }
        let mut values = Vec::new();
        let mut k = 0usize;
        loop {
            let v = start + step * k as f64;
            if v > end + step * 1e-9 {
                break;
            }
            values.push(v);
            k += 1;
        }
        Ok(values)
    } else {
        parse_f64_list(text)
    }
}

fn parse_density(text: &str) -> CliResult<DensityId> {
    match text {
        "uniform" => Ok(DensityId::Uniform),
        "tent" => Ok(DensityId::Tent),
        "u_shape" => Ok(DensityId::UShape),
        _ => Err(input_error(format!("unknown density `{text}`"))),
    }
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("IPS_LAB_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Run a command; when it writes files, drop a manifest next to the primary
/// output.
fn execute(command: Command) -> CliResult<()> {
    let started = Instant::now();
    let hash = input_hash(&command)?;
    let outputs = dispatch(&command)?;
    if let Some(primary) = outputs.first() {
        let m = RunManifest::new(command, hash, started.elapsed().as_millis(), outputs.clone());
        let text = serde_json::to_string_pretty(&m).map_err(|e| CliError {
            code: 1,
            message: e.to_string(),
        })?;
        write_file(&manifest_path(primary), &format!("{text}\n"))?;
    }
    Ok(())
}

fn input_hash(command: &Command) -> CliResult<String> {
    let input: Option<&PathBuf> = match command {
        Command::Validate { instance }
        | Command::Ips { instance, .. }
        | Command::Solve { instance, .. }
        | Command::Detect { instance, .. }
        | Command::CheckFqc { instance, .. }
        | Command::Sweep { instance, .. } => Some(instance),
        Command::Experiment { experiment } => match experiment {
            Experiment::Theorem6 { battery, .. } => Some(battery),
            Experiment::Theorem8 { config: Some(config), .. } => Some(config),
            _ => None,
        },
        _ => None,
    };
    match input {
        Some(path) => {
            let bytes =
                fs::read(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            Ok(sha256_hex(&bytes))
        }
        None => {
            let encoded = serde_json::to_vec(command).map_err(|e| CliError {
                code: 1,
                message: e.to_string(),
            })?;
            Ok(sha256_hex(&encoded))
        }
    }
}

fn dispatch(command: &Command) -> CliResult<Vec<PathBuf>> {
    match command {
        Command::Validate { instance } => {
            let problem = load_instance(instance)?;
            for (id, group) in problem.groups() {
                let (p0, p1) = group.dist.base_rates();
                let flag = if group.dist.has_boundary_scores() {
                    " [boundary scores]"
                } else {
                    ""
                };
                println!(
                    "group {id}: prior={} p0={p0} p1={p1} atoms={}{flag}",
                    group.prior,
                    group.dist.len()
                );
            }
            println!("ok");
            Ok(vec![])
        }

        Command::Ips { instance, group, out, svg } => {
            let problem = load_instance(instance)?;
            let member = problem
                .group(group)
                .ok_or_else(|| input_error(format!("unknown group `{group}`")))?;
            let ips = IpsGeometry::from_distribution(&member.dist);
            write_file(out, &output::frontier_csv(&ips))?;
            let mut outputs = vec![out.clone()];
            if let Some(svg_path) = svg {
                write_file(svg_path, &output::frontier_svg(&ips))?;
                outputs.push(svg_path.clone());
            }
            Ok(outputs)
        }

        Command::Solve { instance, metric, fairness, c, metric_scale, h, opt_tol, out } => {
            let problem = load_instance(instance)?;
            let spec = FairnessProblemSpec::new(parse_metric(metric)?, parse_fairness(fairness)?, *c)?
                .with_metric_scale(*metric_scale);
            let pitch = parse_pitch(h)?;
            let result = solve_grid(&problem, &spec, pitch, *opt_tol)?;
            write_file(out, &output::optima_csv(&result))?;
            println!(
                "best_value={} optima={} (listed {}) minmax_frontier_dist={}",
                result.best_value,
                result.total_optima,
                result.optima.len(),
                result.minmax_frontier_dist
            );
            Ok(vec![out.clone()])
        }

        Command::Detect {
            instance,
            metric,
            fairness,
            c,
            metric_scale,
            h,
            opt_tol,
            cp_tol,
            out,
        } => {
            let problem = load_instance(instance)?;
            let spec = FairnessProblemSpec::new(parse_metric(metric)?, parse_fairness(fairness)?, *c)?
                .with_metric_scale(*metric_scale);
            let pitch = parse_pitch(h)?;
            let result = solve_grid(&problem, &spec, pitch, *opt_tol)?;
            let tol = cp_tol.unwrap_or(4.0 * pitch);
            let report = detect(&problem, &result, tol)?;
            let text = output::detect_json(&result, &report);
            match out {
                Some(path) => {
                    write_file(path, &text)?;
                    println!(
                        "exists_clean={} all_cherry_pick={}",
                        report.exists_clean, report.all_cherry_pick
                    );
                    Ok(vec![path.clone()])
                }
                None => {
                    print!("{text}");
                    Ok(vec![])
                }
            }
        }

        Command::CheckFqc { instance, fairness, grid_n, out } => {
            let problem = load_instance(instance)?;
            let report = check_first_quadrant_condition(parse_fairness(fairness)?, &problem, *grid_n)?;
            let text = output::fqc_json(&report);
            match out {
                Some(path) => {
                    write_file(path, &text)?;
                    println!("passes={}", report.passes);
                    Ok(vec![path.clone()])
                }
                None => {
                    print!("{text}");
                    Ok(vec![])
                }
            }
        }

        Command::Generate {
            kind,
            gamma,
            eps_prime,
            bins,
            coarse_bins,
            density,
            seed,
            out,
        } => {
            let density = parse_density(density)?;
            let base = GeneratorKind::BinnedDensity { bins: *bins, density };
            let generator_kind = match kind.as_str() {
                "two_point" => GeneratorKind::TwoPoint,
                "binned" => base,
                "adversarial" => GeneratorKind::AdversarialPair {
                    base: Box::new(base),
                    coarse_bins: *coarse_bins,
                    gamma: *gamma,
                    eps_prime: *eps_prime,
                },
                "lemma" => GeneratorKind::LemmaPartition {
                    base: Box::new(base),
                    coarse_bins: *coarse_bins,
                    eps_prime: *eps_prime,
                },
                other => return Err(input_error(format!("unknown kind `{other}`"))),
            };
            let config = GeneratorConfig {
                kind: generator_kind,
                seed: *seed,
            };
            let problem = generate(&config)?;
            write_file(out, &write_instance(&problem))?;
            for (id, group) in problem.groups() {
                let (p0, p1) = group.dist.base_rates();
                println!("group {id}: prior={} p0={p0} p1={p1}", group.prior);
            }
            Ok(vec![out.clone()])
        }

        Command::Weller { omega, limit_ratios, grid, out, svg } => {
            let labeling = match (omega, limit_ratios) {
                (Some(weights), None) => {
                    let w = parse_f64_list(weights)?;
                    weller_partition(&w, *grid)?
                }
                (None, Some(path)) => {
                    let matrix = parse_ratio_file(&read_file(path)?)?;
                    weller_limit_partition(&matrix, *grid)?
                }
                _ => {
                    return Err(input_error(
                        "pass exactly one of --omega or --limit-ratios",
                    ))
                }
            };
            println!(
                "cells={} empty={} grid={}",
                labeling.cells.len(),
                labeling.empty_cells,
                labeling.grid
            );
            let mut outputs = Vec::new();
            if let Some(path) = out {
                write_file(path, &output::labeling_csv(&labeling))?;
                outputs.push(path.clone());
            }
            if let Some(path) = svg {
                let drawing = output::ternary_svg(&labeling)
                    .ok_or_else(|| input_error("SVG output needs a three-label simplex"))?;
                write_file(path, &drawing)?;
                outputs.push(path.clone());
            }
            Ok(outputs)
        }

        Command::Experiment { experiment } => run_experiment(experiment),

        Command::Sweep { instance, metric, fairness, c, h, out, svg } => {
            let problem = load_instance(instance)?;
            let cs = parse_c_values(c)?;
            let pitch = parse_pitch(h)?;
            let curve = tradeoff_sweep(
                &problem,
                parse_metric(metric)?,
                parse_fairness(fairness)?,
                &cs,
                pitch,
            )?;
            write_file(out, &output::tradeoff_csv(&curve))?;
            let mut outputs = vec![out.clone()];
            if let Some(path) = svg {
                write_file(path, &output::tradeoff_svg(&curve))?;
                outputs.push(path.clone());
            }
            Ok(outputs)
        }

        Command::Rerun { manifest, out_dir } => {
            let recorded: RunManifest = serde_json::from_str(&read_file(manifest)?)
                .map_err(|e| input_error(format!("bad manifest: {e}")))?;
            let mut inner = recorded.command;
            if let Some(dir) = out_dir {
                fs::create_dir_all(dir).map_err(|e| CliError {
                    code: 1,
                    message: format!("creating {}: {e}", dir.display()),
                })?;
                remap_outputs(&mut inner, dir);
            }
            execute(inner)?;
            Ok(vec![])
        }
    }
}

fn run_experiment(experiment: &Experiment) -> CliResult<Vec<PathBuf>> {
    match experiment {
        Experiment::Theorem6 { battery, h, cp_tol, metrics, cs, out } => {
            let battery = load_battery(battery)?;
            let metric_ids: Vec<MetricId<f64>> = metrics
                .split(';')
                .map(|m| parse_metric(m.trim()))
                .collect::<CliResult<_>>()?;
            let c_values = parse_f64_list(cs)?;
            let pitch = parse_pitch(h)?;
            let tol = cp_tol.unwrap_or(4.0 * pitch);
            let summary = clean_optimum_battery(&battery, &metric_ids, &c_values, pitch, tol)?;
            write_file(out, &output::battery_csv(&summary))?;
            let dirty = summary.cells.iter().filter(|c| !c.exists_clean).count();
            println!(
                "cells={} all_clean={} dirty={}",
                summary.cells.len(),
                summary.all_clean,
                dirty
            );
            Ok(vec![out.clone()])
        }

        Experiment::Theorem8 { config, out } => {
            let search_config = match config {
                Some(path) => parse_search_config(&read_file(path)?)?,
                None => SearchConfig::standard(),
            };
            let outcome = forced_cherrypick_search(&search_config)?;
            write_file(out, &output::search_json(&outcome))?;
            match &outcome.finding {
                Some(f) => println!(
                    "found: gamma={} eps_prime={} c={} caps=({}, {}) minmax={}",
                    f.gamma,
                    f.eps_prime,
                    f.c,
                    f.cap_tnr,
                    f.cap_tpr,
                    f.check.grid.minmax_frontier_dist
                ),
                None => println!("none found in {} cells", outcome.cells_scanned),
            }
            Ok(vec![out.clone()])
        }

        Experiment::MakeBattery { out } => {
            let battery = standard_battery::<f64>();
            let mut text = String::from("{\n  \"instances\": [\n");
            for (k, (name, problem)) in battery.iter().enumerate() {
                text.push_str(&format!(
                    "    {{\"name\": \"{}\", \"groups\": {}}}",
                    ips_lab_core::json::escape(name),
                    write_groups(problem, 4)
                ));
                text.push_str(if k + 1 < battery.len() { ",\n" } else { "\n" });
            }
            text.push_str("  ]\n}\n");
            write_file(out, &text)?;
            println!("instances={}", battery.len());
            Ok(vec![out.clone()])
        }
    }
}

#[derive(Deserialize)]
struct BatteryFile {
    instances: Vec<BatteryEntry>,
}

#[derive(Deserialize)]
struct BatteryEntry {
    name: String,
    groups: serde_json::Value,
}

fn load_battery(path: &Path) -> CliResult<Vec<(String, GroupedProblem<f64>)>> {
    let file: BatteryFile = serde_json::from_str(&read_file(path)?)
        .map_err(|e| input_error(format!("bad battery file: {e}")))?;
    file.instances
        .into_iter()
        .map(|entry| Ok((entry.name, groups_to_problem(&entry.groups)?)))
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchConfigFile {
    base_bins: Option<usize>,
    density: Option<String>,
    coarse_bins: Option<usize>,
    gammas: Option<Vec<f64>>,
    eps_primes: Option<Vec<f64>>,
    cs: Option<Vec<f64>>,
    caps_grid: Option<usize>,
    h: Option<String>,
    cp_tol: Option<f64>,
    min_distance: Option<f64>,
    oracle_floor: Option<f64>,
}

fn parse_search_config(text: &str) -> CliResult<SearchConfig<f64>> {
    let file: SearchConfigFile =
        serde_json::from_str(text).map_err(|e| input_error(format!("bad config: {e}")))?;
    let mut config = SearchConfig::standard();
    if let Some(v) = file.base_bins {
        config.base_bins = v;
    }
    if let Some(v) = file.density {
        config.density = parse_density(&v)?;
    }
    if let Some(v) = file.coarse_bins {
        config.coarse_bins = v;
    }
    if let Some(v) = file.gammas {
        config.gammas = v;
    }
    if let Some(v) = file.eps_primes {
        config.eps_primes = v;
    }
    if let Some(v) = file.cs {
        config.cs = v;
    }
    if let Some(v) = file.caps_grid {
        config.caps_grid = v;
    }
    if let Some(v) = file.h {
        let pitch = parse_pitch(&v)?;
        config.h = pitch;
        if file.cp_tol.is_none() {
            config.cp_tol = 4.0 * pitch;
        }
    }
    if let Some(v) = file.cp_tol {
        config.cp_tol = v;
    }
    if let Some(v) = file.min_distance {
        config.min_distance = v;
    }
    if let Some(v) = file.oracle_floor {
        config.oracle_floor = v;
    }
    Ok(config)
}

/// Parse a limit-ratio matrix file: rows of numbers, with "inf" (or "0")
/// marking diverging pairs.
fn parse_ratio_file(text: &str) -> CliResult<LimitRatioMatrix<f64>> {
    #[derive(Deserialize)]
    struct RatioFile {
        entries: Vec<Vec<serde_json::Value>>,
    }
    let file: RatioFile =
        serde_json::from_str(text).map_err(|e| input_error(format!("bad ratio file: {e}")))?;
    let n = file.entries.len();
    let mut flat = Vec::with_capacity(n * n);
    for row in &file.entries {
        if row.len() != n {
            return Err(input_error("ratio matrix must be square"));
        }
        for cell in row {
            let value = match cell {
                serde_json::Value::Number(num) => num
                    .as_f64()
                    .ok_or_else(|| input_error("bad ratio number"))?,
                serde_json::Value::String(s) if s == "inf" => f64::INFINITY,
                _ => return Err(input_error("ratio entries are numbers or \"inf\"")),
            };
            flat.push(value);
        }
    }
    Ok(LimitRatioMatrix::new(n, flat)?)
}

/// Move every output path of a recorded command into `dir`.
fn remap_outputs(command: &mut Command, dir: &Path) {
    let relocate = |path: &mut PathBuf| {
        if let Some(name) = path.file_name() {
            *path = dir.join(name);
        }
    };
    match command {
        Command::Validate { .. } => {}
        Command::Ips { out, svg, .. } => {
            relocate(out);
            if let Some(p) = svg {
                relocate(p);
            }
        }
        Command::Solve { out, .. } => relocate(out),
        Command::Detect { out, .. } | Command::CheckFqc { out, .. } => {
            if let Some(p) = out {
                relocate(p);
            }
        }
        Command::Generate { out, .. } => relocate(out),
        Command::Weller { out, svg, .. } => {
            if let Some(p) = out {
                relocate(p);
            }
            if let Some(p) = svg {
                relocate(p);
            }
        }
        Command::Experiment { experiment } => match experiment {
            Experiment::Theorem6 { out, .. }
            | Experiment::Theorem8 { out, .. }
            | Experiment::MakeBattery { out } => relocate(out),
        },
        Command::Sweep { out, svg, .. } => {
            relocate(out);
            if let Some(p) = svg {
                relocate(p);
            }
        }
        Command::Rerun { .. } => {}
    }
}
