//! `mmot`: relaxed multi-marginal transport from the command line.
//!
//! Subcommands: `cost` (primal + dual solve with the duality gap), `stratify`
//! (interaction-layer decomposition), `potential` (grid iteration for a
//! Lipschitz dual potential), and `quantize` (minimal minimizer mass under an
//! external potential, optionally swept over a charge parameter).
//!
//! Exit codes: 0 ok, 1 input error, 2 certificate failure, 3 numerical
//! failure. All numeric JSON output carries 17 significant digits so runs can
//! be diffed and cross-checked exactly; outputs are deterministic except for
//! the `timestamp` field.

mod output;

use clap::{Args, Parser, Subcommand};
use mmot_core::cost::Kernel;
use mmot_core::dual::{dual_lp_with, DualSolve};
use mmot_core::lp::SimplexConfig;
use mmot_core::measures::{DiscreteMeasure, Point};
use mmot_core::potential::{
    default_initial_potential, iterate_potential, GridFunction, GridSpec, IterationOptions,
};
use mmot_core::primal::{relaxed_cost_with, stratify_with, SolvedCost};
use mmot_core::quantize::{quantization_report, QuantizationReport, SweepPoint};
use output::{to_json_string, value_or_inf};
use serde::Deserialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Duality gap beyond which `cost` reports a certificate failure.
const DUALITY_GAP_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "mmot", version, about = "relaxed multi-marginal optimal transport solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the relaxed cost by primal and dual programs and report both.
    Cost(CostArgs),
    /// Decompose an optimal plan into interaction layers.
    Stratify(CostArgs),
    /// Build a Lipschitz dual potential on a grid by the averaged
    /// regularization iteration.
    Potential(PotentialArgs),
    /// Quantization report or charge sweep for an external potential.
    Quantize(QuantizeArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Optional JSON config file with defaults; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Interaction kernel tag.
    #[arg(long)]
    kernel: Option<String>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Feasibility tolerance of the LP solver.
    #[arg(long)]
    lp_tol: Option<f64>,
    /// Verbose logging.
    #[arg(short, long, default_value_t = false)]
    verbose: bool,
}

#[derive(Args)]
struct CostArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Measure JSON: {"dim": d, "atoms": [[x...]...], "weights": [...]}.
    #[arg(long)]
    measure: PathBuf,
    /// Number of marginals (at least 2).
    #[arg(long = "N")]
    n: Option<usize>,
    /// Dump the primal and dual programs in plain text to this path.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
}

#[derive(Args)]
struct PotentialArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    measure: PathBuf,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Grid "lo1,hi1[,lo2,hi2...];res[,res...]", e.g. "-2,2;129".
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Initial potential: "lp" (default), "zero", or a grid-function JSON.
    #[arg(long)]
    phi0: Option<String>,
    /// Stop when the excess gap falls below this.
    #[arg(long)]
    iter_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Args)]
struct QuantizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Potential JSON: grid form {"box","shape","values"} or support form
    /// {"dim","points","values"}.
    #[arg(long)]
    potential: PathBuf,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Charge sweep "start:stop:steps"; when present the output is the sweep.
    #[arg(long)]
    z_grid: Option<String>,
    /// Ladder tie resolution.
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Output format for sweeps.
    #[arg(long)]
    format: Option<String>,
}

/// Optional config-file defaults; any explicit flag overrides these.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "N")]
    n: Option<usize>,
    kernel: Option<String>,
    lp_tol: Option<f64>,
    gap_tol: Option<f64>,
    iter_tol: Option<f64>,
    max_iters: Option<usize>,
    grid: Option<String>,
    z_grid: Option<String>,
    format: Option<String>,
    workers: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Certificate(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Certificate(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Certificate(m) | CliError::Numerical(m) => m,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = match &cli.command {
        Command::Cost(a) | Command::Stratify(a) => a.common.verbose,
        Command::Potential(a) => a.common.verbose,
        Command::Quantize(a) => a.common.verbose,
    };
    let default_level = if verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level))
        .init();
    let result = match cli.command {
        Command::Cost(args) => run_cost(args),
        Command::Stratify(args) => run_stratify(args),
        Command::Potential(args) => run_potential(args),
        Command::Quantize(args) => run_quantize(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<FileConfig, CliError> {
    match &common.config {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| input_err(format!("config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| input_err(format!("config {}: {e}", path.display())))
        }
    }
}

fn simplex_config(lp_tol: Option<f64>) -> Result<SimplexConfig, CliError> {
    let mut cfg = SimplexConfig::default();
    if let Some(tol) = lp_tol {
        if !(tol > 0.0) {
            return Err(input_err("lp tolerance must be positive"));
        }
        cfg.feas_tol = tol;
        cfg.pivot_tol = tol / 10.0;
    }
    Ok(cfg)
}

fn load_measure(path: &Path) -> Result<DiscreteMeasure, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_err(format!("measure {}: {e}", path.display())))?;
    DiscreteMeasure::from_json_str(&text)
        .map_err(|e| input_err(format!("measure {}: {e}", path.display())))
}

fn kernel_from(tag: Option<&str>) -> Result<Kernel, CliError> {
    let kernel = Kernel::from_tag(tag.unwrap_or("coulomb")).map_err(input_err)?;
    kernel.check_decay().map_err(input_err)?;
    Ok(kernel)
}

fn require_marginals(n: Option<usize>) -> Result<usize, CliError> {
    match n {
        Some(n) if n >= 2 => Ok(n),
        Some(n) => Err(input_err(format!("N must be at least 2, got {n}"))),
        None => Err(input_err("missing --N")),
    }
}

fn write_output(common: &CommonArgs, text: &str) -> Result<(), CliError> {
    match &common.out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| input_err(format!("writing {}: {e}", path.display()))),
    }
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn solve_both(
    rho: &DiscreteMeasure,
    n: usize,
    kernel: &Kernel,
    cfg: &SimplexConfig,
) -> Result<(SolvedCost, DualSolve), CliError> {
    let primal = relaxed_cost_with(rho, n, kernel, cfg)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let dual = dual_lp_with(rho, n, kernel, cfg)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok((primal, dual))
}

fn run_cost(args: CostArgs) -> Result<(), CliError> {
    let file = load_config(&args.common)?;
    let n = require_marginals(args.n.or(file.n))?;
    let kernel = kernel_from(args.common.kernel.as_deref().or(file.kernel.as_deref()))?;
    let cfg = simplex_config(args.common.lp_tol.or(file.lp_tol))?;
    let rho = load_measure(&args.measure)?;

    if let Some(dump) = &args.dump_lp {
        let primal_lp = mmot_core::primal::relaxed_program(&rho, n, &kernel)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let dual_lp_stmt = mmot_core::dual::dual_program(&rho, n, &kernel)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let text = format!("# primal\n{}\n# dual\n{}", primal_lp.dump(), dual_lp_stmt.dump());
        std::fs::write(dump, text).map_err(|e| input_err(format!("writing dump: {e}")))?;
    }

    let (primal, dual) = solve_both(&rho, n, &kernel, &cfg)?;
    let gap = match (primal.value.finite(), dual.value.finite()) {
        (Some(p), Some(d)) => Some((p - d).abs()),
        (None, None) => None,
        _ => {
            return Err(CliError::Certificate(
                "primal and dual disagree on finiteness".to_string(),
            ))
        }
    };

    let report = json!({
        "command": "cost",
        "timestamp": timestamp(),
        "n": n,
        "kernel": kernel.tag(),
        "total_mass": rho.total_mass(),
        "primal_value": value_or_inf(primal.value),
        "dual_value": value_or_inf(dual.value),
        "gap": gap,
        "reason": if primal.value.is_finite() { serde_json::Value::Null }
                  else { json!("marginal system infeasible after excluding infinite-cost tuples") },
        "plan": primal.plan.as_ref().map(|p| p.to_json_value()),
        "potential": dual.potential.as_ref().map(|u| u.to_json_value()),
    });
    write_output(&args.common, &to_json_string(&report))?;

    if let Some(g) = gap {
        if g > DUALITY_GAP_TOL {
            return Err(CliError::Certificate(format!("duality gap {g} above {DUALITY_GAP_TOL}")));
        }
    }
    Ok(())
}

fn run_stratify(args: CostArgs) -> Result<(), CliError> {
    let file = load_config(&args.common)?;
    let n = require_marginals(args.n.or(file.n))?;
    let kernel = kernel_from(args.common.kernel.as_deref().or(file.kernel.as_deref()))?;
    let cfg = simplex_config(args.common.lp_tol.or(file.lp_tol))?;
    let rho = load_measure(&args.measure)?;

    let primal = relaxed_cost_with(&rho, n, &kernel, &cfg)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let plan = match (&primal.value.finite(), primal.plan) {
        (Some(_), Some(plan)) => plan,
        _ => {
            return Err(CliError::Input(
                "the relaxed cost is infinite; nothing to stratify".to_string(),
            ))
        }
    };
    let decomposition = stratify_with(&rho, &plan, &kernel, &cfg)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    // Cross-examine the decomposition against an optimal dual potential.
    let dual = dual_lp_with(&rho, n, &kernel, &cfg)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let optimality = match &dual.potential {
        Some(u) => Some(
            mmot_core::dual::check_optimality(&rho, &decomposition, u, n, &kernel)
                .map_err(|e| CliError::Numerical(e.to_string()))?,
        ),
        None => None,
    };

    let report = json!({
        "command": "stratify",
        "timestamp": timestamp(),
        "n": n,
        "kernel": kernel.tag(),
        "primal_value": primal.value.finite(),
        "decomposition": decomposition.to_json_value(),
        "optimality": optimality.as_ref().map(|r| r.to_json_value()),
    });
    write_output(&args.common, &to_json_string(&report))?;
    if !decomposition.certified {
        return Err(CliError::Certificate("decomposition identities failed".to_string()));
    }
    if let Some(report) = optimality {
        if !report.pass && !report.below_threshold {
            return Err(CliError::Certificate(
                "primal-dual optimality conditions failed".to_string(),
            ));
        }
    }
    Ok(())
}

fn parse_grid(spec: &str) -> Result<GridSpec, CliError> {
    let (coords, res) = spec
        .split_once(';')
        .ok_or_else(|| input_err(format!("grid {spec:?}: expected \"lo,hi,...;res\"")))?;
    let coords: Vec<f64> = coords
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| input_err(format!("grid bounds: {e}")))?;
    if coords.is_empty() || coords.len() % 2 != 0 {
        return Err(input_err("grid bounds need an even number of entries"));
    }
    let dim = coords.len() / 2;
    let res: Vec<usize> = res
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| input_err(format!("grid resolution: {e}")))?;
    let shape = if res.len() == 1 { vec![res[0]; dim] } else { res };
    if shape.iter().any(|&r| r < 2) {
        return Err(input_err("grid resolution must be at least 2 per axis"));
    }
    let bounds = coords.chunks(2).map(|c| (c[0], c[1])).collect();
    GridSpec::new(bounds, shape).map_err(input_err)
}

fn run_potential(args: PotentialArgs) -> Result<(), CliError> {
    let file = load_config(&args.common)?;
    let n = require_marginals(args.n.or(file.n))?;
    let kernel = kernel_from(args.common.kernel.as_deref().or(file.kernel.as_deref()))?;
    let rho = load_measure(&args.measure)?;
    let grid_spec = args
        .grid
        .as_deref()
        .or(file.grid.as_deref())
        .ok_or_else(|| input_err("missing --grid"))?;
    let grid = parse_grid(grid_spec)?;
    let mut opts = IterationOptions::default();
    if let Some(tol) = args.iter_tol.or(file.iter_tol) {
        if !(tol > 0.0) {
            return Err(input_err("iteration tolerance must be positive"));
        }
        opts.tol = tol;
    }
    if let Some(m) = args.max_iters.or(file.max_iters) {
        opts.max_iters = m;
    }

    let (phi0, bound_r) = match args.phi0.as_deref() {
        None | Some("lp") => {
            let (gf, r) = default_initial_potential(&rho, &grid, n, &kernel).map_err(input_err)?;
            (gf, r)
        }
        Some("zero") => (GridFunction::constant(grid.clone(), 0.0), 0.0),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| input_err(format!("phi0 {path}: {e}")))?;
            let gf = GridFunction::from_json_str(&text)
                .map_err(|e| input_err(format!("phi0 {path}: {e}")))?;
            if gf.grid != grid {
                return Err(input_err("phi0 grid does not match --grid"));
            }
            let r = gf.max_value().max(0.0);
            (gf, r)
        }
    };

    let run = iterate_potential(&rho, &phi0, n, &kernel, &opts).map_err(input_err)?;

    let trace_path = match &args.common.out {
        Some(path) => {
            let mut p = path.clone();
            p.set_extension("trace.csv");
            p
        }
        None => PathBuf::from("mmot-trace.csv"),
    };
    std::fs::write(&trace_path, run.trace_csv())
        .map_err(|e| input_err(format!("writing {}: {e}", trace_path.display())))?;

    let last = run.steps.last().unwrap();
    // Discrete constant from neighbor differences; the continuum bound for
    // potentials starting below bound_r is reported alongside, with the grid
    // spacing as the resolution caveat.
    let report = json!({
        "command": "potential",
        "timestamp": timestamp(),
        "n": n,
        "kernel": kernel.tag(),
        "converged": run.converged,
        "iterations": run.steps.len() - 1,
        "objective": last.objective,
        "gap": last.gap,
        "discrete_lipschitz": run.potential.discrete_lipschitz(),
        "lipschitz_bound": mmot_core::potential::lipschitz_bound(n as f64 * bound_r, n),
        "grid_spacing": grid.max_spacing(),
        "trace": trace_path.display().to_string(),
        "potential": run.potential.to_json_value(),
    });
    write_output(&args.common, &to_json_string(&report))?;
    if !run.converged {
        return Err(CliError::Numerical(format!(
            "gap {} still above {} after {} iterations",
            last.gap,
            opts.tol,
            run.steps.len() - 1
        )));
    }
    Ok(())
}

/// Potential input: either a grid function or plain support values.
fn load_potential(path: &Path) -> Result<(Vec<Point>, Vec<f64>, Option<GridFunction>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_err(format!("potential {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| input_err(format!("potential JSON: {e}")))?;
    if value.get("box").is_some() {
        let gf = GridFunction::from_json_str(&text)
            .map_err(|e| input_err(format!("potential {}: {e}", path.display())))?;
        Ok((gf.grid.points(), gf.values.clone(), Some(gf)))
    } else {
        #[derive(Deserialize)]
        struct SupportDto {
            dim: usize,
            points: Vec<Vec<f64>>,
            values: Vec<f64>,
        }
        let dto: SupportDto =
            serde_json::from_str(&text).map_err(|e| input_err(format!("potential JSON: {e}")))?;
        if dto.points.len() != dto.values.len() {
            return Err(input_err("points and values have different lengths"));
        }
        for (i, p) in dto.points.iter().enumerate() {
            if p.len() != dto.dim {
                return Err(input_err(format!("points[{i}] has {} coordinates, expected {}", p.len(), dto.dim)));
            }
        }
        let points = dto.points.into_iter().map(Point::Coords).collect();
        Ok((points, dto.values, None))
    }
}

fn parse_z_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(input_err(format!("z grid {spec:?}: expected \"start:stop:steps\"")));
    }
    let start: f64 = parts[0].trim().parse().map_err(|e| input_err(format!("z start: {e}")))?;
    let stop: f64 = parts[1].trim().parse().map_err(|e| input_err(format!("z stop: {e}")))?;
    let steps: usize = parts[2].trim().parse().map_err(|e| input_err(format!("z steps: {e}")))?;
    if steps < 2 || !(stop > start) || start < 0.0 {
        return Err(input_err("z grid needs 0 ≤ start < stop and at least 2 steps"));
    }
    Ok((0..steps)
        .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn run_quantize(args: QuantizeArgs) -> Result<(), CliError> {
    let file = load_config(&args.common)?;
    let n = require_marginals(args.n.or(file.n))?;
    let kernel = kernel_from(args.common.kernel.as_deref().or(file.kernel.as_deref()))?;
    let gap_tol = args
        .gap_tol
        .or(file.gap_tol)
        .unwrap_or(mmot_core::quantize::DEFAULT_GAP_TOL);
    if !(gap_tol > 0.0) {
        return Err(input_err("gap tolerance must be positive"));
    }
    let (points, values, grid) = load_potential(&args.potential)?;

    match args.z_grid.as_deref().or(file.z_grid.as_deref()) {
        None => {
            let mut report = quantization_report(&points, &values, n, &kernel, gap_tol)
                .map_err(|e| match e {
                    mmot_core::quantize::QuantizeError::WitnessMismatch { .. } => {
                        CliError::Certificate(e.to_string())
                    }
                    other => CliError::Input(other.to_string()),
                })?;
            if let Some(gf) = &grid {
                let r_max = (0..gf.grid.len())
                    .map(|i| gf.grid.node(i).iter().map(|x| x * x).sum::<f64>().sqrt())
                    .fold(0.0f64, f64::max);
                let radii: Vec<f64> = [0.85, 0.9, 0.95, 1.0].iter().map(|f| f * r_max).collect();
                report.beta = Some(mmot_core::quantize::beta_estimate(gf, &radii));
            }
            let out = json!({
                "command": "quantize",
                "timestamp": timestamp(),
                "kernel": kernel.tag(),
                "report": report.to_json_value(),
            });
            write_output(&args.common, &to_json_string(&out))
        }
        Some(spec) => {
            let z_grid = parse_z_grid(spec)?;
            let workers = args
                .workers
                .or(file.workers)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
            let sweep = parallel_sweep(&points, &values, n, &kernel, &z_grid, gap_tol, workers)?;
            let format = args.format.as_deref().or(file.format.as_deref()).unwrap_or("csv");
            match format {
                "csv" => {
                    let mut text = String::from("z,k_n,mass,min_value\n");
                    for p in &sweep {
                        text.push_str(&format!(
                            "{:.16e},{},{:.16e},{:.16e}\n",
                            p.z,
                            p.k_n,
                            *p.mass.numer() as f64 / *p.mass.denom() as f64,
                            p.min_value
                        ));
                    }
                    write_output(&args.common, &text)
                }
                "json" => {
                    let rows: Vec<serde_json::Value> = sweep
                        .iter()
                        .map(|p| {
                            json!({
                                "z": p.z,
                                "k_n": p.k_n,
                                "mass": { "num": *p.mass.numer(), "den": *p.mass.denom() },
                                "min_value": p.min_value,
                            })
                        })
                        .collect();
                    let out = json!({
                        "command": "quantize-sweep",
                        "timestamp": timestamp(),
                        "kernel": kernel.tag(),
                        "n": n,
                        "points": rows,
                    });
                    write_output(&args.common, &to_json_string(&out))
                }
                other => Err(input_err(format!("unknown format {other:?}"))),
            }
        }
    }
}

/// Per-charge reports computed on a small thread pool; the mass sequence is
/// then checked for monotonicity (required when N = 2).
fn parallel_sweep(
    points: &[Point],
    values: &[f64],
    n: usize,
    kernel: &Kernel,
    z_grid: &[f64],
    gap_tol: f64,
    workers: usize,
) -> Result<Vec<SweepPoint>, CliError> {
    let workers = workers.max(1).min(z_grid.len());
    let reports: Vec<Result<QuantizationReport, String>> = if workers == 1 {
        z_grid
            .iter()
            .map(|&z| {
                let scaled: Vec<f64> = values.iter().map(|v| v * z).collect();
                quantization_report(points, &scaled, n, kernel, gap_tol).map_err(|e| e.to_string())
            })
            .collect()
    } else {
        let chunk = z_grid.len().div_ceil(workers);
        let mut slots: Vec<Vec<Result<QuantizationReport, String>>> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = z_grid
                .chunks(chunk)
                .map(|zs| {
                    scope.spawn(move || {
                        zs.iter()
                            .map(|&z| {
                                let scaled: Vec<f64> = values.iter().map(|v| v * z).collect();
                                quantization_report(points, &scaled, n, kernel, gap_tol)
                                    .map_err(|e| e.to_string())
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                slots.push(h.join().expect("sweep worker panicked"));
            }
        });
        slots.into_iter().flatten().collect()
    };

    let mut out = Vec::with_capacity(z_grid.len());
    for (z, report) in z_grid.iter().zip(reports) {
        let report = report.map_err(CliError::Numerical)?;
        out.push(SweepPoint {
            z: *z,
            k_n: report.k_n,
            mass: report.minimal_mass,
            min_value: report.min_value,
        });
    }
    if n == 2 {
        for w in out.windows(2) {
            if w[1].mass < w[0].mass {
                return Err(CliError::Certificate(format!(
                    "optimal mass decreased at Z = {}",
                    w[1].z
                )));
            }
        }
    }
    Ok(out)
}
