//! Command-line front end.
//!
//! Exit codes: 0 success, 1 infeasible, 2 input error, 3 internal error or
//! theory violation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bnb::{solve, write_trace, BranchOrder, SolveConfig, SolveReport};
use crate::candidates::{brute_force_optimum, enumerate_candidates, DEFAULT_ENUM_CAP};
use crate::error::{FreError, Result};
use crate::feasibility::{check_feasibility, check_membership, DEFAULT_FEAS_TOL};
use crate::io::{generate_instance, parse_instance, GeneratorConfig, InstanceDocument};
use crate::model::{FreInstance, SolutionVector};
use crate::reduction::simplify_matrix_with_tol;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Agreement threshold between the branch-and-bound and the exhaustive oracle.
const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "fre-dombi", version, about = "Linear optimization over max-Dombi fuzzy relation equations")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Absolute tolerance on each constraint residual.
    #[arg(long = "tol-feas", global = true, default_value_t = DEFAULT_FEAS_TOL)]
    tol_feas: f64,

    /// Row order used for branching.
    #[arg(long, global = true, value_enum, default_value_t = Order::Natural)]
    order: Order,

    /// Cross-check `solve` against exhaustive enumeration.
    #[arg(long, global = true)]
    oracle: bool,

    /// Write the branch-and-bound trace to this file.
    #[arg(long, global = true, value_name = "PATH")]
    trace: Option<PathBuf>,

    /// Largest search space the enumerator will walk.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_CAP)]
    cap: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Order {
    Natural,
    Heuristic,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance.
    Solve {
        file: PathBuf,
        /// Write the full report as JSON.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Print the JSON report instead of the summary.
        #[arg(long)]
        json: bool,
    },
    /// Build the maximum solution and test feasibility.
    Check { file: PathBuf },
    /// Show the reduced matrix and which rule zeroed each entry.
    Simplify { file: PathBuf },
    /// List every candidate X(e).
    Enumerate {
        file: PathBuf,
        /// Enumerate the unreduced sets J instead of J̄.
        #[arg(long)]
        original: bool,
    },
    /// Evaluate the constraints at a point.
    Eval {
        file: PathBuf,
        /// Comma-separated point, e.g. "0,0.5,1".
        #[arg(long, value_name = "VECTOR", allow_hyphen_values = true)]
        x: String,
    },
    /// Write a random instance that is feasible by construction.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "zero-b-rows", default_value_t = 0)]
        zero_b_rows: usize,
        #[arg(long = "cost-min", default_value_t = -10.0, allow_hyphen_values = true)]
        cost_min: f64,
        #[arg(long = "cost-max", default_value_t = 10.0, allow_hyphen_values = true)]
        cost_max: f64,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &FreError) -> i32 {
    match err {
        FreError::Infeasible => EXIT_INFEASIBLE,
        FreError::TheoryViolation(_) => EXIT_INTERNAL,
        _ => EXIT_INPUT,
    }
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load(path: &Path) -> Result<FreInstance> {
    parse_instance(&fs::read_to_string(path)?)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(" "))
}

fn fmt_sets(sets: &[Vec<usize>], name: &str) -> String {
    sets.iter()
        .enumerate()
        .map(|(i, s)| {
            let cols: Vec<String> = s.iter().map(ToString::to_string).collect();
            format!("{name}{} = {{{}}}", i + 1, cols.join(","))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| FreError::Domain(format!("bad vector entry '{s}': {e}"))))
        .collect()
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let g = &cli.global;
    if !(g.tol_feas.is_finite() && g.tol_feas >= 0.0) {
        return Err(FreError::Config(format!("--tol-feas {} must be finite and >= 0", g.tol_feas)));
    }
    match &cli.command {
        Command::Solve { file, out: out_path, json } => cmd_solve(g, &load(file)?, out_path.as_deref(), *json, out),
        Command::Check { file } => cmd_check(g, &load(file)?, out),
        Command::Simplify { file } => cmd_simplify(g, &load(file)?, out),
        Command::Enumerate { file, original } => cmd_enumerate(g, &load(file)?, *original, out),
        Command::Eval { file, x } => cmd_eval(g, &load(file)?, &parse_vector(x)?, out),
        Command::Gen { m, n, lambda, seed, zero_b_rows, cost_min, cost_max, name, out: out_path } => {
            let cfg = GeneratorConfig {
                m: *m,
                n: *n,
                lambda: *lambda,
                seed: *seed,
                zero_b_rows: *zero_b_rows,
                cost_range: (*cost_min, *cost_max),
            };
            let inst = generate_instance(&cfg)?;
            let doc =
                InstanceDocument { name: name.clone(), seed: Some(*seed), ..InstanceDocument::from_instance(&inst) };
            let text = doc.to_json();
            match out_path {
                Some(p) => fs::write(p, text + "\n")?,
                None => writeln!(out, "{text}")?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn print_residuals(out: &mut dyn Write, residuals: &[f64]) -> Result<()> {
    writeln!(out, "row  |residual|")?;
    for (i, r) in residuals.iter().enumerate() {
        writeln!(out, "{:>3}  {r:.3e}", i + 1)?;
    }
    Ok(())
}

fn cmd_solve(g: &Global, inst: &FreInstance, out_path: Option<&Path>, json: bool, out: &mut dyn Write) -> Result<i32> {
    let order = match g.order {
        Order::Natural => BranchOrder::Natural,
        Order::Heuristic => BranchOrder::Heuristic,
    };
    let report = solve(inst, &SolveConfig { tol: g.tol_feas, order })?;
    if let Some(path) = &g.trace {
        write_trace(&report.trace, fs::File::create(path)?)?;
    }
    let doc = serde_json::to_string_pretty(&report).expect("reports always serialize");
    if let Some(path) = out_path {
        fs::write(path, doc.clone() + "\n")?;
    }
    if json {
        writeln!(out, "{doc}")?;
    } else {
        write_summary(&report, out)?;
    }
    if !report.feasible {
        return Ok(EXIT_INFEASIBLE);
    }
    if g.oracle {
        let agree = oracle_agrees(inst, &report, g)?;
        writeln!(out, "oracle agreement: {agree}")?;
        if !agree {
            return Ok(EXIT_INTERNAL);
        }
    }
    Ok(EXIT_OK)
}

fn oracle_agrees(inst: &FreInstance, report: &SolveReport, g: &Global) -> Result<bool> {
    let oracle = brute_force_optimum(inst, g.cap, g.tol_feas)?;
    let Some(opt) = &report.optimum else { return Ok(false) };
    Ok((opt.z1_star - oracle.z1_star).abs() <= ORACLE_TOL
        && (opt.z_opt - oracle.z_opt).abs() <= ORACLE_TOL
        && opt.x_opt.x.iter().zip(&oracle.x_opt.x).all(|(a, b)| (a - b).abs() <= ORACLE_TOL))
}

fn write_summary(r: &SolveReport, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "feasible: {}", if r.feasible { "yes" } else { "no" })?;
    writeln!(out, "X̄ = {}", fmt_vec(&r.x_max.x))?;
    if !r.feasible {
        print_residuals(out, &r.row_residuals)?;
        return Ok(());
    }
    if let (Some(j), Some(jb)) = (&r.j, &r.j_bar) {
        writeln!(out, "{}", fmt_sets(j, "J"))?;
        writeln!(out, "{}", fmt_sets(jb, "J̄"))?;
    }
    if let (Some(e), Some(eb)) = (&r.stats.size_e, &r.stats.size_e_bar) {
        writeln!(out, "|E| = {e}, |Ē| = {eb}")?;
    }
    if let Some(opt) = &r.optimum {
        writeln!(out, "e* = {}", opt.e_star)?;
        writeln!(out, "X(e*) = {}", fmt_vec(&opt.x_min_star.x))?;
        writeln!(out, "Z1* = {:.4}", opt.z1_star)?;
        writeln!(out, "x* = {}", fmt_vec(&opt.x_opt.x))?;
        writeln!(out, "Z* = {:.4}", opt.z_opt)?;
    }
    let s = &r.stats.search;
    writeln!(
        out,
        "nodes: created {}, expanded {}, pruned {}, candidates {}",
        s.nodes_created, s.nodes_expanded, s.nodes_pruned, s.candidates
    )?;
    Ok(())
}

fn cmd_check(g: &Global, inst: &FreInstance, out: &mut dyn Write) -> Result<i32> {
    let rep = check_feasibility(inst, g.tol_feas);
    writeln!(out, "feasible: {}", if rep.feasible { "yes" } else { "no" })?;
    writeln!(out, "X̄ = {}", fmt_vec(&rep.x_max.x))?;
    print_residuals(out, &rep.row_residuals)?;
    Ok(if rep.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn cmd_simplify(g: &Global, inst: &FreInstance, out: &mut dyn Write) -> Result<i32> {
    let rs = simplify_matrix_with_tol(inst, g.tol_feas);
    writeln!(out, "Ā =")?;
    for row in &rs.a_bar {
        writeln!(out, "  {}", fmt_vec(row))?;
    }
    writeln!(out, "zeroed entries:")?;
    for z in &rs.zero_log {
        writeln!(out, "  ā[{},{}] rule {} (a = {:.4})", z.row + 1, z.col + 1, z.rule, inst.row(z.row)[z.col])?;
    }
    writeln!(out, "{}", fmt_sets(&rs.j.to_one_based(), "J"))?;
    writeln!(out, "{}", fmt_sets(&rs.j_bar.to_one_based(), "J̄"))?;
    writeln!(out, "|E| = {}, |Ē| = {}", rs.size_e, rs.size_e_bar)?;
    Ok(EXIT_OK)
}

fn cmd_enumerate(g: &Global, inst: &FreInstance, original: bool, out: &mut dyn Write) -> Result<i32> {
    let rs = simplify_matrix_with_tol(inst, g.tol_feas);
    let sets = if original { &rs.j } else { &rs.j_bar };
    writeln!(out, "{:<16} {:<48} {:>12} feasible", "e", "X(e)", "z1")?;
    let mut count = 0usize;
    for rec in enumerate_candidates(inst, sets, g.cap, g.tol_feas)? {
        count += 1;
        writeln!(out, "{:<16} {:<48} {:>12.4} {}", rec.e.to_string(), fmt_vec(&rec.x.x), rec.z1, rec.feasible)?;
    }
    writeln!(out, "{count} candidates")?;
    Ok(EXIT_OK)
}

fn cmd_eval(g: &Global, inst: &FreInstance, x: &[f64], out: &mut dyn Write) -> Result<i32> {
    SolutionVector::probe(x.to_vec())?;
    let rep = check_membership(inst, x, g.tol_feas)?;
    writeln!(out, "row  value     b         |residual|")?;
    for (i, (v, r)) in rep.row_values.iter().zip(&rep.row_residuals).enumerate() {
        writeln!(out, "{:>3}  {v:.6}  {:.6}  {r:.3e}", i + 1, inst.b()[i])?;
    }
    writeln!(out, "feasible: {}", if rep.feasible { "yes" } else { "no" })?;
    writeln!(out, "objective: {:.4}", inst.objective(x))?;
    Ok(if rep.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}
