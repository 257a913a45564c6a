use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sombrero_core::angular::{build_z, coefficient_table, ode_residual};
use sombrero_core::error::Error;
use sombrero_core::grid::{GridConfig, QuadratureRule};
use sombrero_core::iterate::{solve, BoundaryCondition, SolveConfig, SolveResult};
use sombrero_core::model::table1::{GOLDEN, TABLE1_G};
use sombrero_core::model::{regenerate_table1, validate_params, ModelParams};
use sombrero_core::oracle::{bound_report, fd_ground_energy, prototype1d_solve, FDConfig};
use sombrero_core::report;

#[derive(Parser, Debug)]
#[command(name = "sombrero", version, about = "Iterative ground states of the N-dimensional sombrero potential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print derived constants and the admissible parameter window.
    Validate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the iteration and write per-iteration and profile data.
    Solve(SolveArgs),
    /// Solve several (k, a) points concurrently, one output file per point.
    Sweep(SweepArgs),
    /// Recompute the reference window table at g = 3 and compare.
    Table1 {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-dimensional prototype iteration with its rate bound.
    Proto1d {
        #[arg(long)]
        g: f64,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coefficient tables of the angular functions, as JSON.
    Angular {
        #[arg(long = "N-min", default_value_t = 2)]
        n_min: u32,
        #[arg(long = "N-max", default_value_t = 6)]
        n_max: u32,
        #[arg(long, default_value_t = 4)]
        l_max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    #[arg(long)]
    g: f64,
    #[arg(long = "N")]
    dimension: u32,
    #[arg(long, default_value_t = 0)]
    l: u32,
    #[arg(long)]
    a: f64,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 4001)]
    nodes: usize,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 60.0)]
    tail_threshold: f64,
    #[arg(long, value_enum, default_value_t = Rule::Cubic)]
    rule: Rule,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Solve even outside the hierarchy window.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value_t = Bc::A)]
    bc: Bc,
    #[command(flatten)]
    grid: GridArgs,
    /// Also compute the shooting-oracle energy.
    #[arg(long)]
    oracle: bool,
    /// Add the R = r^{-K} psi column to the profile.
    #[arg(long = "emit-R")]
    emit_r: bool,
    /// Far value that the emitted f is scaled to.
    #[arg(long, default_value_t = 1.0)]
    f_inf: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = TABLE1_G)]
    g: f64,
    /// Comma-separated k values (half-integers); defaults to the reference table rows.
    #[arg(long, value_delimiter = ',')]
    k: Vec<f64>,
    /// Comma-separated a values, one per k.
    #[arg(long, value_delimiter = ',')]
    a: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Bc::A)]
    bc: Bc,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Rule {
    Cubic,
    Trapezoid,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Bc {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

impl From<Bc> for BoundaryCondition {
    fn from(b: Bc) -> Self {
        match b {
            Bc::A => BoundaryCondition::A,
            Bc::B => BoundaryCondition::B,
        }
    }
}

impl GridArgs {
    fn config(&self) -> SolveConfig {
        SolveConfig {
            grid: GridConfig {
                node_count: self.nodes,
                tail_threshold: self.tail_threshold,
                r_max: self.r_max,
                rule: match self.rule {
                    Rule::Cubic => QuadratureRule::Cubic,
                    Rule::Trapezoid => QuadratureRule::Trapezoid,
                },
                ..GridConfig::default()
            },
            tol: self.tol,
            max_iter: self.max_iter,
            force: self.force,
        }
    }
}

/// 0 success, 1 usage or structural, 2 validation or bound failure, 3 numerical failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Structural(_) | Error::Config(_) | Error::Domain { .. } => 1,
        Error::InvalidWindow { .. } | Error::OutsideWindow | Error::BoundaryBreakdown { .. } => 2,
        Error::NonFinite { .. }
        | Error::NonpositiveIterate { .. }
        | Error::NotConverged { .. }
        | Error::Overflow { .. }
        | Error::NoBracket { .. } => 3,
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("i/o error: {e}"),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(dir: &Path, name: &str) -> io::Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_validate(p: &ParamArgs, format: Format) -> CmdResult {
    let params = ModelParams::new(p.g, p.dimension, p.l, p.a);
    let dc = validate_params(&params)?;
    let mut out = io::stdout().lock();
    match format {
        Format::Json => report::write_json(&mut out, "validate", &dc)?,
        _ => {
            writeln!(out, "g = {}", dc.g())?;
            writeln!(out, "N = {}, l = {}, a = {}", p.dimension, p.l, dc.a())?;
            writeln!(out, "K = {}, k = {}", dc.big_k, dc.k)?;
            writeln!(out, "g+ = {:.6}, g- = {:.6}", dc.g_plus, dc.g_minus)?;
            writeln!(out, "E0 = {:.10}", dc.e0)?;
            writeln!(out, "a window = [{:.4}, {:.4}]", dc.a_min, dc.a_max)?;
            writeln!(out, "g window = [{:.4}, {:.4}]", dc.g_min, dc.g_max)?;
            writeln!(out, "g^2 window = [{:.4}, {:.4}]", dc.g2_min(), dc.g2_max())?;
            let verdict = if dc.hierarchy_valid {
                "valid".to_string()
            } else if dc.g() <= dc.g_min {
                format!("invalid (g < k/a+1 = {:.4})", dc.g_min)
            } else {
                format!("invalid (g > {:.4})", dc.g_max)
            };
            writeln!(out, "hierarchy window: {verdict}")?;
        }
    }
    Ok(if dc.hierarchy_valid { 0 } else { 2 })
}

fn write_solve_outputs(args: &SolveArgs, res: &SolveResult, oracle: Option<f64>, full: bool) -> Result<(), Failure> {
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Run<'a> {
                result: &'a SolveResult,
                oracle_energy: Option<f64>,
            }
            let mut w = create(&args.out, "solve.json")?;
            report::write_json(&mut w, "solve", &Run { result: res, oracle_energy: oracle })?;
            w.flush()?;
        }
        _ => {
            let mut w = create(&args.out, "iterations.csv")?;
            report::write_iterations_csv(&mut w, res, oracle)?;
            w.flush()?;
            if full {
                let mut w = create(&args.out, "profile.csv")?;
                report::write_profile_csv(&mut w, res, args.f_inf, args.emit_r)?;
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let p = &args.params;
    let params = ModelParams::new(p.g, p.dimension, p.l, p.a);
    let cfg = args.grid.config();
    let oracle = if args.oracle {
        Some(fd_ground_energy(&params, &FDConfig::default())?)
    } else {
        None
    };
    match solve(&params, args.bc.into(), &cfg) {
        Ok(res) => {
            write_solve_outputs(args, &res, oracle, true)?;
            eprintln!(
                "converged after {} iterations: E = {:.12}",
                res.iterations_used,
                res.final_energy().unwrap_or(f64::NAN)
            );
            Ok(0)
        }
        Err(e) => {
            let partial = match &e {
                Error::BoundaryBreakdown { partial: Some(p), .. } => Some(p.as_ref()),
                Error::NotConverged { partial, .. } => Some(partial.as_ref()),
                _ => None,
            };
            if let Some(res) = partial {
                write_solve_outputs(args, res, oracle, false)?;
            }
            Err(e.into())
        }
    }
}

#[derive(Serialize)]
struct SweepRow {
    k: f64,
    a: f64,
    status: String,
    iterations: usize,
    energy: Option<f64>,
    file: String,
}

fn cmd_sweep(args: &SweepArgs) -> CmdResult {
    let points: Vec<(f64, f64)> = if args.k.is_empty() {
        GOLDEN.iter().map(|r| (r.k, r.a)).collect()
    } else if args.k.len() == args.a.len() {
        args.k.iter().copied().zip(args.a.iter().copied()).collect()
    } else {
        return Err(Failure {
            code: 1,
            message: "--k and --a need the same number of values".into(),
        });
    };
    let threads = std::env::var("SOMBRERO_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure {
            code: 1,
            message: e.to_string(),
        })?;
    let cfg = args.grid.config();
    let bc: BoundaryCondition = args.bc.into();
    std::fs::create_dir_all(&args.out)?;
    let rows: Vec<Result<SweepRow, Failure>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(k, a)| {
                let file = format!("sweep_g{}_k{k}_a{a}_bc{bc}.csv", args.g);
                let params = ModelParams::from_k(args.g, k, a)?;
                let (status, res) = match solve(&params, bc, &cfg) {
                    Ok(r) => ("converged".to_string(), Some(r)),
                    Err(Error::BoundaryBreakdown { m, partial, .. }) => {
                        (format!("breakdown at m={m}"), partial.map(|p| *p))
                    }
                    Err(Error::NotConverged { partial, .. }) => ("not converged".to_string(), Some(*partial)),
                    Err(e) => (e.to_string(), None),
                };
                if let Some(r) = &res {
                    let mut w = BufWriter::new(File::create(args.out.join(&file))?);
                    report::write_iterations_csv(&mut w, r, None)?;
                    w.flush()?;
                }
                Ok(SweepRow {
                    k,
                    a,
                    status,
                    iterations: res.as_ref().map_or(0, |r| r.iterations_used),
                    energy: res.as_ref().and_then(|r| r.energies.last().copied()),
                    file,
                })
            })
            .collect()
    });
    let mut out = io::stdout().lock();
    writeln!(out, "k,a,status,iterations,energy,file")?;
    let mut code = 0;
    for row in rows {
        let row = row?;
        if row.status != "converged" {
            code = code.max(if row.status.starts_with("breakdown") { 2 } else { 3 });
        }
        writeln!(
            out,
            "{},{},{},{},{},{}",
            report::fmt_num(row.k),
            report::fmt_num(row.a),
            row.status,
            row.iterations,
            row.energy.map_or_else(String::new, report::fmt_num),
            row.file
        )?;
    }
    Ok(code)
}

fn cmd_table1(format: Format, out: &Option<PathBuf>) -> CmdResult {
    let rows = regenerate_table1()?;
    let mut w = sink(out)?;
    match format {
        Format::Json => report::write_json(&mut w, "table1", &rows)?,
        _ => report::write_table1_csv(&mut w, &rows)?,
    }
    w.flush()?;
    let bad: Vec<f64> = rows.iter().filter(|r| !r.pass).map(|r| r.golden.k).collect();
    if bad.is_empty() {
        Ok(0)
    } else {
        eprintln!("rows outside tolerance: k = {bad:?}");
        Ok(2)
    }
}

fn cmd_proto1d(g: f64, n: usize, format: Format, out: &Option<PathBuf>) -> CmdResult {
    let res = prototype1d_solve(g, n)?;
    let bounds = bound_report(&res);
    let mut w = sink(out)?;
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Proto<'a> {
                result: &'a sombrero_core::oracle::PrototypeResult,
                bounds: &'a sombrero_core::oracle::BoundReport,
            }
            report::write_json(&mut w, "proto1d", &Proto { result: &res, bounds: &bounds })?;
        }
        _ => report::write_prototype_csv(&mut w, &res, &bounds)?,
    }
    w.flush()?;
    Ok(if bounds.gap_bound_holds && res.gaps_positive { 0 } else { 2 })
}

#[derive(Serialize)]
struct AngularRow {
    dimension: u32,
    l: u32,
    m: u32,
    half_power: u32,
    coeffs: Vec<f64>,
    exact: Option<Vec<String>>,
    max_residual: f64,
}

fn cmd_angular(n_min: u32, n_max: u32, l_max: u32, out: &Option<PathBuf>) -> CmdResult {
    if n_min > n_max {
        return Err(Failure {
            code: 1,
            message: "--N-min exceeds --N-max".into(),
        });
    }
    build_z(n_min, 0, 0)?;
    let table = coefficient_table(n_min..=n_max, l_max)?;
    let rows: Vec<AngularRow> = table
        .iter()
        .map(|z| AngularRow {
            dimension: z.dimension,
            l: z.l,
            m: z.m,
            half_power: z.half_power,
            coeffs: z.coeffs.clone(),
            exact: z.exact_strings(),
            max_residual: (-9..=9)
                .map(|i| ode_residual(z, f64::from(i) / 10.0).abs())
                .fold(0.0, f64::max),
        })
        .collect();
    let mut w = sink(out)?;
    report::write_json(&mut w, "angular", &rows)?;
    w.flush()?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate { params, format } => cmd_validate(params, *format),
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Table1 { format, out } => cmd_table1(*format, out),
        Command::Proto1d { g, n, format, out } => cmd_proto1d(*g, *n, *format, out),
        Command::Angular {
            n_min,
            n_max,
            l_max,
            out,
        } => cmd_angular(*n_min, *n_max, *l_max, out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
