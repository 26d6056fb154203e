//! `pmeinv` subcommands. Exit codes: 0 success, 1 numeric or I/O failure,
//! 2 usage error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::Error;
use crate::fem::{assemble_lumped_mass, solve_poisson, Norm};
use crate::forward::{solve_forward, ForwardConfig, InitialData};
use crate::inversion::{clamp_measurement, recover_gamma, sample_curve, InversionConfig};
use crate::io::{self, fmt_f64, FieldFile, RunManifest};
use crate::mesh::Mesh;
use crate::profile::solve_profile;

#[derive(Debug, Parser)]
#[command(name = "pmeinv", version, about = "Porous medium equation: forward solves and exponent recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the forward problem and write u_T.
    Forward(ForwardArgs),
    /// Recover gamma from a u_T field file.
    Invert(InvertArgs),
    /// Sample the objective norm over a range of alpha.
    Curve(CurveArgs),
    /// Forward solve + inversion for every (gamma, T) pair.
    Table(TableArgs),
    /// Solve the stationary profile problem.
    Profile(ProfileArgs),
    /// Rerun a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct ForwardArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long = "T")]
    t: f64,
    #[arg(long = "N")]
    n: usize,
    /// Time step; defaults to h = 1/N.
    #[arg(long)]
    dt: Option<f64>,
    /// poly_bump(c), scaled_profile(tau[,gamma]) or file:<path>.
    #[arg(long, default_value = "poly_bump(10)")]
    u0: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct SearchArgs {
    #[arg(long = "gamma-max", default_value_t = 20.0)]
    gamma_max: f64,
    #[arg(long, default_value = "l1")]
    norm: Norm,
    #[arg(long = "alpha-min", default_value_t = 1.001)]
    alpha_min: f64,
    #[arg(long = "grid-step", default_value_t = 0.05)]
    grid_step: f64,
    #[arg(long = "refine-tol", default_value_t = 1e-4)]
    refine_tol: f64,
    /// Clamp negative measurement values to zero.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    clamp: bool,
}

impl SearchArgs {
    fn config(&self) -> InversionConfig {
        InversionConfig {
            alpha_min: self.alpha_min,
            gamma_c: self.gamma_max,
            grid_step: self.grid_step,
            refine_tol: self.refine_tol,
            norm: self.norm,
            clamp_negative_measurements: self.clamp,
        }
    }

    fn record(&self, m: &mut RunManifest) {
        m.param("gamma-max", self.gamma_max)
            .param("norm", self.norm)
            .param("alpha-min", self.alpha_min)
            .param("grid-step", self.grid_step)
            .param("refine-tol", self.refine_tol)
            .param("clamp", self.clamp);
    }
}

#[derive(Debug, Args)]
struct InvertArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Measurement time; defaults to the T recorded in the field file.
    #[arg(long = "T")]
    t: Option<f64>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also write the coarse-scan curve here.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long = "alpha-min", default_value_t = 1.001)]
    alpha_min: f64,
    #[arg(long = "alpha-max", default_value_t = 10.0)]
    alpha_max: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value = "linf")]
    norm: Norm,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    clamp: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    gammas: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    times: Vec<f64>,
    #[arg(long = "N", default_value_t = 10)]
    n: usize,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value = "poly_bump(10)")]
    u0: String,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = crate::profile::DEFAULT_TOL)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = crate::profile::DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Override a recorded parameter, e.g. `--set out=other.csv`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::UnknownInitialData(_) | Error::InvalidMesh(_) => {
                CliError::Usage(e.to_string())
            }
            Error::GammaCTooSmall { .. } => CliError::Failure(format!("{e}; increase --gamma-max")),
            Error::MinimumAtAlphaMin { .. } => {
                CliError::Failure(format!("{e}; endpoint minimum, increase --gamma-max or lower --alpha-min"))
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

type CliResult = std::result::Result<(), CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Forward(a) => cmd_forward(&a),
        Command::Invert(a) => cmd_invert(&a),
        Command::Curve(a) => cmd_curve(&a),
        Command::Table(a) => cmd_table(&a),
        Command::Profile(a) => cmd_profile(&a),
        Command::Replay(a) => cmd_replay(&a),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

fn finish_manifest(mut m: RunManifest, started: Instant, out: &Path) -> CliResult {
    m.wall_clock_seconds = started.elapsed().as_secs_f64();
    write_text(&RunManifest::path_for(out), &m.to_text())
}

fn forward_config(gamma: f64, n: usize, t: f64, dt: Option<f64>, u0: &str) -> Result<ForwardConfig, CliError> {
    if n == 0 {
        return Err(usage("--N must be at least 1"));
    }
    let initial: InitialData = u0.parse()?;
    let mut cfg = ForwardConfig::new(gamma, n, t, initial);
    if let Some(dt) = dt {
        cfg = cfg.with_dt(dt);
    }
    cfg.step_count()?;
    Ok(cfg)
}

fn cmd_forward(a: &ForwardArgs) -> CliResult {
    let started = Instant::now();
    let cfg = forward_config(a.gamma, a.n, a.t, a.dt, &a.u0)?;
    let result = solve_forward(&cfg)?;
    let final_max = result.u_t.max();

    let file = FieldFile::new("u_T", result.u_t).with_gamma(cfg.gamma).with_time(cfg.t_final);
    io::write_field(&a.out, &file)?;

    let mut m = RunManifest::new("forward");
    m.param("gamma", cfg.gamma)
        .param("T", cfg.t_final)
        .param("N", cfg.n)
        .param("dt", cfg.dt)
        .param("u0", &cfg.initial)
        .param("out", a.out.display());
    m.diagnostic("steps", result.step_count).diagnostic("final_max", fmt_f64(final_max));
    finish_manifest(m, started, &a.out)?;

    println!("steps: {}", result.step_count);
    println!("final_max: {}", fmt_f64(final_max));
    Ok(())
}

fn measurement_time(flag: Option<f64>, file: &FieldFile) -> Result<f64, CliError> {
    flag.or(file.t).ok_or_else(|| usage("--T not given and the field file records no T"))
}

fn cmd_invert(a: &InvertArgs) -> CliResult {
    let started = Instant::now();
    let file = io::read_field(&a.input)?;
    let t = measurement_time(a.t, &file)?;
    let config = a.search.config();
    let report = recover_gamma(&file.field, t, &config)?;
    let mass = assemble_lumped_mass(file.field.mesh());

    write_text(&a.out, &io::report_to_text(&report, &config, &mass))?;
    if let Some(curve_path) = &a.curve {
        write_text(curve_path, &io::curve_to_csv(&report.curve))?;
    }

    let mut m = RunManifest::new("invert");
    m.param("in", a.input.display()).param("T", t);
    a.search.record(&mut m);
    m.param("out", a.out.display());
    if let Some(c) = &a.curve {
        m.param("curve", c.display());
    }
    m.diagnostic("gamma_m", fmt_f64(report.gamma_m));
    finish_manifest(m, started, &a.out)?;

    if report.degenerate {
        eprintln!("warning: degenerate measurement (w = 0); gamma_m carries no information");
    }
    println!("gamma_m: {}", fmt_f64(report.gamma_m));
    println!("objective_at_min: {}", fmt_f64(report.objective_at_min));
    Ok(())
}

/// `samples` equally spaced points from `lo` to `hi` inclusive.
fn linspace(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    if samples == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (samples - 1) as f64;
    (0..samples).map(|k| if k + 1 == samples { hi } else { lo + k as f64 * step }).collect()
}

fn cmd_curve(a: &CurveArgs) -> CliResult {
    let started = Instant::now();
    if a.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    if !(a.alpha_min > 1.0) || !(a.alpha_max >= a.alpha_min) {
        return Err(usage("need 1 < --alpha-min <= --alpha-max"));
    }
    let file = io::read_field(&a.input)?;
    let t = measurement_time(a.t, &file)?;
    let u_t = if a.clamp { clamp_measurement(&file.field) } else { file.field.clone() };
    let w = solve_poisson(u_t.mesh(), &u_t)?;
    let mass = assemble_lumped_mass(u_t.mesh());
    let alphas = linspace(a.alpha_min, a.alpha_max, a.samples);
    let curve = sample_curve(&u_t, &w, t, &alphas, &mass, a.norm)?;
    write_text(&a.out, &io::curve_to_csv(&curve))?;

    let mut m = RunManifest::new("curve");
    m.param("in", a.input.display())
        .param("T", t)
        .param("alpha-min", a.alpha_min)
        .param("alpha-max", a.alpha_max)
        .param("samples", a.samples)
        .param("norm", a.norm)
        .param("clamp", a.clamp)
        .param("out", a.out.display());
    finish_manifest(m, started, &a.out)?;
    println!("samples: {}", curve.len());
    Ok(())
}

/// Outcome of one (gamma, T) cell of the table.
pub fn table_cell(
    gamma: f64,
    t: f64,
    n: usize,
    dt: Option<f64>,
    u0: &str,
    search: &InversionConfig,
) -> crate::Result<f64> {
    let mut cfg = ForwardConfig::new(gamma, n, t, u0.parse()?);
    if let Some(dt) = dt {
        cfg = cfg.with_dt(dt);
    }
    let forward = solve_forward(&cfg)?;
    Ok(recover_gamma(&forward.u_t, t, search)?.gamma_m)
}

fn cmd_table(a: &TableArgs) -> CliResult {
    let started = Instant::now();
    if a.gammas.is_empty() || a.times.is_empty() {
        return Err(usage("--gammas and --times need at least one value"));
    }
    for &g in &a.gammas {
        for &t in &a.times {
            forward_config(g, a.n, t, a.dt, &a.u0)?;
        }
    }
    let search = a.search.config();
    search.validate()?;

    let cells: Vec<(f64, f64)> = a.gammas.iter().flat_map(|&g| a.times.iter().map(move |&t| (g, t))).collect();
    let results: Vec<crate::Result<f64>> =
        cells.par_iter().map(|&(g, t)| table_cell(g, t, a.n, a.dt, &a.u0, &search)).collect();

    let mut csv = String::from("gamma,quantity");
    for t in &a.times {
        write!(csv, ",T={t}").unwrap();
    }
    csv.push('\n');
    let mut failures = Vec::new();
    for (row, &g) in a.gammas.iter().enumerate() {
        let row_results = &results[row * a.times.len()..(row + 1) * a.times.len()];
        let mut gm_line = format!("{g},gamma_m");
        let mut err_line = format!("{g},abs_error");
        for (col, r) in row_results.iter().enumerate() {
            match r {
                Ok(gm) => {
                    write!(gm_line, ",{}", fmt_f64(*gm)).unwrap();
                    write!(err_line, ",{}", fmt_f64((gm - g).abs())).unwrap();
                }
                Err(e) => {
                    gm_line.push_str(",ERR");
                    err_line.push_str(",ERR");
                    failures.push(format!("gamma={g}, T={}: {e}", a.times[col]));
                }
            }
        }
        writeln!(csv, "{gm_line}\n{err_line}").unwrap();
    }

    print!("{csv}");
    if let Some(out) = &a.out {
        write_text(out, &csv)?;
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut m = RunManifest::new("table");
        m.param("gammas", join(&a.gammas))
            .param("times", join(&a.times))
            .param("N", a.n)
            .param("dt", a.dt.unwrap_or(1.0 / a.n as f64))
            .param("u0", a.u0.parse::<InitialData>()?);
        a.search.record(&mut m);
        m.param("out", out.display());
        finish_manifest(m, started, out)?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!("{} cell(s) failed:\n  {}", failures.len(), failures.join("\n  "))))
    }
}

fn cmd_profile(a: &ProfileArgs) -> CliResult {
    let started = Instant::now();
    if !(a.gamma > 1.0) {
        return Err(usage(format!("--gamma must exceed 1, got {}", a.gamma)));
    }
    if a.n == 0 {
        return Err(usage("--N must be at least 1"));
    }
    let mesh = Arc::new(Mesh::unit_square(a.n)?);
    let p = solve_profile(&mesh, a.gamma, a.tol, a.max_iter)?;
    io::write_field(&a.out, &FieldFile::new("f", p.f.clone()).with_gamma(a.gamma))?;

    let mut m = RunManifest::new("profile");
    m.param("gamma", a.gamma)
        .param("N", a.n)
        .param("tol", a.tol)
        .param("max-iter", a.max_iter)
        .param("out", a.out.display());
    m.diagnostic("iterations", p.iterations)
        .diagnostic("last_change", fmt_f64(p.last_change))
        .diagnostic("residual", fmt_f64(p.residual));
    finish_manifest(m, started, &a.out)?;

    let center = mesh.center_node().map(|c| p.f.values()[c]).unwrap_or(f64::NAN);
    println!("iterations: {}", p.iterations);
    println!("residual: {}", fmt_f64(p.residual));
    println!("center: {}", fmt_f64(center));
    Ok(())
}

fn cmd_replay(a: &ReplayArgs) -> CliResult {
    let mut manifest = RunManifest::read(&a.manifest)?;
    if manifest.subcommand == "replay" {
        return Err(usage("cannot replay a replay"));
    }
    for o in &a.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| usage(format!("--set expects KEY=VALUE, got '{o}'")))?;
        match manifest.params.iter_mut().find(|(pk, _)| pk == k) {
            Some(p) => p.1 = v.to_string(),
            None => manifest.params.push((k.to_string(), v.to_string())),
        }
    }
    let args = std::iter::once("pmeinv".to_string()).chain(manifest.to_args());
    let cli = Cli::try_parse_from(args).map_err(|e| usage(format!("manifest does not parse: {e}")))?;
    dispatch(cli.command)
}
