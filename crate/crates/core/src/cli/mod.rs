//! The `qwalk` command line.
//!
//! Exit codes: `0` success, `1` a verification property failed, `2` invalid
//! configuration, `3` numerical or I/O failure.

pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bessel::DEFAULT_MAX_ORDER;
use crate::bounds::truncation_k;
use crate::oracle::{ode_grid, spectral_grid};
use crate::walk::{default_sites, evaluate_grid_with, AmplitudeGrid, BoundarySpec, GridOptions, WalkSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable overriding the Bessel order cap.
pub const MAX_ORDER_ENV: &str = "QWALK_MAX_ORDER";

/// Default precision, also used by `figure1`.
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Sites added beyond the light cone on open lattices.
const LIGHT_CONE_PAD: i64 = 10;

#[derive(Debug, Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Continuous-time quantum walks on 1D lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate ψ(x, t) on a site × time grid.
    Walk(RunArgs),
    /// Report the truncation order for a two-sided lattice.
    Truncation(RunArgs),
    /// Run the cross-oracle and invariant checks.
    Verify(VerifyArgs),
    /// Write the four probability panels (x0 = 13, L = 0, R = 30).
    Figure1(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryKind {
    None,
    Left,
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodKind {
    Series,
    Spectral,
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value = "none")]
    pub boundary: BoundaryKind,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub left: Option<i64>,
    #[arg(long = "R", allow_hyphen_values = true)]
    pub right: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<i64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub q: f64,
    /// Single evaluation time.
    #[arg(long, conflicts_with_all = ["t_max", "t_steps"], allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Last time of an evenly spaced grid starting at 0.
    #[arg(long, allow_hyphen_values = true)]
    pub t_max: Option<f64>,
    /// Number of intervals in [0, t-max]; defaults to steps of 0.25.
    #[arg(long, requires = "t_max")]
    pub t_steps: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "series")]
    pub method: MethodKind,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// First site of the output window (defaults to the lattice or light cone).
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<i64>,
    /// Last site of the output window.
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<i64>,
    /// ODE time step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// ODE padding beyond the light cone on open lattices.
    #[arg(long, default_value_t = 20)]
    pub window_pad: i64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Scale J_0 by 1 + 1e-3 in every series kernel; the suite must then fail.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(long, default_value_t = 60.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 240)]
    pub t_steps: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Output directory.
    #[arg(long, default_value = "figure1")]
    pub out: PathBuf,
}

/// Configuration rejected before any computation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {}: {}", self.field, self.message)
    }
}

/// Validated form of [`RunArgs`].
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: WalkSpec,
    pub times: Vec<f64>,
    pub sites: Vec<i64>,
    pub epsilon: f64,
    pub method: MethodKind,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub dt: f64,
    pub window_pad: i64,
    pub max_order: usize,
}

fn boundary_from_args(args: &RunArgs) -> Result<BoundarySpec, ConfigError> {
    match args.boundary {
        BoundaryKind::None => {
            if args.left.is_some() {
                return Err(ConfigError::new("--L", "not allowed with --boundary none"));
            }
            if args.right.is_some() {
                return Err(ConfigError::new("--R", "not allowed with --boundary none"));
            }
            Ok(BoundarySpec::Unbounded)
        }
        BoundaryKind::Left => {
            if args.right.is_some() {
                return Err(ConfigError::new("--R", "not allowed with --boundary left"));
            }
            let left = args
                .left
                .ok_or_else(|| ConfigError::new("--L", "required with --boundary left"))?;
            Ok(BoundarySpec::LeftWall { left })
        }
        BoundaryKind::Dirichlet | BoundaryKind::Periodic => {
            let left = args
                .left
                .ok_or_else(|| ConfigError::new("--L", "required for two-sided lattices"))?;
            let right = args
                .right
                .ok_or_else(|| ConfigError::new("--R", "required for two-sided lattices"))?;
            if args.boundary == BoundaryKind::Dirichlet && right - left < 2 {
                return Err(ConfigError::new("--R", "Dirichlet lattices need R - L >= 2"));
            }
            if right <= left {
                return Err(ConfigError::new("--R", "must be greater than --L"));
            }
            Ok(if args.boundary == BoundaryKind::Dirichlet {
                BoundarySpec::Dirichlet { left, right }
            } else {
                BoundarySpec::Periodic { left, right }
            })
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<(), ConfigError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(ConfigError::new(
            "--epsilon",
            format!("must lie in (0, 1), got {epsilon}"),
        ))
    }
}

fn times_from_args(args: &RunArgs) -> Result<Vec<f64>, ConfigError> {
    match (args.t, args.t_max) {
        (Some(t), _) => {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(ConfigError::new(
                    "--t",
                    format!("must be finite and non-negative, got {t}"),
                ));
            }
            Ok(vec![t])
        }
        (None, Some(t_max)) => {
            if !(t_max >= 0.0 && t_max.is_finite()) {
                return Err(ConfigError::new(
                    "--t-max",
                    format!("must be finite and non-negative, got {t_max}"),
                ));
            }
            let steps = args.t_steps.unwrap_or(((t_max * 4.0).round() as usize).max(1));
            if steps == 0 {
                return Err(ConfigError::new("--t-steps", "must be at least 1"));
            }
            Ok(time_grid(t_max, steps))
        }
        (None, None) => Err(ConfigError::new("--t", "one of --t or --t-max is required")),
    }
}

/// `steps + 1` evenly spaced times on `[0, t_max]`.
pub fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect()
}

/// Reads [`MAX_ORDER_ENV`]; absent means [`DEFAULT_MAX_ORDER`].
pub fn max_order_from_env() -> Result<usize, ConfigError> {
    match std::env::var(MAX_ORDER_ENV) {
        Ok(raw) => raw.trim().parse::<usize>().map_err(|_| {
            ConfigError::new(
                MAX_ORDER_ENV,
                format!("expected a non-negative integer, got {raw:?}"),
            )
        }),
        Err(_) => Ok(DEFAULT_MAX_ORDER),
    }
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, ConfigError> {
        let boundary = boundary_from_args(args)?;
        let x0 = args.x0.ok_or_else(|| ConfigError::new("--x0", "required"))?;
        if !args.q.is_finite() {
            return Err(ConfigError::new("--q", "must be finite"));
        }
        let spec =
            WalkSpec::new(boundary, args.q, x0).map_err(|e| ConfigError::new("--x0", e.to_string()))?;
        check_epsilon(args.epsilon)?;
        let times = times_from_args(args)?;
        if args.method == MethodKind::Spectral && boundary.length().is_none() {
            return Err(ConfigError::new(
                "--method",
                "spectral needs --boundary dirichlet or periodic",
            ));
        }
        if args.method == MethodKind::Ode {
            if !(args.dt > 0.0 && args.dt <= crate::oracle::MAX_DT) {
                return Err(ConfigError::new(
                    "--dt",
                    format!("must lie in (0, {}]", crate::oracle::MAX_DT),
                ));
            }
            if args.window_pad < crate::oracle::MIN_WINDOW_PAD {
                return Err(ConfigError::new(
                    "--window-pad",
                    format!("must be at least {}", crate::oracle::MIN_WINDOW_PAD),
                ));
            }
        }

        let t_max = times.iter().copied().fold(0.0, f64::max);
        // at t = 0 the walker sits on x0 alone
        let pad = if t_max > 0.0 { LIGHT_CONE_PAD } else { 0 };
        let mut sites = default_sites(&spec, t_max, pad);
        if let Some(lo) = args.x_min {
            sites.retain(|&x| x >= lo);
            if boundary.length().is_none() && sites.first().is_none_or(|&x| x > lo) {
                let hi = sites.last().copied().unwrap_or(lo);
                sites = (lo..=hi).collect();
            }
        }
        if let Some(hi) = args.x_max {
            sites.retain(|&x| x <= hi);
            if boundary.length().is_none() && sites.last().is_none_or(|&x| x < hi) {
                let lo = sites.first().copied().unwrap_or(hi);
                sites = (lo..=hi).collect();
            }
        }
        if let Some(&bad) = sites.iter().find(|&&x| !boundary.contains_site(x)) {
            return Err(ConfigError::new(
                "--x-min",
                format!("site {bad} lies outside the lattice"),
            ));
        }
        if sites.is_empty() {
            return Err(ConfigError::new("--x-min", "site window is empty"));
        }

        Ok(RunConfig {
            spec,
            times,
            sites,
            epsilon: args.epsilon,
            method: args.method,
            format: args.format,
            out: args.out.clone(),
            dt: args.dt,
            window_pad: args.window_pad,
            max_order: max_order_from_env()?,
        })
    }
}

/// Parses `args` and runs the selected subcommand, returning the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Walk(args) => with_config(&args, cmd_walk),
        Command::Truncation(args) => cmd_truncation(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Figure1(args) => cmd_figure1(&args),
    }
}

fn with_config(args: &RunArgs, f: fn(&RunConfig) -> i32) -> i32 {
    match RunConfig::from_args(args) {
        Ok(config) => f(&config),
        Err(e) => {
            eprintln!("qwalk: {e}");
            EXIT_CONFIG
        }
    }
}

fn numeric_failure(e: impl fmt::Display) -> i32 {
    eprintln!("qwalk: {e}");
    EXIT_NUMERIC
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let file =
                File::create(p).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", p.display())))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Computes the grid a `walk` run asks for.
pub fn compute_grid(config: &RunConfig) -> crate::Result<AmplitudeGrid> {
    let spec = &config.spec;
    match config.method {
        MethodKind::Series => {
            let options = GridOptions {
                max_order: config.max_order,
            };
            evaluate_grid_with(spec, &config.sites, &config.times, config.epsilon, &options)
        }
        MethodKind::Spectral => spectral_grid(spec, &config.sites, &config.times),
        MethodKind::Ode => {
            let mut order: Vec<usize> = (0..config.times.len()).collect();
            order.sort_by(|&a, &b| config.times[a].total_cmp(&config.times[b]));
            let sorted: Vec<f64> = order.iter().map(|&i| config.times[i]).collect();
            let grid = ode_grid(spec, &config.sites, &sorted, config.dt, config.window_pad)?;
            // restore the requested time order
            let mut columns = vec![Vec::new(); order.len()];
            for (j, &orig) in order.iter().enumerate() {
                columns[orig] = (0..grid.sites.len()).map(|i| grid.get(i, j)).collect();
            }
            Ok(AmplitudeGrid::from_columns(
                *spec,
                config.sites.clone(),
                config.times.clone(),
                columns,
                grid.method,
                None,
            ))
        }
    }
}

pub fn cmd_walk(config: &RunConfig) -> i32 {
    let grid = match compute_grid(config) {
        Ok(g) => g,
        Err(e) => return numeric_failure(e),
    };
    match grid.truncation_order() {
        Some(k) => eprintln!("qwalk: method={} truncation_order={k}", grid.method),
        None => eprintln!("qwalk: method={} truncation_order=none", grid.method),
    }
    let written = open_output(config.out.as_deref()).and_then(|mut out| {
        match config.format {
            Format::Csv => output::write_grid_csv(&mut out, &grid)?,
            Format::Json => output::write_grid_json(&mut out, &grid)?,
        }
        out.flush()
    });
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => numeric_failure(e),
    }
}

pub fn cmd_truncation(args: &RunArgs) -> i32 {
    let plan = (|| {
        let boundary = boundary_from_args(args)?;
        let n = boundary
            .length()
            .ok_or_else(|| ConfigError::new("--boundary", "truncation needs dirichlet or periodic"))?;
        check_epsilon(args.epsilon)?;
        let t = match (args.t, args.t_max) {
            (Some(t), _) => t,
            (None, Some(t)) => t,
            (None, None) => return Err(ConfigError::new("--t", "required")),
        };
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError::new("--t", format!("must be positive, got {t}")));
        }
        truncation_k(t, args.epsilon, n).map_err(|e| ConfigError::new("--t", e.to_string()))
    })();
    let plan = match plan {
        Ok(p) => p,
        Err(e) => {
            eprintln!("qwalk: {e}");
            return EXIT_CONFIG;
        }
    };
    let written = open_output(args.out.as_deref()).and_then(|mut out| {
        match args.format {
            Format::Csv => output::write_plan_csv(&mut out, &plan)?,
            Format::Json => output::write_plan_json(&mut out, &plan)?,
        }
        out.flush()
    });
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => numeric_failure(e),
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> i32 {
    let run = &args.run;
    let explicit = run.boundary != BoundaryKind::None || run.x0.is_some() || run.left.is_some();
    let mut options = verify::VerifyOptions {
        epsilon: run.epsilon,
        inject_fault: args.inject_fault,
        ..Default::default()
    };
    if let Err(e) = check_epsilon(run.epsilon) {
        eprintln!("qwalk: {e}");
        return EXIT_CONFIG;
    }
    if explicit {
        let spec = boundary_from_args(run).and_then(|b| {
            let x0 = run.x0.ok_or_else(|| ConfigError::new("--x0", "required"))?;
            WalkSpec::new(b, run.q, x0).map_err(|e| ConfigError::new("--x0", e.to_string()))
        });
        match spec {
            Ok(s) => options.specs.push(s),
            Err(e) => {
                eprintln!("qwalk: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    let checks = match verify::run_suite(&options) {
        Ok(c) => c,
        Err(e) => return numeric_failure(e),
    };
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let written = open_output(run.out.as_deref()).and_then(|mut out| {
        for c in &checks {
            writeln!(out, "{c}")?;
        }
        writeln!(out, "{} checks, {} failed", checks.len(), failed)?;
        out.flush()
    });
    if let Err(e) = written {
        return numeric_failure(e);
    }
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILED
    }
}

/// Start site and walls of the `figure1` panels.
pub const FIGURE_X0: i64 = 13;
pub const FIGURE_LEFT: i64 = 0;
pub const FIGURE_RIGHT: i64 = 30;

/// Panel names in output order.
pub const FIGURE_PANELS: [&str; 4] = ["none", "left", "dirichlet", "periodic"];

/// Evaluates the four `figure1` panels.
pub fn figure1_grids(
    t_max: f64,
    t_steps: usize,
    epsilon: f64,
) -> crate::Result<Vec<(&'static str, AmplitudeGrid)>> {
    let times = time_grid(t_max, t_steps);
    let boundaries = [
        BoundarySpec::Unbounded,
        BoundarySpec::LeftWall { left: FIGURE_LEFT },
        BoundarySpec::Dirichlet {
            left: FIGURE_LEFT,
            right: FIGURE_RIGHT,
        },
        BoundarySpec::Periodic {
            left: FIGURE_LEFT,
            right: FIGURE_RIGHT,
        },
    ];
    FIGURE_PANELS
        .iter()
        .zip(boundaries)
        .map(|(&name, b)| {
            let spec = WalkSpec::new(b, 0.0, FIGURE_X0)?;
            let sites = default_sites(&spec, t_max, LIGHT_CONE_PAD);
            Ok((name, crate::walk::evaluate_grid(&spec, &sites, &times, epsilon)?))
        })
        .collect()
}

pub fn cmd_figure1(args: &FigureArgs) -> i32 {
    if let Err(e) = check_epsilon(args.epsilon) {
        eprintln!("qwalk: {e}");
        return EXIT_CONFIG;
    }
    if !(args.t_max >= 0.0 && args.t_max.is_finite()) {
        eprintln!(
            "qwalk: {}",
            ConfigError::new("--t-max", "must be finite and non-negative")
        );
        return EXIT_CONFIG;
    }
    if args.t_steps == 0 {
        eprintln!("qwalk: {}", ConfigError::new("--t-steps", "must be at least 1"));
        return EXIT_CONFIG;
    }
    let grids = match figure1_grids(args.t_max, args.t_steps, args.epsilon) {
        Ok(g) => g,
        Err(e) => return numeric_failure(e),
    };
    if let Err(e) = fs::create_dir_all(&args.out) {
        return numeric_failure(format!("{}: {e}", args.out.display()));
    }
    for (name, grid) in &grids {
        let path = args.out.join(format!("{name}.csv"));
        let written = File::create(&path).and_then(|f| {
            let mut out = BufWriter::new(f);
            output::write_probability_csv(&mut out, grid)?;
            out.flush()
        });
        if let Err(e) = written {
            return numeric_failure(format!("{}: {e}", path.display()));
        }
        let k = grid
            .truncation_order()
            .map_or_else(|| "none".to_string(), |k| k.to_string());
        println!("{name}: {} truncation_order={k}", path.display());
    }
    EXIT_OK
}
