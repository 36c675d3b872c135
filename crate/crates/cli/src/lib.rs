//! Command-line front end: solve cases, sweep pole counts, tabulate corner eddies.

pub mod grid;
pub mod report;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lightning_stokes::assembly::Weighting;
use lightning_stokes::cases::{case_by_name, CaseConfig, CaseDefinition, CASE_NAMES};
use lightning_stokes::geometry::Sampling;
use lightning_stokes::moffatt::{eddy_exponent, eddy_metrics};
use lightning_stokes::solver::{solve_adaptive, solve_fixed, AdaptiveLimits};
use lightning_stokes::StokesError;
use thiserror::Error;

use grid::GridSpec;
use report::{line_fit, BasisSummary, ConvergenceRow, ConvergenceTable, MoffattRow, RunReport, Timings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Solver(#[from] StokesError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lightning-stokes", version, about = "Lightning rational-function Stokes solver")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a built-in case or a JSON/TOML configuration and print a JSON report.
    Solve(SolveArgs),
    /// Sweep poles per corner and fit log10(error) against sqrt(4N).
    Converge(ConvergeArgs),
    /// Tabulate the dominant corner-eddy exponent for wedge angles in degrees.
    Moffatt(MoffattArgs),
    /// List the built-in cases.
    Cases,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Built-in case name or path to a configuration file.
    pub case: String,
    /// Poles at every corner that carries poles.
    #[arg(long)]
    pub poles: Option<usize>,
    /// Polynomial degree.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Pole clustering parameter.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Switch to corner-clustered sampling with this many samples per pole.
    #[arg(long)]
    pub samples_per_pole: Option<usize>,
    /// Row weighting: corner, column or none.
    #[arg(long)]
    pub weighting: Option<Weighting>,
    /// Grow the basis until the boundary error meets `--tol`.
    #[arg(long)]
    pub adaptive: bool,
    /// Target boundary error for `--adaptive`.
    #[arg(long, requires = "adaptive", default_value_t = 1e-8)]
    pub tol: f64,
    /// Cap on the basis size for `--adaptive`.
    #[arg(long, requires = "adaptive")]
    pub max_size: Option<usize>,
    /// Field grid `NXxNY,x0:x1,y0:y1` written as CSV.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    /// Directory for the report and grid files.
    #[arg(short, long, env = "LIGHTNING_STOKES_OUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Built-in case name or path to a configuration file.
    pub case: String,
    /// Comma-separated poles per corner, at least three.
    #[arg(long, value_delimiter = ',', default_value = "4,8,12,16,20,24,28,32")]
    pub poles: Vec<usize>,
    /// Fixed polynomial degree; by default it equals the pole count.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MoffattArgs {
    /// Wedge angles 2α in degrees.
    #[arg(required = true, allow_negative_numbers = true)]
    pub angles: Vec<f64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Built-in case by name, otherwise a configuration file.
pub fn load_case(spec: &str) -> Result<CaseDefinition, CliError> {
    if CASE_NAMES.contains(&spec) {
        return Ok(case_by_name(spec)?);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(CaseConfig::load(path)?.build()?);
    }
    Err(StokesError::UnknownCase(spec.into()).into())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| CliError::io(path, e))?;
    std::io::Write::flush(&mut w).map_err(|e| CliError::io(path, e))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let case = load_case(&args.case)?;
    let basis = case.basis_with(args.poles, args.degree, args.sigma);
    let mut options = case.solve_options();
    if let Some(k) = args.samples_per_pole {
        options.sampling = Sampling::Clustered { samples_per_pole: k };
    }
    if let Some(w) = args.weighting {
        options.weighting = w;
    }
    let (solution, rep) = if args.adaptive {
        let mut limits = AdaptiveLimits::default();
        if let Some(m) = args.max_size {
            limits.max_size = m;
        }
        log::info!("adaptive solve of {} to tolerance {:e}", case.name, args.tol);
        solve_adaptive(&case.domain, args.tol, &limits, &options)?
    } else {
        log::info!("solve of {} with poles {:?}, degree {}", case.name, basis.poles_per_corner, basis.degree);
        solve_fixed(&case.domain, &basis, &options)?
    };
    log::info!("boundary error {:e} after {:.3} s", rep.boundary_error, rep.wall_time);

    let eval_start = Instant::now();
    let probes = case.evaluate_probes(&solution, &rep)?;
    let field = args.grid.map(|g| solution.eval_grid(g.bbox, g.nx, g.ny)).transpose()?;
    let evaluate = eval_start.elapsed().as_secs_f64();

    let mut outputs = Vec::new();
    let out_dir = args.output.clone().or_else(|| args.grid.map(|_| PathBuf::from(".")));
    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    if let (Some(field), Some(dir)) = (&field, &out_dir) {
        let path = dir.join(format!("{}-grid.csv", case.name));
        write_file(&path, |w| field.write_csv(w))?;
        outputs.push(path.display().to_string());
    }
    let report_path = args.output.as_ref().map(|dir| dir.join(format!("{}.json", case.name)));
    if let Some(p) = &report_path {
        outputs.push(p.display().to_string());
    }

    let passed = probes.iter().all(|p| p.passed);
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").into(),
        case: case.name.clone(),
        description: case.description.clone(),
        mode: if args.adaptive { "adaptive" } else { "fixed" }.into(),
        basis: BasisSummary {
            poles_per_corner: rep.poles_per_corner.clone(),
            degree: rep.degree,
            unknowns: rep.coefficients.len(),
        },
        boundary_error: rep.boundary_error,
        per_corner_error: rep.per_corner_error.clone(),
        residual_norm: rep.residual_norm,
        rank: rep.rank,
        sample_count: rep.sample_count,
        iterations: rep.iterations,
        converged: rep.converged,
        probes,
        passed,
        timings: Timings {
            assemble: rep.assemble_time,
            solve: rep.lstsq_time,
            evaluate,
            total: start.elapsed().as_secs_f64(),
        },
        outputs,
    };
    if let Some(p) = &report_path {
        write_file(p, |w| {
            serde_json::to_writer_pretty(&mut *w, &report)?;
            std::io::Write::write_all(w, b"\n")
        })?;
    }
    Ok(report)
}

pub fn cmd_converge(args: &ConvergeArgs) -> Result<ConvergenceTable, CliError> {
    if args.poles.len() < 3 {
        return Err(CliError::Usage(format!(
            "a convergence sweep needs at least 3 pole counts, got {}",
            args.poles.len()
        )));
    }
    let case = load_case(&args.case)?;
    let options = case.solve_options();
    let mut rows = Vec::with_capacity(args.poles.len());
    for &n in &args.poles {
        let basis = case.basis_with(Some(n), Some(args.degree.unwrap_or(n)), None);
        let (_, rep) = solve_fixed(&case.domain, &basis, &options)?;
        log::info!("poles {n}: boundary error {:e}", rep.boundary_error);
        rows.push(ConvergenceRow {
            poles: n,
            unknowns: rep.coefficients.len(),
            boundary_error: rep.boundary_error,
            wall_time: rep.wall_time,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| (r.unknowns as f64).sqrt()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.boundary_error.log10()).collect();
    let (slope, correlation) = line_fit(&x, &y);
    Ok(ConvergenceTable {
        case: case.name,
        rows,
        slope,
        correlation,
    })
}

pub fn cmd_moffatt(args: &MoffattArgs) -> Result<Vec<MoffattRow>, CliError> {
    args.angles
        .iter()
        .map(|&deg| {
            let e = eddy_exponent(deg.to_radians())?;
            let m = if e.real_root { None } else { Some(eddy_metrics(e.lambda)?) };
            Ok(MoffattRow {
                two_alpha_deg: deg,
                re_lambda: e.lambda.re,
                im_lambda: e.lambda.im,
                real_root: e.real_root,
                scale_ratio: m.map(|m| m.scale_ratio),
                stream_ratio: m.map(|m| m.stream_ratio),
                velocity_ratio: m.map(|m| m.velocity_ratio),
                residual: e.residual,
            })
        })
        .collect()
}

pub fn cases_listing() -> Result<String, CliError> {
    let mut s = String::new();
    for name in CASE_NAMES {
        let case = case_by_name(name)?;
        s += &format!("{name:<24}{}\n", case.description);
    }
    Ok(s)
}

/// Runs a parsed command, printing results to stdout. Returns whether every probe passed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Solve(args) => {
            let report = cmd_solve(args)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.passed)
        }
        Command::Converge(args) => {
            let table = cmd_converge(args)?;
            match args.format {
                Format::Csv => {
                    print!("{}", table.to_csv());
                    eprintln!("slope {:.6}, correlation {:.6}", table.slope, table.correlation);
                }
                Format::Json => println!("{}", serde_json::to_string_pretty(&table)?),
            }
            Ok(true)
        }
        Command::Moffatt(args) => {
            let rows = cmd_moffatt(args)?;
            match args.format {
                Format::Csv => print!("{}", report::moffatt_csv(&rows)),
                Format::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
            }
            Ok(true)
        }
        Command::Cases => {
            print!("{}", cases_listing()?);
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("lightning-stokes").chain(args.iter().copied()))
    }

    #[test]
    fn tol_requires_adaptive() {
        assert!(parse(&["solve", "lid-driven-cavity", "--tol", "1e-6"]).is_err());
        assert!(parse(&["solve", "lid-driven-cavity", "--adaptive", "--tol", "1e-6"]).is_ok());
    }

    #[test]
    fn weighting_and_grid_parse() {
        let cli = parse(&["solve", "step-channel", "--weighting", "column", "--grid", "4x3,-2:4,-1:1"]).unwrap();
        let Command::Solve(args) = cli.command else { panic!() };
        assert_eq!(args.weighting, Some(Weighting::Column));
        assert_eq!(args.grid.unwrap().nx, 4);
        assert!(parse(&["solve", "step-channel", "--weighting", "diagonal"]).is_err());
    }

    #[test]
    fn converge_list_parses() {
        let cli = parse(&["converge", "lid-driven-cavity", "--poles", "4,8,16"]).unwrap();
        let Command::Converge(args) = cli.command else { panic!() };
        assert_eq!(args.poles, vec![4, 8, 16]);
    }

    #[test]
    fn short_sweep_is_rejected() {
        let args = ConvergeArgs {
            case: "lid-driven-cavity".into(),
            poles: vec![8],
            degree: None,
            format: Format::Csv,
        };
        assert!(matches!(cmd_converge(&args), Err(CliError::Usage(_))));
    }

    #[test]
    fn unknown_case_is_reported() {
        assert!(matches!(
            load_case("no-such-case"),
            Err(CliError::Solver(StokesError::UnknownCase(_)))
        ));
    }

    #[test]
    fn moffatt_rows() {
        let rows = cmd_moffatt(&MoffattArgs { angles: vec![90.0, 160.0], format: Format::Csv }).unwrap();
        assert!((rows[0].re_lambda - 3.7396).abs() < 1e-3);
        assert!((rows[0].im_lambda - 1.1190).abs() < 1e-3);
        assert!(rows[0].scale_ratio.is_some());
        assert!(rows[1].real_root && rows[1].scale_ratio.is_none());
        assert!(cmd_moffatt(&MoffattArgs { angles: vec![190.0], format: Format::Csv }).is_err());
    }
}
