use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lp_sobolev::harness::checks::{self, CheckKind, CheckResult};
use lp_sobolev::harness::{run_suite_spec, SuiteReport, SuiteSpec};
use lp_sobolev::io::{self, read_json, to_json, write_text};
use lp_sobolev::pwa;
use lp_sobolev::rearrange::{convex_symmetrization, decreasing_rearrangement, symmetric_rearrangement, DEFAULT_GRID};
use lp_sobolev::sphere::{affine_energy, ConstantMode};
use lp_sobolev::{lp_surface_measure, par, solve, solve_normalized, Error, LinearMap, SolverConfig, SphericalQuadrature};

const SCHEMAS: &str = "\
JSON schemas (floats are written in shortest round-trip form):
  polytope  {\"dim\": 2|3, \"normals\": [[f64; n]], \"offsets\": [f64]}
            normals need not be unit; they are normalised on load
  measure   {\"dim\": n, \"atoms\": [{\"u\": [f64; n], \"w\": f64}]}
  function  {\"dim\": n, \"vertices\": [[f64; n]], \"simplices\": [[usize; n+1]],
             \"values\": [f64], \"gradients\"?: [[f64; n+1]]}
            values vanish on the boundary of the support
  radial    {\"dim\": n, \"shape\": <polytope> | \"ball\", \"profile\": [[s, f*(s)]]}
  map       [[f64; n]; n]   (rows of a matrix)
  suite     {\"corpora\": [{\"dim\", \"count\", \"seed\", \"generator\", \"checks\",
             \"p_range\"?, \"lambda_range\"?, \"level\"?, \"cells\"?}]}
            generator: random-polytope | random-pwa | cone-family |
                       radial-family | ball-proxy | adversarial

Exit codes: 0 success, 1 a theorem-backed check failed, 2 input or geometry
error, 3 solver did not converge. Errors are printed to stderr as JSON
{\"kind\": \"input\" | \"geometry\" | \"solver\", \"message\": ...}.";

#[derive(Parser, Debug)]
#[command(name = "sobolev", version, about = "L_p Minkowski problems, Sobolev bodies and affine energy inequalities", after_help = SCHEMAS)]
struct Cli {
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SolverFlags {
    /// Iteration cap of the Newton solver.
    #[arg(long, env = "SOBOLEV_MAX_ITERS", default_value_t = 5000)]
    max_iters: usize,
    /// Gradient tolerance of the Newton solver.
    #[arg(long, env = "SOBOLEV_GRAD_TOL", default_value_t = 1e-10)]
    grad_tol: f64,
    /// Required per-atom relative residual.
    #[arg(long, env = "SOBOLEV_RESIDUAL_TOL", default_value_t = 1e-8)]
    residual_tol: f64,
}

impl SolverFlags {
    fn config(&self, p: f64) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            residual_tol: self.residual_tol,
            ..SolverConfig::new(p)
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the discrete L_p Minkowski problem for a measure.
    SolveMinkowski {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        p: f64,
        /// Solve the scale-free problem S_n(P)/|P| = μ.
        #[arg(long)]
        normalized: bool,
        #[arg(long)]
        out: PathBuf,
        /// Solver trace CSV (iter, objective, residual, step).
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Optimal Sobolev body of a piecewise-affine function.
    SobolevBody {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        normalized: bool,
        /// Output polytope; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Affine energy of a piecewise-affine function.
    AffineEnergy {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Spherical quadrature level.
        #[arg(long, env = "SOBOLEV_LEVEL", default_value_t = 4)]
        level: usize,
        #[arg(long, value_enum, default_value_t = Mode::Calibrated)]
        mode: Mode,
    },
    /// Decreasing rearrangement with a ball or polytope shape.
    Symmetrize {
        #[arg(long = "fn")]
        function: PathBuf,
        /// Level-set shape; the Euclidean ball when absent.
        #[arg(long)]
        shape: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one check on explicit inputs and print its result.
    Check {
        #[arg(value_parser = parse_check)]
        name: CheckKind,
        /// First polytope.
        #[arg(long)]
        k: Option<PathBuf>,
        /// Second polytope.
        #[arg(long)]
        l: Option<PathBuf>,
        #[arg(long = "fn")]
        function: Option<PathBuf>,
        /// Second function.
        #[arg(long = "gn")]
        second: Option<PathBuf>,
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Linear map for the equivariance check.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, env = "SOBOLEV_LEVEL", default_value_t = 4)]
        level: usize,
    },
    /// Run a seeded verification suite.
    Suite {
        /// Suite spec; the shipped default suite when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Full JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Flat CSV report.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Keep wall-clock times in the JSON report.
        #[arg(long)]
        runtime: bool,
        /// Print the default suite spec and exit.
        #[arg(long)]
        print_default: bool,
    },
    /// Plot-ready CSV.
    ExportPlot {
        #[command(subcommand)]
        what: Plot,
    },
}

#[derive(Subcommand, Debug)]
enum Plot {
    /// Ratio histogram per check from a suite report.
    Histogram {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solver trace for a measure or a function's gradient measure.
    Trace {
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long = "fn")]
        function: Option<PathBuf>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Decreasing rearrangement profile (s, f_star, slope).
    Profile {
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Calibrated,
    BallVolumes,
    Raw,
}

impl From<Mode> for ConstantMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Calibrated => ConstantMode::Calibrated,
            Mode::BallVolumes => ConstantMode::BallVolumes,
            Mode::Raw => ConstantMode::Raw,
        }
    }
}

fn parse_check(s: &str) -> Result<CheckKind, String> {
    CheckKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = CheckKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown check {s:?}; expected one of {}", names.join(", "))
    })
}

enum Failure {
    Lib(Error),
    /// An error caught inside a check and kept in its result.
    Recorded(checks::ErrorEntry),
    Checks(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    kind: &'a str,
    message: String,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn need<'a>(path: &'a Option<PathBuf>, flag: &str, check: CheckKind) -> Result<&'a Path, Error> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidParameter(format!("{} needs --{flag}", check.name())))
}

fn run_check(
    name: CheckKind,
    files: [&Option<PathBuf>; 6],
    p: f64,
    lambda: f64,
    level: usize,
) -> Result<CheckResult, Error> {
    let [k, l, f, g, measure, map] = files;
    let poly = |path: &Option<PathBuf>, flag| need(path, flag, name).and_then(io::load_polytope);
    let func = |path: &Option<PathBuf>, flag| need(path, flag, name).and_then(io::load_function);
    let dim = |d: usize| SphericalQuadrature::build(d, level);
    Ok(match name {
        CheckKind::Minkowski => checks::check_minkowski_ineq(&poly(k, "k")?, &poly(l, "l")?, p),
        CheckKind::Petty => {
            let k = poly(k, "k")?;
            checks::check_petty(&k, p, lambda, &dim(k.dim())?)
        }
        CheckKind::SobolevBody => checks::check_sobolev_body_ineq(&func(f, "fn")?, p),
        CheckKind::AffineSobolev => {
            let f = func(f, "fn")?;
            checks::check_general_affine_sobolev(&f, p, lambda, &dim(f.dim())?)
        }
        CheckKind::PolyaSzego => {
            let f = func(f, "fn")?;
            checks::check_polya_szego(&f, p, lambda, &dim(f.dim())?)
        }
        CheckKind::Valuation => checks::check_valuation(&func(f, "fn")?, &func(g, "gn")?, p),
        CheckKind::Morrey => {
            let f = func(f, "fn")?;
            checks::check_morrey(&f, p, lambda, &dim(f.dim())?)
        }
        CheckKind::MoserTrudinger => {
            let f = func(f, "fn")?;
            checks::check_moser_trudinger(&f, lambda, &dim(f.dim())?)
        }
        CheckKind::ConeRoundTrip => checks::check_cone_round_trip(&poly(k, "k")?, p),
        CheckKind::SolverRoundTrip => match measure {
            Some(path) => {
                let expected = k.as_deref().map(io::load_polytope).transpose()?;
                checks::check_solver_round_trip(&io::load_measure(path)?, expected.as_ref(), p, None)
            }
            None => {
                let k = poly(k, "k")?;
                checks::check_solver_round_trip(&lp_surface_measure(&k, p), Some(&k), p, None)
            }
        },
        CheckKind::SlEquivariance => {
            let f = func(f, "fn")?;
            let rows: Vec<Vec<f64>> = read_json(need(map, "map", name)?)?;
            checks::check_sl_equivariance(&f, &LinearMap::new(f.dim(), &rows)?, p)
        }
        CheckKind::SymmetralBody => checks::check_symmetral_body(&func(f, "fn")?, &poly(k, "k")?, &poly(l, "l")?, p),
        CheckKind::SymmetralEnergy => checks::check_symmetral_energy(&func(f, "fn")?, &poly(k, "k")?, p),
        CheckKind::SymmetralContainment => checks::check_symmetral_containment(&func(f, "fn")?, p),
    })
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::SolveMinkowski {
            measure,
            p,
            normalized,
            out,
            trace,
            solver,
        } => {
            let mu = io::load_measure(&measure)?;
            let cfg = solver.config(p);
            let (body, tr) = if normalized { solve_normalized(&mu, &cfg)? } else { solve(&mu, &cfg)? };
            io::save_polytope(&out, &body)?;
            if let Some(path) = trace {
                write_text(&path, &tr.to_csv())?;
            }
        }
        Command::SobolevBody {
            function,
            p,
            normalized,
            out,
            trace,
            solver,
        } => {
            let f = io::load_function(&function)?;
            let cfg = solver.config(p);
            let (body, tr) = if normalized {
                pwa::sobolev_body_normalized(&f, &cfg)?
            } else {
                pwa::sobolev_body(&f, &cfg)?
            };
            match out {
                Some(path) => io::save_polytope(&path, &body)?,
                None => print!("{}", to_json(&io::PolytopeJson::from(&body))?),
            }
            if let Some(path) = trace {
                write_text(&path, &tr.to_csv())?;
            }
        }
        Command::AffineEnergy {
            function,
            p,
            lambda,
            level,
            mode,
        } => {
            let f = io::load_function(&function)?;
            let q = SphericalQuadrature::build(f.dim(), level)?;
            print!("{}", to_json(&affine_energy(&f, lambda, p, &q, mode.into())?)?);
        }
        Command::Symmetrize {
            function,
            shape,
            grid,
            out,
        } => {
            let f = io::load_function(&function)?;
            let g = match shape {
                Some(path) => convex_symmetrization(&f, &io::load_polytope(&path)?, grid)?,
                None => symmetric_rearrangement(&f, grid)?,
            };
            io::save_radial(&out, &g)?;
        }
        Command::Check {
            name,
            k,
            l,
            function,
            second,
            measure,
            map,
            p,
            lambda,
            level,
        } => {
            let mut r = run_check(name, [&k, &l, &function, &second, &measure, &map], p, lambda, level)?;
            r.runtime_ms = None;
            print!("{}", to_json(&r)?);
            if let Some(e) = r.error {
                return Err(Failure::Recorded(e));
            }
            if r.is_violation() {
                return Err(Failure::Checks(1));
            }
        }
        Command::Suite {
            spec,
            out,
            csv,
            runtime,
            print_default,
        } => {
            if print_default {
                print!("{}", to_json(&SuiteSpec::default_suite())?);
                return Ok(());
            }
            let suite = match spec {
                Some(path) => read_json::<SuiteSpec>(&path)?,
                None => SuiteSpec::default_suite(),
            };
            let report = SuiteReport::new(run_suite_spec(&suite)?);
            for (name, s) in &report.summary {
                eprintln!(
                    "{name}: {} total, {} passed, {} violations, {} errors",
                    s.total, s.passed, s.violations, s.errors
                );
            }
            if let Some(path) = out {
                write_text(&path, &report.to_json(runtime)?)?;
            }
            if let Some(path) = csv {
                write_text(&path, &report.to_csv())?;
            }
            let v = report.violations();
            if v > 0 {
                return Err(Failure::Checks(v));
            }
        }
        Command::ExportPlot { what } => match what {
            Plot::Histogram { report, bins, out } => {
                let report: SuiteReport = read_json(&report)?;
                emit(out.as_deref(), &report.ratio_histogram_csv(bins))?;
            }
            Plot::Trace {
                measure,
                function,
                p,
                out,
                solver,
            } => {
                let mu = match (measure, function) {
                    (Some(m), None) => io::load_measure(&m)?,
                    (None, Some(f)) => pwa::gradient_measure(&io::load_function(&f)?, p)?,
                    _ => return Err(Error::InvalidParameter("give exactly one of --measure and --fn".into()).into()),
                };
                let (_, tr) = solve(&mu, &solver.config(p))?;
                emit(out.as_deref(), &tr.to_csv())?;
            }
            Plot::Profile { function, grid, out } => {
                let f = io::load_function(&function)?;
                emit(out.as_deref(), &decreasing_rearrangement(&f, grid)?.to_csv())?;
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    match par::with_jobs(jobs, || dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(n)) => {
            eprintln!("{n} theorem-backed check(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            let code = if matches!(e, Error::NotConverged { .. }) { 3 } else { 2 };
            fail(e.kind(), e.to_string(), code)
        }
        Err(Failure::Recorded(e)) => {
            let code = if e.kind == "solver" { 3 } else { 2 };
            fail(&e.kind, e.message, code)
        }
    }
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    let report = ErrorReport { kind, message };
    eprintln!("{}", serde_json::to_string(&report).unwrap_or_default());
    ExitCode::from(code)
}
