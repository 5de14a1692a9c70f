//! Command-line front end. `run` is the whole program; the binary only forwards to it.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::attractors::{find_limit_cycle, largest_lyapunov, period_doubling_scan, PdScanSettings, CLUSTER_TOL};
use crate::equilibria::{find_equilibria, hopf_curve, HopfBranch};
use crate::error::Error;
use crate::integrator::integrate;
use crate::model::{Parameters, State};
use crate::output::{write_hopf_curve, write_json, write_pd_scan, write_sweep, write_time_series, Metadata};
use crate::sweep::{named_ic, sweep_plane, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_PARAMETER: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;
pub const EXIT_IO: i32 = 6;

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  2  usage error (unknown flag, bad value)
  3  configuration error (unreadable or malformed config file)
  4  invalid model parameter or initial condition
  5  numerical failure (step-size underflow, divergence, no periodic orbit, ...)
  6  output could not be written

Failures print one JSON object {\"error\": {\"kind\", \"code\", \"message\"}} as the last line on stderr.
The worker count of `sweep` can be set with the environment variable FHN_PAIR_THREADS.";

#[derive(Debug, Parser)]
#[command(name = "fhn-pair", version, about = "Two FitzHugh-Nagumo elements with phase-sector coupling", after_help = EXIT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory and write the post-transient time series as CSV.
    #[command(after_help = EXIT_HELP)]
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        start: Start,
        /// Resample at this spacing instead of writing the integrator's steps.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// List all equilibria with spectra and stability as JSON.
    #[command(after_help = EXIT_HELP)]
    Equilibria {
        #[command(flatten)]
        common: Common,
    },
    /// Trace Andronov-Hopf curves over a delta grid as CSV.
    #[command(name = "hopf-curve", after_help = EXIT_HELP)]
    HopfCurve {
        #[command(flatten)]
        common: Common,
        /// in-phase, anti-phase or both.
        #[arg(long, default_value = "both")]
        branch: String,
        #[arg(long, default_value_t = 1.0)]
        delta_start_deg: f64,
        #[arg(long, default_value_t = 90.0)]
        delta_end_deg: f64,
        #[arg(long, default_value_t = 90)]
        delta_points: usize,
    },
    /// Locate the periodic attractor reached from a start state; JSON.
    #[command(after_help = EXIT_HELP)]
    Cycle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        start: Start,
    },
    /// Largest Lyapunov exponent from a start state; JSON.
    #[command(after_help = EXIT_HELP)]
    Lyapunov {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        start: Start,
    },
    /// Section x1 values along alpha for both swap-conjugate seeds as CSV.
    #[command(name = "pd-scan", after_help = EXIT_HELP)]
    PdScan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        start: Start,
        #[arg(long, default_value_t = 212.0)]
        alpha_start_deg: f64,
        #[arg(long, default_value_t = 215.0)]
        alpha_end_deg: f64,
        #[arg(long, default_value_t = 601)]
        points: usize,
        #[arg(long, default_value_t = 256)]
        discard: usize,
        #[arg(long, default_value_t = 256)]
        record: usize,
    },
    /// Classify the standard initial conditions over an (alpha, delta) grid as CSV.
    #[command(after_help = EXIT_HELP)]
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha_start_deg: Option<f64>,
        #[arg(long)]
        alpha_end_deg: Option<f64>,
        #[arg(long)]
        alpha_points: Option<usize>,
        #[arg(long)]
        delta_start_deg: Option<f64>,
        #[arg(long)]
        delta_end_deg: Option<f64>,
        #[arg(long)]
        delta_points: Option<usize>,
        /// Seed of the random initial conditions.
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Options shared by all subcommands; flags override the config file.
#[derive(Debug, Args)]
struct Common {
    /// TOML file with [parameters], [integrator], [grid], [initial_conditions], [output].
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    alpha_deg: Option<f64>,
    #[arg(long)]
    delta_deg: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    t_transient: Option<f64>,
    #[arg(long)]
    t_observe: Option<f64>,
    /// Output file (standard output if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let p = &mut cfg.parameters;
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.alpha_deg, self.alpha_deg);
        set(&mut p.delta_deg, self.delta_deg);
        set(&mut p.a, self.a);
        set(&mut p.eps, self.eps);
        set(&mut p.k, self.k);
        set(&mut p.g, self.g);
        let i = &mut cfg.integrator;
        set(&mut i.rel_tol, self.rel_tol);
        set(&mut i.abs_tol, self.abs_tol);
        set(&mut i.max_step, self.max_step);
        set(&mut i.t_transient, self.t_transient);
        set(&mut i.t_observe, self.t_observe);
        if self.output.is_some() {
            cfg.output.path = self.output.clone();
        }
        cfg.params()?;
        cfg.integrator.validate()?;
        Ok(cfg)
    }
}

/// Start state: a member of the standard set or explicit coordinates.
#[derive(Debug, Args)]
struct Start {
    /// sym, anti, kick1, kick2 or random0..random3 [default: anti, kick1 for pd-scan].
    #[arg(long)]
    ic: Option<String>,
    /// Explicit start "x1,y1,x2,y2"; overrides --ic.
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// Seed of the random initial conditions.
    #[arg(long)]
    seed: Option<u64>,
}

impl Start {
    fn resolve(&self, p: &Parameters, cfg: &RunConfig, default_ic: &str) -> Result<(State, u64), Error> {
        let seed = self.seed.unwrap_or(cfg.initial_conditions.seed);
        if let Some(text) = &self.state {
            let v: Vec<f64> = text
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| Error::InvalidParameter(format!("--state: {e}")))?;
            if v.len() != 4 || !v.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidParameter("--state needs four finite numbers".into()));
            }
            return Ok((State::new(v[0], v[1], v[2], v[3]), seed));
        }
        Ok((named_ic(self.ic.as_deref().unwrap_or(default_ic), p, seed)?, seed))
    }
}

enum Failure {
    Model(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code_and_kind(&self) -> (i32, &'static str) {
        match self {
            Failure::Io(_) => (EXIT_IO, "io"),
            Failure::Model(e) => match e {
                Error::Config(_) => (EXIT_CONFIG, "config"),
                Error::InvalidParameter(_) | Error::PhaseUndefined => (EXIT_PARAMETER, "parameter"),
                _ => (EXIT_NUMERICAL, "numerical"),
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(e) => e.to_string(),
            Failure::Model(e) => e.to_string(),
        }
    }
}

fn error_line(kind: &str, code: i32, message: &str) -> String {
    json!({ "error": { "kind": kind, "code": code, "message": message } }).to_string()
}

/// Runs the program on `args` (including the program name) with the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// Like [`run`], writing standard output and error to the given sinks.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return EXIT_OK;
            }
            let _ = write!(stderr, "{}", e.render());
            let _ = writeln!(stderr, "{}", error_line("usage", EXIT_USAGE, &e.kind().to_string()));
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let (code, kind) = f.code_and_kind();
            let _ = writeln!(stderr, "{}", error_line(kind, code, &f.message()));
            code
        }
    }
}

fn sink<'a>(cfg: &RunConfig, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, Failure> {
    Ok(match &cfg.output.path {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(stdout),
    })
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Simulate { common, start, dt } => {
            let cfg = common.resolve()?;
            let p = cfg.params()?;
            let (s0, _) = start.resolve(&p, &cfg, "anti")?;
            let traj = integrate(s0, &p, &cfg.integrator)?;
            let mut w = sink(&cfg, stdout)?;
            match dt {
                Some(dt) if dt > 0.0 => write_time_series(&mut w, traj.resample(dt))?,
                Some(_) => return Err(Error::InvalidParameter("--dt must be positive".into()).into()),
                None => write_time_series(&mut w, traj.samples())?,
            }
            w.flush()?;
        }
        Command::Equilibria { common } => {
            let cfg = common.resolve()?;
            let p = cfg.params()?;
            let eqs = find_equilibria(&p)?;
            let residuals = eqs.iter().map(|e| e.residual(&p)).collect::<Result<Vec<_>, _>>()?;
            let rows: Vec<_> = eqs
                .iter()
                .zip(&residuals)
                .map(|(e, r)| json!({ "equilibrium": e, "residual": r }))
                .collect();
            let mut w = sink(&cfg, stdout)?;
            write_json(&mut w, &Metadata::new(&p, &cfg.integrator, cfg.initial_conditions.seed), "equilibria", &rows)?;
            w.flush()?;
        }
        Command::HopfCurve {
            common,
            branch,
            delta_start_deg,
            delta_end_deg,
            delta_points,
        } => {
            let cfg = common.resolve()?;
            let p = cfg.params()?;
            let branches = match branch.as_str() {
                "both" => vec![HopfBranch::InPhase, HopfBranch::AntiPhase],
                other => vec![other.parse::<HopfBranch>()?],
            };
            let grid: Vec<f64> = crate::attractors::linspace(delta_start_deg, delta_end_deg, delta_points)
                .into_iter()
                .map(f64::to_radians)
                .collect();
            let mut points = Vec::new();
            for b in branches {
                points.extend(hopf_curve(b, &grid, &p)?);
            }
            let mut w = sink(&cfg, stdout)?;
            write_hopf_curve(&mut w, &points)?;
            w.flush()?;
        }
        Command::Cycle { common, start } => {
            let cfg = common.resolve()?;
            let p = cfg.params()?;
            let (s0, seed) = start.resolve(&p, &cfg, "anti")?;
            let cycle = find_limit_cycle(s0, &p, &cfg.integrator)?;
            let mut w = sink(&cfg, stdout)?;
            write_json(&mut w, &Metadata::new(&p, &cfg.integrator, seed), "cycle", &cycle)?;
            w.flush()?;
        }
        Command::Lyapunov { common, start } => {
            let cfg = common.resolve()?;
            let p = cfg.params()?;
            let (s0, seed) = start.resolve(&p, &cfg, "anti")?;
            let lambda = largest_lyapunov(s0, &p, &cfg.integrator)?;
            let mut w = sink(&cfg, stdout)?;
            let body = json!({ "exponent": lambda, "start": s0 });
            write_json(&mut w, &Metadata::new(&p, &cfg.integrator, seed), "lyapunov", &body)?;
            w.flush()?;
        }
        Command::PdScan {
            common,
            start,
            alpha_start_deg,
            alpha_end_deg,
            points,
            discard,
            record,
        } => {
            let cfg = common.resolve()?;
            let base = cfg.params()?;
            let delta_deg = cfg.parameters.delta_deg;
            let first = base.with_sector_deg(alpha_start_deg, delta_deg)?;
            let (seed, _) = start.resolve(&first, &cfg, "kick1")?;
            let mut integrator = cfg.integrator;
            if common.t_observe.is_none() {
                integrator.t_observe = integrator.t_observe.max(PdScanSettings::default().integrator.t_observe);
            }
            let settings = PdScanSettings {
                discard,
                record,
                integrator,
            };
            let scan = period_doubling_scan(delta_deg, (alpha_start_deg, alpha_end_deg), points, seed, &first, &settings)?;
            for pt in scan.points.iter().filter(|pt| pt.flagged()) {
                let reason = pt.failures.iter().flatten().next().cloned().unwrap_or_default();
                let _ = writeln!(stderr, "warning: alpha_deg {} flagged: {reason}", pt.alpha_deg);
            }
            let summary = scan.summary(CLUSTER_TOL);
            let _ = writeln!(stderr, "{}", json!({ "summary": summary }));
            let mut w = sink(&cfg, stdout)?;
            write_pd_scan(&mut w, &scan)?;
            w.flush()?;
        }
        Command::Sweep {
            common,
            alpha_start_deg,
            alpha_end_deg,
            alpha_points,
            delta_start_deg,
            delta_end_deg,
            delta_points,
            seed,
        } => {
            let mut cfg = common.resolve()?;
            let g = &mut cfg.grid;
            g.alpha_start_deg = alpha_start_deg.unwrap_or(g.alpha_start_deg);
            g.alpha_end_deg = alpha_end_deg.unwrap_or(g.alpha_end_deg);
            g.alpha_points = alpha_points.unwrap_or(g.alpha_points);
            g.delta_start_deg = delta_start_deg.unwrap_or(g.delta_start_deg);
            g.delta_end_deg = delta_end_deg.unwrap_or(g.delta_end_deg);
            g.delta_points = delta_points.unwrap_or(g.delta_points);
            if let Some(s) = seed {
                cfg.initial_conditions.seed = s;
            }
            let cells = sweep_plane(&cfg)?;
            let mut w = sink(&cfg, stdout)?;
            write_sweep(&mut w, &cells)?;
            w.flush()?;
        }
    }
    Ok(())
}
