//! Command-line driver: verification suites, kernel export, and the drift,
//! coercivity, optimization and finite-dimensional experiments.

pub mod config;
pub mod error;
pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use burgers_drift::burgers::{drift_experiment, AmplitudePolicy, Resolution};
use burgers_drift::coercivity::coercivity_constant;
use burgers_drift::control_opt::{attempt_null_control, OptSettings};
use burgers_drift::kernel::{assemble_k0, assemble_k_eps, KernelQuadrature};
use burgers_drift::GramOperator;
use clap::{Parser, Subcommand, ValueEnum};

use config::Config;
use error::{CliError, Result, EXIT_CHECK_FAILED, EXIT_PASS};
use report::Report;
use suites::{apply_checks, FindimExample, Suite};

/// Environment variable holding the worker thread count (default 1).
pub const THREADS_ENV: &str = "BURGERS_DRIFT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "burgers-drift", version, about = "Quadratic drift of viscous Burgers under a scalar control")]
struct Cli {
    /// Key-value file overriding defaults; flags override the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write the report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
    /// Kernel matrices.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// Coercivity constants of the rescaled kernel against the Riesz Gram form.
    #[command(allow_negative_numbers = true)]
    Coercivity {
        /// Viscosities; 0 selects the asymptotic kernel.
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        quad: Option<String>,
    },
    /// Sign of the drift along rho under seeded small controls.
    #[command(allow_negative_numbers = true)]
    Drift {
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_x: Option<usize>,
        #[arg(long)]
        n_t: Option<usize>,
    },
    /// Projected-gradient attempt to steer `delta rho` to rest.
    #[command(allow_negative_numbers = true)]
    Optimize {
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_x: Option<usize>,
        #[arg(long)]
        n_t: Option<usize>,
        /// Iteration log as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Finite-dimensional chain examples.
    Findim {
        #[arg(long, value_enum)]
        example: Option<FindimExample>,
    },
}

#[derive(Debug, Subcommand)]
enum KernelAction {
    /// Write the kernel matrix on midpoint nodes as CSV.
    #[command(allow_negative_numbers = true)]
    Assemble {
        /// Viscosity; 0 selects the asymptotic kernel.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        quad: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::InvalidParameter(what.to_string()))
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn quadrature(flag: Option<String>, cfg: &Config) -> Result<KernelQuadrature> {
    match flag.or_else(|| cfg.raw("quad").map(str::to_string)) {
        Some(q) => Ok(KernelQuadrature::parse(&q)?),
        None => Ok(KernelQuadrature::default()),
    }
}

fn enum_value<E: ValueEnum>(flag: Option<E>, cfg: &Config, key: &str, default: E) -> Result<E> {
    match (flag, cfg.raw(key)) {
        (Some(v), _) => Ok(v),
        (None, Some(raw)) => E::from_str(raw, true).map_err(|_| CliError::Config(format!("`{key}`: unknown value `{raw}`"))),
        (None, None) => Ok(default),
    }
}

fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, found `{v}`"))),
        },
    }
}

fn execute(command: Command, cfg: &Config) -> Result<Report> {
    let mut report = match command {
        Command::Verify { suite } => {
            let suite = enum_value(suite, cfg, "suite", Suite::All)?;
            suites::run_suite(suite)?
        }
        Command::Kernel { action: KernelAction::Assemble { eps, nodes, quad, out } } => {
            let eps = cfg.pick(eps, "eps", 1e-2)?;
            let nodes = cfg.pick(nodes, "nodes", 32)?;
            let quad = quadrature(quad, cfg)?;
            let out = out.ok_or_else(|| CliError::Usage("kernel assemble needs --out PATH".into()))?;
            require((0.0..=1.0).contains(&eps), "eps must lie in [0, 1]")?;
            require(nodes >= 1, "nodes must be at least 1")?;
            let k = if eps == 0.0 { assemble_k0(nodes)? } else { assemble_k_eps(eps, nodes, quad)? };
            write_file(&out, &k.to_csv())?;
            let mut r = Report::new("kernel.assemble");
            r.param("eps", eps);
            r.param("nodes", nodes);
            r.param("quad", quad);
            r.param("out", out.display());
            r.metric("frobenius_norm", k.frobenius_norm());
            r.metric("matrix_asymmetry", suites::asymmetry(&k));
            r
        }
        Command::Coercivity { eps_list, nodes, quad } => {
            let eps_list = match eps_list {
                Some(v) => v,
                None => cfg.get_list("eps_list")?.unwrap_or_else(|| vec![1e-1, 1e-2]),
            };
            let nodes = cfg.pick(nodes, "nodes", 32)?;
            let quad = quadrature(quad, cfg)?;
            require(!eps_list.is_empty(), "eps_list must not be empty")?;
            require(eps_list.iter().all(|&e| (0.0..=1.0).contains(&e)), "every eps must lie in [0, 1]")?;
            require(nodes >= 2, "nodes must be at least 2")?;
            let gram = GramOperator::new(nodes)?;
            let mut r = Report::new("coercivity");
            r.param("eps_list", eps_list.iter().map(|e| format!("{e:?}")).collect::<Vec<_>>().join(","));
            r.param("nodes", nodes);
            r.param("quad", quad);
            let mut min = f64::INFINITY;
            for &eps in &eps_list {
                let c = if eps == 0.0 {
                    coercivity_constant(&assemble_k0(nodes)?, &gram)?
                } else {
                    coercivity_constant(&assemble_k_eps(eps, nodes, quad)?.scaled(1.0 / eps.sqrt()), &gram)?
                };
                r.metric(&format!("coercivity_constant.{eps:?}"), c);
                min = min.min(c);
            }
            r.metric("min_coercivity_constant", min);
            r
        }
        Command::Drift { eps, samples, seed, n_x, n_t } => {
            let eps = cfg.pick(eps, "eps", 1e-2)?;
            let samples = cfg.pick(samples, "samples", 10)?;
            let seed = cfg.pick(seed, "seed", 0)?;
            let defaults = Resolution::default();
            let res = Resolution { n_x: cfg.pick(n_x, "n_x", defaults.n_x)?, n_t: cfg.pick(n_t, "n_t", defaults.n_t)? };
            require(eps > 0.0 && eps <= 0.1, "eps must lie in (0, 0.1]")?;
            require(samples >= 1, "samples must be at least 1")?;
            require(res.n_x >= 3 && res.n_t >= 1, "need n_x >= 3 and n_t >= 1")?;
            let policy = AmplitudePolicy::Uniform { lo: 0.1, hi: 1.0 };
            let drift = drift_experiment(eps, samples, seed, policy, res)?;
            let mut r = Report::new("drift");
            r.param("eps", eps);
            r.param("samples", samples);
            r.param("seed", seed);
            r.param("n_x", res.n_x);
            r.param("n_t", res.n_t);
            let min = drift.records.iter().filter_map(|d| d.projection).fold(f64::INFINITY, f64::min);
            r.metric("drift_min_projection", min);
            r.metric("drift_failed_solves", drift.failures() as f64);
            if let Some(k2) = drift.k2 {
                r.metric("drift_min_ratio", k2);
            }
            r
        }
        Command::Optimize { delta, horizon, eta, iters, seed, n_x, n_t, trace } => {
            let delta = cfg.pick(delta, "delta", 1e-3)?;
            let horizon = cfg.pick(horizon, "horizon", 1e-2)?;
            let eta = cfg.pick(eta, "eta", 1.0)?;
            let iters = cfg.pick(iters, "iters", 100)?;
            let seed = cfg.pick(seed, "seed", 0)?;
            let defaults = OptSettings::default();
            let settings = OptSettings { n_x: cfg.pick(n_x, "n_x", defaults.n_x)?, n_t: cfg.pick(n_t, "n_t", defaults.n_t)?, ..defaults };
            require(delta > 0.0, "delta must be positive")?;
            require(horizon > 0.0 && eta > 0.0, "horizon and eta must be positive")?;
            require(iters >= 1, "iters must be at least 1")?;
            require(settings.n_x >= 3 && settings.n_t >= 1, "need n_x >= 3 and n_t >= 1")?;
            let run = attempt_null_control(delta, horizon, eta, iters, seed, settings)?;
            if let Some(path) = &trace {
                write_file(path, &run.trace_csv())?;
            }
            let mut r = Report::new("optimize");
            r.param("delta", delta);
            r.param("horizon", horizon);
            r.param("eta", eta);
            r.param("iters", iters);
            r.param("seed", seed);
            r.param("n_x", settings.n_x);
            r.param("n_t", settings.n_t);
            r.param("status", format!("{:?}", run.status));
            r.metric("initial_cost", run.costs[0]);
            r.metric("final_cost", *run.costs.last().unwrap_or(&f64::NAN));
            r.metric("iterations", (run.costs.len() - 1) as f64);
            r.metric("control_l2", run.control.l2_norm());
            r.metric("final_projection", run.final_projection());
            r.metric("final_norm_ratio", run.final_norm / (delta * run.rho_norm));
            r
        }
        Command::Findim { example } => {
            let mut r = Report::new("findim");
            let example = match (example, cfg.raw("example")) {
                (Some(e), _) => Some(e),
                (None, Some(_)) => Some(enum_value(None, cfg, "example", FindimExample::Conservation)?),
                (None, None) => None,
            };
            r.param("example", example.and_then(|e| e.to_possible_value()).map_or("all".to_string(), |v| v.get_name().to_string()));
            suites::findim(&mut r, example)?;
            r
        }
    };
    apply_checks(&mut report, cfg);
    Ok(report)
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { error::EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match run_cli(cli) {
        Ok(report) => {
            print!("{report}");
            for c in report.failures() {
                eprintln!("check failed: {}: {}", c.tag, c.describe(report.metrics[&c.metric]));
            }
            if report.passed() {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("burgers-drift: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: Cli) -> Result<Report> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::InvalidParameter(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut report = pool.install(|| execute(cli.command, &cfg))?;
    report.duration_s = start.elapsed().as_secs_f64();
    if let Some(path) = &cli.report {
        write_file(path, &report.to_string())?;
    }
    Ok(report)
}
