use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use retrialcap::config::Config;
use retrialcap::measures::{EvalOptions, OrbitSum};
use retrialcap::optimize::{self, Evaluator, O3Strategy, QosTargets, SearchMode, Share};
use retrialcap::output::{self, Format};
use retrialcap::sweep::{self, Axis, SweepRow};
use retrialcap::validate::{self, ValidateOptions};
use retrialcap::{build_generator, Error, Execution, Method, ModelParams};

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_CHECK_FAILED: u8 = 1;

const CONFIG_KEYS: &[&str] = &[
    "c", "g", "m", "lambda_n", "lambda_h", "nu", "p", "mu_r", "format", "output", "jobs", "method",
    "seed", "pd0", "pb0", "x", "m_cap", "axis", "axis2",
];

#[derive(Parser)]
#[command(name = "retrialcap", version, about = "Guard-channel cell with a finite retrial orbit: loss probabilities and capacity planning")]
struct Cli {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write results here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    /// Worker threads for sweeps and batched searches.
    #[arg(long, global = true, env = "RETRIALCAP_JOBS")]
    jobs: Option<usize>,
    /// Stationary solver: replace-column (default) or gth.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Sum M_o over levels j >= 1 only.
    #[arg(long, global = true)]
    orbit_from_level_one: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default, Clone)]
struct ParamArgs {
    #[arg(long)]
    c: Option<u32>,
    #[arg(long)]
    g: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    lambda_n: Option<f64>,
    #[arg(long)]
    lambda_h: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    mu_r: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and print its five measures.
    Evaluate {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Evaluate a one- or two-axis grid.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// `name=start:stop:step` or `name=v1,v2,...`; repeat for a second axis.
        #[arg(long = "axis")]
        axes: Vec<String>,
    },
    /// Run a capacity-planning search.
    Optimize(OptimizeArgs),
    /// Cross-check the solver against independent oracles.
    Validate {
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated time per configuration.
        #[arg(long, default_value_t = 5e4)]
        horizon: f64,
        /// Perturb one diagonal entry of every checked generator.
        #[arg(long, num_args = 0..=1, default_missing_value = "1e-6")]
        inject_fault: Option<f64>,
    },
    /// Write the generator in coordinate format.
    DumpQ {
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    #[value(name = "o1-algI", alias = "o1-algi")]
    O1AlgI,
    #[value(name = "o1-algII", alias = "o1-algii")]
    O1AlgII,
    O2,
    O3,
    O4,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    #[value(name = "paper-iv")]
    PaperIv,
}

#[derive(Args)]
struct OptimizeArgs {
    problem: ProblemArg,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    pd0: Option<f64>,
    #[arg(long)]
    pb0: Option<f64>,
    /// Percentage of c: guard channels for o1-algI, o2 and o4, orbit size
    /// for o1-algII. Overridden by an explicit --g / --m.
    #[arg(long)]
    x: Option<f64>,
    /// Upper end of the m search (default 2c).
    #[arg(long)]
    m_cap: Option<u32>,
    /// Largest orbit size considered by o3.
    #[arg(long, default_value_t = 0)]
    m_max: u32,
    #[arg(long)]
    c_min: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    c_max: u32,
    #[arg(long, value_enum, default_value = "exhaustive")]
    strategy: StrategyArg,
    /// Evaluate every candidate instead of bisecting.
    #[arg(long)]
    linear: bool,
    /// Include every evaluated triple in the output.
    #[arg(long)]
    trace: bool,
}

struct Context {
    file: Config,
    format: Format,
    output: Option<PathBuf>,
    opts: EvalOptions,
    exec: Execution,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE })
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let file = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    file.check_keys(CONFIG_KEYS)?;

    let format = match cli.format.as_deref().or(file.get("format")) {
        Some(s) => s.parse()?,
        None => Format::default(),
    };
    let method = match cli.method.as_deref().or(file.get("method")) {
        Some(s) => s.parse()?,
        None => Method::default(),
    };
    let jobs = match cli.jobs {
        Some(j) => Some(j),
        None => file.parse_value::<usize>("jobs")?,
    };
    let exec = match jobs {
        Some(1) => Execution::Sequential,
        Some(j) => {
            retrialcap::exec::configure_threads(j)?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let ctx = Context {
        output: cli.output.clone().or_else(|| file.get("output").map(PathBuf::from)),
        file,
        format,
        opts: EvalOptions {
            method,
            orbit_sum: if cli.orbit_from_level_one {
                OrbitSum::FromLevelOne
            } else {
                OrbitSum::AllLevels
            },
        },
        exec,
    };

    match cli.command {
        Command::Evaluate { params } => {
            let p = resolve_params(&params, &ctx.file, &[])?;
            let rows = sweep::run_sweep(&p, &[], ctx.opts, Execution::Sequential)?;
            emit_rows(&ctx, &rows)?;
            Ok(0)
        }
        Command::Sweep { params, axes } => {
            let mut specs = axes;
            if specs.is_empty() {
                specs.extend(["axis", "axis2"].iter().filter_map(|k| ctx.file.get(k).map(String::from)));
            }
            if specs.len() > 2 {
                return Err(Error::Config("at most two sweep axes".into()));
            }
            let axes: Vec<Axis> = specs.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
            let swept: Vec<_> = axes.iter().map(|a| a.param).collect();
            let base = resolve_params(&params, &ctx.file, &swept)?;
            let rows = sweep::run_sweep(&base, &axes, ctx.opts, ctx.exec)?;
            emit_rows(&ctx, &rows)?;
            Ok(0)
        }
        Command::Optimize(args) => run_optimize(&ctx, args),
        Command::Validate {
            seed,
            horizon,
            inject_fault,
        } => {
            let seed = match seed {
                Some(s) => s,
                None => ctx.file.parse_value("seed")?.unwrap_or(validate::DEFAULT_SEED),
            };
            let report = validate::run_validation(&ValidateOptions {
                seed,
                sim_horizon: horizon,
                fault: inject_fault,
                exec: ctx.exec,
            })?;
            with_output(&ctx, |w| Ok(write!(w, "{report}")?))?;
            Ok(if report.passed() { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::DumpQ { params } => {
            let p = resolve_params(&params, &ctx.file, &[])?;
            let q = build_generator(&p)?;
            with_output(&ctx, |w| q.write_coordinate(w))?;
            Ok(0)
        }
    }
}

fn run_optimize(ctx: &Context, args: OptimizeArgs) -> Result<u8, Error> {
    let file = &ctx.file;
    let rates = rate_params(&args.params, file)?;
    let targets = QosTargets {
        p_d0: args.pd0.or(file.parse_value("pd0")?),
        p_b0: args.pb0.or(file.parse_value("pb0")?),
    };
    let x = match args.x {
        Some(x) => Some(x),
        None => file.parse_value::<f64>("x")?,
    };
    if let Some(x) = x {
        if !(0.0..=100.0).contains(&x) {
            return Err(Error::InvalidParam {
                field: "x",
                reason: format!("must lie in [0, 100], got {x}"),
            });
        }
    }
    let share = |explicit: Option<u32>, key: &str, what: &str| -> Result<Share, Error> {
        match (explicit.or(file.parse_value(key)?), x) {
            (Some(n), _) => Ok(Share::Exact(n)),
            (None, Some(x)) => Ok(Share::Percent(x)),
            (None, None) => Err(Error::Config(format!("{what} requires --{key} or --x"))),
        }
    };
    let c = || -> Result<u32, Error> {
        args.params
            .c
            .or(file.parse_value("c")?)
            .ok_or_else(|| Error::Config("--c is required for this problem".into()))
    };
    let mode = if args.linear {
        SearchMode::Linear
    } else {
        SearchMode::Bisection
    };
    let m_cap = |c: u32| args.m_cap.or(file.parse_value("m_cap").ok().flatten()).unwrap_or(2 * c);

    let ev = Evaluator::new(rates).with_options(ctx.opts).with_execution(ctx.exec);
    let result = match args.problem {
        ProblemArg::O1AlgI => {
            let c = c()?;
            optimize::solve_o1_alg1(&ev, c, share(args.params.g, "g", "o1-algI")?, targets, m_cap(c), mode)?
        }
        ProblemArg::O1AlgII => {
            let c = c()?;
            optimize::solve_o1_alg2(&ev, c, share(args.params.m, "m", "o1-algII")?, targets, mode)?
        }
        ProblemArg::O2 => {
            let c = c()?;
            optimize::solve_o2_alg3(&ev, c, share(args.params.g, "g", "o2")?, targets, m_cap(c), mode)?
        }
        ProblemArg::O3 => {
            let strategy = match args.strategy {
                StrategyArg::Exhaustive => O3Strategy::Exhaustive,
                StrategyArg::PaperIv => O3Strategy::PaperIv,
            };
            let c_min = args.c_min.unwrap_or(1);
            optimize::solve_o3(&ev, targets, strategy, 0..=args.m_max, c_min..=args.c_max, mode)?
        }
        ProblemArg::O4 => {
            let c_min = args.c_min.unwrap_or(2);
            optimize::solve_o4_alg5(&ev, targets, share(args.params.g, "g", "o4")?, c_min..=args.c_max, mode)?
        }
    };
    with_output(ctx, |w| output::write_optimization(&result, ctx.format, args.trace, w))?;
    if !result.feasible {
        eprintln!("no configuration satisfies the targets");
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(0)
}

/// Rates from flags, then the config file, then the reference defaults.
fn rate_params(flags: &ParamArgs, file: &Config) -> Result<ModelParams, Error> {
    let pick = |flag: Option<f64>, key: &str, default: f64| -> Result<f64, Error> {
        Ok(flag.or(file.parse_value(key)?).unwrap_or(default))
    };
    Ok(ModelParams {
        c: 0,
        g: 0,
        m: 0,
        lambda_n: pick(flags.lambda_n, "lambda_n", ModelParams::REFERENCE_LAMBDA_N)?,
        lambda_h: pick(flags.lambda_h, "lambda_h", ModelParams::REFERENCE_LAMBDA_H)?,
        nu: pick(flags.nu, "nu", ModelParams::REFERENCE_NU)?,
        p: pick(flags.p, "p", ModelParams::REFERENCE_P)?,
        mu_r: pick(flags.mu_r, "mu_r", ModelParams::REFERENCE_MU_R)?,
    })
}

/// Full parameter set; `c`, `g`, `m` must be given unless a sweep axis
/// supplies them.
fn resolve_params(
    flags: &ParamArgs,
    file: &Config,
    swept: &[sweep::ParamName],
) -> Result<ModelParams, Error> {
    use sweep::ParamName;
    let mut p = rate_params(flags, file)?;
    for (flag, name) in [(flags.c, ParamName::C), (flags.g, ParamName::G), (flags.m, ParamName::M)] {
        let value = match flag.or(file.parse_value(name.as_str())?) {
            Some(v) => v,
            None if swept.contains(&name) => 0,
            None => {
                return Err(Error::InvalidParam {
                    field: name.as_str(),
                    reason: "required (no default)".into(),
                })
            }
        };
        name.apply(&mut p, value as f64)?;
    }
    if swept.is_empty() {
        p.validate()?;
    }
    Ok(p)
}

fn emit_rows(ctx: &Context, rows: &[SweepRow]) -> Result<(), Error> {
    with_output(ctx, |w| output::write_rows(rows, ctx.format, w))
}

fn with_output(
    ctx: &Context,
    f: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
) -> Result<(), Error> {
    match &ctx.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
