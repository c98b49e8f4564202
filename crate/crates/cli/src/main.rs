use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use copostab::commands::{
    self, parse_scheme, resolve_seed, CheckOptions, PolicyKind, SimulateOptions, Source, Start,
    SEED_ENV,
};
use copostab::report::to_json;
use copostab::table::{self, Row};
use copostab::{exit, registry, CliError, Result};
use copostab_core::cpa::CpaOptions;
use copostab_core::lyapunov::Mode;

#[derive(Parser)]
#[command(
    name = "copostab",
    version,
    about = "Quadratic Lyapunov certificates for complementarity systems"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a Lyapunov certificate.
    Check(CheckArgs),
    /// Simulate trajectories.
    Simulate(SimulateArgs),
    /// Discretize a continuous-time system.
    Discretize(DiscretizeArgs),
    /// Run `check` over several step sizes.
    Sweep(SweepArgs),
    /// List the built-in systems, or print one.
    Examples { name: Option<String> },
}

#[derive(Args)]
struct SystemArgs {
    /// System document (JSON).
    #[arg(required_unless_present = "example", conflicts_with = "example")]
    system: Option<PathBuf>,
    /// Built-in system instead of a file.
    #[arg(long)]
    example: Option<String>,
}

impl SystemArgs {
    fn source(&self) -> Source {
        match (&self.system, &self.example) {
            (_, Some(name)) => Source::Example(name.clone()),
            (Some(path), None) => Source::File(path.clone()),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }
}

#[derive(Args)]
struct SchemeArgs {
    /// explicit, implicit or theta=T.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
}

impl SchemeArgs {
    fn theta(&self) -> Result<Option<f64>> {
        self.scheme.as_deref().map(parse_scheme).transpose()
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value = "cqlf")]
    mode: Mode,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Overridden by the COPOSTAB_SEED environment variable.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop each separation at the first violating piece.
    #[arg(long)]
    fast_sep: bool,
}

impl SearchArgs {
    fn options(&self) -> Result<CpaOptions> {
        Ok(CpaOptions {
            epsilon: self.eps,
            max_iter: self.max_iter,
            seed: seed(self.seed)?,
            fast_sep: self.fast_sep,
        })
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Simulate trajectories to confirm a found certificate.
    #[arg(long)]
    validate: bool,
    #[arg(long, default_value_t = 100)]
    trajectories: usize,
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    /// Write the JSON report here.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Lex,
    Random,
    All,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Initial state as comma-separated values.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "random"
    )]
    x0: Option<Vec<f64>>,
    /// Number of random initial states on the unit sphere.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, value_enum, default_value = "lex")]
    policy: Policy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DiscretizeArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    scheme: String,
    #[arg(long)]
    dt: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value = "explicit")]
    scheme: String,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
    dts: Vec<f64>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn seed(fallback: u64) -> Result<u64> {
    resolve_seed(fallback, std::env::var(SEED_ENV).ok())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to stdout; a closed pipe is not an error.
fn say(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io {
            path: "<stdout>".into(),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn emit(output: Option<&PathBuf>, json: String) -> Result<()> {
    match output {
        Some(path) => write(path, &(json + "\n")),
        None => say(&(json + "\n")),
    }
}

fn run_check(args: &CheckArgs) -> Result<u8> {
    let doc = args.system.source().load()?;
    let mut opts = CheckOptions::new(args.search.mode);
    opts.theta = args.scheme.theta()?;
    opts.dt = args.scheme.dt;
    opts.cpa = args.search.options()?;
    opts.validate = args.validate;
    opts.trajectories = args.trajectories;
    opts.horizon = args.horizon;
    let report = commands::check(&doc, &opts)?;
    say(&table::render(&[Row::from_report(&report)]))?;
    if report.solvability_warning {
        eprintln!("warning: feedthrough matrix is R0 but not certified P; trajectories may not exist everywhere");
    }
    if let Some(v) = &report.validation {
        eprintln!(
            "validation: {} trajectories x {} steps, max increase {:.3e}, decay rate {:.4}, {}",
            v.trajectories,
            v.horizon,
            v.max_increase,
            v.decay_rate,
            if v.passed { "passed" } else { "FAILED" }
        );
    }
    if let Some(path) = &args.output {
        write(path, &(to_json(&report) + "\n"))?;
    }
    Ok(commands::exit_code(&report))
}

fn run_simulate(args: &SimulateArgs) -> Result<u8> {
    let doc = args.system.source().load()?;
    let start = match (&args.x0, args.random) {
        (Some(x0), _) => Start::Given(x0.clone()),
        (None, Some(n)) => Start::Random(n),
        (None, None) => return Err(CliError::Input("give --x0 or --random".into())),
    };
    let opts = SimulateOptions {
        theta: args.scheme.theta()?,
        dt: args.scheme.dt,
        start,
        steps: args.steps,
        policy: match args.policy {
            Policy::Lex => PolicyKind::Lex,
            Policy::Random => PolicyKind::Random,
            Policy::All => PolicyKind::All,
        },
        seed: seed(args.seed)?,
    };
    let report = commands::simulate_cmd(&doc, &opts)?;
    for (i, run) in report.runs.iter().enumerate() {
        eprintln!(
            "run {i}: {} branch(es){}, min lambda {:.3e}, min slack {:.3e}, complementarity {:.3e}",
            run.trajectories.len(),
            if run.truncated { " (truncated)" } else { "" },
            run.residuals.min_lambda,
            run.residuals.min_slack,
            run.residuals.complementarity
        );
    }
    emit(args.output.as_ref(), to_json(&report))?;
    Ok(exit::FEASIBLE)
}

fn run_discretize(args: &DiscretizeArgs) -> Result<u8> {
    let doc = args.system.source().load()?;
    let (out, check) = commands::discretize_cmd(&doc, parse_scheme(&args.scheme)?, args.dt)?;
    eprintln!(
        "step size: dt*theta*|A|_2 = {:.6}, dt*|(I - theta dt A)^-1 A|_2 = {:.6}",
        check.implicit_bound, check.resolvent_bound
    );
    emit(args.output.as_ref(), out.to_json())?;
    Ok(exit::FEASIBLE)
}

fn run_sweep(args: &SweepArgs) -> Result<u8> {
    let doc = args.system.source().load()?;
    let theta = parse_scheme(&args.scheme)?;
    let report = commands::sweep(
        &doc,
        args.search.mode,
        theta,
        &args.dts,
        &args.search.options()?,
    )?;
    let mut text = table::render(&table::sweep_rows(&report));
    for (k, w) in args.dts.windows(2).enumerate() {
        let margin = report.margin_ratios[k].map_or("-".into(), |r| format!("{r:.4}"));
        text += &format!(
            "dt {} -> {}: margin ratio {margin}, residual ratio {:.4}\n",
            w[0], w[1], report.residual_ratios[k]
        );
    }
    say(&text)?;
    if let Some(path) = &args.output {
        write(path, &(to_json(&report) + "\n"))?;
    }
    Ok(exit::FEASIBLE)
}

fn run_examples(name: Option<&str>) -> Result<u8> {
    match name {
        Some(name) => say(&(registry::example(name)?.to_json() + "\n"))?,
        None => {
            for doc in registry::examples() {
                say(&format!(
                    "{:<6} {:?} n_x={} n_c={}\n",
                    doc.name, doc.kind, doc.n_x, doc.n_c
                ))?;
            }
        }
    }
    Ok(exit::FEASIBLE)
}

fn main() -> ExitCode {
    // argument errors share the input exit code; help and version exit cleanly
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::INPUT
            } else {
                exit::FEASIBLE
            });
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} worker threads: {e}");
            return ExitCode::from(exit::INPUT);
        }
    }
    let result = match &cli.command {
        Command::Check(a) => run_check(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Discretize(a) => run_discretize(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Examples { name } => run_examples(name.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
