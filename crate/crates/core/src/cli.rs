//! The `rmcs` command line.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{format_trace, parse_system, parse_trace, SystemConfig};
use crate::engine::{step, EngineError, Observation, Policy, DEFAULT_MAX_RUNS};
use crate::query::{decide, Mode, Query};
use crate::report::format_step;
use crate::scenarios::{build_scenario, scenario_source, NAMES};
use crate::term::parse_belief;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_NO_EQUILIBRIUM: i32 = 2;
pub const EXIT_AMBIGUOUS: i32 = 3;
pub const EXIT_INPUT: i32 = 4;
pub const EXIT_ENGINE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "rmcs", version, about = "Run reactive multi-context systems over observation traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the run induced by a trace and print one record per step.
    Run {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = PolicyArg::First)]
        policy: PolicyArg,
    },
    /// Decide whether a belief occurs in some (every) run.
    Query {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        context: String,
        #[arg(long)]
        belief: String,
        #[arg(long, default_value_t = DEFAULT_MAX_RUNS)]
        max_runs: usize,
    },
    /// Print a built-in scenario's system and trace.
    Show { scenario: String },
    /// List the built-in scenarios.
    List,
}

#[derive(Debug, Args)]
struct Input {
    /// System configuration file.
    #[arg(required_unless_present = "scenario")]
    system: Option<PathBuf>,
    /// Observation trace file.
    #[arg(required_unless_present = "scenario")]
    trace: Option<PathBuf>,
    /// Use a built-in scenario instead of files.
    #[arg(long, conflicts_with_all = ["system", "trace"])]
    scenario: Option<String>,
    /// Replay exactly this many steps, padding with empty observations.
    #[arg(long)]
    steps: Option<usize>,
    /// Override the grounding horizon.
    #[arg(long)]
    horizon: Option<i64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    First,
    Strict,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exists,
    Forall,
}

struct Failure {
    code: i32,
    message: String,
}

fn input_error(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

fn load(input: &Input) -> Result<(SystemConfig, Vec<Observation>), Failure> {
    let (mut cfg, mut trace) = match (&input.scenario, &input.system, &input.trace) {
        (Some(name), _, _) => build_scenario(name).map_err(input_error)?,
        (None, Some(sys), Some(tr)) => {
            let read = |p: &PathBuf| fs::read_to_string(p).map_err(|e| input_error(format!("{}: {e}", p.display())));
            let cfg = parse_system(&read(sys)?).map_err(|e| input_error(format!("{}: {e}", sys.display())))?;
            let trace =
                parse_trace(&read(tr)?, &cfg.sensors).map_err(|e| input_error(format!("{}: {e}", tr.display())))?;
            (cfg, trace)
        }
        _ => return Err(input_error("give a system and a trace file, or --scenario")),
    };
    if let Some(h) = input.horizon {
        if h < 0 {
            return Err(input_error("--horizon must not be negative"));
        }
        cfg.horizon = h;
    }
    if let Some(n) = input.steps {
        trace.resize(n, Observation::empty(cfg.sensors.len()));
    }
    Ok((cfg, trace))
}

fn engine_failure(e: EngineError) -> Failure {
    let code = match e {
        EngineError::NoEquilibrium { .. } => EXIT_NO_EQUILIBRIUM,
        EngineError::Ambiguous { .. } => EXIT_AMBIGUOUS,
        _ => EXIT_ENGINE,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn cmd_run(input: &Input, policy: PolicyArg, out: &mut dyn Write) -> Result<i32, Failure> {
    let (cfg, trace) = load(input)?;
    let mut m = cfg.build();
    let names = m.context_names();
    let policy = match policy {
        PolicyArg::First => Policy::First,
        PolicyArg::Strict => Policy::Strict,
    };
    for (k, obs) in trace.iter().enumerate() {
        match step(&m, obs, k, policy) {
            Ok(eq) => {
                let _ = write!(out, "{}", format_step(k, &eq, &names));
                m.kbs = eq.kbs;
            }
            Err(EngineError::NoEquilibrium { step }) => {
                let _ = writeln!(out, "no-equilibrium at step {step}");
                return Ok(EXIT_NO_EQUILIBRIUM);
            }
            Err(EngineError::Ambiguous { step, count }) => {
                let _ = writeln!(out, "ambiguous at step {step} ({count} equilibria)");
                return Ok(EXIT_AMBIGUOUS);
            }
            Err(e) => return Err(engine_failure(e)),
        }
    }
    Ok(EXIT_OK)
}

fn cmd_query(
    input: &Input,
    mode: ModeArg,
    context: &str,
    belief: &str,
    max_runs: usize,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (cfg, trace) = load(input)?;
    let m = cfg.build();
    let ctx = m
        .context_index(context)
        .ok_or_else(|| input_error(format!("unknown context `{context}`")))?;
    let belief = parse_belief(belief).map_err(|e| input_error(format!("--belief: {e}")))?;
    let mode = match mode {
        ModeArg::Exists => Mode::Exists,
        ModeArg::Forall => Mode::Forall,
    };
    let q = Query {
        mode,
        context: ctx,
        belief,
    };
    let v = decide(&m, &trace, &q, max_runs).map_err(engine_failure)?;
    let _ = writeln!(out, "query {} {}:{}", q.mode, context, q.belief);
    let _ = writeln!(out, "verdict {}", v.holds);
    let _ = writeln!(out, "runs {}", v.runs);
    if let Some((run, step)) = v.witness {
        let _ = writeln!(out, "witness run {run} step {step}");
    }
    if v.no_runs {
        let _ = writeln!(out, "no-runs");
    }
    Ok(if v.holds { EXIT_OK } else { EXIT_FALSE })
}

fn cmd_show(name: &str, out: &mut dyn Write) -> Result<i32, Failure> {
    let (cfg, trace) = build_scenario(name).map_err(input_error)?;
    let (system, _) = scenario_source(name).expect("scenario exists");
    let comments: String = system.lines().take_while(|l| l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let _ = write!(out, "{comments}{cfg}\n# trace\n{}", format_trace(&trace, &cfg.sensors));
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Reports go to `out`, diagnostics to `err`.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run { input, policy } => cmd_run(input, *policy, out),
        Command::Query {
            input,
            mode,
            context,
            belief,
            max_runs,
        } => cmd_query(input, *mode, context, belief, *max_runs, out),
        Command::Show { scenario } => cmd_show(scenario, out),
        Command::List => {
            for n in NAMES {
                let _ = writeln!(out, "{n}");
            }
            Ok(EXIT_OK)
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// `RMCS_LOG` = `quiet` | `info` | `debug`; warnings otherwise.
pub fn init_logging() {
    let level = match std::env::var("RMCS_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .try_init();
}
