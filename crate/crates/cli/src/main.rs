//! `buffon`: sample Bernoulli(θ) coins for built-in constants, dump exact
//! output laws, trace single runs and export tail data.

mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use buffon::{
    exact_mass, run_trials_on, sample, tail_report, Constant, Engine, Error, Limits, ReplaySource,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{EnumerateReport, EstimateReport, Rendered};

const EXIT_INVARIANT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;

const MAX_TERMS_ENV: &str = "BUFFON_MAX_TERMS";

#[derive(Parser, Debug)]
#[command(name = "buffon", version, about = "Exact Bernoulli sampling from fair coins")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo estimate of the output law, with tail checks.
    Estimate(RunArgs),
    /// Exact bracket on Pr[Y = 1] from the first `depth` iterations.
    Enumerate(EnumerateArgs),
    /// Run one sample on an explicit bit string.
    Trace(TraceArgs),
    /// Tail data for plotting: Pr[L > l] and Pr[N_M > n] against their bounds.
    Tails(RunArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// gamma, pi4, ln2 or rational:n/d
    #[arg(long, value_parser = parse_constant)]
    constant: Constant,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    shards: Option<u64>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    /// Give up after this many seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[command(flatten)]
    common: Common,
    /// Input bits, e.g. 1101.
    #[arg(long)]
    bits: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_constant(s: &str) -> Result<Constant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn limits_from_env() -> Result<Limits, String> {
    let mut limits = Limits::default();
    if let Ok(v) = std::env::var(MAX_TERMS_ENV) {
        limits.max_terms = v
            .parse()
            .map_err(|_| format!("{MAX_TERMS_ENV}={v:?} is not a non-negative integer"))?;
    }
    Ok(limits)
}

fn default_shards() -> u64 {
    std::thread::available_parallelism().map_or(1, |n| n.get() as u64)
}

fn emit(common: &Common, default: Format, rendered: &Rendered) -> std::io::Result<()> {
    let text = match common.format.unwrap_or(default) {
        Format::Json => &rendered.json,
        Format::Csv => &rendered.csv,
    };
    match &common.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("buffon: {msg}");
    ExitCode::from(code)
}

fn estimate(args: &RunArgs, limits: Limits, tails_only: bool) -> ExitCode {
    let provider = args.common.constant.provider();
    let shards = args.shards.unwrap_or_else(default_shards);
    let engine = Engine::with_limits(provider, limits);
    let summary = match run_trials_on(&engine, args.trials, args.seed, shards as usize) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_INVARIANT, e),
    };
    let tails = match tail_report(&summary, engine.provider()) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INVARIANT, e),
    };
    let schedule_terms: Vec<u64> = engine.states().iter().map(|s| s.terms).collect();
    let report = EstimateReport::new(
        &args.common.constant,
        shards,
        &summary,
        &tails,
        &schedule_terms,
    );
    let (rendered, default) = if tails_only {
        (report::render_tails(&tails), Format::Csv)
    } else {
        (report.render(), Format::Json)
    };
    if let Err(e) = emit(&args.common, default, &rendered) {
        return fail(EXIT_INVARIANT, e);
    }
    if report.flagged {
        return fail(EXIT_INVARIANT, "invariant check failed; see report");
    }
    ExitCode::SUCCESS
}

fn enumerate(args: &EnumerateArgs, mut limits: Limits) -> ExitCode {
    if let Some(secs) = args.time_limit {
        match Duration::try_from_secs_f64(secs) {
            Ok(d) => limits.deadline = Some(Instant::now() + d),
            Err(_) => return fail(EXIT_USAGE, format!("invalid --time-limit {secs}")),
        }
    }
    let provider = args.common.constant.provider();
    let bracket = match exact_mass(&provider, args.depth, &limits) {
        Ok(b) => b,
        Err(e) => return fail(EXIT_INVARIANT, e),
    };
    let rendered = EnumerateReport::new(&args.common.constant, &bracket).render();
    match emit(&args.common, Format::Json, &rendered) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_INVARIANT, e),
    }
}

fn trace(args: &TraceArgs, limits: Limits) -> ExitCode {
    let mut source = match ReplaySource::parse(&args.bits) {
        Ok(s) if !args.bits.is_empty() => s,
        Ok(_) => return fail(EXIT_USAGE, "--bits must not be empty"),
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let provider = args.common.constant.provider();
    match sample(&provider, &mut source, &limits) {
        Ok(t) => match emit(&args.common, Format::Json, &report::render_trace(&t)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(EXIT_INVARIANT, e),
        },
        Err(Error::InputExhausted { consumed, schedule }) => {
            let partial = report::render_partial_trace(consumed, &schedule);
            if let Err(e) = emit(&args.common, Format::Json, &partial) {
                return fail(EXIT_INVARIANT, e);
            }
            fail(
                EXIT_EXHAUSTED,
                format!("bit string exhausted after {consumed} bits; more bits are needed"),
            )
        }
        Err(e) => fail(EXIT_INVARIANT, e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limits = match limits_from_env() {
        Ok(l) => l,
        Err(msg) => return fail(EXIT_USAGE, msg),
    };
    match &cli.command {
        Command::Estimate(args) => estimate(args, limits, false),
        Command::Tails(args) => estimate(args, limits, true),
        Command::Enumerate(args) => enumerate(args, limits),
        Command::Trace(args) => trace(args, limits),
    }
}
