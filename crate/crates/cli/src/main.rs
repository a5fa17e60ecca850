//! `atomicity`: expose atomicity violations of a method against a core of
//! atomic methods by enumerating harnesses and stress-testing them.
//!
//! Exit status: 0 when no violation was found (or the query succeeded),
//! 1 when a non-atomic outcome was found, 2 on errors.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use atomicity_core::lincheck::is_linearizable;
use atomicity_core::{
    atomic_outcomes, count_linearizations, parse_outcome, shuffle, EnumOptions, EnumParams, Family,
    Harness, HarnessSpace, History, ScheduleKind, SequentialSpec,
};
use atomicity_stress::builtin_suts;
use atomicity_stress::check::{check_with_progress, CheckConfig};
use atomicity_stress::executor::{stress, StressBudget, StressOptions, Verdict};
use atomicity_stress::report::{histogram_table, outcomes_table, write_report, ReportFormat};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "atomicity",
    version,
    about = "Find atomicity violations in concurrent objects"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate and stress-test harnesses until a non-atomic outcome or a bound.
    Check(CheckArgs),
    /// Print the harnesses of one enumeration round, one per line.
    Enumerate(EnumerateArgs),
    /// Print the atomic outcomes of a harness.
    Outcomes(OutcomesArgs),
    /// Stress-test one harness and print the outcome histogram.
    Stress(StressArgs),
    /// Check one history for linearizability.
    Lincheck(LincheckArgs),
    /// List the built-in systems under test.
    ListSuts,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => ReportFormat::Table,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Schedule {
    Diagonal,
    Graded,
}

#[derive(Args)]
struct MethodArgs {
    /// Object family: map, queue, deque or set.
    #[arg(long)]
    family: Option<String>,
    /// Core methods, comma separated (default: the family's core set without
    /// the method under test).
    #[arg(long, value_delimiter = ',')]
    core: Vec<String>,
    /// Method under test.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args)]
struct ReductionArgs {
    /// Keep harnesses that differ only by sequence order.
    #[arg(long)]
    no_symmetry: bool,
    /// Keep all-read-only and serialized-read-only harnesses.
    #[arg(long)]
    no_filters: bool,
}

impl ReductionArgs {
    fn options(&self) -> EnumOptions {
        EnumOptions {
            symmetry: !self.no_symmetry,
            filter_read_only: !self.no_filters,
            filter_serialized: !self.no_filters,
            ..EnumOptions::default()
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    /// TOML file with check settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    method: MethodArgs,
    /// System under test (see `list-suts`).
    #[arg(long)]
    sut: Option<String>,
    /// Largest invocation count to enumerate (default 6).
    #[arg(long)]
    max_invocations: Option<usize>,
    /// Largest number of distinct argument values (default 2).
    #[arg(long)]
    max_values: Option<usize>,
    /// Largest number of sequences (default 2).
    #[arg(long)]
    max_sequences: Option<usize>,
    /// Order of enumeration parameters (default diagonal).
    #[arg(long, value_enum)]
    schedule: Option<Schedule>,
    /// Stress time per harness, e.g. `1s` or `200ms`.
    #[arg(long, value_parser = humantime::parse_duration)]
    time_per_harness: Option<Duration>,
    /// Fixed trial count per harness instead of a time budget.
    #[arg(long)]
    trials_per_harness: Option<u64>,
    /// Harnesses per chunk; a violation ends the run at the end of its chunk (default 100).
    #[arg(long)]
    chunk_size: Option<usize>,
    /// Seed for shuffling each round (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker groups running trials in parallel (default 1).
    #[arg(long)]
    workers: Option<usize>,
    /// Give up after this long, e.g. `15m`.
    #[arg(long, value_parser = humantime::parse_duration)]
    timeout: Option<Duration>,
    /// Stop at the violating harness instead of finishing its chunk.
    #[arg(long)]
    stop_within_chunk: bool,
    #[command(flatten)]
    reductions: ReductionArgs,
    /// Print only the attempted harnesses, without stress testing.
    #[arg(long)]
    dry_run: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print one progress line per harness on stderr.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long)]
    invocations: usize,
    #[arg(long)]
    values: usize,
    #[arg(long)]
    sequences: usize,
    /// Shuffle with this seed (default: enumeration order).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    reductions: ReductionArgs,
    /// Print only the number of harnesses.
    #[arg(long)]
    count: bool,
}

#[derive(Args)]
struct OutcomesArgs {
    harness: String,
    #[arg(long, default_value = "map")]
    family: String,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct StressArgs {
    harness: String,
    #[arg(long)]
    sut: String,
    /// Time budget, e.g. `1s` (default when --trials is absent).
    #[arg(long, value_parser = humantime::parse_duration)]
    time: Option<Duration>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Stop after the first batch containing a non-atomic outcome.
    #[arg(long)]
    fail_fast: bool,
    /// Record histories and check each for linearizability.
    #[arg(long)]
    validate: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct LincheckArgs {
    harness: String,
    /// Observed outcome, e.g. `(null,(),null,true)`.
    #[arg(long)]
    outcome: String,
    /// Happens-before over invocation indices, e.g. `1<0, 1<2`; the
    /// harness order is always included.
    #[arg(long)]
    hb: Option<String>,
    #[arg(long, default_value = "map")]
    family: String,
}

fn family(name: &str) -> Result<Family> {
    name.parse().map_err(|e| anyhow!("{e}"))
}

fn parse_for(text: &str, spec: &SequentialSpec) -> Result<Harness> {
    Harness::parse_for(text, spec).with_context(|| format!("harness `{text}`"))
}

fn check_config(a: &CheckArgs) -> Result<CheckConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => CheckConfig::default(),
    };
    let registry = builtin_suts();
    if let Some(sut) = &a.sut {
        cfg.sut = sut.clone();
    }
    if cfg.sut.is_empty() {
        bail!("no system under test given (use --sut or the config file)");
    }
    let sut = registry
        .get(&cfg.sut)
        .ok_or_else(|| anyhow!("unknown system under test `{}`; see list-suts", cfg.sut))?;
    match &a.method.family {
        Some(f) => cfg.family = family(f)?,
        None if a.config.is_none() => cfg.family = sut.family,
        None => {}
    }
    if !a.method.core.is_empty() {
        cfg.core = a.method.core.clone();
    }
    if let Some(m) = &a.method.method {
        cfg.method = m.clone();
    }
    if cfg.method.is_empty() {
        match sut.target {
            Some(t) => cfg.method = t.to_string(),
            None => bail!("no method under test given (use --method)"),
        }
    }
    let b = &mut cfg.bounds;
    b.invocations = a.max_invocations.unwrap_or(b.invocations);
    b.values = a.max_values.unwrap_or(b.values);
    b.sequences = a.max_sequences.unwrap_or(b.sequences);
    if let Some(s) = a.schedule {
        cfg.schedule = match s {
            Schedule::Diagonal => ScheduleKind::Diagonal,
            Schedule::Graded => ScheduleKind::Graded,
        };
    }
    if let Some(t) = a.time_per_harness {
        cfg.time_per_harness = t;
    }
    if a.trials_per_harness.is_some() {
        cfg.trials_per_harness = a.trials_per_harness;
    }
    cfg.chunk_size = a.chunk_size.unwrap_or(cfg.chunk_size);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.workers = a.workers.unwrap_or(cfg.workers);
    if a.timeout.is_some() {
        cfg.global_timeout = a.timeout;
    }
    cfg.stop_within_chunk |= a.stop_within_chunk;
    if a.reductions.no_symmetry {
        cfg.enumeration.symmetry = false;
    }
    if a.reductions.no_filters {
        cfg.enumeration.filter_read_only = false;
        cfg.enumeration.filter_serialized = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_check(a: CheckArgs) -> Result<ExitCode> {
    let cfg = check_config(&a)?;
    let mut out: Box<dyn Write> = match &a.output {
        Some(p) => {
            Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    if a.dry_run {
        for round in atomicity_stress::check::rounds(&cfg)? {
            let round = round?;
            for i in 0..round.len() {
                writeln!(out, "{}\t{}", round.params, round.harness(i))?;
            }
        }
        return Ok(ExitCode::SUCCESS);
    }
    let verbose = a.verbose;
    let report = check_with_progress(&cfg, &builtin_suts(), &mut |r| {
        if verbose {
            let bad = r.histogram.non_atomic().count();
            eprintln!(
                "{} {}/{} {} trials{} {}",
                r.params,
                r.index + 1,
                r.round_total,
                r.histogram.total,
                if bad > 0 { " NON-ATOMIC" } else { "" },
                r.harness
            );
        }
    })?;
    write_report(&report, a.format.into(), &mut out)?;
    Ok(if report.is_non_atomic() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn run_enumerate(a: EnumerateArgs) -> Result<ExitCode> {
    let fam = family(a.method.family.as_deref().unwrap_or("map"))?;
    let spec = SequentialSpec::new(fam);
    let m = a
        .method
        .method
        .as_deref()
        .ok_or_else(|| anyhow!("--method is required"))?;
    let core: Vec<String> = if a.method.core.is_empty() {
        spec.core_methods()
            .into_iter()
            .filter(|c| *c != m)
            .map(str::to_string)
            .collect()
    } else {
        a.method.core.clone()
    };
    let core: Vec<&str> = core.iter().map(String::as_str).collect();
    let space = HarnessSpace::new(
        &spec,
        &core,
        m,
        EnumParams::new(a.invocations, a.values, a.sequences),
        a.reductions.options(),
    )?;
    let mut codes = space.codes();
    if a.count {
        println!("{}", codes.len());
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(seed) = a.seed {
        shuffle(&mut codes, seed);
    }
    let mut out = io::BufWriter::new(io::stdout().lock());
    for c in &codes {
        writeln!(out, "{}", space.decode(c))?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run_outcomes(a: OutcomesArgs) -> Result<ExitCode> {
    let spec = SequentialSpec::new(family(&a.family)?);
    let h = parse_for(&a.harness, &spec)?;
    let set = atomic_outcomes(&h, &spec)?;
    match a.format {
        Format::Table => {
            print!("{}", outcomes_table(&set));
            println!(
                "{} outcomes from {} linearizations",
                set.len(),
                count_linearizations(&h)
            );
        }
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "harness": h.to_string(),
                "linearizations": count_linearizations(&h).to_string(),
                "outcomes": set.outcomes().iter().map(ToString::to_string).collect::<Vec<_>>(),
            })
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_stress(a: StressArgs) -> Result<ExitCode> {
    let registry = builtin_suts();
    let sut = registry
        .get(&a.sut)
        .ok_or_else(|| anyhow!("unknown system under test `{}`; see list-suts", a.sut))?;
    let spec = sut.spec();
    let h = parse_for(&a.harness, &spec)?;
    let budget = StressBudget {
        time: a.time.or(if a.trials.is_none() {
            Some(Duration::from_secs(1))
        } else {
            None
        }),
        trials: a.trials,
        workers: a.workers,
    };
    let opts = StressOptions {
        fail_fast: a.fail_fast,
        validate: a.validate,
        ..StressOptions::default()
    };
    let r = stress(&h, sut, &spec, budget, opts)?;
    match a.format {
        Format::Table => {
            println!("{h}");
            print!("{}", histogram_table(&r.histogram));
            println!(
                "throughput: {:.0} trials/s per worker ({} workers)",
                r.trials_per_second_per_worker(),
                r.workers
            );
            if let Some(v) = &r.validation {
                println!(
                    "validation: {} histories, {} linearizable, {} linearizable with a non-atomic outcome",
                    v.histories, v.linearizable, v.linearizable_non_atomic
                );
            }
            match &r.verdict {
                Verdict::Violation { outcome, count } => {
                    println!("NON-ATOMIC: {outcome} observed {count} times")
                }
                Verdict::AtomicSoFar => println!("ATOMIC SO FAR"),
            }
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&r)?),
    }
    Ok(match r.verdict {
        Verdict::Violation { .. } => ExitCode::from(1),
        Verdict::AtomicSoFar => ExitCode::SUCCESS,
    })
}

fn parse_hb(text: &str) -> Result<Vec<(usize, usize)>> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    inner
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p
                .split_once('<')
                .ok_or_else(|| anyhow!("expected `i < j`, got `{}`", p.trim()))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .collect()
}

fn run_lincheck(a: LincheckArgs) -> Result<ExitCode> {
    let spec = SequentialSpec::new(family(&a.family)?);
    let h = parse_for(&a.harness, &spec)?;
    let outcome = parse_outcome(&a.outcome)?;
    let mut pairs = h.invocation_order().pairs();
    if let Some(hb) = &a.hb {
        pairs.extend(parse_hb(hb)?);
    }
    let hist = History::new(h, outcome, &pairs)?;
    let lin = is_linearizable(&hist, &spec)?;
    println!(
        "{}",
        if lin {
            "linearizable"
        } else {
            "NOT linearizable"
        }
    );
    Ok(if lin {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_list_suts() -> Result<ExitCode> {
    let registry = builtin_suts();
    let width = registry.names().iter().map(|n| n.len()).max().unwrap_or(4);
    println!(
        "{:<width$}  family  atomic  target       description",
        "name"
    );
    for s in registry.iter() {
        println!(
            "{:<width$}  {:<6}  {:<6}  {:<11}  {}",
            s.name,
            s.family.to_string(),
            if s.expected_atomic { "yes" } else { "no" },
            s.target.unwrap_or("-"),
            s.description
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => run_check(a),
        Command::Enumerate(a) => run_enumerate(a),
        Command::Outcomes(a) => run_outcomes(a),
        Command::Stress(a) => run_stress(a),
        Command::Lincheck(a) => run_lincheck(a),
        Command::ListSuts => run_list_suts(),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
