use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use collatz_core::cycles::{self, CycleCandidate};
use collatz_core::facts::{self, Fact, RangeReport, VerifyOptions};
use collatz_core::map::ResidueClass;
use collatz_core::sweep::{self, SweepConfig};
use collatz_core::trajectory::{self, Trajectory};
use collatz_core::tree::{self, Flavor, Limits};
use collatz_core::{Error, Executor, Nat};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "collatz-lab", version, about = "Explore and verify the shortcut Collatz map")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the orbit of N under T, or under T' with --reduced.
    Trajectory {
        n: Nat,
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = sweep::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Check that every n in [LO, HI] reaches 1.
    VerifyRange {
        lo: u64,
        hi: u64,
        #[command(flatten)]
        workers: Workers,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        #[arg(long, default_value_t = sweep::DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = sweep::DEFAULT_CHUNK)]
        chunk_size: u64,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        output: Output,
        /// Stop after this many chunks (for exercising resume).
        #[arg(long, hide = true)]
        max_chunks: Option<u64>,
    },
    /// Run residue-class verifiers over [LO, HI].
    Facts {
        suite: Suite,
        lo: u64,
        hi: u64,
        #[command(flatten)]
        workers: Workers,
        #[arg(long, default_value_t = facts::DEFAULT_BUDGET)]
        budget: u64,
        /// Treat inconclusive (budget-limited) values as failures.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Build the predecessor tree and print it as DOT or JSON.
    Tree {
        #[arg(long)]
        reduced: bool,
        /// Defaults to 1, or 2 with --reduced.
        #[arg(long)]
        root: Option<Nat>,
        #[arg(long)]
        max_value: Option<Nat>,
        #[arg(long)]
        max_depth: Option<u32>,
        #[arg(long, conflicts_with = "json")]
        dot: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Enumerate every rule word up to --max-len and report consistent cycles.
    Cycles {
        #[arg(long, default_value_t = 20)]
        max_len: u32,
        #[command(flatten)]
        workers: Workers,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct Workers {
    #[arg(long = "workers", env = "COLLATZ_LAB_WORKERS")]
    count: Option<usize>,
}

impl Workers {
    fn executor(&self) -> Result<Executor, Failure> {
        let n = self.count.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(usize::from)
                .unwrap_or(1)
        });
        Executor::with_workers(n).map_err(Failure::usage)
    }
}

#[derive(Debug, Args)]
struct Output {
    /// Also write the result to this file.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the output file even when the run found problems.
    #[arg(long)]
    force: bool,
}

impl Output {
    fn write(&self, text: &str, success: bool) -> Result<(), Failure> {
        let Some(path) = &self.output else {
            return Ok(());
        };
        if !success && !self.force {
            eprintln!("not writing {} (run failed; use --force)", path.display());
            return Ok(());
        }
        write_file(path, text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Predecessors,
    Transitions,
    Reduction,
    SmallCycles,
    C0Chains,
    All,
}

impl Suite {
    fn facts(self) -> Vec<Fact> {
        match self {
            Suite::Predecessors => vec![Fact::PredecessorStructure],
            Suite::Transitions => vec![Fact::Transitions],
            Suite::Reduction => vec![Fact::Reduction],
            Suite::SmallCycles => vec![Fact::NoSmallCycles],
            Suite::C0Chains => vec![Fact::C0Chains],
            Suite::All => Fact::ALL.to_vec(),
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::usage(e)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Trajectory { n, reduced, json, budget } => cmd_trajectory(&n, reduced, json, budget),
        Command::VerifyRange {
            lo,
            hi,
            workers,
            checkpoint,
            resume,
            budget,
            chunk_size,
            json,
            output,
            max_chunks,
        } => workers.executor().and_then(|executor| {
            let config = SweepConfig {
                lo,
                hi,
                budget,
                chunk: chunk_size,
                executor,
                checkpoint,
                resume,
                max_chunks,
            };
            cmd_verify_range(&config, json, &output)
        }),
        Command::Facts { suite, lo, hi, workers, budget, strict, json, output } => workers
            .executor()
            .and_then(|executor| {
                let opts = VerifyOptions { executor, budget, ..Default::default() };
                cmd_facts(suite, lo, hi, &opts, strict, json, &output)
            }),
        Command::Tree { reduced, root, max_value, max_depth, dot: _, json, output } => {
            cmd_tree(reduced, root, max_value, max_depth, json, &output)
        }
        Command::Cycles { max_len, workers, json } => {
            workers.executor().and_then(|executor| cmd_cycles(max_len, &executor, json))
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[derive(Serialize)]
struct TrajectoryDoc<'a, R> {
    schema_version: u32,
    map: &'static str,
    #[serde(flatten)]
    trajectory: &'a Trajectory<R>,
}

fn render_trajectory<R: Copy + std::fmt::Display + Serialize>(
    t: &Trajectory<R>,
    map: &'static str,
    json: bool,
) -> String {
    if json {
        return to_json(&TrajectoryDoc { schema_version: SCHEMA_VERSION, map, trajectory: t });
    }
    let mut out = String::new();
    let values: Vec<String> = t.values.iter().map(Nat::to_string).collect();
    let rules: Vec<String> = t.rules.iter().map(R::to_string).collect();
    let more = if t.truncated { ", ..." } else { "" };
    writeln!(out, "{}{more}", values.join(", ")).unwrap();
    writeln!(out, "rules: {}{more}", rules.join(" ")).unwrap();
    writeln!(out, "steps: {}", t.steps).unwrap();
    writeln!(out, "peak: {}", t.peak).unwrap();
    if !t.reached_target {
        writeln!(out, "target not reached; stopped at {}", t.last).unwrap();
    }
    out
}

fn cmd_trajectory(n: &Nat, reduced: bool, json: bool, budget: u64) -> Result<u8, Failure> {
    let (text, reached) = if reduced {
        let t = trajectory::reduced_orbit(n, budget)?;
        (render_trajectory(&t, "reduced", json), t.reached_target)
    } else {
        let t = trajectory::orbit(n, budget, &Nat::ONE)?;
        (render_trajectory(&t, "full", json), t.reached_target)
    };
    print!("{text}");
    Ok(if reached { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_verify_range(config: &SweepConfig, json: bool, output: &Output) -> Result<u8, Failure> {
    let outcome = sweep::run(config)?;
    let failed = outcome.witness().is_some();
    let text = if json {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            #[serde(flatten)]
            outcome: &'a sweep::SweepOutcome,
        }
        to_json(&Doc { schema_version: SCHEMA_VERSION, outcome: &outcome })
    } else {
        let mut out = String::new();
        let [lo, hi] = outcome.report.range;
        let status = if let Some(w) = outcome.witness() {
            format!("inconclusive at {w} (budget {} exhausted)", config.budget)
        } else if outcome.complete {
            "all converge".to_owned()
        } else {
            format!(
                "stopped early, verified up to {}",
                outcome.verified_up_to.map_or_else(|| "nothing".to_owned(), |v| v.to_string())
            )
        };
        writeln!(out, "verify-range [{lo}, {hi}]: {status}").unwrap();
        writeln!(out, "checked: {}", outcome.report.checked).unwrap();
        if let Some(st) = &outcome.stats {
            writeln!(out, "max_steps: {} at {}", st.max_steps, st.max_steps_at).unwrap();
            writeln!(out, "max_peak: {} at {}", st.max_peak, st.max_peak_at).unwrap();
        }
        writeln!(out, "elapsed: {} ms", outcome.report.elapsed.as_millis()).unwrap();
        out
    };
    print!("{text}");
    output.write(&text, !failed && outcome.complete)?;
    Ok(if failed { EXIT_VIOLATION } else { EXIT_OK })
}

fn cmd_facts(
    suite: Suite,
    lo: u64,
    hi: u64,
    opts: &VerifyOptions,
    strict: bool,
    json: bool,
    output: &Output,
) -> Result<u8, Failure> {
    let reports = suite
        .facts()
        .into_iter()
        .map(|fact| facts::verify(fact, lo, hi, opts))
        .collect::<Result<Vec<RangeReport>, _>>()?;
    let violations: usize = reports.iter().map(|r| r.violations.len()).sum();
    let inconclusive: usize = reports.iter().map(|r| r.inconclusive.len()).sum();
    let failed = violations > 0 || (strict && inconclusive > 0);

    let text = if json {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            reports: &'a [RangeReport],
        }
        to_json(&Doc { schema_version: SCHEMA_VERSION, reports: &reports })
    } else {
        let mut out = String::new();
        for r in &reports {
            writeln!(
                out,
                "{} [{}, {}]: checked {}, violations {}, inconclusive {} ({} ms)",
                r.fact_id,
                r.range[0],
                r.range[1],
                r.checked,
                r.violations.len(),
                r.inconclusive.len(),
                r.elapsed.as_millis()
            )
            .unwrap();
            for v in r.violations.iter().take(10) {
                writeln!(out, "  violation at {}: {}", v.x, v.detail).unwrap();
            }
            for v in r.inconclusive.iter().take(10) {
                writeln!(out, "  inconclusive at {}: {}", v.x, v.detail).unwrap();
            }
        }
        out
    };
    print!("{text}");
    output.write(&text, !failed)?;
    Ok(if failed { EXIT_VIOLATION } else { EXIT_OK })
}

fn cmd_tree(
    reduced: bool,
    root: Option<Nat>,
    max_value: Option<Nat>,
    max_depth: Option<u32>,
    json: bool,
    output: &Output,
) -> Result<u8, Failure> {
    let flavor = if reduced { Flavor::Reduced } else { Flavor::Full };
    let root = root.unwrap_or_else(|| flavor.canonical_root());
    if flavor == Flavor::Reduced && ResidueClass::of(&root) != ResidueClass::C2 {
        return Err(Failure::usage(format!("reduced tree root {root} is not in class [2]")));
    }
    let t = tree::build_tree(flavor, &root, Limits { max_depth, max_value })?;
    let text = if json { t.to_json() + "\n" } else { t.to_dot() };
    print!("{text}");
    output.write(&text, true)?;
    Ok(EXIT_OK)
}

fn cmd_cycles(max_len: u32, executor: &Executor, json: bool) -> Result<u8, Failure> {
    let found = cycles::search_cycles_with(max_len, executor)?;
    let unexpected: Vec<&CycleCandidate> = found.iter().filter(|c| !c.is_trivial()).collect();
    if json {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            max_len: u32,
            candidates: &'a [CycleCandidate],
            only_trivial: bool,
        }
        print!(
            "{}",
            to_json(&Doc {
                schema_version: SCHEMA_VERSION,
                max_len,
                candidates: &found,
                only_trivial: unexpected.is_empty(),
            })
        );
    } else {
        for c in &found {
            let kind = if c.simple { "simple" } else { "repeated" };
            println!("k={} {} x={} {kind}", c.seq.k(), c.seq, c.x);
        }
        if unexpected.is_empty() {
            println!("{} cycle words up to length {max_len}, all on the 1-2 cycle", found.len());
        } else {
            println!("{} cycle words outside the 1-2 cycle", unexpected.len());
        }
    }
    Ok(if unexpected.is_empty() { EXIT_OK } else { EXIT_VIOLATION })
}
