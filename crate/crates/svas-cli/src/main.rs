//! Command-line front end wiring the toolkit into reproducible experiments.
//!
//! Exit status: 0 for positive verdicts (reachable, accepted, satisfied,
//! halts, claims hold), 1 for negative verdicts, 2 for usage errors and for
//! searches that end inconclusive. Deterministic results go to stdout;
//! timing goes to stderr so that outputs are byte-stable across runs.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use svas::counter::{bounded_halting, parse_cp, BoundedRunResult};
use svas::exec::{
    replay, run_policy, search_exact_counts, search_reach, trace_text, Limits, RunTrace,
    SearchVerdict, Witness,
};
use svas::logic::{
    data_matching_valid, decode_forest, emit_formula, encode_trace, evaluate,
    mutate_forest_described, parse_forest,
};
use svas::program::{parse_svas, SvasProgram};
use svas::yardstick::{
    compile, emit_dec_harness, emit_ztest_harness, sidecar, tetration_u64, CompiledUnit,
};

#[derive(Parser)]
#[command(name = "svas", version, about = "Stack VAS toolkit: compile, run, search, encode")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone, Copy)]
struct SearchLimits {
    /// Visited-set cap.
    #[arg(long, default_value_t = 1_000_000)]
    max_configs: usize,
    /// Stack-depth cap for explored configurations.
    #[arg(long, default_value_t = 64)]
    max_stack: usize,
    /// Counter-value cap for explored configurations.
    #[arg(long, default_value_t = 1 << 20)]
    max_counter: u64,
}

impl SearchLimits {
    fn to_limits(self) -> Result<Limits> {
        if self.max_configs == 0 || self.max_stack == 0 || self.max_counter == 0 {
            bail!("search limits must be positive");
        }
        Ok(Limits {
            max_configurations: self.max_configs,
            max_stack_depth: self.max_stack,
            max_counter_value: self.max_counter,
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a counter program into an SVAS at the given level.
    Compile {
        /// Counter program file.
        input: PathBuf,
        /// Yardstick level n; counters are simulated up to 2^^n.
        #[arg(long, short = 'n')]
        level: usize,
        /// Output path prefix; writes <out>.svas, <out>.ann, <out>.map.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a program deterministically under an annotation sidecar.
    Run {
        program: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value_t = 10_000_000)]
        max_steps: usize,
        /// Write the instrumented trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exhaustive reachability search for an accepting computation.
    Search {
        program: PathBuf,
        #[command(flatten)]
        limits: SearchLimits,
        /// Write the witness (one line of 0/1) when reachable.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Replay a witness file against a program.
    Replay {
        program: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Emit and validate the Dec_k harness.
    DecHarness {
        k: usize,
        /// Exhaustively enumerate accepting runs and their body decrements.
        #[arg(long)]
        exhaustive: bool,
        /// Write <emit>.svas/.ann/.map instead of (or besides) validating.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[command(flatten)]
        limits: SearchLimits,
        #[arg(long, default_value_t = 10_000_000)]
        max_steps: usize,
    },
    /// Emit and validate the zero-test harness.
    ZtHarness {
        k: usize,
        #[arg(long, default_value_t = 0)]
        preload: u64,
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Search for an accepting run instead of only emitting.
        #[arg(long)]
        search: bool,
        #[command(flatten)]
        limits: SearchLimits,
    },
    /// Decide bounded halting of a counter program.
    Oracle {
        input: PathBuf,
        #[arg(long)]
        bound: u64,
    },
    /// Encode an accepting run as a leaf-data forest.
    Encode {
        program: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000_000)]
        max_steps: usize,
    },
    /// Print the sentence characterizing encodings of accepting runs.
    Formula {
        program: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the formula, encoder and decoder on a run or forest.
    Check {
        program: PathBuf,
        #[arg(long)]
        forest: Option<PathBuf>,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000_000)]
        max_steps: usize,
    },
    /// Apply one seeded mutation to a forest file.
    Mutate {
        forest: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print compiled command counts over a level range and check affineness.
    Sizes {
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_level: usize,
    },
}

/// Verdict-to-exit-status convention.
enum Verdict {
    Yes,
    No,
    Undecided,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Prints to stdout, tolerating a closed pipe.
fn emit_stdout(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn write_out(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn load_program(path: &Path) -> Result<SvasProgram> {
    Ok(parse_svas(&read(path)?)?)
}

fn emit_unit(base: &Path, unit: &CompiledUnit) -> Result<()> {
    let with_ext = |ext: &str| base.with_extension(ext);
    write_out(&with_ext("svas"), &unit.program.serialize())?;
    write_out(&with_ext("ann"), &sidecar::annotations_text(unit))?;
    write_out(&with_ext("map"), &sidecar::sourcemap_text(&unit.sourcemap))?;
    println!(
        "wrote {} ({} commands), .ann, .map",
        with_ext("svas").display(),
        unit.program.commands().len()
    );
    Ok(())
}

/// Obtains an accepted trace by replaying a witness file or running the
/// annotated policy.
fn accepted_trace(
    program: &SvasProgram,
    witness: &Option<PathBuf>,
    annotations: &Option<PathBuf>,
    max_steps: usize,
) -> Result<RunTrace> {
    let trace = match (witness, annotations) {
        (Some(w), None) => replay(program, &Witness::parse(&read(w)?)?),
        (None, Some(a)) => {
            let table = sidecar::parse_annotations(&read(a)?, program)?;
            run_policy(program, &table, max_steps)?
        }
        _ => bail!("provide exactly one of --witness and --annotations"),
    };
    if !trace.accepted() {
        bail!("run is not accepting: {:?}", trace.outcome);
    }
    Ok(trace)
}

fn run(cmd: Cmd) -> Result<Verdict> {
    match cmd {
        Cmd::Compile { input, level, out } => {
            let cp = parse_cp(&read(&input)?)?;
            let unit = compile(&cp, level)?;
            emit_unit(&out, &unit)?;
            Ok(Verdict::Yes)
        }
        Cmd::Run {
            program,
            annotations,
            max_steps,
            trace,
        } => {
            let p = load_program(&program)?;
            let table = sidecar::parse_annotations(&read(&annotations)?, &p)?;
            let t = run_policy(&p, &table, max_steps)?;
            if let Some(path) = trace {
                write_out(&path, &trace_text(&p, &t))?;
            }
            println!("outcome={:?} steps={}", t.outcome, t.steps_taken);
            Ok(if t.accepted() { Verdict::Yes } else { Verdict::No })
        }
        Cmd::Search {
            program,
            limits,
            witness,
        } => {
            let p = load_program(&program)?;
            let started = Instant::now();
            let r = search_reach(&p, &limits.to_limits()?);
            eprintln!("wall={:?}", started.elapsed());
            println!(
                "explored={} discovered={} frontier-peak={}",
                r.stats.explored, r.stats.discovered, r.stats.frontier_peak
            );
            match r.verdict {
                SearchVerdict::Reachable(w) => {
                    println!("reachable witness-length={}", w.len());
                    if let Some(path) = witness {
                        write_out(&path, &w.serialize())?;
                    }
                    Ok(Verdict::Yes)
                }
                SearchVerdict::Unreachable => {
                    println!("unreachable");
                    Ok(Verdict::No)
                }
                SearchVerdict::Inconclusive(kind) => {
                    println!("inconclusive limit={kind:?}");
                    Ok(Verdict::Undecided)
                }
            }
        }
        Cmd::Replay {
            program,
            witness,
            trace,
        } => {
            let p = load_program(&program)?;
            let w = Witness::parse(&read(&witness)?)?;
            let t = replay(&p, &w);
            if let Some(path) = trace {
                write_out(&path, &trace_text(&p, &t))?;
            }
            println!("outcome={:?} steps={}", t.outcome, t.steps_taken);
            Ok(if t.accepted() { Verdict::Yes } else { Verdict::No })
        }
        Cmd::DecHarness {
            k,
            exhaustive,
            emit,
            limits,
            max_steps,
        } => {
            let unit = emit_dec_harness(k)?;
            if let Some(base) = &emit {
                emit_unit(base, &unit)?;
            }
            let expected = tetration_u64(k as u32)?;
            let body: Vec<usize> = unit.dec_body_commands(k).to_vec();
            if exhaustive {
                let counted: BTreeSet<usize> = body.iter().copied().collect();
                let started = Instant::now();
                let r = search_exact_counts(&unit.program, &limits.to_limits()?, &counted);
                eprintln!("wall={:?}", started.elapsed());
                let totals: Vec<u64> = r.accept_counts.keys().copied().collect();
                println!(
                    "exhaustive closed={} explored={} accepting-totals={totals:?}",
                    r.closed, r.stats.explored
                );
                if !r.closed {
                    return Ok(Verdict::Undecided);
                }
                let ok = !totals.is_empty() && totals.iter().all(|&t| t == expected);
                println!(
                    "verdict: accepting runs {}; s{k} body decrements always {expected}: {}",
                    if totals.is_empty() { "absent" } else { "exist" },
                    ok
                );
                Ok(if ok { Verdict::Yes } else { Verdict::No })
            } else {
                let t = run_policy(&unit.program, &unit.annotations, max_steps)?;
                let decs = t.executions_of(&body);
                println!(
                    "policy outcome={:?} steps={} s{k}-body-decrements={decs}",
                    t.outcome, t.steps_taken
                );
                let ok = t.accepted() && decs == expected;
                Ok(if ok { Verdict::Yes } else { Verdict::No })
            }
        }
        Cmd::ZtHarness {
            k,
            preload,
            emit,
            search,
            limits,
        } => {
            let unit = emit_ztest_harness(k, preload)?;
            if let Some(base) = &emit {
                emit_unit(base, &unit)?;
            }
            if !search {
                return Ok(Verdict::Yes);
            }
            let started = Instant::now();
            let r = search_reach(&unit.program, &limits.to_limits()?);
            eprintln!("wall={:?}", started.elapsed());
            match r.verdict {
                SearchVerdict::Reachable(_) => {
                    println!("reachable");
                    Ok(Verdict::Yes)
                }
                SearchVerdict::Unreachable => {
                    println!("unreachable");
                    Ok(Verdict::No)
                }
                SearchVerdict::Inconclusive(kind) => {
                    println!("inconclusive limit={kind:?}");
                    Ok(Verdict::Undecided)
                }
            }
        }
        Cmd::Oracle { input, bound } => {
            let cp = parse_cp(&read(&input)?)?;
            let r = bounded_halting(&cp, bound);
            match &r {
                BoundedRunResult::HaltsWithinBound { steps } => {
                    println!("halts-within-bound steps={steps}")
                }
                BoundedRunResult::ExceedsBound { step, counter } => println!(
                    "exceeds-bound step={step} counter={}",
                    cp.counter_name(*counter)
                ),
                BoundedRunResult::AbortsOnDecrement { step } => {
                    println!("aborts-on-decrement step={step}")
                }
                BoundedRunResult::Diverges { step } => println!("diverges step={step}"),
            }
            Ok(if r.halts() { Verdict::Yes } else { Verdict::No })
        }
        Cmd::Encode {
            program,
            witness,
            annotations,
            out,
            max_steps,
        } => {
            let p = load_program(&program)?;
            let t = accepted_trace(&p, &witness, &annotations, max_steps)?;
            let forest = encode_trace(&p, &t)?;
            let text = forest.serialize();
            match out {
                Some(path) => write_out(&path, &text)?,
                None => emit_stdout(&text),
            }
            Ok(Verdict::Yes)
        }
        Cmd::Formula { program, out } => {
            let p = load_program(&program)?;
            let phi = emit_formula(&p);
            let text = format!("{phi}\n");
            match out {
                Some(path) => write_out(&path, &text)?,
                None => emit_stdout(&text),
            }
            Ok(Verdict::Yes)
        }
        Cmd::Check {
            program,
            forest,
            witness,
            annotations,
            max_steps,
        } => {
            let p = load_program(&program)?;
            let phi = emit_formula(&p);
            let f = match (&forest, &witness, &annotations) {
                (Some(path), None, None) => parse_forest(&read(path)?)?,
                (None, _, _) => {
                    let t = accepted_trace(&p, &witness, &annotations, max_steps)?;
                    encode_trace(&p, &t)?
                }
                _ => bail!("provide --forest, or --witness/--annotations"),
            };
            let satisfied = evaluate(&phi, &f)?;
            let decoded = decode_forest(&p, &f);
            let decode_accepted = decoded.as_ref().map(|t| t.accepted()).unwrap_or(false);
            let matching = data_matching_valid(&p, &f);
            let agreement = satisfied == (decode_accepted && matching);
            println!(
                "satisfied={satisfied} decode-accepted={decode_accepted} data-matching={matching} agreement={agreement}"
            );
            if !agreement {
                bail!("formula and decoder disagree on this forest");
            }
            Ok(if satisfied { Verdict::Yes } else { Verdict::No })
        }
        Cmd::Mutate { forest, seed, out } => {
            let f = parse_forest(&read(&forest)?)?;
            let (m, kind) = mutate_forest_described(&f, seed);
            eprintln!("edit={kind}");
            let text = m.serialize();
            match out {
                Some(path) => write_out(&path, &text)?,
                None => emit_stdout(&text),
            }
            Ok(Verdict::Yes)
        }
        Cmd::Sizes { input, max_level } => {
            let cp = parse_cp(&read(&input)?)?;
            let counts: Vec<i64> = (1..=max_level.max(2))
                .map(|n| Ok(compile(&cp, n)?.program.commands().len() as i64))
                .collect::<Result<_>>()?;
            for (i, c) in counts.iter().enumerate() {
                println!("{}\t{c}", i + 1);
            }
            let slope = counts[1] - counts[0];
            let affine = counts
                .windows(2)
                .all(|w| w[1] - w[0] == slope);
            println!(
                "affine={affine} intercept={} slope={slope}",
                counts[0] - slope
            );
            Ok(if affine { Verdict::Yes } else { Verdict::No })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(Verdict::Yes) => ExitCode::SUCCESS,
        Ok(Verdict::No) => ExitCode::from(1),
        Ok(Verdict::Undecided) => {
            eprintln!("verdict undecided within the given limits");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
