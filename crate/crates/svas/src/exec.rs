//! Execution semantics for SVAS programs.
//!
//! A run starts at command 0 with all counters 0 and an empty stack. A
//! decrement of a zero counter or an erroneous pop aborts the run. A run is
//! accepting when it reaches the final `halt` with all counters 0 and the
//! stack empty.
//!
//! Nondeterminism is confined to `goto` commands. Three deterministic drivers
//! resolve it:
//! - [`replay`] consumes one bit of a [`Witness`] per executed `goto`;
//! - [`run_policy`] evaluates a [`ChoiceAnnotationTable`] predicate per `goto`;
//! - [`replay_sequence`] follows an externally dictated command sequence.
//!
//! Exhaustive search over the configuration graph lives in [`crate::exec::search`].

use std::fmt;

use thiserror::Error;

use crate::program::{Command, Configuration, CounterId, SvasProgram, SymbolId};

mod search;
pub use search::{
    search_exact_counts, search_exact_counts_with, search_reach, search_reach_with,
    ExactCountsResult, LimitKind, Limits, SearchResult, SearchStats, SearchVerdict,
};

/// Why a run aborted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortReason {
    DecrementOfZero { counter: CounterId },
    PopOnEmpty { symbol: SymbolId },
    PopMismatch { expected: SymbolId, found: SymbolId },
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::DecrementOfZero { .. } => write!(f, "decrement of zero"),
            AbortReason::PopOnEmpty { .. } => write!(f, "pop on empty stack"),
            AbortReason::PopMismatch { .. } => write!(f, "pop of mismatched symbol"),
        }
    }
}

/// Result of exploring one configuration by a single step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    /// Successor configurations; the choice bit is `Some` exactly for `goto`.
    Successors(Vec<(Configuration, Option<bool>)>),
    Abort(AbortReason),
    Halted,
}

/// Yields all successors of `c` under `p`: one for `inc`/`dec`/`push`/`pop`,
/// two (with choice bits 0 and 1) for `goto`, none for `halt`.
pub fn step(p: &SvasProgram, c: &Configuration) -> StepOutcome {
    match p.commands()[c.pc] {
        Command::Goto(a, b) => {
            let mut first = c.clone();
            first.pc = a;
            let mut second = c.clone();
            second.pc = b;
            StepOutcome::Successors(vec![(first, Some(false)), (second, Some(true))])
        }
        Command::Halt => StepOutcome::Halted,
        _ => {
            let mut next = c.clone();
            match micro_step(p, &mut next) {
                Ok(()) => StepOutcome::Successors(vec![(next, None)]),
                Err(reason) => StepOutcome::Abort(reason),
            }
        }
    }
}

/// Applies a non-jump, non-halt command in place.
fn micro_step(p: &SvasProgram, c: &mut Configuration) -> Result<(), AbortReason> {
    match p.commands()[c.pc] {
        Command::Inc(x) => {
            c.counters[x.0] += 1;
            c.pc += 1;
        }
        Command::Dec(x) => {
            if c.counters[x.0] == 0 {
                return Err(AbortReason::DecrementOfZero { counter: x });
            }
            c.counters[x.0] -= 1;
            c.pc += 1;
        }
        Command::Push(s) => {
            c.stack.push(s);
            c.pc += 1;
        }
        Command::Pop(s) => match c.stack.last() {
            None => return Err(AbortReason::PopOnEmpty { symbol: s }),
            Some(&top) if top != s => {
                return Err(AbortReason::PopMismatch {
                    expected: s,
                    found: top,
                })
            }
            Some(_) => {
                c.stack.pop();
                c.pc += 1;
            }
        },
        Command::Goto(..) | Command::Halt => unreachable!("micro_step on jump or halt"),
    }
    Ok(())
}

/// True when `c` sits at the final `halt` with all counters 0 and empty stack.
pub fn is_accepting(p: &SvasProgram, c: &Configuration) -> bool {
    p.commands()[c.pc].is_halt() && c.counters.iter().all(|&v| v == 0) && c.stack.is_empty()
}

/// A certificate for nondeterministic acceptance: one bit per executed `goto`,
/// in execution order; bit 0 selects the first target.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witness(pub Vec<bool>);

impl Witness {
    /// Parses the one-line `0`/`1` file format. Surrounding whitespace is
    /// ignored; an empty input is the empty witness.
    pub fn parse(text: &str) -> Result<Witness, ExecError> {
        let mut bits = Vec::new();
        for ch in text.trim().chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(ExecError::BadWitnessChar(ch)),
            }
        }
        Ok(Witness(bits))
    }

    pub fn serialize(&self) -> String {
        let mut s: String = self.0.iter().map(|&b| if b { '1' } else { '0' }).collect();
        s.push('\n');
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Errors of the execution layer that are genuine API misuses, as opposed to
/// run outcomes (which are values in [`TraceOutcome`]).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("unknown counter id {0:?}")]
    UnknownCounter(CounterId),
    #[error("witness contains character `{0}`; expected only 0 and 1")]
    BadWitnessChar(char),
}

/// Problems with a [`ChoiceAnnotationTable`] detected before running.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("goto at command {0} has distinct targets but no annotation")]
    MissingAnnotation(usize),
    #[error("annotation for command {index} mentions an undeclared counter or symbol")]
    InvalidPredicate { index: usize },
    #[error("annotation attached to command {0}, which is not a goto")]
    NotAGoto(usize),
}

/// Branch predicate of a choice annotation, evaluated on the current
/// configuration.
///
/// `AllOnes` holds when the maximal run of the two given digit symbols at the
/// top of the stack contains no `zero` digit (an empty run counts as all
/// ones).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoicePredicate {
    Zero(CounterId),
    Nonzero(CounterId),
    Top(SymbolId),
    AllOnes {
        level: usize,
        zero: SymbolId,
        one: SymbolId,
    },
}

impl ChoicePredicate {
    pub fn eval(&self, c: &Configuration) -> bool {
        match *self {
            ChoicePredicate::Zero(x) => c.counters[x.0] == 0,
            ChoicePredicate::Nonzero(x) => c.counters[x.0] != 0,
            ChoicePredicate::Top(s) => c.stack.last() == Some(&s),
            ChoicePredicate::AllOnes { zero, one, .. } => c
                .stack
                .iter()
                .rev()
                .take_while(|&&s| s == zero || s == one)
                .all(|&s| s == one),
        }
    }

    fn mentions_valid_ids(&self, p: &SvasProgram) -> bool {
        match *self {
            ChoicePredicate::Zero(x) | ChoicePredicate::Nonzero(x) => x.0 < p.counters().len(),
            ChoicePredicate::Top(s) => s.0 < p.alphabet().len(),
            ChoicePredicate::AllOnes { zero, one, .. } => {
                zero.0 < p.alphabet().len() && one.0 < p.alphabet().len()
            }
        }
    }
}

/// Resolution of one `goto`: when the predicate holds, take the branch with
/// the given index (0 = first target), otherwise the other one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChoiceAnnotation {
    pub predicate: ChoicePredicate,
    pub branch_if_true: bool,
}

impl ChoiceAnnotation {
    pub fn choose(&self, c: &Configuration) -> bool {
        if self.predicate.eval(c) {
            self.branch_if_true
        } else {
            !self.branch_if_true
        }
    }
}

/// Per-`goto` choice resolutions, keyed by command index. Produced by the
/// yardstick compiler to single out the honest run of a compiled program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChoiceAnnotationTable {
    pub by_goto: std::collections::BTreeMap<usize, ChoiceAnnotation>,
}

impl ChoiceAnnotationTable {
    /// Checks that every distinct-target `goto` of `p` is annotated and that
    /// every predicate mentions only declared counters and symbols.
    pub fn validate(&self, p: &SvasProgram) -> Result<(), PolicyError> {
        for (i, cmd) in p.commands().iter().enumerate() {
            if let Command::Goto(a, b) = *cmd {
                if a != b && !self.by_goto.contains_key(&i) {
                    return Err(PolicyError::MissingAnnotation(i));
                }
            }
        }
        for (&i, ann) in &self.by_goto {
            if !matches!(p.commands().get(i), Some(Command::Goto(..))) {
                return Err(PolicyError::NotAGoto(i));
            }
            if !ann.predicate.mentions_valid_ids(p) {
                return Err(PolicyError::InvalidPredicate { index: i });
            }
        }
        Ok(())
    }
}

/// How a driven run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceOutcome {
    /// Halt reached with all counters 0, empty stack, and no unconsumed input.
    Accepted,
    /// Halt reached but the configuration is not accepting.
    HaltedRejected,
    Aborted { reason: AbortReason, step: usize },
    /// A `goto` was reached with no witness bits left.
    WitnessTooShort { step: usize },
    /// Halt was reached with witness bits left over.
    WitnessTooLong { leftover: usize },
    /// A dictated command sequence diverged from the program's control flow.
    SequenceMismatch { step: usize },
    /// The step limit was exhausted.
    LimitHit,
}

/// One executed command and the configuration after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub index: usize,
    pub after: Configuration,
}

/// Inc/Dec executions observed on one counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CounterEvents {
    pub incs: u64,
    pub decs: u64,
}

/// A fully instrumented run.
///
/// `steps` lists executed commands in order (including the final `halt` when
/// reached) unless recording was disabled; `exec_counts` and `events` are
/// always filled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
    pub exec_counts: Vec<u64>,
    pub events: Vec<CounterEvents>,
    pub outcome: TraceOutcome,
    pub final_config: Configuration,
    pub steps_taken: usize,
}

impl RunTrace {
    pub fn accepted(&self) -> bool {
        self.outcome == TraceOutcome::Accepted
    }

    /// Exact numbers of executed `inc` and `dec` commands on `counter`.
    pub fn count_events(&self, counter: CounterId) -> Result<(u64, u64), ExecError> {
        self.events
            .get(counter.0)
            .map(|e| (e.incs, e.decs))
            .ok_or(ExecError::UnknownCounter(counter))
    }

    /// Total executions of the commands with the given indices.
    pub fn executions_of(&self, indices: &[usize]) -> u64 {
        indices.iter().map(|&i| self.exec_counts[i]).sum()
    }
}

/// Options for the deterministic runners.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Record the full step list. Disable for very long runs; counts and the
    /// final configuration are still filled.
    pub record_steps: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { record_steps: true }
    }
}

struct Recorder {
    steps: Vec<TraceStep>,
    exec_counts: Vec<u64>,
    events: Vec<CounterEvents>,
    steps_taken: usize,
    record: bool,
}

impl Recorder {
    fn new(p: &SvasProgram, record: bool) -> Self {
        Recorder {
            steps: Vec::new(),
            exec_counts: vec![0; p.commands().len()],
            events: vec![CounterEvents::default(); p.counters().len()],
            steps_taken: 0,
            record,
        }
    }

    fn executed(&mut self, p: &SvasProgram, index: usize, after: &Configuration) {
        self.exec_counts[index] += 1;
        match p.commands()[index] {
            Command::Inc(c) => self.events[c.0].incs += 1,
            Command::Dec(c) => self.events[c.0].decs += 1,
            _ => {}
        }
        self.steps_taken += 1;
        if self.record {
            self.steps.push(TraceStep {
                index,
                after: after.clone(),
            });
        }
    }

    fn finish(self, outcome: TraceOutcome, final_config: Configuration) -> RunTrace {
        RunTrace {
            steps: self.steps,
            exec_counts: self.exec_counts,
            events: self.events,
            outcome,
            final_config,
            steps_taken: self.steps_taken,
        }
    }
}

/// Deterministically replays a witness; see [`replay_with`].
pub fn replay(p: &SvasProgram, w: &Witness) -> RunTrace {
    replay_with(p, w, RunOptions::default(), |_| {})
}

/// Replays `w` against `p`, consuming one bit per `goto`. Witness exhaustion
/// and leftovers are trace outcomes, not errors. `inspect` sees every
/// configuration after each executed command.
pub fn replay_with(
    p: &SvasProgram,
    w: &Witness,
    opts: RunOptions,
    mut inspect: impl FnMut(&Configuration),
) -> RunTrace {
    let mut cfg = Configuration::initial(p);
    let mut rec = Recorder::new(p, opts.record_steps);
    let mut used = 0usize;
    loop {
        let pc = cfg.pc;
        match p.commands()[pc] {
            Command::Halt => {
                rec.executed(p, pc, &cfg);
                inspect(&cfg);
                let outcome = if used < w.0.len() {
                    TraceOutcome::WitnessTooLong {
                        leftover: w.0.len() - used,
                    }
                } else if is_accepting(p, &cfg) {
                    TraceOutcome::Accepted
                } else {
                    TraceOutcome::HaltedRejected
                };
                return rec.finish(outcome, cfg);
            }
            Command::Goto(a, b) => {
                let Some(&bit) = w.0.get(used) else {
                    let step = rec.steps_taken;
                    return rec.finish(TraceOutcome::WitnessTooShort { step }, cfg);
                };
                used += 1;
                cfg.pc = if bit { b } else { a };
                rec.executed(p, pc, &cfg);
                inspect(&cfg);
            }
            _ => match micro_step(p, &mut cfg) {
                Ok(()) => {
                    rec.executed(p, pc, &cfg);
                    inspect(&cfg);
                }
                Err(reason) => {
                    let step = rec.steps_taken;
                    return rec.finish(TraceOutcome::Aborted { reason, step }, cfg);
                }
            },
        }
    }
}

/// Policy-guided run; see [`run_policy_with`].
pub fn run_policy(
    p: &SvasProgram,
    ann: &ChoiceAnnotationTable,
    max_steps: usize,
) -> Result<RunTrace, PolicyError> {
    run_policy_with(p, ann, max_steps, RunOptions::default(), |_| {})
}

/// Runs `p` deterministically, resolving each distinct-target `goto` by its
/// annotation predicate. The table is validated up front; an unresolvable
/// table is an error, whereas hitting `max_steps` yields a `LimitHit` trace.
pub fn run_policy_with(
    p: &SvasProgram,
    ann: &ChoiceAnnotationTable,
    max_steps: usize,
    opts: RunOptions,
    mut inspect: impl FnMut(&Configuration),
) -> Result<RunTrace, PolicyError> {
    ann.validate(p)?;
    let mut cfg = Configuration::initial(p);
    let mut rec = Recorder::new(p, opts.record_steps);
    loop {
        if rec.steps_taken >= max_steps {
            return Ok(rec.finish(TraceOutcome::LimitHit, cfg));
        }
        let pc = cfg.pc;
        match p.commands()[pc] {
            Command::Halt => {
                rec.executed(p, pc, &cfg);
                inspect(&cfg);
                let outcome = if is_accepting(p, &cfg) {
                    TraceOutcome::Accepted
                } else {
                    TraceOutcome::HaltedRejected
                };
                return Ok(rec.finish(outcome, cfg));
            }
            Command::Goto(a, b) => {
                let bit = if a == b {
                    false
                } else {
                    ann.by_goto[&pc].choose(&cfg)
                };
                cfg.pc = if bit { b } else { a };
                rec.executed(p, pc, &cfg);
                inspect(&cfg);
            }
            _ => match micro_step(p, &mut cfg) {
                Ok(()) => {
                    rec.executed(p, pc, &cfg);
                    inspect(&cfg);
                }
                Err(reason) => {
                    let step = rec.steps_taken;
                    return Ok(rec.finish(TraceOutcome::Aborted { reason, step }, cfg));
                }
            },
        }
    }
}

/// Replays an externally dictated command sequence (as produced by decoding a
/// forest) against the program semantics.
///
/// Each dictated command must be reachable from the previous one: the
/// successor for straight-line commands, either target for a `goto`. The
/// sequence must start at command 0 and end exactly at `halt`.
pub fn replay_sequence(p: &SvasProgram, seq: &[usize]) -> RunTrace {
    let mut cfg = Configuration::initial(p);
    let mut rec = Recorder::new(p, true);
    let mut allowed: Vec<usize> = vec![0];
    for (t, &idx) in seq.iter().enumerate() {
        if !allowed.contains(&idx) || idx >= p.commands().len() {
            return rec.finish(TraceOutcome::SequenceMismatch { step: t }, cfg);
        }
        cfg.pc = idx;
        match p.commands()[idx] {
            Command::Halt => {
                rec.executed(p, idx, &cfg);
                let outcome = if t + 1 != seq.len() {
                    TraceOutcome::SequenceMismatch { step: t + 1 }
                } else if is_accepting(p, &cfg) {
                    TraceOutcome::Accepted
                } else {
                    TraceOutcome::HaltedRejected
                };
                return rec.finish(outcome, cfg);
            }
            Command::Goto(a, b) => {
                rec.executed(p, idx, &cfg);
                allowed = vec![a, b];
            }
            _ => match micro_step(p, &mut cfg) {
                Ok(()) => {
                    rec.executed(p, idx, &cfg);
                    allowed = vec![idx + 1];
                }
                Err(reason) => {
                    let step = rec.steps_taken;
                    return rec.finish(TraceOutcome::Aborted { reason, step }, cfg);
                }
            },
        }
    }
    // Sequence ended without reaching halt.
    let step = seq.len();
    rec.finish(TraceOutcome::SequenceMismatch { step }, cfg)
}

/// Renders a trace in the line-per-step export format, followed by a
/// machine-readable footer. Timing never appears here, keeping the output
/// byte-deterministic.
pub fn trace_text(p: &SvasProgram, t: &RunTrace) -> String {
    let mut out = String::new();
    for s in &t.steps {
        let counters = p
            .counters()
            .iter()
            .zip(&s.after.counters)
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(" ");
        let stack = s
            .after
            .stack
            .iter()
            .map(|&sym| p.symbol_name(sym))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            s.index,
            p.command_text(&p.commands()[s.index]),
            counters,
            stack
        ));
    }
    out.push_str(&format!("# outcome={:?}\n", t.outcome));
    out.push_str(&format!("# steps={}\n", t.steps_taken));
    for (name, ev) in p.counters().iter().zip(&t.events) {
        out.push_str(&format!("# events {name} inc={} dec={}\n", ev.incs, ev.decs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_svas;

    fn prog(text: &str) -> SvasProgram {
        parse_svas(text).expect("parse")
    }

    #[test]
    fn dec_of_zero_aborts() {
        let p = prog("counters: x\nalphabet:\ndec x\nhalt");
        let c = Configuration::initial(&p);
        assert_eq!(
            step(&p, &c),
            StepOutcome::Abort(AbortReason::DecrementOfZero {
                counter: CounterId(0)
            })
        );
    }

    #[test]
    fn push_appends_to_stack() {
        let p = prog("counters:\nalphabet: a b\npush b\npush a\nhalt");
        let mut c = Configuration::initial(&p);
        c.pc = 1;
        c.stack = vec![SymbolId(1)];
        match step(&p, &c) {
            StepOutcome::Successors(s) => {
                assert_eq!(s.len(), 1);
                assert_eq!(s[0].0.stack, vec![SymbolId(1), SymbolId(0)]);
                assert_eq!(s[0].0.pc, 2);
                assert_eq!(s[0].1, None);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn goto_yields_two_successors_with_bits() {
        let p = prog("counters:\nalphabet:\ngoto L or M\nL: goto E or E\nM: goto E or E\nE: halt");
        let c = Configuration::initial(&p);
        match step(&p, &c) {
            StepOutcome::Successors(s) => {
                assert_eq!(s.len(), 2);
                assert_eq!((s[0].0.pc, s[0].1), (1, Some(false)));
                assert_eq!((s[1].0.pc, s[1].1), (2, Some(true)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pop_mismatch_and_empty_abort() {
        let p = prog("counters:\nalphabet: a b\npush a\npop b\nhalt");
        let t = replay(&p, &Witness::default());
        assert_eq!(
            t.outcome,
            TraceOutcome::Aborted {
                reason: AbortReason::PopMismatch {
                    expected: SymbolId(1),
                    found: SymbolId(0)
                },
                step: 1
            }
        );
        let q = prog("counters:\nalphabet: a\npop a\nhalt");
        let t = replay(&q, &Witness::default());
        assert!(matches!(
            t.outcome,
            TraceOutcome::Aborted {
                reason: AbortReason::PopOnEmpty { .. },
                step: 0
            }
        ));
    }

    #[test]
    fn replay_inc_dec_accepts_with_counts() {
        let p = prog("counters: x\nalphabet:\ninc x\ndec x\nhalt");
        let t = replay(&p, &Witness::default());
        assert_eq!(t.outcome, TraceOutcome::Accepted);
        assert_eq!(t.count_events(CounterId(0)).unwrap(), (1, 1));
        assert_eq!(t.steps.len(), 3); // inc, dec, halt
    }

    #[test]
    fn replay_rejects_nonzero_counter_at_halt() {
        let p = prog("counters: x\nalphabet:\ninc x\nhalt");
        let t = replay(&p, &Witness::default());
        assert_eq!(t.outcome, TraceOutcome::HaltedRejected);
    }

    #[test]
    fn witness_too_short_and_too_long_are_outcomes() {
        let p = prog("counters:\nalphabet:\nL: goto L or E\nE: halt");
        let t = replay(&p, &Witness::default());
        assert_eq!(t.outcome, TraceOutcome::WitnessTooShort { step: 0 });
        let t = replay(&p, &Witness(vec![true, true]));
        assert_eq!(t.outcome, TraceOutcome::WitnessTooLong { leftover: 1 });
    }

    #[test]
    fn witness_selects_targets_in_order() {
        let p = prog(
            "counters: x\nalphabet:\ngoto A or B\nA: inc x\nB: goto E or E\nE: halt",
        );
        // Bit 1: jump to B, skipping the increment; then the deterministic goto
        // still consumes a bit.
        let t = replay(&p, &Witness(vec![true, false]));
        assert_eq!(t.outcome, TraceOutcome::Accepted);
        // Bit 0 runs the increment and is rejected at halt.
        let t = replay(&p, &Witness(vec![false, false]));
        assert_eq!(t.outcome, TraceOutcome::HaltedRejected);
    }

    #[test]
    fn policy_takes_annotated_branch_on_nonzero() {
        let p = prog(
            "counters: x\nalphabet:\ninc x\ninc x\ninc x\nL: goto D or E\nD: dec x\ngoto L or L\nE: halt",
        );
        let mut ann = ChoiceAnnotationTable::default();
        ann.by_goto.insert(
            3,
            ChoiceAnnotation {
                predicate: ChoicePredicate::Nonzero(CounterId(0)),
                branch_if_true: false,
            },
        );
        let t = run_policy(&p, &ann, 1000).unwrap();
        assert_eq!(t.outcome, TraceOutcome::Accepted);
        assert_eq!(t.count_events(CounterId(0)).unwrap(), (3, 3));
    }

    #[test]
    fn policy_top_predicate_falls_to_other_branch() {
        let p = prog(
            "counters:\nalphabet: r3 r7\npush r3\nL: goto A or B\nA: pop r7\ngoto E or E\nB: pop r3\nE: halt",
        );
        let mut ann = ChoiceAnnotationTable::default();
        ann.by_goto.insert(
            1,
            ChoiceAnnotation {
                predicate: ChoicePredicate::Top(SymbolId(1)),
                branch_if_true: false,
            },
        );
        let t = run_policy(&p, &ann, 100).unwrap();
        // Top is r3, not r7, so the predicate is false and branch B is taken.
        assert_eq!(t.outcome, TraceOutcome::Accepted);
    }

    #[test]
    fn policy_missing_annotation_is_an_error() {
        let p = prog("counters:\nalphabet:\ngoto A or B\nA: goto E or E\nB: goto E or E\nE: halt");
        let err = run_policy(&p, &ChoiceAnnotationTable::default(), 10).unwrap_err();
        assert_eq!(err, PolicyError::MissingAnnotation(0));
    }

    #[test]
    fn policy_hits_step_limit() {
        let p = prog("counters:\nalphabet:\nL: goto L or L\nhalt");
        let t = run_policy(&p, &ChoiceAnnotationTable::default(), 25).unwrap();
        assert_eq!(t.outcome, TraceOutcome::LimitHit);
        assert_eq!(t.steps_taken, 25);
    }

    #[test]
    fn allones_predicate_scans_top_run() {
        let p = prog("counters:\nalphabet: d0 d1 r\nhalt");
        let d0 = SymbolId(0);
        let d1 = SymbolId(1);
        let r = SymbolId(2);
        let pred = ChoicePredicate::AllOnes {
            level: 1,
            zero: d0,
            one: d1,
        };
        let mut c = Configuration::initial(&p);
        c.stack = vec![r, d1, d1];
        assert!(pred.eval(&c));
        c.stack = vec![r, d0, d1];
        assert!(!pred.eval(&c));
        // The zero below the run terminator is invisible.
        c.stack = vec![d0, r, d1];
        assert!(pred.eval(&c));
        // Empty run counts as all ones.
        c.stack = vec![r];
        assert!(pred.eval(&c));
    }

    #[test]
    fn replay_sequence_follows_control_flow() {
        let p = prog("counters: x\nalphabet:\ninc x\ndec x\nhalt");
        let t = replay_sequence(&p, &[0, 1, 2]);
        assert_eq!(t.outcome, TraceOutcome::Accepted);
        let t = replay_sequence(&p, &[0, 2]);
        assert_eq!(t.outcome, TraceOutcome::SequenceMismatch { step: 1 });
        let t = replay_sequence(&p, &[0, 1]);
        assert_eq!(t.outcome, TraceOutcome::SequenceMismatch { step: 2 });
    }

    #[test]
    fn count_events_rejects_unknown_counter() {
        let p = prog("counters: x\nalphabet:\nhalt");
        let t = replay(&p, &Witness::default());
        assert!(t.count_events(CounterId(5)).is_err());
        assert_eq!(t.count_events(CounterId(0)).unwrap(), (0, 0));
    }

    #[test]
    fn witness_roundtrip() {
        let w = Witness(vec![true, false, true, true]);
        assert_eq!(Witness::parse(&w.serialize()).unwrap(), w);
        assert_eq!(Witness::parse("").unwrap(), Witness::default());
        assert!(Witness::parse("01x1").is_err());
    }
}
