//! Deterministic counter programs with zero tests, and the bounded-halting
//! oracle.
//!
//! Counter programs share the SVAS header conventions but have no stack and
//! only deterministic control: `goto L` and `ifz c then L else M`. A run
//! starts with all counters 0 and is unique; the bounded-halting oracle
//! simulates it and classifies the outcome under a counter cap.

use std::collections::BTreeMap;
use std::collections::HashSet;

use crate::program::{
    is_identifier, parse_header, significant_lines, split_label, CounterId, ParseError,
};

/// A counter-program command. Jump targets are resolved command indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CCommand {
    Inc(CounterId),
    Dec(CounterId),
    Goto(usize),
    Ifz(CounterId, usize, usize),
    Halt,
}

/// A deterministic counter program with zero tests.
#[derive(Debug, Clone)]
pub struct CounterProgram {
    counters: Vec<String>,
    commands: Vec<CCommand>,
    labels: BTreeMap<String, usize>,
}

impl PartialEq for CounterProgram {
    fn eq(&self, other: &Self) -> bool {
        self.counters == other.counters && self.commands == other.commands
    }
}

impl Eq for CounterProgram {}

impl CounterProgram {
    pub fn from_parts(
        counters: Vec<String>,
        commands: Vec<CCommand>,
        labels: BTreeMap<String, usize>,
    ) -> Self {
        CounterProgram {
            counters,
            commands,
            labels,
        }
    }

    pub fn counters(&self) -> &[String] {
        &self.counters
    }

    pub fn commands(&self) -> &[CCommand] {
        &self.commands
    }

    pub fn labels(&self) -> &BTreeMap<String, usize> {
        &self.labels
    }

    pub fn counter_name(&self, c: CounterId) -> &str {
        &self.counters[c.0]
    }

    /// Canonical textual form, mirroring the SVAS scheme.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("counters:");
        for c in &self.counters {
            out.push(' ');
            out.push_str(c);
        }
        out.push('\n');
        for (i, cmd) in self.commands.iter().enumerate() {
            let text = match *cmd {
                CCommand::Inc(c) => format!("inc {}", self.counter_name(c)),
                CCommand::Dec(c) => format!("dec {}", self.counter_name(c)),
                CCommand::Goto(t) => format!("goto C{t}"),
                CCommand::Ifz(c, a, b) => {
                    format!("ifz {} then C{a} else C{b}", self.counter_name(c))
                }
                CCommand::Halt => "halt".to_string(),
            };
            out.push_str(&format!("C{i}: {text}\n"));
        }
        out
    }
}

/// Parses the textual counter-program format.
pub fn parse_cp(text: &str) -> Result<CounterProgram, ParseError> {
    let lines = significant_lines(text);
    if lines.is_empty() {
        return Err(ParseError::Syntax {
            line: 1,
            message: "expected `counters:` header".to_string(),
        });
    }
    let counters = parse_header(lines[0].0, &lines[0].1, "counters")?;

    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    let mut raw: Vec<(usize, String)> = Vec::new();
    for (line, content) in &lines[1..] {
        let (label, rest) = split_label(*line, content)?;
        if let Some(name) = label {
            if labels.insert(name.clone(), raw.len()).is_some() {
                return Err(ParseError::DuplicateLabel { line: *line, name });
            }
        }
        if rest.is_empty() {
            return Err(ParseError::Syntax {
                line: *line,
                message: "label without a command".to_string(),
            });
        }
        raw.push((*line, rest));
    }

    let counter_id = |line: usize, name: &str| -> Result<CounterId, ParseError> {
        counters
            .iter()
            .position(|c| c == name)
            .map(CounterId)
            .ok_or_else(|| ParseError::UndeclaredCounter {
                line,
                name: name.to_string(),
            })
    };
    let resolve = |line: usize, name: &str| -> Result<usize, ParseError> {
        if !is_identifier(name) {
            return Err(ParseError::Syntax {
                line,
                message: format!("invalid label `{name}`"),
            });
        }
        labels
            .get(name)
            .copied()
            .ok_or_else(|| ParseError::DanglingLabel {
                line,
                name: name.to_string(),
            })
    };

    let mut commands = Vec::with_capacity(raw.len());
    let mut halt_seen = false;
    for (line, rest) in &raw {
        if halt_seen {
            return Err(ParseError::HaltNotLast { line: *line });
        }
        let toks: Vec<&str> = rest.split_whitespace().collect();
        let cmd = match toks.as_slice() {
            ["inc", c] => CCommand::Inc(counter_id(*line, c)?),
            ["dec", c] => CCommand::Dec(counter_id(*line, c)?),
            ["goto", l] => CCommand::Goto(resolve(*line, l)?),
            ["ifz", c, "then", l1, "else", l2] => CCommand::Ifz(
                counter_id(*line, c)?,
                resolve(*line, l1)?,
                resolve(*line, l2)?,
            ),
            ["halt"] => {
                halt_seen = true;
                CCommand::Halt
            }
            _ => {
                return Err(ParseError::Syntax {
                    line: *line,
                    message: format!("cannot parse command `{rest}`"),
                })
            }
        };
        commands.push(cmd);
    }
    if !halt_seen {
        return Err(ParseError::MissingHalt);
    }

    Ok(CounterProgram {
        counters,
        commands,
        labels,
    })
}

/// Outcome of the unique run of a counter program under a counter cap.
///
/// Step indices are 0-based over executed commands. `ExceedsBound` reports the
/// step whose increment would push the named counter above the bound (that
/// step is not executed); `Diverges` reports the step at which the current
/// configuration was seen for the second time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedRunResult {
    HaltsWithinBound { steps: usize },
    ExceedsBound { step: usize, counter: CounterId },
    AbortsOnDecrement { step: usize },
    Diverges { step: usize },
}

impl BoundedRunResult {
    pub fn halts(&self) -> bool {
        matches!(self, BoundedRunResult::HaltsWithinBound { .. })
    }
}

/// Decides whether the unique run of `cp` reaches `halt` while every counter
/// stays at most `bound` throughout.
///
/// The simulation is a decision procedure: the configuration space under the
/// bound is finite, so a repeated configuration is conclusive divergence. A
/// decrement of a zero counter aborts the run; an increment that would exceed
/// the bound classifies the run as `ExceedsBound`.
pub fn bounded_halting(cp: &CounterProgram, bound: u64) -> BoundedRunResult {
    let mut pc: usize = 0;
    let mut counters = vec![0u64; cp.counters.len()];
    let mut seen: HashSet<(usize, Vec<u64>)> = HashSet::new();
    let mut step: usize = 0;
    loop {
        if !seen.insert((pc, counters.clone())) {
            return BoundedRunResult::Diverges { step };
        }
        match cp.commands[pc] {
            CCommand::Inc(c) => {
                if counters[c.0] + 1 > bound {
                    return BoundedRunResult::ExceedsBound { step, counter: c };
                }
                counters[c.0] += 1;
                pc += 1;
            }
            CCommand::Dec(c) => {
                if counters[c.0] == 0 {
                    return BoundedRunResult::AbortsOnDecrement { step };
                }
                counters[c.0] -= 1;
                pc += 1;
            }
            CCommand::Goto(t) => pc = t,
            CCommand::Ifz(c, then_t, else_t) => {
                pc = if counters[c.0] == 0 { then_t } else { else_t };
            }
            CCommand::Halt => {
                return BoundedRunResult::HaltsWithinBound { steps: step };
            }
        }
        step += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(text: &str) -> CounterProgram {
        parse_cp(text).expect("parse")
    }

    #[test]
    fn parses_goto_and_ifz() {
        let p = cp("counters: x\nL: inc x\ngoto L2\nL2: halt");
        assert_eq!(
            p.commands(),
            &[
                CCommand::Inc(CounterId(0)),
                CCommand::Goto(2),
                CCommand::Halt
            ]
        );
        let q = cp("counters: x\nifz x then A else B\nA: inc x\nB: halt");
        assert_eq!(q.commands()[0], CCommand::Ifz(CounterId(0), 1, 2));
    }

    #[test]
    fn rejects_undefined_else_label() {
        let err = parse_cp("counters: x\nA: ifz x then A else B\nhalt").unwrap_err();
        assert!(matches!(err, ParseError::DanglingLabel { .. }));
    }

    #[test]
    fn roundtrip_identity() {
        let texts = [
            "counters: x y\ninc x\nL: ifz x then L2 else L\nL2: dec x\ngoto L3\nL3: halt",
            "counters:\nhalt",
        ];
        for t in texts {
            let p = cp(t);
            let q = cp(&p.serialize());
            assert_eq!(p, q);
            assert_eq!(p.serialize(), q.serialize());
        }
    }

    #[test]
    fn infinite_inc_loop_exceeds_bound() {
        // x grows forever; with bound 4 the fifth increment is rejected.
        let p = cp("counters: x\nL: inc x\ngoto L\nhalt");
        assert_eq!(
            bounded_halting(&p, 4),
            BoundedRunResult::ExceedsBound {
                step: 8,
                counter: CounterId(0)
            }
        );
    }

    #[test]
    fn inc_dec_halts_within_bound() {
        let p = cp("counters: x\ninc x\ndec x\nhalt");
        assert_eq!(
            bounded_halting(&p, 1),
            BoundedRunResult::HaltsWithinBound { steps: 2 }
        );
        // Bound 0 already rejects the first increment.
        assert_eq!(
            bounded_halting(&p, 0),
            BoundedRunResult::ExceedsBound {
                step: 0,
                counter: CounterId(0)
            }
        );
    }

    #[test]
    fn goto_self_diverges() {
        let p = cp("counters:\nL: goto L\nhalt");
        assert_eq!(bounded_halting(&p, 7), BoundedRunResult::Diverges { step: 1 });
    }

    #[test]
    fn dec_of_zero_aborts() {
        let p = cp("counters: x\ndec x\nhalt");
        assert_eq!(
            bounded_halting(&p, 3),
            BoundedRunResult::AbortsOnDecrement { step: 0 }
        );
    }

    #[test]
    fn halting_is_monotone_in_bound() {
        let p = cp("counters: x\ninc x\ninc x\ninc x\ndec x\ndec x\ndec x\nhalt");
        assert!(!bounded_halting(&p, 2).halts());
        for b in 3..20 {
            assert!(bounded_halting(&p, b).halts());
        }
    }

    #[test]
    fn oracle_is_deterministic() {
        let p = cp("counters: x y\ninc x\nifz y then A else B\nA: dec x\nB: halt");
        let r1 = bounded_halting(&p, 4);
        let r2 = bounded_halting(&p, 4);
        assert_eq!(r1, r2);
    }
}
