//! SVAS programs: finite sequences of commands over non-negative counters and a
//! finite-alphabet stack, with nondeterministic two-way jumps and a single
//! trailing `halt`.
//!
//! The textual format is line-oriented. `#` starts a comment, blank lines are
//! skipped. The first two significant lines are the headers
//! `counters: n1 n2 ...` and `alphabet: a1 a2 ...` (either list may be empty),
//! followed by one command per line, each optionally prefixed by `LABEL:`:
//!
//! ```text
//! counters: x x'
//! alphabet: a
//! L0: inc x
//!     push a
//!     pop a
//!     dec x
//!     goto L0 or L1
//! L1: halt
//! ```
//!
//! Canonical serialization labels every command `Ci:` where `i` is its index;
//! jump targets are printed with those canonical labels.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Index into a program's counter list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CounterId(pub usize);

/// Index into a program's stack alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub usize);

/// A single SVAS command. Jump targets are resolved command indices; a
/// deterministic jump is encoded as a `Goto` with two equal targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Inc(CounterId),
    Dec(CounterId),
    Push(SymbolId),
    Pop(SymbolId),
    Goto(usize, usize),
    Halt,
}

impl Command {
    pub fn is_halt(&self) -> bool {
        matches!(self, Command::Halt)
    }
}

/// An SVAS program: declared counters and stack symbols, the command sequence,
/// and the (partial) map from source label names to command indices.
///
/// Structural equality (`==`) compares counters, alphabet and commands but not
/// the label map: labels only name command indices and are rewritten to the
/// canonical `Ci` scheme by serialization.
#[derive(Debug, Clone)]
pub struct SvasProgram {
    counters: Vec<String>,
    alphabet: Vec<String>,
    commands: Vec<Command>,
    labels: BTreeMap<String, usize>,
}

impl PartialEq for SvasProgram {
    fn eq(&self, other: &Self) -> bool {
        self.counters == other.counters
            && self.alphabet == other.alphabet
            && self.commands == other.commands
    }
}

impl Eq for SvasProgram {}

/// The state of a run: program counter, counter valuation and stack contents
/// (top of stack at the end of the vector). Counter values are indexed by
/// [`CounterId`] in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub pc: usize,
    pub counters: Vec<u64>,
    pub stack: Vec<SymbolId>,
}

impl Configuration {
    /// The initial configuration: first command, all counters 0, empty stack.
    pub fn initial(program: &SvasProgram) -> Self {
        Configuration {
            pc: 0,
            counters: vec![0; program.counters().len()],
            stack: Vec::new(),
        }
    }

    pub fn counter(&self, c: CounterId) -> u64 {
        self.counters[c.0]
    }
}

/// A violation of the static program invariants, reported by [`SvasProgram::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// No `halt` command at all.
    MissingHalt,
    /// A `halt` command that is not the last command.
    HaltNotLast { index: usize },
    /// A jump target that is not a valid command index.
    DanglingTarget { index: usize, target: usize },
    /// A command that names a counter outside the declared list.
    UndeclaredCounter { index: usize },
    /// A command that names a stack symbol outside the declared alphabet.
    UndeclaredSymbol { index: usize },
    /// A label that resolves outside the command sequence.
    DanglingLabel { label: String, target: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingHalt => write!(f, "program has no halt command"),
            Violation::HaltNotLast { index } => {
                write!(f, "halt at command {index} is not the last command")
            }
            Violation::DanglingTarget { index, target } => {
                write!(f, "command {index} jumps to nonexistent command {target}")
            }
            Violation::UndeclaredCounter { index } => {
                write!(f, "command {index} uses an undeclared counter")
            }
            Violation::UndeclaredSymbol { index } => {
                write!(f, "command {index} uses an undeclared stack symbol")
            }
            Violation::DanglingLabel { label, target } => {
                write!(f, "label {label} resolves to nonexistent command {target}")
            }
        }
    }
}

impl SvasProgram {
    /// Assembles a program from parts without validating it; use
    /// [`SvasProgram::validate`] to check the invariants.
    pub fn from_parts(
        counters: Vec<String>,
        alphabet: Vec<String>,
        commands: Vec<Command>,
        labels: BTreeMap<String, usize>,
    ) -> Self {
        SvasProgram {
            counters,
            alphabet,
            commands,
            labels,
        }
    }

    pub fn counters(&self) -> &[String] {
        &self.counters
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn labels(&self) -> &BTreeMap<String, usize> {
        &self.labels
    }

    pub fn counter_name(&self, c: CounterId) -> &str {
        &self.counters[c.0]
    }

    pub fn symbol_name(&self, s: SymbolId) -> &str {
        &self.alphabet[s.0]
    }

    pub fn counter_id(&self, name: &str) -> Option<CounterId> {
        self.counters.iter().position(|n| n == name).map(CounterId)
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.alphabet.iter().position(|n| n == name).map(SymbolId)
    }

    /// Index of the final `halt` command, assuming the program is valid.
    pub fn halt_index(&self) -> usize {
        self.commands.len() - 1
    }

    /// Checks every static invariant; an empty list means the program is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.commands.len();
        let halts: Vec<usize> = self
            .commands
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_halt())
            .map(|(i, _)| i)
            .collect();
        if halts.is_empty() {
            out.push(Violation::MissingHalt);
        }
        for &i in &halts {
            if i + 1 != n {
                out.push(Violation::HaltNotLast { index: i });
            }
        }
        for (i, cmd) in self.commands.iter().enumerate() {
            match *cmd {
                Command::Inc(c) | Command::Dec(c) => {
                    if c.0 >= self.counters.len() {
                        out.push(Violation::UndeclaredCounter { index: i });
                    }
                }
                Command::Push(s) | Command::Pop(s) => {
                    if s.0 >= self.alphabet.len() {
                        out.push(Violation::UndeclaredSymbol { index: i });
                    }
                }
                Command::Goto(a, b) => {
                    for t in [a, b] {
                        if t >= n {
                            out.push(Violation::DanglingTarget { index: i, target: t });
                        }
                    }
                }
                Command::Halt => {}
            }
        }
        for (label, &target) in &self.labels {
            if target >= n {
                out.push(Violation::DanglingLabel {
                    label: label.clone(),
                    target,
                });
            }
        }
        out
    }

    /// Canonical textual form: header lines, then every command labelled with
    /// its index. `parse` of the result is structurally equal to `self`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("counters:");
        for c in &self.counters {
            out.push(' ');
            out.push_str(c);
        }
        out.push('\n');
        out.push_str("alphabet:");
        for a in &self.alphabet {
            out.push(' ');
            out.push_str(a);
        }
        out.push('\n');
        for (i, cmd) in self.commands.iter().enumerate() {
            out.push_str(&format!("C{i}: {}\n", self.command_text(cmd)));
        }
        out
    }

    /// Renders one command in the concrete syntax, with canonical jump labels.
    pub fn command_text(&self, cmd: &Command) -> String {
        match *cmd {
            Command::Inc(c) => format!("inc {}", self.counter_name(c)),
            Command::Dec(c) => format!("dec {}", self.counter_name(c)),
            Command::Push(s) => format!("push {}", self.symbol_name(s)),
            Command::Pop(s) => format!("pop {}", self.symbol_name(s)),
            Command::Goto(a, b) => format!("goto C{a} or C{b}"),
            Command::Halt => "halt".to_string(),
        }
    }
}

/// Errors produced while parsing the textual SVAS format. Line numbers are
/// 1-based and refer to the original input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: undeclared counter `{name}`")]
    UndeclaredCounter { line: usize, name: String },
    #[error("line {line}: undeclared stack symbol `{name}`")]
    UndeclaredSymbol { line: usize, name: String },
    #[error("line {line}: duplicate label `{name}`")]
    DuplicateLabel { line: usize, name: String },
    #[error("line {line}: jump to undefined label `{name}`")]
    DanglingLabel { line: usize, name: String },
    #[error("line {line}: halt is not the last command")]
    HaltNotLast { line: usize },
    #[error("program has no halt command")]
    MissingHalt,
}

const KEYWORDS: &[&str] = &[
    "inc", "dec", "push", "pop", "goto", "halt", "or", "ifz", "then", "else", "counters",
    "alphabet",
];

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !KEYWORDS.contains(&s)
}

/// A significant line: 1-based number and comment-stripped content.
pub(crate) fn significant_lines(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let no_comment = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let trimmed = no_comment.trim();
            if trimmed.is_empty() {
                None
            } else {
                Some((i + 1, trimmed.to_string()))
            }
        })
        .collect()
}

/// Parses a header line `key: name1 name2 ...` and returns the names.
pub(crate) fn parse_header(
    line: usize,
    content: &str,
    key: &str,
) -> Result<Vec<String>, ParseError> {
    let rest = content
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(':'))
        .ok_or_else(|| ParseError::Syntax {
            line,
            message: format!("expected `{key}:` header"),
        })?;
    let mut names = Vec::new();
    for tok in rest.split_whitespace() {
        if !is_identifier(tok) {
            return Err(ParseError::Syntax {
                line,
                message: format!("invalid name `{tok}`"),
            });
        }
        if names.iter().any(|n| n == tok) {
            return Err(ParseError::Syntax {
                line,
                message: format!("duplicate name `{tok}`"),
            });
        }
        names.push(tok.to_string());
    }
    Ok(names)
}

/// Splits an optional `LABEL:` prefix off a command line.
pub(crate) fn split_label(
    line: usize,
    content: &str,
) -> Result<(Option<String>, String), ParseError> {
    if let Some(pos) = content.find(':') {
        let (head, tail) = content.split_at(pos);
        let head = head.trim();
        if !is_identifier(head) {
            return Err(ParseError::Syntax {
                line,
                message: format!("invalid label `{head}`"),
            });
        }
        Ok((Some(head.to_string()), tail[1..].trim().to_string()))
    } else {
        Ok((None, content.to_string()))
    }
}

/// Parses the textual SVAS format into a validated program.
pub fn parse_svas(text: &str) -> Result<SvasProgram, ParseError> {
    let lines = significant_lines(text);
    if lines.len() < 2 {
        return Err(ParseError::Syntax {
            line: lines.last().map(|(l, _)| *l).unwrap_or(1),
            message: "expected `counters:` and `alphabet:` headers".to_string(),
        });
    }
    let counters = parse_header(lines[0].0, &lines[0].1, "counters")?;
    let alphabet = parse_header(lines[1].0, &lines[1].1, "alphabet")?;

    // First pass: labels and raw command tokens.
    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    let mut raw: Vec<(usize, String)> = Vec::new();
    for (line, content) in &lines[2..] {
        let (label, rest) = split_label(*line, content)?;
        if let Some(name) = label {
            if labels.insert(name.clone(), raw.len()).is_some() {
                return Err(ParseError::DuplicateLabel {
                    line: *line,
                    name,
                });
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
    let symbol_id = |line: usize, name: &str| -> Result<SymbolId, ParseError> {
        alphabet
            .iter()
            .position(|a| a == name)
            .map(SymbolId)
            .ok_or_else(|| ParseError::UndeclaredSymbol {
                line,
                name: name.to_string(),
            })
    };
    let resolve = |line: usize, name: &str| -> Result<usize, ParseError> {
        labels
            .get(name)
            .copied()
            .ok_or_else(|| ParseError::DanglingLabel {
                line,
                name: name.to_string(),
            })
    };

    // Second pass: commands with resolved targets.
    let mut commands = Vec::with_capacity(raw.len());
    let mut halt_seen = false;
    for (line, rest) in &raw {
        let toks: Vec<&str> = rest.split_whitespace().collect();
        if halt_seen {
            return Err(ParseError::HaltNotLast { line: *line });
        }
        let cmd = match toks.as_slice() {
            ["inc", c] => Command::Inc(counter_id(*line, c)?),
            ["dec", c] => Command::Dec(counter_id(*line, c)?),
            ["push", a] => Command::Push(symbol_id(*line, a)?),
            ["pop", a] => Command::Pop(symbol_id(*line, a)?),
            ["goto", l1, "or", l2] => Command::Goto(resolve(*line, l1)?, resolve(*line, l2)?),
            ["halt"] => {
                halt_seen = true;
                Command::Halt
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

    Ok(SvasProgram {
        counters,
        alphabet,
        commands,
        labels,
    })
}

/// Canonical textual form of a program; see [`SvasProgram::serialize`].
pub fn serialize_svas(p: &SvasProgram) -> String {
    p.serialize()
}
