//! Textual sidecars of a compiled unit.
//!
//! Annotation sidecar, one resolution per line:
//!
//! ```text
//! <goto-index> <predicate> <branch-if-true>
//! ```
//!
//! where the predicate is `zero(c)`, `nonzero(c)`, `top(a)` or `allones(k)`
//! and the branch is 0 (first target) or 1. `allones(k)` refers to the
//! level-`k` digit symbols, which the compiler names `d0_k` and `d1_k`; the
//! parser resolves them through the program's alphabet.
//!
//! Source map sidecar, one line per command:
//!
//! ```text
//! <index> <gadget-path> [<source-command>]
//! ```

use thiserror::Error;

use crate::exec::{ChoiceAnnotation, ChoiceAnnotationTable, ChoicePredicate};
use crate::program::SvasProgram;
use crate::yardstick::{CompiledUnit, SourceMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SidecarError {
    #[error("line {line}: cannot parse `{content}`")]
    Syntax { line: usize, content: String },
    #[error("line {line}: unknown counter `{name}`")]
    UnknownCounter { line: usize, name: String },
    #[error("line {line}: unknown symbol `{name}`")]
    UnknownSymbol { line: usize, name: String },
    #[error("line {line}: no digit symbols for level {level}; expected `d0_{level}`/`d1_{level}` in the alphabet")]
    UnknownLevel { line: usize, level: usize },
}

fn predicate_text(p: &SvasProgram, pred: &ChoicePredicate) -> String {
    match *pred {
        ChoicePredicate::Zero(c) => format!("zero({})", p.counter_name(c)),
        ChoicePredicate::Nonzero(c) => format!("nonzero({})", p.counter_name(c)),
        ChoicePredicate::Top(s) => format!("top({})", p.symbol_name(s)),
        ChoicePredicate::AllOnes { level, .. } => format!("allones({level})"),
    }
}

/// Renders the annotation table of a compiled unit.
pub fn annotations_text(unit: &CompiledUnit) -> String {
    let mut out = String::new();
    for (idx, ann) in &unit.annotations.by_goto {
        out.push_str(&format!(
            "{idx} {} {}\n",
            predicate_text(&unit.program, &ann.predicate),
            u8::from(ann.branch_if_true)
        ));
    }
    out
}

/// Parses an annotation sidecar against a program.
pub fn parse_annotations(
    text: &str,
    program: &SvasProgram,
) -> Result<ChoiceAnnotationTable, SidecarError> {
    let mut table = ChoiceAnnotationTable::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let syntax = || SidecarError::Syntax {
            line,
            content: content.to_string(),
        };
        let toks: Vec<&str> = content.split_whitespace().collect();
        let [idx_tok, pred_tok, branch_tok] = toks.as_slice() else {
            return Err(syntax());
        };
        let idx: usize = idx_tok.parse().map_err(|_| syntax())?;
        let branch_if_true = match *branch_tok {
            "0" => false,
            "1" => true,
            _ => return Err(syntax()),
        };
        let (name, arg) = pred_tok
            .strip_suffix(')')
            .and_then(|s| s.split_once('('))
            .ok_or_else(syntax)?;
        let counter = |n: &str| {
            program
                .counter_id(n)
                .ok_or_else(|| SidecarError::UnknownCounter {
                    line,
                    name: n.to_string(),
                })
        };
        let predicate = match name {
            "zero" => ChoicePredicate::Zero(counter(arg)?),
            "nonzero" => ChoicePredicate::Nonzero(counter(arg)?),
            "top" => {
                ChoicePredicate::Top(program.symbol_id(arg).ok_or_else(|| {
                    SidecarError::UnknownSymbol {
                        line,
                        name: arg.to_string(),
                    }
                })?)
            }
            "allones" => {
                let level: usize = arg.parse().map_err(|_| syntax())?;
                let zero = program.symbol_id(&format!("d0_{level}"));
                let one = program.symbol_id(&format!("d1_{level}"));
                match (zero, one) {
                    (Some(zero), Some(one)) => ChoicePredicate::AllOnes { level, zero, one },
                    _ => return Err(SidecarError::UnknownLevel { line, level }),
                }
            }
            _ => return Err(syntax()),
        };
        table.by_goto.insert(
            idx,
            ChoiceAnnotation {
                predicate,
                branch_if_true,
            },
        );
    }
    Ok(table)
}

/// Renders the source map sidecar.
pub fn sourcemap_text(map: &SourceMap) -> String {
    let mut out = String::new();
    for (idx, e) in map.entries.iter().enumerate() {
        match e.source {
            Some(src) => out.push_str(&format!("{idx} {} {src}\n", e.gadget)),
            None => out.push_str(&format!("{idx} {}\n", e.gadget)),
        }
    }
    out
}
