//! Leaf-data forests, a two-variable first-order logic over them, and the
//! encoding of accepting SVAS computations as such forests.
//!
//! A leaf-data forest is a finite ordered forest whose nodes carry letters
//! from a finite alphabet and whose leaves additionally carry a data value
//! from an infinite domain (modelled as `u64`). The encoding of an accepting
//! computation uses the tree structure for the stack — an internal node is a
//! push/pop pair enclosing what happened in between — and data equality for
//! the counters: each increment shares a fresh value with exactly one later
//! decrement of the same counter.
//!
//! [`emit_formula`] produces, for a program `S`, the sentence whose models
//! are exactly the forests encoding accepting computations of `S` (up to
//! renaming of data values); [`encode_trace`] and [`decode_forest`] convert
//! between traces and forests, and [`mutate_forest`] supports adversarial
//! corpus generation.

use std::fmt;

use thiserror::Error;

mod axioms;
mod encode;
mod formula;
mod mutate;
pub mod random;

pub use axioms::emit_formula;
pub use encode::{
    data_matching_valid, decode_forest, encode_trace, traversal_events, DecodeError,
    EncodeError, EncodedEvent, EventPhase,
};
pub use formula::{
    atom_pairs, evaluate, leaf_flags, parse_formula, Atom, EvalError, Formula,
    FormulaParseError, Var,
};
pub use mutate::{mutate_forest, mutate_forest_described};

/// A letter of the derived finite alphabet: one per non-push/pop command
/// index, plus one per (push, pop) command pair over the same stack symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Cmd(usize),
    Pair(usize, usize),
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Cmd(i) => write!(f, "c{i}"),
            Letter::Pair(i, j) => write!(f, "p{i}_{j}"),
        }
    }
}

impl Letter {
    pub fn parse(s: &str) -> Option<Letter> {
        if let Some(rest) = s.strip_prefix('p') {
            let (a, b) = rest.split_once('_')?;
            Some(Letter::Pair(a.parse().ok()?, b.parse().ok()?))
        } else if let Some(rest) = s.strip_prefix('c') {
            Some(Letter::Cmd(rest.parse().ok()?))
        } else {
            None
        }
    }
}

/// A forest node: a letter, ordered children, and a data value exactly when
/// the node is a leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestNode {
    pub letter: Letter,
    pub data: Option<u64>,
    pub children: Vec<ForestNode>,
}

impl ForestNode {
    pub fn leaf(letter: Letter, data: u64) -> Self {
        ForestNode {
            letter,
            data: Some(data),
            children: Vec::new(),
        }
    }

    pub fn internal(letter: Letter, children: Vec<ForestNode>) -> Self {
        assert!(!children.is_empty(), "internal node with no children");
        ForestNode {
            letter,
            data: None,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn well_formed(&self) -> bool {
        (self.is_leaf() == self.data.is_some())
            && self.children.iter().all(ForestNode::well_formed)
    }

    fn count(&self) -> usize {
        1 + self.children.iter().map(ForestNode::count).sum::<usize>()
    }
}

/// An ordered forest with data labels on leaves only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LeafDataForest {
    pub roots: Vec<ForestNode>,
}

impl LeafDataForest {
    /// True when data values sit exactly on the leaves.
    pub fn well_formed(&self) -> bool {
        self.roots.iter().all(ForestNode::well_formed)
    }

    pub fn node_count(&self) -> usize {
        self.roots.iter().map(ForestNode::count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Leaves in document order (depth-first, left to right).
    pub fn leaves(&self) -> Vec<&ForestNode> {
        fn walk<'a>(n: &'a ForestNode, out: &mut Vec<&'a ForestNode>) {
            if n.is_leaf() {
                out.push(n);
            }
            for c in &n.children {
                walk(c, out);
            }
        }
        let mut out = Vec::new();
        for r in &self.roots {
            walk(r, &mut out);
        }
        out
    }

    /// The indented one-node-per-line text form.
    pub fn serialize(&self) -> String {
        fn walk(n: &ForestNode, depth: usize, out: &mut String) {
            for _ in 0..depth {
                out.push_str("  ");
            }
            match n.data {
                Some(d) => out.push_str(&format!("{} @{}\n", n.letter, d)),
                None => out.push_str(&format!("{}\n", n.letter)),
            }
            for c in &n.children {
                walk(c, depth + 1, out);
            }
        }
        let mut out = String::new();
        for r in &self.roots {
            walk(r, 0, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForestParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: leaf node without a data value")]
    LeafWithoutData { line: usize },
    #[error("line {line}: node with a data value has children")]
    DataOnInternal { line: usize },
}

/// Parses the indented forest format produced by [`LeafDataForest::serialize`].
pub fn parse_forest(text: &str) -> Result<LeafDataForest, ForestParseError> {
    struct Entry {
        line: usize,
        depth: usize,
        letter: Letter,
        data: Option<u64>,
    }
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let no_comment = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if no_comment.trim().is_empty() {
            continue;
        }
        let indent = no_comment.len() - no_comment.trim_start().len();
        if indent % 2 != 0 {
            return Err(ForestParseError::Syntax {
                line,
                message: "odd indentation".to_string(),
            });
        }
        let depth = indent / 2;
        let mut toks = no_comment.split_whitespace();
        let letter_tok = toks.next().unwrap();
        let letter = Letter::parse(letter_tok).ok_or_else(|| ForestParseError::Syntax {
            line,
            message: format!("bad letter `{letter_tok}`"),
        })?;
        let data = match toks.next() {
            None => None,
            Some(t) => {
                let v = t
                    .strip_prefix('@')
                    .and_then(|d| d.parse::<u64>().ok())
                    .ok_or_else(|| ForestParseError::Syntax {
                        line,
                        message: format!("bad data `{t}`"),
                    })?;
                Some(v)
            }
        };
        if toks.next().is_some() {
            return Err(ForestParseError::Syntax {
                line,
                message: "trailing tokens".to_string(),
            });
        }
        entries.push(Entry {
            line,
            depth,
            letter,
            data,
        });
    }

    // Rebuild by depth: a stack of open nodes, one per depth level.
    let mut roots: Vec<ForestNode> = Vec::new();
    let mut open: Vec<(usize, ForestNode)> = Vec::new();
    fn close_to(roots: &mut Vec<ForestNode>, open: &mut Vec<(usize, ForestNode)>, depth: usize) {
        while open.len() > depth {
            let (_, done) = open.pop().unwrap();
            match open.last_mut() {
                Some((_, parent)) => parent.children.push(done),
                None => roots.push(done),
            }
        }
    }
    for e in entries {
        if e.depth > open.len() {
            return Err(ForestParseError::Syntax {
                line: e.line,
                message: "indentation jumps by more than one level".to_string(),
            });
        }
        close_to(&mut roots, &mut open, e.depth);
        open.push((
            e.line,
            ForestNode {
                letter: e.letter,
                data: e.data,
                children: Vec::new(),
            },
        ));
    }
    close_to(&mut roots, &mut open, 0);

    // Data exactly on leaves.
    fn check(n: &ForestNode) -> Result<(), ForestParseError> {
        if n.is_leaf() && n.data.is_none() {
            return Err(ForestParseError::LeafWithoutData { line: 0 });
        }
        if !n.is_leaf() && n.data.is_some() {
            return Err(ForestParseError::DataOnInternal { line: 0 });
        }
        for c in &n.children {
            check(c)?;
        }
        Ok(())
    }
    let forest = LeafDataForest { roots };
    for r in &forest.roots {
        check(r)?;
    }
    Ok(forest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LeafDataForest {
        LeafDataForest {
            roots: vec![
                ForestNode::internal(
                    Letter::Pair(0, 3),
                    vec![
                        ForestNode::leaf(Letter::Cmd(1), 0),
                        ForestNode::leaf(Letter::Cmd(2), 1),
                    ],
                ),
                ForestNode::leaf(Letter::Cmd(4), 2),
            ],
        }
    }

    #[test]
    fn letters_roundtrip() {
        for l in [Letter::Cmd(0), Letter::Cmd(17), Letter::Pair(2, 7)] {
            assert_eq!(Letter::parse(&l.to_string()), Some(l));
        }
        assert_eq!(Letter::parse("q1"), None);
        assert_eq!(Letter::parse("p1"), None);
    }

    #[test]
    fn forest_text_roundtrip() {
        let f = sample();
        assert!(f.well_formed());
        let text = f.serialize();
        assert_eq!(text, "p0_3\n  c1 @0\n  c2 @1\nc4 @2\n");
        let g = parse_forest(&text).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn parse_rejects_data_on_internal() {
        let err = parse_forest("p0_3 @5\n  c1 @0\n").unwrap_err();
        assert!(matches!(err, ForestParseError::DataOnInternal { .. }));
    }

    #[test]
    fn parse_rejects_leaf_without_data() {
        let err = parse_forest("c1\n").unwrap_err();
        assert!(matches!(err, ForestParseError::LeafWithoutData { .. }));
    }

    #[test]
    fn leaves_are_in_document_order() {
        let f = sample();
        let data: Vec<u64> = f.leaves().iter().map(|l| l.data.unwrap()).collect();
        assert_eq!(data, vec![0, 1, 2]);
    }
}
