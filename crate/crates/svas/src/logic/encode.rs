//! Encoding accepting computations as leaf-data forests and decoding forests
//! back into runs.
//!
//! The traversal contract: an internal node labelled `p{i}_{j}` is visited
//! once before its children (the push at command `i`) and once after them
//! (the matching pop at command `j`); every other executed command is a leaf
//! in document order. A push immediately followed by its pop yields a
//! childless node, which by the forest definition is a leaf and carries a
//! fresh singleton data value.
//!
//! Counter discipline is carried by data: each increment allocates a fresh
//! value shared with exactly one later decrement of the same counter,
//! matched first-in-first-out; all other leaves get fresh singleton values.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::exec::{replay_sequence, RunTrace};
use crate::program::{Command, CounterId, SvasProgram};
use crate::logic::{ForestNode, LeafDataForest, Letter};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("trace is not accepted")]
    NotAccepted,
    #[error("trace has no recorded steps")]
    MissingSteps,
    #[error("push/pop structure of the trace is unbalanced")]
    UnbalancedTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("letter {letter} does not name a command of the program")]
    UnknownLetter { letter: Letter },
    #[error("internal node carries non-pair letter {letter}")]
    InternalNodeWithCommandLetter { letter: Letter },
}

/// Encodes an accepted trace of `p` as a leaf-data forest whose traversal
/// replays the trace. Data values are canonical consecutive integers in
/// allocation order.
pub fn encode_trace(p: &SvasProgram, t: &RunTrace) -> Result<LeafDataForest, EncodeError> {
    if !t.accepted() {
        return Err(EncodeError::NotAccepted);
    }
    if t.steps.is_empty() {
        return Err(EncodeError::MissingSteps);
    }
    let mut next_data = 0u64;
    let mut fresh = || {
        let v = next_data;
        next_data += 1;
        v
    };
    let mut queues: HashMap<CounterId, VecDeque<u64>> = HashMap::new();
    let mut roots: Vec<ForestNode> = Vec::new();
    // Open internal nodes: the push command index and the children so far.
    let mut open: Vec<(usize, Vec<ForestNode>)> = Vec::new();
    let attach = |open: &mut Vec<(usize, Vec<ForestNode>)>,
                  roots: &mut Vec<ForestNode>,
                  node: ForestNode| {
        match open.last_mut() {
            Some((_, children)) => children.push(node),
            None => roots.push(node),
        }
    };
    for step in &t.steps {
        let idx = step.index;
        match p.commands()[idx] {
            Command::Push(_) => open.push((idx, Vec::new())),
            Command::Pop(_) => {
                let (push_idx, children) = open.pop().ok_or(EncodeError::UnbalancedTrace)?;
                let letter = Letter::Pair(push_idx, idx);
                let node = if children.is_empty() {
                    ForestNode::leaf(letter, fresh())
                } else {
                    ForestNode::internal(letter, children)
                };
                attach(&mut open, &mut roots, node);
            }
            Command::Inc(c) => {
                let v = fresh();
                queues.entry(c).or_default().push_back(v);
                attach(&mut open, &mut roots, ForestNode::leaf(Letter::Cmd(idx), v));
            }
            Command::Dec(c) => {
                let v = queues
                    .get_mut(&c)
                    .and_then(VecDeque::pop_front)
                    .ok_or(EncodeError::UnbalancedTrace)?;
                attach(&mut open, &mut roots, ForestNode::leaf(Letter::Cmd(idx), v));
            }
            Command::Goto(..) | Command::Halt => {
                attach(&mut open, &mut roots, ForestNode::leaf(Letter::Cmd(idx), fresh()));
            }
        }
    }
    if !open.is_empty() {
        return Err(EncodeError::UnbalancedTrace);
    }
    Ok(LeafDataForest { roots })
}

/// Phase of a traversal event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventPhase {
    /// First visit of an internal node: the push.
    Open,
    /// Second visit of an internal node: the matching pop.
    Close,
    /// A leaf: one command, or the open of an immediately-closing pair
    /// (whose close follows as a separate event).
    Leaf,
}

/// One event of a forest traversal: the command it stands for and the
/// preorder index of the node that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodedEvent {
    pub phase: EventPhase,
    pub command: usize,
    pub node: usize,
}

/// The event sequence of a forest: each internal node visited once before its
/// children and a second time after them, leaves in document order.
pub fn traversal_events(
    p: &SvasProgram,
    forest: &LeafDataForest,
) -> Result<Vec<EncodedEvent>, DecodeError> {
    fn walk(
        p: &SvasProgram,
        n: &ForestNode,
        pre: &mut usize,
        out: &mut Vec<EncodedEvent>,
    ) -> Result<(), DecodeError> {
        let node = *pre;
        *pre += 1;
        if !letter_known(p, n.letter) {
            return Err(DecodeError::UnknownLetter { letter: n.letter });
        }
        match n.letter {
            Letter::Cmd(i) => {
                if !n.is_leaf() {
                    return Err(DecodeError::InternalNodeWithCommandLetter { letter: n.letter });
                }
                out.push(EncodedEvent {
                    phase: EventPhase::Leaf,
                    command: i,
                    node,
                });
            }
            Letter::Pair(i, j) => {
                let open_phase = if n.is_leaf() {
                    EventPhase::Leaf
                } else {
                    EventPhase::Open
                };
                out.push(EncodedEvent {
                    phase: open_phase,
                    command: i,
                    node,
                });
                for c in &n.children {
                    walk(p, c, pre, out)?;
                }
                out.push(EncodedEvent {
                    phase: EventPhase::Close,
                    command: j,
                    node,
                });
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    let mut pre = 0usize;
    for r in &forest.roots {
        walk(p, r, &mut pre, &mut out)?;
    }
    Ok(out)
}

/// True when the letter may label a leaf or internal node of an encoding of
/// `p` at all: a non-push/pop command index, or a matching same-symbol
/// (push, pop) index pair.
fn letter_known(p: &SvasProgram, letter: Letter) -> bool {
    match letter {
        Letter::Cmd(i) => matches!(
            p.commands().get(i),
            Some(Command::Inc(_) | Command::Dec(_) | Command::Goto(..) | Command::Halt)
        ),
        Letter::Pair(i, j) => matches!(
            (p.commands().get(i), p.commands().get(j)),
            (Some(Command::Push(a)), Some(Command::Pop(b))) if a == b
        ),
    }
}

/// Decodes a forest into a run: maps letters back to commands and replays the
/// induced command sequence on the interpreter. Structural problems are
/// `DecodeError`s; semantic problems (control-flow mismatches, aborts,
/// rejection at halt) are outcomes of the returned trace.
pub fn decode_forest(p: &SvasProgram, forest: &LeafDataForest) -> Result<RunTrace, DecodeError> {
    let seq: Vec<usize> = traversal_events(p, forest)?
        .iter()
        .map(|e| e.command)
        .collect();
    Ok(replay_sequence(p, &seq))
}

/// Structural check of the counter discipline carried by data values,
/// independent of the formula evaluator:
///
/// - no two increment leaves share a value, no two decrement leaves share a
///   value (across all counters);
/// - every decrement leaf of counter `c` shares its value with an increment
///   leaf of `c` strictly earlier in document order;
/// - every increment leaf of counter `c` shares its value with a decrement
///   leaf of `c`;
/// - every other leaf's value appears on no other leaf.
pub fn data_matching_valid(p: &SvasProgram, forest: &LeafDataForest) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Inc(CounterId),
        Dec(CounterId),
        Other,
    }
    let leaves = forest.leaves();
    let kinds: Vec<Kind> = leaves
        .iter()
        .map(|l| match l.letter {
            Letter::Cmd(i) => match p.commands().get(i) {
                Some(Command::Inc(c)) => Kind::Inc(*c),
                Some(Command::Dec(c)) => Kind::Dec(*c),
                _ => Kind::Other,
            },
            Letter::Pair(..) => Kind::Other,
        })
        .collect();
    let values: Vec<u64> = leaves.iter().map(|l| l.data.unwrap()).collect();
    let n = leaves.len();
    let mut by_value: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, &v) in values.iter().enumerate() {
        by_value.entry(v).or_default().push(i);
    }
    for (i, kind) in kinds.iter().enumerate() {
        let class = &by_value[&values[i]];
        match *kind {
            Kind::Other => {
                if class.len() != 1 {
                    return false;
                }
            }
            Kind::Inc(c) => {
                // Exactly one sharing partner: a later decrement of c.
                let partners: Vec<usize> =
                    class.iter().copied().filter(|&j| j != i).collect();
                if partners.len() != 1 {
                    return false;
                }
                let j = partners[0];
                if kinds[j] != Kind::Dec(c) || j <= i {
                    return false;
                }
            }
            Kind::Dec(c) => {
                let partners: Vec<usize> =
                    class.iter().copied().filter(|&j| j != i).collect();
                if partners.len() != 1 {
                    return false;
                }
                let j = partners[0];
                if kinds[j] != Kind::Inc(c) || j >= i {
                    return false;
                }
            }
        }
    }
    let _ = n;
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{replay, TraceOutcome, Witness};
    use crate::program::parse_svas;

    fn prog(text: &str) -> SvasProgram {
        parse_svas(text).expect("parse")
    }

    fn accepted(p: &SvasProgram) -> RunTrace {
        let t = replay(p, &Witness::default());
        assert_eq!(t.outcome, TraceOutcome::Accepted);
        t
    }

    #[test]
    fn inc_dec_halt_encodes_to_three_root_leaves() {
        let p = prog("counters: x\nalphabet:\ninc x\ndec x\nhalt");
        let f = encode_trace(&p, &accepted(&p)).unwrap();
        assert_eq!(f.roots.len(), 3);
        assert!(f.roots.iter().all(ForestNode::is_leaf));
        // First two share a data value, the halt leaf is fresh.
        let d: Vec<u64> = f.roots.iter().map(|n| n.data.unwrap()).collect();
        assert_eq!(d[0], d[1]);
        assert_ne!(d[0], d[2]);
        assert!(data_matching_valid(&p, &f));
    }

    #[test]
    fn immediate_push_pop_becomes_a_pair_leaf() {
        let p = prog("counters:\nalphabet: a\npush a\npop a\nhalt");
        let f = encode_trace(&p, &accepted(&p)).unwrap();
        assert_eq!(f.roots.len(), 2);
        assert_eq!(f.roots[0].letter, Letter::Pair(0, 1));
        assert!(f.roots[0].is_leaf());
        assert_eq!(f.roots[1].letter, Letter::Cmd(2));
    }

    #[test]
    fn nested_pushes_nest_in_the_forest() {
        let p = prog("counters:\nalphabet: a b\npush a\npush b\npop b\npop a\nhalt");
        let f = encode_trace(&p, &accepted(&p)).unwrap();
        assert_eq!(f.roots.len(), 2);
        let outer = &f.roots[0];
        assert_eq!(outer.letter, Letter::Pair(0, 3));
        assert_eq!(outer.children.len(), 1);
        assert_eq!(outer.children[0].letter, Letter::Pair(1, 2));
    }

    #[test]
    fn encode_rejects_non_accepted() {
        let p = prog("counters: x\nalphabet:\ninc x\nhalt");
        let t = replay(&p, &Witness::default());
        assert_eq!(encode_trace(&p, &t), Err(EncodeError::NotAccepted));
    }

    #[test]
    fn decode_roundtrips_the_command_sequence() {
        let p = prog("counters: x\nalphabet: a\ninc x\npush a\npop a\ndec x\nhalt");
        let t = accepted(&p);
        let f = encode_trace(&p, &t).unwrap();
        let back = decode_forest(&p, &f).unwrap();
        assert_eq!(back.outcome, TraceOutcome::Accepted);
        let orig: Vec<usize> = t.steps.iter().map(|s| s.index).collect();
        let dec: Vec<usize> = back.steps.iter().map(|s| s.index).collect();
        assert_eq!(orig, dec);
    }

    #[test]
    fn decode_rejects_unknown_letter() {
        let p = prog("counters: x\nalphabet:\ninc x\ndec x\nhalt");
        let f = LeafDataForest {
            roots: vec![ForestNode::leaf(Letter::Cmd(17), 0)],
        };
        assert_eq!(
            decode_forest(&p, &f),
            Err(DecodeError::UnknownLetter {
                letter: Letter::Cmd(17)
            })
        );
    }

    #[test]
    fn matching_rejects_unbalanced_data() {
        let p = prog("counters: x\nalphabet:\ninc x\ndec x\nhalt");
        // Dec leaf whose value matches no inc leaf.
        let f = LeafDataForest {
            roots: vec![
                ForestNode::leaf(Letter::Cmd(0), 0),
                ForestNode::leaf(Letter::Cmd(1), 7),
                ForestNode::leaf(Letter::Cmd(2), 2),
            ],
        };
        assert!(!data_matching_valid(&p, &f));
    }
}
