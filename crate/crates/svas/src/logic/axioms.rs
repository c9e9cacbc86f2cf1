//! The sentence generator: for a program `S`, builds the two-variable
//! sentence whose models are exactly the leaf-data forests encoding accepting
//! computations of `S`, up to bijective renaming of data values.
//!
//! Axiom groups:
//!
//! - **A — labelling**: every node carries exactly one letter of the derived
//!   alphabet; internal nodes carry pair letters; leaves carry command
//!   letters or immediately-closing pair letters.
//! - **B — start/end**: the first root's first event is command 0; a
//!   halt-labelled leaf exists, is the last root, and nothing follows it.
//! - **C — control flow**: for each traversal adjacency expressible with two
//!   variables — internal node to first child, node to next sibling (with
//!   the root-to-root case isolated as its own conjunct), last child to the
//!   parent's closing event — the adjacent pair of events must be consecutive
//!   under the program's control flow.
//! - **D — data/counters**: increments carry pairwise distinct values, as do
//!   decrements; each decrement of a counter is preceded by a matching
//!   increment of the same counter; each increment is matched by a
//!   decrement; all other leaves carry singleton values.

use crate::logic::formula::{Atom, Formula, Var};
use crate::logic::Letter;
use crate::program::{Command, SvasProgram};

struct Gen<'a> {
    program: &'a SvasProgram,
    letters: Vec<Letter>,
}

fn letter_is(l: Letter, v: Var) -> Formula {
    Formula::Atom(Atom::Letter(l, v))
}

fn child(v: Var, w: Var) -> Formula {
    Formula::Atom(Atom::Child(v, w))
}

fn next_sibling(v: Var, w: Var) -> Formula {
    Formula::Atom(Atom::NextSibling(v, w))
}

/// `v` has no children (reuses the other variable).
fn leaf(v: Var) -> Formula {
    Formula::not(Formula::exists(v.other(), child(v, v.other())))
}

fn internal(v: Var) -> Formula {
    Formula::exists(v.other(), child(v, v.other()))
}

fn root(v: Var) -> Formula {
    Formula::not(Formula::exists(v.other(), child(v.other(), v)))
}

fn no_next(v: Var) -> Formula {
    Formula::not(Formula::exists(v.other(), next_sibling(v, v.other())))
}

fn no_prev(v: Var) -> Formula {
    Formula::not(Formula::exists(v.other(), next_sibling(v.other(), v)))
}

impl<'a> Gen<'a> {
    fn new(program: &'a SvasProgram) -> Self {
        let cmds = program.commands();
        let mut letters = Vec::new();
        for (i, c) in cmds.iter().enumerate() {
            match c {
                Command::Inc(_) | Command::Dec(_) | Command::Goto(..) | Command::Halt => {
                    letters.push(Letter::Cmd(i))
                }
                Command::Push(_) | Command::Pop(_) => {}
            }
        }
        for (i, ci) in cmds.iter().enumerate() {
            if let Command::Push(a) = ci {
                for (j, cj) in cmds.iter().enumerate() {
                    if matches!(cj, Command::Pop(b) if b == a) {
                        letters.push(Letter::Pair(i, j));
                    }
                }
            }
        }
        Gen { program, letters }
    }

    fn successors(&self, idx: usize) -> Vec<usize> {
        match self.program.commands()[idx] {
            Command::Goto(a, b) => {
                if a == b {
                    vec![a]
                } else {
                    vec![a, b]
                }
            }
            Command::Halt => vec![],
            _ => vec![idx + 1],
        }
    }

    fn first_event(l: Letter) -> usize {
        match l {
            Letter::Cmd(i) | Letter::Pair(i, _) => i,
        }
    }

    fn last_event(l: Letter) -> usize {
        match l {
            Letter::Cmd(i) | Letter::Pair(_, i) => i,
        }
    }

    fn pair_letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.letters
            .iter()
            .copied()
            .filter(|l| matches!(l, Letter::Pair(..)))
    }

    fn halt_letter(&self) -> Letter {
        Letter::Cmd(self.program.halt_index())
    }

    /// Letters that may label a node with the given first event.
    fn letters_starting_at(&self, event: usize) -> Vec<Letter> {
        self.letters
            .iter()
            .copied()
            .filter(|&l| Self::first_event(l) == event)
            .collect()
    }

    fn group_labelling(&self) -> Vec<Formula> {
        let x = Var::X;
        let mut out = Vec::new();
        // At least one letter, and no two letters on the same node.
        out.push(Formula::forall(
            x,
            Formula::disj(self.letters.iter().map(|&l| letter_is(l, x)).collect()),
        ));
        let mut excl = Vec::new();
        for (i, &a) in self.letters.iter().enumerate() {
            for &b in &self.letters[i + 1..] {
                excl.push(Formula::not(Formula::conj(vec![
                    letter_is(a, x),
                    letter_is(b, x),
                ])));
            }
        }
        out.push(Formula::forall(x, Formula::conj(excl)));
        // Internal nodes carry pair letters.
        out.push(Formula::forall(
            x,
            Formula::implies(
                internal(x),
                Formula::disj(self.pair_letters().map(|l| letter_is(l, x)).collect()),
            ),
        ));
        // Leaves carry command letters or immediately-closing pair letters.
        let leaf_ok: Vec<Formula> = self
            .letters
            .iter()
            .copied()
            .filter(|&l| match l {
                Letter::Cmd(_) => true,
                Letter::Pair(i, j) => self.successors(i).contains(&j),
            })
            .map(|l| letter_is(l, x))
            .collect();
        out.push(Formula::forall(
            x,
            Formula::implies(leaf(x), Formula::disj(leaf_ok)),
        ));
        out
    }

    fn group_start_end(&self) -> Vec<Formula> {
        let x = Var::X;
        let halt = self.halt_letter();
        vec![
            // The halting event exists...
            Formula::exists(x, letter_is(halt, x)),
            // ...is a leaf and the last root with nothing after it...
            Formula::forall(
                x,
                Formula::implies(
                    letter_is(halt, x),
                    Formula::conj(vec![leaf(x), root(x), no_next(x)]),
                ),
            ),
            // ...and the last root is the halting event.
            Formula::forall(
                x,
                Formula::implies(
                    Formula::conj(vec![root(x), no_next(x)]),
                    letter_is(halt, x),
                ),
            ),
            // The first event of the first root is command 0.
            Formula::forall(
                x,
                Formula::implies(
                    Formula::conj(vec![root(x), no_prev(x)]),
                    Formula::disj(
                        self.letters_starting_at(0)
                            .into_iter()
                            .map(|l| letter_is(l, x))
                            .collect(),
                    ),
                ),
            ),
        ]
    }

    /// The disjunction over letter pairs `(a on x, b on y)` drawn from the
    /// given relation.
    fn letter_pair_table(&self, admitted: impl Fn(Letter, Letter) -> bool) -> Formula {
        let mut cases = Vec::new();
        for &a in &self.letters {
            for &b in &self.letters {
                if admitted(a, b) {
                    cases.push(Formula::conj(vec![
                        letter_is(a, Var::X),
                        letter_is(b, Var::Y),
                    ]));
                }
            }
        }
        Formula::disj(cases)
    }

    fn group_control(&self) -> Vec<Formula> {
        let (x, y) = (Var::X, Var::Y);
        let both = |f: Formula| Formula::forall(x, Formula::forall(y, f));
        // Opening an internal node is followed by its first child's first event.
        let first_child = both(Formula::implies(
            Formula::conj(vec![child(x, y), no_prev(y)]),
            self.letter_pair_table(|a, b| {
                matches!(a, Letter::Pair(..))
                    && self.successors(Self::first_event(a)).contains(&Self::first_event(b))
            }),
        ));
        // A node's last event is followed by its next sibling's first event.
        let sibling_table = |root_case: bool| {
            let guard = if root_case {
                root(x)
            } else {
                Formula::not(root(x))
            };
            both(Formula::implies(
                Formula::conj(vec![next_sibling(x, y), guard]),
                self.letter_pair_table(|a, b| {
                    self.successors(Self::last_event(a)).contains(&Self::first_event(b))
                }),
            ))
        };
        // The last child's last event is followed by the parent's closing event.
        let last_child = both(Formula::implies(
            Formula::conj(vec![child(x, y), no_next(y)]),
            self.letter_pair_table(|a, b| {
                matches!(a, Letter::Pair(..))
                    && self.successors(Self::last_event(b)).contains(&Self::last_event(a))
            }),
        ));
        vec![
            first_child,
            // Root-to-root adjacency is the same consecution constraint,
            // isolated as its own conjunct.
            sibling_table(false),
            sibling_table(true),
            last_child,
        ]
    }

    fn group_data(&self) -> Vec<Formula> {
        let (x, y) = (Var::X, Var::Y);
        let both = |f: Formula| Formula::forall(x, Formula::forall(y, f));
        let cmds = self.program.commands();
        let letter_cmd = |l: Letter| match l {
            Letter::Cmd(i) => Some(&cmds[i]),
            Letter::Pair(..) => None,
        };
        let inc_letters: Vec<Letter> = self
            .letters
            .iter()
            .copied()
            .filter(|&l| matches!(letter_cmd(l), Some(Command::Inc(_))))
            .collect();
        let dec_letters: Vec<Letter> = self
            .letters
            .iter()
            .copied()
            .filter(|&l| matches!(letter_cmd(l), Some(Command::Dec(_))))
            .collect();
        let noncounter: Vec<Letter> = self
            .letters
            .iter()
            .copied()
            .filter(|&l| !matches!(letter_cmd(l), Some(Command::Inc(_) | Command::Dec(_))))
            .collect();
        let any_of = |ls: &[Letter], v: Var| -> Formula {
            Formula::disj(ls.iter().map(|&l| letter_is(l, v)).collect())
        };
        let dataeq = Formula::Atom(Atom::DataEq(x, y));
        let equal = Formula::Atom(Atom::Equal(x, y));

        let mut out = Vec::new();
        // No two increments share data; no two decrements share data.
        for ls in [&inc_letters, &dec_letters] {
            out.push(both(Formula::implies(
                Formula::conj(vec![any_of(ls, x), any_of(ls, y), dataeq.clone()]),
                equal.clone(),
            )));
        }
        // Per counter: each decrement has an earlier matching increment, and
        // each increment is matched by a decrement.
        for c in 0..self.program.counters().len() {
            let of_counter = |ls: &[Letter], want_inc: bool| -> Vec<Letter> {
                ls.iter()
                    .copied()
                    .filter(|&l| match letter_cmd(l) {
                        Some(Command::Inc(d)) if want_inc => d.0 == c,
                        Some(Command::Dec(d)) if !want_inc => d.0 == c,
                        _ => false,
                    })
                    .collect()
            };
            let incs_c = of_counter(&inc_letters, true);
            let decs_c = of_counter(&dec_letters, false);
            out.push(Formula::forall(
                x,
                Formula::implies(
                    any_of(&decs_c, x),
                    Formula::exists(
                        y,
                        Formula::conj(vec![
                            any_of(&incs_c, y),
                            Formula::Atom(Atom::DataEq(x, y)),
                            Formula::Atom(Atom::DocPrec(y, x)),
                        ]),
                    ),
                ),
            ));
            out.push(Formula::forall(
                x,
                Formula::implies(
                    any_of(&incs_c, x),
                    Formula::exists(
                        y,
                        Formula::conj(vec![
                            any_of(&decs_c, y),
                            Formula::Atom(Atom::DataEq(x, y)),
                        ]),
                    ),
                ),
            ));
        }
        // Everything else carries a singleton value.
        out.push(both(Formula::implies(
            Formula::conj(vec![any_of(&noncounter, x), dataeq]),
            equal,
        )));
        out
    }
}

/// Builds the sentence characterizing the encodings of accepting computations
/// of `p`. The program must be valid.
pub fn emit_formula(p: &SvasProgram) -> Formula {
    let gen = Gen::new(p);
    let mut groups = Vec::new();
    groups.extend(gen.group_labelling());
    groups.extend(gen.group_start_end());
    groups.extend(gen.group_control());
    groups.extend(gen.group_data());
    Formula::conj(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::{replay, Witness};
    use crate::logic::{decode_forest, encode_trace, evaluate, ForestNode, LeafDataForest};
    use crate::program::parse_svas;

    fn prog(text: &str) -> SvasProgram {
        parse_svas(text).expect("parse")
    }

    #[test]
    fn accepted_encoding_satisfies_formula() {
        let p = prog("counters: x\nalphabet: a\ninc x\npush a\npop a\ndec x\nhalt");
        let t = replay(&p, &Witness::default());
        let f = encode_trace(&p, &t).unwrap();
        let phi = emit_formula(&p);
        assert!(phi.is_sentence());
        assert_eq!(evaluate(&phi, &f), Ok(true));
    }

    #[test]
    fn unmatched_dec_data_falsifies_formula() {
        let p = prog("counters: x\nalphabet:\ninc x\ndec x\nhalt");
        // Dec leaf's value matches no inc leaf.
        let f = LeafDataForest {
            roots: vec![
                ForestNode::leaf(Letter::Cmd(0), 0),
                ForestNode::leaf(Letter::Cmd(1), 7),
                ForestNode::leaf(Letter::Cmd(2), 2),
            ],
        };
        let phi = emit_formula(&p);
        assert_eq!(evaluate(&phi, &f), Ok(false));
    }

    #[test]
    fn swapping_letters_matches_decoder_verdict() {
        let p = prog("counters: x\nalphabet:\ninc x\ndec x\nhalt");
        let t = replay(&p, &Witness::default());
        let good = encode_trace(&p, &t).unwrap();
        let phi = emit_formula(&p);
        // Swap the inc and dec letters: the decoded run decrements at 0 and aborts.
        let mut bad = good.clone();
        bad.roots[0].letter = Letter::Cmd(1);
        bad.roots[1].letter = Letter::Cmd(0);
        assert_eq!(evaluate(&phi, &bad), Ok(false));
        assert!(!decode_forest(&p, &bad).unwrap().accepted());
    }

    #[test]
    fn empty_forest_is_no_model() {
        let p = prog("counters:\nalphabet:\nhalt");
        let phi = emit_formula(&p);
        assert_eq!(evaluate(&phi, &LeafDataForest::default()), Ok(false));
        // The single halt leaf is the (only) model shape.
        let f = LeafDataForest {
            roots: vec![ForestNode::leaf(Letter::Cmd(0), 0)],
        };
        assert_eq!(evaluate(&phi, &f), Ok(true));
    }
}
