//! Seeded random forests and sentences for metamorphic test suites.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::logic::formula::{Atom, Formula, Var};
use crate::logic::{ForestNode, LeafDataForest, Letter};

/// A random well-formed forest with 1..=`max_nodes` nodes, letters drawn from
/// `letters`, and data values in `0..data_range`.
pub fn random_forest(
    seed: u64,
    max_nodes: usize,
    letters: &[Letter],
    data_range: u64,
) -> LeafDataForest {
    assert!(max_nodes >= 1 && !letters.is_empty() && data_range >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = rng.gen_range(1..=max_nodes);
    let mut budget = target;
    let mut roots = Vec::new();
    while budget > 0 {
        roots.push(gen_node(&mut rng, &mut budget, letters, data_range));
    }
    LeafDataForest { roots }
}

fn gen_node(
    rng: &mut ChaCha8Rng,
    budget: &mut usize,
    letters: &[Letter],
    data_range: u64,
) -> ForestNode {
    *budget -= 1;
    let letter = *letters.choose(rng).unwrap();
    let want_children = *budget > 0 && rng.gen_bool(0.5);
    if !want_children {
        return ForestNode::leaf(letter, rng.gen_range(0..data_range));
    }
    let n_children = rng.gen_range(1..=(*budget).min(3));
    let mut children = Vec::new();
    for _ in 0..n_children {
        if *budget == 0 {
            break;
        }
        children.push(gen_node(rng, budget, letters, data_range));
    }
    if children.is_empty() {
        ForestNode::leaf(letter, rng.gen_range(0..data_range))
    } else {
        ForestNode::internal(letter, children)
    }
}

/// A random sentence: an arbitrary open formula over the given letters,
/// closed under two leading existential quantifiers.
pub fn random_sentence(seed: u64, letters: &[Letter], depth: usize) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let body = gen_formula(&mut rng, letters, depth);
    Formula::exists(Var::X, Formula::exists(Var::Y, body))
}

fn gen_var(rng: &mut ChaCha8Rng) -> Var {
    if rng.gen_bool(0.5) {
        Var::X
    } else {
        Var::Y
    }
}

fn gen_atom(rng: &mut ChaCha8Rng, letters: &[Letter]) -> Atom {
    let (v, w) = (gen_var(rng), gen_var(rng));
    match rng.gen_range(0..6) {
        0 => Atom::Letter(*letters.choose(rng).unwrap(), v),
        1 => Atom::Child(v, w),
        2 => Atom::NextSibling(v, w),
        3 => Atom::DocPrec(v, w),
        4 => Atom::DataEq(v, w),
        _ => Atom::Equal(v, w),
    }
}

fn gen_formula(rng: &mut ChaCha8Rng, letters: &[Letter], depth: usize) -> Formula {
    if depth == 0 {
        return match rng.gen_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::Atom(gen_atom(rng, letters)),
        };
    }
    match rng.gen_range(0..7) {
        0 => Formula::not(gen_formula(rng, letters, depth - 1)),
        1 => Formula::And(
            (0..rng.gen_range(2..4))
                .map(|_| gen_formula(rng, letters, depth - 1))
                .collect(),
        ),
        2 => Formula::Or(
            (0..rng.gen_range(2..4))
                .map(|_| gen_formula(rng, letters, depth - 1))
                .collect(),
        ),
        3 => Formula::implies(
            gen_formula(rng, letters, depth - 1),
            gen_formula(rng, letters, depth - 1),
        ),
        4 => Formula::exists(gen_var(rng), gen_formula(rng, letters, depth - 1)),
        5 => Formula::forall(gen_var(rng), gen_formula(rng, letters, depth - 1)),
        _ => Formula::Atom(gen_atom(rng, letters)),
    }
}
