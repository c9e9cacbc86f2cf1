//! Seeded single-edit mutations of leaf-data forests, for adversarial
//! corpora. Deterministic in the seed; the result is always well formed and
//! never identical to the input.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::logic::{ForestNode, LeafDataForest, Letter};

/// A node address: root index followed by child indices.
type Path = Vec<usize>;

fn collect_paths(forest: &LeafDataForest, leaves_only: bool) -> Vec<Path> {
    fn walk(n: &ForestNode, path: &mut Path, out: &mut Vec<Path>, leaves_only: bool) {
        if !leaves_only || n.is_leaf() {
            out.push(path.clone());
        }
        for (i, c) in n.children.iter().enumerate() {
            path.push(i);
            walk(c, path, out, leaves_only);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for (r, root) in forest.roots.iter().enumerate() {
        let mut path = vec![r];
        walk(root, &mut path, &mut out, leaves_only);
    }
    out
}

fn node_mut<'a>(forest: &'a mut LeafDataForest, path: &Path) -> &'a mut ForestNode {
    let mut node = &mut forest.roots[path[0]];
    for &i in &path[1..] {
        node = &mut node.children[i];
    }
    node
}

fn node_ref<'a>(forest: &'a LeafDataForest, path: &Path) -> &'a ForestNode {
    let mut node = &forest.roots[path[0]];
    for &i in &path[1..] {
        node = &node.children[i];
    }
    node
}

fn distinct_letters(forest: &LeafDataForest) -> Vec<Letter> {
    let mut out: Vec<Letter> = collect_paths(forest, false)
        .iter()
        .map(|p| node_ref(forest, p).letter)
        .collect();
    out.sort();
    out.dedup();
    out
}

fn max_data(forest: &LeafDataForest) -> u64 {
    forest
        .leaves()
        .iter()
        .map(|l| l.data.unwrap())
        .max()
        .unwrap_or(0)
}

/// Removes the subtree at `path`; a parent left childless becomes a leaf and
/// receives `fresh` as its data value.
fn remove_subtree(forest: &mut LeafDataForest, path: &Path, fresh: u64) -> ForestNode {
    if path.len() == 1 {
        return forest.roots.remove(path[0]);
    }
    let parent_path: Path = path[..path.len() - 1].to_vec();
    let parent = node_mut(forest, &parent_path);
    let removed = parent.children.remove(*path.last().unwrap());
    if parent.children.is_empty() {
        parent.data = Some(fresh);
    }
    removed
}

fn apply_edit(
    forest: &LeafDataForest,
    kind: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(LeafDataForest, &'static str)> {
    let mut out = forest.clone();
    match kind {
        // Relabel one node with a different letter present in the forest.
        0 => {
            let pool = distinct_letters(forest);
            if pool.len() < 2 {
                return None;
            }
            let paths = collect_paths(forest, false);
            let path = paths.choose(rng)?.clone();
            let node = node_mut(&mut out, &path);
            let old = node.letter;
            let others: Vec<Letter> = pool.into_iter().filter(|&l| l != old).collect();
            node.letter = *others.choose(rng)?;
            Some((out, "relabel"))
        }
        // Swap two adjacent siblings (or roots).
        1 => {
            let mut groups: Vec<Option<Path>> = Vec::new();
            if forest.roots.len() >= 2 {
                groups.push(None);
            }
            for p in collect_paths(forest, false) {
                if node_ref(forest, &p).children.len() >= 2 {
                    groups.push(Some(p));
                }
            }
            let group = groups.choose(rng)?.clone();
            match group {
                None => {
                    let i = rng.gen_range(0..forest.roots.len() - 1);
                    out.roots.swap(i, i + 1);
                }
                Some(p) => {
                    let node = node_mut(&mut out, &p);
                    let i = rng.gen_range(0..node.children.len() - 1);
                    node.children.swap(i, i + 1);
                }
            }
            Some((out, "swap-siblings"))
        }
        // Reassign one leaf's data value.
        2 => {
            let leaves = collect_paths(forest, true);
            let path = leaves.choose(rng)?.clone();
            let existing: Vec<u64> = forest.leaves().iter().map(|l| l.data.unwrap()).collect();
            let fresh = max_data(forest) + 1;
            let new = if rng.gen_bool(0.5) {
                fresh
            } else {
                *existing.choose(rng)?
            };
            let node = node_mut(&mut out, &path);
            if node.data == Some(new) {
                return None;
            }
            node.data = Some(new);
            Some((out, "redata"))
        }
        // Delete one leaf.
        3 => {
            let leaves = collect_paths(forest, true);
            let path = leaves.choose(rng)?.clone();
            let fresh = max_data(forest) + 1;
            remove_subtree(&mut out, &path, fresh);
            Some((out, "delete-leaf"))
        }
        // Move a subtree somewhere else.
        _ => {
            if forest.node_count() < 2 {
                return None;
            }
            let paths = collect_paths(forest, false);
            let src = paths.choose(rng)?.clone();
            let fresh = max_data(forest) + 1;
            let subtree = remove_subtree(&mut out, &src, fresh);
            // Pick a destination in what remains: a root slot or a child slot.
            let targets = collect_paths(&out, false);
            let as_root = rng.gen_bool(0.5) || targets.is_empty();
            if as_root {
                let at = rng.gen_range(0..=out.roots.len());
                out.roots.insert(at, subtree);
            } else {
                let tpath = targets.choose(rng)?.clone();
                let target = node_mut(&mut out, &tpath);
                target.data = None; // a former leaf becomes internal
                let at = rng.gen_range(0..=target.children.len());
                target.children.insert(at, subtree);
            }
            Some((out, "reparent"))
        }
    }
}

/// Applies one random structural or data edit, deterministic in `seed`, and
/// reports which edit kind was applied.
pub fn mutate_forest_described(forest: &LeafDataForest, seed: u64) -> (LeafDataForest, &'static str) {
    assert!(!forest.is_empty(), "cannot mutate an empty forest");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let kind = rng.gen_range(0..5);
        if let Some((out, name)) = apply_edit(forest, kind, &mut rng) {
            if out != *forest {
                debug_assert!(out.well_formed());
                return (out, name);
            }
        }
    }
    // Tiny forests can defeat several edit kinds; a fresh data value on the
    // first leaf always changes the forest.
    let mut out = forest.clone();
    let leaves = collect_paths(forest, true);
    let fresh = max_data(forest) + 1;
    node_mut(&mut out, &leaves[0]).data = Some(fresh);
    (out, "redata")
}

/// As [`mutate_forest_described`], returning just the mutated forest.
pub fn mutate_forest(forest: &LeafDataForest, seed: u64) -> LeafDataForest {
    mutate_forest_described(forest, seed).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn ten_node_forest() -> LeafDataForest {
        LeafDataForest {
            roots: vec![
                ForestNode::internal(
                    Letter::Pair(0, 9),
                    vec![
                        ForestNode::leaf(Letter::Cmd(1), 0),
                        ForestNode::internal(
                            Letter::Pair(2, 5),
                            vec![
                                ForestNode::leaf(Letter::Cmd(3), 1),
                                ForestNode::leaf(Letter::Cmd(4), 2),
                            ],
                        ),
                        ForestNode::leaf(Letter::Cmd(6), 3),
                    ],
                ),
                ForestNode::leaf(Letter::Cmd(7), 4),
                ForestNode::internal(Letter::Pair(8, 10), vec![ForestNode::leaf(Letter::Cmd(11), 5)]),
            ],
        }
    }

    #[test]
    fn mutation_is_deterministic_in_seed() {
        let f = ten_node_forest();
        for seed in 0..20 {
            assert_eq!(mutate_forest(&f, seed), mutate_forest(&f, seed));
        }
    }

    #[test]
    fn mutation_changes_the_forest_and_stays_well_formed() {
        let f = ten_node_forest();
        for seed in 0..100 {
            let m = mutate_forest(&f, seed);
            assert_ne!(m, f, "seed {seed} produced the identical forest");
            assert!(m.well_formed(), "seed {seed} broke well-formedness");
        }
    }

    #[test]
    fn singleton_forest_mutation_never_returns_identity() {
        let f = LeafDataForest {
            roots: vec![ForestNode::leaf(Letter::Cmd(0), 0)],
        };
        for seed in 0..50 {
            let m = mutate_forest(&f, seed);
            assert_ne!(m, f);
            assert!(m.well_formed());
        }
    }

    #[test]
    fn many_seeds_cover_multiple_edit_kinds() {
        let f = ten_node_forest();
        let kinds: BTreeSet<&'static str> = (0..100)
            .map(|seed| mutate_forest_described(&f, seed).1)
            .collect();
        assert!(kinds.len() >= 2, "only saw {kinds:?}");
    }
}
