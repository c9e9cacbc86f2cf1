//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured facts. Run with `cargo test --test acceptance -- --nocapture`
//! to see the per-criterion report.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use svas::counter::{bounded_halting, parse_cp, CounterProgram};
use svas::exec::{
    replay, run_policy, run_policy_with, search_exact_counts_with, search_reach,
    search_reach_with, Limits, RunOptions, SearchVerdict, TraceOutcome, Witness,
};
use svas::logic::{
    atom_pairs, data_matching_valid, decode_forest, emit_formula, encode_trace, evaluate,
    leaf_flags, mutate_forest, random::random_forest, random::random_sentence, Atom, ForestNode,
    Formula, LeafDataForest, Letter, Var,
};
use svas::program::{parse_svas, SvasProgram};
use svas::yardstick::{
    compile, emit_dec_harness, emit_ztest_harness, invariants::PairSumChecker, tetration_u64,
};

/// Caps that still close the bounded configuration spaces at levels 1 and 2.
fn exhaustive_limits() -> Limits {
    Limits {
        max_configurations: 50_000_000,
        max_stack_depth: 16,
        max_counter_value: 4,
    }
}

fn corpus() -> Vec<(String, CounterProgram)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out = Vec::new();
    for entry in std::fs::read_dir(&dir).expect("corpus directory") {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("cp") {
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&path).unwrap();
            out.push((name, parse_cp(&text).expect("corpus program parses")));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    assert!(out.len() >= 10, "committed corpus has {} programs", out.len());
    out
}

/// Exhaustive body-decrement totals over all accepting runs of the Dec_k
/// harness, with optional pair-sum violation counting.
fn dec_harness_totals(k: usize, violations: Option<&mut u64>) -> (Vec<u64>, Duration) {
    let unit = emit_dec_harness(k).unwrap();
    let counted: BTreeSet<usize> = unit.dec_body_commands(k).iter().copied().collect();
    let checker = PairSumChecker::new(&unit).unwrap();
    let mut local = 0u64;
    let started = Instant::now();
    let r = search_exact_counts_with(&unit.program, &exhaustive_limits(), &counted, |cfg| {
        if checker.check(cfg).is_some() {
            local += 1;
        }
    });
    let wall = started.elapsed();
    assert!(r.closed, "level-{k} harness search did not close: {:?}", r.limit);
    if let Some(v) = violations {
        *v += local;
    } else {
        assert_eq!(local, 0, "pair-sum violations during level-{k} harness search");
    }
    (r.accept_counts.keys().copied().collect(), wall)
}

fn pass(criterion: usize, message: &str) {
    println!("criterion {criterion}: PASS — {message}");
}

#[test]
fn criterion_01_dec_exactness_level_1() {
    let (totals, wall) = dec_harness_totals(1, None);
    assert_eq!(totals, vec![2], "accepting totals at level 1");
    assert!(wall < Duration::from_secs(5), "took {wall:?}, budget 5s");
    pass(1, &format!("all accepting runs decrement s1 exactly 2 times in {wall:?}"));
}

#[test]
fn criterion_02_dec_exactness_level_2() {
    let (totals, wall) = dec_harness_totals(2, None);
    assert_eq!(totals, vec![4], "accepting totals at level 2");
    assert!(wall < Duration::from_secs(300), "took {wall:?}, budget 5min");
    pass(2, &format!("all accepting runs decrement s2 exactly 4 times in {wall:?}"));
}

#[test]
fn criterion_03_dec_honest_run_level_3() {
    let unit = emit_dec_harness(3).unwrap();
    let started = Instant::now();
    let t = run_policy_with(
        &unit.program,
        &unit.annotations,
        10_000_000,
        RunOptions { record_steps: false },
        |_| {},
    )
    .unwrap();
    let wall = started.elapsed();
    assert_eq!(t.outcome, TraceOutcome::Accepted);
    let decs = t.executions_of(unit.dec_body_commands(3));
    assert_eq!(decs, 16, "honest body decrements of s3");
    assert!(wall < Duration::from_secs(60), "took {wall:?}, budget 1min");
    pass(3, &format!("honest run accepts with exactly 16 decrements of s3 ({} steps, {wall:?})", t.steps_taken));
}

#[test]
fn criterion_04_zero_test_gadget() {
    for k in [1usize, 2] {
        for (preload, expect_reachable) in [(0u64, true), (1, false)] {
            let unit = emit_ztest_harness(k, preload).unwrap();
            let r = search_reach(&unit.program, &exhaustive_limits());
            match (&r.verdict, expect_reachable) {
                (SearchVerdict::Reachable(w), true) => {
                    assert!(replay(&unit.program, w).accepted());
                }
                (SearchVerdict::Unreachable, false) => {
                    assert!(!r.stats.clipped, "unreachable claim must be closed");
                }
                (other, _) => panic!(
                    "ztest k={k} preload={preload}: expected reachable={expect_reachable}, got {other:?}"
                ),
            }
        }
    }
    pass(4, "zero test reachable iff preload = 0, for k in {1, 2}, under closed searches");
}

/// Search verdicts and the bounded-halting oracle over the corpus.
fn corpus_search_agreement(level: usize, mut violations: Option<&mut u64>) {
    let bound = tetration_u64(level as u32).unwrap();
    for (name, cp) in corpus() {
        let oracle_halts = bounded_halting(&cp, bound).halts();
        let unit = compile(&cp, level).unwrap();
        let checker = PairSumChecker::new(&unit).unwrap();
        let mut local = 0u64;
        let r = search_reach_with(&unit.program, &exhaustive_limits(), |cfg| {
            if checker.check(cfg).is_some() {
                local += 1;
            }
        });
        if let Some(v) = violations.as_deref_mut() {
            *v += local;
        } else {
            assert_eq!(local, 0, "{name}: pair-sum violations at level {level}");
        }
        let search_yes = match &r.verdict {
            SearchVerdict::Reachable(w) => {
                assert!(replay(&unit.program, w).accepted(), "{name}: witness must replay");
                true
            }
            SearchVerdict::Unreachable => false,
            SearchVerdict::Inconclusive(kind) => {
                panic!("{name}: inconclusive at level {level} ({kind:?})")
            }
        };
        assert_eq!(
            search_yes, oracle_halts,
            "{name}: search vs oracle at level {level}"
        );
    }
}

/// Honest-run verdicts and the oracle over the corpus.
fn corpus_policy_agreement(level: usize, mut violations: Option<&mut u64>) {
    let bound = tetration_u64(level as u32).unwrap();
    for (name, cp) in corpus() {
        let oracle_halts = bounded_halting(&cp, bound).halts();
        let unit = compile(&cp, level).unwrap();
        let checker = PairSumChecker::new(&unit).unwrap();
        let mut local = 0u64;
        let t = run_policy_with(
            &unit.program,
            &unit.annotations,
            3_000_000,
            RunOptions { record_steps: false },
            |cfg| {
                if checker.check(cfg).is_some() {
                    local += 1;
                }
            },
        )
        .unwrap();
        if let Some(v) = violations.as_deref_mut() {
            *v += local;
        } else {
            assert_eq!(local, 0, "{name}: pair-sum violations at level {level}");
        }
        assert_eq!(
            t.accepted(),
            oracle_halts,
            "{name}: honest run vs oracle at level {level} (outcome {:?})",
            t.outcome
        );
    }
}

#[test]
fn criterion_05_end_to_end_equivalence() {
    let n = corpus().len();
    for level in [1usize, 2] {
        corpus_search_agreement(level, None);
    }
    corpus_policy_agreement(3, None);
    pass(5, &format!(
        "{n} corpus programs: search agrees with the oracle at n of 1 and 2, honest runs agree at n = 3"
    ));
}

#[test]
fn criterion_06_pair_sum_invariants() {
    // Re-run every exploration of criteria 1-5 with the invariant checker
    // wired into each explored configuration.
    let mut violations = 0u64;
    for k in [1usize, 2] {
        dec_harness_totals(k, Some(&mut violations));
    }
    {
        // Criterion 3's honest run.
        let unit = emit_dec_harness(3).unwrap();
        let checker = PairSumChecker::new(&unit).unwrap();
        let t = run_policy_with(
            &unit.program,
            &unit.annotations,
            10_000_000,
            RunOptions { record_steps: false },
            |cfg| {
                if checker.check(cfg).is_some() {
                    violations += 1;
                }
            },
        )
        .unwrap();
        assert!(t.accepted());
    }
    for k in [1usize, 2] {
        for preload in [0u64, 1] {
            let unit = emit_ztest_harness(k, preload).unwrap();
            let checker = PairSumChecker::new(&unit).unwrap();
            search_reach_with(&unit.program, &exhaustive_limits(), |cfg| {
                if checker.check(cfg).is_some() {
                    violations += 1;
                }
            });
        }
    }
    for level in [1usize, 2] {
        corpus_search_agreement(level, Some(&mut violations));
    }
    corpus_policy_agreement(3, Some(&mut violations));
    assert_eq!(violations, 0, "pair-sum violations across criteria 1-5");
    pass(6, "zero pair-sum violations across every configuration explored by criteria 1-5");
}

#[test]
fn criterion_07_size_growth_is_affine() {
    for (name, cp) in corpus() {
        let counts: Vec<i64> = (1..=10)
            .map(|n| compile(&cp, n).unwrap().program.commands().len() as i64)
            .collect();
        let slope = counts[1] - counts[0];
        // Affine with residual exactly zero: every first difference equals
        // the slope.
        for w in counts.windows(2) {
            assert_eq!(
                w[1] - w[0],
                slope,
                "{name}: command counts {counts:?} are not affine in the level"
            );
        }
    }
    pass(7, "compiled command count is exactly affine in n over 1..=10 for every corpus program");
}

/// Nondeterministic pump programs with many accepting runs.
fn logic_corpus() -> Vec<SvasProgram> {
    [
        "counters: x\nalphabet:\nL: goto B or E\nB: inc x\ndec x\ngoto L or L\nE: halt",
        "counters:\nalphabet: a\nL: goto B or E\nB: push a\npop a\ngoto L or L\nE: halt",
        "counters: x\nalphabet: a b\nL: goto B or E\nB: inc x\npush a\npush b\npop b\npop a\ndec x\ngoto L or L\nE: halt",
        "counters: x y\nalphabet:\ninc x\ninc y\nL: goto B or E\nB: dec y\ninc y\ngoto L or L\nE: dec y\ndec x\nhalt",
        "counters: x\nalphabet: a\nL: goto B or M\nB: inc x\ndec x\ngoto L or L\nM: goto C or E\nC: push a\npop a\ngoto M or M\nE: halt",
    ]
    .iter()
    .map(|t| parse_svas(t).unwrap())
    .collect()
}

/// The first `want` accepted traces found by enumerating witnesses by length.
fn accepted_traces(p: &SvasProgram, want: usize) -> Vec<svas::exec::RunTrace> {
    let mut out = Vec::new();
    for len in 0..=12usize {
        for bits in 0u32..(1u32 << len) {
            let w = Witness((0..len).map(|i| bits >> i & 1 == 1).collect());
            let t = replay(p, &w);
            if t.outcome == TraceOutcome::Accepted {
                out.push(t);
                if out.len() == want {
                    return out;
                }
            }
        }
    }
    out
}

#[test]
fn criterion_08_logic_positive_corpus() {
    let programs = logic_corpus();
    assert!(programs.len() >= 5);
    let mut checked = 0usize;
    for (i, p) in programs.iter().enumerate() {
        let phi = emit_formula(p);
        let traces = accepted_traces(p, 5);
        assert!(traces.len() >= 5, "program {i} has only {} accepted traces", traces.len());
        for t in &traces {
            let f = encode_trace(p, t).unwrap();
            assert_eq!(evaluate(&phi, &f), Ok(true), "program {i}: encoding must satisfy the sentence");
            assert!(
                data_matching_valid(p, &f),
                "program {i}: encoder counter discipline (structural check)"
            );
            checked += 1;
        }
    }
    // A compiled unit as well: the honest run of the level-1 harness.
    let unit = emit_dec_harness(1).unwrap();
    let t = run_policy(&unit.program, &unit.annotations, 100_000).unwrap();
    let f = encode_trace(&unit.program, &t).unwrap();
    assert_eq!(evaluate(&emit_formula(&unit.program), &f), Ok(true));
    checked += 1;
    pass(8, &format!("{checked} encodings of accepted runs all satisfy their sentences, exactly"));
}

#[test]
fn criterion_09_logic_mutation_corpus() {
    let programs = logic_corpus();
    let mut total = 0usize;
    for p in &programs {
        let phi = emit_formula(p);
        let t = &accepted_traces(p, 1)[0];
        let base = encode_trace(p, t).unwrap();
        for seed in 0..11u64 {
            let m = mutate_forest(&base, seed);
            let satisfied = evaluate(&phi, &m).unwrap();
            let decode_accepted = decode_forest(p, &m).map(|t| t.accepted()).unwrap_or(false);
            let rhs = decode_accepted && data_matching_valid(p, &m);
            assert_eq!(
                satisfied, rhs,
                "disagreement on mutated forest (seed {seed}):\n{}",
                m.serialize()
            );
            total += 1;
        }
    }
    assert!(total >= 50, "mutation corpus has {total} instances");
    pass(9, &format!(
        "{total} mutations: the sentence agrees with decode-and-match on every instance"
    ));
}

/// Document order of leaves computed by a traversal independent of the
/// evaluator internals.
fn doc_order_by_traversal(f: &LeafDataForest) -> Vec<usize> {
    fn walk(n: &ForestNode, pre: &mut usize, out: &mut Vec<usize>) {
        let id = *pre;
        *pre += 1;
        if n.is_leaf() {
            out.push(id);
        }
        for c in &n.children {
            walk(c, pre, out);
        }
    }
    let mut pre = 0usize;
    let mut out = Vec::new();
    for r in &f.roots {
        walk(r, &mut pre, &mut out);
    }
    out
}

#[test]
#[allow(clippy::needless_range_loop)]
fn criterion_10_evaluator_sanity() {
    let letters = [
        Letter::Cmd(0),
        Letter::Cmd(1),
        Letter::Cmd(2),
        Letter::Pair(0, 1),
    ];
    // Tautology, contradiction and negation on random sentences and forests.
    for seed in 0..100u64 {
        let f = random_forest(seed, 12, &letters, 5);
        let s = random_sentence(seed.wrapping_add(1000), &letters, 3);
        let value = evaluate(&s, &f).unwrap();
        assert_eq!(evaluate(&Formula::not(s.clone()), &f), Ok(!value));
        let contradiction = Formula::conj(vec![s.clone(), Formula::not(s.clone())]);
        let tautology = Formula::disj(vec![s.clone(), Formula::not(s)]);
        assert_eq!(evaluate(&contradiction, &f), Ok(false));
        assert_eq!(evaluate(&tautology, &f), Ok(true));
    }
    // Brute-force order and equivalence checks.
    for seed in 0..100u64 {
        let f = random_forest(seed.wrapping_add(5000), 12, &letters, 4);
        let leaves = leaf_flags(&f);
        let prec = atom_pairs(&f, &Atom::DocPrec(Var::X, Var::Y));
        let expected_order = doc_order_by_traversal(&f);
        // DocPrec is exactly the strict total order given by the traversal.
        let mut expected_pairs = Vec::new();
        for (i, &a) in expected_order.iter().enumerate() {
            for &b in &expected_order[i + 1..] {
                expected_pairs.push((a, b));
            }
        }
        let mut got = prec.clone();
        got.sort();
        expected_pairs.sort();
        assert_eq!(got, expected_pairs, "seed {seed}: document order mismatch");
        // Irreflexive, asymmetric, transitive, total on leaves.
        let holds = |a: usize, b: usize| prec.contains(&(a, b));
        let n = leaves.len();
        for a in 0..n {
            assert!(!holds(a, a));
            for b in 0..n {
                assert!(!(holds(a, b) && holds(b, a)));
                if leaves[a] && leaves[b] && a != b {
                    assert!(holds(a, b) || holds(b, a), "totality on leaves");
                }
                for c in 0..n {
                    if holds(a, b) && holds(b, c) {
                        assert!(holds(a, c), "transitivity");
                    }
                }
            }
        }
        // DataEq is an equivalence relation on leaves.
        let eq = atom_pairs(&f, &Atom::DataEq(Var::X, Var::Y));
        let holds = |a: usize, b: usize| eq.contains(&(a, b));
        for a in 0..n {
            assert_eq!(holds(a, a), leaves[a], "reflexive exactly on leaves");
            for b in 0..n {
                assert_eq!(holds(a, b), holds(b, a), "symmetry");
                for c in 0..n {
                    if holds(a, b) && holds(b, c) {
                        assert!(holds(a, c), "transitivity");
                    }
                }
            }
        }
    }
    pass(10, "metamorphic, order and equivalence checks hold on 100 random forests and sentences");
}
