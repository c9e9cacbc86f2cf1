//! Exhaustive reachability search over the configuration graph.
//!
//! Breadth-first with a visited set keyed on the full configuration
//! `(pc, counters, stack)` — no abstraction. Counter-value and stack-depth
//! limits are explicit inputs because reachability for unrestricted SVAS has
//! no known decision procedure; `Unreachable` is claimed only when the
//! explored graph is closed under the step relation and no limit was hit,
//! otherwise the answer is `Inconclusive`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::hash::{BuildHasherDefault, Hasher};
use std::time::{Duration, Instant};

use indexmap::IndexMap;

use crate::exec::{is_accepting, step, StepOutcome, Witness};
use crate::program::{Configuration, SvasProgram};

/// Exploration bounds. All must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Cap on the visited-set size.
    pub max_configurations: usize,
    /// Successors with a deeper stack are clipped.
    pub max_stack_depth: usize,
    /// Successors with a larger counter value are clipped.
    pub max_counter_value: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_configurations: 1_000_000,
            max_stack_depth: 64,
            max_counter_value: 1 << 20,
        }
    }
}

/// Which limit prevented a conclusive answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    /// The visited set reached `max_configurations` with work left.
    ConfigurationBudget,
    /// Some successor exceeded the stack-depth or counter-value cap, so the
    /// explored graph is not closed.
    BoundClipped,
}

/// Verdict of a reachability search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchVerdict {
    Reachable(Witness),
    Unreachable,
    Inconclusive(LimitKind),
}

/// Exploration statistics. `wall` is measured and never part of
/// byte-deterministic outputs.
#[derive(Debug, Clone)]
pub struct SearchStats {
    /// Configurations dequeued and expanded.
    pub explored: usize,
    /// Total states inserted into the visited set.
    pub discovered: usize,
    pub frontier_peak: usize,
    pub wall: Duration,
    /// Whether any successor was clipped by the stack or counter cap.
    pub clipped: bool,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub verdict: SearchVerdict,
    pub stats: SearchStats,
}

/// Result of an exhaustive, count-instrumented search (no early stop).
///
/// The search state is the pair (configuration, executions of the counted
/// commands so far), so `accept_counts` collects every total that some
/// accepting run realizes, with one sample witness each. The map is complete
/// exactly when `closed` is true.
#[derive(Debug, Clone)]
pub struct ExactCountsResult {
    pub accept_counts: BTreeMap<u64, Witness>,
    pub closed: bool,
    pub limit: Option<LimitKind>,
    pub stats: SearchStats,
}

/// FNV-style hasher for the byte-encoded configuration keys.
#[derive(Default)]
struct FxHasher(u64);

impl Hasher for FxHasher {
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x100000001b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

type FxBuild = BuildHasherDefault<FxHasher>;

struct Meta {
    parent: u32,
    /// 0 or 1 for a goto edge, 2 for no choice bit.
    bit: u8,
}

const NO_PARENT: u32 = u32::MAX;

struct Codec {
    n_counters: usize,
    wide: bool,
    counting: bool,
}

impl Codec {
    fn encode(&self, cfg: &Configuration, count: u64, buf: &mut Vec<u8>) {
        buf.clear();
        buf.extend_from_slice(&(cfg.pc as u32).to_le_bytes());
        for &v in &cfg.counters {
            if self.wide {
                buf.extend_from_slice(&v.to_le_bytes());
            } else {
                buf.extend_from_slice(&(v as u32).to_le_bytes());
            }
        }
        if self.counting {
            buf.extend_from_slice(&count.to_le_bytes());
        }
        for &s in &cfg.stack {
            buf.extend_from_slice(&(s.0 as u16).to_le_bytes());
        }
    }

    fn decode(&self, bytes: &[u8]) -> (Configuration, u64) {
        let mut at = 0usize;
        let pc = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        at += 4;
        let mut counters = Vec::with_capacity(self.n_counters);
        for _ in 0..self.n_counters {
            if self.wide {
                counters.push(u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()));
                at += 8;
            } else {
                counters.push(u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as u64);
                at += 4;
            }
        }
        let count = if self.counting {
            let c = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
            at += 8;
            c
        } else {
            0
        };
        let stack = bytes[at..]
            .chunks_exact(2)
            .map(|w| crate::program::SymbolId(u16::from_le_bytes([w[0], w[1]]) as usize))
            .collect();
        (
            Configuration {
                pc,
                counters,
                stack,
            },
            count,
        )
    }
}

struct Bfs<'a> {
    program: &'a SvasProgram,
    limits: Limits,
    codec: Codec,
    map: IndexMap<Box<[u8]>, Meta, FxBuild>,
    frontier: VecDeque<u32>,
    frontier_peak: usize,
    explored: usize,
    clipped: bool,
    budget_hit: bool,
}

impl<'a> Bfs<'a> {
    fn new(program: &'a SvasProgram, limits: Limits, counting: bool) -> Self {
        assert!(
            limits.max_configurations > 0
                && limits.max_stack_depth > 0
                && limits.max_counter_value > 0,
            "search limits must be positive"
        );
        assert!(
            program.alphabet().len() <= u16::MAX as usize,
            "alphabet too large for search key encoding"
        );
        let codec = Codec {
            n_counters: program.counters().len(),
            wide: limits.max_counter_value > u32::MAX as u64,
            counting,
        };
        let mut bfs = Bfs {
            program,
            limits,
            codec,
            map: IndexMap::with_hasher(FxBuild::default()),
            frontier: VecDeque::new(),
            frontier_peak: 0,
            explored: 0,
            clipped: false,
            budget_hit: false,
        };
        let mut buf = Vec::new();
        bfs.codec
            .encode(&Configuration::initial(program), 0, &mut buf);
        bfs.map.insert(
            buf.into_boxed_slice(),
            Meta {
                parent: NO_PARENT,
                bit: 2,
            },
        );
        bfs.frontier.push_back(0);
        bfs.frontier_peak = 1;
        bfs
    }

    fn witness_to(&self, node: u32) -> Witness {
        let mut bits = Vec::new();
        let mut at = node;
        while at != NO_PARENT {
            let meta = &self.map[at as usize];
            if meta.bit < 2 {
                bits.push(meta.bit == 1);
            }
            at = meta.parent;
        }
        bits.reverse();
        Witness(bits)
    }

    /// Expands one frontier node. Returns the accepting node if this
    /// configuration is accepting.
    fn expand(
        &mut self,
        node: u32,
        counted: Option<&BTreeSet<usize>>,
        inspect: &mut dyn FnMut(&Configuration),
    ) -> Option<(u32, u64)> {
        let (cfg, count) = {
            let (key, _) = self.map.get_index(node as usize).unwrap();
            self.codec.decode(key)
        };
        inspect(&cfg);
        self.explored += 1;
        if self.program.commands()[cfg.pc].is_halt() {
            if is_accepting(self.program, &cfg) {
                return Some((node, count));
            }
            return None;
        }
        let next_count = match counted {
            Some(set) if set.contains(&cfg.pc) => count + 1,
            _ => count,
        };
        let successors = match step(self.program, &cfg) {
            StepOutcome::Successors(s) => s,
            StepOutcome::Abort(_) => return None,
            StepOutcome::Halted => unreachable!("halt handled above"),
        };
        let mut buf = Vec::new();
        for (succ, bit) in successors {
            if succ.stack.len() > self.limits.max_stack_depth
                || succ
                    .counters
                    .iter()
                    .any(|&v| v > self.limits.max_counter_value)
            {
                self.clipped = true;
                continue;
            }
            self.codec.encode(&succ, next_count, &mut buf);
            if self.map.contains_key(buf.as_slice()) {
                continue;
            }
            if self.map.len() >= self.limits.max_configurations {
                self.budget_hit = true;
                continue;
            }
            let idx = self.map.len() as u32;
            self.map.insert(
                buf.clone().into_boxed_slice(),
                Meta {
                    parent: node,
                    bit: match bit {
                        Some(true) => 1,
                        Some(false) => 0,
                        None => 2,
                    },
                },
            );
            self.frontier.push_back(idx);
            self.frontier_peak = self.frontier_peak.max(self.frontier.len());
        }
        None
    }

    fn stats(&self, started: Instant) -> SearchStats {
        SearchStats {
            explored: self.explored,
            discovered: self.map.len(),
            frontier_peak: self.frontier_peak,
            wall: started.elapsed(),
            clipped: self.clipped,
        }
    }
}

/// Searches for an accepting computation; see module docs for the verdict
/// semantics. Stops at the first accepting configuration found (breadth-first,
/// so the witness has minimal length in steps).
pub fn search_reach(p: &SvasProgram, limits: &Limits) -> SearchResult {
    search_reach_with(p, limits, |_| {})
}

/// As [`search_reach`], invoking `inspect` once per explored configuration.
pub fn search_reach_with(
    p: &SvasProgram,
    limits: &Limits,
    mut inspect: impl FnMut(&Configuration),
) -> SearchResult {
    let started = Instant::now();
    let mut bfs = Bfs::new(p, *limits, false);
    while let Some(node) = bfs.frontier.pop_front() {
        if let Some((accepting, _)) = bfs.expand(node, None, &mut inspect) {
            let witness = bfs.witness_to(accepting);
            let stats = bfs.stats(started);
            return SearchResult {
                verdict: SearchVerdict::Reachable(witness),
                stats,
            };
        }
    }
    let verdict = if bfs.budget_hit {
        SearchVerdict::Inconclusive(LimitKind::ConfigurationBudget)
    } else if bfs.clipped {
        SearchVerdict::Inconclusive(LimitKind::BoundClipped)
    } else {
        SearchVerdict::Unreachable
    };
    let stats = bfs.stats(started);
    SearchResult { verdict, stats }
}

/// Exhaustively explores the product of the configuration graph with the
/// running total of executions of the `counted` commands, and reports every
/// total realized by an accepting state; see [`ExactCountsResult`].
pub fn search_exact_counts(
    p: &SvasProgram,
    limits: &Limits,
    counted: &BTreeSet<usize>,
) -> ExactCountsResult {
    search_exact_counts_with(p, limits, counted, |_| {})
}

/// As [`search_exact_counts`]; `inspect` sees each explored product state, so
/// a configuration reached with different counts is reported more than once.
pub fn search_exact_counts_with(
    p: &SvasProgram,
    limits: &Limits,
    counted: &BTreeSet<usize>,
    mut inspect: impl FnMut(&Configuration),
) -> ExactCountsResult {
    let started = Instant::now();
    let mut bfs = Bfs::new(p, *limits, true);
    let mut accept_counts: BTreeMap<u64, Witness> = BTreeMap::new();
    while let Some(node) = bfs.frontier.pop_front() {
        if let Some((accepting, count)) = bfs.expand(node, Some(counted), &mut inspect) {
            let witness = bfs.witness_to(accepting);
            accept_counts.entry(count).or_insert(witness);
        }
    }
    let limit = if bfs.budget_hit {
        Some(LimitKind::ConfigurationBudget)
    } else if bfs.clipped {
        Some(LimitKind::BoundClipped)
    } else {
        None
    };
    let stats = bfs.stats(started);
    ExactCountsResult {
        accept_counts,
        closed: limit.is_none(),
        limit,
        stats,
    }
}
