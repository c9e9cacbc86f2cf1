//! Complement-pair invariant checking over explored configurations.
//!
//! Once level `k` is initialized, every level-`k` pair `(c, c')` keeps
//! `c + c' = 2⇑k` — except in the single configuration between the two halves
//! of a paired update, which the source map marks as mid-update for that
//! pair. Before and during a level's initialization its pairs are only
//! bounded by the budget, and the closing drain deliberately empties them, so
//! the checker gates the equality by phase:
//!
//! - the command's region gives the phase directly for initialization, main
//!   and drain code;
//! - inside a shared `Dec` body the phase is read off the stack: a return
//!   symbol owned by an initialization call site means that initialization is
//!   still running.
//!
//! The budget bound `c + c' <= 2⇑k` is checked unconditionally, everywhere.

use std::fmt;

use crate::program::Configuration;
use crate::yardstick::{tetration_u64, CompiledUnit, Region, SymbolRole, YardstickError};

/// A configuration that breaks a pair invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairViolation {
    /// Index into [`crate::yardstick::LevelMap::pairs`].
    pub pair: usize,
    pub pc: usize,
    pub sum: u64,
    pub target: u64,
    /// True when the sum exceeded the budget; false when an established
    /// pair's sum fell short outside a mid-update point.
    pub exceeded: bool,
}

impl fmt::Display for PairViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pair {} at pc {}: sum {} {} target {}",
            self.pair,
            self.pc,
            self.sum,
            if self.exceeded { "exceeds" } else { "misses" },
            self.target
        )
    }
}

/// Checks pair sums against a compiled unit's metadata.
pub struct PairSumChecker<'a> {
    unit: &'a CompiledUnit,
    targets: Vec<u64>,
}

impl<'a> PairSumChecker<'a> {
    /// Fails when some pair's target does not fit in `u64` (levels above 4).
    pub fn new(unit: &'a CompiledUnit) -> Result<Self, YardstickError> {
        let targets = unit
            .levelmap
            .pairs
            .iter()
            .map(|p| tetration_u64(p.level as u32))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PairSumChecker { unit, targets })
    }

    /// The highest level whose initialization has certainly completed when
    /// the program sits in this configuration.
    pub fn established_level(&self, cfg: &Configuration) -> usize {
        let entry = &self.unit.sourcemap.entries[cfg.pc];
        // A dispatch leaf has already popped its return symbol; the statically
        // recorded resume region stands in for it.
        if let Some(Region::Init { level }) = entry.resumes {
            return level - 1;
        }
        match entry.region {
            Region::Init { level } => level - 1,
            Region::Main | Region::Drain => self.unit.levelmap.top,
            Region::Body { .. } => {
                for &sym in &cfg.stack {
                    if let SymbolRole::Return {
                        owner: Region::Init { level },
                        ..
                    } = self.unit.levelmap.symbol_roles[sym.0]
                    {
                        return level - 1;
                    }
                }
                self.unit.levelmap.top
            }
        }
    }

    /// Returns the first violated pair invariant, if any.
    pub fn check(&self, cfg: &Configuration) -> Option<PairViolation> {
        let entry = &self.unit.sourcemap.entries[cfg.pc];
        let draining = matches!(entry.region, Region::Drain);
        let established = self.established_level(cfg);
        for (gid, pair) in self.unit.levelmap.pairs.iter().enumerate() {
            let sum = cfg.counters[pair.pos.0] + cfg.counters[pair.neg.0];
            let target = self.targets[gid];
            if sum > target {
                return Some(PairViolation {
                    pair: gid,
                    pc: cfg.pc,
                    sum,
                    target,
                    exceeded: true,
                });
            }
            if draining || pair.level > established {
                continue;
            }
            let suspended = entry.suspends == Some(gid);
            let ok = sum == target || (suspended && sum + 1 == target);
            if !ok {
                return Some(PairViolation {
                    pair: gid,
                    pc: cfg.pc,
                    sum,
                    target,
                    exceeded: false,
                });
            }
        }
        None
    }
}
