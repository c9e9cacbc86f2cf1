//! The bounded-counter compiler: translates a counter program `C` and a level
//! `n` into an SVAS that simulates `C` faithfully while its counters stay at
//! most 2⇑n (tetration), aborting or rejecting on every deviation.
//!
//! The construction keeps, for every simulated counter `x`, a complement
//! counter `x'` with invariant sum `x + x' = 2⇑n`, so that `x = 0` can be
//! certified by exhausting `x'`. Certification is done by the per-level
//! `Dec_k` procedure, which decrements its yardstick counter `s_k` exactly
//! 2⇑k times on every completing run. `Dec_{k+1}` counts to 2⇑(k+1) by
//! driving a (2⇑k)-digit binary number encoded on the stack with level-`k`
//! digit symbols, enforcing exact push/pop counts against auxiliary pairs
//! `(u_k, u_k')` and `(t_k, t_k')` which are themselves verified with the
//! level-`k` zero test. Initialization reuses the same counting skeleton to
//! fill every complement counter before the simulation starts.
//!
//! Besides [`compile`], the module exposes harness generators that wrap the
//! internal gadgets into standalone programs ([`emit_dec_harness`],
//! [`emit_ztest_harness`]), a metadata sidecar layer ([`sidecar`]), and an
//! invariant checker over explored configurations ([`invariants`]).

use num_bigint::BigUint;
use thiserror::Error;

use crate::counter::CounterProgram;
use crate::program::{CounterId, SvasProgram, SymbolId};

pub use crate::exec::{ChoiceAnnotation, ChoiceAnnotationTable, ChoicePredicate};

mod asm;
mod emit;
pub mod invariants;
pub mod sidecar;

/// Approximate bit budget for materialized tetration values. 2⇑5 (65537 bits
/// in base 2) fits; 2⇑6 does not.
pub const DEFAULT_TETRATION_BUDGET_BITS: u64 = 1 << 17;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum YardstickError {
    #[error("level must be at least 1")]
    LevelTooSmall,
    #[error("tetration base must be at least 2")]
    BaseTooSmall,
    #[error("tetration({base}, {height}) exceeds the {max_bits}-bit budget")]
    TooLarge {
        base: u64,
        height: u32,
        max_bits: u64,
    },
    #[error("preload {preload} exceeds the level bound {bound}")]
    PreloadTooLarge { preload: u64, bound: u64 },
}

/// An exact tetration value `base ⇑ height`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TetrationValue {
    pub base: u64,
    pub height: u32,
    pub value: BigUint,
}

/// Computes `base ⇑ height` under the default bit budget:
/// `base ⇑ 0 = 1`, `base ⇑ (k+1) = base ^ (base ⇑ k)`.
pub fn tetration(base: u64, height: u32) -> Result<TetrationValue, YardstickError> {
    tetration_with_budget(base, height, DEFAULT_TETRATION_BUDGET_BITS)
}

/// As [`tetration`] with an explicit budget on the result size in bits.
pub fn tetration_with_budget(
    base: u64,
    height: u32,
    max_bits: u64,
) -> Result<TetrationValue, YardstickError> {
    if base < 2 {
        return Err(YardstickError::BaseTooSmall);
    }
    let too_large = YardstickError::TooLarge {
        base,
        height,
        max_bits,
    };
    let log2_base = 64 - (base - 1).leading_zeros() as u64; // ceil(log2 base)
    let mut value = BigUint::from(1u32);
    for _ in 0..height {
        let exponent = u64::try_from(&value).map_err(|_| too_large.clone())?;
        if exponent.saturating_mul(log2_base) > max_bits {
            return Err(too_large);
        }
        let exponent = u32::try_from(exponent).map_err(|_| too_large.clone())?;
        value = BigUint::from(base).pow(exponent);
    }
    Ok(TetrationValue {
        base,
        height,
        value,
    })
}

/// Convenience: `2 ⇑ height` as `u64`, for levels small enough to simulate.
pub fn tetration_u64(height: u32) -> Result<u64, YardstickError> {
    let t = tetration(2, height)?;
    u64::try_from(&t.value).map_err(|_| YardstickError::TooLarge {
        base: 2,
        height,
        max_bits: 64,
    })
}

/// Which part of the emitted program a command belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Initialization of the given level's complement counters.
    Init { level: usize },
    /// The shared body of `Dec_level`, including its return dispatch.
    Body { level: usize },
    /// Translated source commands, harness preambles and gadget call sites
    /// outside initialization and bodies.
    Main,
    /// The closing drain loops and the final halt.
    Drain,
}

/// Role of a complement pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRole {
    /// The per-level yardstick pair `(s_k, s_k')`.
    Yardstick,
    /// Counts the trailing one-digits popped during a binary increment.
    TrailingOnes,
    /// Counts the digits pushed and popped by the outer phases.
    PushCount,
    /// A simulated source counter or harness test counter with its complement.
    Source,
}

/// A complement pair `(pos, neg)` whose sum is pinned to `2 ⇑ level` once the
/// level is initialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairInfo {
    pub level: usize,
    pub role: PairRole,
    pub pos: CounterId,
    pub neg: CounterId,
}

/// What a stack symbol is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolRole {
    /// A binary digit of the given level.
    Digit { level: usize, one: bool },
    /// The return symbol of one `Dec_level` call site; `owner` is the region
    /// the call site lives in.
    Return { level: usize, owner: Region },
}

/// Per-level structure of a compiled unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelEntry {
    pub level: usize,
    /// Digit symbols of this level (present below the top level).
    pub zero_digit: Option<SymbolId>,
    pub one_digit: Option<SymbolId>,
    /// Command index of the `Dec_level` body entry.
    pub dec_entry: usize,
    /// Half-open command span of the body including its dispatch.
    pub dec_body_span: (usize, usize),
    /// The `dec s_level` commands inside the body — the instrumentation
    /// points for the exactness claims.
    pub dec_s_commands: Vec<usize>,
    pub return_symbols: Vec<SymbolId>,
    /// Half-open command span of this level's initialization.
    pub init_span: (usize, usize),
}

/// Names and spans of everything the compiler laid out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMap {
    pub top: usize,
    pub pairs: Vec<PairInfo>,
    /// `levels[k-1]` describes level `k`.
    pub levels: Vec<LevelEntry>,
    /// Indices into `pairs` of the source/test pairs (all at the top level).
    pub source_pairs: Vec<usize>,
    /// Role of every stack symbol, indexed by [`SymbolId`].
    pub symbol_roles: Vec<SymbolRole>,
}

impl LevelMap {
    pub fn pair_target(&self, pair: usize) -> Result<u64, YardstickError> {
        tetration_u64(self.pairs[pair].level as u32)
    }
}

/// Per-command provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceEntry {
    /// Gadget path, e.g. `Dec_2/increment-loop/zt/pass1`.
    pub gadget: String,
    pub region: Region,
    /// Originating source-program command, for translated commands.
    pub source: Option<usize>,
    /// When the program counter sits at this command, the named pair (index
    /// into [`LevelMap::pairs`]) is mid-update and its sum may be one short.
    pub suspends: Option<usize>,
    /// For the jump-back of a dispatch leaf: the region of the call site it
    /// resumes. The return symbol is already popped there, so the region of
    /// the resumed code is recorded statically.
    pub resumes: Option<Region>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceMap {
    pub entries: Vec<SourceEntry>,
}

/// A compiled program together with its honest-run annotations and metadata.
#[derive(Debug, Clone)]
pub struct CompiledUnit {
    pub program: SvasProgram,
    pub annotations: ChoiceAnnotationTable,
    pub sourcemap: SourceMap,
    pub levelmap: LevelMap,
}

impl CompiledUnit {
    /// The instrumentation points for "`Dec_k` decrements `s_k` exactly
    /// 2⇑k times": the `dec s_k` command indices inside the `Dec_k` body.
    pub fn dec_body_commands(&self, level: usize) -> &[usize] {
        &self.levelmap.levels[level - 1].dec_s_commands
    }

    pub fn yardstick_pair(&self, level: usize) -> &PairInfo {
        self.levelmap
            .pairs
            .iter()
            .find(|p| p.level == level && p.role == PairRole::Yardstick)
            .expect("every level has a yardstick pair")
    }
}

/// Compiles `cp` into an SVAS that simulates it as long as its counters stay
/// at most `2 ⇑ level`. Emitted size is exactly affine in `level` for a fixed
/// source program.
pub fn compile(cp: &CounterProgram, level: usize) -> Result<CompiledUnit, YardstickError> {
    if level < 1 {
        return Err(YardstickError::LevelTooSmall);
    }
    Ok(emit::build(emit::Kind::Compile(cp), level))
}

/// A standalone program that initializes levels `1..=k`, transfers `s_k'`
/// fully into `s_k`, calls `Dec_k` once, drains and halts. Accepting runs
/// exist, and every accepting run decrements `s_k` exactly `2 ⇑ k` times
/// inside the body.
pub fn emit_dec_harness(k: usize) -> Result<CompiledUnit, YardstickError> {
    if k < 1 {
        return Err(YardstickError::LevelTooSmall);
    }
    tetration(2, k as u32)?; // reject levels beyond the simulation budget
    Ok(emit::build(emit::Kind::DecHarness, k))
}

/// A standalone program that initializes levels `1..=k` plus a test pair
/// `(x, x')`, performs `preload` honest increments of `x`, runs the two-pass
/// zero test on `(x, x')`, drains and halts. Reachable exactly when
/// `preload = 0`.
pub fn emit_ztest_harness(k: usize, preload: u64) -> Result<CompiledUnit, YardstickError> {
    if k < 1 {
        return Err(YardstickError::LevelTooSmall);
    }
    let bound = tetration(2, k as u32)?;
    let bound_u64 = u64::try_from(&bound.value).map_err(|_| YardstickError::TooLarge {
        base: 2,
        height: k as u32,
        max_bits: 64,
    })?;
    if preload > bound_u64 {
        return Err(YardstickError::PreloadTooLarge {
            preload,
            bound: bound_u64,
        });
    }
    Ok(emit::build(emit::Kind::ZtHarness { preload }, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetration_base_cases() {
        assert_eq!(tetration(2, 0).unwrap().value, BigUint::from(1u32));
        assert_eq!(tetration(2, 1).unwrap().value, BigUint::from(2u32));
        assert_eq!(tetration(2, 2).unwrap().value, BigUint::from(4u32));
        assert_eq!(tetration(2, 3).unwrap().value, BigUint::from(16u32));
        assert_eq!(tetration(2, 4).unwrap().value, BigUint::from(65536u32));
        assert_eq!(tetration(3, 2).unwrap().value, BigUint::from(27u32));
    }

    #[test]
    fn tetration_2_5_fits_budget() {
        let t = tetration(2, 5).unwrap();
        assert_eq!(t.value.bits(), 65537);
    }

    #[test]
    fn tetration_2_6_is_too_large() {
        assert!(matches!(
            tetration(2, 6),
            Err(YardstickError::TooLarge { .. })
        ));
    }

    #[test]
    fn tetration_rejects_small_base() {
        assert_eq!(tetration(1, 3), Err(YardstickError::BaseTooSmall));
    }

    #[test]
    fn recurrence_holds() {
        for k in 1..5u32 {
            let prev = tetration(2, k - 1).unwrap().value;
            let cur = tetration(2, k).unwrap().value;
            let exp = u32::try_from(&prev).unwrap();
            assert_eq!(cur, BigUint::from(2u32).pow(exp));
        }
    }
}
