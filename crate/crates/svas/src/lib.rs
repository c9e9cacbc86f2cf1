//! Stack vector addition systems (SVAS) as labelled command programs, plus the
//! machinery built around them:
//!
//! - [`program`]: the SVAS data model, its textual format, and static validation.
//! - [`exec`]: execution semantics — single steps, witness replay, policy-guided
//!   runs, and exhaustive reachability search over the configuration graph.
//! - [`counter`]: deterministic counter programs with zero tests, and the
//!   bounded-halting oracle that decides their behaviour under a counter cap.
//! - [`yardstick`]: the compiler from counter programs to SVAS that simulates
//!   zero tests with complement-pair counters and stack-encoded binary numbers,
//!   together with harness generators that expose its internal gadgets.
//! - [`logic`]: leaf-data forests, a two-variable first-order logic over them,
//!   and the encoding of accepting SVAS computations as such forests.

pub mod counter;
pub mod exec;
pub mod logic;
pub mod program;
pub mod yardstick;
