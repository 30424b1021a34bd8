//! Reduced OBDD engine and refutation harness.
//!
//! Builds OBDD refutations of CNF formulas (Axiom and Join steps, optionally
//! Project) under arbitrary variable orders and join schedules, records the
//! size of every intermediate OBDD, and provides executable checks for the
//! combinatorics behind exponential lower bounds on pigeonhole refutations.
//!
//! ```
//! use obddproof::{gen_php, builtin_schedule, run_schedule, RunLimits, ScheduleKind, VarOrder};
//!
//! let (php, _) = gen_php(3).unwrap();
//! let order = VarOrder::row_major(php.n_vars());
//! let schedule = builtin_schedule(&php, &order, ScheduleKind::Gz2003, false, RunLimits::default()).unwrap();
//! let run = run_schedule(&php, &order, &schedule, RunLimits::default()).unwrap();
//! assert!(run.refuted);
//! ```

pub mod bdd;
pub mod bounds;
pub mod cnf;
pub mod error;
pub mod oracle;
pub mod order;
pub mod refutation;

pub use bdd::{Assignment, BddNode, BoolOp, ExportedBdd, NodeRef, NodeStore};
pub use cnf::{
    clause_to_bdd, formula_to_bdd, gen_pc_star, gen_php, parse_dimacs, write_dimacs, Clause,
    CnfFormula, Literal, PigeonMap,
};
pub use error::{BddError, BoundsError, CnfError, OracleError, OrderError, ScheduleError};
pub use order::{OrderProvenance, VarId, VarOrder};
pub use refutation::{
    builtin_schedule, run_schedule, sweep, verify_records, verify_refutation, ProofStep,
    RefutationResult, RunLimits, Schedule, ScheduleKind, SweepRow, TraceRecord, VerificationReport,
};
