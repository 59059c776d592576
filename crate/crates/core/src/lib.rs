//! Consistency checking for data-independent shared-memory histories.
//!
//! A history is a set of per-thread read and write events in which every
//! value is written at most once per variable, so each read's source write
//! is determined by its value. The checker decides whether some total order
//! of the writes keeps two graphs acyclic: the per-location graph and the
//! graph of the orderings a memory model preserves. SC, TSO, PSO and RMO are
//! supported.
//!
//! The decision procedure ([`solver`]) runs a memoized dynamic program over
//! subsets of writes, so its cost is exponential only in the number of
//! writes `k`, not in the number of events.
//!
//! ```
//! use mmcheck::{derive, parse_history, solve, ModelSpec, Outcome};
//!
//! let sb = parse_history(
//!     "init: x=0 y=0\n\
//!      thread T0\nwr x 1\nrd y 0\n\
//!      thread T1\nwr y 1\nrd x 0\n",
//! )
//! .unwrap();
//! let sc = derive(&sb, &ModelSpec::sc()).unwrap();
//! let tso = derive(&sb, &ModelSpec::tso()).unwrap();
//! assert_eq!(solve(&sb, &sc).unwrap().outcome, Outcome::Inconsistent);
//! assert_eq!(solve(&sb, &tso).unwrap().outcome, Outcome::Consistent);
//! ```

pub mod cli;
pub mod error;
pub mod graph;
pub mod history;
pub mod models;
pub mod oracle;
pub mod reduction;
pub mod simgen;
pub mod solver;

pub use error::{
    GraphError, HistoryError, ModelError, OracleError, ReductionError, SimError, SolveError,
};
pub use history::{parse_history, EventId, EventRef, History, HistoryBuilder, Relation};
pub use models::{derive, oota_check, DerivedModel, ModelKind, ModelSpec};
pub use oracle::{oracle_store, oracle_total, OracleVerdict};
pub use solver::{solve, solve_with, verify_witness, Outcome, SolverConfig, Verdict};
