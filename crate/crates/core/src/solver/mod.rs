//! SAT-based layout synthesis.

pub mod backend;
pub mod cardinality;
pub mod cnf;
pub mod encode;
pub mod regional;
pub mod search;
pub mod solution;
pub mod validate;

pub use backend::{BackendKind, SatOutcome, SolverBackend};
pub use cnf::{parse_dimacs, Cnf, Family, FamilyCounts};
pub use encode::{encode, EncodeError, Encoding, EncodingBounds, EncodingStats, VarDirectory};
pub use regional::{solve_on_region, solve_regional, RegionSummary, RegionalOptions, RegionalSolve};
pub use search::{block_cap, solve, SearchPolicy, SolveError, SolveOptions, SolveOutcome};
pub use solution::{MappingSolution, ScheduledSwap, SolveStats};
pub use validate::{validate_solution, ValidationError};
