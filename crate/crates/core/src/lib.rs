//! Hardware-aware qubit layout synthesis.
//!
//! A coupling graph is partitioned by agglomerative community fusion into
//! candidate mapping regions; the chosen region is grown by a few hops and
//! handed to a SAT-based layout solver, whose output is checked and scored
//! by a noisy simulator.

pub mod circuit;
pub mod device;
pub mod region;
pub mod expansion;
pub mod solver;
pub mod evaluator;
