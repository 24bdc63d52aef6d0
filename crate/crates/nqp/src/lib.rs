//! Quadratic programs over small finite weight sets.
//!
//! The crate provides, in library form with a thin `nqp` command-line front
//! end on top:
//!
//! - instance representation, validation and exact objective evaluation for
//!   `minimize w^T Q w + w^T c` with every component of `w` restricted to an
//!   ordered integer level set `S` ([`instance`], [`level_set`]);
//! - a certified embedding of binary instances into instances over any larger
//!   level set, carried out in exact rational arithmetic ([`reduction`]);
//! - an exhaustive oracle plus coordinate-descent, simulated-annealing and
//!   multi-start heuristics ([`solvers`]);
//! - an echo state network front end that turns discrete readout training
//!   into such instances ([`reservoir`]);
//! - a line-oriented instance file format ([`fileio`]).
//!
//! See the `examples/` directory for one runnable walkthrough per capability:
//!
//! ```bash
//! cargo run --release --example solvers_tour
//! cargo run --release --example embed_binary
//! cargo run --release --example esn_readout
//! cargo run --release --example instance_files
//! ```

pub mod error;
pub mod fileio;
pub mod instance;
pub mod level_set;
pub mod reduction;
pub mod reservoir;
pub mod solvers;
pub mod spectral;

pub mod cli;

pub use error::{Error, Result};
pub use instance::{Assignment, Domain, QpInstance, Scalar, ValidationReport, Violation};
pub use level_set::LevelSet;
pub use reduction::{reduce_to_level_set, ReductionCertificate};
pub use solvers::{AnnealSchedule, InnerSolver, SolveResult, SolverBudget, SolverChoice};
