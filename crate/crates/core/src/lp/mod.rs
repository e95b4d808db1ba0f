//! Exact linear programming.

mod farkas;
mod model;
mod simplex;

pub use farkas::{combined_row, verify_farkas, FarkasWitness};
pub use model::{Bounds, Constraint, Direction, ExactLP, LpError, Objective, Relation};
pub use simplex::{solve, LPOutcome};
