//! Exact extension tests for partial set functions and partial convex functions.

pub mod ground;
pub mod lp;
pub mod subadditive;
pub mod xos;
pub mod submodular;
pub mod convex;
pub mod testers;
pub mod oracle;
