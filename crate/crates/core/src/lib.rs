//! Travelling-wave reduction of evolution equations to exterior
//! differential systems, with exact integrability checks and numeric
//! validation of closed-form solutions.

pub mod cli;
pub mod conserve;
pub mod exterior;
pub mod jettw;
pub mod numcheck;
pub mod solvable;
pub mod symcore;
