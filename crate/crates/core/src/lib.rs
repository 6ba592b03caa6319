//! Graded multipolar expansions of QED Hamiltonians for neutral few-body
//! systems.

pub mod canonical;
pub mod config;
pub mod fields;
pub mod jacobi;
pub mod latex;
pub mod multipole;
pub mod output;
pub mod pipeline;
pub mod pzw;
pub mod scaling;
pub mod symkernel;
pub mod verify;
