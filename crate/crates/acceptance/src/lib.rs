//! Random workloads, brute-force oracles and golden-file checks used by
//! the acceptance suite.

pub mod gen;
pub mod goldens;
pub mod oracle;
