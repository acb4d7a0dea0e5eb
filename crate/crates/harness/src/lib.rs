//! Replication pipeline for two-stage choice analysis: subject pools, synthetic
//! generators, pool metrics and reports.

pub mod generate;
pub mod io;
pub mod metrics;
pub mod replicate;
pub mod report;
pub mod verify;
