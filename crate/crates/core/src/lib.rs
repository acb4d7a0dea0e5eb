//! Revealed-preference analysis for two-stage choice models.

pub mod constraints;
pub mod data;
pub mod diagnostics;
pub mod fixtures;
pub mod models;
pub mod oracle;
pub mod relation;
