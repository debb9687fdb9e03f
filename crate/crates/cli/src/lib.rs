//! Batch driver for the cloaking experiments.

pub mod config;
pub mod output;
pub mod run;
