//! Experiment orchestration: configuration, seeding, the per-epoch agent
//! loop, report emission and replay from audit logs.

pub mod agents;
pub mod audit;
pub mod config;
pub mod experiments;
pub mod gateway;
pub mod reports;
pub mod seeds;

pub use config::ExperimentConfig;
pub use experiments::{replay, Command, Harness};
