//! DeGroot and Hegselmann–Krause reference dynamics on undirected social
//! networks.

mod model;
mod network;
mod state;
mod trajectory;

pub use model::{
    degroot_step, hk_step, max_abs_change, neighborhood, neighborhood_with, run_to_fixed_point, HkParams,
    ReferenceModel, StepOptions, StepOutcome, FIXED_POINT_TOLERANCE,
};
pub use network::SocialNetwork;
pub use state::OpinionState;
pub use trajectory::{format_significant, simulate, simulate_with, Trajectory};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("network needs at least one agent")]
    EmptyNetwork,
    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("opinion {value} of agent {index} is outside [-1, 1]")]
    OpinionOutOfRange { index: usize, value: f64 },
    #[error("state has {got} opinions but the network has {expected} agents")]
    LengthMismatch { expected: usize, got: usize },
    #[error("confidence bound must be positive, got {0}")]
    InvalidEpsilon(f64),
}
