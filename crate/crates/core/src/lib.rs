//! Reference opinion dynamics and the measurement machinery used to grade
//! LLM-driven agent simulations against them.
//!
//! The numeric core ([`dynamics`], [`evaluation::loss`]) is generic over the
//! scalar type through [`Scalar`]; the aliases below fix it to `f64`, which is
//! what the harness uses.

pub mod codec;
pub mod dynamics;
pub mod evaluation;
pub mod prompts;
pub mod scalar;

pub use scalar::Scalar;

pub type OpinionState = dynamics::OpinionState<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type HkParams = dynamics::HkParams<f64>;
pub type ReferenceModel = dynamics::ReferenceModel<f64>;
pub type StepOutcome = dynamics::StepOutcome<f64>;

pub type OpinionState32 = dynamics::OpinionState<f32>;
pub type Trajectory32 = dynamics::Trajectory<f32>;
