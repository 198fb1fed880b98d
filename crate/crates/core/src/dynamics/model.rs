use serde::{Deserialize, Serialize};

use super::{DynamicsError, OpinionState, SocialNetwork};
use crate::Scalar;

/// Largest per-agent change below which a state counts as a fixed point.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;

/// Confidence bound of the Hegselmann–Krause model, on the `[-1, 1]` scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HkParams<T> {
    epsilon: T,
}

impl<T: Scalar> HkParams<T> {
    pub fn new(epsilon: T) -> Result<Self, DynamicsError> {
        if epsilon > T::zero() {
            Ok(Self { epsilon })
        } else {
            Err(DynamicsError::InvalidEpsilon(epsilon.as_f64()))
        }
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ReferenceModel<T> {
    DeGroot,
    Hk(HkParams<T>),
}

impl<T: Scalar> ReferenceModel<T> {
    pub fn hk(epsilon: T) -> Result<Self, DynamicsError> {
        HkParams::new(epsilon).map(Self::Hk)
    }

    pub fn epsilon(&self) -> Option<T> {
        match self {
            Self::DeGroot => None,
            Self::Hk(p) => Some(p.epsilon()),
        }
    }

    pub fn step(
        &self,
        net: &SocialNetwork,
        x: &OpinionState<T>,
        opts: StepOptions,
    ) -> Result<StepOutcome<T>, DynamicsError> {
        step_impl(net, x, self.epsilon(), opts)
    }

    pub fn tag(&self) -> String {
        match self {
            Self::DeGroot => "degroot".to_string(),
            Self::Hk(p) => format!("hk({})", p.epsilon()),
        }
    }
}

/// Knobs shared by both update rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepOptions {
    /// Count an agent as its own neighbor. Off by default: agents average
    /// only over others.
    pub include_self: bool,
}

/// A synchronous update together with which agents had nobody to listen to.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T> {
    pub state: OpinionState<T>,
    /// `bypassed[i]` is true iff agent `i` had an empty neighborhood and kept
    /// its opinion.
    pub bypassed: Vec<bool>,
}

fn check_len<T: Scalar>(net: &SocialNetwork, x: &OpinionState<T>) -> Result<(), DynamicsError> {
    if net.n() != x.len() {
        return Err(DynamicsError::LengthMismatch {
            expected: net.n(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Graph neighbors of `i` whose opinion lies within `epsilon` of its own, or
/// all graph neighbors when `epsilon` is `None`. Never contains `i`.
pub fn neighborhood<T: Scalar>(
    net: &SocialNetwork,
    x: &OpinionState<T>,
    i: usize,
    epsilon: Option<T>,
) -> Result<Vec<usize>, DynamicsError> {
    neighborhood_with(net, x, i, epsilon, StepOptions::default())
}

/// [`neighborhood`] honoring [`StepOptions::include_self`]; when set, `i` is
/// inserted in index order.
pub fn neighborhood_with<T: Scalar>(
    net: &SocialNetwork,
    x: &OpinionState<T>,
    i: usize,
    epsilon: Option<T>,
    opts: StepOptions,
) -> Result<Vec<usize>, DynamicsError> {
    check_len(net, x)?;
    if i >= net.n() {
        return Err(DynamicsError::IndexOutOfRange { index: i, n: net.n() });
    }
    Ok(collect_neighborhood(net, x.values(), i, epsilon, opts))
}

fn collect_neighborhood<T: Scalar>(
    net: &SocialNetwork,
    values: &[T],
    i: usize,
    epsilon: Option<T>,
    opts: StepOptions,
) -> Vec<usize> {
    let xi = values[i];
    let within = |j: usize| epsilon.is_none_or(|eps| (xi - values[j]).abs() <= eps);
    let mut out: Vec<usize> = net.neighbors(i).iter().copied().filter(|&j| within(j)).collect();
    if opts.include_self {
        let pos = out.partition_point(|&j| j < i);
        out.insert(pos, i);
    }
    out
}

fn step_impl<T: Scalar>(
    net: &SocialNetwork,
    x: &OpinionState<T>,
    epsilon: Option<T>,
    opts: StepOptions,
) -> Result<StepOutcome<T>, DynamicsError> {
    check_len(net, x)?;
    let values = x.values();
    let mut next = Vec::with_capacity(values.len());
    let mut bypassed = Vec::with_capacity(values.len());
    for i in 0..values.len() {
        let hood = collect_neighborhood(net, values, i, epsilon, opts);
        if hood.is_empty() {
            next.push(values[i]);
            bypassed.push(true);
        } else {
            let sum = hood.iter().fold(T::zero(), |acc, &j| acc + values[j]);
            next.push(sum / T::from_usize_lossy(hood.len()));
            bypassed.push(false);
        }
    }
    Ok(StepOutcome {
        state: x.successor(next),
        bypassed,
    })
}

/// One synchronous DeGroot update: every agent takes the mean of its graph
/// neighbors' opinions at time t.
pub fn degroot_step<T: Scalar>(net: &SocialNetwork, x: &OpinionState<T>) -> Result<OpinionState<T>, DynamicsError> {
    step_impl(net, x, None, StepOptions::default()).map(|o| o.state)
}

/// One synchronous Hegselmann–Krause update.
pub fn hk_step<T: Scalar>(
    net: &SocialNetwork,
    x: &OpinionState<T>,
    params: HkParams<T>,
) -> Result<OpinionState<T>, DynamicsError> {
    step_impl(net, x, Some(params.epsilon()), StepOptions::default()).map(|o| o.state)
}

pub fn max_abs_change<T: Scalar>(a: &OpinionState<T>, b: &OpinionState<T>) -> T {
    a.values()
        .iter()
        .zip(b.values())
        .fold(T::zero(), |m, (&u, &v)| m.max((u - v).abs()))
}

/// Iterates until the largest per-agent change drops below `tol`. Returns the
/// number of steps taken and the final state, or `None` if `max_epochs` steps
/// were not enough.
pub fn run_to_fixed_point<T: Scalar>(
    net: &SocialNetwork,
    x0: &OpinionState<T>,
    model: &ReferenceModel<T>,
    opts: StepOptions,
    max_epochs: usize,
    tol: T,
) -> Result<Option<(usize, OpinionState<T>)>, DynamicsError> {
    let mut x = x0.clone();
    for epoch in 1..=max_epochs {
        let next = model.step(net, &x, opts)?.state;
        let change = max_abs_change(&x, &next);
        x = next;
        if change < tol {
            return Ok(Some((epoch, x)));
        }
    }
    Ok(None)
}
