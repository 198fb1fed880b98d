use std::io::{self, Write};

use super::{DynamicsError, OpinionState, ReferenceModel, SocialNetwork, StepOptions};
use crate::Scalar;

/// States `x(0) .. x(T)` of a reference run plus, for each transition, which
/// agents were bypassed.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    states: Vec<OpinionState<T>>,
    bypassed: Vec<Vec<bool>>,
    model: ReferenceModel<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn states(&self) -> &[OpinionState<T>] {
        &self.states
    }

    pub fn initial(&self) -> &OpinionState<T> {
        &self.states[0]
    }

    pub fn last(&self) -> &OpinionState<T> {
        self.states.last().expect("trajectory holds x(0)")
    }

    /// Number of transitions recorded.
    pub fn epochs(&self) -> usize {
        self.states.len() - 1
    }

    /// Bypass mask of the transition `x(t) -> x(t+1)`.
    pub fn bypassed(&self, t: usize) -> &[bool] {
        &self.bypassed[t]
    }

    pub fn model(&self) -> &ReferenceModel<T> {
        &self.model
    }

    /// Writes `epoch,agent_index,opinion` rows, opinions with 12 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "epoch,agent_index,opinion")?;
        for state in &self.states {
            for (i, v) in state.values().iter().enumerate() {
                writeln!(out, "{},{},{}", state.epoch(), i, format_significant(v.as_f64(), 12))?;
            }
        }
        Ok(())
    }
}

/// Decimal rendering with `digits` significant digits, no exponent.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".to_string() } else { v.to_string() };
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn simulate<T: Scalar>(
    net: &SocialNetwork,
    x0: &OpinionState<T>,
    model: ReferenceModel<T>,
    epochs: usize,
) -> Result<Trajectory<T>, DynamicsError> {
    simulate_with(net, x0, model, epochs, StepOptions::default())
}

pub fn simulate_with<T: Scalar>(
    net: &SocialNetwork,
    x0: &OpinionState<T>,
    model: ReferenceModel<T>,
    epochs: usize,
    opts: StepOptions,
) -> Result<Trajectory<T>, DynamicsError> {
    if net.n() != x0.len() {
        return Err(DynamicsError::LengthMismatch {
            expected: net.n(),
            got: x0.len(),
        });
    }
    let mut states = Vec::with_capacity(epochs + 1);
    let mut bypassed = Vec::with_capacity(epochs);
    states.push(x0.clone());
    for _ in 0..epochs {
        let out = model.step(net, states.last().unwrap(), opts)?;
        states.push(out.state);
        bypassed.push(out.bypassed);
    }
    Ok(Trajectory {
        states,
        bypassed,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_epochs_keeps_only_initial_state() {
        let net = SocialNetwork::complete(3).unwrap();
        let x0 = OpinionState::new(vec![0.1, 0.2, 0.3], 0).unwrap();
        let tr = simulate(&net, &x0, ReferenceModel::DeGroot, 0).unwrap();
        assert_eq!(tr.states(), &[x0]);
        assert_eq!(tr.epochs(), 0);
    }

    #[test]
    fn epochs_increase_by_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = SocialNetwork::erdos_renyi_with(10, 0.5, &mut rng).unwrap();
        let x0 = OpinionState::<f64>::uniform(10, &mut rng);
        let tr = simulate(&net, &x0, ReferenceModel::hk(0.4).unwrap(), 7).unwrap();
        let epochs: Vec<u64> = tr.states().iter().map(|s| s.epoch()).collect();
        assert_eq!(epochs, (0..=7).collect::<Vec<_>>());
        assert!(tr.states().iter().all(|s| s.len() == 10));
    }

    #[test]
    fn degroot_spread_never_grows_on_complete_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = SocialNetwork::complete(12).unwrap();
        for _ in 0..20 {
            let x0 = OpinionState::<f64>::uniform(12, &mut rng);
            let tr = simulate(&net, &x0, ReferenceModel::DeGroot, 30).unwrap();
            for w in tr.states().windows(2) {
                assert!(w[1].spread() <= w[0].spread());
            }
        }
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.5, 12), "0.500000000000");
        assert_eq!(format_significant(-1.0, 12), "-1.00000000000");
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(0.0123456789012345, 12), "0.0123456789012");
    }

    #[test]
    fn csv_layout() {
        let net = SocialNetwork::complete(2).unwrap();
        let x0 = OpinionState::new(vec![-1.0, 1.0], 0).unwrap();
        let tr = simulate(&net, &x0, ReferenceModel::DeGroot, 1).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,agent_index,opinion\n0,0,-1.00000000000\n0,1,1.00000000000\n1,0,1.00000000000\n1,1,-1.00000000000\n"
        );
    }
}
