use grounded_core::codec::{round_for_polarity, ScaledOpinion};
use grounded_core::dynamics::{simulate, OpinionState, ReferenceModel, SocialNetwork};
use grounded_core::evaluation::{
    aggregate_runs, estimate_consistency, loss, mean_with_ci, score_trajectory, CandidateOutput, LossKind, ScoredUpdate,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sv(v: i8) -> ScaledOpinion {
    ScaledOpinion::new(v.into()).unwrap()
}

proptest! {
    #[test]
    fn losses_bounded(f in -5.0f64..=5.0, h in -5i8..=5) {
        let d = loss(LossKind::Distance, f, h);
        prop_assert!(d >= 0.0 && d <= f.abs() + f64::from(h).abs() && d <= 10.0);
        let p = loss(LossKind::Polarity, f, h);
        prop_assert!(p == 0.0 || p == 1.0);
    }

    #[test]
    fn zero_agent_polarity_matches_direct_count(n in 2usize..25, p in 0.0f64..=1.0, eps in 0.05f64..1.0, seed: u64) {
        let net = SocialNetwork::erdos_renyi(n, p, seed).unwrap();
        let x0 = OpinionState::uniform(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let traj = simulate(&net, &x0, ReferenceModel::hk(eps).unwrap(), 6).unwrap();
        let updates = score_trajectory(&traj, |_, _| CandidateOutput::Valid(sv(0)));
        let (mut mismatches, mut valid, mut dist) = (0usize, 0usize, 0.0);
        for t in 0..traj.epochs() {
            for i in 0..n {
                if traj.bypassed(t)[i] {
                    continue;
                }
                let f = 5.0 * traj.states()[t + 1].values()[i];
                valid += 1;
                dist += f.abs();
                if round_for_polarity(f) != 0 {
                    mismatches += 1;
                }
            }
        }
        match estimate_consistency(&updates) {
            Ok(m) => {
                prop_assert_eq!(m.valid, valid);
                prop_assert_eq!(m.valid + m.bypassed + m.invalid, n * 6);
                prop_assert!((m.polarity_pct - 100.0 * mismatches as f64 / valid as f64).abs() < 1e-9);
                prop_assert!((m.distance - dist / valid as f64).abs() < 1e-9);
                prop_assert!((0.0..=100.0).contains(&m.polarity_pct));
                prop_assert_eq!(m.zero_pct, 100.0);
            }
            Err(_) => prop_assert_eq!(valid, 0),
        }
    }

    #[test]
    fn aggregation_is_permutation_invariant(values in prop::collection::vec(0.0f64..10.0, 2..12), rot in 0usize..12) {
        let a = mean_with_ci(&values).unwrap();
        let mut rotated = values.clone();
        rotated.rotate_left(rot % values.len());
        rotated.reverse();
        let b = mean_with_ci(&rotated).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.ci_half_width.unwrap() >= 0.0);
    }

    #[test]
    fn identical_runs_have_zero_width(v in 0.0f64..5.0, n in 2usize..12) {
        let e = mean_with_ci(&vec![v; n]).unwrap();
        prop_assert_eq!(e.ci_half_width, Some(0.0));
    }

    #[test]
    fn aggregate_counts_add_up(outputs in prop::collection::vec(prop::collection::vec(0u8..13, 1..40), 1..5)) {
        let runs: Vec<_> = outputs.iter().map(|run| {
            let mut updates: Vec<ScoredUpdate> = run.iter().enumerate().map(|(i, &o)| ScoredUpdate {
                epoch: 0,
                agent: i,
                reference: 1.0,
                output: match o {
                    11 => CandidateOutput::Bypassed,
                    12 => CandidateOutput::Invalid,
                    v => CandidateOutput::Valid(sv(v as i8 - 5)),
                },
            }).collect();
            updates.push(ScoredUpdate { epoch: 1, agent: 0, reference: 1.0, output: CandidateOutput::Valid(sv(1)) });
            estimate_consistency(&updates).unwrap()
        }).collect();
        let agg = aggregate_runs(&runs).unwrap();
        prop_assert_eq!(agg.valid + agg.bypassed + agg.invalid, agg.updates);
        for e in [agg.distance, agg.polarity_pct, agg.zero_pct, agg.invalid_pct] {
            prop_assert!(e.ci_half_width.is_none_or(|w| w >= 0.0));
        }
        prop_assert!((0.0..=100.0).contains(&agg.polarity_pct.mean));
    }
}

/// A stationary candidate answering uniformly at random on a fixed reference:
/// pooling twice as many updates shrinks the spread of the per-run estimate.
#[test]
fn estimator_spread_shrinks_with_more_updates() {
    let spread = |updates_per_run: usize| {
        let estimates: Vec<f64> = (0..400u64)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let updates: Vec<ScoredUpdate> = (0..updates_per_run)
                    .map(|i| ScoredUpdate {
                        epoch: 0,
                        agent: i,
                        reference: 3.0,
                        output: CandidateOutput::Valid(sv(rng.random_range(-5..=5))),
                    })
                    .collect();
                estimate_consistency(&updates).unwrap().distance
            })
            .collect();
        let m = estimates.iter().sum::<f64>() / estimates.len() as f64;
        (estimates.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (estimates.len() - 1) as f64).sqrt()
    };
    let (small, large) = (spread(50), spread(100));
    assert!(
        large < small,
        "sd with 100 updates {large} not below sd with 50 updates {small}"
    );
    // Ratio should sit near 1/sqrt(2).
    assert!((large / small - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.1);
}
