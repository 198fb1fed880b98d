//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use grounded_core::codec::{ScaledOpinion, TopicFraming};
use grounded_core::dynamics::{
    degroot_step, hk_step, run_to_fixed_point, simulate, HkParams, ReferenceModel, SocialNetwork, StepOptions,
};
use grounded_core::evaluation::{aggregate_runs, estimate_consistency, CandidateOutput, RunMetrics, ScoredUpdate};
use grounded_core::prompts::{PromptSet, Variant};
use grounded_core::OpinionState;
use grounded_gateway::{
    BackendKind, CompletionRequest, DispatchEvent, EndpointPool, PoolObserver, RetryEvent, SamplingParams, Transport,
    TransportError,
};
use grounded_harness::agents::baseline_value;
use grounded_harness::config::{AgentKind, CodecScheme};
use grounded_harness::seeds::rng;
use grounded_harness::{replay, ExperimentConfig, Harness};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const CONSENSUS_TOL: f64 = 1e-9;
const CONSENSUS_MAX_EPOCHS: usize = 500;
const FIXED_POINT_TOL: f64 = 1e-12;
const CLUSTER_MAX_EPOCHS: usize = 100;
const CLUSTER_MERGE_TOL: f64 = 1e-9;
const FAITHFUL_MAX_DISTANCE: f64 = 1.0;
const FAITHFUL_MAX_POLARITY: f64 = 10.0;
const RANDOM_DISTANCE: (f64, f64) = (3.3, 0.3);
const RANDOM_POLARITY: (f64, f64) = (56.0, 5.0);
const ZERO_POLARITY_DENSE: (f64, f64) = (96.7, 6.0);
const ZERO_POLARITY_SPARSE: (f64, f64) = (40.6, 20.0);
const RANDOM_FLOOR: (f64, f64) = (600.0 / 11.0, 1.0);
const RANDOM_FLOOR_UPDATES: usize = 100_000;
const CI_HALF_WIDTH: (f64, f64) = (2.484, 0.001);
const FAILOVER_REQUESTS: usize = 100;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn within(value: f64, (target, tol): (f64, f64)) -> bool {
    (value - target).abs() <= tol
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let note = format!(" [{:.3}s, budget {:.0}s]", elapsed.as_secs_f64(), budget.as_secs_f64());
    match out {
        Ok(d) if elapsed <= budget => Ok(d + &note),
        Ok(d) => Err(d + &note + " over budget"),
        Err(d) => Err(d + &note),
    }
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

fn mock_config(kind: BackendKind, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.backend.kind = kind;
    cfg.output.dir = out.to_path_buf();
    cfg
}

fn degroot_consensus() -> Outcome {
    let net = SocialNetwork::complete(20).unwrap();
    let x0 = OpinionState::uniform(20, &mut ChaCha8Rng::seed_from_u64(1));
    let mean = x0.mean();
    let traj = simulate(&net, &x0, ReferenceModel::DeGroot, CONSENSUS_MAX_EPOCHS).unwrap();
    let err = traj
        .last()
        .values()
        .iter()
        .map(|v| (v - mean).abs())
        .fold(0.0, f64::max);
    check(err <= CONSENSUS_TOL, format!("max |x_i - mean(x0)| = {err:.3e}"))
}

fn hk_saturation() -> Outcome {
    let mut mismatches = 0;
    for seed in 0..100u64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed as usize % 29);
        let p = [0.1, 0.3, 0.5, 0.9, 1.0][seed as usize % 5];
        let net = SocialNetwork::erdos_renyi(n, p, seed).unwrap();
        let x = OpinionState::uniform(n, &mut r);
        let hk = hk_step(&net, &x, HkParams::new(2.0).unwrap()).unwrap();
        let dg = degroot_step(&net, &x).unwrap();
        let same = hk
            .values()
            .iter()
            .zip(dg.values())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        mismatches += usize::from(!same);
    }
    check(mismatches == 0, format!("{mismatches}/100 instances differ"))
}

fn hk_clustering() -> Outcome {
    let net = SocialNetwork::complete(20).unwrap();
    let model = ReferenceModel::hk(0.3).unwrap();
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let x0 = OpinionState::uniform(20, &mut ChaCha8Rng::seed_from_u64(seed));
        match run_to_fixed_point(
            &net,
            &x0,
            &model,
            StepOptions::default(),
            CLUSTER_MAX_EPOCHS,
            FIXED_POINT_TOL,
        )
        .unwrap()
        {
            None => failures.push(format!("seed {seed}: no fixed point")),
            Some((_, x)) => {
                let mut v = x.values().to_vec();
                v.sort_by(f64::total_cmp);
                let mut clusters = vec![v[0]];
                for w in v.windows(2) {
                    if w[1] - w[0] > CLUSTER_MERGE_TOL {
                        clusters.push(w[1]);
                    }
                }
                if clusters.windows(2).any(|c| c[1] - c[0] <= 0.3) {
                    failures.push(format!("seed {seed}: clusters closer than epsilon"));
                }
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{} of 20 seeds failed {failures:?}", failures.len()),
    )
}

fn codec_round_trip() -> Outcome {
    let base = TopicFraming::default();
    let swapped = TopicFraming {
        side_a: base.side_b.clone(),
        side_b: base.side_a.clone(),
    };
    let mut bad = Vec::new();
    for framing in [base, swapped] {
        for v in Variant::ALL {
            let dir = tempdir();
            let mut cfg = mock_config(BackendKind::MockEcho, dir.path());
            cfg.topic = framing.clone();
            cfg.agents.variant = v.as_str().into();
            cfg.codec.schemes = vec![CodecScheme::Discrete];
            cfg.codec.repetitions = 1;
            cfg.output.audit = false;
            let rows = Harness::from_config(cfg).unwrap().run_codec().unwrap();
            for r in rows {
                if r.mean_decoded != Some(f64::from(r.x)) || r.invalid != 0 {
                    bad.push(format!("{v}/{}: {} -> {:?}", framing.side_a, r.x, r.mean_decoded));
                }
            }
        }
    }
    check(
        bad.is_empty(),
        format!("88 round trips, {} mismatches {bad:?}", bad.len()),
    )
}

fn faithful_grounding() -> Outcome {
    let dir = tempdir();
    let mut cfg = mock_config(BackendKind::MockFaithful, dir.path());
    cfg.grid.p = vec![0.5, 1.0];
    cfg.grid.epsilon = vec![0.3, 0.9];
    cfg.output.audit = false;
    let cells = Harness::from_config(cfg).unwrap().run_consistency().unwrap();
    let mut ok = cells.len() == 4;
    let mut parts = Vec::new();
    for c in &cells {
        let a = c.aggregate.as_ref().map_err(|e| e.clone())?;
        ok &= a.distance.mean <= FAITHFUL_MAX_DISTANCE && a.polarity_pct.mean <= FAITHFUL_MAX_POLARITY;
        parts.push(format!(
            "(p={}, eps={}) distance {:.3} polarity {:.2}%",
            c.p, c.epsilon, a.distance.mean, a.polarity_pct.mean
        ));
    }
    check(ok, parts.join("; "))
}

fn baseline_cell(kind: AgentKind, p: f64, epsilon: f64) -> grounded_core::evaluation::ConsistencyAggregate {
    let dir = tempdir();
    let mut cfg = mock_config(BackendKind::MockFaithful, dir.path());
    cfg.agents.kind = kind;
    cfg.grid.p = vec![p];
    cfg.grid.epsilon = vec![epsilon];
    cfg.output.audit = false;
    let cells = Harness::from_config(cfg).unwrap().run_consistency().unwrap();
    cells.into_iter().next().unwrap().aggregate.unwrap()
}

fn random_baseline() -> Outcome {
    let a = baseline_cell(AgentKind::Random, 1.0, 0.3);
    check(
        within(a.distance.mean, RANDOM_DISTANCE) && within(a.polarity_pct.mean, RANDOM_POLARITY),
        format!(
            "distance {:.3} (target {}±{}), polarity {:.2}% (target {}±{})",
            a.distance.mean,
            RANDOM_DISTANCE.0,
            RANDOM_DISTANCE.1,
            a.polarity_pct.mean,
            RANDOM_POLARITY.0,
            RANDOM_POLARITY.1
        ),
    )
}

fn zero_baseline() -> Outcome {
    let dense = baseline_cell(AgentKind::Zero, 1.0, 0.3).polarity_pct.mean;
    let sparse = baseline_cell(AgentKind::Zero, 0.3, 0.9).polarity_pct.mean;
    check(
        within(dense, ZERO_POLARITY_DENSE) && within(sparse, ZERO_POLARITY_SPARSE),
        format!(
            "(1.0, 0.3) polarity {dense:.2}% (target {}±{}); (0.3, 0.9) polarity {sparse:.2}% (target {}±{})",
            ZERO_POLARITY_DENSE.0, ZERO_POLARITY_DENSE.1, ZERO_POLARITY_SPARSE.0, ZERO_POLARITY_SPARSE.1
        ),
    )
}

fn random_polarity_floor() -> Outcome {
    let mut stream = rng(7);
    let mut agent = rng(8);
    let updates: Vec<ScoredUpdate> = (0..RANDOM_FLOOR_UPDATES)
        .map(|k| {
            let magnitude = 0.6 + 4.4 * rand::Rng::random::<f64>(&mut stream);
            let sign = if rand::Rng::random::<bool>(&mut stream) {
                1.0
            } else {
                -1.0
            };
            let v = baseline_value(AgentKind::Random, &mut agent);
            ScoredUpdate {
                epoch: k,
                agent: 0,
                reference: sign * magnitude,
                output: CandidateOutput::Valid(ScaledOpinion::new(v.into()).unwrap()),
            }
        })
        .collect();
    let m = estimate_consistency(&updates).unwrap();
    check(
        within(m.polarity_pct, RANDOM_FLOOR),
        format!(
            "polarity {:.3}% (target {:.2}±{})",
            m.polarity_pct, RANDOM_FLOOR.0, RANDOM_FLOOR.1
        ),
    )
}

fn sensitivity_identity() -> Outcome {
    let dir = tempdir();
    let copy = dir.path().join("base-copy.txt");
    std::fs::write(&copy, PromptSet::builtin(Variant::Base).to_file_string()).unwrap();
    let mut cfg = mock_config(BackendKind::MockFaithful, &dir.path().join("out"));
    cfg.grid.p = vec![0.5];
    cfg.run.runs = 3;
    cfg.output.audit = false;
    cfg.sensitivity.variants = vec!["base".into(), copy.display().to_string()];
    let (_, reports) = Harness::from_config(cfg).unwrap().run_sensitivity().unwrap();
    let zero = !reports.is_empty()
        && reports
            .iter()
            .all(|(_, _, r)| r.distance == 0.0 && r.polarity_pct == 0.0);
    check(
        zero,
        format!("{} cells, all differences exactly 0: {zero}", reports.len()),
    )
}

fn ci_arithmetic() -> Outcome {
    let runs: Vec<RunMetrics> = [1.0, 2.0, 3.0]
        .into_iter()
        .map(|d| RunMetrics {
            distance: d,
            polarity_pct: 0.0,
            zero_pct: 0.0,
            filtered_polarity_pct: None,
            invalid_pct: 0.0,
            updates: 1,
            valid: 1,
            bypassed: 0,
            invalid: 0,
        })
        .collect();
    let hw = aggregate_runs(&runs)
        .unwrap()
        .distance
        .ci_half_width
        .unwrap_or(f64::NAN);
    check(within(hw, CI_HALF_WIDTH), format!("half-width {hw:.5}"))
}

struct DeadFirst;

impl Transport for DeadFirst {
    fn send(&self, endpoint: &str, _: &CompletionRequest, _: Duration) -> Result<String, TransportError> {
        if endpoint == "stub-0" {
            Err(TransportError::Timeout)
        } else {
            Ok(format!("served by {endpoint}"))
        }
    }
}

#[derive(Default)]
struct Invariant {
    violations: Mutex<Vec<DispatchEvent>>,
    dispatches: AtomicUsize,
    retries: AtomicUsize,
}

impl PoolObserver for Invariant {
    fn on_dispatch(&self, e: &DispatchEvent) {
        self.dispatches.fetch_add(1, Ordering::SeqCst);
        let load = e.in_flight[e.endpoint];
        let least = e.eligible[e.endpoint] && (0..e.in_flight.len()).all(|j| !e.eligible[j] || load <= e.in_flight[j]);
        if !least {
            self.violations.lock().unwrap().push(e.clone());
        }
    }

    fn on_retry(&self, _: &RetryEvent) {
        self.retries.fetch_add(1, Ordering::SeqCst);
    }
}

fn gateway_failover() -> Outcome {
    let obs = Arc::new(Invariant::default());
    let pool = EndpointPool::new(
        vec!["stub-0".into(), "stub-1".into()],
        Duration::from_millis(50),
        2,
        DeadFirst,
    )
    .unwrap()
    .with_observer(obs.clone());
    let mut served = 0;
    for k in 0..FAILOVER_REQUESTS {
        let req = CompletionRequest::new("m", format!("request {k}"), SamplingParams::default()).unwrap();
        if grounded_gateway::Backend::complete(&pool, &req).as_deref() == Ok("served by stub-1") {
            served += 1;
        }
    }
    let retries = obs.retries.load(Ordering::SeqCst);
    let violations = obs.violations.lock().unwrap().len();
    check(
        served == FAILOVER_REQUESTS && retries == FAILOVER_REQUESTS && violations == 0,
        format!(
            "{served} served by endpoint 1, {retries} retries, {} dispatches, {violations} invariant violations",
            obs.dispatches.load(Ordering::SeqCst)
        ),
    )
}

fn replay_identity() -> Outcome {
    let dir = tempdir();
    let mut cfg = mock_config(BackendKind::MockFaithful, &dir.path().join("run"));
    cfg.grid.p = vec![0.5, 1.0];
    cfg.run.runs = 3;
    cfg.run.epochs = 5;
    let cells = Harness::from_config(cfg).unwrap().run_consistency().unwrap();
    let replayed = dir.path().join("replay");
    let (_, ok) = replay(&dir.path().join("run/audit.jsonl"), &replayed).unwrap();
    let a = std::fs::read(dir.path().join("run/consistency.csv")).unwrap();
    let b = std::fs::read(replayed.join("consistency.csv")).unwrap();
    check(
        ok && a == b && cells.iter().all(|c| c.completed()),
        format!("consistency.csv {} bytes, identical: {}", a.len(), a == b),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: Vec<Criterion> = vec![
        ("1 DeGroot consensus", secs(1), degroot_consensus),
        ("2 HK saturation equals DeGroot", secs(1), hk_saturation),
        ("3 HK clustering", secs(1), hk_clustering),
        ("4 codec round trip", secs(1), codec_round_trip),
        ("5 faithful-mock grounding bound", secs(30), faithful_grounding),
        ("6 random-agent baseline", secs(10), random_baseline),
        ("7 zero-agent baseline", secs(10), zero_baseline),
        ("8 random-agent polarity floor", secs(5), random_polarity_floor),
        ("9 sensitivity identity", secs(60), sensitivity_identity),
        ("10 CI arithmetic", secs(1), ci_arithmetic),
        ("11 gateway failover", secs(5), gateway_failover),
        ("12 replay determinism", secs(60), replay_identity),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let out = catch_unwind(AssertUnwindSafe(|| timed(budget, f)))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        match out {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    println!("acceptance: {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}
