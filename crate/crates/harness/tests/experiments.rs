use std::path::Path;
use std::sync::Arc;

use grounded_core::codec::TopicFraming;
use grounded_gateway::mock::{classify, PromptRole};
use grounded_gateway::{Backend, BackendError, BackendKind, CompletionRequest, FaithfulBackend};
use grounded_harness::audit::{read_audit, AuditRecord};
use grounded_harness::config::AgentKind;
use grounded_harness::{replay, Command, ExperimentConfig, Harness};

fn small_config(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.backend.kind = BackendKind::MockFaithful;
    cfg.grid.p = vec![0.3, 1.0];
    cfg.grid.epsilon = vec![0.3];
    cfg.run.runs = 2;
    cfg.run.epochs = 4;
    cfg.output.dir = out.to_path_buf();
    cfg
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Audit body after the header, which records the output directory.
fn audit_body(dir: &Path) -> String {
    let text = String::from_utf8(read(&dir.join("audit.jsonl"))).unwrap();
    text.split_once('\n').unwrap().1.to_string()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        Harness::from_config(small_config(&dir.path().join(name)))
            .unwrap()
            .run_consistency()
            .unwrap();
    }
    assert_eq!(
        read(&dir.path().join("a/consistency.csv")),
        read(&dir.path().join("b/consistency.csv"))
    );
    assert_eq!(audit_body(&dir.path().join("a")), audit_body(&dir.path().join("b")));
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    for workers in [1, 4] {
        let mut cfg = small_config(&dir.path().join(format!("w{workers}")));
        cfg.run.workers = workers;
        Harness::from_config(cfg).unwrap().run_consistency().unwrap();
    }
    assert_eq!(
        read(&dir.path().join("w1/consistency.csv")),
        read(&dir.path().join("w4/consistency.csv"))
    );
    assert_eq!(audit_body(&dir.path().join("w1")), audit_body(&dir.path().join("w4")));
}

#[test]
fn adding_grid_cells_leaves_existing_cells_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let mut one = small_config(&dir.path().join("one"));
    one.grid.p = vec![1.0];
    let a = Harness::from_config(one).unwrap().run_consistency().unwrap();
    let b = Harness::from_config(small_config(&dir.path().join("two")))
        .unwrap()
        .run_consistency()
        .unwrap();
    let same = b.iter().find(|c| c.p == 1.0).unwrap();
    assert_eq!(a[0].seeds, same.seeds);
    assert_eq!(a[0].runs, same.runs);
}

#[test]
fn update_counts_cover_every_agent_and_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (n, epochs, runs) = (cfg.grid.n[0], cfg.run.epochs, cfg.run.runs);
    let cells = Harness::from_config(cfg).unwrap().run_consistency().unwrap();
    for c in &cells {
        for m in &c.runs {
            assert_eq!(m.updates, n * epochs);
            assert_eq!(m.valid + m.bypassed + m.invalid, m.updates);
        }
        assert_eq!(c.updates.len(), n * epochs * runs);
    }
    let records = read_audit(&dir.path().join("audit.jsonl")).unwrap();
    assert!(matches!(records[0], AuditRecord::Header { .. }));
    let updates = records
        .iter()
        .filter(|r| matches!(r, AuditRecord::Update { .. }))
        .count();
    assert_eq!(updates, cells.len() * n * epochs * runs);
    assert!(records.iter().any(|r| matches!(r, AuditRecord::Call(_))));
}

/// Faithful answers, except that yes/no questions about texts with an odd
/// prompt hash get an unusable reply.
struct Evasive(FaithfulBackend, TopicFraming);

impl Backend for Evasive {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        let odd = request.prompt_hash().as_bytes().last().is_some_and(|b| b % 2 == 1);
        if classify(&request.prompt, &self.1) == PromptRole::YesNoDecode && odd {
            return Ok("Hard to say.".into());
        }
        self.0.complete(request)
    }

    fn id(&self) -> String {
        "evasive".into()
    }
}

#[test]
fn unparseable_answers_are_counted_invalid_not_scored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let framing = cfg.topic.clone();
    let backend = Arc::new(Evasive(FaithfulBackend::new(framing.clone()), framing));
    let cells = Harness::new(cfg, backend).unwrap().run_consistency().unwrap();
    let invalid: usize = cells.iter().flat_map(|c| &c.runs).map(|m| m.invalid).sum();
    let valid: usize = cells.iter().flat_map(|c| &c.runs).map(|m| m.valid).sum();
    assert!(invalid > 0 && valid > 0, "invalid {invalid} valid {valid}");
    for m in cells.iter().flat_map(|c| &c.runs) {
        let expected = 100.0 * m.invalid as f64 / (m.valid + m.invalid) as f64;
        assert!((m.invalid_pct - expected).abs() < 1e-12);
    }
}

#[test]
fn backend_failure_marks_cell_failed_and_execute_reports_it() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("empty.jsonl");
    std::fs::write(&script, "").unwrap();
    let mut cfg = small_config(&dir.path().join("out"));
    cfg.backend.kind = BackendKind::MockScripted;
    cfg.backend.script_file = Some(script);
    let ok = Harness::from_config(cfg)
        .unwrap()
        .execute(Command::RunConsistency)
        .unwrap();
    assert!(!ok);
    let csv = String::from_utf8(read(&dir.path().join("out/consistency.csv"))).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().skip(1).all(|l| l.contains("failed: ")), "{csv}");
}

#[test]
fn baseline_agents_need_no_backend_calls() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.agents.kind = AgentKind::Zero;
    cfg.backend.kind = BackendKind::MockScripted;
    let script = dir.path().join("empty.jsonl");
    std::fs::write(&script, "").unwrap();
    cfg.backend.script_file = Some(script);
    let cells = Harness::from_config(cfg).unwrap().run_consistency().unwrap();
    for c in &cells {
        let a = c.aggregate.as_ref().unwrap();
        assert_eq!(a.zero_pct.mean, 100.0);
        assert_eq!(a.invalid, 0);
    }
}

#[test]
fn every_command_replays_to_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (Command::RunConsistency, vec!["consistency.csv"]),
        (Command::RunSensitivity, vec!["consistency.csv", "sensitivity.csv"]),
        (Command::RunCodec, vec!["codec.csv"]),
        (Command::RunNegativity, vec!["negativity.csv"]),
    ];
    for (command, files) in cases {
        let out = dir.path().join(command.as_str());
        let mut cfg = small_config(&out);
        cfg.grid.p = vec![0.5];
        cfg.codec.repetitions = 2;
        cfg.negativity.trials = 3;
        cfg.sensitivity.variants = vec!["base".into(), "wording".into()];
        assert!(Harness::from_config(cfg).unwrap().execute(command).unwrap());
        let again = dir.path().join(format!("{}-replay", command.as_str()));
        let (replayed, ok) = replay(&out.join("audit.jsonl"), &again).unwrap();
        assert!(ok);
        assert_eq!(replayed, command);
        for f in files {
            assert_eq!(read(&out.join(f)), read(&again.join(f)), "{} {f}", command.as_str());
        }
    }
}

#[test]
fn simulate_reference_writes_one_trajectory_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let summaries = Harness::from_config(cfg).unwrap().simulate_reference().unwrap();
    assert_eq!(summaries.len(), 4);
    for s in &summaries {
        let text = String::from_utf8(read(&dir.path().join(&s.file))).unwrap();
        assert_eq!(
            text.lines().count(),
            1 + 5 * 20,
            "header plus 20 agents over epochs 0..=4"
        );
    }
    let summary = String::from_utf8(read(&dir.path().join("reference.csv"))).unwrap();
    assert_eq!(summary.lines().count(), 5);
}
