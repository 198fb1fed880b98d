//! Experiment drivers: reference simulation, model consistency, codec
//! consistency, prompt sensitivity, negativity bias and replay.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use grounded_core::codec::{options, parse_reaction, phrase_of, OptionList, ScaledOpinion};
use grounded_core::dynamics::{neighborhood_with, simulate_with, SocialNetwork, StepOptions};
use grounded_core::evaluation::{
    aggregate_runs, estimate_consistency, fit_line, sensitivity, CellKey, ConsistencyAggregate, Framing,
    NegativityMatrix, RunMetrics, ScoredUpdate, SensitivityReport,
};
use grounded_core::prompts::{
    assign_personas, bundled_persona_blocks, parse_persona_blocks, NegativityPrompts, Persona, PromptSet, Variant,
};
use grounded_core::{OpinionState, ReferenceModel, Trajectory};
use grounded_gateway::{Backend, BackendKind};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::agents::{baseline_value, AgentError, LlmRuntime, UpdateOutcome};
use crate::audit::{read_audit, write_audit, AuditRecord, AUDIT_VERSION};
use crate::config::{AgentKind, CodecScheme, ExperimentConfig, ModelKind};
use crate::gateway::{build_backend, build_gateway, Gateway};
use crate::reports::{codec_csv, consistency_csv, negativity_csv, sensitivity_csv, write_atomic, write_json};
use crate::seeds::{rng, run_seed, sub_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SimulateReference,
    RunConsistency,
    RunCodec,
    RunSensitivity,
    RunNegativity,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::SimulateReference => "simulate-reference",
            Command::RunConsistency => "run-consistency",
            Command::RunCodec => "run-codec",
            Command::RunSensitivity => "run-sensitivity",
            Command::RunNegativity => "run-negativity",
        }
    }
}

impl FromStr for Command {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Command::SimulateReference,
            Command::RunConsistency,
            Command::RunCodec,
            Command::RunSensitivity,
            Command::RunNegativity,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| anyhow!("unknown command {s:?}"))
    }
}

/// Loads a prompt set from a built-in variant name or a file path.
pub fn resolve_prompt_set(spec: &str) -> Result<PromptSet> {
    if let Ok(v) = Variant::from_str(spec) {
        return Ok(PromptSet::builtin(v));
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading prompt set {spec}"))?;
    PromptSet::parse(&text).with_context(|| format!("parsing prompt set {spec}"))
}

fn load_personas(cfg: &ExperimentConfig, n: usize) -> Result<Vec<Persona>> {
    let blocks = match &cfg.agents.personas_file {
        Some(p) => {
            parse_persona_blocks(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
        }
        None => bundled_persona_blocks().to_vec(),
    };
    Ok(assign_personas(&blocks, n)?)
}

/// Network, initial state and reference trajectory of one run.
pub struct ReferenceRun {
    pub seed: u64,
    pub network: SocialNetwork,
    pub trajectory: Trajectory,
}

pub fn reference_run(cfg: &ExperimentConfig, n: usize, p: f64, epsilon: f64, run: usize) -> Result<ReferenceRun> {
    let seed = run_seed(cfg.run.master_seed, n, p, epsilon, run);
    let network = SocialNetwork::erdos_renyi(n, p, sub_seed(seed, "network", &[]))?;
    let x0 = OpinionState::uniform(n, &mut rng(sub_seed(seed, "init", &[])));
    let model = match cfg.run.model {
        ModelKind::Hk => ReferenceModel::hk(epsilon)?,
        ModelKind::Degroot => ReferenceModel::DeGroot,
    };
    let opts = StepOptions {
        include_self: cfg.run.include_self,
    };
    let trajectory = simulate_with(&network, &x0, model, cfg.run.epochs, opts)?;
    Ok(ReferenceRun {
        seed,
        network,
        trajectory,
    })
}

pub fn cell_label(n: usize, p: f64, epsilon: f64, variant: &str) -> String {
    format!("n{n}-p{p}-eps{epsilon}-{variant}")
}

/// Aggregated result of one grid cell for one prompt variant.
#[derive(Debug, Clone, Serialize)]
pub struct CellOutcome {
    pub n: usize,
    pub p: f64,
    pub epsilon: f64,
    pub variant: String,
    pub agent: AgentKind,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunMetrics>,
    #[serde(serialize_with = "ser_result")]
    pub aggregate: Result<ConsistencyAggregate, String>,
    #[serde(skip)]
    pub updates: Vec<(usize, u64, UpdateOutcome)>,
}

fn ser_result<S: serde::Serializer>(r: &Result<ConsistencyAggregate, String>, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    #[serde(rename_all = "snake_case")]
    enum Tagged<'a> {
        Ok(&'a ConsistencyAggregate),
        Failed(&'a str),
    }
    match r {
        Ok(a) => Tagged::Ok(a).serialize(s),
        Err(e) => Tagged::Failed(e).serialize(s),
    }
}

impl CellOutcome {
    pub fn completed(&self) -> bool {
        self.aggregate.is_ok()
    }

    pub fn key(&self, cfg: &ExperimentConfig) -> CellKey {
        CellKey {
            n: self.n,
            p: self.p,
            epsilon: self.epsilon,
            epochs: cfg.run.epochs,
            agent: self.agent.as_str().to_string(),
            model: cfg.backend.model.clone(),
            seeds: self.seeds.clone(),
        }
    }
}

/// Shared state of one harness invocation.
pub struct Harness {
    pub cfg: ExperimentConfig,
    pub gateway: Gateway,
    pool: rayon::ThreadPool,
}

struct RunResult {
    seed: u64,
    metrics: RunMetrics,
    updates: Vec<UpdateOutcome>,
}

impl Harness {
    pub fn new(cfg: ExperimentConfig, backend: Arc<dyn Backend>) -> Result<Self> {
        cfg.validate()?;
        let gateway = build_gateway(&cfg, backend, cfg.output.audit);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.run.workers).build()?;
        Ok(Self { cfg, gateway, pool })
    }

    /// Builds the backend described by the config itself.
    pub fn from_config(cfg: ExperimentConfig) -> Result<Self> {
        let backend = build_backend(&cfg)?;
        Self::new(cfg, backend)
    }

    pub fn out_dir(&self) -> &Path {
        &self.cfg.output.dir
    }

    fn runtime<'a>(&'a self, pset: &'a PromptSet, personas: &'a [Persona]) -> LlmRuntime<'a> {
        LlmRuntime {
            pset,
            framing: &self.cfg.topic,
            gateway: &self.gateway,
            personas,
            parse_mode: self.cfg.agents.parse_mode,
            decode_retries: self.cfg.agents.decode_retries,
            max_timeline_posts: self.cfg.agents.max_timeline_posts,
            timeline_order: self.cfg.agents.timeline_order,
        }
    }

    fn header(&self, command: Command) -> AuditRecord {
        AuditRecord::Header {
            version: AUDIT_VERSION,
            command: command.as_str().into(),
            backend: self.gateway.backend_id(),
            config: Box::new(self.cfg.clone()),
        }
    }

    fn finish_audit(&self, mut records: Vec<AuditRecord>) -> Result<()> {
        if !self.cfg.output.audit {
            return Ok(());
        }
        if let Some(rec) = self.gateway.recorder() {
            records.extend(rec.take_sorted().into_iter().map(AuditRecord::Call));
        }
        write_audit(&self.out_dir().join("audit.jsonl"), &records)?;
        Ok(())
    }

    /// One teacher-forced run: the candidate answers every epoch from the
    /// reference state `x(t)` and is scored against `x(t+1)`.
    fn run_one(&self, pset: &PromptSet, label: &str, n: usize, p: f64, epsilon: f64, run: usize) -> Result<RunResult> {
        let cfg = &self.cfg;
        let reference = reference_run(cfg, n, p, epsilon, run)?;
        let traj = &reference.trajectory;
        let eps = traj.model().epsilon();
        let opts = StepOptions {
            include_self: cfg.run.include_self,
        };
        let kind = cfg.agents.kind;
        let personas = if kind == AgentKind::Llm {
            load_personas(cfg, n)?
        } else {
            Vec::new()
        };
        let rt = self.runtime(pset, &personas);
        let mut baseline_rngs: Vec<_> = (0..n)
            .map(|i| rng(sub_seed(reference.seed, "agent", &[i as u64])))
            .collect();
        let mut updates = Vec::with_capacity(n * cfg.run.epochs);
        for t in 0..traj.epochs() {
            let x = &traj.states()[t];
            let next = &traj.states()[t + 1];
            let bypassed = traj.bypassed(t);
            let context = format!("{label}/r{run:02}/e{t:02}");
            let hoods: Vec<Vec<usize>> = (0..n)
                .map(|i| neighborhood_with(&reference.network, x, i, eps, opts))
                .collect::<Result<_, _>>()?;
            debug_assert!(hoods.iter().zip(bypassed).all(|(h, &b)| h.is_empty() == b));
            let epoch_updates: Vec<UpdateOutcome> = match kind {
                AgentKind::Llm => {
                    let posts = rt.encode_posts(x, t, &context)?;
                    (0..n)
                        .into_par_iter()
                        .map(|i| {
                            let mut order_rng = rng(sub_seed(reference.seed, "timeline", &[t as u64, i as u64]));
                            rt.update(
                                i,
                                t,
                                &posts,
                                &hoods[i],
                                5.0 * next.values()[i],
                                &context,
                                &mut order_rng,
                            )
                        })
                        .collect::<Result<_, AgentError>>()?
                }
                AgentKind::Random | AgentKind::Zero => (0..n)
                    .map(|i| {
                        // Draw every epoch so an agent's stream does not depend on bypasses.
                        let v = baseline_value(kind, &mut baseline_rngs[i]);
                        let out = UpdateOutcome::bypassed(i, t, 5.0 * next.values()[i]);
                        if bypassed[i] {
                            out
                        } else {
                            UpdateOutcome {
                                neighborhood: hoods[i].clone(),
                                ..out
                            }
                            .with_value(v)
                        }
                    })
                    .collect(),
            };
            updates.extend(epoch_updates);
        }
        let scored: Vec<ScoredUpdate> = updates
            .iter()
            .map(|u| ScoredUpdate {
                epoch: u.epoch,
                agent: u.agent,
                reference: u.reference_value,
                output: u.candidate_output(),
            })
            .collect();
        let metrics = estimate_consistency(&scored)?;
        Ok(RunResult {
            seed: reference.seed,
            metrics,
            updates,
        })
    }

    /// Every grid cell for one prompt set; runs of all cells execute in
    /// parallel and are gathered in grid order.
    pub fn consistency_cells(&self, pset: &PromptSet, variant: &str) -> Vec<CellOutcome> {
        let cells = self.cfg.cells();
        let runs = self.cfg.run.runs;
        let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..runs).map(move |r| (c, r))).collect();
        let results: Vec<Result<RunResult>> = self.pool.install(|| {
            jobs.par_iter()
                .map(|&(c, r)| {
                    let (n, p, e) = cells[c];
                    self.run_one(pset, &cell_label(n, p, e, variant), n, p, e, r)
                })
                .collect()
        });
        let mut results = results.into_iter();
        cells
            .iter()
            .map(|&(n, p, epsilon)| {
                let mut seeds = Vec::new();
                let mut metrics = Vec::new();
                let mut updates = Vec::new();
                let mut failure = None;
                for run in 0..runs {
                    match results.next().expect("one result per job") {
                        Ok(r) => {
                            seeds.push(r.seed);
                            metrics.push(r.metrics);
                            updates.extend(r.updates.into_iter().map(|u| (run, r.seed, u)));
                        }
                        Err(e) => {
                            failure.get_or_insert(format!("run {run}: {e:#}"));
                        }
                    }
                }
                let aggregate = match failure {
                    Some(e) => {
                        warn!("cell {} failed: {e}", cell_label(n, p, epsilon, variant));
                        Err(e)
                    }
                    None => aggregate_runs(&metrics).map_err(|e| e.to_string()),
                };
                CellOutcome {
                    n,
                    p,
                    epsilon,
                    variant: variant.to_string(),
                    agent: self.cfg.agents.kind,
                    seeds,
                    runs: metrics,
                    aggregate,
                    updates,
                }
            })
            .collect()
    }

    fn cell_records(cells: &[CellOutcome]) -> Vec<AuditRecord> {
        let mut records = Vec::new();
        for c in cells {
            let label = cell_label(c.n, c.p, c.epsilon, &c.variant);
            for (run, seed, u) in &c.updates {
                records.push(AuditRecord::Update {
                    cell: label.clone(),
                    run: *run,
                    seed: *seed,
                    outcome: u.clone(),
                });
            }
            if let Err(e) = &c.aggregate {
                records.push(AuditRecord::CellFailed {
                    cell: label,
                    error: e.clone(),
                });
            }
        }
        records
    }

    fn report_json<T: Serialize>(&self, command: Command, body: T) -> Result<()> {
        #[derive(Serialize)]
        struct Report<'a, T> {
            command: &'a str,
            backend: String,
            config: &'a ExperimentConfig,
            results: T,
        }
        write_json(
            &self.out_dir().join("report.json"),
            &Report {
                command: command.as_str(),
                backend: self.gateway.backend_id(),
                config: &self.cfg,
                results: body,
            },
        )?;
        Ok(())
    }

    pub fn run_consistency(&self) -> Result<Vec<CellOutcome>> {
        let pset = resolve_prompt_set(&self.cfg.agents.variant)?;
        let cells = self.consistency_cells(&pset, &self.cfg.agents.variant);
        write_atomic(&self.out_dir().join("consistency.csv"), &consistency_csv(&cells)?)?;
        self.report_json(Command::RunConsistency, &cells)?;
        let mut records = vec![self.header(Command::RunConsistency)];
        records.extend(Self::cell_records(&cells));
        self.finish_audit(records)?;
        Ok(cells)
    }

    /// Consistency for every configured variant on shared seeds, then the
    /// absolute differences against the first variant.
    pub fn run_sensitivity(&self) -> Result<(Vec<CellOutcome>, Vec<SensitivityRow>)> {
        let variants = &self.cfg.sensitivity.variants;
        if variants.len() < 2 {
            bail!("sensitivity.variants needs at least two entries");
        }
        let mut per_variant = Vec::new();
        for v in variants {
            let pset = resolve_prompt_set(v)?;
            info!("sensitivity: running variant {v}");
            per_variant.push(self.consistency_cells(&pset, v));
        }
        let mut reports = Vec::new();
        for (i, cells) in per_variant.iter().enumerate().skip(1) {
            for (base, other) in per_variant[0].iter().zip(cells) {
                if let (Ok(b), Ok(o)) = (&base.aggregate, &other.aggregate) {
                    let s = sensitivity((&base.key(&self.cfg), b), (&other.key(&self.cfg), o))?;
                    reports.push((variants[0].clone(), variants[i].clone(), s));
                }
            }
        }
        let all: Vec<CellOutcome> = per_variant.into_iter().flatten().collect();
        write_atomic(&self.out_dir().join("consistency.csv"), &consistency_csv(&all)?)?;
        write_atomic(&self.out_dir().join("sensitivity.csv"), &sensitivity_csv(&reports)?)?;
        self.report_json(
            Command::RunSensitivity,
            serde_json::json!({ "cells": &all, "sensitivity": &reports }),
        )?;
        let mut records = vec![self.header(Command::RunSensitivity)];
        records.extend(Self::cell_records(&all));
        self.finish_audit(records)?;
        Ok((all, reports))
    }

    /// Encodes and decodes every scale value `repetitions` times per scheme.
    pub fn run_codec(&self) -> Result<Vec<CodecRow>> {
        let pset = resolve_prompt_set(&self.cfg.agents.variant)?;
        let reps = self.cfg.codec.repetitions;
        let personas = load_personas(&self.cfg, reps.min(bundled_persona_blocks().len()).max(1))?;
        let rt = self.runtime(&pset, &personas);
        let mut rows = Vec::new();
        for &scheme in &self.cfg.codec.schemes {
            let jobs: Vec<(i8, usize)> = (-5..=5i8).flat_map(|x| (0..reps).map(move |k| (x, k))).collect();
            let decoded: Vec<Option<i8>> = self.pool.install(|| {
                jobs.par_iter()
                    .map(|&(x, k)| -> Result<Option<i8>> {
                        let persona = &personas[k % personas.len()];
                        let prompt = match scheme {
                            CodecScheme::Discrete => {
                                let s = ScaledOpinion::new(x.into())?;
                                pset.render_encoding(persona, phrase_of(s), &self.cfg.topic)?
                            }
                            CodecScheme::Scalar => {
                                pset.render_scalar_encoding(persona, f64::from(x), &self.cfg.topic)?
                            }
                        };
                        let ctx = format!("codec/{}/x{x:+}/k{k:03}", scheme.as_str());
                        let post = self.gateway.complete(&prompt, &format!("{ctx}/enc"), false)?;
                        Ok(rt.decode(&post, &ctx)?.value.map(|v| v.value()))
                    })
                    .collect::<Result<_>>()
            })?;
            let mut scheme_rows = Vec::new();
            for (xi, x) in (-5..=5i8).enumerate() {
                let vals: Vec<f64> = decoded[xi * reps..(xi + 1) * reps]
                    .iter()
                    .flatten()
                    .map(|&v| f64::from(v))
                    .collect();
                scheme_rows.push(CodecRow {
                    scheme,
                    x,
                    mean_decoded: (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64),
                    valid: vals.len(),
                    invalid: reps - vals.len(),
                    slope: None,
                    intercept: None,
                });
            }
            let points: Vec<(f64, f64)> = scheme_rows
                .iter()
                .filter_map(|r| r.mean_decoded.map(|m| (f64::from(r.x), m)))
                .collect();
            if let Ok((slope, intercept)) = fit_line(&points) {
                for r in &mut scheme_rows {
                    r.slope = Some(slope);
                    r.intercept = Some(intercept);
                }
            }
            rows.extend(scheme_rows);
        }
        write_atomic(&self.out_dir().join("codec.csv"), &codec_csv(&rows)?)?;
        self.report_json(Command::RunCodec, &rows)?;
        self.finish_audit(vec![self.header(Command::RunCodec)])?;
        Ok(rows)
    }

    /// Author posts under three framings, read by readers holding each
    /// framing; reactions on the five-point scale.
    pub fn run_negativity(&self) -> Result<NegativityMatrix> {
        let prompts = NegativityPrompts::builtin();
        let trials = self.cfg.negativity.trials;
        let personas = load_personas(&self.cfg, (2 * trials).min(bundled_persona_blocks().len()))?;
        let topic = &self.cfg.topic;
        let stance = |f: Framing| -> (&str, &str) {
            let signed = |v| options().phrase(OptionList::Signed, v).expect("option");
            match f {
                Framing::ProA => (signed(5), topic.side_a.as_str()),
                Framing::ProB => (signed(5), topic.side_b.as_str()),
                Framing::ContraA => (signed(-5), topic.side_a.as_str()),
            }
        };
        let persona = |i: usize| &personas[i % personas.len()];
        let posts: Vec<Vec<String>> = self.pool.install(|| {
            Framing::ALL
                .par_iter()
                .map(|&a| {
                    (0..trials)
                        .into_par_iter()
                        .map(|k| {
                            let (opt, framing) = stance(a);
                            let prompt = prompts.render_author(persona(2 * k), opt, framing)?;
                            let ctx = format!("neg/{}/k{k:03}/author", a.as_str());
                            Ok(self.gateway.complete(&prompt, &ctx, false)?)
                        })
                        .collect::<Result<Vec<String>>>()
                })
                .collect::<Result<_>>()
        })?;
        let mut reactions: [[Vec<i8>; 3]; 3] = Default::default();
        for (r, reader) in Framing::ALL.into_iter().enumerate() {
            for (a, author) in Framing::ALL.into_iter().enumerate() {
                if !Framing::pair_measured(reader, author) {
                    continue;
                }
                let values: Vec<Option<i8>> = self.pool.install(|| {
                    (0..trials)
                        .into_par_iter()
                        .map(|k| {
                            let (opt, framing) = stance(reader);
                            let prompt = prompts.render_reader(persona(2 * k + 1), opt, framing, &posts[a][k])?;
                            let ctx = format!("neg/{}/{}/k{k:03}/reader", reader.as_str(), author.as_str());
                            for attempt in 0..=self.cfg.agents.decode_retries {
                                let answer =
                                    self.gateway
                                        .complete(&prompt, &format!("{ctx}/t{attempt}"), attempt > 0)?;
                                if let Some(v) = parse_reaction(&answer, self.cfg.agents.parse_mode) {
                                    return Ok(Some(v));
                                }
                            }
                            Ok(None)
                        })
                        .collect::<Result<_>>()
                })?;
                reactions[r][a] = values.into_iter().flatten().collect();
            }
        }
        let matrix = NegativityMatrix::from_reactions(&reactions);
        write_atomic(&self.out_dir().join("negativity.csv"), &negativity_csv(&matrix)?)?;
        self.report_json(Command::RunNegativity, &matrix)?;
        self.finish_audit(vec![self.header(Command::RunNegativity)])?;
        Ok(matrix)
    }

    /// Reference trajectories only, one CSV per (cell, run) plus a summary.
    pub fn simulate_reference(&self) -> Result<Vec<ReferenceSummary>> {
        let cfg = &self.cfg;
        let jobs: Vec<(usize, f64, f64, usize)> = cfg
            .cells()
            .into_iter()
            .flat_map(|(n, p, e)| (0..cfg.run.runs).map(move |r| (n, p, e, r)))
            .collect();
        let summaries: Vec<ReferenceSummary> = self.pool.install(|| {
            jobs.par_iter()
                .map(|&(n, p, epsilon, run)| -> Result<ReferenceSummary> {
                    let rr = reference_run(cfg, n, p, epsilon, run)?;
                    let mut csv = Vec::new();
                    rr.trajectory.write_csv(&mut csv)?;
                    let file =
                        PathBuf::from("reference").join(format!("{}-r{run:02}.csv", cell_label(n, p, epsilon, "ref")));
                    write_atomic(&self.out_dir().join(&file), &csv)?;
                    let bypassed = (0..rr.trajectory.epochs())
                        .map(|t| rr.trajectory.bypassed(t).iter().filter(|&&b| b).count())
                        .sum();
                    Ok(ReferenceSummary {
                        n,
                        p,
                        epsilon,
                        run,
                        seed: rr.seed,
                        edges: rr.network.edge_count(),
                        mean_degree: rr.network.mean_degree(),
                        bypassed,
                        initial_spread: rr.trajectory.initial().spread(),
                        final_spread: rr.trajectory.last().spread(),
                        file: file.display().to_string(),
                    })
                })
                .collect::<Result<_>>()
        })?;
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &summaries {
            w.serialize(s)?;
        }
        write_atomic(&self.out_dir().join("reference.csv"), &w.into_inner()?)?;
        self.report_json(Command::SimulateReference, &summaries)?;
        Ok(summaries)
    }

    /// Runs `command`; returns whether every cell completed.
    pub fn execute(&self, command: Command) -> Result<bool> {
        Ok(match command {
            Command::SimulateReference => {
                self.simulate_reference()?;
                true
            }
            Command::RunConsistency => self.run_consistency()?.iter().all(CellOutcome::completed),
            Command::RunSensitivity => self.run_sensitivity()?.0.iter().all(CellOutcome::completed),
            Command::RunCodec => {
                self.run_codec()?;
                true
            }
            Command::RunNegativity => {
                self.run_negativity()?;
                true
            }
        })
    }
}

/// Base label, variant label and their differences.
pub type SensitivityRow = (String, String, SensitivityReport);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodecRow {
    pub scheme: CodecScheme,
    pub x: i8,
    pub mean_decoded: Option<f64>,
    pub valid: usize,
    pub invalid: usize,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceSummary {
    pub n: usize,
    pub p: f64,
    pub epsilon: f64,
    pub run: usize,
    pub seed: u64,
    pub edges: usize,
    pub mean_degree: f64,
    pub bypassed: usize,
    pub initial_spread: f64,
    pub final_spread: f64,
    pub file: String,
}

/// Re-executes the command recorded in an audit log against its recorded
/// completions, writing outputs to `out_dir`.
pub fn replay(audit: &Path, out_dir: &Path) -> Result<(Command, bool)> {
    let records = read_audit(audit).with_context(|| format!("reading {}", audit.display()))?;
    let Some(AuditRecord::Header { command, config, .. }) = records.first() else {
        bail!("{} does not start with an audit header", audit.display());
    };
    let command = Command::from_str(command)?;
    let mut cfg = (**config).clone();
    cfg.backend.kind = BackendKind::MockScripted;
    cfg.backend.script_file = Some(audit.to_path_buf());
    cfg.backend.cache_file = None;
    cfg.output.dir = out_dir.to_path_buf();
    let harness = Harness::from_config(cfg)?;
    let ok = harness.execute(command)?;
    Ok((command, ok))
}
