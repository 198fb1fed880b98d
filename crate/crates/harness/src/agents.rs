//! Candidate models: LLM agents (encode, dynamics, decode) and the random and
//! zero baselines.

use grounded_core::codec::{
    compose_two_stage, parse_polarity, parse_strength, phrase_of, to_scale, ComposePath, OptionList, ParseMode,
    ScaledOpinion, TopicFraming,
};
use grounded_core::evaluation::CandidateOutput;
use grounded_core::prompts::{DecodingScheme, Persona, PromptError, PromptSet, TimelinePost};
use grounded_core::OpinionState;
use grounded_gateway::{prompt_hash, BackendError};
use log::info;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{AgentKind, TimelineOrder};
use crate::gateway::Gateway;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("epoch {epoch}, agent {agent}: {source}")]
    Backend {
        epoch: usize,
        agent: usize,
        source: BackendError,
    },
    #[error("epoch {epoch}, agent {agent}: {source}")]
    Prompt {
        epoch: usize,
        agent: usize,
        source: PromptError,
    },
    #[error("opinion out of range: {0}")]
    Codec(#[from] grounded_core::codec::CodecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateStatus {
    Ok,
    Bypassed,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageAnswer {
    pub stage: usize,
    pub attempt: usize,
    pub prompt_hash: String,
    pub answer: String,
    pub parsed: Option<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateOutcome {
    pub agent: usize,
    pub epoch: usize,
    pub status: UpdateStatus,
    pub scaled_value: Option<i8>,
    /// `5 x_i(t+1)` of the reference model.
    pub reference_value: f64,
    pub neighborhood: Vec<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub timeline_truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics_prompt_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_dynamics_text: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decode_trace: Vec<StageAnswer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compose_path: Option<ComposePath>,
}

impl UpdateOutcome {
    fn new(agent: usize, epoch: usize, reference_value: f64, neighborhood: Vec<usize>) -> Self {
        Self {
            agent,
            epoch,
            status: UpdateStatus::Bypassed,
            scaled_value: None,
            reference_value,
            neighborhood,
            timeline_truncated: false,
            dynamics_prompt_hash: None,
            raw_dynamics_text: None,
            decode_trace: Vec::new(),
            compose_path: None,
        }
    }

    pub fn bypassed(agent: usize, epoch: usize, reference_value: f64) -> Self {
        Self::new(agent, epoch, reference_value, Vec::new())
    }

    pub fn with_value(mut self, value: i8) -> Self {
        self.status = UpdateStatus::Ok;
        self.scaled_value = Some(value);
        self
    }

    pub fn candidate_output(&self) -> CandidateOutput {
        match (self.status, self.scaled_value) {
            (UpdateStatus::Ok, Some(v)) => {
                CandidateOutput::Valid(ScaledOpinion::new(v.into()).expect("decoded value in range"))
            }
            (UpdateStatus::Bypassed, _) => CandidateOutput::Bypassed,
            _ => CandidateOutput::Invalid,
        }
    }
}

/// A post written by an agent in one epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub agent: usize,
    pub text: String,
    pub prompt_hash: String,
}

/// Result of decoding one text.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub value: Option<ScaledOpinion>,
    pub trace: Vec<StageAnswer>,
    pub path: Option<ComposePath>,
}

/// Everything an LLM agent needs besides the state it reacts to.
pub struct LlmRuntime<'a> {
    pub pset: &'a PromptSet,
    pub framing: &'a TopicFraming,
    pub gateway: &'a Gateway,
    pub personas: &'a [Persona],
    pub parse_mode: ParseMode,
    pub decode_retries: usize,
    pub max_timeline_posts: Option<usize>,
    pub timeline_order: TimelineOrder,
}

impl LlmRuntime<'_> {
    /// Writes every agent's post for state `x`; calls run in parallel and
    /// the result is indexed by agent.
    pub fn encode_posts(&self, x: &OpinionState, epoch: usize, context: &str) -> Result<Vec<Post>, AgentError> {
        (0..x.len())
            .into_par_iter()
            .map(|i| {
                let stance = phrase_of(to_scale(x.values()[i])?);
                let prompt = self
                    .pset
                    .render_encoding(&self.personas[i], stance, self.framing)
                    .map_err(|source| AgentError::Prompt {
                        epoch,
                        agent: i,
                        source,
                    })?;
                let text = self
                    .gateway
                    .complete(&prompt, &format!("{context}/a{i:03}/enc"), false)
                    .map_err(|source| AgentError::Backend {
                        epoch,
                        agent: i,
                        source,
                    })?;
                Ok(Post {
                    agent: i,
                    prompt_hash: prompt_hash(&prompt),
                    text,
                })
            })
            .collect()
    }

    /// One agent's update from its neighbors' posts. An empty neighborhood
    /// is a bypass and costs no backend call.
    #[allow(clippy::too_many_arguments)]
    pub fn update<R: Rng>(
        &self,
        agent: usize,
        epoch: usize,
        posts: &[Post],
        neighborhood: &[usize],
        reference_value: f64,
        context: &str,
        rng: &mut R,
    ) -> Result<UpdateOutcome, AgentError> {
        let mut out = UpdateOutcome::new(agent, epoch, reference_value, neighborhood.to_vec());
        if neighborhood.is_empty() {
            return Ok(out);
        }
        let mut order = neighborhood.to_vec();
        if self.timeline_order == TimelineOrder::Shuffled {
            order.shuffle(rng);
        }
        if let Some(max) = self.max_timeline_posts {
            if order.len() > max {
                info!(
                    "epoch {epoch}, agent {agent}: timeline truncated from {} to {max} posts",
                    order.len()
                );
                order.truncate(max);
                out.timeline_truncated = true;
            }
        }
        let timeline: Vec<TimelinePost> = order
            .iter()
            .map(|&j| TimelinePost {
                handle: self.personas[j].handle().to_string(),
                text: posts[j].text.clone(),
            })
            .collect();
        let prompt = self
            .pset
            .render_dynamics(&self.personas[agent], &timeline)
            .map_err(|source| AgentError::Prompt { epoch, agent, source })?;
        let ctx = format!("{context}/a{agent:03}");
        let text = self
            .gateway
            .complete(&prompt, &format!("{ctx}/dyn"), false)
            .map_err(|source| AgentError::Backend { epoch, agent, source })?;
        let decoded = self
            .decode(&text, &ctx)
            .map_err(|source| AgentError::Backend { epoch, agent, source })?;
        out.dynamics_prompt_hash = Some(prompt_hash(&prompt));
        out.raw_dynamics_text = Some(text);
        out.decode_trace = decoded.trace;
        out.compose_path = decoded.path;
        match decoded.value {
            Some(v) => out = out.with_value(v.value()),
            None => out.status = UpdateStatus::Invalid,
        }
        Ok(out)
    }

    /// Runs the variant's decoding questions on `text`.
    pub fn decode(&self, text: &str, context: &str) -> Result<Decoded, BackendError> {
        let mut trace = Vec::new();
        match self.pset.decoding_scheme() {
            DecodingScheme::SingleSigned => {
                let v = self.ask(1, text, context, &mut trace, |a| {
                    parse_strength(a, OptionList::Signed, self.parse_mode).map(|m| m.value)
                })?;
                Ok(Decoded {
                    value: v.and_then(|v| ScaledOpinion::new(v.into()).ok()),
                    trace,
                    path: None,
                })
            }
            DecodingScheme::TwoStage(mode) => {
                let polarity = self.ask(1, text, context, &mut trace, |a| {
                    parse_polarity(a, mode, self.framing, self.parse_mode)
                })?;
                let mut strength_match = None;
                let strength = self.ask(2, text, context, &mut trace, |a| {
                    let m = parse_strength(a, OptionList::Strength, self.parse_mode);
                    strength_match = m;
                    m.map(|m| m.value)
                })?;
                let composed = match (polarity, strength, strength_match) {
                    (Some(p), Some(_), Some(m)) => compose_two_stage(p, m),
                    _ => None,
                };
                Ok(Decoded {
                    value: composed.map(|c| c.0),
                    trace,
                    path: composed.map(|c| c.1),
                })
            }
        }
    }

    /// Asks decoding stage `stage`, retrying unparseable answers without the
    /// cache.
    fn ask(
        &self,
        stage: usize,
        text: &str,
        context: &str,
        trace: &mut Vec<StageAnswer>,
        mut parse: impl FnMut(&str) -> Option<i8>,
    ) -> Result<Option<i8>, BackendError> {
        let prompt = self
            .pset
            .render_decoding(stage, text, self.framing)
            .map_err(|e| BackendError::InvalidRequest(e.to_string()))?;
        let hash = prompt_hash(&prompt);
        for attempt in 0..=self.decode_retries {
            let answer = self
                .gateway
                .complete(&prompt, &format!("{context}/dec{stage}/t{attempt}"), attempt > 0)?;
            let parsed = parse(&answer);
            trace.push(StageAnswer {
                stage,
                attempt,
                prompt_hash: hash.clone(),
                answer,
                parsed,
            });
            if parsed.is_some() {
                return Ok(parsed);
            }
        }
        Ok(None)
    }
}

/// Baseline answer: uniform on `[-5, 5]` for the random agent, 0 for the
/// zero agent.
pub fn baseline_value<R: Rng>(kind: AgentKind, rng: &mut R) -> i8 {
    match kind {
        AgentKind::Random => rng.random_range(-5..=5),
        AgentKind::Zero => 0,
        AgentKind::Llm => panic!("LLM agents have no baseline answer"),
    }
}
