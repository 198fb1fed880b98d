//! Deterministic stand-ins for a language model.
//!
//! The echo and faithful mocks recognize which prompt of the pipeline they
//! were given from its wording and answer in the canonical option phrases, so
//! the whole encode, dynamics and decode loop runs without a model.

use std::collections::HashMap;
use std::sync::OnceLock;

use grounded_core::codec::{extract_stances, normalize, options, phrase_of, OptionList, ScaledOpinion, TopicFraming};
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::{prompt_hash, Backend, BackendError, CompletionRequest};

/// What a mock answers when the text it is asked about has no stance in it.
pub const UNPARSEABLE_REPLY: &str = "Hard to tell from this text.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Http,
    MockFaithful,
    MockScripted,
    MockEcho,
}

/// Which step of the pipeline a prompt belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PromptRole {
    /// Reader reacting to a post on the agree/disagree scale.
    Reaction,
    /// Single question over the eleven signed options.
    SignedDecode,
    /// Polarity question answered with one of the two framings.
    FramingDecode,
    /// Polarity question answered yes or no.
    YesNoDecode,
    /// Strength question over the six unsigned options.
    StrengthDecode,
    /// Timeline of `@handle: post` lines.
    Dynamics,
    /// Encoding prompt carrying a raw number.
    ScalarEncoding(f64),
    /// Anything else is treated as a stance encoding prompt.
    Encoding,
}

fn handle_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@[A-Za-z0-9_]+:").expect("valid regex"))
}

fn scalar_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"is (-?\d+(?:\.\d+)?) on a scale from -5").expect("valid regex"))
}

fn joined(list: OptionList, take: usize) -> String {
    options()
        .list(list)
        .iter()
        .take(take)
        .map(|(_, p)| normalize(p))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn classify(prompt: &str, framing: &TopicFraming) -> PromptRole {
    let norm = normalize(prompt);
    let reaction = options().list(OptionList::Reaction);
    if reaction.iter().all(|(_, p)| norm.contains(&normalize(p))) {
        return PromptRole::Reaction;
    }
    if norm.contains(&joined(OptionList::Signed, 3)) {
        return PromptRole::SignedDecode;
    }
    let choice = format!(
        "reply with {} or {}",
        normalize(&framing.side_b),
        normalize(&framing.side_a)
    );
    if norm.contains(&choice) {
        return PromptRole::FramingDecode;
    }
    if norm.contains("reply with yes or no") {
        return PromptRole::YesNoDecode;
    }
    if handle_re().is_match(prompt) {
        return PromptRole::Dynamics;
    }
    if norm.contains(&joined(OptionList::Strength, 3)) {
        return PromptRole::StrengthDecode;
    }
    if let Some(c) = scalar_re().captures(prompt) {
        if let Ok(v) = c[1].parse::<f64>() {
            return PromptRole::ScalarEncoding(v);
        }
    }
    PromptRole::Encoding
}

fn stance_sentence(v: i8, framing: &TopicFraming) -> String {
    let s = ScaledOpinion::new(v.into()).expect("stance in range");
    format!("I am {}.", phrase_of(s).text(framing))
}

/// Reaction on `[-2, 2]`: 2 at equal stances, falling linearly with their
/// distance to -2 at opposite extremes.
pub fn reaction_value(reader: i8, author: i8) -> i8 {
    let d = f64::from((reader - author).abs());
    (2.0 * (1.0 - d / 5.0)).round().clamp(-2.0, 2.0) as i8
}

/// Answer of a "perfect" model. `dynamics` decides how a timeline is read.
fn answer(prompt: &str, framing: &TopicFraming, dynamics: fn(&[i8]) -> i8) -> String {
    let role = classify(prompt, framing);
    let stances = extract_stances(prompt, framing);
    let first = stances.first().copied();
    let phrase = |list, v: i8| options().phrase(list, v).expect("value in list").to_string();
    match (role, first) {
        (PromptRole::Reaction, Some(reader)) => {
            let author = *stances.last().expect("non-empty");
            phrase(OptionList::Reaction, reaction_value(reader, author))
        }
        (PromptRole::SignedDecode, Some(v)) => phrase(OptionList::Signed, v),
        (PromptRole::FramingDecode, Some(v)) => match v.signum() {
            1 => framing.side_a.clone(),
            -1 => framing.side_b.clone(),
            _ => "neutral".into(),
        },
        (PromptRole::YesNoDecode, Some(v)) => match v.signum() {
            1 => "yes".into(),
            -1 => "no".into(),
            _ => "neutral".into(),
        },
        (PromptRole::StrengthDecode, Some(v)) => phrase(OptionList::Strength, v.abs()),
        (PromptRole::Dynamics, Some(_)) => stance_sentence(dynamics(&stances), framing),
        (PromptRole::ScalarEncoding(x), _) => {
            stance_sentence(ScaledOpinion::round_from(x.clamp(-5.0, 5.0)).value(), framing)
        }
        (PromptRole::Encoding, Some(v)) => stance_sentence(v, framing),
        _ => UNPARSEABLE_REPLY.into(),
    }
}

fn mean_rounded(values: &[i8]) -> i8 {
    let mean = values.iter().map(|&v| f64::from(v)).sum::<f64>() / values.len() as f64;
    ScaledOpinion::round_from(mean).value()
}

/// Repeats stances: an encoding prompt yields its own stance and a timeline
/// yields its first post's stance.
#[derive(Debug, Clone, Default)]
pub struct EchoBackend {
    framing: TopicFraming,
}

impl EchoBackend {
    pub fn new(framing: TopicFraming) -> Self {
        Self { framing }
    }
}

impl Backend for EchoBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        Ok(answer(&request.prompt, &self.framing, |s| s[0]))
    }

    fn id(&self) -> String {
        "mock_echo".into()
    }
}

/// A perfectly averaging agent: a timeline yields the rounded mean of every
/// stance in it; all other prompts are answered as by [`EchoBackend`].
#[derive(Debug, Clone, Default)]
pub struct FaithfulBackend {
    framing: TopicFraming,
}

impl FaithfulBackend {
    pub fn new(framing: TopicFraming) -> Self {
        Self { framing }
    }
}

impl Backend for FaithfulBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        Ok(answer(&request.prompt, &self.framing, mean_rounded))
    }

    fn id(&self) -> String {
        "mock_faithful".into()
    }
}

/// One recorded completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(default)]
    pub context: Option<String>,
    pub prompt_hash: String,
    pub response: String,
}

/// Replays recorded completions. A request is matched on its context and
/// prompt hash first, then on the prompt hash alone, where the earliest
/// recording wins.
#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    by_context: HashMap<(String, String), String>,
    by_hash: HashMap<String, String>,
}

impl ScriptedBackend {
    pub fn new(entries: impl IntoIterator<Item = ScriptEntry>) -> Self {
        let mut s = Self::default();
        for e in entries {
            if let Some(ctx) = e.context {
                s.by_context
                    .entry((ctx, e.prompt_hash.clone()))
                    .or_insert_with(|| e.response.clone());
            }
            s.by_hash.entry(e.prompt_hash).or_insert(e.response);
        }
        s
    }

    /// Script keyed by prompt text.
    pub fn from_prompts<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self::new(pairs.into_iter().map(|(p, r)| ScriptEntry {
            context: None,
            prompt_hash: prompt_hash(p),
            response: r.to_string(),
        }))
    }

    pub fn len(&self) -> usize {
        self.by_hash.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_hash.is_empty()
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        let hash = request.prompt_hash();
        if let Some(ctx) = &request.context {
            if let Some(r) = self.by_context.get(&(ctx.clone(), hash.clone())) {
                return Ok(r.clone());
            }
        }
        self.by_hash
            .get(&hash)
            .cloned()
            .ok_or(BackendError::ReplayMiss { hash })
    }

    fn id(&self) -> String {
        "mock_scripted".into()
    }
}
