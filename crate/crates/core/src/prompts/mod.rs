//! Prompt sets (encoding, dynamics and decoding templates), personas and the
//! prompt-set file format.
//!
//! A prompt-set file is UTF-8 text split into sections by header lines such
//! as `[encoding]` or `[decoding.1]`. A section's body is every line between
//! its header and the next header, joined with `\n`, so whitespace inside a
//! body survives a load/save round trip byte for byte.

mod persona;
mod template;

pub use persona::{assign_personas, bundled_persona_blocks, handle_for, parse_persona_blocks, Persona};
pub use template::Template;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{PolarityMode, StancePhrase, TopicFraming};
use template::{AGENT_PLACEHOLDERS, DECODING_PLACEHOLDERS, READER_PLACEHOLDERS};

const BASE: &str = include_str!("../../resources/prompts/base.txt");
const WORDING: &str = include_str!("../../resources/prompts/wording.txt");
const LOGIC: &str = include_str!("../../resources/prompts/logic.txt");
const NEGATIVITY: &str = include_str!("../../resources/prompts/negativity.txt");

const KNOWN_SECTIONS: &[&str] = &[
    "variant",
    "encoding",
    "encoding.scalar",
    "dynamics",
    "decoding.1",
    "decoding.2",
    "author",
    "reader",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("unknown placeholder {{{0}}}")]
    UnknownPlaceholder(String),
    #[error("no value supplied for placeholder {{{0}}}")]
    MissingValue(String),
    #[error("decoding stage {stage} out of range (prompt set has {count})")]
    StageOutOfRange { stage: usize, count: usize },
    #[error("timeline is empty")]
    EmptyTimeline,
    #[error("persona {0:?} has no facts")]
    EmptyPersona(String),
    #[error("invalid handle {0:?}")]
    BadHandle(String),
    #[error("prompt file: {0}")]
    Format(String),
    #[error("unknown prompt variant {0:?}")]
    UnknownVariant(String),
    #[error("{variant} prompt set needs {expected} decoding templates, found {found}")]
    DecodingCount {
        variant: Variant,
        expected: usize,
        found: usize,
    },
    #[error("prompt set has no scalar encoding template")]
    NoScalarEncoding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Base,
    Wording,
    Logic,
    Newline,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Base, Variant::Wording, Variant::Logic, Variant::Newline];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Wording => "wording",
            Variant::Logic => "logic",
            Variant::Newline => "newline",
        }
    }

    pub fn decoding(self) -> DecodingScheme {
        match self {
            Variant::Base | Variant::Newline => DecodingScheme::TwoStage(PolarityMode::YesNo),
            Variant::Wording => DecodingScheme::TwoStage(PolarityMode::FramingChoice),
            Variant::Logic => DecodingScheme::SingleSigned,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s.trim())
            .ok_or_else(|| PromptError::UnknownVariant(s.to_string()))
    }
}

/// How a decoded opinion is obtained from the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodingScheme {
    /// Polarity question, then a 6-option strength question.
    TwoStage(PolarityMode),
    /// One question over the eleven signed options.
    SingleSigned,
}

impl DecodingScheme {
    pub fn stages(self) -> usize {
        match self {
            DecodingScheme::TwoStage(_) => 2,
            DecodingScheme::SingleSigned => 1,
        }
    }
}

/// One neighbor post shown in a timeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelinePost {
    pub handle: String,
    pub text: String,
}

fn strip_newline_variant(s: &str) -> String {
    s.chars().filter(|&c| c != '\n' && c != '\'').collect()
}

/// Splits a prompt file into `(header, body)` pairs.
pub fn parse_sections(text: &str) -> Result<Vec<(String, String)>, PromptError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut sections: Vec<(String, Vec<&str>)> = Vec::new();
    for line in body.split('\n') {
        let header = line
            .strip_prefix('[')
            .and_then(|l| l.strip_suffix(']'))
            .filter(|name| KNOWN_SECTIONS.contains(name));
        match (header, sections.last_mut()) {
            (Some(name), _) => {
                if sections.iter().any(|(n, _)| n == name) {
                    return Err(PromptError::Format(format!("duplicate section [{name}]")));
                }
                sections.push((name.to_string(), Vec::new()));
            }
            (None, Some((_, lines))) => lines.push(line),
            (None, None) if line.trim().is_empty() => {}
            (None, None) => return Err(PromptError::Format(format!("text before first section: {line:?}"))),
        }
    }
    Ok(sections.into_iter().map(|(n, l)| (n, l.join("\n"))).collect())
}

fn write_sections(sections: &[(&str, &str)]) -> String {
    let mut out = String::new();
    for (name, body) in sections {
        out.push('[');
        out.push_str(name);
        out.push_str("]\n");
        out.push_str(body);
        out.push('\n');
    }
    out
}

/// θ: the encoding, dynamics and decoding templates of one prompt variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    variant: Variant,
    encoding: Template,
    scalar_encoding: Option<Template>,
    dynamics: Template,
    decoding: Vec<Template>,
    /// Newline variant: drop every `\n` and `'` from rendered prompts.
    strip_output: bool,
}

impl PromptSet {
    pub fn new(
        variant: Variant,
        encoding: &str,
        scalar_encoding: Option<&str>,
        dynamics: &str,
        decoding: &[&str],
    ) -> Result<Self, PromptError> {
        let expected = variant.decoding().stages();
        if decoding.len() != expected {
            return Err(PromptError::DecodingCount {
                variant,
                expected,
                found: decoding.len(),
            });
        }
        let strip_output = variant == Variant::Newline;
        let set = Self {
            variant,
            encoding: Template::new(encoding, AGENT_PLACEHOLDERS)?,
            scalar_encoding: scalar_encoding
                .map(|t| Template::new(t, AGENT_PLACEHOLDERS))
                .transpose()?,
            dynamics: Template::new(dynamics, AGENT_PLACEHOLDERS)?,
            decoding: decoding
                .iter()
                .map(|t| Template::new(*t, DECODING_PLACEHOLDERS))
                .collect::<Result<_, _>>()?,
            strip_output,
        };
        Ok(if strip_output { set.stripped() } else { set })
    }

    fn stripped(mut self) -> Self {
        let f = |t: &Template| t.map_text(strip_newline_variant);
        self.encoding = f(&self.encoding);
        self.scalar_encoding = self.scalar_encoding.as_ref().map(f);
        self.dynamics = f(&self.dynamics);
        self.decoding = self.decoding.iter().map(f).collect();
        self.strip_output = true;
        self
    }

    /// The bundled prompt set for a variant.
    pub fn builtin(variant: Variant) -> Self {
        let source = match variant {
            Variant::Base | Variant::Newline => BASE,
            Variant::Wording => WORDING,
            Variant::Logic => LOGIC,
        };
        let set = Self::parse(source).expect("bundled prompt sets parse");
        if variant == Variant::Newline {
            Self { variant, ..set }.stripped()
        } else {
            set
        }
    }

    /// Loads a prompt-set file. Without a `[variant]` section the variant is
    /// inferred from the number of decoding sections (1: logic, 2: base).
    pub fn parse(text: &str) -> Result<Self, PromptError> {
        let sections = parse_sections(text)?;
        let get = |name: &str| sections.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_str());
        let require = |name: &str| get(name).ok_or_else(|| PromptError::Format(format!("missing [{name}]")));
        let decoding: Vec<&str> = ["decoding.1", "decoding.2"].iter().filter_map(|n| get(n)).collect();
        if get("decoding.2").is_some() && get("decoding.1").is_none() {
            return Err(PromptError::Format("[decoding.2] without [decoding.1]".into()));
        }
        let variant = match get("variant") {
            Some(v) => v.parse()?,
            None if decoding.len() == 1 => Variant::Logic,
            None => Variant::Base,
        };
        Self::new(
            variant,
            require("encoding")?,
            get("encoding.scalar"),
            require("dynamics")?,
            &decoding,
        )
    }

    /// Serializes back to the file format; `parse(to_file_string())` yields
    /// an equal set.
    pub fn to_file_string(&self) -> String {
        let mut sections: Vec<(&str, &str)> =
            vec![("variant", self.variant.as_str()), ("encoding", self.encoding.text())];
        if let Some(s) = &self.scalar_encoding {
            sections.push(("encoding.scalar", s.text()));
        }
        sections.push(("dynamics", self.dynamics.text()));
        for (i, t) in self.decoding.iter().enumerate() {
            sections.push((if i == 0 { "decoding.1" } else { "decoding.2" }, t.text()));
        }
        write_sections(&sections)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn decoding_scheme(&self) -> DecodingScheme {
        self.variant.decoding()
    }

    pub fn decoding_templates(&self) -> &[Template] {
        &self.decoding
    }

    pub fn encoding_template(&self) -> &Template {
        &self.encoding
    }

    pub fn dynamics_template(&self) -> &Template {
        &self.dynamics
    }

    fn finish(&self, s: String) -> String {
        if self.strip_output {
            strip_newline_variant(&s)
        } else {
            s
        }
    }

    /// Encoding prompt for a stance; `{opinion}` is the strength word and
    /// `{topic}` the framing of the stance's side.
    pub fn render_encoding(
        &self,
        persona: &Persona,
        stance: StancePhrase,
        framing: &TopicFraming,
    ) -> Result<String, PromptError> {
        self.render_agent_template(
            &self.encoding,
            persona,
            stance.strength_word(),
            framing.framing(stance.side()),
        )
    }

    /// Encoding prompt that hands the model the raw number instead of a phrase.
    pub fn render_scalar_encoding(
        &self,
        persona: &Persona,
        value: f64,
        framing: &TopicFraming,
    ) -> Result<String, PromptError> {
        let template = self.scalar_encoding.as_ref().ok_or(PromptError::NoScalarEncoding)?;
        self.render_agent_template(template, persona, &format!("{value}"), &framing.side_a)
    }

    fn render_agent_template(
        &self,
        template: &Template,
        persona: &Persona,
        opinion: &str,
        topic: &str,
    ) -> Result<String, PromptError> {
        let prefix = persona.prefix();
        let out = template.render(&[
            ("persona", &prefix),
            ("opinion", opinion),
            ("topic", topic),
            ("timeline", ""),
        ])?;
        Ok(self.finish(out))
    }

    /// Dynamics prompt; each post rendered as `@handle: text`, one per line,
    /// in the given order.
    pub fn render_dynamics(&self, persona: &Persona, timeline: &[TimelinePost]) -> Result<String, PromptError> {
        if timeline.is_empty() {
            return Err(PromptError::EmptyTimeline);
        }
        let feed = timeline
            .iter()
            .map(|p| format!("@{}: {}", p.handle, p.text))
            .collect::<Vec<_>>()
            .join("\n");
        let prefix = persona.prefix();
        let out = self.dynamics.render(&[
            ("persona", &prefix),
            ("timeline", &feed),
            ("opinion", ""),
            ("topic", ""),
        ])?;
        Ok(self.finish(out))
    }

    /// Decoding prompt for 1-based `stage`; `{topic}` is side A.
    pub fn render_decoding(&self, stage: usize, text: &str, framing: &TopicFraming) -> Result<String, PromptError> {
        let template = stage
            .checked_sub(1)
            .and_then(|i| self.decoding.get(i))
            .ok_or(PromptError::StageOutOfRange {
                stage,
                count: self.decoding.len(),
            })?;
        let out = template.render(&[("text", text), ("topic", &framing.side_a)])?;
        Ok(self.finish(out))
    }
}

/// Author and reader prompts of the framing experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativityPrompts {
    author: Template,
    reader: Template,
}

impl NegativityPrompts {
    pub fn builtin() -> Self {
        Self::parse(NEGATIVITY).expect("bundled negativity prompts parse")
    }

    pub fn parse(text: &str) -> Result<Self, PromptError> {
        let sections = parse_sections(text)?;
        let get = |name: &str| {
            sections
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, b)| b.clone())
                .ok_or_else(|| PromptError::Format(format!("missing [{name}]")))
        };
        Ok(Self {
            author: Template::new(get("author")?, AGENT_PLACEHOLDERS)?,
            reader: Template::new(get("reader")?, READER_PLACEHOLDERS)?,
        })
    }

    /// Author prompt; `option` is a strength or signed option word and
    /// `framing` the side it applies to.
    pub fn render_author(&self, persona: &Persona, option: &str, framing: &str) -> Result<String, PromptError> {
        let prefix = persona.prefix();
        self.author.render(&[
            ("persona", &prefix),
            ("opinion", option),
            ("topic", framing),
            ("timeline", ""),
        ])
    }

    pub fn render_reader(
        &self,
        persona: &Persona,
        option: &str,
        framing: &str,
        post: &str,
    ) -> Result<String, PromptError> {
        let prefix = persona.prefix();
        self.reader.render(&[
            ("persona", &prefix),
            ("opinion", option),
            ("topic", framing),
            ("text", post),
        ])
    }
}
