use serde::{Deserialize, Serialize};

use super::{options, OptionList, TopicFraming};

/// How strictly answers must match the canonical options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseMode {
    /// Find the option anywhere in the reply (longest match wins).
    #[default]
    Lenient,
    /// The whole normalized reply must equal an option.
    Strict,
}

/// Shape of the polarity question that was asked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarityMode {
    /// "do they support <side A>? Reply with 'yes' or 'no'"
    YesNo,
    /// "reply with '<side B>' or '<side A>'"
    FramingChoice,
}

/// A recognized strength answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrengthMatch {
    /// 0..=5 for the strength list; -5..=5 for the signed list.
    pub value: i8,
    /// Set when a strength question was answered with a negative option
    /// ("clearly against", ...) instead of one of the offered six.
    pub explicit_negative: bool,
}

/// Lowercases, turns every non-alphanumeric character into a space and
/// collapses runs of whitespace. Apostrophes are dropped rather than spaced so
/// "don't" and "dont" agree.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if matches!(c, '\'' | '\u{2019}' | '\u{2018}') {
            continue;
        }
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(c.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

/// Byte offsets of whole-word occurrences of `needle` in `hay`; both must
/// already be normalized.
fn word_matches(hay: &str, needle: &str) -> Vec<usize> {
    if needle.is_empty() {
        return Vec::new();
    }
    let bytes = hay.as_bytes();
    hay.match_indices(needle)
        .map(|(i, _)| i)
        .filter(|&i| {
            let before = i == 0 || bytes[i - 1] == b' ';
            let end = i + needle.len();
            let after = end == bytes.len() || bytes[end] == b' ';
            before && after
        })
        .collect()
}

/// Longest option (ties: earliest) among `candidates` present in `text`.
fn longest_match<'a>(text: &str, candidates: impl Iterator<Item = (i8, &'a str)>) -> Option<i8> {
    let mut best: Option<(usize, usize, i8)> = None;
    for (value, phrase) in candidates {
        let needle = normalize(phrase);
        if let Some(&pos) = word_matches(text, &needle).first() {
            let better = match best {
                None => true,
                Some((len, bpos, _)) => needle.len() > len || (needle.len() == len && pos < bpos),
            };
            if better {
                best = Some((needle.len(), pos, value));
            }
        }
    }
    best.map(|(_, _, v)| v)
}

/// Sign of a polarity answer: `Some(1)` for side A, `Some(-1)` for side B,
/// `Some(0)` for an explicitly neutral answer, `None` when unparseable.
pub fn parse_polarity(text: &str, mode: PolarityMode, framing: &TopicFraming, parse_mode: ParseMode) -> Option<i8> {
    let norm = normalize(text);
    let (pos, neg) = match mode {
        PolarityMode::YesNo => ("yes".to_string(), "no".to_string()),
        PolarityMode::FramingChoice => (normalize(&framing.side_a), normalize(&framing.side_b)),
    };
    let neutral = "neutral";
    match parse_mode {
        ParseMode::Strict => {
            if norm == pos {
                Some(1)
            } else if norm == neg {
                Some(-1)
            } else if norm == neutral {
                Some(0)
            } else {
                None
            }
        }
        ParseMode::Lenient => {
            let has_pos = !word_matches(&norm, &pos).is_empty();
            let has_neg = !word_matches(&norm, &neg).is_empty();
            match (has_pos, has_neg) {
                (true, false) => Some(1),
                (false, true) => Some(-1),
                (false, false) if !word_matches(&norm, neutral).is_empty() => Some(0),
                _ => None,
            }
        }
    }
}

/// Strength (or signed strength) named in the reply.
///
/// With [`OptionList::Strength`] in lenient mode the negative options of the
/// signed list are recognized too and flagged as `explicit_negative`.
pub fn parse_strength(text: &str, list: OptionList, parse_mode: ParseMode) -> Option<StrengthMatch> {
    let table = options();
    let norm = normalize(text);
    let searched = match (list, parse_mode) {
        (OptionList::Strength, ParseMode::Lenient) => OptionList::Signed,
        (other, _) => other,
    };
    let candidates = table.list(searched).iter().map(|(v, p)| (*v, p.as_str()));
    let value = match parse_mode {
        ParseMode::Lenient => longest_match(&norm, candidates)?,
        ParseMode::Strict => candidates.into_iter().find(|(_, p)| normalize(p) == norm)?.0,
    };
    Some(StrengthMatch {
        value,
        explicit_negative: list == OptionList::Strength && value < 0,
    })
}

/// Reaction-scale answer in `[-2, 2]`.
pub fn parse_reaction(text: &str, parse_mode: ParseMode) -> Option<i8> {
    let norm = normalize(text);
    let list = options().list(OptionList::Reaction);
    match parse_mode {
        ParseMode::Lenient => longest_match(&norm, list.iter().map(|(v, p)| (*v, p.as_str()))),
        ParseMode::Strict => list.iter().find(|(_, p)| normalize(p) == norm).map(|(v, _)| *v),
    }
}

/// Every "option + framing" stance in `text`, as signed values on `[-5, 5]`
/// in order of appearance. "clearly against planned economy" reads as +4.
pub fn extract_stances(text: &str, framing: &TopicFraming) -> Vec<i8> {
    let norm = normalize(text);
    let sides = [(normalize(&framing.side_a), 1i8), (normalize(&framing.side_b), -1i8)];
    let mut found: Vec<(usize, usize, i8)> = Vec::new();
    for (value, phrase) in options().list(OptionList::Signed) {
        for (side, sign) in &sides {
            let needle = format!("{} {}", normalize(phrase), side);
            for pos in word_matches(&norm, &needle) {
                found.push((pos, needle.len(), value * sign));
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut out = Vec::new();
    let mut covered_to = 0usize;
    for (pos, len, v) in found {
        if pos >= covered_to || out.is_empty() {
            out.push(v);
            covered_to = pos + len;
        }
    }
    out
}
