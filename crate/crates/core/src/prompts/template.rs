use super::PromptError;

/// Placeholder names a template may use, by role.
pub(crate) const AGENT_PLACEHOLDERS: &[&str] = &["persona", "opinion", "topic", "timeline"];
pub(crate) const DECODING_PLACEHOLDERS: &[&str] = &["text", "topic"];
pub(crate) const READER_PLACEHOLDERS: &[&str] = &["persona", "opinion", "topic", "text"];

/// Template text with `{name}` placeholders. Braces that do not enclose a
/// lowercase identifier are literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    text: String,
}

/// One lexical piece of a template.
enum Piece<'a> {
    Literal(&'a str),
    Slot(&'a str),
}

fn pieces(text: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let name_len = after
            .bytes()
            .take_while(|b| b.is_ascii_lowercase() || *b == b'_')
            .count();
        if name_len > 0 && after.as_bytes().get(name_len) == Some(&b'}') {
            if open > 0 {
                out.push(Piece::Literal(&rest[..open]));
            }
            out.push(Piece::Slot(&after[..name_len]));
            rest = &after[name_len + 1..];
        } else {
            out.push(Piece::Literal(&rest[..open + 1]));
            rest = after;
        }
    }
    if !rest.is_empty() {
        out.push(Piece::Literal(rest));
    }
    out
}

impl Template {
    /// Wraps `text`, rejecting placeholders outside `allowed`.
    pub fn new(text: impl Into<String>, allowed: &[&str]) -> Result<Self, PromptError> {
        let t = Self { text: text.into() };
        for name in t.placeholders() {
            if !allowed.contains(&name) {
                return Err(PromptError::UnknownPlaceholder(name.to_string()));
            }
        }
        Ok(t)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn placeholders(&self) -> Vec<&str> {
        pieces(&self.text)
            .into_iter()
            .filter_map(|p| match p {
                Piece::Slot(name) => Some(name),
                Piece::Literal(_) => None,
            })
            .collect()
    }

    /// Single-pass substitution; substituted values are never re-scanned.
    pub fn render(&self, values: &[(&str, &str)]) -> Result<String, PromptError> {
        let mut out = String::with_capacity(self.text.len() + 256);
        for piece in pieces(&self.text) {
            match piece {
                Piece::Literal(s) => out.push_str(s),
                Piece::Slot(name) => {
                    let (_, v) = values
                        .iter()
                        .find(|(k, _)| *k == name)
                        .ok_or_else(|| PromptError::MissingValue(name.to_string()))?;
                    out.push_str(v);
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn map_text(&self, f: impl Fn(&str) -> String) -> Self {
        Self { text: f(&self.text) }
    }
}
