use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::PromptError;

const BUNDLED: &str = include_str!("../../resources/personas.txt");

const HANDLE_NAMES: &[&str] = &[
    "rowan", "jakob", "mallory", "abril", "casey", "devon", "emery", "finley", "harper", "indigo", "jules", "kai",
    "linden", "marlow", "nico", "oakley", "parker", "quinn", "reese", "sage", "tatum", "umber", "vale", "wren", "xavi",
    "yael", "zion", "avery", "blake", "cyrus", "dara", "eden", "fallon", "gale", "hollis", "ira", "jessa", "kit",
    "lior", "milo", "noor", "orin", "perrin", "remy", "sloane", "teagan", "uma", "vesper",
];

/// Handle for agent `index`: names in a fixed order, with a numeric suffix
/// once the list wraps around.
pub fn handle_for(index: usize) -> String {
    let name = HANDLE_NAMES[index % HANDLE_NAMES.len()];
    match index / HANDLE_NAMES.len() {
        0 => name.to_string(),
        round => format!("{name}{}", round + 1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    handle: String,
    facts: Vec<String>,
}

impl Persona {
    pub fn new(handle: impl Into<String>, facts: Vec<String>) -> Result<Self, PromptError> {
        let handle = handle.into();
        if facts.is_empty() || facts.iter().any(|f| f.trim().is_empty()) {
            return Err(PromptError::EmptyPersona(handle));
        }
        if handle.is_empty() || handle.chars().any(|c| c.is_uppercase() || c.is_whitespace()) {
            return Err(PromptError::BadHandle(handle));
        }
        Ok(Self { handle, facts })
    }

    pub fn handle(&self) -> &str {
        &self.handle
    }

    pub fn facts(&self) -> &[String] {
        &self.facts
    }

    /// Facts joined by newlines, the text that prefixes every prompt.
    pub fn prefix(&self) -> String {
        self.facts.join("\n")
    }

    pub fn with_fact(&self, fact: impl Into<String>) -> Self {
        let mut p = self.clone();
        p.facts.push(fact.into());
        p
    }
}

/// Fact blocks separated by blank lines, one fact per line.
pub fn parse_persona_blocks(text: &str) -> Vec<Vec<String>> {
    let mut blocks = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
        } else {
            current.push(line.to_string());
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    blocks
}

/// The 100 fact blocks shipped with the crate.
pub fn bundled_persona_blocks() -> &'static [Vec<String>] {
    static BLOCKS: OnceLock<Vec<Vec<String>>> = OnceLock::new();
    BLOCKS.get_or_init(|| parse_persona_blocks(BUNDLED))
}

/// Personas for agents `0..n`: agent `i` gets block `i mod len` and
/// [`handle_for`]`(i)`.
pub fn assign_personas(blocks: &[Vec<String>], n: usize) -> Result<Vec<Persona>, PromptError> {
    if blocks.is_empty() {
        return Err(PromptError::EmptyPersona("<pool>".into()));
    }
    (0..n)
        .map(|i| Persona::new(handle_for(i), blocks[i % blocks.len()].clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_pool_has_100_personas() {
        let blocks = bundled_persona_blocks();
        assert_eq!(blocks.len(), 100);
        assert_eq!(blocks[0][0], "You like to remodel homes.");
        assert!(blocks.iter().all(|b| !b.is_empty()));
    }

    #[test]
    fn handles_are_unique_and_lowercase() {
        let handles: std::collections::HashSet<_> = (0..500).map(handle_for).collect();
        assert_eq!(handles.len(), 500);
        assert_eq!(handle_for(0), "rowan");
        assert_eq!(handle_for(3), "abril");
        assert!(handles.iter().all(|h| h.chars().all(|c| !c.is_uppercase())));
    }

    #[test]
    fn block_parsing() {
        let blocks = parse_persona_blocks("a\nb\n\n\nc\n");
        assert_eq!(blocks, vec![vec!["a".to_string(), "b".into()], vec!["c".into()]]);
    }

    #[test]
    fn empty_persona_rejected() {
        assert!(Persona::new("x", vec![]).is_err());
        assert!(Persona::new("Bad Handle", vec!["fact".into()]).is_err());
        assert!(assign_personas(&[], 3).is_err());
    }
}
