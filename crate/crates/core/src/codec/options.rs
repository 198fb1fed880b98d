use std::sync::OnceLock;

use super::CodecError;

const BUNDLED: &str = include_str!("../../resources/options.txt");

/// Which canonical option list a question offers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionList {
    /// Neutral plus five strengths of support, valued 0..=5.
    Strength,
    /// The eleven signed options, -5..=5.
    Signed,
    /// Five-point reaction scale, -2..=2.
    Reaction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptionTable {
    version: u32,
    strength: Vec<(i8, String)>,
    signed: Vec<(i8, String)>,
    reaction: Vec<(i8, String)>,
}

impl OptionTable {
    pub fn parse(text: &str) -> Result<Self, CodecError> {
        let mut version = None;
        let mut section: Option<OptionList> = None;
        let mut table = Self {
            version: 0,
            strength: Vec::new(),
            signed: Vec::new(),
            reaction: Vec::new(),
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || CodecError::OptionResource(format!("line {}: {raw:?}", lineno + 1));
            if let Some(v) = line.strip_prefix("version ") {
                version = Some(v.trim().parse().map_err(|_| bad())?);
            } else if line.starts_with('[') {
                section = Some(match line {
                    "[strength]" => OptionList::Strength,
                    "[signed]" => OptionList::Signed,
                    "[reaction]" => OptionList::Reaction,
                    _ => return Err(bad()),
                });
            } else {
                let (value, phrase) = line.split_once(' ').ok_or_else(bad)?;
                let value: i8 = value.parse().map_err(|_| bad())?;
                let entry = (value, phrase.trim().to_string());
                match section.ok_or_else(bad)? {
                    OptionList::Strength => table.strength.push(entry),
                    OptionList::Signed => table.signed.push(entry),
                    OptionList::Reaction => table.reaction.push(entry),
                }
            }
        }
        table.version = version.ok_or_else(|| CodecError::OptionResource("missing version line".into()))?;
        Ok(table)
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn list(&self, which: OptionList) -> &[(i8, String)] {
        match which {
            OptionList::Strength => &self.strength,
            OptionList::Signed => &self.signed,
            OptionList::Reaction => &self.reaction,
        }
    }

    pub fn phrase(&self, which: OptionList, value: i8) -> Option<&str> {
        self.list(which)
            .iter()
            .find(|(v, _)| *v == value)
            .map(|(_, p)| p.as_str())
    }
}

/// The option table shipped with the crate.
pub fn options() -> &'static OptionTable {
    static TABLE: OnceLock<OptionTable> = OnceLock::new();
    TABLE.get_or_init(|| OptionTable::parse(BUNDLED).expect("bundled option table parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_shape() {
        let t = options();
        assert_eq!(t.version(), 1);
        assert_eq!(t.list(OptionList::Strength).len(), 6);
        assert_eq!(t.list(OptionList::Signed).len(), 11);
        assert_eq!(t.list(OptionList::Reaction).len(), 5);
        assert_eq!(t.phrase(OptionList::Strength, 5), Some("strongly supportive of"));
        assert_eq!(t.phrase(OptionList::Signed, -5), Some("strongly opposed to"));
        assert_eq!(t.phrase(OptionList::Reaction, -2), Some("strong disagree"));
        // the signed list's non-negative half is the strength list
        let pos: Vec<_> = t
            .list(OptionList::Signed)
            .iter()
            .filter(|(v, _)| *v >= 0)
            .cloned()
            .collect();
        assert_eq!(pos, t.list(OptionList::Strength));
    }

    #[test]
    fn malformed_resource_rejected() {
        assert!(OptionTable::parse("[strength]\n0 x\n").is_err());
        assert!(OptionTable::parse("version 1\n0 orphan\n").is_err());
        assert!(OptionTable::parse("version 1\n[bogus]\n").is_err());
    }
}
