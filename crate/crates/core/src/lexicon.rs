//! Badword and illegal-character lexicon for the layer-1 ratio features.
//!
//! File format: `{"version": str, "badwords": [str...], "illegal_chars": str}`.
//! A versioned default covering SQL, script, shell and traversal tokens is
//! compiled in; deployments may load their own.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("lexicon has no badwords")]
    EmptyBadwords,
    #[error("lexicon contains an empty badword")]
    EmptyBadword,
    #[error("illegal character set contains alphanumeric {0:?}")]
    AlphanumericIllegal(char),
}

#[derive(Serialize, Deserialize)]
struct LexiconFile {
    version: String,
    badwords: Vec<String>,
    illegal_chars: String,
}

/// Immutable, validated lexicon. Badwords are stored lowercased and deduped;
/// the illegal set holds only non-alphanumeric characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    version: String,
    badwords: Vec<String>,
    illegal_chars: BTreeSet<char>,
}

impl Lexicon {
    pub fn new(
        version: impl Into<String>,
        badwords: impl IntoIterator<Item = impl Into<String>>,
        illegal_chars: impl IntoIterator<Item = char>,
    ) -> Result<Self, LexiconError> {
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::new();
        for word in badwords {
            let word = word.into().to_lowercase();
            if word.is_empty() {
                return Err(LexiconError::EmptyBadword);
            }
            if seen.insert(word.clone()) {
                normalized.push(word);
            }
        }
        if normalized.is_empty() {
            return Err(LexiconError::EmptyBadwords);
        }
        let illegal: BTreeSet<char> = illegal_chars.into_iter().collect();
        if let Some(&c) = illegal.iter().find(|c| c.is_ascii_alphanumeric()) {
            return Err(LexiconError::AlphanumericIllegal(c));
        }
        Ok(Lexicon {
            version: version.into(),
            badwords: normalized,
            illegal_chars: illegal,
        })
    }

    pub fn from_json(json: &str) -> Result<Self, LexiconError> {
        let file: LexiconFile = serde_json::from_str(json)?;
        Lexicon::new(file.version, file.badwords, file.illegal_chars.chars())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Lexicon::from_json(&json)
    }

    /// The compiled-in default lexicon.
    pub fn builtin() -> &'static Lexicon {
        static BUILTIN: OnceLock<Lexicon> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Lexicon::from_json(include_str!("../data/lexicon.json"))
                .expect("builtin lexicon is valid")
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn badwords(&self) -> &[String] {
        &self.badwords
    }

    pub fn is_illegal(&self, c: char) -> bool {
        self.illegal_chars.contains(&c)
    }

    pub fn illegal_chars(&self) -> impl Iterator<Item = char> + '_ {
        self.illegal_chars.iter().copied()
    }
}

impl Serialize for Lexicon {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        LexiconFile {
            version: self.version.clone(),
            badwords: self.badwords.clone(),
            illegal_chars: self.illegal_chars.iter().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Lexicon {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = LexiconFile::deserialize(deserializer)?;
        Lexicon::new(file.version, file.badwords, file.illegal_chars.chars())
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_loads_and_covers_attack_families() {
        let lex = Lexicon::builtin();
        for word in ["select", "union", "script", "alert", "cat", "passwd", ".."] {
            assert!(lex.badwords().contains(&word.to_string()), "missing {word}");
        }
        for c in ['\'', '"', '<', '>', ';', '|', '%'] {
            assert!(lex.is_illegal(c), "{c} should be illegal");
        }
        for c in [' ', '=', '&', '?', '/', ':', '.', '-', '_'] {
            assert!(!lex.is_illegal(c), "{c} should be a legal special");
        }
    }

    #[test]
    fn rejects_empty_badwords() {
        assert!(matches!(
            Lexicon::new("v", Vec::<String>::new(), []),
            Err(LexiconError::EmptyBadwords)
        ));
        assert!(matches!(
            Lexicon::new("v", ["ok", ""], []),
            Err(LexiconError::EmptyBadword)
        ));
    }

    #[test]
    fn rejects_alphanumeric_illegal_chars() {
        assert!(matches!(
            Lexicon::new("v", ["x"], ['a']),
            Err(LexiconError::AlphanumericIllegal('a'))
        ));
    }

    #[test]
    fn normalizes_and_dedupes_badwords() {
        let lex = Lexicon::new("v", ["SELECT", "select", "Union"], []).unwrap();
        assert_eq!(lex.badwords(), ["select", "union"]);
    }

    #[test]
    fn json_round_trip() {
        let lex = Lexicon::builtin().clone();
        let json = serde_json::to_string(&lex).unwrap();
        let back: Lexicon = serde_json::from_str(&json).unwrap();
        assert_eq!(lex, back);
    }
}
