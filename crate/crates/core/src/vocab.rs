//! Vocabulary decks: loading, validation, exclusion rules and study-set selection.
//!
//! Deck files are line oriented. Each record is
//! `id|romanized|native|gloss|pos|loanword`; blank lines and lines starting
//! with `#` are ignored. `native` may be empty, `loanword` is `0` or `1`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const FIELD_COUNT: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeckError {
    #[error("empty deck")]
    Empty,
    #[error("line {line}: expected {FIELD_COUNT} fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("deck exhausted by exclusions")]
    ExhaustedByExclusions,
    #[error("study set size {requested} is invalid for a deck of {available} words")]
    StudySetSize { requested: usize, available: usize },
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

/// Stable word identifier. Never contains whitespace or `|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WordId(String);

impl WordId {
    pub fn new(id: impl Into<String>) -> Self {
        WordId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for WordId {
    fn from(s: &str) -> Self {
        WordId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordEntry {
    pub id: WordId,
    pub romanized: String,
    pub native: Option<String>,
    pub gloss: String,
    pub pos: String,
    pub loanword: bool,
}

/// An ordered, validated collection of words. Source order is significant:
/// the scheduler introduces new words in this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deck {
    name: String,
    entries: Vec<WordEntry>,
}

impl Deck {
    /// Builds a deck from already constructed entries, enforcing id rules.
    pub fn from_entries(name: impl Into<String>, entries: Vec<WordEntry>) -> Result<Self, DeckError> {
        if entries.is_empty() {
            return Err(DeckError::Empty);
        }
        let mut seen = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            validate_entry(e, i + 1)?;
            if !seen.insert(e.id.clone()) {
                return Err(DeckError::DuplicateId {
                    line: i + 1,
                    id: e.id.0.clone(),
                });
            }
        }
        Ok(Deck {
            name: name.into(),
            entries,
        })
    }

    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, DeckError> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            if fields.len() != FIELD_COUNT {
                return Err(DeckError::FieldCount {
                    line: line_no,
                    found: fields.len(),
                });
            }
            let loanword = match fields[5] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(DeckError::InvalidRecord {
                        line: line_no,
                        reason: format!("loanword flag must be 0 or 1, got {other:?}"),
                    })
                }
            };
            let entry = WordEntry {
                id: WordId::new(fields[0]),
                romanized: fields[1].to_owned(),
                native: (!fields[2].is_empty()).then(|| fields[2].to_owned()),
                gloss: fields[3].to_owned(),
                pos: fields[4].to_owned(),
                loanword,
            };
            validate_entry(&entry, line_no)?;
            if !seen.insert(entry.id.clone()) {
                return Err(DeckError::DuplicateId {
                    line: line_no,
                    id: entry.id.0,
                });
            }
            entries.push(entry);
        }
        if entries.is_empty() {
            return Err(DeckError::Empty);
        }
        Ok(Deck {
            name: name.into(),
            entries,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DeckError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| DeckError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "deck".to_owned());
        Self::parse(name, &text)
    }

    /// The sample Japanese noun deck shipped with the crate.
    pub fn sample() -> Self {
        Self::parse("japanese-nouns", SAMPLE_DECK).expect("bundled deck is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[WordEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &WordId) -> Option<&WordEntry> {
        self.entries.iter().find(|e| &e.id == id)
    }

    pub fn position(&self, id: &WordId) -> Option<usize> {
        self.entries.iter().position(|e| &e.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &WordId> {
        self.entries.iter().map(|e| &e.id)
    }

    /// Drops loanwords, then drops every entry whose romanized form collides
    /// with another entry's. Order of the survivors is preserved.
    pub fn apply_exclusions(&self) -> Result<Deck, DeckError> {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for e in self.entries.iter().filter(|e| !e.loanword) {
            *counts.entry(e.romanized.as_str()).or_default() += 1;
        }
        let kept: Vec<WordEntry> = self
            .entries
            .iter()
            .filter(|e| !e.loanword && counts[e.romanized.as_str()] == 1)
            .cloned()
            .collect();
        if kept.is_empty() {
            return Err(DeckError::ExhaustedByExclusions);
        }
        Ok(Deck {
            name: self.name.clone(),
            entries: kept,
        })
    }

    /// Seeded pseudo-random `n`-subset, kept in source order.
    pub fn select_study_set(&self, n: usize, seed: u64) -> Result<Deck, DeckError> {
        if n == 0 || n > self.entries.len() {
            return Err(DeckError::StudySetSize {
                requested: n,
                available: self.entries.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = rand::seq::index::sample(&mut rng, self.entries.len(), n).into_vec();
        picked.sort_unstable();
        Ok(Deck {
            name: self.name.clone(),
            entries: picked.into_iter().map(|i| self.entries[i].clone()).collect(),
        })
    }
}

fn validate_entry(e: &WordEntry, line: usize) -> Result<(), DeckError> {
    let bad = |reason: &str| DeckError::InvalidRecord {
        line,
        reason: reason.to_owned(),
    };
    if e.id.0.is_empty() {
        return Err(bad("empty id"));
    }
    if e.id.0.chars().any(|c| c.is_whitespace() || c == '|') {
        return Err(bad("id must not contain whitespace or '|'"));
    }
    if e.romanized.is_empty() {
        return Err(bad("empty romanized form"));
    }
    if e.gloss.is_empty() {
        return Err(bad("empty gloss"));
    }
    if e.pos != "noun" {
        return Err(DeckError::InvalidRecord {
            line,
            reason: format!("only nouns are supported, got pos {:?}", e.pos),
        });
    }
    Ok(())
}

pub const SAMPLE_DECK: &str = include_str!("../data/japanese_nouns.deck");
