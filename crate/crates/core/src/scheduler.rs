//! Spaced-repetition state and feed word selection.
//!
//! Selection favours variety over urgency: among overdue words the one shown
//! least recently in the feed wins, so a user who scrolls past quizzes
//! without answering still sees a rotation of different words. A new word is
//! introduced only when nothing is overdue.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocab::{Deck, WordId};

/// Seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn plus_secs(self, secs: i64) -> Timestamp {
        Timestamp(self.0 + secs)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const DEFAULT_LADDER_SECS: [i64; 7] = [30, 300, 1_800, 7_200, 43_200, 172_800, 604_800];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("cannot schedule an empty deck")]
    EmptyDeck,
    #[error("ladder must be non-empty, positive and strictly increasing")]
    InvalidLadder,
    #[error("unknown word {0}")]
    UnknownWord(WordId),
    #[error("word {0} has not been introduced")]
    NotIntroduced(WordId),
    #[error("word {word} cannot be introduced now; next new word is {expected:?}")]
    OutOfOrderIntroduction { word: WordId, expected: Option<WordId> },
    #[error("snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
}

/// Strictly increasing review intervals, indexed by box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ladder(Vec<i64>);

impl Ladder {
    pub fn from_secs(secs: Vec<i64>) -> Result<Self, SchedulerError> {
        let valid = !secs.is_empty() && secs[0] > 0 && secs.windows(2).all(|w| w[0] < w[1]);
        if valid {
            Ok(Ladder(secs))
        } else {
            Err(SchedulerError::InvalidLadder)
        }
    }

    pub fn from_durations(durations: &[Duration]) -> Result<Self, SchedulerError> {
        Self::from_secs(durations.iter().map(|d| d.as_secs() as i64).collect())
    }

    pub fn interval(&self, box_index: usize) -> i64 {
        self.0[box_index]
    }

    pub fn max_box(&self) -> usize {
        self.0.len() - 1
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn secs(&self) -> &[i64] {
        &self.0
    }
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder(DEFAULT_LADDER_SECS.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordScheduleState {
    pub word_id: WordId,
    pub introduced: bool,
    #[serde(rename = "box")]
    pub box_index: usize,
    pub due_at: Timestamp,
    pub last_feed_at: Option<Timestamp>,
    pub answers: u32,
    pub correct: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Selection<'a> {
    pub word_id: &'a WordId,
    pub is_new: bool,
}

/// How a word came to be shown in the feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Display {
    /// The first display of a new word (an introduction card).
    Introduction,
    /// Any later display, answered or not.
    Review,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulerState {
    words: Vec<WordScheduleState>,
    index: HashMap<WordId, usize>,
    cursor: usize,
    ladder: Ladder,
}

impl SchedulerState {
    pub fn new(deck: &Deck, ladder: Ladder, now: Timestamp) -> Result<Self, SchedulerError> {
        if deck.is_empty() {
            return Err(SchedulerError::EmptyDeck);
        }
        let words: Vec<WordScheduleState> = deck
            .ids()
            .map(|id| WordScheduleState {
                word_id: id.clone(),
                introduced: false,
                box_index: 0,
                due_at: now,
                last_feed_at: None,
                answers: 0,
                correct: 0,
            })
            .collect();
        Ok(Self::assemble(words, 0, ladder))
    }

    fn assemble(words: Vec<WordScheduleState>, cursor: usize, ladder: Ladder) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.word_id.clone(), i))
            .collect();
        SchedulerState {
            words,
            index,
            cursor,
            ladder,
        }
    }

    pub fn ladder(&self) -> &Ladder {
        &self.ladder
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn words(&self) -> &[WordScheduleState] {
        &self.words
    }

    pub fn word(&self, id: &WordId) -> Option<&WordScheduleState> {
        self.index.get(id).map(|&i| &self.words[i])
    }

    /// The next word to introduce, if any remain.
    pub fn next_new_word(&self) -> Option<&WordId> {
        self.words.get(self.cursor).map(|w| &w.word_id)
    }

    pub fn is_overdue(&self, id: &WordId, now: Timestamp) -> bool {
        self.word(id).is_some_and(|w| w.introduced && w.due_at <= now)
    }

    /// Picks the word to show at `now`. Pure: does not advance the cursor.
    pub fn next_word(&self, now: Timestamp) -> Selection<'_> {
        self.select(now, None)
            .expect("a non-empty deck always yields a selection")
    }

    /// Like [`next_word`](Self::next_word) but never returns `exclude`.
    /// `None` only when `exclude` is the sole word.
    pub fn next_word_excluding(&self, now: Timestamp, exclude: &WordId) -> Option<Selection<'_>> {
        self.select(now, Some(exclude))
    }

    fn select(&self, now: Timestamp, exclude: Option<&WordId>) -> Option<Selection<'_>> {
        let eligible = |w: &&WordScheduleState| w.introduced && Some(&w.word_id) != exclude;

        let overdue = self
            .words
            .iter()
            .enumerate()
            .filter(|(_, w)| eligible(w) && w.due_at <= now)
            .min_by_key(|(i, w)| (w.last_feed_at, *i));
        if let Some((_, w)) = overdue {
            return Some(Selection {
                word_id: &w.word_id,
                is_new: false,
            });
        }

        if let Some(w) = self.words.get(self.cursor) {
            if Some(&w.word_id) != exclude {
                return Some(Selection {
                    word_id: &w.word_id,
                    is_new: true,
                });
            }
        }

        self.words
            .iter()
            .enumerate()
            .filter(|(_, w)| eligible(w))
            .min_by_key(|(i, w)| (w.due_at, w.last_feed_at, *i))
            .map(|(_, w)| Selection {
                word_id: &w.word_id,
                is_new: false,
            })
    }

    fn slot(&self, id: &WordId) -> Result<usize, SchedulerError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| SchedulerError::UnknownWord(id.clone()))
    }

    /// Records that `id` appeared in the feed. Never touches box or due time.
    pub fn record_impression(&mut self, id: &WordId, now: Timestamp, display: Display) -> Result<(), SchedulerError> {
        let i = self.slot(id)?;
        match display {
            Display::Introduction => {
                if i != self.cursor {
                    return Err(SchedulerError::OutOfOrderIntroduction {
                        word: id.clone(),
                        expected: self.next_new_word().cloned(),
                    });
                }
                self.words[i].introduced = true;
                self.cursor += 1;
            }
            Display::Review if !self.words[i].introduced => {
                return Err(SchedulerError::NotIntroduced(id.clone()));
            }
            Display::Review => {}
        }
        self.words[i].last_feed_at = Some(now);
        Ok(())
    }

    pub fn record_answer(&mut self, id: &WordId, correct: bool, now: Timestamp) -> Result<(), SchedulerError> {
        let i = self.slot(id)?;
        let max_box = self.ladder.max_box();
        let w = &mut self.words[i];
        if !w.introduced {
            return Err(SchedulerError::NotIntroduced(id.clone()));
        }
        w.answers += 1;
        if correct {
            w.correct += 1;
            w.box_index = (w.box_index + 1).min(max_box);
        } else {
            w.box_index = 0;
        }
        w.due_at = now.plus_secs(self.ladder.interval(w.box_index));
        w.last_feed_at = Some(now);
        Ok(())
    }

    /// Versioned line-oriented text; see `docs/FORMATS.md`.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        out.push_str("edvert-scheduler 1\n");
        let ladder: Vec<String> = self.ladder.secs().iter().map(i64::to_string).collect();
        let _ = writeln!(out, "ladder {}", ladder.join(","));
        let _ = writeln!(out, "cursor {}", self.cursor);
        let _ = writeln!(out, "words {}", self.words.len());
        for w in &self.words {
            let last = w.last_feed_at.map_or_else(|| "-".to_owned(), |t| t.to_string());
            let _ = writeln!(
                out,
                "w {} {} {} {} {} {} {}",
                w.word_id,
                u8::from(w.introduced),
                w.box_index,
                w.due_at,
                last,
                w.answers,
                w.correct
            );
        }
        out.push_str("end\n");
        out
    }

    pub fn restore(text: &str) -> Result<Self, SchedulerError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| SchedulerError::Snapshot {
                line: 0,
                reason: format!("truncated: missing {what}"),
            })
        };
        let err = |line: usize, reason: &str| SchedulerError::Snapshot {
            line,
            reason: reason.to_owned(),
        };

        let (n, header) = next("header")?;
        if header != "edvert-scheduler 1" {
            return Err(err(n, "unsupported header"));
        }
        let (n, ladder_line) = next("ladder")?;
        let ladder_secs = ladder_line
            .strip_prefix("ladder ")
            .ok_or_else(|| err(n, "expected ladder"))?
            .split(',')
            .map(str::parse::<i64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| err(n, "bad ladder value"))?;
        let ladder = Ladder::from_secs(ladder_secs).map_err(|_| err(n, "invalid ladder"))?;
        let (n, cursor_line) = next("cursor")?;
        let cursor: usize = field(cursor_line, "cursor").ok_or_else(|| err(n, "expected cursor"))?;
        let (n, count_line) = next("words")?;
        let count: usize = field(count_line, "words").ok_or_else(|| err(n, "expected word count"))?;
        if count == 0 {
            return Err(err(n, "empty word list"));
        }

        let mut words = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = next("word record")?;
            words.push(parse_word(line, &ladder).ok_or_else(|| err(n, "malformed word record"))?);
        }
        let (n, end) = next("end marker")?;
        if end != "end" {
            return Err(err(n, "expected end marker"));
        }

        if cursor > words.len() {
            return Err(err(0, "cursor beyond deck"));
        }
        let consistent = words.iter().enumerate().all(|(i, w)| w.introduced == (i < cursor));
        if !consistent {
            return Err(err(0, "introduced flags disagree with cursor"));
        }
        let state = Self::assemble(words, cursor, ladder);
        if state.index.len() != state.words.len() {
            return Err(err(0, "duplicate word id"));
        }
        Ok(state)
    }
}

fn field<T: std::str::FromStr>(line: &str, key: &str) -> Option<T> {
    line.strip_prefix(key)?.strip_prefix(' ')?.parse().ok()
}

fn parse_word(line: &str, ladder: &Ladder) -> Option<WordScheduleState> {
    let parts: Vec<&str> = line.split(' ').collect();
    if parts.len() != 8 || parts[0] != "w" || parts[1].is_empty() {
        return None;
    }
    let introduced = match parts[2] {
        "0" => false,
        "1" => true,
        _ => return None,
    };
    let box_index: usize = parts[3].parse().ok()?;
    let due_at = Timestamp(parts[4].parse().ok()?);
    let last_feed_at = match parts[5] {
        "-" => None,
        t => Some(Timestamp(t.parse().ok()?)),
    };
    let answers: u32 = parts[6].parse().ok()?;
    let correct: u32 = parts[7].parse().ok()?;
    let valid = box_index < ladder.len()
        && correct <= answers
        && (introduced || (answers == 0 && last_feed_at.is_none()));
    valid.then(|| WordScheduleState {
        word_id: WordId::new(parts[1]),
        introduced,
        box_index,
        due_at,
        last_feed_at,
        answers,
        correct,
    })
}
