//! Engagement events, the append-only log, study sessions and metrics.

mod format;
mod metrics;
mod sessions;

use std::collections::HashMap;
use std::fmt;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::placement::Condition;
use crate::quizgen::QuizId;
use crate::vocab::WordId;

pub use format::{parse_log, ParseError};
pub use metrics::{compute_metrics, Metrics, LEARNED_BOX};
pub use sessions::{sessionize, Session, SessionTrigger, DEFAULT_SESSION_TIMEOUT_SECS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("event for {user} at {ts} precedes that user's previous event at {last}")]
    TimestampRegression { user: UserId, ts: String, last: String },
    #[error("{user} references quiz {quiz_id} that was never issued")]
    UnknownQuiz { user: UserId, quiz_id: QuizId },
    #[error("{user} answered quiz {quiz_id} with word {got}, but it was issued for {expected}")]
    WordMismatch {
        user: UserId,
        quiz_id: QuizId,
        expected: WordId,
        got: WordId,
    },
    #[error("{user} reissued quiz id {quiz_id}")]
    DuplicateQuiz { user: UserId, quiz_id: QuizId },
    #[error("malformed event: {0}")]
    Malformed(String),
    #[error("events for {0} are not in time order")]
    Unordered(UserId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(String);

impl UserId {
    /// User ids are non-empty and free of whitespace.
    pub fn new(id: impl Into<String>) -> Result<Self, AnalyticsError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(AnalyticsError::Malformed(format!("invalid user id {id:?}")));
        }
        Ok(UserId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    /// Study-condition assignment; first event of every user.
    Enroll { condition: Condition },
    /// A quiz was displayed. Issues `quiz_id`.
    Impression { quiz_id: QuizId, word_id: WordId },
    /// An introduction card was displayed.
    IntroShown { word_id: WordId },
    Engage { quiz_id: QuizId },
    Answer {
        quiz_id: QuizId,
        word_id: WordId,
        chosen_index: usize,
        correct: bool,
    },
    LinkClick,
    FeedRender { items: usize },
}

impl EventKind {
    /// Events that can open or extend a study session.
    pub fn is_engagement(&self) -> bool {
        matches!(
            self,
            EventKind::Engage { .. } | EventKind::Answer { .. } | EventKind::LinkClick
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub ts: DateTime<FixedOffset>,
    pub user: UserId,
    pub kind: EventKind,
}

impl Event {
    pub fn new(ts: DateTime<FixedOffset>, user: UserId, kind: EventKind) -> Self {
        Event { ts, user, kind }
    }
}

/// Append-only, validated event log. Per-user timestamps never decrease and
/// every quiz reference points at an earlier impression for the same user.
#[derive(Debug, Clone, Default)]
pub struct EventLog {
    events: Vec<Event>,
    last_ts: HashMap<UserId, DateTime<FixedOffset>>,
    issued: HashMap<(UserId, QuizId), WordId>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_events(events: impl IntoIterator<Item = Event>) -> Result<Self, AnalyticsError> {
        let mut log = Self::new();
        for e in events {
            log.append(e)?;
        }
        Ok(log)
    }

    /// Checks that `event` could be appended without changing the log.
    pub fn validate(&self, event: &Event) -> Result<(), AnalyticsError> {
        if let Some(last) = self.last_ts.get(&event.user) {
            if event.ts < *last {
                return Err(AnalyticsError::TimestampRegression {
                    user: event.user.clone(),
                    ts: event.ts.to_rfc3339(),
                    last: last.to_rfc3339(),
                });
            }
        }
        let key = |q: &QuizId| (event.user.clone(), q.clone());
        match &event.kind {
            EventKind::Impression { quiz_id, .. } if self.issued.contains_key(&key(quiz_id)) => {
                Err(AnalyticsError::DuplicateQuiz {
                    user: event.user.clone(),
                    quiz_id: quiz_id.clone(),
                })
            }
            EventKind::Engage { quiz_id } if !self.issued.contains_key(&key(quiz_id)) => {
                Err(AnalyticsError::UnknownQuiz {
                    user: event.user.clone(),
                    quiz_id: quiz_id.clone(),
                })
            }
            EventKind::Answer { quiz_id, word_id, .. } => match self.issued.get(&key(quiz_id)) {
                None => Err(AnalyticsError::UnknownQuiz {
                    user: event.user.clone(),
                    quiz_id: quiz_id.clone(),
                }),
                Some(w) if w != word_id => Err(AnalyticsError::WordMismatch {
                    user: event.user.clone(),
                    quiz_id: quiz_id.clone(),
                    expected: w.clone(),
                    got: word_id.clone(),
                }),
                Some(_) => Ok(()),
            },
            _ => Ok(()),
        }
    }

    pub fn append(&mut self, event: Event) -> Result<(), AnalyticsError> {
        self.validate(&event)?;
        if let EventKind::Impression { quiz_id, word_id } = &event.kind {
            self.issued
                .insert((event.user.clone(), quiz_id.clone()), word_id.clone());
        }
        self.last_ts.insert(event.user.clone(), event.ts);
        self.events.push(event);
        Ok(())
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last_ts(&self, user: &UserId) -> Option<DateTime<FixedOffset>> {
        self.last_ts.get(user).copied()
    }

    pub fn user_events<'a>(&'a self, user: &'a UserId) -> impl Iterator<Item = &'a Event> + 'a {
        self.events.iter().filter(move |e| &e.user == user)
    }
}
