//! Event-sourced study state for all users.
//!
//! Every mutation is an [`Event`]. Commands first build the event from the
//! current state (`prepare_*`), then [`Engine::apply`] folds it in. Replaying
//! a log through `apply` rebuilds the exact same state, which is what crash
//! recovery relies on.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use chrono::{DateTime, FixedOffset, TimeDelta};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analytics::{compute_metrics, AnalyticsError, Event, EventKind, EventLog, Metrics, UserId};
use crate::placement::{plan_feed, Condition, FeedPlan, PlacementError, DEFAULT_RATE};
use crate::quizgen::{
    make_intro_card, make_quiz, AnswerResult, Direction, IntroCard, Quiz, QuizError, QuizId, DEFAULT_OPTION_COUNT,
};
use crate::scheduler::{Display, Ladder, SchedulerError, SchedulerState, Timestamp};
use crate::vocab::{Deck, WordId};

/// Open quizzes kept per user; older unanswered ones expire.
pub const MAX_OPEN_QUIZZES: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("user {0} already exists")]
    UserExists(UserId),
    #[error("user {user} is in the {actual} condition")]
    WrongCondition { user: UserId, actual: Condition },
    #[error("quiz {0} was never issued")]
    UnknownQuiz(QuizId),
    #[error("quiz {0} is already resolved or expired")]
    QuizClosed(QuizId),
    #[error("event disagrees with engine state: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Quiz(#[from] QuizError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error("snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
}

/// Static study configuration shared by every user.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub study_set: Deck,
    pub ladder: Ladder,
    pub options: usize,
    pub rate: usize,
    pub session_timeout: TimeDelta,
    pub link_url: String,
    pub seed: u64,
}

impl EngineConfig {
    pub fn new(study_set: Deck) -> Self {
        EngineConfig {
            study_set,
            ladder: Ladder::default(),
            options: DEFAULT_OPTION_COUNT,
            rate: DEFAULT_RATE,
            session_timeout: TimeDelta::seconds(crate::analytics::DEFAULT_SESSION_TIMEOUT_SECS),
            link_url: "http://127.0.0.1:8080/site".to_owned(),
            seed: 0,
        }
    }

    /// The bundled deck after exclusions, trimmed to a 50-word study set.
    pub fn sample() -> Self {
        let clean = Deck::sample().apply_exclusions().expect("bundled deck survives exclusions");
        Self::new(clean.select_study_set(50, 0).expect("bundled deck has 50 words"))
    }

    fn quiz_seed(&self, user: &UserId, number: u64) -> u64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(user.as_str().as_bytes());
        h.update(number.to_le_bytes());
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
    }

    fn make_quiz(&self, user: &UserId, number: u64, word: &WordId) -> Result<Quiz, QuizError> {
        make_quiz(
            quiz_id(number),
            word,
            &self.study_set,
            Direction::for_display(number),
            self.options,
            self.quiz_seed(user, number),
        )
    }
}

fn quiz_id(number: u64) -> QuizId {
    QuizId(format!("q{number}"))
}

fn quiz_number(id: &QuizId) -> Option<u64> {
    id.0.strip_prefix('q')?.parse().ok()
}

fn timestamp(ts: &DateTime<FixedOffset>) -> Timestamp {
    Timestamp(ts.timestamp())
}

/// Where an item is requested from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    /// Inserted into the feed (in-feed condition).
    Feed,
    /// The external quiz site reached through a link (link condition).
    QuizSite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Item {
    Quiz(Quiz),
    IntroCard(IntroCard),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct OpenQuiz {
    quiz: Quiz,
    /// An incorrect attempt was made; resolution counts as a failed recall.
    missed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRecord {
    pub user_id: UserId,
    pub condition: Condition,
    pub scheduler: SchedulerState,
    pub display_counter: u64,
    /// Word of the most recently solved quiz, until the next display.
    pub last_solved: Option<WordId>,
    open: BTreeMap<u64, OpenQuiz>,
}

impl UserRecord {
    pub fn open_quiz(&self, id: &QuizId) -> Option<&Quiz> {
        quiz_number(id).and_then(|n| self.open.get(&n)).map(|o| &o.quiz)
    }

    pub fn open_quiz_count(&self) -> usize {
        self.open.len()
    }
}

/// What applying an event produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Recorded,
    Item(Item),
    Answer(AnswerResult),
}

#[derive(Debug, Clone)]
pub struct Engine {
    config: Arc<EngineConfig>,
    users: BTreeMap<UserId, UserRecord>,
    log: EventLog,
}

impl Engine {
    pub fn new(config: Arc<EngineConfig>) -> Self {
        Engine {
            config,
            users: BTreeMap::new(),
            log: EventLog::new(),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn user(&self, id: &UserId) -> Option<&UserRecord> {
        self.users.get(id)
    }

    pub fn users(&self) -> impl Iterator<Item = &UserRecord> {
        self.users.values()
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    /// Number of events folded into the state.
    pub fn applied(&self) -> usize {
        self.log.len()
    }

    fn record(&self, id: &UserId) -> Result<&UserRecord, EngineError> {
        self.users.get(id).ok_or_else(|| EngineError::UnknownUser(id.clone()))
    }

    /// Latest timestamp seen for `user`; new events must not precede it.
    pub fn last_ts(&self, user: &UserId) -> Option<DateTime<FixedOffset>> {
        self.log.last_ts(user)
    }

    pub fn prepare_enroll(&self, user: UserId, condition: Condition, ts: DateTime<FixedOffset>) -> Result<Event, EngineError> {
        if self.users.contains_key(&user) {
            return Err(EngineError::UserExists(user));
        }
        Ok(Event::new(ts, user, EventKind::Enroll { condition }))
    }

    /// Chooses the next word for display. Right after a solved quiz a
    /// different word is preferred.
    pub fn prepare_next_item(&self, user: &UserId, surface: Surface, ts: DateTime<FixedOffset>) -> Result<Event, EngineError> {
        let rec = self.record(user)?;
        let allowed = match surface {
            Surface::Feed => Condition::InFeedQuiz,
            Surface::QuizSite => Condition::Link,
        };
        if rec.condition != allowed {
            return Err(EngineError::WrongCondition {
                user: user.clone(),
                actual: rec.condition,
            });
        }
        let now = timestamp(&ts);
        let mut pick = rec.scheduler.next_word(now);
        if let Some(prev) = &rec.last_solved {
            if pick.word_id == prev {
                pick = rec.scheduler.next_word(now.plus_secs(1));
                if pick.word_id == prev {
                    if let Some(other) = rec.scheduler.next_word_excluding(now.plus_secs(1), prev) {
                        pick = other;
                    }
                }
            }
        }
        let kind = if pick.is_new {
            EventKind::IntroShown {
                word_id: pick.word_id.clone(),
            }
        } else {
            EventKind::Impression {
                quiz_id: quiz_id(rec.display_counter),
                word_id: pick.word_id.clone(),
            }
        };
        Ok(Event::new(ts, user.clone(), kind))
    }

    pub fn prepare_answer(
        &self,
        user: &UserId,
        quiz: &QuizId,
        chosen_index: usize,
        ts: DateTime<FixedOffset>,
    ) -> Result<Event, EngineError> {
        let rec = self.record(user)?;
        let number = quiz_number(quiz).ok_or_else(|| EngineError::UnknownQuiz(quiz.clone()))?;
        let Some(open) = rec.open.get(&number) else {
            return Err(if number < rec.display_counter {
                EngineError::QuizClosed(quiz.clone())
            } else {
                EngineError::UnknownQuiz(quiz.clone())
            });
        };
        let result = open.quiz.check_answer(chosen_index)?;
        Ok(Event::new(
            ts,
            user.clone(),
            EventKind::Answer {
                quiz_id: quiz.clone(),
                word_id: open.quiz.prompt_word.clone(),
                chosen_index,
                correct: result.correct,
            },
        ))
    }

    /// An engagement with an open quiz, logged before any answer.
    pub fn prepare_engage(&self, user: &UserId, quiz: &QuizId, ts: DateTime<FixedOffset>) -> Result<Event, EngineError> {
        open_entry(self.record(user)?, quiz)?;
        Ok(Event::new(ts, user.clone(), EventKind::Engage { quiz_id: quiz.clone() }))
    }

    pub fn prepare_link_click(&self, user: &UserId, ts: DateTime<FixedOffset>) -> Result<Event, EngineError> {
        let rec = self.record(user)?;
        if rec.condition != Condition::Link {
            return Err(EngineError::WrongCondition {
                user: user.clone(),
                actual: rec.condition,
            });
        }
        Ok(Event::new(ts, user.clone(), EventKind::LinkClick))
    }

    pub fn prepare_feed_render(&self, user: &UserId, items: usize, ts: DateTime<FixedOffset>) -> Result<Event, EngineError> {
        self.record(user)?;
        Ok(Event::new(ts, user.clone(), EventKind::FeedRender { items }))
    }

    /// Checks that `event` applies cleanly without changing anything.
    pub fn check(&self, event: &Event) -> Result<(), EngineError> {
        self.transition(event).map(|_| ())
    }

    /// Folds `event` into the state. Atomic: on error nothing changes.
    pub fn apply(&mut self, event: &Event) -> Result<Outcome, EngineError> {
        let (record, outcome) = self.transition(event)?;
        self.log.append(event.clone())?;
        if let Some(record) = record {
            self.users.insert(record.user_id.clone(), record);
        }
        Ok(outcome)
    }

    fn transition(&self, event: &Event) -> Result<(Option<UserRecord>, Outcome), EngineError> {
        self.log.validate(event)?;
        let user = &event.user;
        let now = timestamp(&event.ts);

        if let EventKind::Enroll { condition } = event.kind {
            if self.users.contains_key(user) {
                return Err(EngineError::UserExists(user.clone()));
            }
            let scheduler = SchedulerState::new(&self.config.study_set, self.config.ladder.clone(), now)?;
            let rec = UserRecord {
                user_id: user.clone(),
                condition,
                scheduler,
                display_counter: 0,
                last_solved: None,
                open: BTreeMap::new(),
            };
            return Ok((Some(rec), Outcome::Recorded));
        }

        let mut rec = self.record(user)?.clone();
        let outcome = match &event.kind {
            EventKind::Enroll { .. } => unreachable!("handled above"),
            EventKind::IntroShown { word_id } => {
                let card = make_intro_card(word_id, &self.config.study_set)?;
                rec.scheduler.record_impression(word_id, now, Display::Introduction)?;
                rec.display_counter += 1;
                rec.last_solved = None;
                Outcome::Item(Item::IntroCard(card))
            }
            EventKind::Impression { quiz_id: id, word_id } => {
                if *id != quiz_id(rec.display_counter) {
                    return Err(EngineError::Inconsistent(format!(
                        "expected quiz id q{}, got {id}",
                        rec.display_counter
                    )));
                }
                let quiz = self.config.make_quiz(user, rec.display_counter, word_id)?;
                rec.scheduler.record_impression(word_id, now, Display::Review)?;
                rec.open.insert(
                    rec.display_counter,
                    OpenQuiz {
                        quiz: quiz.clone(),
                        missed: false,
                    },
                );
                while rec.open.len() > MAX_OPEN_QUIZZES {
                    rec.open.pop_first();
                }
                rec.display_counter += 1;
                rec.last_solved = None;
                Outcome::Item(Item::Quiz(quiz))
            }
            EventKind::Engage { quiz_id: id } => {
                open_entry(&rec, id)?;
                Outcome::Recorded
            }
            EventKind::Answer {
                quiz_id: id,
                word_id,
                chosen_index,
                correct,
            } => {
                let number = open_entry(&rec, id)?;
                let open = rec.open.get_mut(&number).expect("entry exists");
                if &open.quiz.prompt_word != word_id {
                    return Err(EngineError::Inconsistent(format!("quiz {id} tests {}", open.quiz.prompt_word)));
                }
                let result = open.quiz.check_answer(*chosen_index)?;
                if result.correct != *correct {
                    return Err(EngineError::Inconsistent(format!("answer correctness for {id} disagrees")));
                }
                if result.correct {
                    let first_try = !open.missed;
                    rec.open.remove(&number);
                    rec.scheduler.record_answer(word_id, first_try, now)?;
                    rec.last_solved = Some(word_id.clone());
                } else {
                    open.missed = true;
                }
                Outcome::Answer(result)
            }
            EventKind::LinkClick => {
                if rec.condition != Condition::Link {
                    return Err(EngineError::WrongCondition {
                        user: user.clone(),
                        actual: rec.condition,
                    });
                }
                Outcome::Recorded
            }
            EventKind::FeedRender { .. } => Outcome::Recorded,
        };
        Ok((Some(rec), outcome))
    }

    fn execute(&mut self, event: Result<Event, EngineError>) -> Result<Outcome, EngineError> {
        let event = event?;
        self.apply(&event)
    }

    pub fn enroll(&mut self, user: UserId, condition: Condition, ts: DateTime<FixedOffset>) -> Result<(), EngineError> {
        let ev = self.prepare_enroll(user, condition, ts);
        self.execute(ev).map(|_| ())
    }

    pub fn next_item(&mut self, user: &UserId, surface: Surface, ts: DateTime<FixedOffset>) -> Result<Item, EngineError> {
        let ev = self.prepare_next_item(user, surface, ts);
        match self.execute(ev)? {
            Outcome::Item(item) => Ok(item),
            other => unreachable!("display events yield items, got {other:?}"),
        }
    }

    pub fn answer(&mut self, user: &UserId, quiz: &QuizId, chosen_index: usize, ts: DateTime<FixedOffset>) -> Result<AnswerResult, EngineError> {
        let ev = self.prepare_answer(user, quiz, chosen_index, ts);
        match self.execute(ev)? {
            Outcome::Answer(result) => Ok(result),
            other => unreachable!("answer events yield results, got {other:?}"),
        }
    }

    pub fn link_click(&mut self, user: &UserId, ts: DateTime<FixedOffset>) -> Result<(), EngineError> {
        let ev = self.prepare_link_click(user, ts);
        self.execute(ev).map(|_| ())
    }

    pub fn feed_render(&mut self, user: &UserId, items: usize, ts: DateTime<FixedOffset>) -> Result<(), EngineError> {
        let ev = self.prepare_feed_render(user, items, ts);
        self.execute(ev).map(|_| ())
    }

    pub fn link_item(&self, user: &UserId) -> Result<String, EngineError> {
        let rec = self.record(user)?;
        if rec.condition != Condition::Link {
            return Err(EngineError::WrongCondition {
                user: user.clone(),
                actual: rec.condition,
            });
        }
        Ok(self.config.link_url.clone())
    }

    pub fn plan(&self, user: &UserId, feed_length: usize, ts: DateTime<FixedOffset>) -> Result<FeedPlan, EngineError> {
        let rec = self.record(user)?;
        let mut plan = plan_feed(feed_length, self.config.rate, rec.condition)?;
        plan.resolve_kinds(&rec.scheduler, timestamp(&ts));
        Ok(plan)
    }

    pub fn metrics(&self, user: &UserId) -> Result<Metrics, EngineError> {
        let rec = self.record(user)?;
        let events: Vec<Event> = self.log.user_events(user).cloned().collect();
        Ok(compute_metrics(&events, Some(&rec.scheduler), self.config.session_timeout)?)
    }

    /// Text snapshot of every user's state plus the number of events it
    /// covers. Deterministic: equal states give identical text.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        out.push_str("edvert-engine 1\n");
        let _ = writeln!(out, "applied {}", self.applied());
        let _ = writeln!(out, "users {}", self.users.len());
        for rec in self.users.values() {
            let last = rec.last_solved.as_ref().map_or("-", WordId::as_str);
            let _ = writeln!(
                out,
                "user {} {} {} {} {}",
                rec.user_id,
                rec.condition,
                rec.display_counter,
                last,
                rec.open.len()
            );
            for (number, open) in &rec.open {
                let _ = writeln!(out, "open {number} {} {}", open.quiz.prompt_word, u8::from(open.missed));
            }
            out.push_str(&rec.scheduler.snapshot());
        }
        out.push_str("end\n");
        out
    }

    /// Parses a snapshot. Returns the user states and the number of log
    /// events the snapshot covers.
    fn restore(config: &EngineConfig, text: &str) -> Result<(BTreeMap<UserId, UserRecord>, usize), EngineError> {
        let mut r = Reader {
            lines: text.lines().collect(),
            pos: 0,
        };
        let err = |line: usize, reason: String| EngineError::Snapshot { line, reason };

        let (n, header) = r.next("header")?;
        if header != "edvert-engine 1" {
            return Err(err(n, "unsupported header".into()));
        }
        let (n, l) = r.next("applied")?;
        let applied: usize = field(l, "applied").ok_or_else(|| err(n, "expected applied count".into()))?;
        let (n, l) = r.next("users")?;
        let count: usize = field(l, "users").ok_or_else(|| err(n, "expected user count".into()))?;

        let mut users = BTreeMap::new();
        for _ in 0..count {
            let (n, l) = r.next("user record")?;
            let parts: Vec<&str> = l.split(' ').collect();
            if parts.len() != 6 || parts[0] != "user" {
                return Err(err(n, "malformed user record".into()));
            }
            let bad = |what: &str| err(n, format!("invalid {what}"));
            let user_id = UserId::new(parts[1]).map_err(|_| bad("user id"))?;
            let condition: Condition = parts[2].parse().map_err(|_| bad("condition"))?;
            let display_counter: u64 = parts[3].parse().map_err(|_| bad("display counter"))?;
            let last_solved = match parts[4] {
                "-" => None,
                w => Some(WordId::new(w)),
            };
            let open_count: usize = parts[5].parse().map_err(|_| bad("open quiz count"))?;

            let mut open = BTreeMap::new();
            for _ in 0..open_count {
                let (n, l) = r.next("open quiz")?;
                let parts: Vec<&str> = l.split(' ').collect();
                let parsed = match parts.as_slice() {
                    ["open", number, word, missed] => number
                        .parse::<u64>()
                        .ok()
                        .filter(|&num| num < display_counter)
                        .zip(match *missed {
                            "0" => Some(false),
                            "1" => Some(true),
                            _ => None,
                        })
                        .map(|(num, missed)| (num, WordId::new(*word), missed)),
                    _ => None,
                };
                let (number, word, missed) = parsed.ok_or_else(|| err(n, "malformed open quiz".into()))?;
                let quiz = config
                    .make_quiz(&user_id, number, &word)
                    .map_err(|e| err(n, e.to_string()))?;
                open.insert(number, OpenQuiz { quiz, missed });
            }

            let sched_start = r.pos;
            loop {
                let (_, l) = r.next("scheduler block")?;
                if l == "end" {
                    break;
                }
            }
            let block = r.lines[sched_start..r.pos].join("\n");
            let scheduler = SchedulerState::restore(&block).map_err(|e| match e {
                SchedulerError::Snapshot { line, reason } => err(sched_start + line, reason),
                other => err(sched_start + 1, other.to_string()),
            })?;
            if scheduler.words().len() != config.study_set.len()
                || scheduler.words().iter().zip(config.study_set.ids()).any(|(w, id)| &w.word_id != id)
            {
                return Err(err(sched_start + 1, format!("scheduler for {user_id} does not match the study set")));
            }
            if users.contains_key(&user_id) {
                return Err(err(n, format!("duplicate user {user_id}")));
            }
            users.insert(
                user_id.clone(),
                UserRecord {
                    user_id,
                    condition,
                    scheduler,
                    display_counter,
                    last_solved,
                    open,
                },
            );
        }
        let (n, l) = r.next("end marker")?;
        if l != "end" {
            return Err(err(n, "expected end marker".into()));
        }
        Ok((users, applied))
    }

    /// Rebuilds state from a full event log, optionally starting from a
    /// snapshot that covers a prefix of that log.
    pub fn recover(config: Arc<EngineConfig>, events: Vec<Event>, snapshot: Option<&str>) -> Result<Self, EngineError> {
        let (users, covered) = match snapshot {
            Some(text) => Self::restore(&config, text)?,
            None => (BTreeMap::new(), 0),
        };
        if covered > events.len() {
            return Err(EngineError::Snapshot {
                line: 2,
                reason: format!("snapshot covers {covered} events but the log holds {}", events.len()),
            });
        }
        let mut engine = Engine {
            config,
            users,
            log: EventLog::new(),
        };
        let mut iter = events.into_iter();
        for ev in iter.by_ref().take(covered) {
            engine.log.append(ev)?;
        }
        for ev in iter {
            engine.apply(&ev)?;
        }
        Ok(engine)
    }
}

struct Reader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), EngineError> {
        let line = self.lines.get(self.pos).copied().ok_or_else(|| EngineError::Snapshot {
            line: self.pos + 1,
            reason: format!("truncated: missing {what}"),
        })?;
        self.pos += 1;
        Ok((self.pos, line))
    }
}

fn field<T: std::str::FromStr>(line: &str, key: &str) -> Option<T> {
    line.strip_prefix(key)?.strip_prefix(' ')?.parse().ok()
}

fn open_entry(rec: &UserRecord, id: &QuizId) -> Result<u64, EngineError> {
    let number = quiz_number(id).ok_or_else(|| EngineError::UnknownQuiz(id.clone()))?;
    if rec.open.contains_key(&number) {
        Ok(number)
    } else if number < rec.display_counter {
        Err(EngineError::QuizClosed(id.clone()))
    } else {
        Err(EngineError::UnknownQuiz(id.clone()))
    }
}
