//! Synthetic study week. One simulated user per condition scrolls a feed,
//! engages with inserted items, and answers quizzes with a forgetting-curve
//! learner. All activity runs through the real [`Engine`], so the emitted
//! log is an ordinary event log.
//!
//! Engagement defaults are calibrated to land the in-feed condition near
//! 21 sessions and 116 solved quizzes per week. They are model parameters,
//! not measurements.

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, FixedOffset, TimeDelta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::analytics::{compute_metrics, Event, EventKind, UserId};
use crate::engine::{Engine, EngineConfig, EngineError, Item, Surface};
use crate::placement::{plan_feed, Condition, PlacementError, DEFAULT_RATE};
use crate::quizgen::{Quiz, DEFAULT_OPTION_COUNT};
use crate::scheduler::Ladder;
use crate::vocab::{Deck, WordId};

const DAY: i64 = 86_400;
/// Upper bound on items viewed in one quiz-site visit.
const MAX_SITE_ITEMS: usize = 200;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{name} must be a probability, got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("invalid setting {name}: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("unknown sweep parameter {0:?}")]
    UnknownParam(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LearnerModel {
    /// Memory strength in seconds after first study.
    pub initial_strength_secs: f64,
    /// Strength growth per first-try correct recall.
    pub strength_multiplier: f64,
}

impl LearnerModel {
    /// Probability of recalling a word `elapsed` seconds after its last
    /// review at strength `strength`.
    pub fn recall(elapsed: f64, strength: f64) -> f64 {
        (-elapsed.max(0.0) / strength).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub days: u32,
    /// Chance that the user opens the feed at all on a given day.
    pub p_visit_day: f64,
    pub visits_per_day: u32,
    pub feed_items_per_day: u32,
    pub secs_per_item: i64,
    pub secs_per_answer: i64,
    /// Chance an inserted item is engaged when the previous one was not.
    pub p_engage: f64,
    /// Chance of engaging the next inserted item right after engaging one.
    pub p_continue: f64,
    pub p_link_click: f64,
    /// Mean quizzes answered after a link click (geometric, at least one).
    pub link_quizzes_mean: f64,
    pub learner: LearnerModel,
    pub rate: usize,
    pub options: usize,
    pub ladder: Ladder,
    pub session_timeout_secs: i64,
    pub start: DateTime<FixedOffset>,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            days: 7,
            p_visit_day: 5.7 / 7.0,
            visits_per_day: 5,
            feed_items_per_day: 550,
            secs_per_item: 5,
            secs_per_answer: 6,
            p_engage: 0.14,
            p_continue: 0.9,
            p_link_click: 0.015,
            link_quizzes_mean: 3.0,
            learner: LearnerModel {
                initial_strength_secs: 12.0 * 3600.0,
                strength_multiplier: 3.0,
            },
            rate: DEFAULT_RATE,
            options: DEFAULT_OPTION_COUNT,
            ladder: Ladder::default(),
            session_timeout_secs: crate::analytics::DEFAULT_SESSION_TIMEOUT_SECS,
            start: DateTime::parse_from_rfc3339("2026-01-05T00:00:00+00:00").expect("valid literal"),
            seed: 0,
        }
    }
}

/// Sweepable parameter names, as accepted by [`SimConfig::set`].
pub const SWEEP_PARAMS: &[&str] = &[
    "days",
    "p_visit_day",
    "visits_per_day",
    "feed_items_per_day",
    "p_engage",
    "p_continue",
    "p_link_click",
    "link_quizzes_mean",
    "initial_strength_secs",
    "strength_multiplier",
    "seed",
];

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, value) in [
            ("p_visit_day", self.p_visit_day),
            ("p_engage", self.p_engage),
            ("p_continue", self.p_continue),
            ("p_link_click", self.p_link_click),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::Probability { name, value });
            }
        }
        let invalid = |name, reason: &str| {
            Err(SimError::Invalid {
                name,
                reason: reason.to_owned(),
            })
        };
        if self.days == 0 {
            return invalid("days", "must be at least 1");
        }
        if self.visits_per_day == 0 {
            return invalid("visits_per_day", "must be at least 1");
        }
        if self.link_quizzes_mean < 1.0 || !self.link_quizzes_mean.is_finite() {
            return invalid("link_quizzes_mean", "must be at least 1");
        }
        let learner_ok = self.learner.initial_strength_secs > 0.0 && self.learner.strength_multiplier >= 1.0;
        if !learner_ok {
            return invalid("learner", "strength must be positive and the multiplier at least 1");
        }
        if self.secs_per_item < 0 || self.secs_per_answer < 0 || self.session_timeout_secs <= 0 {
            return invalid("timing", "durations must be non-negative and the timeout positive");
        }
        Ok(())
    }

    /// Sets a numeric parameter by name.
    pub fn set(&mut self, param: &str, value: f64) -> Result<(), SimError> {
        let whole = |name: &'static str| -> Result<u64, SimError> {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as u64)
            } else {
                Err(SimError::Invalid {
                    name,
                    reason: format!("expected a whole number, got {value}"),
                })
            }
        };
        match param {
            "days" => self.days = whole("days")? as u32,
            "p_visit_day" => self.p_visit_day = value,
            "visits_per_day" => self.visits_per_day = whole("visits_per_day")? as u32,
            "feed_items_per_day" => self.feed_items_per_day = whole("feed_items_per_day")? as u32,
            "p_engage" => self.p_engage = value,
            "p_continue" => self.p_continue = value,
            "p_link_click" => self.p_link_click = value,
            "link_quizzes_mean" => self.link_quizzes_mean = value,
            "initial_strength_secs" => self.learner.initial_strength_secs = value,
            "strength_multiplier" => self.learner.strength_multiplier = value,
            "seed" => self.seed = whole("seed")?,
            other => return Err(SimError::UnknownParam(other.to_owned())),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub quizzes_answered: usize,
    pub incorrect_attempts: usize,
    pub study_sessions: usize,
    pub distinct_study_days: usize,
    pub days_visited: usize,
    /// Sum over studied words of recall probability at the end of the run.
    pub posttest_expected_words: f64,
    /// Words at or above the learned box in the final scheduler state.
    pub words_learned: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub seed: u64,
    pub in_feed: ConditionReport,
    pub link: ConditionReport,
    #[serde(skip)]
    pub log: Vec<Event>,
}

impl SimReport {
    pub fn condition(&self, c: Condition) -> &ConditionReport {
        match c {
            Condition::InFeedQuiz => &self.in_feed,
            Condition::Link => &self.link,
        }
    }

    /// The emitted log in the event-log line format.
    pub fn log_text(&self) -> String {
        self.log.iter().map(|e| format!("{e}\n")).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Memory {
    strength: f64,
    last_review: i64,
}

/// Per-condition run state.
struct Learner<'a> {
    cfg: &'a SimConfig,
    rng: ChaCha8Rng,
    user: UserId,
    clock: DateTime<FixedOffset>,
    memory: BTreeMap<WordId, Memory>,
    // independent session count, checked against analytics
    sessions: usize,
    last_engagement: Option<DateTime<FixedOffset>>,
}

impl Learner<'_> {
    fn at_least(&mut self, t: DateTime<FixedOffset>) {
        if t > self.clock {
            self.clock = t;
        }
    }

    fn tick(&mut self, secs: i64) {
        self.clock += TimeDelta::seconds(secs);
    }

    fn note_engagement(&mut self, link_click: bool) {
        let timeout = TimeDelta::seconds(self.cfg.session_timeout_secs);
        let fresh = match self.last_engagement {
            None => true,
            Some(prev) => self.clock - prev >= timeout,
        };
        if link_click || fresh {
            self.sessions += 1;
        }
        self.last_engagement = Some(self.clock);
    }

    fn study(&mut self, word: &WordId) {
        let now = self.clock.timestamp();
        let s0 = self.cfg.learner.initial_strength_secs;
        self.memory
            .entry(word.clone())
            .and_modify(|m| m.last_review = now)
            .or_insert(Memory {
                strength: s0,
                last_review: now,
            });
    }

    fn recall(&self, word: &WordId) -> f64 {
        self.memory.get(word).map_or(0.0, |m| {
            LearnerModel::recall((self.clock.timestamp() - m.last_review) as f64, m.strength)
        })
    }

    /// Engages `quiz` and answers until correct. A wrong pick is followed by
    /// a uniform guess among the options not yet tried.
    fn solve(&mut self, engine: &mut Engine, quiz: &Quiz) -> Result<(), SimError> {
        engine.apply(&Event::new(
            self.clock,
            self.user.clone(),
            EventKind::Engage {
                quiz_id: quiz.quiz_id.clone(),
            },
        ))?;
        self.note_engagement(false);
        let word = quiz.prompt_word.clone();
        let recalled = self.rng.random_bool(self.recall(&word).clamp(0.0, 1.0));
        let mut untried: Vec<usize> = (0..quiz.option_count()).collect();
        let mut first_try = true;
        loop {
            self.tick(self.cfg.secs_per_answer);
            let pick = if recalled && first_try {
                quiz.correct_index
            } else {
                untried[self.rng.random_range(0..untried.len())]
            };
            untried.retain(|&i| i != pick);
            let result = engine.answer(&self.user, &quiz.quiz_id, pick, self.clock)?;
            self.note_engagement(false);
            if result.correct {
                break;
            }
            first_try = false;
        }
        let now = self.clock.timestamp();
        let s0 = self.cfg.learner.initial_strength_secs;
        let mult = self.cfg.learner.strength_multiplier;
        let m = self.memory.entry(word).or_insert(Memory {
            strength: s0,
            last_review: now,
        });
        if first_try && recalled {
            m.strength *= mult;
        }
        m.last_review = now;
        Ok(())
    }

    /// Shows the next item on `surface`; when `engaged`, studies or solves it.
    fn take_item(&mut self, engine: &mut Engine, surface: Surface, engaged: bool) -> Result<bool, SimError> {
        match engine.next_item(&self.user, surface, self.clock)? {
            Item::IntroCard(card) => {
                if engaged {
                    self.tick(self.cfg.secs_per_item);
                    self.study(&card.word_id);
                }
                Ok(false)
            }
            Item::Quiz(quiz) => {
                if engaged {
                    self.solve(engine, &quiz)?;
                }
                Ok(engaged)
            }
        }
    }

    fn posttest(&self, test_time: i64) -> f64 {
        self.memory
            .values()
            .map(|m| LearnerModel::recall((test_time - m.last_review) as f64, m.strength))
            .fold(0.0, |acc, r| acc + r)
    }
}

fn condition_seed(seed: u64, condition: Condition) -> u64 {
    let salt = match condition {
        Condition::InFeedQuiz => 0x1f3d_5b79_a4c2_e680,
        Condition::Link => 0x2e4c_6a8f_b1d3_f507,
    };
    seed ^ salt
}

fn simulate_condition(
    cfg: &SimConfig,
    engine: &mut Engine,
    condition: Condition,
) -> Result<ConditionReport, SimError> {
    let user = UserId::new(format!("sim-{}", condition.as_str())).expect("static id is valid");
    engine.enroll(user.clone(), condition, cfg.start)?;
    let mut l = Learner {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(condition_seed(cfg.seed, condition)),
        user: user.clone(),
        clock: cfg.start,
        memory: BTreeMap::new(),
        sessions: 0,
        last_engagement: None,
    };
    let per_visit = (cfg.feed_items_per_day / cfg.visits_per_day) as usize;
    // visits spread over a 14-hour waking day starting 08:00
    let spacing = 14 * 3600 / i64::from(cfg.visits_per_day);
    let surface = match condition {
        Condition::InFeedQuiz => Surface::Feed,
        Condition::Link => Surface::QuizSite,
    };

    for day in 0..i64::from(cfg.days) {
        if !l.rng.random_bool(cfg.p_visit_day) {
            continue;
        }
        for visit in 0..i64::from(cfg.visits_per_day) {
            let jitter = l.rng.random_range(0..=spacing / 2);
            l.at_least(cfg.start + TimeDelta::seconds(day * DAY + 8 * 3600 + visit * spacing + jitter));
            engine.feed_render(&user, per_visit, l.clock)?;
            let plan = plan_feed(per_visit, cfg.rate, condition)?;
            let mut shown = 0;
            let mut engaged_prev = false;
            for pos in plan.positions() {
                l.tick((pos - shown) as i64 * cfg.secs_per_item);
                shown = pos;
                match condition {
                    Condition::InFeedQuiz => {
                        let p = if engaged_prev { cfg.p_continue } else { cfg.p_engage };
                        let engage = l.rng.random_bool(p);
                        l.take_item(engine, surface, engage)?;
                        engaged_prev = engage;
                    }
                    Condition::Link => {
                        if !l.rng.random_bool(cfg.p_link_click) {
                            continue;
                        }
                        engine.link_click(&user, l.clock)?;
                        l.note_engagement(true);
                        let p_more = 1.0 - 1.0 / cfg.link_quizzes_mean;
                        // intro cards on the site are read as they come
                        for _ in 0..MAX_SITE_ITEMS {
                            if l.take_item(engine, surface, true)? && !l.rng.random_bool(p_more) {
                                break;
                            }
                        }
                    }
                }
            }
            l.tick((per_visit - shown) as i64 * cfg.secs_per_item);
        }
    }

    let rec = engine.user(&user).expect("enrolled above");
    let events: Vec<Event> = engine.log().user_events(&user).cloned().collect();
    let m = compute_metrics(&events, Some(&rec.scheduler), TimeDelta::seconds(cfg.session_timeout_secs))
        .map_err(EngineError::from)?;
    debug_assert_eq!(m.study_sessions, l.sessions, "simulator and analytics disagree on sessions");
    let test_time = (cfg.start + TimeDelta::seconds(i64::from(cfg.days) * DAY)).timestamp();
    Ok(ConditionReport {
        condition,
        quizzes_answered: m.quizzes_answered,
        incorrect_attempts: m.incorrect_attempts,
        study_sessions: l.sessions,
        distinct_study_days: m.distinct_study_days,
        days_visited: m.days_visited,
        posttest_expected_words: l.posttest(test_time),
        words_learned: m.words_learned,
    })
}

/// Runs both conditions over `study_set` with the same configuration.
pub fn run_sim(config: &SimConfig, study_set: &Deck) -> Result<SimReport, SimError> {
    config.validate()?;
    let engine_cfg = EngineConfig {
        ladder: config.ladder.clone(),
        options: config.options,
        rate: config.rate,
        session_timeout: TimeDelta::seconds(config.session_timeout_secs),
        seed: config.seed,
        ..EngineConfig::new(study_set.clone())
    };
    let mut engine = Engine::new(Arc::new(engine_cfg));
    let in_feed = simulate_condition(config, &mut engine, Condition::InFeedQuiz)?;
    let link = simulate_condition(config, &mut engine, Condition::Link)?;
    Ok(SimReport {
        seed: config.seed,
        in_feed,
        link,
        log: engine.log().events().to_vec(),
    })
}

/// One run per value of `param`, everything else taken from `config`.
pub fn sweep(param: &str, values: &[f64], config: &SimConfig, study_set: &Deck) -> Result<Vec<(f64, SimReport)>, SimError> {
    if !SWEEP_PARAMS.contains(&param) {
        return Err(SimError::UnknownParam(param.to_owned()));
    }
    values
        .iter()
        .map(|&v| {
            let mut cfg = config.clone();
            cfg.set(param, v)?;
            run_sim(&cfg, study_set).map(|r| (v, r))
        })
        .collect()
}

/// Mean of a per-condition field over several reports.
pub fn mean(reports: &[SimReport], condition: Condition, field: impl Fn(&ConditionReport) -> f64) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().map(|r| field(r.condition(condition))).fold(0.0, |acc, v| acc + v) / reports.len() as f64
}
