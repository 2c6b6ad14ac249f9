//! Vocabulary study embedded in a social feed: ad-filter matching, spaced
//! repetition, quiz generation, slot layout, engagement analytics and the
//! HTTP service that ties them together.

pub mod analytics;
pub mod cli;
pub mod engine;
pub mod filter;
pub mod placement;
pub mod quizgen;
pub mod scheduler;
pub mod service;
pub mod sim;
pub mod vocab;

pub use analytics::{Event, EventKind, EventLog, Metrics, UserId};
pub use engine::{Engine, EngineConfig, EngineError, Item, Surface};
pub use filter::{FilterSet, MatchDecision, Verdict};
pub use placement::{fit_slot, plan_feed, AdUnit, Condition, FeedPlan, SlotFill};
pub use quizgen::{AnswerResult, Quiz, QuizId};
pub use scheduler::{Ladder, SchedulerState, Timestamp};
pub use vocab::{Deck, WordId};
