//! The study service: an [`Engine`] behind a lock, persisted to a data
//! directory, exposed over HTTP by [`http::router`].

pub mod config;
pub mod http;
pub mod store;

use std::path::Path;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, FixedOffset, Local};
use serde::Serialize;
use thiserror::Error;

use crate::analytics::{Event, Metrics, UserId};
use crate::engine::{Engine, EngineConfig, EngineError, Item, Outcome, Surface};
use crate::filter::{FilterError, FilterSet, MatchDecision};
use crate::placement::{fit_slot, AdUnit, Condition, FeedPlan, PlacementError, SlotFill};
use crate::quizgen::{AnswerResult, QuizId};

pub use config::{ConfigError, Resources, ServiceConfig};
pub use store::{Store, StoreError};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error("bad request: {0}")]
    BadRequest(String),
}

/// Source of event timestamps.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<FixedOffset>;
}

/// Wall clock in the host's local offset, whole seconds.
#[derive(Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<FixedOffset> {
        let now = Local::now().fixed_offset();
        DateTime::from_timestamp(now.timestamp(), 0)
            .expect("current time is representable")
            .with_timezone(now.offset())
    }
}

/// Settable clock for tests and simulations.
#[derive(Debug)]
pub struct ManualClock {
    secs: AtomicI64,
    offset: FixedOffset,
}

impl ManualClock {
    pub fn new(start: DateTime<FixedOffset>) -> Self {
        ManualClock {
            secs: AtomicI64::new(start.timestamp()),
            offset: *start.offset(),
        }
    }

    pub fn advance(&self, secs: i64) {
        self.secs.fetch_add(secs, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<FixedOffset> {
        DateTime::from_timestamp(self.secs.load(Ordering::SeqCst), 0)
            .expect("clock in range")
            .with_timezone(&self.offset)
    }
}

impl<C: Clock + ?Sized> Clock for Arc<C> {
    fn now(&self) -> DateTime<FixedOffset> {
        (**self).now()
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Health {
    pub status: &'static str,
    pub users: usize,
    pub events: usize,
}

struct State {
    engine: Engine,
    store: Option<Store>,
}

/// All mutations go through one lock, so each user's requests are applied
/// in some serial order and the log writer has a single owner.
pub struct Service {
    state: Mutex<State>,
    filters: FilterSet,
    units: Vec<AdUnit>,
    snapshot_every: usize,
    clock: Box<dyn Clock>,
}

impl Service {
    /// A service without persistence.
    pub fn in_memory(resources: Resources, clock: impl Clock + 'static) -> Self {
        Service {
            state: Mutex::new(State {
                engine: Engine::new(Arc::new(resources.engine)),
                store: None,
            }),
            filters: resources.filters,
            units: resources.units,
            snapshot_every: 0,
            clock: Box::new(clock),
        }
    }

    /// Opens `data_dir`, recovering state from its snapshot and event log.
    pub fn open(
        resources: Resources,
        data_dir: &Path,
        snapshot_every: usize,
        clock: impl Clock + 'static,
    ) -> Result<Self, ServiceError> {
        let (store, recovered) = Store::open(data_dir)?;
        let engine = Engine::recover(
            Arc::new(resources.engine),
            recovered.events,
            recovered.snapshot.as_deref(),
        )?;
        Ok(Service {
            state: Mutex::new(State {
                engine,
                store: Some(store),
            }),
            filters: resources.filters,
            units: resources.units,
            snapshot_every,
            clock: Box::new(clock),
        })
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        // a panic mid-request never leaves a half-applied event behind,
        // so a poisoned lock still guards consistent state
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Current time, clamped so a user's events never go backwards.
    fn now_for(&self, engine: &Engine, user: &UserId) -> DateTime<FixedOffset> {
        let now = self.clock.now();
        match engine.last_ts(user) {
            Some(last) if last > now => last,
            _ => now,
        }
    }

    fn commit(&self, state: &mut State, event: Event) -> Result<Outcome, ServiceError> {
        state.engine.check(&event)?;
        if let Some(store) = &mut state.store {
            store.append(&event)?;
        }
        let outcome = state.engine.apply(&event)?;
        let count = state.engine.applied();
        if let Some(store) = &state.store {
            if self.snapshot_every > 0 && count.is_multiple_of(self.snapshot_every) {
                // the event is already durable; a failed snapshot only
                // lengthens the next replay
                if let Err(e) = store.write_snapshot(count, &state.engine.snapshot()) {
                    eprintln!("snapshot after {count} events failed: {e}");
                }
            }
        }
        Ok(outcome)
    }

    pub fn health(&self) -> Health {
        let state = self.lock();
        Health {
            status: "ok",
            users: state.engine.users().count(),
            events: state.engine.applied(),
        }
    }

    pub fn engine_config(&self) -> EngineConfig {
        self.lock().engine.config().clone()
    }

    pub fn enroll(&self, user: UserId, condition: Condition) -> Result<(), ServiceError> {
        let mut state = self.lock();
        let ts = self.clock.now();
        let event = state.engine.prepare_enroll(user, condition, ts)?;
        self.commit(&mut state, event).map(|_| ())
    }

    pub fn next_item(&self, user: &UserId, surface: Surface) -> Result<Item, ServiceError> {
        let mut state = self.lock();
        let ts = self.now_for(&state.engine, user);
        let event = state.engine.prepare_next_item(user, surface, ts)?;
        match self.commit(&mut state, event)? {
            Outcome::Item(item) => Ok(item),
            other => unreachable!("display events yield items, got {other:?}"),
        }
    }

    pub fn engage(&self, user: &UserId, quiz: &QuizId) -> Result<(), ServiceError> {
        let mut state = self.lock();
        let ts = self.now_for(&state.engine, user);
        let event = state.engine.prepare_engage(user, quiz, ts)?;
        self.commit(&mut state, event).map(|_| ())
    }

    pub fn answer(&self, user: &UserId, quiz: &QuizId, chosen_index: usize) -> Result<AnswerResult, ServiceError> {
        let mut state = self.lock();
        let ts = self.now_for(&state.engine, user);
        let event = state.engine.prepare_answer(user, quiz, chosen_index, ts)?;
        match self.commit(&mut state, event)? {
            Outcome::Answer(result) => Ok(result),
            other => unreachable!("answer events yield results, got {other:?}"),
        }
    }

    pub fn link_item(&self, user: &UserId) -> Result<String, ServiceError> {
        Ok(self.lock().engine.link_item(user)?)
    }

    pub fn link_click(&self, user: &UserId) -> Result<(), ServiceError> {
        let mut state = self.lock();
        let ts = self.now_for(&state.engine, user);
        let event = state.engine.prepare_link_click(user, ts)?;
        self.commit(&mut state, event).map(|_| ())
    }

    pub fn feed_render(&self, user: &UserId, items: usize) -> Result<(), ServiceError> {
        let mut state = self.lock();
        let ts = self.now_for(&state.engine, user);
        let event = state.engine.prepare_feed_render(user, items, ts)?;
        self.commit(&mut state, event).map(|_| ())
    }

    pub fn match_url(&self, url: &str, page: Option<&str>, third_party: Option<bool>) -> Result<MatchDecision, ServiceError> {
        Ok(self.filters.decide(url, page, third_party)?)
    }

    pub fn layout(&self, width: u32, height: u32) -> Result<Option<SlotFill>, ServiceError> {
        Ok(fit_slot(width, height, &self.units)?)
    }

    pub fn plan(&self, user: &UserId, feed_length: usize) -> Result<FeedPlan, ServiceError> {
        let state = self.lock();
        let ts = self.now_for(&state.engine, user);
        Ok(state.engine.plan(user, feed_length, ts)?)
    }

    pub fn metrics(&self, user: &UserId) -> Result<Metrics, ServiceError> {
        Ok(self.lock().engine.metrics(user)?)
    }

    /// Serialized engine state, as written to the snapshots directory.
    pub fn snapshot(&self) -> String {
        self.lock().engine.snapshot()
    }
}
