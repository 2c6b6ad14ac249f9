use std::collections::BTreeSet;

use chrono::TimeDelta;
use serde::Serialize;

use super::{sessionize, AnalyticsError, Event, EventKind};
use crate::scheduler::SchedulerState;

/// Box index from which a word counts as learned (three spaced correct
/// recalls). An estimate, not a post-test score.
pub const LEARNED_BOX: usize = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Metrics {
    /// Solved quizzes (correct terminal answers).
    pub quizzes_answered: usize,
    /// Wrong attempts, logged but not counted as answered quizzes.
    pub incorrect_attempts: usize,
    pub study_sessions: usize,
    /// Local calendar dates with at least one answer.
    pub distinct_study_days: usize,
    /// Local calendar dates with at least one feed render.
    pub days_visited: usize,
    pub words_learned: usize,
}

/// Study statistics for one user's events. Calendar dates are taken in each
/// event's own UTC offset.
pub fn compute_metrics(
    events: &[Event],
    scheduler_final: Option<&SchedulerState>,
    session_timeout: TimeDelta,
) -> Result<Metrics, AnalyticsError> {
    let mut m = Metrics::default();
    let mut study_days = BTreeSet::new();
    let mut visit_days = BTreeSet::new();
    for e in events {
        match &e.kind {
            EventKind::Answer { correct, .. } => {
                if *correct {
                    m.quizzes_answered += 1;
                } else {
                    m.incorrect_attempts += 1;
                }
                study_days.insert(e.ts.date_naive());
            }
            EventKind::FeedRender { .. } => {
                visit_days.insert(e.ts.date_naive());
            }
            _ => {}
        }
    }
    m.study_sessions = sessionize(events, session_timeout)?.len();
    m.distinct_study_days = study_days.len();
    m.days_visited = visit_days.len();
    m.words_learned = scheduler_final.map_or(0, |s| {
        s.words().iter().filter(|w| w.box_index >= LEARNED_BOX).count()
    });
    Ok(m)
}
