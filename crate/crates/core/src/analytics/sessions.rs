use std::collections::HashMap;

use chrono::{DateTime, FixedOffset, TimeDelta};
use serde::Serialize;

use super::{AnalyticsError, Event, EventKind, UserId};

pub const DEFAULT_SESSION_TIMEOUT_SECS: i64 = 30 * 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionTrigger {
    LinkClick,
    FirstEngagement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Session {
    pub user: UserId,
    pub start_ts: DateTime<FixedOffset>,
    pub end_ts: DateTime<FixedOffset>,
    /// Engagement events (link clicks, engages, answers) in the session.
    pub events: usize,
    pub trigger: SessionTrigger,
}

/// Groups engagement events into study sessions.
///
/// A link click always opens a session. An engage or answer opens one when
/// the user's previous engagement event is at least `timeout` earlier;
/// otherwise it extends the current session. Impressions, intro cards, feed
/// renders and enrollments are ignored. Sessions are returned in the order
/// they open.
pub fn sessionize(events: &[Event], timeout: TimeDelta) -> Result<Vec<Session>, AnalyticsError> {
    let mut sessions: Vec<Session> = Vec::new();
    let mut open: HashMap<&UserId, usize> = HashMap::new();
    let mut last_seen: HashMap<&UserId, DateTime<FixedOffset>> = HashMap::new();

    for e in events {
        if let Some(prev) = last_seen.insert(&e.user, e.ts) {
            if e.ts < prev {
                return Err(AnalyticsError::Unordered(e.user.clone()));
            }
        }
        if !e.kind.is_engagement() {
            continue;
        }
        let current = open
            .get(&e.user)
            .copied()
            .filter(|&i| e.ts - sessions[i].end_ts < timeout);
        match (current, &e.kind) {
            (Some(i), kind) if !matches!(kind, EventKind::LinkClick) => {
                let s = &mut sessions[i];
                s.end_ts = e.ts;
                s.events += 1;
            }
            (_, kind) => {
                let trigger = if matches!(kind, EventKind::LinkClick) {
                    SessionTrigger::LinkClick
                } else {
                    SessionTrigger::FirstEngagement
                };
                open.insert(&e.user, sessions.len());
                sessions.push(Session {
                    user: e.user.clone(),
                    start_ts: e.ts,
                    end_ts: e.ts,
                    events: 1,
                    trigger,
                });
            }
        }
    }
    Ok(sessions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::tests::at;
    use proptest::prelude::*;

    fn u() -> UserId {
        UserId::new("u").unwrap()
    }

    fn answer(t: i64) -> Event {
        Event::new(
            at(t),
            u(),
            EventKind::Answer {
                quiz_id: "q".into(),
                word_id: "w".into(),
                chosen_index: 0,
                correct: true,
            },
        )
    }

    fn timeout() -> TimeDelta {
        TimeDelta::seconds(DEFAULT_SESSION_TIMEOUT_SECS)
    }

    #[test]
    fn close_answers_share_a_session() {
        let s = sessionize(&[answer(0), answer(10)], timeout()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].events, 2);
        assert_eq!(s[0].trigger, SessionTrigger::FirstEngagement);
    }

    #[test]
    fn distant_answers_split() {
        assert_eq!(sessionize(&[answer(0), answer(7200)], timeout()).unwrap().len(), 2);
        // exactly one timeout apart is a new session
        assert_eq!(sessionize(&[answer(0), answer(1800)], timeout()).unwrap().len(), 2);
        assert_eq!(sessionize(&[answer(0), answer(1799)], timeout()).unwrap().len(), 1);
    }

    #[test]
    fn passive_events_never_open_sessions() {
        let events = vec![
            Event::new(at(0), u(), EventKind::IntroShown { word_id: "w".into() }),
            Event::new(at(5), u(), EventKind::FeedRender { items: 30 }),
            Event::new(
                at(9),
                u(),
                EventKind::Impression {
                    quiz_id: "q".into(),
                    word_id: "w".into(),
                },
            ),
        ];
        assert!(sessionize(&events, timeout()).unwrap().is_empty());
    }

    #[test]
    fn link_clicks_always_open_sessions() {
        let events = vec![
            Event::new(at(0), u(), EventKind::LinkClick),
            answer(10),
            Event::new(at(20), u(), EventKind::LinkClick),
            answer(30),
        ];
        let s = sessionize(&events, timeout()).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|s| s.trigger == SessionTrigger::LinkClick && s.events == 2));
    }

    #[test]
    fn unordered_input_is_rejected() {
        assert!(matches!(
            sessionize(&[answer(10), answer(0)], timeout()),
            Err(AnalyticsError::Unordered(_))
        ));
    }

    proptest! {
        #[test]
        fn gaps_respect_the_timeout(mut gaps in prop::collection::vec(0i64..5000, 1..60)) {
            gaps[0] = 0;
            let mut t = 0;
            let events: Vec<Event> = gaps.iter().map(|g| { t += g; answer(t) }).collect();
            let sessions = sessionize(&events, timeout()).unwrap();
            prop_assert_eq!(sessions.iter().map(|s| s.events).sum::<usize>(), events.len());
            for pair in sessions.windows(2) {
                prop_assert!(pair[1].start_ts - pair[0].end_ts >= timeout());
            }
            // within a session every consecutive gap is below the timeout
            let mut idx = 0;
            for s in &sessions {
                let members = &events[idx..idx + s.events];
                for w in members.windows(2) {
                    prop_assert!(w[1].ts - w[0].ts < timeout());
                }
                idx += s.events;
            }
        }
    }
}
