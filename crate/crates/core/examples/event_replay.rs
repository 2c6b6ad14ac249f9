//! Event sourcing: drive the service against a data directory, restart it,
//! and check that recovery rebuilds the same state.
//!
//!     cargo run --example event_replay

use std::sync::Arc;

use chrono::DateTime;
use edvert::engine::{Item, Surface};
use edvert::service::{ManualClock, Resources, Service};
use edvert::{EngineConfig, FilterSet, UserId};
use edvert::placement::{default_units, Condition};

fn resources() -> Resources {
    Resources {
        engine: EngineConfig::sample(),
        filters: FilterSet::default(),
        units: default_units(),
    }
}

pub fn run() -> bool {
    let dir = std::env::temp_dir().join(format!("edvert-replay-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let clock = Arc::new(ManualClock::new(DateTime::parse_from_rfc3339("2026-01-05T08:00:00+00:00").expect("literal")));

    let live = Service::open(resources(), &dir, 25, clock.clone()).expect("fresh dir");
    let ann = UserId::new("ann").expect("valid id");
    let bo = UserId::new("bo").expect("valid id");
    live.enroll(ann.clone(), Condition::InFeedQuiz).expect("new");
    live.enroll(bo.clone(), Condition::Link).expect("new");
    for i in 0..40 {
        clock.advance(45);
        if let Item::Quiz(q) = live.next_item(&ann, Surface::Feed).expect("in-feed") {
            clock.advance(4);
            let pick = if i % 4 == 0 { (q.correct_index + 1) % q.option_count() } else { q.correct_index };
            live.answer(&ann, &q.quiz_id, pick).expect("open quiz");
        }
        if i % 10 == 0 {
            live.link_click(&bo).expect("link user");
            if let Item::Quiz(q) = live.next_item(&bo, Surface::QuizSite).expect("link user") {
                live.answer(&bo, &q.quiz_id, q.correct_index).expect("open quiz");
            }
        }
    }
    let before = live.snapshot();
    let events = live.health().events;
    drop(live);

    let restarted = Service::open(resources(), &dir, 25, clock).expect("recover");
    let same = restarted.snapshot() == before;
    println!("{events} events logged; snapshot files: {}", std::fs::read_dir(dir.join("snapshots")).map(|d| d.count()).unwrap_or(0));
    println!("state after restart identical: {same}");
    println!("ann: {:?}", restarted.metrics(&ann).expect("known"));
    let _ = std::fs::remove_dir_all(&dir);
    same
}

#[allow(dead_code)]
fn main() {
    run();
}
