//! Where study items go in a feed, and which kind each slot will show.
//!
//!     cargo run --example feed_plan

use edvert::placement::{plan_feed, Condition, ItemKind};
use edvert::scheduler::{Ladder, SchedulerState, Timestamp};
use edvert::EngineConfig;

pub fn run() -> Vec<ItemKind> {
    let deck = EngineConfig::sample().study_set;
    let scheduler = SchedulerState::new(&deck, Ladder::default(), Timestamp(0)).expect("non-empty deck");

    for len in [9, 25, 30] {
        let plan = plan_feed(len, 10, Condition::InFeedQuiz).expect("positive rate");
        println!("{len:>3} posts -> study items at {:?}", plan.positions());
    }

    let mut plan = plan_feed(60, 10, Condition::InFeedQuiz).expect("positive rate");
    plan.resolve_kinds(&scheduler, Timestamp(0));
    let kinds: Vec<ItemKind> = plan.items.iter().map(|i| i.kind).collect();
    println!("fresh learner, 60 posts: {kinds:?}");

    let link = plan_feed(30, 10, Condition::Link).expect("positive rate");
    println!("link condition, 30 posts: {:?}", link.items.iter().map(|i| i.kind).collect::<Vec<_>>());
    kinds
}

#[allow(dead_code)]
fn main() {
    run();
}
