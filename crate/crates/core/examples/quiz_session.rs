//! One learner working through the in-feed flow: intro cards, quizzes,
//! a wrong answer with feedback, then the retry.
//!
//!     cargo run --example quiz_session

use chrono::{DateTime, FixedOffset, TimeDelta};
use edvert::engine::{Engine, EngineConfig, Item, Surface};
use edvert::placement::Condition;
use edvert::quizgen::NextAction;
use edvert::UserId;
use std::sync::Arc;

pub fn run() -> edvert::Metrics {
    let mut engine = Engine::new(Arc::new(EngineConfig::sample()));
    let user = UserId::new("ann").expect("valid id");
    let mut now: DateTime<FixedOffset> = DateTime::parse_from_rfc3339("2026-01-05T09:00:00+09:00").expect("literal");
    engine.enroll(user.clone(), Condition::InFeedQuiz, now).expect("new user");

    for step in 0..8 {
        now += TimeDelta::seconds(40);
        match engine.next_item(&user, Surface::Feed, now).expect("in-feed user") {
            Item::IntroCard(card) => println!("intro  {} = {}", card.romanized, card.gloss),
            Item::Quiz(quiz) => {
                let texts: Vec<&str> = quiz.options.iter().map(|o| o.display_text.as_str()).collect();
                println!("quiz   {} [{}] -> {:?}", quiz.quiz_id, quiz.prompt_text, texts);
                // miss every third quiz on purpose
                if step % 3 == 0 {
                    let wrong = (quiz.correct_index + 1) % quiz.option_count();
                    now += TimeDelta::seconds(5);
                    let r = engine.answer(&user, &quiz.quiz_id, wrong, now).expect("open quiz");
                    let fb = r.feedback.expect("wrong answers carry feedback");
                    println!("       picked {:?}: that means {:?}, try again", texts[wrong], fb.chosen_meaning);
                    assert_eq!(r.next_action, NextAction::Retry);
                }
                now += TimeDelta::seconds(5);
                let r = engine.answer(&user, &quiz.quiz_id, quiz.correct_index, now).expect("open quiz");
                println!("       correct, {:?}", r.next_action);
            }
        }
    }
    let metrics = engine.metrics(&user).expect("known user");
    println!("{metrics:?}");
    metrics
}

#[allow(dead_code)]
fn main() {
    run();
}
