//! A simulated study week under both conditions, averaged over seeds.
//!
//!     cargo run --release --example study_simulation

use edvert::placement::Condition;
use edvert::sim::{mean, run_sim, SimConfig, SimReport};
use edvert::EngineConfig;

pub fn run(seeds: u64) -> Vec<SimReport> {
    let study_set = EngineConfig::sample().study_set;
    let reports: Vec<SimReport> = (0..seeds)
        .map(|seed| run_sim(&SimConfig { seed, ..SimConfig::default() }, &study_set).expect("default config is valid"))
        .collect();
    println!("{:<14} {:>9} {:>9} {:>11} {:>9}", "condition", "answered", "sessions", "study days", "posttest");
    for c in [Condition::InFeedQuiz, Condition::Link] {
        println!(
            "{:<14} {:>9.1} {:>9.1} {:>11.2} {:>9.2}",
            c.as_str(),
            mean(&reports, c, |r| r.quizzes_answered as f64),
            mean(&reports, c, |r| r.study_sessions as f64),
            mean(&reports, c, |r| r.distinct_study_days as f64),
            mean(&reports, c, |r| r.posttest_expected_words),
        );
    }
    reports
}

#[allow(dead_code)]
fn main() {
    run(30);
}
