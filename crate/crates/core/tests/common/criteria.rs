//! One check per acceptance criterion. Each returns a short detail line on
//! success and the first disagreement on failure.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, FixedOffset, TimeDelta};
use edvert::analytics::{compute_metrics, parse_log, sessionize, EventLog, SessionTrigger};
use edvert::engine::{EngineConfig, Item, Surface};
use edvert::placement::{default_units, fit_slot, plan_feed, Condition, ItemKind};
use edvert::quizgen::{make_quiz, Direction, NextAction, QuizId};
use edvert::scheduler::{Display, Ladder, SchedulerState, Timestamp};
use edvert::service::{ManualClock, Resources, Service};
use edvert::sim::{mean, run_sim, SimConfig};
use edvert::vocab::{Deck, WordEntry, WordId};
use edvert::{FilterSet, MatchDecision, UserId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(started: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = started.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

// ------------------------------------------------------------------ filter

fn verdict_of(d: &MatchDecision) -> (&'static str, Option<String>) {
    let v = match d {
        MatchDecision::Block(_) => "block",
        MatchDecision::Allow(_) => "allow",
        MatchDecision::NoMatch => "no-match",
    };
    (v, d.rule().map(|r| r.raw.clone()))
}

pub fn filter_oracle() -> Outcome {
    let started = Instant::now();
    let mut cases = 0usize;
    let mut compare = |set: &FilterSet, oracle: &[OracleRule]| -> Result<(), String> {
        for url in CORPUS_URLS {
            for page in CORPUS_PAGES {
                for tp in [false, true] {
                    let got = set.matches(url, page, tp).map_err(|e| format!("{url}: {e}"))?;
                    let want = oracle_decide(oracle, url, page, tp);
                    cases += 1;
                    ensure(verdict_of(&got) == want, || {
                        format!("url={url} page={page:?} third_party={tp}: got {:?}, oracle {want:?}", verdict_of(&got))
                    })?;
                }
            }
        }
        Ok(())
    };
    for rule in CORPUS_RULES {
        let oracle: Vec<OracleRule> = oracle_rule(rule).into_iter().collect();
        ensure(oracle.len() == 1, || format!("corpus rule {rule} is outside the oracle's syntax"))?;
        compare(&FilterSet::parse(rule), &oracle)?;
    }
    let all = CORPUS_RULES.join("\n");
    let oracle: Vec<OracleRule> = CORPUS_RULES.iter().filter_map(|r| oracle_rule(r)).collect();
    compare(&FilterSet::parse(&all), &oracle)?;

    let sample = include_str!("../../data/sample_filters.txt");
    let set = FilterSet::parse(sample);
    let oracle: Vec<OracleRule> = sample.lines().filter_map(oracle_rule).collect();
    ensure(oracle.len() == set.rule_count(), || {
        format!("sample list: oracle keeps {} rules, matcher {}", oracle.len(), set.rule_count())
    })?;
    compare(&set, &oracle)?;

    within(started, Duration::from_secs(5), "filter corpus")?;
    Ok(format!("{cases} cases agree in {:?}", started.elapsed()))
}

// ------------------------------------------------------------------ layout

pub fn layout_oracle() -> Outcome {
    let started = Instant::now();
    let units = default_units();
    let dims: Vec<(u32, u32)> = units.iter().map(|u| (u.width, u.height)).collect();

    let banner = fit_slot(728, 90, &units).map_err(|e| e.to_string())?;
    let ok = banner.as_ref().is_some_and(|f| {
        (f.unit.width, f.unit.height, f.columns, f.rows) == (200, 90, 3, 1) && f.scale == 1.0
    });
    ensure(ok, || format!("728x90 gave {banner:?}"))?;

    let mut slots = 0;
    for w in (50..=1000).step_by(50) {
        for h in (50..=1000).step_by(50) {
            slots += 1;
            let got = fit_slot(w, h, &units).map_err(|e| e.to_string())?;
            let want = oracle_fit(w, h, &dims);
            match (&got, &want) {
                (None, None) => {}
                (Some(g), Some(o)) => {
                    ensure(
                        (g.unit.width, g.unit.height, g.columns, g.rows) == (o.unit.0, o.unit.1, o.columns, o.rows)
                            && (g.scale - o.scale).abs() < 1e-12,
                        || format!("{w}x{h}: got {g:?}, oracle {o:?}"),
                    )?;
                    let fits = f64::from(g.columns * g.unit.width) * g.scale <= f64::from(w) + 1e-9
                        && f64::from(g.rows * g.unit.height) * g.scale <= f64::from(h) + 1e-9;
                    ensure(fits && (0.5..=1.0).contains(&g.scale), || format!("{w}x{h}: {g:?} overflows"))?;
                }
                _ => return Err(format!("{w}x{h}: got {got:?}, oracle {want:?}")),
            }
        }
    }
    within(started, Duration::from_secs(10), "layout grid")?;
    Ok(format!("728x90 -> 3x(200x90) @1.0; {slots} grid slots agree"))
}

// --------------------------------------------------------------- insertion

pub fn insertion_rate() -> Outcome {
    let started = Instant::now();
    for len in 0..500usize {
        for condition in [Condition::InFeedQuiz, Condition::Link] {
            let plan = plan_feed(len, 10, condition).map_err(|e| e.to_string())?;
            let positions = plan.positions();
            let expected: Vec<usize> = (1..=len / 10).map(|i| 10 * i).collect();
            ensure(positions == expected, || format!("L={len} {condition}: {positions:?}"))?;
            if condition == Condition::Link {
                ensure(plan.items.iter().all(|i| i.kind == ItemKind::Link), || {
                    format!("L={len}: link plan holds non-link items")
                })?;
            }
        }
    }
    within(started, Duration::from_secs(1), "insertion plans")?;
    Ok("|positions| = floor(L/10) for L in 0..500".into())
}

// --------------------------------------------------------------- scheduler

pub fn toy_deck(n: usize) -> Deck {
    let entries = (0..n)
        .map(|i| WordEntry {
            id: WordId::new(format!("w{i}")),
            romanized: format!("roma{i}"),
            native: None,
            gloss: format!("gloss {i}"),
            pos: "noun".into(),
            loanword: false,
        })
        .collect();
    Deck::from_entries("toy", entries).expect("toy deck is valid")
}

fn index_of(id: &WordId) -> usize {
    id.as_str()[1..].parse().expect("toy ids are w<index>")
}

/// Applies the same operation to the real scheduler and the reference model.
pub fn step_both(
    real: &mut SchedulerState,
    model: &mut RefScheduler,
    now: i64,
    op: u8,
) -> Result<(), String> {
    let sel = real.next_word(Timestamp(now));
    let (want, want_new) = model.next(now);
    let got = index_of(sel.word_id);
    ensure((got, sel.is_new) == (want, want_new), || {
        format!("t={now}: selected ({got}, new={}), model ({want}, new={want_new})", sel.is_new)
    })?;
    let id = WordId::new(format!("w{got}"));
    let display = if want_new { Display::Introduction } else { Display::Review };
    real.record_impression(&id, Timestamp(now), display).map_err(|e| e.to_string())?;
    model.impression(got, now, want_new);
    if op > 0 {
        let correct = op == 1;
        real.record_answer(&id, correct, Timestamp(now)).map_err(|e| e.to_string())?;
        model.answer(got, correct, now);
    }
    for (i, w) in real.words().iter().enumerate() {
        let same = w.introduced == model.introduced[i]
            && w.box_index == model.boxes[i]
            && w.due_at.0 == model.due[i]
            && w.last_feed_at.map(|t| t.0) == model.last[i];
        ensure(same, || format!("t={now}: word {i} diverged: {w:?}"))?;
    }
    Ok(())
}

pub fn scheduler_rotation() -> Outcome {
    let started = Instant::now();
    for k in 1..=50usize {
        let deck = toy_deck(k);
        let mut s = SchedulerState::new(&deck, Ladder::default(), Timestamp(0)).map_err(|e| e.to_string())?;
        // introduce each word and answer it once, so the next one is new
        for t in 0..k as i64 {
            let sel = s.next_word(Timestamp(t));
            ensure(sel.is_new, || format!("k={k}: expected a new word at t={t}"))?;
            let id = sel.word_id.clone();
            s.record_impression(&id, Timestamp(t), Display::Introduction).map_err(|e| e.to_string())?;
            s.record_answer(&id, true, Timestamp(t)).map_err(|e| e.to_string())?;
        }
        let mut seen = HashSet::new();
        for i in 0..k as i64 {
            let now = Timestamp(10_000 + i);
            let sel = s.next_word(now);
            ensure(s.is_overdue(sel.word_id, now), || format!("k={k}: non-overdue pick"))?;
            let id = sel.word_id.clone();
            ensure(seen.insert(id.clone()), || format!("k={k}: {id} repeated within {k} picks"))?;
            s.record_impression(&id, now, Display::Review).map_err(|e| e.to_string())?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut steps = 0;
    for trial in 0..1000 {
        let n = rng.random_range(1..=12);
        let ladder: Vec<i64> = vec![30, 300, 1_800, 7_200];
        let mut real = SchedulerState::new(&toy_deck(n), Ladder::from_secs(ladder.clone()).unwrap(), Timestamp(0))
            .map_err(|e| e.to_string())?;
        let mut model = RefScheduler::new(n, ladder, 0);
        let mut now = 0i64;
        for _ in 0..rng.random_range(1..60) {
            now += [0, 1, 10, 60, 400, 3_000][rng.random_range(0..6)];
            let sel = real.next_word(Timestamp(now));
            let any_overdue = real.words().iter().any(|w| w.introduced && w.due_at.0 <= now);
            if any_overdue {
                ensure(!sel.is_new && real.is_overdue(sel.word_id, Timestamp(now)), || {
                    format!("trial {trial}: overdue word skipped at t={now}")
                })?;
            } else if real.cursor() < n {
                ensure(sel.is_new, || format!("trial {trial}: new word withheld at t={now}"))?;
            }
            step_both(&mut real, &mut model, now, rng.random_range(0..3)).map_err(|e| format!("trial {trial}: {e}"))?;
            steps += 1;
        }
    }
    within(started, Duration::from_secs(10), "scheduler trials")?;
    Ok(format!("k<=50 rotation distinct; 1000 trials ({steps} steps) match the reference model"))
}

pub fn spacing_monotonicity() -> Outcome {
    let mut patterns = 0;
    for len in 1..=8usize {
        let ladder: Vec<i64> = (0..len as i64).map(|i| 30 * 3i64.pow(i as u32)).collect();
        let deck = toy_deck(1);
        let w = WordId::new("w0");
        let fresh = || -> Result<SchedulerState, String> {
            let mut s = SchedulerState::new(&deck, Ladder::from_secs(ladder.clone()).unwrap(), Timestamp(0))
                .map_err(|e| e.to_string())?;
            s.record_impression(&w, Timestamp(0), Display::Introduction).map_err(|e| e.to_string())?;
            Ok(s)
        };

        // a run of correct answers widens the gap until the top box
        let mut s = fresh()?;
        let mut prev_gap = 0;
        for i in 0..len + 3 {
            let now = 1_000 * (i as i64 + 1);
            s.record_answer(&w, true, Timestamp(now)).map_err(|e| e.to_string())?;
            let gap = s.word(&w).unwrap().due_at.0 - now;
            if i + 1 < len {
                ensure(gap > prev_gap, || format!("ladder len {len}: gap {gap} after {prev_gap}"))?;
            } else {
                ensure(gap == ladder[len - 1], || format!("ladder len {len}: saturated gap {gap}"))?;
            }
            prev_gap = gap;
        }
        s.record_answer(&w, false, Timestamp(100_000)).map_err(|e| e.to_string())?;
        let st = s.word(&w).unwrap();
        ensure(st.box_index == 0 && st.due_at.0 == 100_000 + ladder[0], || {
            format!("ladder len {len}: wrong answer left {st:?}")
        })?;

        // every answer pattern of length 8 against the reference model
        for bits in 0u32..256 {
            let mut real = fresh()?;
            let mut model = RefScheduler::new(1, ladder.clone(), 0);
            model.impression(0, 0, true);
            for j in 0..8 {
                let now = 500 * (j + 1);
                let correct = bits >> j & 1 == 1;
                real.record_answer(&w, correct, Timestamp(now)).map_err(|e| e.to_string())?;
                model.answer(0, correct, now);
                let st = real.word(&w).unwrap();
                ensure(st.box_index == model.boxes[0] && st.due_at.0 == model.due[0], || {
                    format!("ladder len {len}, pattern {bits:08b}: {st:?}")
                })?;
            }
            patterns += 1;
        }
    }
    Ok(format!("ladder lengths 1..=8, {patterns} answer patterns"))
}

// -------------------------------------------------------------------- quiz

pub fn quiz_integrity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sample = EngineConfig::sample().study_set;
    for draw in 0..10_000 {
        let deck = if rng.random_bool(0.5) {
            sample.clone()
        } else {
            toy_deck(rng.random_range(2..=30))
        };
        let k = rng.random_range(2..=deck.len().min(6));
        let word = deck.entries()[rng.random_range(0..deck.len())].id.clone();
        let direction = if rng.random_bool(0.5) { Direction::EnToTarget } else { Direction::TargetToEn };
        let seed = rng.random();
        let quiz = make_quiz(QuizId(format!("q{draw}")), &word, &deck, direction, k, seed).map_err(|e| e.to_string())?;
        let ctx = || format!("draw {draw} ({word}, k={k}, {direction:?}, seed {seed})");

        ensure(quiz.options.len() == k, || format!("{}: {} options", ctx(), quiz.options.len()))?;
        let hits = quiz.options.iter().filter(|o| o.word_id == word).count();
        ensure(hits == 1 && quiz.options[quiz.correct_index].word_id == word, || {
            format!("{}: correct option misplaced", ctx())
        })?;
        let ids: HashSet<_> = quiz.options.iter().map(|o| &o.word_id).collect();
        let texts: HashSet<_> = quiz.options.iter().map(|o| &o.display_text).collect();
        ensure(ids.len() == k && texts.len() == k, || format!("{}: duplicate options", ctx()))?;

        let right = quiz.check_answer(quiz.correct_index).map_err(|e| e.to_string())?;
        ensure(right.correct && right.feedback.is_none() && right.next_action == NextAction::Advance, || {
            format!("{}: correct index rejected", ctx())
        })?;
        for (i, o) in quiz.options.iter().enumerate().filter(|(i, _)| *i != quiz.correct_index) {
            let r = quiz.check_answer(i).map_err(|e| e.to_string())?;
            let gloss = &deck.get(&o.word_id).unwrap().gloss;
            let fb = r.feedback.as_ref();
            ensure(
                !r.correct
                    && r.next_action == NextAction::Retry
                    && fb.is_some_and(|f| &f.chosen_meaning == gloss && f.chosen_word_id == o.word_id),
                || format!("{}: feedback for option {i} is {fb:?}, gloss {gloss:?}", ctx()),
            )?;
        }
    }
    Ok("10000 draws".into())
}

pub fn exclusions() -> Outcome {
    let deck = Deck::sample();
    for id in ["hana-flower", "hana-nose", "pinku"] {
        ensure(deck.get(&WordId::new(id)).is_some(), || format!("bundled deck lacks {id}"))?;
    }
    let once = deck.apply_exclusions().map_err(|e| e.to_string())?;
    for id in ["hana-flower", "hana-nose", "pinku"] {
        ensure(once.get(&WordId::new(id)).is_none(), || format!("{id} survived exclusions"))?;
    }
    let twice = once.apply_exclusions().map_err(|e| e.to_string())?;
    ensure(once == twice, || "exclusions are not idempotent".into())?;
    Ok(format!("{} -> {} words; hana pair and pinku removed; idempotent", deck.len(), once.len()))
}

// ---------------------------------------------------------- event sourcing

pub fn start() -> DateTime<FixedOffset> {
    DateTime::parse_from_rfc3339("2026-01-05T08:00:00+09:00").unwrap()
}

pub fn resources() -> Resources {
    Resources {
        engine: EngineConfig::sample(),
        filters: FilterSet::parse(""),
        units: default_units(),
    }
}

/// Drives `events` mixed requests through services built by `open`,
/// reopening after every `restart_every` events (0: never).
pub fn drive(
    events: usize,
    restart_every: usize,
    open: &dyn Fn(Arc<ManualClock>) -> Service,
) -> Result<String, String> {
    let clock = Arc::new(ManualClock::new(start()));
    let mut svc = open(clock.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let users: Vec<(UserId, Condition)> = vec![
        (UserId::new("feed-a").unwrap(), Condition::InFeedQuiz),
        (UserId::new("feed-b").unwrap(), Condition::InFeedQuiz),
        (UserId::new("link-c").unwrap(), Condition::Link),
    ];
    let mut open_quizzes: Vec<Vec<(QuizId, usize)>> = vec![Vec::new(); users.len()];
    let mut last_restart = 0;
    for (u, c) in &users {
        svc.enroll(u.clone(), *c).map_err(|e| e.to_string())?;
    }
    let mut guard = 0;
    while svc.health().events < events {
        guard += 1;
        if guard > events * 20 {
            return Err("driver made no progress".into());
        }
        clock.advance([1, 5, 30, 120, 2_000, 40_000][rng.random_range(0..6)]);
        let ui = rng.random_range(0..users.len());
        let (user, condition) = &users[ui];
        let surface = if *condition == Condition::Link { Surface::QuizSite } else { Surface::Feed };
        match rng.random_range(0..10) {
            0 => {
                let _ = svc.feed_render(user, rng.random_range(1..80));
            }
            1 => {
                let _ = svc.link_click(user);
            }
            2..=4 => {
                if let Ok(Item::Quiz(q)) = svc.next_item(user, surface) {
                    open_quizzes[ui].push((q.quiz_id.clone(), q.options.len()));
                }
            }
            5 => {
                if let Some((q, _)) = open_quizzes[ui].last() {
                    let _ = svc.engage(user, q);
                }
            }
            _ => {
                if !open_quizzes[ui].is_empty() {
                    let pick = rng.random_range(0..open_quizzes[ui].len());
                    let (q, k) = open_quizzes[ui][pick].clone();
                    match svc.answer(user, &q, rng.random_range(0..k)) {
                        Ok(r) if r.correct => {
                            open_quizzes[ui].remove(pick);
                        }
                        Ok(_) => {}
                        Err(_) => {
                            open_quizzes[ui].remove(pick);
                        }
                    }
                }
            }
        }
        let applied = svc.health().events;
        if restart_every > 0 && applied >= last_restart + restart_every {
            last_restart = applied;
            drop(svc);
            svc = open(clock.clone());
        }
    }
    Ok(svc.snapshot())
}

pub fn event_sourcing() -> Outcome {
    const EVENTS: usize = 1_000;
    let straight_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let killed_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opener = |dir: std::path::PathBuf| {
        move |clock: Arc<ManualClock>| Service::open(resources(), &dir, 100, clock).expect("data dir opens")
    };
    let memory = drive(EVENTS, 0, &|clock| Service::in_memory(resources(), clock))?;
    let straight = drive(EVENTS, 0, &opener(straight_dir.path().to_owned()))?;
    let killed = drive(EVENTS, 137, &opener(killed_dir.path().to_owned()))?;
    ensure(straight == memory, || "persisted run differs from the in-memory run".into())?;
    ensure(killed == straight, || "restarted run differs from the uninterrupted run".into())?;
    let reopened = Service::open(resources(), killed_dir.path(), 100, ManualClock::new(start()))
        .map_err(|e| e.to_string())?
        .snapshot();
    ensure(reopened == straight, || "final recovery differs".into())?;
    Ok(format!("{EVENTS} events, restarts every 137: snapshots identical ({} bytes)", straight.len()))
}

// --------------------------------------------------------------- analytics

pub const WEEK_LOG: &str = include_str!("../fixtures/week.log");

/// (user, answered, wrong, sessions, study days, visit days), replayed by
/// hand from the fixture.
pub const WEEK_EXPECTED: [(&str, usize, usize, usize, usize, usize); 2] =
    [("u1", 12, 2, 6, 3, 5), ("u2", 2, 0, 3, 1, 1)];

pub fn analytics_fixture() -> Outcome {
    let events = parse_log(WEEK_LOG).map_err(|e| e.to_string())?;
    EventLog::from_events(events.clone()).map_err(|e| e.to_string())?;
    let timeout = TimeDelta::minutes(30);
    for (user, answered, wrong, sessions, study, visits) in WEEK_EXPECTED {
        let mine: Vec<_> = events.iter().filter(|e| e.user.as_str() == user).cloned().collect();
        let m = compute_metrics(&mine, None, timeout).map_err(|e| e.to_string())?;
        let got = (m.quizzes_answered, m.incorrect_attempts, m.study_sessions, m.distinct_study_days, m.days_visited);
        ensure(got == (answered, wrong, sessions, study, visits), || format!("{user}: {got:?}"))?;
    }

    let sessions = sessionize(&events, timeout).map_err(|e| e.to_string())?;
    let starts = |user: &str, trigger: SessionTrigger| -> Vec<String> {
        sessions
            .iter()
            .filter(|s| s.user.as_str() == user && s.trigger == trigger)
            .map(|s| s.start_ts.format("%m-%d %H:%M:%S").to_string())
            .collect()
    };
    let u1 = starts("u1", SessionTrigger::FirstEngagement);
    let u1_expected = [
        "01-05 09:00:40",
        "01-05 10:10:09",
        "01-07 08:01:00",
        "01-07 23:50:00",
        "01-08 12:00:20",
        "01-10 19:00:20",
    ];
    ensure(u1 == u1_expected, || format!("u1 engagement sessions start at {u1:?}"))?;
    let u2 = starts("u2", SessionTrigger::LinkClick);
    ensure(u2 == ["01-05 10:00:30", "01-05 10:05:00", "01-06 09:00:00"], || {
        format!("u2 link sessions start at {u2:?}")
    })?;
    ensure(sessions.len() == 9, || format!("{} sessions in total", sessions.len()))?;
    Ok("u1 {12, 6 sessions, 3 study days, 5 visit days}; u2 {2, 3 link sessions}".into())
}

// --------------------------------------------------------------- simulator

pub const SIM_SEEDS: u64 = 30;
pub const POSTTEST_RATIO: f64 = 2.0;

pub fn simulator() -> Outcome {
    let started = Instant::now();
    let deck = EngineConfig::sample().study_set;
    let runs = |cfg: &SimConfig| -> Result<Vec<_>, String> {
        (0..SIM_SEEDS)
            .map(|seed| run_sim(&SimConfig { seed, ..cfg.clone() }, &deck).map_err(|e| e.to_string()))
            .collect()
    };
    let base = runs(&SimConfig::default())?;
    let posttest = |c| mean(&base, c, |r| r.posttest_expected_words);
    let answers = |c| mean(&base, c, |r| r.quizzes_answered as f64);
    let sessions = |c| mean(&base, c, |r| r.study_sessions as f64);
    let (feed, link) = (Condition::InFeedQuiz, Condition::Link);
    ensure(posttest(feed) >= POSTTEST_RATIO * posttest(link), || {
        format!("posttest {:.2} vs {:.2}", posttest(feed), posttest(link))
    })?;
    ensure(answers(feed) > answers(link) && sessions(feed) > sessions(link), || {
        format!(
            "answers {:.1} vs {:.1}, sessions {:.1} vs {:.1}",
            answers(feed),
            answers(link),
            sessions(feed),
            sessions(link)
        )
    })?;

    let mut prev = f64::NEG_INFINITY;
    let mut sweep = Vec::new();
    for p in [0.0, 0.1, 0.2, 0.3] {
        let reports = runs(&SimConfig { p_engage: p, ..SimConfig::default() })?;
        let m = mean(&reports, feed, |r| r.quizzes_answered as f64);
        ensure(m >= prev, || format!("p_engage={p}: mean answers {m:.2} fell below {prev:.2}"))?;
        prev = m;
        sweep.push(format!("{m:.1}"));
    }
    within(started, Duration::from_secs(60), "simulator sweep")?;
    Ok(format!(
        "posttest {:.2} vs {:.2}; answers {:.1} vs {:.1}; sessions {:.1} vs {:.1}; p_engage sweep [{}]; {:?}",
        posttest(feed),
        posttest(link),
        answers(feed),
        answers(link),
        sessions(feed),
        sessions(link),
        sweep.join(", "),
        started.elapsed()
    ))
}
