//! The `edvert` command line. Output formats are documented in
//! `docs/FORMATS.md`; `--porcelain` switches to tab-separated `key=value`
//! records.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use chrono::TimeDelta;
use clap::{Args, Parser, Subcommand};

use crate::analytics::{compute_metrics, parse_log, sessionize, UserId, DEFAULT_SESSION_TIMEOUT_SECS};
use crate::engine::EngineConfig;
use crate::filter::{FilterSet, MatchDecision};
use crate::placement::{default_units, fit_slot, Condition};
use crate::service::{config::CONFIG_ENV, http, Service, ServiceConfig, SystemClock};
use crate::sim::{self, ConditionReport, SimConfig, SimReport};
use crate::vocab::Deck;

pub const EXIT_BLOCK: i32 = 0;
pub const EXIT_NO_MATCH: i32 = 1;
pub const EXIT_ALLOW: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "edvert", version, about = "Vocabulary study in feeds and ad slots")]
pub struct Cli {
    /// Tab-separated key=value output for scripts.
    #[arg(long, global = true)]
    pub porcelain: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = CONFIG_ENV)]
        config: PathBuf,
    },
    /// Match a URL against a filter list. Exit 0 block, 1 no match, 2 allow.
    Match {
        filter_list: PathBuf,
        url: String,
        /// Page URL or host the request is made from.
        #[arg(long)]
        page: Option<String>,
        /// Force third-party (default: derived from the page's domain).
        #[arg(long, conflicts_with = "first_party")]
        third_party: bool,
        #[arg(long)]
        first_party: bool,
    },
    /// Fill an ad slot with study units.
    Fit { width: u32, height: u32 },
    /// Simulate a study week under both conditions.
    Simulate(SimArgs),
    /// Run one simulation per value of a parameter.
    Sweep {
        /// Parameter name, e.g. p_engage.
        param: String,
        #[arg(required = true, num_args = 1..)]
        values: Vec<f64>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Per-user metrics from an event log.
    Report {
        log: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SESSION_TIMEOUT_SECS)]
        session_timeout_secs: i64,
    },
    /// Check that a deck parses and survives exclusions.
    DeckValidate { path: PathBuf },
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Study length in days [default: 7].
    #[arg(long)]
    pub days: Option<u32>,
    /// Chance of opening the feed on a given day.
    #[arg(long)]
    pub p_visit_day: Option<f64>,
    /// Feed visits on a visiting day.
    #[arg(long)]
    pub visits_per_day: Option<u32>,
    /// Organic feed items scrolled per visiting day.
    #[arg(long)]
    pub feed_items_per_day: Option<u32>,
    /// Chance an inserted quiz is engaged.
    #[arg(long)]
    pub p_engage: Option<f64>,
    /// Chance of engaging the next quiz right after one.
    #[arg(long)]
    pub p_continue: Option<f64>,
    /// Chance an inserted link is clicked.
    #[arg(long)]
    pub p_link_click: Option<f64>,
    /// Mean quizzes answered per link visit.
    #[arg(long)]
    pub link_quizzes_mean: Option<f64>,
    /// Memory strength of a new word, in seconds.
    #[arg(long)]
    pub initial_strength_secs: Option<f64>,
    /// Strength gain per correct first-try recall.
    #[arg(long)]
    pub strength_multiplier: Option<f64>,
    /// First RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Average over this many consecutive seeds.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Deck to draw the 50-word study set from (default: bundled deck).
    #[arg(long)]
    pub deck: Option<PathBuf>,
    /// Write the emitted event log of the first run here.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        let mut c = SimConfig {
            seed: self.seed,
            ..SimConfig::default()
        };
        macro_rules! apply {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        apply!(days, p_visit_day, visits_per_day, feed_items_per_day, p_engage, p_continue, p_link_click, link_quizzes_mean);
        if let Some(v) = self.initial_strength_secs {
            c.learner.initial_strength_secs = v;
        }
        if let Some(v) = self.strength_multiplier {
            c.learner.strength_multiplier = v;
        }
        c
    }

    fn study_set(&self) -> anyhow::Result<Deck> {
        match &self.deck {
            None => Ok(EngineConfig::sample().study_set),
            Some(p) => Ok(Deck::load(p)?.apply_exclusions()?.select_study_set(50, self.seed)?),
        }
    }
}

/// Parses `args` and runs the command, writing to `out`. Returns the exit
/// code; usage errors map to [`EXIT_USAGE`].
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", describe(&e));
            EXIT_FAILURE
        }
    }
}

/// The error chain joined by `: `, skipping causes the message already
/// spells out.
fn describe(e: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in e.chain() {
        let part = cause.to_string();
        if text.contains(&part) {
            continue;
        }
        if !text.is_empty() {
            text.push_str(": ");
        }
        text.push_str(&part);
    }
    text
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    let porcelain = cli.porcelain;
    match &cli.command {
        Command::Serve { config } => serve(config, out),
        Command::Match {
            filter_list,
            url,
            page,
            third_party,
            first_party,
        } => {
            let text = std::fs::read_to_string(filter_list).with_context(|| format!("reading {}", filter_list.display()))?;
            let set = FilterSet::parse(&text);
            let party = match (third_party, first_party) {
                (true, _) => Some(true),
                (_, true) => Some(false),
                _ => None,
            };
            let decision = set.decide(url, page.as_deref(), party)?;
            write_match(out, &decision, porcelain)?;
            Ok(match decision {
                MatchDecision::Block(_) => EXIT_BLOCK,
                MatchDecision::NoMatch => EXIT_NO_MATCH,
                MatchDecision::Allow(_) => EXIT_ALLOW,
            })
        }
        Command::Fit { width, height } => {
            match fit_slot(*width, *height, &default_units())? {
                None if porcelain => writeln!(out, "fit=none")?,
                None => writeln!(out, "no fit")?,
                Some(f) if porcelain => writeln!(
                    out,
                    "unit={}\twidth={}\theight={}\tcolumns={}\trows={}\tscale={:.6}",
                    f.unit.name, f.unit.width, f.unit.height, f.columns, f.rows, f.scale
                )?,
                Some(f) => writeln!(out, "{f}")?,
            }
            Ok(0)
        }
        Command::Simulate(args) => {
            let cfg = args.config();
            let set = args.study_set()?;
            let reports = run_seeds(&cfg, &set, args.seeds.max(1))?;
            if let Some(path) = &args.log {
                std::fs::write(path, reports[0].log_text()).with_context(|| format!("writing {}", path.display()))?;
            }
            write_sim_table(out, &[("", &reports)], porcelain)?;
            Ok(0)
        }
        Command::Sweep { param, values, sim: args } => {
            let base = args.config();
            let set = args.study_set()?;
            let mut rows = Vec::new();
            for &v in values {
                let mut cfg = base.clone();
                cfg.set(param, v)?;
                rows.push((format!("{param}={v}"), run_seeds(&cfg, &set, args.seeds.max(1))?));
            }
            let table: Vec<(&str, &[SimReport])> = rows.iter().map(|(k, r)| (k.as_str(), r.as_slice())).collect();
            write_sim_table(out, &table, porcelain)?;
            Ok(0)
        }
        Command::Report {
            log,
            session_timeout_secs,
        } => {
            let text = std::fs::read_to_string(log).with_context(|| format!("reading {}", log.display()))?;
            let events = parse_log(&text).with_context(|| log.display().to_string())?;
            if *session_timeout_secs <= 0 {
                bail!("session timeout must be positive");
            }
            let timeout = TimeDelta::seconds(*session_timeout_secs);
            // reject out-of-order logs up front
            sessionize(&events, timeout)?;
            let mut users: Vec<&UserId> = events.iter().map(|e| &e.user).collect();
            users.sort();
            users.dedup();
            if !porcelain {
                writeln!(out, "{:<16} {:>8} {:>6} {:>8} {:>10} {:>10}", "user", "answered", "wrong", "sessions", "study_days", "visit_days")?;
            }
            for user in users {
                let mine: Vec<_> = events.iter().filter(|e| &e.user == user).cloned().collect();
                let m = compute_metrics(&mine, None, timeout)?;
                if porcelain {
                    writeln!(
                        out,
                        "user={user}\tanswered={}\twrong={}\tsessions={}\tstudy_days={}\tvisit_days={}",
                        m.quizzes_answered, m.incorrect_attempts, m.study_sessions, m.distinct_study_days, m.days_visited
                    )?;
                } else {
                    writeln!(
                        out,
                        "{:<16} {:>8} {:>6} {:>8} {:>10} {:>10}",
                        user.as_str(),
                        m.quizzes_answered,
                        m.incorrect_attempts,
                        m.study_sessions,
                        m.distinct_study_days,
                        m.days_visited
                    )?;
                }
            }
            Ok(0)
        }
        Command::DeckValidate { path } => {
            let deck = Deck::load(path)?;
            let kept = deck.apply_exclusions()?;
            if porcelain {
                writeln!(out, "status=ok\twords={}\tafter_exclusions={}", deck.len(), kept.len())?;
            } else {
                writeln!(out, "ok: {} words, {} after exclusions", deck.len(), kept.len())?;
            }
            Ok(0)
        }
    }
}

fn write_match(out: &mut dyn Write, decision: &MatchDecision, porcelain: bool) -> std::io::Result<()> {
    let verdict = decision.verdict();
    match (decision.rule(), porcelain) {
        (Some(rule), true) => writeln!(out, "verdict={verdict}\trule={}", rule.raw),
        (None, true) => writeln!(out, "verdict={verdict}"),
        (Some(rule), false) => writeln!(out, "{verdict} {}", rule.raw),
        (None, false) => writeln!(out, "{verdict}"),
    }
}

fn run_seeds(cfg: &SimConfig, set: &Deck, seeds: u64) -> anyhow::Result<Vec<SimReport>> {
    (0..seeds)
        .map(|i| {
            let c = SimConfig {
                seed: cfg.seed + i,
                ..cfg.clone()
            };
            Ok(sim::run_sim(&c, set)?)
        })
        .collect()
}

fn write_sim_table(out: &mut dyn Write, groups: &[(&str, &[SimReport])], porcelain: bool) -> std::io::Result<()> {
    type Column = (&'static str, fn(&ConditionReport) -> f64);
    let cols: [Column; 7] = [
        ("answered", |r| r.quizzes_answered as f64),
        ("wrong", |r| r.incorrect_attempts as f64),
        ("sessions", |r| r.study_sessions as f64),
        ("study_days", |r| r.distinct_study_days as f64),
        ("visit_days", |r| r.days_visited as f64),
        ("posttest", |r| r.posttest_expected_words),
        ("learned", |r| r.words_learned as f64),
    ];
    let labelled = groups.iter().any(|(k, _)| !k.is_empty());
    if !porcelain {
        if labelled {
            write!(out, "{:<24} ", "run")?;
        }
        write!(out, "{:<14}", "condition")?;
        for (name, _) in &cols {
            write!(out, " {name:>10}")?;
        }
        writeln!(out)?;
    }
    for (label, reports) in groups {
        for c in [Condition::InFeedQuiz, Condition::Link] {
            if porcelain {
                if labelled {
                    write!(out, "run={label}\t")?;
                }
                write!(out, "condition={c}")?;
                for (name, f) in &cols {
                    write!(out, "\t{name}={:.3}", sim::mean(reports, c, f))?;
                }
                writeln!(out)?;
            } else {
                if labelled {
                    write!(out, "{label:<24} ")?;
                }
                write!(out, "{:<14}", c.as_str())?;
                for (_, f) in &cols {
                    write!(out, " {:>10.2}", sim::mean(reports, c, f))?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn serve(config_path: &Path, out: &mut dyn Write) -> anyhow::Result<i32> {
    let config = ServiceConfig::load(config_path)?;
    let resources = config.resources()?;
    let service = Service::open(resources, &config.data_dir, config.snapshot_every, SystemClock)
        .with_context(|| format!("recovering {}", config.data_dir.display()))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&config.listen)
            .await
            .with_context(|| format!("binding {}", config.listen))?;
        writeln!(out, "listening on {}", listener.local_addr()?)?;
        out.flush()?;
        axum::serve(listener, http::router(Arc::new(service)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(0)
    })
}
