//! Tab-separated event lines: `ts<TAB>user<TAB>kind[<TAB>field…]`.
//!
//! `ts` is RFC 3339 with seconds precision and an explicit offset. Every
//! record ends with `\n`; a final line without one is treated as truncated.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, SecondsFormat};
use thiserror::Error;

use super::{Event, EventKind, UserId};
use crate::quizgen::QuizId;
use crate::vocab::WordId;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("event log line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t",
            self.ts.to_rfc3339_opts(SecondsFormat::Secs, false),
            self.user
        )?;
        match &self.kind {
            EventKind::Enroll { condition } => write!(f, "enroll\t{condition}"),
            EventKind::Impression { quiz_id, word_id } => write!(f, "impression\t{quiz_id}\t{word_id}"),
            EventKind::IntroShown { word_id } => write!(f, "intro\t{word_id}"),
            EventKind::Engage { quiz_id } => write!(f, "engage\t{quiz_id}"),
            EventKind::Answer {
                quiz_id,
                word_id,
                chosen_index,
                correct,
            } => write!(
                f,
                "answer\t{quiz_id}\t{word_id}\t{chosen_index}\t{}",
                u8::from(*correct)
            ),
            EventKind::LinkClick => f.write_str("link_click"),
            EventKind::FeedRender { items } => write!(f, "feed_render\t{items}"),
        }
    }
}

fn token(s: &str, what: &str) -> Result<String, String> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        Err(format!("invalid {what} {s:?}"))
    } else {
        Ok(s.to_owned())
    }
}

fn number<T: FromStr>(s: &str, what: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("invalid {what} {s:?}"))
}

impl FromStr for Event {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err("expected at least 3 tab-separated fields".into());
        }
        let ts = DateTime::<FixedOffset>::parse_from_rfc3339(fields[0])
            .map_err(|e| format!("invalid timestamp {:?}: {e}", fields[0]))?;
        let user = UserId::new(fields[1]).map_err(|e| e.to_string())?;
        let args = &fields[3..];
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(format!("{} expects {n} fields, found {}", fields[2], args.len()))
            }
        };
        let kind = match fields[2] {
            "enroll" => {
                arity(1)?;
                EventKind::Enroll {
                    condition: args[0].parse()?,
                }
            }
            "impression" => {
                arity(2)?;
                EventKind::Impression {
                    quiz_id: QuizId(token(args[0], "quiz id")?),
                    word_id: WordId::new(token(args[1], "word id")?),
                }
            }
            "intro" => {
                arity(1)?;
                EventKind::IntroShown {
                    word_id: WordId::new(token(args[0], "word id")?),
                }
            }
            "engage" => {
                arity(1)?;
                EventKind::Engage {
                    quiz_id: QuizId(token(args[0], "quiz id")?),
                }
            }
            "answer" => {
                arity(4)?;
                EventKind::Answer {
                    quiz_id: QuizId(token(args[0], "quiz id")?),
                    word_id: WordId::new(token(args[1], "word id")?),
                    chosen_index: number(args[2], "option index")?,
                    correct: match args[3] {
                        "0" => false,
                        "1" => true,
                        other => return Err(format!("invalid correctness flag {other:?}")),
                    },
                }
            }
            "link_click" => {
                arity(0)?;
                EventKind::LinkClick
            }
            "feed_render" => {
                arity(1)?;
                EventKind::FeedRender {
                    items: number(args[0], "item count")?,
                }
            }
            other => return Err(format!("unknown event kind {other:?}")),
        };
        Ok(Event { ts, user, kind })
    }
}

/// Parses a whole log. Fails fast at the first bad or truncated line.
pub fn parse_log(text: &str) -> Result<Vec<Event>, ParseError> {
    let mut events = Vec::new();
    let mut rest = text;
    let mut line_no = 0;
    while !rest.is_empty() {
        line_no += 1;
        let Some(end) = rest.find('\n') else {
            return Err(ParseError {
                line: line_no,
                reason: "truncated record (missing newline)".into(),
            });
        };
        let line = &rest[..end];
        rest = &rest[end + 1..];
        let event = line.parse::<Event>().map_err(|reason| ParseError { line: line_no, reason })?;
        events.push(event);
    }
    Ok(events)
}
