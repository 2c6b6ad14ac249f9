//! Multiple-choice quizzes in both directions, answer checking with
//! retry-on-wrong semantics, and introduction cards.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheduler::{SchedulerState, Timestamp};
use crate::vocab::{Deck, WordEntry, WordId};

pub const DEFAULT_OPTION_COUNT: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuizError {
    #[error("study set offers {available} usable options, need {needed}")]
    TooSmall { needed: usize, available: usize },
    #[error("option count must be at least 1")]
    ZeroOptions,
    #[error("word {0} is not in the study set")]
    UnknownWord(WordId),
    #[error("choice {index} out of range for {options} options")]
    IndexOutOfRange { index: usize, options: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuizId(pub String);

impl fmt::Display for QuizId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for QuizId {
    fn from(s: &str) -> Self {
        QuizId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// English gloss shown, pick the romanized target word.
    EnToTarget,
    /// Romanized target word shown, pick the English gloss.
    TargetToEn,
}

impl Direction {
    /// Even display counts quiz English→target, odd ones the reverse.
    pub fn for_display(counter: u64) -> Direction {
        if counter.is_multiple_of(2) {
            Direction::EnToTarget
        } else {
            Direction::TargetToEn
        }
    }

    fn prompt(self, e: &WordEntry) -> &str {
        match self {
            Direction::EnToTarget => &e.gloss,
            Direction::TargetToEn => &e.romanized,
        }
    }

    fn option_text(self, e: &WordEntry) -> &str {
        match self {
            Direction::EnToTarget => &e.romanized,
            Direction::TargetToEn => &e.gloss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizOption {
    pub word_id: WordId,
    pub display_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Quiz {
    pub quiz_id: QuizId,
    pub direction: Direction,
    pub prompt_word: WordId,
    pub prompt_text: String,
    pub options: Vec<QuizOption>,
    pub correct_index: usize,
    /// Gloss of each option's word, used for wrong-answer feedback. Not sent
    /// to clients.
    #[serde(skip)]
    meanings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub chosen_word_id: WordId,
    pub chosen_meaning: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NextAction {
    Retry,
    Advance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerResult {
    pub correct: bool,
    pub feedback: Option<Feedback>,
    pub next_action: NextAction,
}

impl AnswerResult {
    fn correct() -> Self {
        AnswerResult {
            correct: true,
            feedback: None,
            next_action: NextAction::Advance,
        }
    }

    fn wrong(feedback: Feedback) -> Self {
        AnswerResult {
            correct: false,
            feedback: Some(feedback),
            next_action: NextAction::Retry,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntroCard {
    pub word_id: WordId,
    pub romanized: String,
    pub native: Option<String>,
    pub gloss: String,
}

/// Builds a `k`-option quiz on `word`. Distractors are drawn uniformly
/// without replacement from the other words whose option text is distinct;
/// the correct option lands at a uniformly drawn position.
pub fn make_quiz(
    quiz_id: QuizId,
    word: &WordId,
    study_set: &Deck,
    direction: Direction,
    k: usize,
    seed: u64,
) -> Result<Quiz, QuizError> {
    if k == 0 {
        return Err(QuizError::ZeroOptions);
    }
    let target = study_set
        .get(word)
        .ok_or_else(|| QuizError::UnknownWord(word.clone()))?;

    let mut seen: HashSet<&str> = HashSet::from([direction.option_text(target)]);
    let pool: Vec<&WordEntry> = study_set
        .entries()
        .iter()
        .filter(|e| &e.id != word && seen.insert(direction.option_text(e)))
        .collect();
    if pool.len() + 1 < k {
        return Err(QuizError::TooSmall {
            needed: k,
            available: pool.len() + 1,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<&WordEntry> = rand::seq::index::sample(&mut rng, pool.len(), k - 1)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    let correct_index = rng.random_range(0..k);
    chosen.insert(correct_index, target);

    Ok(Quiz {
        quiz_id,
        direction,
        prompt_word: word.clone(),
        prompt_text: direction.prompt(target).to_owned(),
        options: chosen
            .iter()
            .map(|e| QuizOption {
                word_id: e.id.clone(),
                display_text: direction.option_text(e).to_owned(),
            })
            .collect(),
        correct_index,
        meanings: chosen.iter().map(|e| e.gloss.clone()).collect(),
    })
}

impl Quiz {
    pub fn option_count(&self) -> usize {
        self.options.len()
    }

    pub fn correct_option(&self) -> &QuizOption {
        &self.options[self.correct_index]
    }

    /// Wrong choices reveal the chosen word's meaning; the same quiz stays
    /// answerable.
    pub fn check_answer(&self, chosen_index: usize) -> Result<AnswerResult, QuizError> {
        let option = self.options.get(chosen_index).ok_or(QuizError::IndexOutOfRange {
            index: chosen_index,
            options: self.options.len(),
        })?;
        if chosen_index == self.correct_index {
            return Ok(AnswerResult::correct());
        }
        Ok(AnswerResult::wrong(Feedback {
            chosen_word_id: option.word_id.clone(),
            chosen_meaning: self.meanings[chosen_index].clone(),
        }))
    }
}

pub fn check_answer(quiz: &Quiz, chosen_index: usize) -> Result<AnswerResult, QuizError> {
    quiz.check_answer(chosen_index)
}

pub fn make_intro_card(word: &WordId, study_set: &Deck) -> Result<IntroCard, QuizError> {
    let e = study_set
        .get(word)
        .ok_or_else(|| QuizError::UnknownWord(word.clone()))?;
    Ok(IntroCard {
        word_id: e.id.clone(),
        romanized: e.romanized.clone(),
        native: e.native.clone(),
        gloss: e.gloss.clone(),
    })
}

/// The quiz that follows a correct answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowUp {
    pub quiz: Quiz,
    /// The word has not been introduced yet; the caller records the
    /// introduction when displaying it.
    pub is_new: bool,
    /// Selection time, one second past `now` when the tick was advanced.
    pub selected_at: Timestamp,
}

/// Picks a different word than `current` via the scheduler. If the
/// scheduler insists on the same word, time advances one tick and the
/// selection is retried; failing that the best other candidate is used. A
/// single-word study set returns its only word.
#[allow(clippy::too_many_arguments)]
pub fn next_after_correct(
    current: &Quiz,
    scheduler: &SchedulerState,
    now: Timestamp,
    study_set: &Deck,
    direction: Direction,
    k: usize,
    quiz_id: QuizId,
    seed: u64,
) -> Result<FollowUp, QuizError> {
    let mut at = now;
    let mut pick = scheduler.next_word(at);
    if pick.word_id == &current.prompt_word {
        at = now.plus_secs(1);
        pick = scheduler.next_word(at);
        if pick.word_id == &current.prompt_word {
            if let Some(other) = scheduler.next_word_excluding(at, &current.prompt_word) {
                pick = other;
            }
        }
    }
    let quiz = make_quiz(quiz_id, pick.word_id, study_set, direction, k, seed)?;
    Ok(FollowUp {
        quiz,
        is_new: pick.is_new,
        selected_at: at,
    })
}
