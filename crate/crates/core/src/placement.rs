//! Where Edvertisements go: tiling standard ad units into detected ad slots,
//! and the periodic insertion plan for feeds.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheduler::{Display, SchedulerState, Timestamp};

pub const DEFAULT_RATE: usize = 10;
pub const MIN_SCALE: f64 = 0.5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlacementError {
    #[error("slot and unit dimensions must be positive")]
    NonPositiveDimensions,
    #[error("no ad units configured")]
    NoUnits,
    #[error("insertion rate must be at least 1")]
    ZeroRate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdUnit {
    pub name: String,
    pub width: u32,
    pub height: u32,
}

impl AdUnit {
    pub fn new(name: impl Into<String>, width: u32, height: u32) -> Self {
        AdUnit {
            name: name.into(),
            width,
            height,
        }
    }

    fn area(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }
}

/// Widget sizes available for ad replacement: a regular 300×250 and a small
/// 200×90 unit.
pub fn default_units() -> Vec<AdUnit> {
    vec![AdUnit::new("regular", 300, 250), AdUnit::new("small", 200, 90)]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotFill {
    pub slot_w: u32,
    pub slot_h: u32,
    pub unit: AdUnit,
    pub columns: u32,
    pub rows: u32,
    pub scale: f64,
}

impl SlotFill {
    pub fn tiles(&self) -> u32 {
        self.columns * self.rows
    }

    pub fn covered_area(&self) -> f64 {
        f64::from(self.tiles()) * self.unit.area() as f64 * self.scale * self.scale
    }
}

impl fmt::Display for SlotFill {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} ×{}×{} scale {:.2}",
            self.unit.width, self.unit.height, self.columns, self.rows, self.scale
        )
    }
}

/// Non-negative fraction compared by cross multiplication.
#[derive(Debug, Clone, Copy)]
struct Frac {
    num: u128,
    den: u128,
}

impl Frac {
    fn cmp(self, other: Frac) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }

    fn min(self, other: Frac) -> Frac {
        if other.cmp(self) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

struct Candidate<'a> {
    unit: &'a AdUnit,
    columns: u32,
    rows: u32,
    scale: Frac,
    area: Frac,
}

impl Candidate<'_> {
    /// Larger scale, then larger covered area, then larger unit, then fewer
    /// tiles, then more columns.
    fn better_than(&self, other: &Candidate<'_>) -> bool {
        self.scale
            .cmp(other.scale)
            .then(self.area.cmp(other.area))
            .then(self.unit.area().cmp(&other.unit.area()))
            .then((other.columns * other.rows).cmp(&(self.columns * self.rows)))
            .then(self.columns.cmp(&other.columns))
            == Ordering::Greater
    }
}

/// Tiles one unit size uniformly into the slot, scaling by at most 1.0 and at
/// least [`MIN_SCALE`]. The least shrinking wins; among equally scaled fills
/// the one covering the most area wins.
pub fn fit_slot(slot_w: u32, slot_h: u32, units: &[AdUnit]) -> Result<Option<SlotFill>, PlacementError> {
    if slot_w == 0 || slot_h == 0 || units.iter().any(|u| u.width == 0 || u.height == 0) {
        return Err(PlacementError::NonPositiveDimensions);
    }
    if units.is_empty() {
        return Err(PlacementError::NoUnits);
    }

    let (sw, sh) = (u128::from(slot_w), u128::from(slot_h));
    let mut best: Option<Candidate> = None;
    for unit in units {
        let (w, h) = (u128::from(unit.width), u128::from(unit.height));
        // scale >= 1/2 bounds the tile counts
        let max_cols = (2 * sw / w) as u32;
        let max_rows = (2 * sh / h) as u32;
        for columns in 1..=max_cols {
            for rows in 1..=max_rows {
                let (c, r) = (u128::from(columns), u128::from(rows));
                let scale = Frac { num: 1, den: 1 }
                    .min(Frac { num: sw, den: c * w })
                    .min(Frac { num: sh, den: r * h });
                if 2 * scale.num < scale.den {
                    continue;
                }
                let cand = Candidate {
                    unit,
                    columns,
                    rows,
                    scale,
                    area: Frac {
                        num: c * r * w * h * scale.num * scale.num,
                        den: scale.den * scale.den,
                    },
                };
                if best.as_ref().is_none_or(|b| cand.better_than(b)) {
                    best = Some(cand);
                }
            }
        }
    }

    Ok(best.map(|b| SlotFill {
        slot_w,
        slot_h,
        unit: b.unit.clone(),
        columns: b.columns,
        rows: b.rows,
        scale: b.scale.num as f64 / b.scale.den as f64,
    }))
}

/// Study condition: quizzes directly in the feed, or links to a quiz site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    InFeedQuiz,
    Link,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::InFeedQuiz => "in_feed_quiz",
            Condition::Link => "link",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "in_feed_quiz" | "in-feed" | "infeed" => Ok(Condition::InFeedQuiz),
            "link" => Ok(Condition::Link),
            other => Err(format!("unknown condition {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Quiz,
    IntroCard,
    Link,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlannedItem {
    /// Number of organic items preceding the insertion.
    pub position: usize,
    pub kind: ItemKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeedPlan {
    pub feed_length: usize,
    pub rate: usize,
    pub condition: Condition,
    pub items: Vec<PlannedItem>,
}

impl FeedPlan {
    pub fn positions(&self) -> Vec<usize> {
        self.items.iter().map(|i| i.position).collect()
    }

    /// Marks positions where the scheduler would introduce a new word,
    /// assuming every inserted item is seen but none is answered. The real
    /// kind is decided again at display time.
    pub fn resolve_kinds(&mut self, scheduler: &SchedulerState, now: Timestamp) {
        if self.condition != Condition::InFeedQuiz {
            return;
        }
        let mut preview = scheduler.clone();
        for item in &mut self.items {
            let pick = preview.next_word(now);
            let (word, is_new) = (pick.word_id.clone(), pick.is_new);
            item.kind = if is_new { ItemKind::IntroCard } else { ItemKind::Quiz };
            let display = if is_new { Display::Introduction } else { Display::Review };
            preview
                .record_impression(&word, now, display)
                .expect("selected word accepts an impression");
        }
    }
}

/// One insertion before organic items `rate`, `2·rate`, … up to
/// `feed_length`. In-feed plans hold `Quiz` placeholders until
/// [`FeedPlan::resolve_kinds`] runs.
pub fn plan_feed(feed_length: usize, rate: usize, condition: Condition) -> Result<FeedPlan, PlacementError> {
    if rate == 0 {
        return Err(PlacementError::ZeroRate);
    }
    let kind = match condition {
        Condition::InFeedQuiz => ItemKind::Quiz,
        Condition::Link => ItemKind::Link,
    };
    let items = (1..=feed_length / rate)
        .map(|i| PlannedItem {
            position: i * rate,
            kind,
        })
        .collect();
    Ok(FeedPlan {
        feed_length,
        rate,
        condition,
        items,
    })
}
