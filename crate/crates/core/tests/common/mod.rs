//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use regex::Regex;

// ---------------------------------------------------------------- filters

/// A filter line translated to a regular expression.
pub struct OracleRule {
    pub raw: String,
    pub exception: bool,
    pub regex: Regex,
    pub includes: Vec<String>,
    pub excludes: Vec<String>,
    /// Some(true): third-party only; Some(false): first-party only.
    pub party: Option<bool>,
}

/// Scheme, optional userinfo, then any run of host labels ending in a dot.
const HOST_ANCHOR: &str = r"^[a-z][a-z0-9+.\-]*://(?:[^/?#@]*@)?(?:[^/?#:@]*\.)?";
const SEPARATOR: &str = r"(?:[^a-z0-9_.%\-]|$)";

pub fn oracle_rule(line: &str) -> Option<OracleRule> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('!') || line.starts_with('[') {
        return None;
    }
    if ["##", "#@#", "#?#", "#$#"].iter().any(|m| line.contains(m)) {
        return None;
    }
    let (exception, body) = match line.strip_prefix("@@") {
        Some(rest) => (true, rest),
        None => (false, line),
    };
    let (pattern, options) = match body.rfind('$') {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let mut includes = Vec::new();
    let mut excludes = Vec::new();
    let mut party = None;
    if let Some(opts) = options {
        for opt in opts.split(',') {
            let opt = opt.trim().to_lowercase();
            if opt == "third-party" {
                party = Some(true);
            } else if opt == "~third-party" {
                party = Some(false);
            } else {
                // any other option puts the rule outside the oracle's subset
                let list = opt.strip_prefix("domain=")?;
                for d in list.split('|') {
                    match d.strip_prefix('~') {
                        Some(x) => excludes.push(x.to_owned()),
                        None => includes.push(d.to_owned()),
                    }
                }
            }
        }
    }
    if pattern.len() > 1 && pattern.starts_with('/') && pattern.ends_with('/') {
        return None;
    }
    let mut p = pattern.to_lowercase();
    let mut re = String::new();
    if let Some(rest) = p.strip_prefix("||") {
        re.push_str(HOST_ANCHOR);
        p = rest.to_owned();
    } else if let Some(rest) = p.strip_prefix('|') {
        re.push('^');
        p = rest.to_owned();
    }
    let end = p.ends_with('|');
    if end {
        p.pop();
    }
    if p.is_empty() {
        return None;
    }
    for c in p.chars() {
        match c {
            '*' => re.push_str(".*"),
            '^' => re.push_str(SEPARATOR),
            c => re.push_str(&regex::escape(&c.to_string())),
        }
    }
    if end {
        re.push('$');
    }
    Some(OracleRule {
        raw: line.to_owned(),
        exception,
        regex: Regex::new(&re).expect("translated rule is a valid regex"),
        includes,
        excludes,
        party,
    })
}

fn on_domain(page: &str, domain: &str) -> bool {
    page == domain || page.ends_with(&format!(".{domain}"))
}

impl OracleRule {
    pub fn hits(&self, url: &str, page: &str, third_party: bool) -> bool {
        if self.party.is_some_and(|p| p != third_party) {
            return false;
        }
        if self.excludes.iter().any(|d| on_domain(page, d)) {
            return false;
        }
        if !self.includes.is_empty() && !self.includes.iter().any(|d| on_domain(page, d)) {
            return false;
        }
        self.regex.is_match(url)
    }
}

/// ("block" | "allow" | "no-match", deciding rule text).
pub fn oracle_decide(rules: &[OracleRule], url: &str, page: &str, third_party: bool) -> (&'static str, Option<String>) {
    let url = url::Url::parse(url).expect("corpus URL parses").as_str().to_lowercase();
    if let Some(r) = rules.iter().find(|r| r.exception && r.hits(&url, page, third_party)) {
        return ("allow", Some(r.raw.clone()));
    }
    if let Some(r) = rules.iter().find(|r| !r.exception && r.hits(&url, page, third_party)) {
        return ("block", Some(r.raw.clone()));
    }
    ("no-match", None)
}

pub const CORPUS_RULES: &[&str] = &[
    "||ads.example.com^",
    "||example.com^",
    "||example.com/banner",
    "|https://ads.",
    "|http://popup.",
    ".swf|",
    "/adserver/*",
    "/banner/*/ad_",
    "-ad-728x90.",
    "&ad_type=",
    "?adzone=",
    "_adbanner.",
    "ad^",
    "^ads^",
    "/ads/*.js|",
    "*/track/*",
    "||cdn.adnetwork.test/img/",
    "||tracker.example.org^$~third-party",
    "||adnxs.com^$third-party",
    "/sponsored/*$domain=news.example.com|blog.example.com",
    "/promo/*$domain=~shop.example.com",
    "/promo/*$domain=example.com|~shop.example.com",
    "||widgets.example.net^$third-party,domain=~example.net",
    "banner",
    "||co.uk^",
    "||example.co.uk/ads/",
    "AdServer^",
    "@@||ads.example.com/allowed/",
    "@@/adserver/*$domain=publisher.example.com",
    "@@||example.com^$~third-party",
    "@@*ok=1",
];

pub const CORPUS_URLS: &[&str] = &[
    "https://ads.example.com/slot.js",
    "https://ads.example.com/allowed/x.png",
    "http://ads.example.com:8080/a",
    "https://example.com/banner/top/ad_1.gif",
    "https://example.com/banner.png",
    "https://notexample.com/banner",
    "https://sub.ads.example.com/",
    "https://cdn.example.com/site-ad-728x90.png",
    "https://x.test/p?adzone=3&ad_type=b",
    "https://x.test/p?q=1&ad_type=b",
    "https://x.test/img_adbanner.gif",
    "https://x.test/ad",
    "https://x.test/ad/",
    "https://x.test/adx",
    "https://x.test/ads/a.js",
    "https://x.test/ads/a.jsx",
    "https://popup.example.com/",
    "http://popup.example.com/",
    "https://media.test/movie.swf",
    "https://media.test/movie.swf?x=1",
    "https://news.example.com/sponsored/1",
    "https://shop.example.com/promo/sale",
    "https://www.example.com/promo/sale",
    "https://ib.adnxs.com/ut/v3",
    "https://tracker.example.org/px",
    "https://widgets.example.net/w.js",
    "https://cdn.adnetwork.test/img/1.png",
    "https://bbc.co.uk/ads/",
    "https://example.co.uk/ads/x",
    "https://x.test/track/me?ok=1",
    "https://publisher.example.com/adserver/1",
    "https://X.TEST/AdServer/Top",
    "https://user:pw@ads.example.com/x",
];

pub const CORPUS_PAGES: &[&str] = &["", "news.example.com", "shop.example.com", "publisher.example.com", "example.net"];

// ----------------------------------------------------------------- layout

#[derive(Debug, Clone, PartialEq)]
pub struct OracleFill {
    pub unit: (u32, u32),
    pub columns: u32,
    pub rows: u32,
    pub scale: f64,
}

/// Brute force over every grid up to 4× the slot in each direction, in
/// floating point: maximize scale (capped at 1, at least 0.5), then covered
/// area, then unit area, then prefer fewer tiles, then more columns.
pub fn oracle_fit(w: u32, h: u32, units: &[(u32, u32)]) -> Option<OracleFill> {
    const EPS: f64 = 1e-9;
    let mut best: Option<(OracleFill, f64)> = None;
    for &(uw, uh) in units {
        for c in 1..=(4 * w / uw + 1) {
            for r in 1..=(4 * h / uh + 1) {
                let scale = 1f64
                    .min(f64::from(w) / f64::from(c * uw))
                    .min(f64::from(h) / f64::from(r * uh));
                if scale < 0.5 - EPS {
                    continue;
                }
                let area = f64::from(c * r) * f64::from(uw * uh) * scale * scale;
                let cand = OracleFill {
                    unit: (uw, uh),
                    columns: c,
                    rows: r,
                    scale,
                };
                let better = match &best {
                    None => true,
                    Some((b, b_area)) => {
                        let key = |x: f64, y: f64| {
                            if x > y + EPS {
                                Some(true)
                            } else if x < y - EPS {
                                Some(false)
                            } else {
                                None
                            }
                        };
                        key(scale, b.scale)
                            .or_else(|| key(area, *b_area))
                            .or_else(|| key(f64::from(uw * uh), f64::from(b.unit.0 * b.unit.1)))
                            .or_else(|| key(-f64::from(c * r), -f64::from(b.columns * b.rows)))
                            .or_else(|| key(f64::from(c), f64::from(b.columns)))
                            .unwrap_or(false)
                    }
                };
                if better {
                    best = Some((cand, area));
                }
            }
        }
    }
    best.map(|(f, _)| f)
}

// -------------------------------------------------------------- scheduler

/// Straightforward restatement of the selection and review rules.
#[derive(Debug, Clone)]
pub struct RefScheduler {
    pub ladder: Vec<i64>,
    pub introduced: Vec<bool>,
    pub boxes: Vec<usize>,
    pub due: Vec<i64>,
    pub last: Vec<Option<i64>>,
    pub cursor: usize,
}

impl RefScheduler {
    pub fn new(n: usize, ladder: Vec<i64>, now: i64) -> Self {
        RefScheduler {
            ladder,
            introduced: vec![false; n],
            boxes: vec![0; n],
            due: vec![now; n],
            last: vec![None; n],
            cursor: 0,
        }
    }

    /// (index, is_new)
    pub fn next(&self, now: i64) -> (usize, bool) {
        let n = self.introduced.len();
        let overdue: Vec<usize> = (0..n).filter(|&i| self.introduced[i] && self.due[i] <= now).collect();
        if !overdue.is_empty() {
            // None sorts before Some, matching "absent is minus infinity"
            let i = *overdue.iter().min_by_key(|&&i| (self.last[i], i)).unwrap();
            return (i, false);
        }
        if self.cursor < n {
            return (self.cursor, true);
        }
        let i = (0..n).min_by_key(|&i| (self.due[i], self.last[i], i)).unwrap();
        (i, false)
    }

    pub fn impression(&mut self, i: usize, now: i64, intro: bool) {
        if intro {
            assert_eq!(i, self.cursor);
            self.introduced[i] = true;
            self.cursor += 1;
        }
        self.last[i] = Some(now);
    }

    pub fn answer(&mut self, i: usize, correct: bool, now: i64) {
        self.boxes[i] = if correct { (self.boxes[i] + 1).min(self.ladder.len() - 1) } else { 0 };
        self.due[i] = now + self.ladder[self.boxes[i]];
        self.last[i] = Some(now);
    }
}
pub mod criteria;
