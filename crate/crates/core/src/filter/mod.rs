//! EasyList-subset URL filters.
//!
//! Supported syntax: `||` hostname anchors, `|` start/end anchors, `*`
//! wildcards, `^` separators, `@@` exceptions and the options `domain=`,
//! `third-party` and `~third-party`. Element hiding rules, regex rules and
//! rules carrying any other option are skipped and counted.

mod domain;
mod matcher;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;
use url::Url;

pub use domain::registrable_domain;
pub use parse::parse_rule;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FilterError {
    #[error("invalid URL {url:?}: {reason}")]
    InvalidUrl { url: String, reason: String },
    #[error("URL {0:?} has no host")]
    MissingHost(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartAnchor {
    None,
    /// `|` at the start: match begins at the first character of the URL.
    Start,
    /// `||`: match begins at a hostname label boundary.
    Domain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Token {
    Literal(String),
    Wildcard,
    Separator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartyOption {
    #[default]
    Any,
    ThirdParty,
    FirstParty,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RuleOptions {
    pub include_domains: BTreeSet<String>,
    pub exclude_domains: BTreeSet<String>,
    pub third_party: PartyOption,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterRule {
    pub raw: String,
    pub exception: bool,
    pub start: StartAnchor,
    /// Trailing `|`: match must end at the end of the URL.
    pub end: bool,
    pub pattern: Vec<Token>,
    pub options: RuleOptions,
}

impl FilterRule {
    /// Whether the rule's options admit a request from `page_domain`.
    pub fn options_apply(&self, page_domain: &str, third_party: bool) -> bool {
        let opts = &self.options;
        match opts.third_party {
            PartyOption::ThirdParty if !third_party => return false,
            PartyOption::FirstParty if third_party => return false,
            _ => {}
        }
        let page = page_domain.trim_end_matches('.').to_ascii_lowercase();
        if opts.exclude_domains.iter().any(|d| domain::is_subdomain_of(&page, d)) {
            return false;
        }
        opts.include_domains.is_empty()
            || opts.include_domains.iter().any(|d| domain::is_subdomain_of(&page, d))
    }
}

/// A request URL prepared for matching: lowercased, normalized serialization
/// plus the byte span of its host.
#[derive(Debug, Clone)]
pub struct RequestUrl {
    text: String,
    host_start: usize,
    host_end: usize,
}

impl RequestUrl {
    pub fn parse(input: &str) -> Result<Self, FilterError> {
        let url = Url::parse(input).map_err(|e| FilterError::InvalidUrl {
            url: input.to_owned(),
            reason: e.to_string(),
        })?;
        Self::from_url(&url)
    }

    pub fn from_url(url: &Url) -> Result<Self, FilterError> {
        if url.host_str().is_none() {
            return Err(FilterError::MissingHost(url.to_string()));
        }
        let host_start = url[..url::Position::BeforeHost].len();
        let host_end = url[..url::Position::AfterHost].len();
        Ok(RequestUrl {
            text: url.as_str().to_ascii_lowercase(),
            host_start,
            host_end,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn host(&self) -> &str {
        &self.text[self.host_start..self.host_end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "rule", rename_all = "snake_case")]
pub enum MatchDecision {
    Block(FilterRule),
    Allow(FilterRule),
    NoMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Block,
    Allow,
    NoMatch,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Block => "block",
            Verdict::Allow => "allow",
            Verdict::NoMatch => "no-match",
        })
    }
}

impl MatchDecision {
    pub fn verdict(&self) -> Verdict {
        match self {
            MatchDecision::Block(_) => Verdict::Block,
            MatchDecision::Allow(_) => Verdict::Allow,
            MatchDecision::NoMatch => Verdict::NoMatch,
        }
    }

    pub fn rule(&self) -> Option<&FilterRule> {
        match self {
            MatchDecision::Block(r) | MatchDecision::Allow(r) => Some(r),
            MatchDecision::NoMatch => None,
        }
    }
}

/// A page element that may be an advertisement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageElement {
    pub src_url: String,
    pub page_url: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterSet {
    blocking: Vec<FilterRule>,
    exceptions: Vec<FilterRule>,
    skipped: usize,
}

impl FilterSet {
    /// Parses filter-list text. Never fails: unsupported lines are counted.
    pub fn parse(text: &str) -> Self {
        let mut set = FilterSet::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            match parse_rule(line) {
                Some(rule) if rule.exception => set.exceptions.push(rule),
                Some(rule) => set.blocking.push(rule),
                None => set.skipped += 1,
            }
        }
        set
    }

    pub fn blocking(&self) -> &[FilterRule] {
        &self.blocking
    }

    pub fn exceptions(&self) -> &[FilterRule] {
        &self.exceptions
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn rule_count(&self) -> usize {
        self.blocking.len() + self.exceptions.len()
    }

    /// Exceptions are consulted first; among blocking rules the first in
    /// list order decides.
    pub fn matches(&self, url: &str, page_domain: &str, third_party: bool) -> Result<MatchDecision, FilterError> {
        let request = RequestUrl::parse(url)?;
        Ok(self.matches_request(&request, page_domain, third_party))
    }

    pub fn matches_request(&self, request: &RequestUrl, page_domain: &str, third_party: bool) -> MatchDecision {
        let hit = |rule: &&FilterRule| {
            rule.options_apply(page_domain, third_party) && matcher::pattern_matches(rule, request)
        };
        if let Some(rule) = self.exceptions.iter().find(hit) {
            return MatchDecision::Allow(rule.clone());
        }
        if let Some(rule) = self.blocking.iter().find(hit) {
            return MatchDecision::Block(rule.clone());
        }
        MatchDecision::NoMatch
    }

    /// Matches `url` for a page given as a URL or bare host. Without an
    /// explicit `third_party`, it is derived from registrable domains; with
    /// no page at all the request counts as first-party.
    pub fn decide(&self, url: &str, page: Option<&str>, third_party: Option<bool>) -> Result<MatchDecision, FilterError> {
        let request = RequestUrl::parse(url)?;
        let page_host = match page {
            None => String::new(),
            Some(p) if p.contains("://") => RequestUrl::parse(p)?.host().to_owned(),
            Some(p) => p.trim().trim_end_matches('.').to_ascii_lowercase(),
        };
        let third_party = third_party.unwrap_or_else(|| {
            !page_host.is_empty() && registrable_domain(request.host()) != registrable_domain(&page_host)
        });
        Ok(self.matches_request(&request, &page_host, third_party))
    }

    /// True iff the element's source is blocked. Third-party status is
    /// derived from the registrable domains of source and page.
    pub fn classify_element(&self, element: &PageElement) -> Result<bool, FilterError> {
        let decision = self.classify_decision(&element.src_url, &element.page_url)?;
        Ok(decision.verdict() == Verdict::Block)
    }

    pub fn classify_decision(&self, src_url: &str, page_url: &str) -> Result<MatchDecision, FilterError> {
        let src = RequestUrl::parse(src_url)?;
        let page = RequestUrl::parse(page_url)?;
        let third_party = registrable_domain(src.host()) != registrable_domain(page.host());
        Ok(self.matches_request(&src, page.host(), third_party))
    }
}
