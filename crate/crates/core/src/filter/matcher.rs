use super::{FilterRule, RequestUrl, StartAnchor, Token};

fn is_separator(b: u8) -> bool {
    !(b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.' | b'%'))
}

pub(super) fn pattern_matches(rule: &FilterRule, request: &RequestUrl) -> bool {
    let text = request.as_str().as_bytes();

    // Cheap rejection: the longest literal must occur somewhere.
    let longest = rule
        .pattern
        .iter()
        .filter_map(|t| match t {
            Token::Literal(s) => Some(s.as_str()),
            _ => None,
        })
        .max_by_key(|s| s.len());
    if let Some(lit) = longest {
        if !request.as_str().contains(lit) {
            return false;
        }
    }

    let mut m = Matcher::new(&rule.pattern, text, rule.end);
    match rule.start {
        StartAnchor::Start => m.run(0, 0),
        StartAnchor::None => (0..=text.len()).any(|p| m.run(0, p)),
        StartAnchor::Domain => {
            let (hs, he) = (request.host_start, request.host_end);
            std::iter::once(hs)
                .chain((hs..he).filter(|&i| text[i] == b'.').map(|i| i + 1))
                .any(|p| m.run(0, p))
        }
    }
}

struct Matcher<'a> {
    tokens: &'a [Token],
    text: &'a [u8],
    anchored_end: bool,
    /// (token, pos) pairs already known to fail.
    failed: Vec<bool>,
}

impl<'a> Matcher<'a> {
    fn new(tokens: &'a [Token], text: &'a [u8], anchored_end: bool) -> Self {
        Matcher {
            tokens,
            text,
            anchored_end,
            failed: vec![false; (tokens.len() + 1) * (text.len() + 1)],
        }
    }

    fn run(&mut self, ti: usize, pos: usize) -> bool {
        let slot = ti * (self.text.len() + 1) + pos;
        if self.failed[slot] {
            return false;
        }
        let ok = self.step(ti, pos);
        if !ok {
            self.failed[slot] = true;
        }
        ok
    }

    fn step(&mut self, ti: usize, pos: usize) -> bool {
        let Some(tok) = self.tokens.get(ti) else {
            return !self.anchored_end || pos == self.text.len();
        };
        match tok {
            Token::Literal(lit) => {
                let lit = lit.as_bytes();
                self.text[pos..].starts_with(lit) && self.run(ti + 1, pos + lit.len())
            }
            Token::Separator => {
                if pos == self.text.len() {
                    self.run(ti + 1, pos)
                } else {
                    is_separator(self.text[pos]) && self.run(ti + 1, pos + 1)
                }
            }
            Token::Wildcard => (pos..=self.text.len()).any(|p| self.run(ti + 1, p)),
        }
    }
}
