use super::{FilterRule, PartyOption, RuleOptions, StartAnchor, Token};

/// Parses a single trimmed, non-blank filter line. Returns `None` for
/// comments, headers, cosmetic rules and anything using unsupported syntax.
pub fn parse_rule(line: &str) -> Option<FilterRule> {
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

    let (pattern_text, options) = match body.rfind('$') {
        Some(i) => (&body[..i], parse_options(&body[i + 1..])?),
        None => (body, RuleOptions::default()),
    };

    // Regex rules are out of the supported subset.
    if pattern_text.len() > 1 && pattern_text.starts_with('/') && pattern_text.ends_with('/') {
        return None;
    }

    let (start, rest) = if let Some(rest) = pattern_text.strip_prefix("||") {
        (StartAnchor::Domain, rest)
    } else if let Some(rest) = pattern_text.strip_prefix('|') {
        (StartAnchor::Start, rest)
    } else {
        (StartAnchor::None, pattern_text)
    };
    let (end, rest) = match rest.strip_suffix('|') {
        Some(r) => (true, r),
        None => (false, rest),
    };
    if rest.contains('|') {
        return None;
    }

    let pattern = tokenize(rest);
    if pattern.is_empty() {
        return None;
    }

    Some(FilterRule {
        raw: line.to_owned(),
        exception,
        start,
        end,
        pattern,
        options,
    })
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut literal = String::new();
    for c in text.chars() {
        match c {
            '*' | '^' => {
                if !literal.is_empty() {
                    tokens.push(Token::Literal(std::mem::take(&mut literal)));
                }
                let tok = if c == '*' { Token::Wildcard } else { Token::Separator };
                if !(tok == Token::Wildcard && tokens.last() == Some(&Token::Wildcard)) {
                    tokens.push(tok);
                }
            }
            c => literal.push(c.to_ascii_lowercase()),
        }
    }
    if !literal.is_empty() {
        tokens.push(Token::Literal(literal));
    }
    tokens
}

fn parse_options(text: &str) -> Option<RuleOptions> {
    let mut opts = RuleOptions::default();
    let mut party_seen = false;
    for opt in text.split(',') {
        let opt = opt.trim().to_ascii_lowercase();
        if let Some(list) = opt.strip_prefix("domain=") {
            for d in list.split('|') {
                let (negated, name) = match d.strip_prefix('~') {
                    Some(n) => (true, n),
                    None => (false, d),
                };
                if name.is_empty() {
                    return None;
                }
                let name = name.trim_end_matches('.').to_owned();
                if negated {
                    opts.exclude_domains.insert(name);
                } else {
                    opts.include_domains.insert(name);
                }
            }
        } else if opt == "third-party" || opt == "~third-party" {
            if party_seen {
                return None;
            }
            party_seen = true;
            opts.third_party = if opt == "third-party" {
                PartyOption::ThirdParty
            } else {
                PartyOption::FirstParty
            };
        } else {
            return None;
        }
    }
    if opts.include_domains.intersection(&opts.exclude_domains).next().is_some() {
        return None;
    }
    Some(opts)
}
