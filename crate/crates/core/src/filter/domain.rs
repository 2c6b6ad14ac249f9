//! Hostname helpers. The registrable domain is approximated by the last two
//! labels, or three when the last two form a known multi-label suffix.

const MULTI_LABEL_SUFFIXES: &[&str] = &[
    "co.uk", "org.uk", "ac.uk", "gov.uk", "me.uk", "co.jp", "ne.jp", "or.jp", "ac.jp", "go.jp",
    "com.au", "net.au", "org.au", "edu.au", "co.nz", "org.nz", "com.br", "com.cn", "com.mx",
    "co.in", "co.kr", "com.tw", "co.za", "com.sg", "com.hk",
];

pub fn registrable_domain(host: &str) -> String {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    if host.parse::<std::net::IpAddr>().is_ok() || host.starts_with('[') {
        return host;
    }
    let labels: Vec<&str> = host.split('.').collect();
    let n = labels.len();
    if n <= 2 {
        return host;
    }
    let last_two = format!("{}.{}", labels[n - 2], labels[n - 1]);
    let take = if MULTI_LABEL_SUFFIXES.contains(&last_two.as_str()) { 3 } else { 2 };
    labels[n.saturating_sub(take)..].join(".")
}

/// `host` equals `domain` or is one of its subdomains.
pub(super) fn is_subdomain_of(host: &str, domain: &str) -> bool {
    host == domain
        || (host.len() > domain.len()
            && host.ends_with(domain)
            && host.as_bytes()[host.len() - domain.len() - 1] == b'.')
}
