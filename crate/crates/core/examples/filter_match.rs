//! Classify ad requests against the bundled EasyList-style sample list.
//!
//!     cargo run --example filter_match

use edvert::filter::{FilterSet, PageElement};

const LIST: &str = include_str!("../data/sample_filters.txt");

pub fn run() -> Vec<(String, String)> {
    let set = FilterSet::parse(LIST);
    println!(
        "{} blocking rules, {} exceptions, {} lines skipped",
        set.blocking().len(),
        set.exceptions().len(),
        set.skipped()
    );

    let page = "https://news.example.com/today";
    let requests = [
        "https://ads.example.com/slot.js",
        "https://ads.example.com/allowed/logo.png",
        "https://static.doubleclick.net/instream/ad_status.js",
        "https://cdn.example.com/img/site-ad-728x90.png",
        "https://news.example.com/sponsored/story.html",
        "https://shop.example.com/promo/sale.html",
        "https://news.example.com/article.html",
    ];
    let mut rows = Vec::new();
    for url in requests {
        let decision = set.classify_decision(url, page).expect("valid URLs");
        let rule = decision.rule().map_or(String::new(), |r| r.raw.clone());
        println!("{:<9} {url:<58} {rule}", decision.verdict().to_string());
        rows.push((url.to_owned(), decision.verdict().to_string()));
    }

    let banner = PageElement {
        src_url: "https://ads.example.com/banner/728x90.gif".into(),
        page_url: page.into(),
        width: 728,
        height: 90,
    };
    println!("replace 728x90 element: {}", set.classify_element(&banner).expect("valid URLs"));
    rows
}

#[allow(dead_code)]
fn main() {
    run();
}
