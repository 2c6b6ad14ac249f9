//! Run the HTTP service on the bundled deck and filter list, in memory.
//!
//!     cargo run --example serve -- 127.0.0.1:8080
//!     curl -X POST localhost:8080/users -H 'content-type: application/json' \
//!          -d '{"user_id":"ann","condition":"in_feed_quiz"}'
//!     curl localhost:8080/users/ann/next-item

use std::sync::Arc;

use edvert::placement::default_units;
use edvert::service::{http, Resources, Service, SystemClock};
use edvert::{EngineConfig, FilterSet};

pub fn app() -> axum::Router {
    let resources = Resources {
        engine: EngineConfig::sample(),
        filters: FilterSet::parse(include_str!("../data/sample_filters.txt")),
        units: default_units(),
    };
    http::router(Arc::new(Service::in_memory(resources, SystemClock)))
}

#[allow(dead_code)]
#[tokio::main]
async fn main() -> std::io::Result<()> {
    let addr = std::env::args().nth(1).unwrap_or_else(|| "127.0.0.1:8080".to_owned());
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    println!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app()).await
}
