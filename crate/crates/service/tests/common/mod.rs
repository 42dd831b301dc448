#![allow(dead_code)]

use ortkit::model::{Campaign, Category};
use ortkit::synth::{generate_campaign, SynthSpec};
use ortkit_service::RawRatings;

/// Two documents, four sources, eight evaluated segments each, no answers.
pub fn fresh_campaign() -> Campaign {
    let mut c = generate_campaign(&SynthSpec {
        documents: 2,
        ..Default::default()
    })
    .unwrap();
    c.segment_annotations.clear();
    c.document_annotations.clear();
    c
}

pub fn ratings(v: f64) -> RawRatings {
    Category::ALL
        .iter()
        .map(|c| (c.name().to_string(), serde_json::json!(v)))
        .collect()
}
