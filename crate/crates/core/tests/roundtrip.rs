use ortkit::ingest::{diff_campaigns, export_campaign, parse_campaign, Format};
use ortkit::model::{validate_campaign, Campaign, SourceKind};
use ortkit::synth::{generate_campaign, PerGroup, SourceSpec, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn generated(i: u64) -> Campaign {
    let mut rng = ChaCha8Rng::seed_from_u64(i);
    let n_sources = rng.random_range(1..=4);
    let spec = SynthSpec {
        seed: i,
        name: format!("gen {i}"),
        documents: rng.random_range(1..=3),
        segments_per_document: rng.random_range(1..=4),
        context_segments: rng.random_range(0..=2),
        sources: (0..n_sources)
            .map(|k| SourceSpec {
                id: format!("S{k}"),
                kind: if k == 0 { SourceKind::Optimal } else { SourceKind::Professional },
                quality_offset: -0.3 * k as f64,
            })
            .collect(),
        annotators_per_group: PerGroup {
            translator: rng.random_range(0..=2),
            student: rng.random_range(1..=2),
            nontranslator: rng.random_range(0..=2),
        },
        partial_rate: if rng.random_bool(0.3) { 0.2 } else { 0.0 },
        noise_sd: rng.random_range(0.0..1.0),
        ..Default::default()
    };
    let mut c = generate_campaign(&spec).unwrap();
    // exercise optional fields and awkward text
    if rng.random_bool(0.5) {
        c.annotators[0].display_name = Some("Jana Nováková".into());
    }
    if rng.random_bool(0.5) {
        c.documents[0].full_source_context = Some("Line one.\n\tLine two with a \\ backslash.".into());
    }
    if let Some(a) = c.segment_annotations.first_mut() {
        a.edited_text = "upraveno\ttab \"quote\" \\n".into();
    }
    if rng.random_bool(0.3) {
        c.segment_annotations.pop();
        c.document_annotations.pop();
    }
    c
}

#[test]
fn canonical_round_trip_for_generated_campaigns() {
    for i in 0..100 {
        let mut c = generated(i);
        if i % 2 == 0 {
            for (k, a) in c.segment_annotations.iter_mut().enumerate() {
                a.time_of_entry = Some(1_690_000_000_000 + k as u64);
            }
        }
        let bytes = export_campaign(&c, Format::Canonical).unwrap();
        let back = parse_campaign(std::str::from_utf8(&bytes).unwrap(), Format::Canonical).unwrap();
        assert_eq!(back, c.canonicalized(), "campaign {i}");
        assert!(diff_campaigns(&c, &back).is_empty());
        assert_eq!(export_campaign(&back, Format::Canonical).unwrap(), bytes);
        assert!(validate_campaign(&back).errors.is_empty());
    }
}

#[test]
fn wide_table_round_trip_for_generated_campaigns() {
    for i in 0..100 {
        let c = generated(1000 + i);
        let text = export_campaign(&c, Format::WideTable).unwrap();
        let back = parse_campaign(std::str::from_utf8(&text).unwrap(), Format::WideTable).unwrap();
        let d = diff_campaigns(&c, &back);
        assert!(d.is_empty(), "campaign {i}: {d:?}");
    }
}

#[test]
fn formats_agree_on_the_fixture() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let wide = std::fs::read_to_string(dir.join("small.tsv")).unwrap();
    let c = parse_campaign(&wide, Format::WideTable).unwrap();
    let report = validate_campaign(&c);
    assert!(report.is_valid(), "{:?}", report.errors);
    assert_eq!(report.counts.documents, 2);
    assert_eq!(report.counts.annotators, 2);
    assert_eq!(report.counts.sources, 2);
    // A01 rated all 2·2 + 3·2 segment cells, A02 only document d1, and
    // left one cell of d1 blank
    assert_eq!(report.counts.segment_annotations, 10 + 3);
    assert_eq!(report.counts.document_annotations, 4 + 2);
    assert_eq!(report.counts.partial_vectors, 1);
    assert_eq!(c.document("d1").unwrap().evaluated.start, 1);
    assert_eq!(c.document("d1").unwrap().source_segments[0], "Headline.");

    // an empty edit cell means the hypothesis was kept
    let a = c
        .segment_annotations
        .iter()
        .find(|a| a.annotator_id == "A01" && a.document_id == "d1" && a.segment_index == 1 && a.source_id == "N1")
        .unwrap();
    assert_eq!(a.edited_text, "První věta.");
    let edited = c
        .segment_annotations
        .iter()
        .find(|a| a.annotator_id == "A01" && a.document_id == "d1" && a.segment_index == 1 && a.source_id == "P1")
        .unwrap();
    assert_eq!(edited.edited_text, "První\tvěta opravená.");
    assert_eq!(edited.ratings.get(ortkit::Category::Style), Some(4.5));

    let canonical = std::fs::read_to_string(dir.join("small.json")).unwrap();
    let expected = parse_campaign(&canonical, Format::Canonical).unwrap();
    assert!(diff_campaigns(&expected, &c).is_empty(), "{:?}", diff_campaigns(&expected, &c));
    assert_eq!(String::from_utf8(export_campaign(&c, Format::Canonical).unwrap()).unwrap(), canonical);
}
