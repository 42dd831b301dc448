//! Synthetic campaigns with planted structure.
//!
//! Every rating is driven by a latent quality per (annotation cell):
//!
//! ```text
//! q = base_quality + source offset + segment effect + group leniency + annotator effect
//! component_k = snap(q + category_bias_k + N(0, category_sd))
//! overall     = snap(overall_intercept + Σ_k weight_k · component_k + N(0, noise_sd))
//! ```
//!
//! Each annotation draws from its own RNG seeded from the spec seed and the
//! annotation's indices, so changing one parameter (e.g. the edit slope)
//! leaves all other random choices in place.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AnnotatorGroup, AnnotatorProfile, Campaign, CampaignMeta, Category, Document, DocumentAnnotation,
    RatingScale, RatingVector, SegmentAnnotation, SegmentRange, SourceKind, TranslationSet, TranslationSource,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub id: String,
    pub kind: SourceKind,
    pub quality_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerGroup<T> {
    pub translator: T,
    pub student: T,
    pub nontranslator: T,
}

impl<T: Copy> PerGroup<T> {
    pub fn get(&self, g: AnnotatorGroup) -> T {
        match g {
            AnnotatorGroup::Translator => self.translator,
            AnnotatorGroup::Student => self.student,
            AnnotatorGroup::Nontranslator => self.nontranslator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub name: String,
    pub seed: u64,
    pub documents: usize,
    pub segments_per_document: usize,
    /// Unevaluated source segments shown before the evaluated block.
    pub context_segments: usize,
    pub sources: Vec<SourceSpec>,
    pub annotators_per_group: PerGroup<usize>,
    pub base_quality: f64,
    /// Spread of per-(segment, source) quality shared by all annotators.
    pub segment_sd: f64,
    pub group_leniency: PerGroup<f64>,
    pub annotator_sd: f64,
    /// Mean shift of each of the six component categories.
    pub category_bias: [f64; 6],
    pub category_sd: f64,
    /// Weights of the six components in Overall.
    pub category_weights: [f64; 6],
    pub overall_intercept: f64,
    pub noise_sd: f64,
    /// Probability that a component rating is rounded to an integer instead
    /// of the 0.1 grid.
    pub integer_snap_prob: f64,
    pub overall_integer_snap_prob: f64,
    /// Share of the cell minimum in a document rating; the rest is the mean.
    pub doc_min_weight: f64,
    pub doc_noise_sd: f64,
    /// Edit probability is `edit_base + edit_slope · (max − overall) / max`,
    /// clamped to [0, 1].
    pub edit_base: f64,
    pub edit_slope: f64,
    /// Token perturbations per rating point below the maximum.
    pub perturbations_per_point: f64,
    /// Probability that a segment annotation is left with one category blank.
    pub partial_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let src = |id: &str, kind, quality_offset| SourceSpec {
            id: id.into(),
            kind,
            quality_offset,
        };
        SynthSpec {
            name: "synthetic".into(),
            seed: 42,
            documents: 20,
            segments_per_document: 8,
            context_segments: 2,
            sources: vec![
                src("N1", SourceKind::Optimal, 0.0),
                src("P1", SourceKind::Professional, -0.4),
                src("P2", SourceKind::Professional, -0.7),
                src("P3", SourceKind::Professional, -1.0),
            ],
            annotators_per_group: PerGroup {
                translator: 4,
                student: 3,
                nontranslator: 4,
            },
            base_quality: 5.3,
            segment_sd: 0.6,
            group_leniency: PerGroup {
                translator: -0.4,
                student: 0.0,
                nontranslator: 0.5,
            },
            annotator_sd: 0.2,
            category_bias: [0.4, 0.2, 0.2, 0.0, -0.1, 0.1],
            category_sd: 0.5,
            category_weights: [0.05, 0.1, 0.15, 0.35, 0.25, 0.1],
            overall_intercept: 0.0,
            noise_sd: 0.3,
            integer_snap_prob: 0.5,
            overall_integer_snap_prob: 0.5,
            doc_min_weight: 0.6,
            doc_noise_sd: 0.2,
            edit_base: 0.2,
            edit_slope: 0.8,
            perturbations_per_point: 1.5,
            partial_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid synthetic spec: {0}")]
pub struct InvalidSpec(pub String);

impl SynthSpec {
    pub fn validate(&self) -> Result<(), InvalidSpec> {
        let err = |m: &str| Err(InvalidSpec(m.to_string()));
        if self.documents == 0 || self.segments_per_document == 0 || self.sources.is_empty() {
            return err("documents, segments per document and sources must be at least 1");
        }
        let g = self.annotators_per_group;
        if g.translator + g.student + g.nontranslator == 0 {
            return err("at least one annotator is required");
        }
        let mut ids: Vec<&str> = self.sources.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.sources.len() || ids.iter().any(|i| i.is_empty()) {
            return err("source ids must be unique and non-empty");
        }
        let sds = [self.segment_sd, self.annotator_sd, self.category_sd, self.noise_sd, self.doc_noise_sd];
        if sds.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return err("standard deviations must be finite and non-negative");
        }
        let probs = [
            self.integer_snap_prob,
            self.overall_integer_snap_prob,
            self.doc_min_weight,
            self.partial_rate,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return err("probabilities and weights in [0, 1] are out of range");
        }
        let finite = self
            .category_weights
            .iter()
            .chain(&self.category_bias)
            .chain(self.sources.iter().map(|s| &s.quality_offset))
            .chain([
                &self.base_quality,
                &self.overall_intercept,
                &self.edit_base,
                &self.edit_slope,
                &self.perturbations_per_point,
                &self.group_leniency.translator,
                &self.group_leniency.student,
                &self.group_leniency.nontranslator,
            ])
            .all(|v| v.is_finite());
        if !finite {
            return err("weights and offsets must be finite");
        }
        Ok(())
    }
}

/// SplitMix64 finaliser, used to derive independent stream seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(seed: u64, tag: u64, indices: &[usize]) -> ChaCha8Rng {
    let mut h = mix(seed ^ mix(tag));
    for &i in indices {
        h = mix(h ^ i as u64);
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn gauss(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    if sd == 0.0 {
        // keep the stream position independent of sd
        let _: f64 = rng.random();
        return 0.0;
    }
    Normal::new(0.0, sd).expect("sd validated").sample(rng)
}

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ne", "pra", "sto", "vé", "du", "ři", "ta", "bo", "zem", "ch", "ly", "so", "ku",
    "je", "na", "vo", "li", "da", "ro", "še", "pe",
];

fn word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=3);
    (0..n).map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())]).collect()
}

fn sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(5..=14);
    let mut s: Vec<String> = (0..n).map(|_| word(rng)).collect();
    s[n - 1].push('.');
    s.join(" ")
}

/// Applies `count` random token edits; the result differs from `text` and is
/// never empty.
fn perturb(text: &str, count: usize, rng: &mut ChaCha8Rng) -> String {
    let mut tokens: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    for _ in 0..count.max(1) {
        match rng.random_range(0..4) {
            0 if tokens.len() > 1 => {
                let i = rng.random_range(0..tokens.len());
                tokens.remove(i);
            }
            1 if tokens.len() > 1 => {
                let i = rng.random_range(0..tokens.len() - 1);
                tokens.swap(i, i + 1);
            }
            2 => {
                let i = rng.random_range(0..=tokens.len());
                tokens.insert(i, word(rng));
            }
            _ => {
                let i = rng.random_range(0..tokens.len());
                tokens[i] = word(rng);
            }
        }
    }
    let out = tokens.join(" ");
    if out == text {
        format!("{out} {}", word(rng))
    } else {
        out
    }
}

fn snap_rating(scale: &RatingScale, x: f64, integer_prob: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    if u < integer_prob {
        x.round().clamp(scale.min, scale.max)
    } else {
        scale.snap(x)
    }
}

const TAG_ANNOTATOR: u64 = 1;
const TAG_SEGMENT: u64 = 2;
const TAG_TEXT: u64 = 3;
const TAG_RATING: u64 = 4;
const TAG_EDIT: u64 = 5;
const TAG_DOC: u64 = 6;
const TAG_TIME: u64 = 7;

/// Builds a campaign from `spec`; a pure function of the spec.
pub fn generate_campaign(spec: &SynthSpec) -> Result<Campaign, InvalidSpec> {
    spec.validate()?;
    let scale = RatingScale::default();
    let mut c = Campaign {
        meta: CampaignMeta {
            name: spec.name.clone(),
            seed: spec.seed,
            scale,
        },
        ..Default::default()
    };

    c.sources = spec
        .sources
        .iter()
        .map(|s| TranslationSource {
            id: s.id.clone(),
            kind: s.kind,
        })
        .collect();

    let mut annotator_effect = Vec::new();
    for group in AnnotatorGroup::ALL {
        for _ in 0..spec.annotators_per_group.get(group) {
            let n = c.annotators.len();
            let mut rng = stream(spec.seed, TAG_ANNOTATOR, &[n]);
            annotator_effect.push(spec.group_leniency.get(group) + gauss(&mut rng, spec.annotator_sd));
            c.annotators.push(AnnotatorProfile {
                id: format!("A{:02}", n + 1),
                group,
                display_name: None,
            });
        }
    }

    let width = spec.documents.to_string().len().max(2);
    let seg_start = spec.context_segments;
    let seg_end = seg_start + spec.segments_per_document;
    for d in 0..spec.documents {
        let doc_id = format!("d{:0width$}", d + 1);
        let mut rng = stream(spec.seed, TAG_TEXT, &[d]);
        let source_segments = (0..seg_end).map(|_| sentence(&mut rng)).collect();
        c.documents.push(Document {
            id: doc_id.clone(),
            source_segments,
            evaluated: SegmentRange {
                start: seg_start,
                end: seg_end,
            },
            full_source_context: None,
        });
        for (si, s) in spec.sources.iter().enumerate() {
            let mut rng = stream(spec.seed, TAG_TEXT, &[d, si + 1]);
            c.translations.push(TranslationSet {
                document_id: doc_id.clone(),
                source_id: s.id.clone(),
                hypotheses: (seg_start..seg_end).map(|_| sentence(&mut rng)).collect(),
            });
        }
    }

    for (d, doc) in c.documents.iter().enumerate() {
        for (si, s) in spec.sources.iter().enumerate() {
            let seg_effect: Vec<f64> = (0..spec.segments_per_document)
                .map(|i| gauss(&mut stream(spec.seed, TAG_SEGMENT, &[d, si, i]), spec.segment_sd))
                .collect();
            let hyps = &c.translations[d * spec.sources.len() + si].hypotheses;
            for (a, ann) in c.annotators.iter().enumerate() {
                let mut cell: Vec<[f64; 7]> = Vec::new();
                for i in 0..spec.segments_per_document {
                    let mut rng = stream(spec.seed, TAG_RATING, &[a, d, si, i]);
                    let q = spec.base_quality + s.quality_offset + seg_effect[i] + annotator_effect[a];
                    let mut values = [0.0; 7];
                    for k in 0..6 {
                        let raw = q + spec.category_bias[k] + gauss(&mut rng, spec.category_sd);
                        values[k] = snap_rating(&scale, raw, spec.integer_snap_prob, &mut rng);
                    }
                    let overall_raw = spec.overall_intercept
                        + (0..6).map(|k| spec.category_weights[k] * values[k]).sum::<f64>()
                        + gauss(&mut rng, spec.noise_sd);
                    values[6] = snap_rating(&scale, overall_raw, spec.overall_integer_snap_prob, &mut rng);
                    cell.push(values);

                    let mut ratings = RatingVector::complete(values);
                    let u: f64 = rng.random();
                    if u < spec.partial_rate {
                        let k = rng.random_range(0..7);
                        ratings.set(Category::ALL[k], None);
                    }

                    let mut erng = stream(spec.seed, TAG_EDIT, &[a, d, si, i]);
                    let deficit = (scale.max - values[6]) / (scale.max - scale.min);
                    let p = (spec.edit_base + spec.edit_slope * deficit).clamp(0.0, 1.0);
                    let u: f64 = erng.random();
                    let original = &hyps[i];
                    let edited_text = if u < p {
                        let count = 1 + (spec.perturbations_per_point * (scale.max - values[6])).round() as usize;
                        perturb(original, count, &mut erng)
                    } else {
                        original.clone()
                    };

                    c.segment_annotations.push(SegmentAnnotation {
                        annotator_id: ann.id.clone(),
                        document_id: doc.id.clone(),
                        segment_index: seg_start + i,
                        source_id: s.id.clone(),
                        ratings,
                        edited_text,
                        time_of_entry: None,
                    });
                }

                let mut rng = stream(spec.seed, TAG_DOC, &[a, d, si]);
                let mut values = [0.0; 7];
                for (k, v) in values.iter_mut().enumerate() {
                    let col: Vec<f64> = cell.iter().map(|r| r[k]).collect();
                    let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let avg = col.iter().sum::<f64>() / col.len() as f64;
                    let raw = spec.doc_min_weight * min + (1.0 - spec.doc_min_weight) * avg
                        + gauss(&mut rng, spec.doc_noise_sd);
                    *v = scale.snap(raw);
                }
                // time is logged per document sheet, shared by its sources
                let minutes = (10.0 + 50.0 * stream(spec.seed, TAG_TIME, &[a, d]).random::<f64>()).round();
                c.document_annotations.push(DocumentAnnotation {
                    annotator_id: ann.id.clone(),
                    document_id: doc.id.clone(),
                    source_id: s.id.clone(),
                    ratings: RatingVector::complete(values),
                    minutes_spent: Some(minutes),
                });
            }
        }
    }
    Ok(c.canonicalized())
}
