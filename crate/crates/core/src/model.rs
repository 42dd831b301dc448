//! Campaign data model: rating scale, categories, documents, translations and
//! the annotations collected for them, plus campaign-level integrity checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance applied to `value / step` when checking grid membership.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// The seven rated quality dimensions, in interface order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Spelling,
    Terminology,
    Grammar,
    Meaning,
    Style,
    Pragmatics,
    Overall,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Spelling,
        Category::Terminology,
        Category::Grammar,
        Category::Meaning,
        Category::Style,
        Category::Pragmatics,
        Category::Overall,
    ];

    /// The six component categories, i.e. everything except `Overall`.
    pub const COMPONENTS: [Category; 6] = [
        Category::Spelling,
        Category::Terminology,
        Category::Grammar,
        Category::Meaning,
        Category::Style,
        Category::Pragmatics,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Spelling => "spelling",
            Category::Terminology => "terminology",
            Category::Grammar => "grammar",
            Category::Meaning => "meaning",
            Category::Style => "style",
            Category::Pragmatics => "pragmatics",
            Category::Overall => "overall",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Category::Spelling => "Spelling",
            Category::Terminology => "Terminology",
            Category::Grammar => "Grammar",
            Category::Meaning => "Meaning",
            Category::Style => "Style",
            Category::Pragmatics => "Pragmatics",
            Category::Overall => "Overall",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_lowercase();
        Category::ALL
            .into_iter()
            .find(|c| c.name() == lower)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// Why a raw score was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RatingError {
    #[error("rating is not a finite number")]
    NonFinite,
    #[error("OutOfRange: {value} is outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("GranularityViolation: {value} is not a multiple of {step}")]
    GranularityViolation { value: f64, step: f64 },
}

impl RatingError {
    pub fn code(&self) -> &'static str {
        match self {
            RatingError::NonFinite => "NonFinite",
            RatingError::OutOfRange { .. } => "OutOfRange",
            RatingError::GranularityViolation { .. } => "GranularityViolation",
        }
    }
}

/// Bounds and granularity of the rating scale. Stored as campaign metadata so
/// that campaigns on other scales can be represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for RatingScale {
    fn default() -> Self {
        RatingScale {
            min: 0.0,
            max: 6.0,
            step: 0.1,
        }
    }
}

impl RatingScale {
    pub fn is_well_formed(&self) -> bool {
        self.min.is_finite()
            && self.max.is_finite()
            && self.step.is_finite()
            && self.step > 0.0
            && self.min < self.max
    }

    pub fn validate(&self, raw: f64) -> Result<Rating, RatingError> {
        if !raw.is_finite() {
            return Err(RatingError::NonFinite);
        }
        // Off-grid values are reported as such even when also out of range,
        // so 6.05 is a granularity error rather than a range error.
        let scaled = (raw - self.min) / self.step;
        if (scaled - scaled.round()).abs() > GRID_TOLERANCE {
            return Err(RatingError::GranularityViolation {
                value: raw,
                step: self.step,
            });
        }
        if raw < self.min || raw > self.max {
            return Err(RatingError::OutOfRange {
                value: raw,
                min: self.min,
                max: self.max,
            });
        }
        Ok(Rating(raw))
    }

    /// Clamps into the scale and rounds to the nearest grid point.
    pub fn snap(&self, x: f64) -> f64 {
        let x = x.clamp(self.min, self.max);
        let per_unit = 1.0 / self.step;
        // Divide by an integral reciprocal where possible so 0.1-grid values
        // come out as the shortest decimal (58 / 10 == 5.8, 58 * 0.1 != 5.8).
        if (per_unit - per_unit.round()).abs() < GRID_TOLERANCE {
            let per_unit = per_unit.round();
            let k = ((x - self.min) * per_unit).round();
            (self.min * per_unit + k) / per_unit
        } else {
            let k = ((x - self.min) / self.step).round();
            self.min + k * self.step
        }
    }
}

/// A score that passed scale validation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Rating(f64);

impl Rating {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Validates a raw score against the default 0–6 scale with 0.1 steps.
pub fn validate_rating(raw: f64) -> Result<Rating, RatingError> {
    RatingScale::default().validate(raw)
}

/// One value per category. Entries are raw (unvalidated) so that files with
/// bad cells can be loaded and reported on; see [`validate_campaign`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RatingVector {
    values: [Option<f64>; 7],
}

impl RatingVector {
    pub fn new(values: [Option<f64>; 7]) -> Self {
        RatingVector { values }
    }

    pub fn complete(values: [f64; 7]) -> Self {
        RatingVector {
            values: values.map(Some),
        }
    }

    pub fn missing() -> Self {
        RatingVector::default()
    }

    pub fn get(&self, category: Category) -> Option<f64> {
        self.values[category.index()]
    }

    pub fn set(&mut self, category: Category, value: Option<f64>) {
        self.values[category.index()] = value;
    }

    pub fn raw(&self) -> &[Option<f64>; 7] {
        &self.values
    }

    /// All seven values, when every category is present.
    pub fn values(&self) -> Option<[f64; 7]> {
        let mut out = [0.0; 7];
        for (slot, v) in out.iter_mut().zip(self.values.iter()) {
            *slot = (*v)?;
        }
        Some(out)
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn is_missing(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }

    pub fn is_partial(&self) -> bool {
        !self.is_complete() && !self.is_missing()
    }

    /// Validates every present entry, returning the first failing category.
    pub fn validate(&self, scale: &RatingScale) -> Result<(), (Category, RatingError)> {
        for c in Category::ALL {
            if let Some(v) = self.get(c) {
                scale.validate(v).map_err(|e| (c, e))?;
            }
        }
        Ok(())
    }
}

impl Serialize for RatingVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(7))?;
        for c in Category::ALL {
            map.serialize_entry(c.name(), &self.get(c))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for RatingVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RatingVectorVisitor;

        impl<'de> Visitor<'de> for RatingVectorVisitor {
            type Value = RatingVector;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping category names to numbers or null")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RatingVector, A::Error> {
                let mut out = RatingVector::default();
                let mut seen = [false; 7];
                while let Some(key) = map.next_key::<String>()? {
                    let c: Category = key.parse().map_err(|_| {
                        de::Error::unknown_field(
                            &key,
                            &[
                                "spelling",
                                "terminology",
                                "grammar",
                                "meaning",
                                "style",
                                "pragmatics",
                                "overall",
                            ],
                        )
                    })?;
                    if seen[c.index()] {
                        return Err(de::Error::custom(format!("duplicate category `{key}`")));
                    }
                    seen[c.index()] = true;
                    out.set(c, map.next_value::<Option<f64>>()?);
                }
                Ok(out)
            }
        }

        deserializer.deserialize_map(RatingVectorVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Optimal,
    Professional,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationSource {
    pub id: String,
    pub kind: SourceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotatorGroup {
    Translator,
    Student,
    Nontranslator,
}

impl AnnotatorGroup {
    pub const ALL: [AnnotatorGroup; 3] = [
        AnnotatorGroup::Translator,
        AnnotatorGroup::Student,
        AnnotatorGroup::Nontranslator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnnotatorGroup::Translator => "translator",
            AnnotatorGroup::Student => "student",
            AnnotatorGroup::Nontranslator => "nontranslator",
        }
    }
}

impl FromStr for AnnotatorGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AnnotatorGroup::ALL
            .into_iter()
            .find(|g| g.name() == s.trim().to_lowercase())
            .ok_or_else(|| format!("unknown annotator group `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatorProfile {
    pub id: String,
    pub group: AnnotatorGroup,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_name: Option<String>,
}

/// Half-open interval `[start, end)` of segment indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRange {
    pub start: usize,
    pub end: usize,
}

impl SegmentRange {
    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= self.start && index < self.end
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub source_segments: Vec<String>,
    pub evaluated: SegmentRange,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_source_context: Option<String>,
}

/// Hypotheses of one source for one document, aligned to the evaluated range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationSet {
    pub document_id: String,
    pub source_id: String,
    pub hypotheses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentAnnotation {
    pub annotator_id: String,
    pub document_id: String,
    pub segment_index: usize,
    pub source_id: String,
    pub ratings: RatingVector,
    /// Equals the original hypothesis when the annotator made no edit.
    pub edited_text: String,
    /// Milliseconds since the Unix epoch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_of_entry: Option<u64>,
}

impl SegmentAnnotation {
    pub fn key(&self) -> SegmentKey {
        SegmentKey {
            annotator_id: self.annotator_id.clone(),
            document_id: self.document_id.clone(),
            segment_index: self.segment_index,
            source_id: self.source_id.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentAnnotation {
    pub annotator_id: String,
    pub document_id: String,
    pub source_id: String,
    pub ratings: RatingVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minutes_spent: Option<f64>,
}

impl DocumentAnnotation {
    pub fn key(&self) -> DocumentKey {
        DocumentKey {
            annotator_id: self.annotator_id.clone(),
            document_id: self.document_id.clone(),
            source_id: self.source_id.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentKey {
    pub annotator_id: String,
    pub document_id: String,
    pub segment_index: usize,
    pub source_id: String,
}

impl fmt::Display for SegmentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, seg {}, {})",
            self.annotator_id, self.document_id, self.segment_index, self.source_id
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DocumentKey {
    pub annotator_id: String,
    pub document_id: String,
    pub source_id: String,
}

impl fmt::Display for DocumentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, DOC, {})",
            self.annotator_id, self.document_id, self.source_id
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignMeta {
    pub name: String,
    pub seed: u64,
    #[serde(default)]
    pub scale: RatingScale,
}

impl Default for CampaignMeta {
    fn default() -> Self {
        CampaignMeta {
            name: "campaign".to_string(),
            seed: 42,
            scale: RatingScale::default(),
        }
    }
}

/// Root aggregate holding everything a rating campaign collected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    pub meta: CampaignMeta,
    pub documents: Vec<Document>,
    pub sources: Vec<TranslationSource>,
    pub annotators: Vec<AnnotatorProfile>,
    pub translations: Vec<TranslationSet>,
    pub segment_annotations: Vec<SegmentAnnotation>,
    pub document_annotations: Vec<DocumentAnnotation>,
}

impl Campaign {
    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn source(&self, id: &str) -> Option<&TranslationSource> {
        self.sources.iter().find(|s| s.id == id)
    }

    pub fn annotator(&self, id: &str) -> Option<&AnnotatorProfile> {
        self.annotators.iter().find(|a| a.id == id)
    }

    pub fn translation(&self, document_id: &str, source_id: &str) -> Option<&TranslationSet> {
        self.translations
            .iter()
            .find(|t| t.document_id == document_id && t.source_id == source_id)
    }

    /// Original hypothesis text for an evaluated segment.
    pub fn hypothesis(&self, document_id: &str, source_id: &str, segment_index: usize) -> Option<&str> {
        let doc = self.document(document_id)?;
        if !doc.evaluated.contains(segment_index) {
            return None;
        }
        let set = self.translation(document_id, source_id)?;
        set.hypotheses
            .get(segment_index - doc.evaluated.start)
            .map(String::as_str)
    }

    /// The first source marked as the optimal translation.
    pub fn optimal_source(&self) -> Option<&TranslationSource> {
        self.sources.iter().find(|s| s.kind == SourceKind::Optimal)
    }

    /// Index from annotation key to annotation. Later duplicates win.
    pub fn segment_index(&self) -> BTreeMap<SegmentKey, &SegmentAnnotation> {
        self.segment_annotations.iter().map(|a| (a.key(), a)).collect()
    }

    pub fn document_index(&self) -> BTreeMap<DocumentKey, &DocumentAnnotation> {
        self.document_annotations.iter().map(|a| (a.key(), a)).collect()
    }

    /// Copy with every collection sorted by its key, the form used for
    /// comparison and export.
    pub fn canonicalized(&self) -> Campaign {
        let mut c = self.clone();
        c.documents.sort_by(|a, b| a.id.cmp(&b.id));
        c.sources.sort_by(|a, b| a.id.cmp(&b.id));
        c.annotators.sort_by(|a, b| a.id.cmp(&b.id));
        c.translations
            .sort_by(|a, b| (&a.document_id, &a.source_id).cmp(&(&b.document_id, &b.source_id)));
        c.segment_annotations.sort_by_key(|a| a.key());
        c.document_annotations.sort_by_key(|a| a.key());
        c
    }

    pub fn canonically_eq(&self, other: &Campaign) -> bool {
        self.canonicalized() == other.canonicalized()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    InvalidScale,
    DuplicateId,
    UnknownReference,
    InvalidRange,
    MissingTranslation,
    HypothesisCountMismatch,
    EmptyHypothesis,
    DuplicateAnnotation,
    SegmentNotEvaluated,
    InvalidRating,
    EmptyEditedText,
    InvalidMinutes,
    PartialRatings,
    MissingRatings,
    NoAnnotations,
}

impl IssueKind {
    pub fn describe(self) -> &'static str {
        match self {
            IssueKind::InvalidScale => "invalid rating scale",
            IssueKind::DuplicateId => "duplicate id",
            IssueKind::UnknownReference => "unknown reference",
            IssueKind::InvalidRange => "invalid evaluated range",
            IssueKind::MissingTranslation => "missing translation set",
            IssueKind::HypothesisCountMismatch => "hypothesis count mismatch",
            IssueKind::EmptyHypothesis => "empty hypothesis",
            IssueKind::DuplicateAnnotation => "duplicate annotation key",
            IssueKind::SegmentNotEvaluated => "segment outside evaluated range",
            IssueKind::InvalidRating => "invalid rating",
            IssueKind::EmptyEditedText => "empty edited text",
            IssueKind::InvalidMinutes => "invalid minutes spent",
            IssueKind::PartialRatings => "partial rating vector",
            IssueKind::MissingRatings => "missing rating vector",
            IssueKind::NoAnnotations => "no annotations",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub location: String,
    pub detail: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.describe(), self.location)?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSummary {
    pub documents: usize,
    pub segments_evaluated: usize,
    pub sources: usize,
    pub annotators: usize,
    pub annotators_per_group: BTreeMap<String, usize>,
    pub segment_annotations: usize,
    pub document_annotations: usize,
    pub complete_segment_vectors: usize,
    pub complete_document_vectors: usize,
    pub partial_vectors: usize,
    pub segment_ratings: usize,
    pub document_ratings: usize,
    /// 7 × every complete rating vector, both levels.
    pub ratings: usize,
    pub edited_segments: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
    pub counts: CountSummary,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, kind: IssueKind, location: impl Into<String>, detail: impl Into<String>) {
        self.errors.push(Issue {
            kind,
            location: location.into(),
            detail: detail.into(),
        });
    }

    fn warn(&mut self, kind: IssueKind, location: impl Into<String>, detail: impl Into<String>) {
        self.warnings.push(Issue {
            kind,
            location: location.into(),
            detail: detail.into(),
        });
    }
}

fn check_unique<'a>(
    report: &mut ValidationReport,
    what: &str,
    ids: impl Iterator<Item = &'a str>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            report.error(IssueKind::DuplicateId, format!("{what} `{id}`"), "");
        }
    }
    seen
}

fn check_ratings(
    report: &mut ValidationReport,
    scale: &RatingScale,
    location: &str,
    ratings: &RatingVector,
) {
    for c in Category::ALL {
        if let Some(v) = ratings.get(c) {
            if let Err(e) = scale.validate(v) {
                report.error(
                    IssueKind::InvalidRating,
                    format!("{location} {}", c.name()),
                    format!("{} = {v}", e),
                );
            }
        }
    }
    if ratings.is_partial() {
        let missing: Vec<_> = Category::ALL
            .into_iter()
            .filter(|c| ratings.get(*c).is_none())
            .map(Category::name)
            .collect();
        report.warn(
            IssueKind::PartialRatings,
            location,
            format!("missing {}; excluded from analyses", missing.join(", ")),
        );
    } else if ratings.is_missing() {
        report.warn(IssueKind::MissingRatings, location, "no ratings entered");
    }
}

/// Checks every campaign invariant. Violations become report entries; this
/// function never fails.
pub fn validate_campaign(c: &Campaign) -> ValidationReport {
    let mut report = ValidationReport::default();
    let scale = c.meta.scale;
    if !scale.is_well_formed() {
        report.error(
            IssueKind::InvalidScale,
            "meta.scale",
            format!("min {} max {} step {}", scale.min, scale.max, scale.step),
        );
    }

    let doc_ids = check_unique(&mut report, "document", c.documents.iter().map(|d| d.id.as_str()));
    let source_ids = check_unique(&mut report, "source", c.sources.iter().map(|s| s.id.as_str()));
    let annotator_ids =
        check_unique(&mut report, "annotator", c.annotators.iter().map(|a| a.id.as_str()));

    for d in &c.documents {
        let r = d.evaluated;
        if r.start > r.end || r.end > d.source_segments.len() {
            report.error(
                IssueKind::InvalidRange,
                format!("document `{}`", d.id),
                format!(
                    "[{}, {}) with {} source segments",
                    r.start,
                    r.end,
                    d.source_segments.len()
                ),
            );
        }
    }

    let mut translation_keys = BTreeSet::new();
    for t in &c.translations {
        let loc = format!("translation ({}, {})", t.document_id, t.source_id);
        if !translation_keys.insert((t.document_id.as_str(), t.source_id.as_str())) {
            report.error(IssueKind::DuplicateId, loc.clone(), "");
        }
        if !source_ids.contains(t.source_id.as_str()) {
            report.error(IssueKind::UnknownReference, loc.clone(), format!("source `{}`", t.source_id));
        }
        match c.document(&t.document_id) {
            None => report.error(
                IssueKind::UnknownReference,
                loc.clone(),
                format!("document `{}`", t.document_id),
            ),
            Some(d) => {
                if t.hypotheses.len() != d.evaluated.len() {
                    report.error(
                        IssueKind::HypothesisCountMismatch,
                        loc.clone(),
                        format!("{} hypotheses for {} evaluated segments", t.hypotheses.len(), d.evaluated.len()),
                    );
                }
            }
        }
        for (i, h) in t.hypotheses.iter().enumerate() {
            if h.trim().is_empty() {
                report.error(IssueKind::EmptyHypothesis, format!("{loc} #{i}"), "");
            }
        }
    }
    for d in &c.documents {
        for s in &c.sources {
            if !translation_keys.contains(&(d.id.as_str(), s.id.as_str())) {
                report.error(
                    IssueKind::MissingTranslation,
                    format!("translation ({}, {})", d.id, s.id),
                    "",
                );
            }
        }
    }

    let mut seg_keys = BTreeSet::new();
    let mut counts = CountSummary::default();
    for a in &c.segment_annotations {
        let key = a.key();
        let loc = format!("segment annotation {key}");
        if !seg_keys.insert(key) {
            report.error(IssueKind::DuplicateAnnotation, loc.clone(), "");
        }
        if !annotator_ids.contains(a.annotator_id.as_str()) {
            report.error(IssueKind::UnknownReference, loc.clone(), format!("annotator `{}`", a.annotator_id));
        }
        if !source_ids.contains(a.source_id.as_str()) {
            report.error(IssueKind::UnknownReference, loc.clone(), format!("source `{}`", a.source_id));
        }
        match c.document(&a.document_id) {
            None => report.error(
                IssueKind::UnknownReference,
                loc.clone(),
                format!("document `{}`", a.document_id),
            ),
            Some(d) if !d.evaluated.contains(a.segment_index) => report.error(
                IssueKind::SegmentNotEvaluated,
                loc.clone(),
                format!("evaluated range is [{}, {})", d.evaluated.start, d.evaluated.end),
            ),
            Some(_) => {}
        }
        if a.edited_text.is_empty() {
            report.error(IssueKind::EmptyEditedText, loc.clone(), "");
        }
        check_ratings(&mut report, &scale, &loc, &a.ratings);
        if a.ratings.is_complete() {
            counts.complete_segment_vectors += 1;
        }
        if a.ratings.is_partial() {
            counts.partial_vectors += 1;
        }
        if let Some(orig) = c.hypothesis(&a.document_id, &a.source_id, a.segment_index) {
            if orig != a.edited_text {
                counts.edited_segments += 1;
            }
        }
    }

    let mut doc_keys = BTreeSet::new();
    for a in &c.document_annotations {
        let key = a.key();
        let loc = format!("document annotation {key}");
        if !doc_keys.insert(key) {
            report.error(IssueKind::DuplicateAnnotation, loc.clone(), "");
        }
        if !annotator_ids.contains(a.annotator_id.as_str()) {
            report.error(IssueKind::UnknownReference, loc.clone(), format!("annotator `{}`", a.annotator_id));
        }
        if !source_ids.contains(a.source_id.as_str()) {
            report.error(IssueKind::UnknownReference, loc.clone(), format!("source `{}`", a.source_id));
        }
        if !doc_ids.contains(a.document_id.as_str()) {
            report.error(IssueKind::UnknownReference, loc.clone(), format!("document `{}`", a.document_id));
        }
        if let Some(m) = a.minutes_spent {
            if !(m.is_finite() && m > 0.0) {
                report.error(IssueKind::InvalidMinutes, loc.clone(), format!("{m}"));
            }
        }
        check_ratings(&mut report, &scale, &loc, &a.ratings);
        if a.ratings.is_complete() {
            counts.complete_document_vectors += 1;
        }
        if a.ratings.is_partial() {
            counts.partial_vectors += 1;
        }
    }

    if c.segment_annotations.is_empty() && c.document_annotations.is_empty() {
        report.warn(IssueKind::NoAnnotations, "campaign", "");
    }

    counts.documents = c.documents.len();
    counts.segments_evaluated = c.documents.iter().map(|d| d.evaluated.len()).sum();
    counts.sources = c.sources.len();
    counts.annotators = c.annotators.len();
    for a in &c.annotators {
        *counts
            .annotators_per_group
            .entry(a.group.name().to_string())
            .or_default() += 1;
    }
    counts.segment_annotations = c.segment_annotations.len();
    counts.document_annotations = c.document_annotations.len();
    counts.segment_ratings = 7 * counts.complete_segment_vectors;
    counts.document_ratings = 7 * counts.complete_document_vectors;
    counts.ratings = counts.segment_ratings + counts.document_ratings;
    report.counts = counts;
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessCell {
    pub annotator_id: String,
    pub document_id: String,
    pub source_id: String,
    /// Fraction of evaluated segments with a complete rating vector.
    pub fraction: f64,
}

/// Per (annotator, document, source) share of evaluated segments annotated,
/// sorted by key. Documents without evaluated segments count as complete.
pub fn completeness_matrix(c: &Campaign) -> Vec<CompletenessCell> {
    let mut done: BTreeMap<(&str, &str, &str), BTreeSet<usize>> = BTreeMap::new();
    for a in &c.segment_annotations {
        if a.ratings.is_complete() {
            done.entry((&a.annotator_id, &a.document_id, &a.source_id))
                .or_default()
                .insert(a.segment_index);
        }
    }
    let mut cells = Vec::new();
    for ann in &c.annotators {
        for d in &c.documents {
            for s in &c.sources {
                let total = d.evaluated.len();
                let annotated = done
                    .get(&(ann.id.as_str(), d.id.as_str(), s.id.as_str()))
                    .map(|set| set.iter().filter(|i| d.evaluated.contains(**i)).count())
                    .unwrap_or(0);
                let fraction = if total == 0 {
                    1.0
                } else {
                    annotated as f64 / total as f64
                };
                cells.push(CompletenessCell {
                    annotator_id: ann.id.clone(),
                    document_id: d.id.clone(),
                    source_id: s.id.clone(),
                    fraction,
                });
            }
        }
    }
    cells.sort_by(|a, b| {
        (&a.annotator_id, &a.document_id, &a.source_id).cmp(&(&b.annotator_id, &b.document_id, &b.source_id))
    });
    cells
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// One document of `segments` evaluated segments, sources N1..P3, every
    /// annotator fully annotated with a constant vector.
    pub fn small_campaign(annotators: usize, segments: usize) -> Campaign {
        let sources = ["N1", "P1", "P2", "P3"];
        let mut c = Campaign {
            meta: CampaignMeta::default(),
            documents: vec![Document {
                id: "d01".into(),
                source_segments: (0..segments + 2).map(|i| format!("Source sentence {i}.")).collect(),
                evaluated: SegmentRange {
                    start: 1,
                    end: 1 + segments,
                },
                full_source_context: None,
            }],
            sources: sources
                .iter()
                .enumerate()
                .map(|(i, s)| TranslationSource {
                    id: s.to_string(),
                    kind: if i == 0 {
                        SourceKind::Optimal
                    } else {
                        SourceKind::Professional
                    },
                })
                .collect(),
            annotators: (0..annotators)
                .map(|i| AnnotatorProfile {
                    id: format!("A{:02}", i + 1),
                    group: AnnotatorGroup::Translator,
                    display_name: None,
                })
                .collect(),
            ..Default::default()
        };
        for s in sources {
            c.translations.push(TranslationSet {
                document_id: "d01".into(),
                source_id: s.into(),
                hypotheses: (0..segments).map(|i| format!("hyp {s} {i}")).collect(),
            });
        }
        for a in 0..annotators {
            for s in sources {
                for seg in 1..=segments {
                    c.segment_annotations.push(SegmentAnnotation {
                        annotator_id: format!("A{:02}", a + 1),
                        document_id: "d01".into(),
                        segment_index: seg,
                        source_id: s.into(),
                        ratings: RatingVector::complete([5.0; 7]),
                        edited_text: format!("hyp {s} {}", seg - 1),
                        time_of_entry: None,
                    });
                }
                c.document_annotations.push(DocumentAnnotation {
                    annotator_id: format!("A{:02}", a + 1),
                    document_id: "d01".into(),
                    source_id: s.into(),
                    ratings: RatingVector::complete([5.0; 7]),
                    minutes_spent: Some(30.0),
                });
            }
        }
        c
    }
}
