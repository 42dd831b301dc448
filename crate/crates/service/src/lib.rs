//! Campaign server.
//!
//! A [`Service`] owns a state directory:
//!
//! ```text
//! campaign.json   the imported campaign (canonical format)
//! tokens.json     annotator id -> session token
//! journal.jsonl   append-only log of accepted submissions
//! snapshot.json   materialized campaign as of some journal sequence
//! ```
//!
//! Annotators see translation columns only by position; the position to
//! source mapping is a per-(annotator, document) permutation from
//! [`shuffle_columns`].

pub mod http;
pub mod journal;
pub mod shuffle;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use ortkit::ingest::{self, Format, IngestError, SCHEMA_VERSION};
use ortkit::model::{
    completeness_matrix, Campaign, Category, DocumentAnnotation, RatingScale, RatingVector, SegmentAnnotation,
};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use journal::{Journal, JournalEntry, Payload};
pub use shuffle::shuffle_columns;

const CAMPAIGN_FILE: &str = "campaign.json";
const TOKENS_FILE: &str = "tokens.json";
const JOURNAL_FILE: &str = "journal.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

/// Column colours by position.
pub const COLUMN_COLORS: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("missing or invalid token")]
    Unauthorized,
    #[error("{field}: {code}: {message}")]
    ValidationFailed {
        field: String,
        code: String,
        message: String,
    },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("journal line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("state directory {0} is already initialized")]
    AlreadyInitialized(PathBuf),
    #[error("state directory {0} is not initialized")]
    NotInitialized(PathBuf),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    fn invalid(field: impl Into<String>, code: impl Into<String>, message: impl Into<String>) -> Self {
        ServiceError::ValidationFailed {
            field: field.into(),
            code: code.into(),
            message: message.into(),
        }
    }
}

/// Ratings as sent by clients: category name -> number. All seven are
/// required; values are checked against the campaign scale.
pub type RawRatings = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSubmission {
    pub document_id: String,
    pub segment_index: usize,
    /// Column position as shown to the annotator.
    pub column: usize,
    pub ratings: RawRatings,
    /// Omitted means the hypothesis was left as is.
    #[serde(default)]
    pub edited_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentSubmission {
    pub document_id: String,
    pub column: usize,
    pub ratings: RawRatings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSubmission {
    pub document_id: String,
    pub minutes: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub sequence: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignMetaView {
    pub name: String,
    pub scale: RatingScale,
    pub categories: Vec<String>,
    pub columns: usize,
    pub documents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnView {
    pub position: usize,
    pub color: String,
    /// Aligned to the evaluated range: entry 0 is segment `evaluated_start`.
    pub hypotheses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentAnswer {
    pub segment_index: usize,
    pub column: usize,
    pub ratings: RatingVector,
    pub edited_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentAnswer {
    pub column: usize,
    pub ratings: RatingVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentView {
    pub document_id: String,
    pub source_segments: Vec<String>,
    pub evaluated_start: usize,
    pub evaluated_end: usize,
    pub full_source_context: Option<String>,
    pub columns: Vec<ColumnView>,
    pub segment_answers: Vec<SegmentAnswer>,
    pub document_answers: Vec<DocumentAnswer>,
    pub minutes_spent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentProgress {
    pub annotator_id: String,
    pub document_id: String,
    /// Share of (segment, column) cells with complete ratings.
    pub fraction: f64,
    /// Share of columns with a complete document-level rating.
    pub document_fraction: f64,
    pub complete: bool,
    pub minutes_spent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub documents: Vec<DocumentProgress>,
}

/// Token and sequence state, guarded by one lock so that writes are
/// serialized through the journal.
struct Inner {
    campaign: Campaign,
    journal: Journal,
    last_seq: u64,
    since_snapshot: usize,
    minutes: BTreeMap<(String, String), f64>,
}

pub struct Service {
    dir: PathBuf,
    admin_token: String,
    tokens: BTreeMap<String, String>,
    snapshot_every: usize,
    inner: Mutex<Inner>,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    minutes: Vec<(String, String, f64)>,
    campaign: Campaign,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn new_token() -> String {
    let mut bytes = [0u8; 16];
    rand::rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::File::open(&tmp)?.sync_all()?;
    std::fs::rename(tmp, path)
}

/// Applies one journal entry to the materialized view.
fn apply(campaign: &mut Campaign, minutes: &mut BTreeMap<(String, String), f64>, entry: &JournalEntry) {
    match &entry.payload {
        Payload::Segment(a) => {
            let key = a.key();
            match campaign.segment_annotations.iter_mut().find(|x| x.key() == key) {
                Some(slot) => *slot = a.clone(),
                None => campaign.segment_annotations.push(a.clone()),
            }
        }
        Payload::Document(a) => {
            let key = a.key();
            let mut a = a.clone();
            a.minutes_spent = minutes
                .get(&(a.annotator_id.clone(), a.document_id.clone()))
                .copied()
                .filter(|m| *m > 0.0);
            match campaign.document_annotations.iter_mut().find(|x| x.key() == key) {
                Some(slot) => {
                    a.minutes_spent = a.minutes_spent.or(slot.minutes_spent);
                    *slot = a;
                }
                None => campaign.document_annotations.push(a),
            }
        }
        Payload::Time { document_id, minutes: m } => {
            let key = (entry.annotator_id.clone(), document_id.clone());
            let total = minutes.entry(key).or_insert(0.0);
            *total += m;
            let total = *total;
            for d in campaign
                .document_annotations
                .iter_mut()
                .filter(|d| d.annotator_id == entry.annotator_id && &d.document_id == document_id)
            {
                d.minutes_spent = Some(total);
            }
        }
    }
}

/// Replays `entries` on top of `base`; the result is what the server holds
/// after accepting them.
pub fn replay(base: &Campaign, entries: &[JournalEntry]) -> Campaign {
    let mut c = base.clone();
    let mut minutes = BTreeMap::new();
    for e in entries {
        apply(&mut c, &mut minutes, e);
    }
    c.canonicalized()
}

fn parse_ratings(raw: &RawRatings, scale: &RatingScale) -> Result<RatingVector, ServiceError> {
    for key in raw.keys() {
        if key.parse::<Category>().is_err() {
            return Err(ServiceError::invalid(
                format!("ratings.{key}"),
                "UnknownCategory",
                format!("`{key}` is not a rating category"),
            ));
        }
    }
    let mut out = RatingVector::missing();
    for cat in Category::ALL {
        let field = format!("ratings.{}", cat.name());
        let value = match raw.get(cat.name()) {
            None | Some(Value::Null) => {
                return Err(ServiceError::invalid(field, "Required", "a rating is required"));
            }
            Some(Value::Number(n)) => n.as_f64().unwrap_or(f64::NAN),
            Some(other) => {
                return Err(ServiceError::invalid(field, "NotANumber", format!("{other} is not a number")));
            }
        };
        let rating = scale
            .validate(value)
            .map_err(|e| ServiceError::invalid(field.clone(), e.code(), format!("{value}: {e}")))?;
        out.set(cat, Some(rating.value()));
    }
    Ok(out)
}

impl Service {
    /// Creates a new state directory for `campaign` and issues one token per
    /// annotator.
    pub fn init(dir: &Path, campaign: Campaign, admin_token: &str) -> Result<Service, ServiceError> {
        if dir.join(CAMPAIGN_FILE).exists() {
            return Err(ServiceError::AlreadyInitialized(dir.to_path_buf()));
        }
        let campaign = ingest::check_integrity(campaign)?;
        std::fs::create_dir_all(dir)?;
        let tokens: BTreeMap<String, String> = campaign.annotators.iter().map(|a| (a.id.clone(), new_token())).collect();
        write_atomic(&dir.join(TOKENS_FILE), &serde_json::to_vec_pretty(&tokens).expect("tokens serialize"))?;
        write_atomic(&dir.join(CAMPAIGN_FILE), &ingest::to_canonical_json(&campaign))?;
        Self::open(dir, admin_token)
    }

    /// Opens an initialized state directory, replaying the journal.
    pub fn open(dir: &Path, admin_token: &str) -> Result<Service, ServiceError> {
        let campaign_path = dir.join(CAMPAIGN_FILE);
        if !campaign_path.exists() {
            return Err(ServiceError::NotInitialized(dir.to_path_buf()));
        }
        let base = ingest::load_campaign(&campaign_path, Format::Canonical)?;
        let tokens: BTreeMap<String, String> = serde_json::from_slice(&std::fs::read(dir.join(TOKENS_FILE))?)
            .map_err(|e| ServiceError::Corrupt {
                line: e.line(),
                message: format!("{TOKENS_FILE}: {e}"),
            })?;
        let (journal, entries) = Journal::open(&dir.join(JOURNAL_FILE))?;

        let (mut campaign, mut minutes, start_seq) = match std::fs::read(dir.join(SNAPSHOT_FILE)) {
            Ok(bytes) => {
                let snap: Snapshot = serde_json::from_slice(&bytes).map_err(|e| ServiceError::Corrupt {
                    line: e.line(),
                    message: format!("{SNAPSHOT_FILE}: {e}"),
                })?;
                let minutes = snap.minutes.into_iter().map(|(a, d, m)| ((a, d), m)).collect();
                (snap.campaign, minutes, snap.seq)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => (base, BTreeMap::new(), 0),
            Err(e) => return Err(e.into()),
        };
        let mut last_seq = start_seq;
        for e in entries.iter().filter(|e| e.seq > start_seq) {
            apply(&mut campaign, &mut minutes, e);
            last_seq = e.seq;
        }
        if let Some(last) = entries.last() {
            last_seq = last_seq.max(last.seq);
        }
        Ok(Service {
            dir: dir.to_path_buf(),
            admin_token: admin_token.to_string(),
            tokens,
            snapshot_every: 200,
            inner: Mutex::new(Inner {
                campaign: campaign.canonicalized(),
                journal,
                last_seq,
                since_snapshot: 0,
                minutes,
            }),
        })
    }

    pub fn with_snapshot_every(mut self, n: usize) -> Self {
        self.snapshot_every = n.max(1);
        self
    }

    pub fn state_dir(&self) -> &Path {
        &self.dir
    }

    /// Annotator id -> token.
    pub fn tokens(&self) -> &BTreeMap<String, String> {
        &self.tokens
    }

    pub fn is_admin(&self, token: &str) -> bool {
        !self.admin_token.is_empty() && token == self.admin_token
    }

    /// Resolves a session token to its annotator id.
    pub fn authenticate(&self, token: Option<&str>) -> Result<String, ServiceError> {
        let token = token.ok_or(ServiceError::Unauthorized)?;
        self.tokens
            .iter()
            .find(|(_, t)| t.as_str() == token)
            .map(|(a, _)| a.clone())
            .ok_or(ServiceError::Unauthorized)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn source_ids(c: &Campaign) -> Vec<String> {
        c.sources.iter().map(|s| s.id.clone()).collect()
    }

    fn column_source(c: &Campaign, annotator: &str, document: &str, column: usize) -> Result<String, ServiceError> {
        let order = shuffle_columns(annotator, document, c.meta.seed, &Self::source_ids(c));
        order
            .get(column)
            .cloned()
            .ok_or_else(|| ServiceError::invalid("column", "UnknownColumn", format!("column {column} does not exist")))
    }

    pub fn meta(&self) -> CampaignMetaView {
        let inner = self.lock();
        let c = &inner.campaign;
        CampaignMetaView {
            name: c.meta.name.clone(),
            scale: c.meta.scale,
            categories: Category::ALL.iter().map(|c| c.name().to_string()).collect(),
            columns: c.sources.len(),
            documents: c.documents.iter().map(|d| d.id.clone()).collect(),
        }
    }

    pub fn document_view(&self, annotator: &str, document_id: &str) -> Result<DocumentView, ServiceError> {
        let inner = self.lock();
        let c = &inner.campaign;
        let doc = c
            .document(document_id)
            .ok_or_else(|| ServiceError::NotFound(format!("document {document_id}")))?;
        let order = shuffle_columns(annotator, document_id, c.meta.seed, &Self::source_ids(c));
        let position: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let columns = order
            .iter()
            .enumerate()
            .map(|(i, s)| ColumnView {
                position: i,
                color: COLUMN_COLORS[i % COLUMN_COLORS.len()].to_string(),
                hypotheses: c.translation(document_id, s).map(|t| t.hypotheses.clone()).unwrap_or_default(),
            })
            .collect();
        let mut segment_answers: Vec<SegmentAnswer> = c
            .segment_annotations
            .iter()
            .filter(|a| a.annotator_id == annotator && a.document_id == document_id)
            .map(|a| SegmentAnswer {
                segment_index: a.segment_index,
                column: position[a.source_id.as_str()],
                ratings: a.ratings,
                edited_text: a.edited_text.clone(),
            })
            .collect();
        segment_answers.sort_by_key(|a| (a.segment_index, a.column));
        let mut document_answers: Vec<DocumentAnswer> = c
            .document_annotations
            .iter()
            .filter(|a| a.annotator_id == annotator && a.document_id == document_id)
            .map(|a| DocumentAnswer {
                column: position[a.source_id.as_str()],
                ratings: a.ratings,
            })
            .collect();
        document_answers.sort_by_key(|a| a.column);
        Ok(DocumentView {
            document_id: doc.id.clone(),
            source_segments: doc.source_segments.clone(),
            evaluated_start: doc.evaluated.start,
            evaluated_end: doc.evaluated.end,
            full_source_context: doc.full_source_context.clone(),
            columns,
            segment_answers,
            document_answers,
            minutes_spent: inner
                .minutes
                .get(&(annotator.to_string(), document_id.to_string()))
                .copied()
                .unwrap_or(0.0),
        })
    }

    fn commit(&self, inner: &mut Inner, annotator: &str, payload: Payload) -> Result<Ack, ServiceError> {
        let entry = JournalEntry {
            seq: inner.last_seq + 1,
            timestamp_ms: now_ms(),
            annotator_id: annotator.to_string(),
            payload,
        };
        inner.journal.append(&entry)?;
        inner.last_seq = entry.seq;
        let Inner { campaign, minutes, .. } = inner;
        apply(campaign, minutes, &entry);
        inner.since_snapshot += 1;
        if inner.since_snapshot >= self.snapshot_every {
            self.write_snapshot(inner)?;
        }
        Ok(Ack { sequence: entry.seq })
    }

    fn write_snapshot(&self, inner: &mut Inner) -> Result<(), ServiceError> {
        let snap = Snapshot {
            seq: inner.last_seq,
            minutes: inner.minutes.iter().map(|((a, d), m)| (a.clone(), d.clone(), *m)).collect(),
            campaign: inner.campaign.canonicalized(),
        };
        write_atomic(&self.dir.join(SNAPSHOT_FILE), &serde_json::to_vec(&snap).expect("snapshot serializes"))?;
        inner.since_snapshot = 0;
        Ok(())
    }

    pub fn submit_segment(&self, annotator: &str, sub: &SegmentSubmission) -> Result<Ack, ServiceError> {
        let mut inner = self.lock();
        let c = &inner.campaign;
        let doc = c.document(&sub.document_id).ok_or_else(|| {
            ServiceError::invalid("document_id", "UnknownDocument", format!("no document `{}`", sub.document_id))
        })?;
        if !doc.evaluated.contains(sub.segment_index) {
            return Err(ServiceError::invalid(
                "segment_index",
                "NotEvaluated",
                format!("segment {} is not evaluated in {}", sub.segment_index, doc.id),
            ));
        }
        let source_id = Self::column_source(c, annotator, &sub.document_id, sub.column)?;
        let ratings = parse_ratings(&sub.ratings, &c.meta.scale)?;
        let original = c.hypothesis(&sub.document_id, &source_id, sub.segment_index).unwrap_or("");
        let edited_text = match &sub.edited_text {
            Some(t) if t.trim().is_empty() => {
                return Err(ServiceError::invalid("edited_text", "Empty", "edited text must not be empty"));
            }
            Some(t) => t.clone(),
            None => original.to_string(),
        };
        let annotation = SegmentAnnotation {
            annotator_id: annotator.to_string(),
            document_id: sub.document_id.clone(),
            segment_index: sub.segment_index,
            source_id,
            ratings,
            edited_text,
            time_of_entry: Some(now_ms()),
        };
        self.commit(&mut inner, annotator, Payload::Segment(annotation))
    }

    pub fn submit_document(&self, annotator: &str, sub: &DocumentSubmission) -> Result<Ack, ServiceError> {
        let mut inner = self.lock();
        let c = &inner.campaign;
        if c.document(&sub.document_id).is_none() {
            return Err(ServiceError::invalid(
                "document_id",
                "UnknownDocument",
                format!("no document `{}`", sub.document_id),
            ));
        }
        let source_id = Self::column_source(c, annotator, &sub.document_id, sub.column)?;
        let ratings = parse_ratings(&sub.ratings, &c.meta.scale)?;
        let annotation = DocumentAnnotation {
            annotator_id: annotator.to_string(),
            document_id: sub.document_id.clone(),
            source_id,
            ratings,
            minutes_spent: None,
        };
        self.commit(&mut inner, annotator, Payload::Document(annotation))
    }

    pub fn log_time(&self, annotator: &str, sub: &TimeSubmission) -> Result<Ack, ServiceError> {
        let mut inner = self.lock();
        if inner.campaign.document(&sub.document_id).is_none() {
            return Err(ServiceError::invalid(
                "document_id",
                "UnknownDocument",
                format!("no document `{}`", sub.document_id),
            ));
        }
        if !sub.minutes.is_finite() || sub.minutes <= 0.0 {
            return Err(ServiceError::invalid("minutes", "NotPositive", "minutes must be a positive number"));
        }
        self.commit(
            &mut inner,
            annotator,
            Payload::Time {
                document_id: sub.document_id.clone(),
                minutes: sub.minutes,
            },
        )
    }

    /// Completeness per document for one annotator, or for everyone when
    /// `annotator` is `None`.
    pub fn progress(&self, annotator: Option<&str>) -> Progress {
        let inner = self.lock();
        let c = &inner.campaign;
        let mut seg: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for cell in completeness_matrix(c) {
            if annotator.is_none_or(|a| a == cell.annotator_id) {
                seg.entry((cell.annotator_id, cell.document_id)).or_default().push(cell.fraction);
            }
        }
        let n_sources = c.sources.len().max(1) as f64;
        let documents = seg
            .into_iter()
            .map(|((a, d), fractions)| {
                let fraction = fractions.iter().sum::<f64>() / fractions.len() as f64;
                let doc_done = c
                    .document_annotations
                    .iter()
                    .filter(|x| x.annotator_id == a && x.document_id == d && x.ratings.is_complete())
                    .count() as f64;
                let document_fraction = doc_done / n_sources;
                DocumentProgress {
                    minutes_spent: inner.minutes.get(&(a.clone(), d.clone())).copied().unwrap_or(0.0),
                    complete: fraction >= 1.0 && document_fraction >= 1.0,
                    annotator_id: a,
                    document_id: d,
                    fraction,
                    document_fraction,
                }
            })
            .collect();
        Progress { documents }
    }

    /// Current campaign including every accepted submission.
    pub fn export(&self) -> Campaign {
        self.lock().campaign.canonicalized()
    }

    pub fn last_sequence(&self) -> u64 {
        self.lock().last_seq
    }

    /// Writes a snapshot now, regardless of the interval.
    pub fn snapshot(&self) -> Result<(), ServiceError> {
        let mut inner = self.lock();
        self.write_snapshot(&mut inner)
    }
}

pub fn schema_version() -> &'static str {
    SCHEMA_VERSION
}

#[cfg(test)]
mod tests {
    use super::*;
    use ortkit::synth::{generate_campaign, SynthSpec};

    fn empty_campaign() -> Campaign {
        let mut c = generate_campaign(&SynthSpec {
            documents: 2,
            ..Default::default()
        })
        .unwrap();
        c.segment_annotations.clear();
        c.document_annotations.clear();
        c
    }

    fn full_ratings(v: f64) -> RawRatings {
        Category::ALL.iter().map(|c| (c.name().to_string(), serde_json::json!(v))).collect()
    }

    #[test]
    fn submissions_validate_and_upsert() {
        let dir = tempfile::tempdir().unwrap();
        let svc = Service::init(dir.path(), empty_campaign(), "admin").unwrap();
        let sub = SegmentSubmission {
            document_id: "d01".into(),
            segment_index: 2,
            column: 0,
            ratings: full_ratings(5.8),
            edited_text: None,
        };
        assert_eq!(svc.submit_segment("A01", &sub).unwrap().sequence, 1);
        let mut bad = sub.clone();
        for (value, expected) in [(6.05, "GranularityViolation"), (6.3, "OutOfRange"), (-0.1, "OutOfRange")] {
            bad.ratings.insert("style".into(), serde_json::json!(value));
            match svc.submit_segment("A01", &bad) {
                Err(ServiceError::ValidationFailed { field, code, .. }) => {
                    assert_eq!(field, "ratings.style");
                    assert_eq!(code, expected);
                }
                other => panic!("{other:?}"),
            }
        }
        bad.ratings.remove("grammar");
        assert!(matches!(
            svc.submit_segment("A01", &bad),
            Err(ServiceError::ValidationFailed { code, .. }) if code == "Required"
        ));
        assert_eq!(svc.last_sequence(), 1);
        let mut again = sub.clone();
        again.ratings = full_ratings(4.0);
        again.edited_text = Some("nový text".into());
        assert_eq!(svc.submit_segment("A01", &again).unwrap().sequence, 2);
        let c = svc.export();
        assert_eq!(c.segment_annotations.len(), 1);
        assert_eq!(c.segment_annotations[0].ratings.get(Category::Overall), Some(4.0));
        assert_eq!(c.segment_annotations[0].edited_text, "nový text");
    }

    #[test]
    fn tokens_are_long_and_unique() {
        let dir = tempfile::tempdir().unwrap();
        let svc = Service::init(dir.path(), empty_campaign(), "admin").unwrap();
        let tokens: Vec<&String> = svc.tokens().values().collect();
        assert_eq!(tokens.len(), 11);
        assert!(tokens.iter().all(|t| t.len() == 32));
        let mut dedup = tokens.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), tokens.len());
        assert!(matches!(svc.authenticate(Some("nope")), Err(ServiceError::Unauthorized)));
        assert_eq!(svc.authenticate(Some(svc.tokens()["A03"].as_str())).unwrap(), "A03");
    }

    #[test]
    fn init_twice_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        Service::init(dir.path(), empty_campaign(), "admin").unwrap();
        assert!(matches!(
            Service::init(dir.path(), empty_campaign(), "admin"),
            Err(ServiceError::AlreadyInitialized(_))
        ));
        assert!(matches!(
            Service::open(&dir.path().join("nothing"), "admin"),
            Err(ServiceError::NotInitialized(_))
        ));
    }
}
