//! Reading and writing campaigns.
//!
//! Two formats are supported:
//!
//! * **canonical** – one UTF-8 JSON document `{"schema": "ortkit/1",
//!   "campaign": {...}}`. Unknown fields are rejected and output is
//!   deterministic (collections sorted by key, fixed field order).
//! * **wide table** – the spreadsheet layout annotators work in: tab-separated,
//!   one evaluated segment per row, with a source column followed by nine
//!   columns per translation (`{id}:text`, seven ratings, `{id}:edit`).
//!
//! Wide-table files are made of directive lines starting with `#` and
//! per-document tables:
//!
//! ```text
//! #ortkit-wide	1
//! #campaign	<name>	<seed>
//! #source	<id>	<optimal|professional|other>
//! #annotator	<id>	<group>	[display name]
//! #document	<doc id>	<annotator id>	[minutes]
//! #context	<segment index>	<source text>
//! seg	src	N1:text	N1:spelling	…	N1:overall	N1:edit	P1:text	…
//! 3	<source>	<hypothesis>	6	5.8	…	<edited text>	…
//! DOC		<empty>	<7 document ratings>	<empty>	…
//! ```
//!
//! Text cells escape `\`, tab, CR and LF as `\\`, `\t`, `\r`, `\n`. An empty
//! edit cell means the hypothesis was left unchanged. `#context` lines carry
//! source segments that are shown but not evaluated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    validate_campaign, AnnotatorGroup, AnnotatorProfile, Campaign, CampaignMeta, Category, Document,
    DocumentAnnotation, RatingVector, SegmentAnnotation, SegmentRange, SourceKind, TranslationSet,
    TranslationSource, ValidationReport,
};

pub const SCHEMA_VERSION: &str = "ortkit/1";
const WIDE_MAGIC: &str = "#ortkit-wide";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Canonical,
    WideTable,
}

impl FromStr for Format {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "canonical" | "json" => Ok(Format::Canonical),
            "wide_table" | "wide" | "tsv" => Ok(Format::WideTable),
            other => Err(IngestError::UnsupportedFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Canonical => "canonical",
            Format::WideTable => "wide_table",
        })
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("campaign failed validation with {} error(s); first: {}", .0.errors.len(), .0.errors.first().map(|e| e.to_string()).unwrap_or_default())]
    Integrity(Box<ValidationReport>),
    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),
}

impl IngestError {
    fn schema(line: usize, column: usize, message: impl Into<String>) -> Self {
        IngestError::Schema {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalFile {
    schema: String,
    campaign: Campaign,
}

#[derive(Serialize)]
struct CanonicalFileRef<'a> {
    schema: &'a str,
    campaign: &'a Campaign,
}

pub fn parse_canonical(text: &str) -> Result<Campaign, IngestError> {
    let file: CanonicalFile = serde_json::from_str(text).map_err(|e| {
        let (line, column, message) = (e.line(), e.column(), e.to_string());
        match e.classify() {
            serde_json::error::Category::Data => IngestError::Schema { line, column, message },
            _ => IngestError::Parse { line, column, message },
        }
    })?;
    if file.schema != SCHEMA_VERSION {
        return Err(IngestError::schema(
            1,
            1,
            format!("unsupported schema version `{}`, expected `{SCHEMA_VERSION}`", file.schema),
        ));
    }
    Ok(file.campaign)
}

pub fn to_canonical_json(c: &Campaign) -> Vec<u8> {
    let canonical = c.canonicalized();
    let mut out = serde_json::to_vec_pretty(&CanonicalFileRef {
        schema: SCHEMA_VERSION,
        campaign: &canonical,
    })
    .expect("campaign serializes");
    out.push(b'\n');
    out
}

/// Parses a campaign without checking its integrity.
pub fn parse_campaign(text: &str, format: Format) -> Result<Campaign, IngestError> {
    match format {
        Format::Canonical => parse_canonical(text),
        Format::WideTable => parse_wide_table(text),
    }
}

/// Reads and parses a campaign file without checking its integrity.
pub fn read_campaign(path: &Path, format: Format) -> Result<Campaign, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_campaign(&text, format)
}

/// Reads a campaign and rejects it when validation reports any error.
pub fn load_campaign(path: &Path, format: Format) -> Result<Campaign, IngestError> {
    let c = read_campaign(path, format)?;
    check_integrity(c)
}

pub fn check_integrity(c: Campaign) -> Result<Campaign, IngestError> {
    let report = validate_campaign(&c);
    if report.is_valid() {
        Ok(c)
    } else {
        Err(IngestError::Integrity(Box::new(report)))
    }
}

pub fn export_campaign(c: &Campaign, format: Format) -> Result<Vec<u8>, IngestError> {
    match format {
        Format::Canonical => Ok(to_canonical_json(c)),
        Format::WideTable => Ok(to_wide_table(c).into_bytes()),
    }
}

fn escape_cell(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_cell(s: &str, line: usize, column: usize) -> Result<String, IngestError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(IngestError::Parse {
                    line,
                    column,
                    message: format!("invalid escape `\\{}`", other.map(String::from).unwrap_or_default()),
                })
            }
        }
    }
    Ok(out)
}

fn format_rating(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn source_kind_name(k: SourceKind) -> &'static str {
    match k {
        SourceKind::Optimal => "optimal",
        SourceKind::Professional => "professional",
        SourceKind::Other => "other",
    }
}

const WIDE_FIELDS: [&str; 9] = [
    "text",
    "spelling",
    "terminology",
    "grammar",
    "meaning",
    "style",
    "pragmatics",
    "overall",
    "edit",
];

/// Renders the campaign as wide tables, one per (annotator, document).
pub fn to_wide_table(c: &Campaign) -> String {
    let c = c.canonicalized();
    let mut out = String::new();
    out.push_str(&format!("{WIDE_MAGIC}\t1\n"));
    out.push_str(&format!(
        "#campaign\t{}\t{}\n",
        escape_cell(&c.meta.name),
        c.meta.seed
    ));
    let default_scale = crate::model::RatingScale::default();
    if c.meta.scale != default_scale {
        out.push_str(&format!(
            "#scale\t{}\t{}\t{}\n",
            c.meta.scale.min, c.meta.scale.max, c.meta.scale.step
        ));
    }
    for s in &c.sources {
        out.push_str(&format!("#source\t{}\t{}\n", escape_cell(&s.id), source_kind_name(s.kind)));
    }
    for a in &c.annotators {
        out.push_str(&format!("#annotator\t{}\t{}", escape_cell(&a.id), a.group.name()));
        if let Some(name) = &a.display_name {
            out.push_str(&format!("\t{}", escape_cell(name)));
        }
        out.push('\n');
    }
    let segs = c.segment_index();
    let docs = c.document_index();
    let annotator_ids: Vec<Option<&str>> = if c.annotators.is_empty() {
        vec![None]
    } else {
        c.annotators.iter().map(|a| Some(a.id.as_str())).collect()
    };
    for ann in annotator_ids {
        for d in &c.documents {
            let minutes = ann.and_then(|a| {
                c.document_annotations
                    .iter()
                    .find(|x| x.annotator_id == a && x.document_id == d.id && x.minutes_spent.is_some())
                    .and_then(|x| x.minutes_spent)
            });
            out.push_str(&format!(
                "#document\t{}\t{}\t{}\n",
                escape_cell(&d.id),
                escape_cell(ann.unwrap_or("")),
                minutes.map(|m| m.to_string()).unwrap_or_default()
            ));
            if let Some(ctx) = &d.full_source_context {
                out.push_str(&format!("#fullcontext\t{}\n", escape_cell(ctx)));
            }
            for (i, text) in d.source_segments.iter().enumerate() {
                if !d.evaluated.contains(i) {
                    out.push_str(&format!("#context\t{i}\t{}\n", escape_cell(text)));
                }
            }
            let mut header = vec!["seg".to_string(), "src".to_string()];
            for s in &c.sources {
                for f in WIDE_FIELDS {
                    header.push(format!("{}:{f}", s.id));
                }
            }
            out.push_str(&header.join("\t"));
            out.push('\n');
            for i in d.evaluated.indices() {
                let mut row = vec![i.to_string(), escape_cell(&d.source_segments[i])];
                for s in &c.sources {
                    let hyp = c.hypothesis(&d.id, &s.id, i).unwrap_or("");
                    row.push(escape_cell(hyp));
                    let ann_row = ann.and_then(|a| {
                        segs.get(&crate::model::SegmentKey {
                            annotator_id: a.to_string(),
                            document_id: d.id.clone(),
                            segment_index: i,
                            source_id: s.id.clone(),
                        })
                    });
                    for cat in Category::ALL {
                        row.push(format_rating(ann_row.and_then(|x| x.ratings.get(cat))));
                    }
                    row.push(ann_row.map(|x| escape_cell(&x.edited_text)).unwrap_or_default());
                }
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
            let mut row = vec!["DOC".to_string(), String::new()];
            for s in &c.sources {
                row.push(String::new());
                let doc_row = ann.and_then(|a| {
                    docs.get(&crate::model::DocumentKey {
                        annotator_id: a.to_string(),
                        document_id: d.id.clone(),
                        source_id: s.id.clone(),
                    })
                });
                for cat in Category::ALL {
                    row.push(format_rating(doc_row.and_then(|x| x.ratings.get(cat))));
                }
                row.push(String::new());
            }
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
    }
    out
}

fn parse_rating_cell(cell: &str, line: usize, column: usize) -> Result<Option<f64>, IngestError> {
    let t = cell.trim();
    if t.is_empty() {
        return Ok(None);
    }
    t.replace(',', ".")
        .parse::<f64>()
        .map(Some)
        .map_err(|_| IngestError::schema(line, column, format!("rating cell `{t}` is not a number")))
}

/// Column number (1-based) of field `idx` in a tab-split line.
fn column_of(fields: &[&str], idx: usize) -> usize {
    fields[..idx].iter().map(|f| f.chars().count() + 1).sum::<usize>() + 1
}

struct DocBuilder {
    segments: BTreeMap<usize, String>,
    evaluated: BTreeSet<usize>,
    hypotheses: BTreeMap<(String, usize), String>,
    full_context: Option<String>,
}

pub fn parse_wide_table(text: &str) -> Result<Campaign, IngestError> {
    let mut c = Campaign {
        meta: CampaignMeta::default(),
        ..Default::default()
    };
    let mut docs: BTreeMap<String, DocBuilder> = BTreeMap::new();
    let mut doc_order: Vec<String> = Vec::new();
    let mut source_ids: Vec<String> = Vec::new();
    // (document id, annotator id, minutes)
    let mut current: Option<(String, String, Option<f64>)> = None;
    let mut columns: Option<Vec<String>> = None;
    let mut saw_magic = false;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let raw_line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if raw_line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw_line.split('\t').collect();
        let cell = |i: usize| -> Result<String, IngestError> {
            unescape_cell(fields.get(i).copied().unwrap_or(""), line, column_of(&fields, i.min(fields.len())))
        };
        if let Some(directive) = fields[0].strip_prefix('#') {
            match directive {
                "ortkit-wide" => {
                    if fields.get(1).map(|v| v.trim()) != Some("1") {
                        return Err(IngestError::schema(line, column_of(&fields, 1), "unsupported wide-table version"));
                    }
                    saw_magic = true;
                }
                "campaign" => {
                    c.meta.name = cell(1)?;
                    if let Some(seed) = fields.get(2).filter(|s| !s.trim().is_empty()) {
                        c.meta.seed = seed
                            .trim()
                            .parse()
                            .map_err(|_| IngestError::schema(line, column_of(&fields, 2), "seed is not an integer"))?;
                    }
                }
                "scale" => {
                    let num = |i: usize| -> Result<f64, IngestError> {
                        fields
                            .get(i)
                            .and_then(|v| v.trim().parse().ok())
                            .ok_or_else(|| IngestError::schema(line, column_of(&fields, i.min(fields.len())), "expected a number"))
                    };
                    c.meta.scale = crate::model::RatingScale {
                        min: num(1)?,
                        max: num(2)?,
                        step: num(3)?,
                    };
                }
                "source" => {
                    let id = cell(1)?;
                    let kind = match fields.get(2).map(|k| k.trim()).unwrap_or("other") {
                        "optimal" => SourceKind::Optimal,
                        "professional" => SourceKind::Professional,
                        "other" | "" => SourceKind::Other,
                        k => {
                            return Err(IngestError::schema(line, column_of(&fields, 2), format!("unknown source kind `{k}`")))
                        }
                    };
                    if c.source(&id).is_none() {
                        c.sources.push(TranslationSource { id, kind });
                    }
                }
                "annotator" => {
                    let id = cell(1)?;
                    let group: AnnotatorGroup = fields
                        .get(2)
                        .ok_or_else(|| IngestError::schema(line, column_of(&fields, fields.len()), "missing annotator group"))?
                        .parse()
                        .map_err(|e: String| IngestError::schema(line, column_of(&fields, 2), e))?;
                    let display_name = match fields.get(3) {
                        Some(_) => Some(cell(3)?),
                        None => None,
                    };
                    c.annotators.push(AnnotatorProfile { id, group, display_name });
                }
                "document" => {
                    let doc_id = cell(1)?;
                    if doc_id.is_empty() {
                        return Err(IngestError::schema(line, column_of(&fields, 1), "empty document id"));
                    }
                    let annotator = cell(2)?;
                    let minutes = match fields.get(3).map(|m| m.trim()).filter(|m| !m.is_empty()) {
                        Some(m) => Some(m.replace(',', ".").parse::<f64>().map_err(|_| {
                            IngestError::schema(line, column_of(&fields, 3), "minutes is not a number")
                        })?),
                        None => None,
                    };
                    if !docs.contains_key(&doc_id) {
                        doc_order.push(doc_id.clone());
                        docs.insert(
                            doc_id.clone(),
                            DocBuilder {
                                segments: BTreeMap::new(),
                                evaluated: BTreeSet::new(),
                                hypotheses: BTreeMap::new(),
                                full_context: None,
                            },
                        );
                    }
                    current = Some((doc_id, annotator, minutes));
                    columns = None;
                }
                "fullcontext" | "context" => {
                    let (doc_id, _, _) = current
                        .as_ref()
                        .ok_or_else(|| IngestError::schema(line, 1, "context line outside a document block"))?;
                    let b = docs.get_mut(doc_id).expect("builder exists");
                    if directive == "fullcontext" {
                        b.full_context = Some(cell(1)?);
                    } else {
                        let idx: usize = fields.get(1).and_then(|v| v.trim().parse().ok()).ok_or_else(|| {
                            IngestError::schema(line, column_of(&fields, 1.min(fields.len())), "context index is not an integer")
                        })?;
                        let text = cell(2)?;
                        set_segment(b, idx, text, line, column_of(&fields, 2.min(fields.len())))?;
                    }
                }
                other => {
                    return Err(IngestError::schema(line, 1, format!("unknown directive `#{other}`")));
                }
            }
            continue;
        }

        let (doc_id, annotator, minutes) = current
            .clone()
            .ok_or_else(|| IngestError::schema(line, 1, "table row before any #document line"))?;

        let Some(cols) = &columns else {
            // header row
            if fields.len() < 2 || fields[0] != "seg" || fields[1] != "src" {
                return Err(IngestError::schema(line, 1, "expected header row starting with `seg\tsrc`"));
            }
            if !(fields.len() - 2).is_multiple_of(9) || fields.len() == 2 {
                return Err(IngestError::schema(
                    line,
                    1,
                    format!("header has {} columns; expected 2 + 9k", fields.len()),
                ));
            }
            let mut ids = Vec::new();
            for (k, chunk) in fields[2..].chunks(9).enumerate() {
                let first = chunk[0];
                let id = first.strip_suffix(":text").ok_or_else(|| {
                    IngestError::schema(line, column_of(&fields, 2 + 9 * k), format!("expected `<source>:text`, got `{first}`"))
                })?;
                for (j, f) in WIDE_FIELDS.iter().enumerate() {
                    let want = format!("{id}:{f}");
                    if chunk[j] != want {
                        return Err(IngestError::schema(
                            line,
                            column_of(&fields, 2 + 9 * k + j),
                            format!("expected column `{want}`, got `{}`", chunk[j]),
                        ));
                    }
                }
                ids.push(id.to_string());
            }
            let distinct: BTreeSet<_> = ids.iter().collect();
            if distinct.len() != ids.len() {
                return Err(IngestError::schema(line, 1, "duplicate source columns"));
            }
            if source_ids.is_empty() {
                source_ids = ids.clone();
            } else {
                let known: BTreeSet<_> = source_ids.iter().collect();
                if known != distinct {
                    return Err(IngestError::schema(line, 1, "source columns differ from earlier tables"));
                }
            }
            columns = Some(ids);
            continue;
        };

        let expected = 2 + 9 * cols.len();
        if fields.len() != expected {
            return Err(IngestError::schema(
                line,
                column_of(&fields, fields.len()),
                format!("row has {} columns; expected {expected}", fields.len()),
            ));
        }

        let is_doc_row = fields[0].trim() == "DOC";
        let seg_index = if is_doc_row {
            None
        } else {
            Some(
                fields[0]
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| IngestError::schema(line, 1, format!("segment index `{}` is not an integer", fields[0])))?,
            )
        };

        if let Some(i) = seg_index {
            let src = cell(1)?;
            let b = docs.get_mut(&doc_id).expect("builder exists");
            set_segment(b, i, src, line, column_of(&fields, 1))?;
            b.evaluated.insert(i);
        }

        for (k, sid) in cols.iter().enumerate() {
            let base = 2 + 9 * k;
            let mut ratings = RatingVector::missing();
            for (j, cat) in Category::ALL.into_iter().enumerate() {
                let col = base + 1 + j;
                ratings.set(cat, parse_rating_cell(fields[col], line, column_of(&fields, col))?);
            }
            let edit = cell(base + 8)?;
            let annotated = !ratings.is_missing() || !edit.is_empty();
            if annotated && annotator.is_empty() {
                return Err(IngestError::schema(line, column_of(&fields, base), "annotation in a block without annotator"));
            }
            match seg_index {
                Some(i) => {
                    let hyp = cell(base)?;
                    let b = docs.get_mut(&doc_id).expect("builder exists");
                    match b.hypotheses.get(&(sid.clone(), i)) {
                        Some(prev) if *prev != hyp => {
                            return Err(IngestError::schema(
                                line,
                                column_of(&fields, base),
                                format!("hypothesis for {sid} segment {i} differs from an earlier table"),
                            ))
                        }
                        _ => {
                            b.hypotheses.insert((sid.clone(), i), hyp.clone());
                        }
                    }
                    if annotated {
                        c.segment_annotations.push(SegmentAnnotation {
                            annotator_id: annotator.clone(),
                            document_id: doc_id.clone(),
                            segment_index: i,
                            source_id: sid.clone(),
                            ratings,
                            edited_text: if edit.is_empty() { hyp } else { edit },
                            time_of_entry: None,
                        });
                    }
                }
                None => {
                    if !ratings.is_missing() {
                        c.document_annotations.push(DocumentAnnotation {
                            annotator_id: annotator.clone(),
                            document_id: doc_id.clone(),
                            source_id: sid.clone(),
                            ratings,
                            minutes_spent: minutes,
                        });
                    }
                }
            }
        }
    }

    if !saw_magic && !text.trim().is_empty() {
        return Err(IngestError::schema(1, 1, format!("missing `{WIDE_MAGIC}` header line")));
    }

    for sid in &source_ids {
        if c.source(sid).is_none() {
            c.sources.push(TranslationSource {
                id: sid.clone(),
                kind: SourceKind::Other,
            });
        }
    }

    for doc_id in doc_order {
        let b = &docs[&doc_id];
        let n = b.segments.keys().next_back().map(|m| m + 1).unwrap_or(0);
        if b.segments.len() != n {
            let missing = (0..n).find(|i| !b.segments.contains_key(i)).unwrap_or(0);
            return Err(IngestError::schema(
                0,
                0,
                format!("document `{doc_id}` has no source text for segment {missing}"),
            ));
        }
        let (start, end) = match (b.evaluated.first(), b.evaluated.last()) {
            (Some(&s), Some(&e)) => (s, e + 1),
            _ => (0, 0),
        };
        if b.evaluated.len() != end - start {
            return Err(IngestError::schema(
                0,
                0,
                format!("document `{doc_id}` evaluated segments are not contiguous"),
            ));
        }
        c.documents.push(Document {
            id: doc_id.clone(),
            source_segments: b.segments.values().cloned().collect(),
            evaluated: SegmentRange { start, end },
            full_source_context: b.full_context.clone(),
        });
        for sid in &source_ids {
            c.translations.push(TranslationSet {
                document_id: doc_id.clone(),
                source_id: sid.clone(),
                hypotheses: (start..end)
                    .map(|i| b.hypotheses.get(&(sid.clone(), i)).cloned().unwrap_or_default())
                    .collect(),
            });
        }
    }
    Ok(c)
}

fn set_segment(b: &mut DocBuilder, idx: usize, text: String, line: usize, column: usize) -> Result<(), IngestError> {
    match b.segments.get(&idx) {
        Some(prev) if *prev != text => Err(IngestError::schema(
            line,
            column,
            format!("source text for segment {idx} differs from an earlier table"),
        )),
        _ => {
            b.segments.insert(idx, text);
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entity {
    Meta,
    Document,
    Source,
    Annotator,
    Translation,
    SegmentAnnotation,
    DocumentAnnotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "change", rename_all = "snake_case")]
pub enum Difference {
    Added { entity: Entity, key: String },
    Removed { entity: Entity, key: String },
    Changed { entity: Entity, key: String, fields: Vec<String> },
}

impl fmt::Display for Difference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Difference::Added { entity, key } => write!(f, "+ {entity:?} {key}"),
            Difference::Removed { entity, key } => write!(f, "- {entity:?} {key}"),
            Difference::Changed { entity, key, fields } => {
                write!(f, "~ {entity:?} {key}: {}", fields.join("; "))
            }
        }
    }
}

fn field_changes(prefix: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(ma), Value::Object(mb)) => {
            let keys: BTreeSet<&String> = ma.keys().chain(mb.keys()).collect();
            for k in keys {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                field_changes(&path, ma.get(k).unwrap_or(&Value::Null), mb.get(k).unwrap_or(&Value::Null), out);
            }
        }
        _ if a != b => out.push(format!("{prefix}: {a} -> {b}")),
        _ => {}
    }
}

fn diff_entities<T: Serialize>(
    entity: Entity,
    a: &[T],
    b: &[T],
    key: impl Fn(&T) -> String,
    out: &mut Vec<Difference>,
) {
    let ma: BTreeMap<String, Value> = a
        .iter()
        .map(|x| (key(x), serde_json::to_value(x).expect("serializable")))
        .collect();
    let mb: BTreeMap<String, Value> = b
        .iter()
        .map(|x| (key(x), serde_json::to_value(x).expect("serializable")))
        .collect();
    for (k, va) in &ma {
        match mb.get(k) {
            None => out.push(Difference::Removed {
                entity,
                key: k.clone(),
            }),
            Some(vb) if va != vb => {
                let mut fields = Vec::new();
                field_changes("", va, vb, &mut fields);
                out.push(Difference::Changed {
                    entity,
                    key: k.clone(),
                    fields,
                });
            }
            _ => {}
        }
    }
    for k in mb.keys() {
        if !ma.contains_key(k) {
            out.push(Difference::Added {
                entity,
                key: k.clone(),
            });
        }
    }
}

/// Differences from `a` to `b`; empty exactly when the campaigns are
/// canonically equal.
pub fn diff_campaigns(a: &Campaign, b: &Campaign) -> Vec<Difference> {
    let mut out = Vec::new();
    diff_entities(Entity::Meta, &[&a.meta], &[&b.meta], |_| "meta".into(), &mut out);
    diff_entities(Entity::Document, &a.documents, &b.documents, |d| d.id.clone(), &mut out);
    diff_entities(Entity::Source, &a.sources, &b.sources, |s| s.id.clone(), &mut out);
    diff_entities(Entity::Annotator, &a.annotators, &b.annotators, |x| x.id.clone(), &mut out);
    diff_entities(
        Entity::Translation,
        &a.translations,
        &b.translations,
        |t| format!("({}, {})", t.document_id, t.source_id),
        &mut out,
    );
    diff_entities(
        Entity::SegmentAnnotation,
        &a.segment_annotations,
        &b.segment_annotations,
        |x| x.key().to_string(),
        &mut out,
    );
    diff_entities(
        Entity::DocumentAnnotation,
        &a.document_annotations,
        &b.document_annotations,
        |x| x.key().to_string(),
        &mut out,
    );
    // Duplicate keys collapse in the maps above; fall back to a count check
    // so that the result is still empty only for equal campaigns.
    if out.is_empty() && !a.canonically_eq(b) {
        out.push(Difference::Changed {
            entity: Entity::Meta,
            key: "campaign".into(),
            fields: vec!["duplicate keys differ".into()],
        });
    }
    out
}
