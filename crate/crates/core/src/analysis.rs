//! Named, reproducible analyses over a [`Campaign`].
//!
//! Every function is a pure function of its inputs. Observations whose rating
//! vector is not complete are dropped, and reports carry the dropped count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AnnotatorGroup, Campaign, Category, DocumentAnnotation, SegmentAnnotation};
use crate::stats::{
    self, fit_ols, kendall_discordance, one_hot, pearson, predict, rank_of_scores, train_test_split,
    ConcordanceBucket, FeatureMatrix, OlsModel, StatsError,
};
use crate::textmetrics::{metric_vector, MetricKind, MetricVector};

/// Observation counts the reference 100-row test split was defined for.
pub const SEGMENT_REFERENCE_ROWS: usize = 7025;
pub const DOCUMENT_REFERENCE_ROWS: usize = 878;
pub const REFERENCE_TEST_ROWS: usize = 100;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least 2 annotators after filtering, found {0}")]
    InsufficientAnnotators(usize),
    #[error("need at least 2 sources, found {0}")]
    InsufficientSources(usize),
    #[error("no optimal source in the campaign to compare against")]
    MissingBaseline,
    #[error("feature `{0}` is not available at this level")]
    UnsupportedFeature(String),
    #[error("no observations: {0}")]
    NoObservations(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Segment,
    Document,
}

impl Level {
    pub const ALL: [Level; 2] = [Level::Segment, Level::Document];

    pub fn name(self) -> &'static str {
        match self {
            Level::Segment => "segment",
            Level::Document => "document",
        }
    }

    fn reference_rows(self) -> usize {
        match self {
            Level::Segment => SEGMENT_REFERENCE_ROWS,
            Level::Document => DOCUMENT_REFERENCE_ROWS,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "segment" | "seg" => Ok(Level::Segment),
            "document" | "doc" => Ok(Level::Document),
            _ => Err(format!("unknown level `{s}` (expected segment or document)")),
        }
    }
}

/// How per-annotation values are combined into a summary statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// All annotations together.
    #[default]
    Pooled,
    /// Statistic per annotator, then the mean over annotators.
    PerAnnotatorAverage,
}

fn to_set(ids: Option<&[String]>) -> Option<BTreeSet<&str>> {
    ids.map(|v| v.iter().map(String::as_str).collect())
}

fn keep(filter: &Option<BTreeSet<&str>>, id: &str) -> bool {
    filter.as_ref().is_none_or(|f| f.contains(id))
}

/// Complete segment observations in canonical key order plus the number of
/// in-scope annotations dropped for incompleteness.
pub fn segment_rows<'a>(
    c: &'a Campaign,
    annotators: Option<&[String]>,
) -> (Vec<(&'a SegmentAnnotation, [f64; 7])>, usize) {
    let filter = to_set(annotators);
    let mut dropped = 0;
    let mut rows = Vec::new();
    for a in c.segment_index().into_values() {
        if !keep(&filter, &a.annotator_id) {
            continue;
        }
        match a.ratings.values() {
            Some(v) => rows.push((a, v)),
            None => dropped += 1,
        }
    }
    (rows, dropped)
}

pub fn document_rows<'a>(
    c: &'a Campaign,
    annotators: Option<&[String]>,
) -> (Vec<(&'a DocumentAnnotation, [f64; 7])>, usize) {
    let filter = to_set(annotators);
    let mut dropped = 0;
    let mut rows = Vec::new();
    for a in c.document_index().into_values() {
        if !keep(&filter, &a.annotator_id) {
            continue;
        }
        match a.ratings.values() {
            Some(v) => rows.push((a, v)),
            None => dropped += 1,
        }
    }
    (rows, dropped)
}

fn is_edited(c: &Campaign, a: &SegmentAnnotation) -> bool {
    c.hypothesis(&a.document_id, &a.source_id, a.segment_index) != Some(a.edited_text.as_str())
}

/// Metric vectors between each annotation's original hypothesis and its
/// edited text, in input order.
pub fn metric_vectors(c: &Campaign, rows: &[&SegmentAnnotation]) -> Vec<MetricVector> {
    rows.par_iter()
        .map(|a| {
            let orig = c.hypothesis(&a.document_id, &a.source_id, a.segment_index).unwrap_or("");
            metric_vector(orig, &a.edited_text)
        })
        .collect()
}

fn mean_of(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| stats::mean(xs))
}

// ---------------------------------------------------------------------------
// Agreement

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAgreement {
    pub annotator_a: String,
    pub annotator_b: String,
    /// Co-annotated observations.
    pub n: usize,
    /// `None` when the pair was excluded (too few shared items or zero variance).
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub category: Category,
    pub sources: Option<Vec<String>>,
    pub annotators: Vec<String>,
    pub pairs: Vec<PairAgreement>,
    pub mean_r: Option<f64>,
    pub excluded_pairs: usize,
    pub dropped_observations: usize,
}

/// Mean pairwise Pearson correlation between annotators over the segment
/// ratings they share.
pub fn iaa(
    c: &Campaign,
    category: Category,
    sources: Option<&[String]>,
    annotators: Option<&[String]>,
) -> Result<AgreementReport, AnalysisError> {
    let src_filter = to_set(sources);
    let ann_filter = to_set(annotators);
    let (rows, _) = segment_rows(c, annotators);
    let mut by_annotator: BTreeMap<&str, BTreeMap<(&str, usize, &str), f64>> = BTreeMap::new();
    for (a, v) in &rows {
        if keep(&src_filter, &a.source_id) {
            by_annotator
                .entry(a.annotator_id.as_str())
                .or_default()
                .insert((a.document_id.as_str(), a.segment_index, a.source_id.as_str()), v[category.index()]);
        }
    }
    let dropped_in_scope = c
        .segment_annotations
        .iter()
        .filter(|a| a.ratings.values().is_none() && keep(&src_filter, &a.source_id) && keep(&ann_filter, &a.annotator_id))
        .count();
    let ids: Vec<&str> = by_annotator.keys().copied().collect();
    if ids.len() < 2 {
        return Err(AnalysisError::InsufficientAnnotators(ids.len()));
    }
    let mut pairs = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let (ma, mb) = (&by_annotator[ids[i]], &by_annotator[ids[j]]);
            let (mut x, mut y) = (Vec::new(), Vec::new());
            for (k, va) in ma {
                if let Some(vb) = mb.get(k) {
                    x.push(*va);
                    y.push(*vb);
                }
            }
            pairs.push(PairAgreement {
                annotator_a: ids[i].to_string(),
                annotator_b: ids[j].to_string(),
                n: x.len(),
                r: pearson(&x, &y).ok(),
            });
        }
    }
    let rs: Vec<f64> = pairs.iter().filter_map(|p| p.r).collect();
    Ok(AgreementReport {
        category,
        sources: sources.map(<[String]>::to_vec),
        annotators: ids.iter().map(|s| s.to_string()).collect(),
        excluded_pairs: pairs.len() - rs.len(),
        mean_r: mean_of(&rs),
        pairs,
        dropped_observations: dropped_in_scope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceReport {
    pub category: Category,
    pub same: f64,
    pub one: f64,
    pub two_plus: f64,
    pub cases: usize,
    pub counts: [usize; 3],
    /// (segment, annotator pair) cases skipped for incomplete ratings.
    pub skipped: usize,
}

/// How often two annotators order a segment's translations the same way,
/// bucketed by the number of discordant source pairs.
pub fn ordering_concordance(c: &Campaign, category: Category) -> Result<ConcordanceReport, AnalysisError> {
    let sources: Vec<&str> = c.sources.iter().map(|s| s.id.as_str()).collect();
    if sources.len() < 2 {
        return Err(AnalysisError::InsufficientSources(sources.len()));
    }
    // (doc, segment) -> annotator -> per-source value (None if incomplete)
    let mut table: BTreeMap<(&str, usize), BTreeMap<&str, Vec<Option<f64>>>> = BTreeMap::new();
    for a in c.segment_index().into_values() {
        let entry = table
            .entry((a.document_id.as_str(), a.segment_index))
            .or_default()
            .entry(a.annotator_id.as_str())
            .or_insert_with(|| vec![None; sources.len()]);
        if let Some(pos) = sources.iter().position(|s| *s == a.source_id) {
            entry[pos] = a.ratings.values().map(|v| v[category.index()]);
        }
    }
    let mut counts = [0usize; 3];
    let mut skipped = 0;
    for per_annotator in table.values() {
        let ids: Vec<&&str> = per_annotator.keys().collect();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let (va, vb) = (&per_annotator[ids[i]], &per_annotator[ids[j]]);
                let full = |v: &Vec<Option<f64>>| v.iter().copied().collect::<Option<Vec<f64>>>();
                let (Some(xa), Some(xb)) = (full(va), full(vb)) else {
                    skipped += 1;
                    continue;
                };
                let (_, bucket) = kendall_discordance(&rank_of_scores(&xa), &rank_of_scores(&xb))?;
                counts[match bucket {
                    ConcordanceBucket::Same => 0,
                    ConcordanceBucket::One => 1,
                    ConcordanceBucket::TwoPlus => 2,
                }] += 1;
            }
        }
    }
    let cases: usize = counts.iter().sum();
    let frac = |k: usize| if cases == 0 { 0.0 } else { counts[k] as f64 / cases as f64 };
    Ok(ConcordanceReport {
        category,
        same: frac(0),
        one: frac(1),
        two_plus: frac(2),
        cases,
        counts,
        skipped,
    })
}

// ---------------------------------------------------------------------------
// Category correlations

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub level: Level,
    pub pooling: Pooling,
    pub categories: Vec<Category>,
    /// `None` where a correlation is undefined (zero variance).
    pub cells: Vec<Vec<Option<f64>>>,
    pub observations: usize,
    pub dropped: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Category, b: Category) -> Option<f64> {
        self.cells[a.index()][b.index()]
    }
}

fn correlation_cells(rows: &[[f64; 7]]) -> Vec<Vec<Option<f64>>> {
    let cols: Vec<Vec<f64>> = (0..7).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    let mut cells = vec![vec![None; 7]; 7];
    for i in 0..7 {
        for j in i..7 {
            let r = pearson(&cols[i], &cols[j]).ok();
            // exact unit diagonal whenever the category varies
            let r = if i == j { r.map(|_| 1.0) } else { r };
            cells[i][j] = r;
            cells[j][i] = r;
        }
    }
    cells
}

fn rating_rows(c: &Campaign, level: Level) -> (Vec<(String, [f64; 7])>, usize) {
    match level {
        Level::Segment => {
            let (rows, dropped) = segment_rows(c, None);
            (rows.into_iter().map(|(a, v)| (a.annotator_id.clone(), v)).collect(), dropped)
        }
        Level::Document => {
            let (rows, dropped) = document_rows(c, None);
            (rows.into_iter().map(|(a, v)| (a.annotator_id.clone(), v)).collect(), dropped)
        }
    }
}

pub fn category_correlations(c: &Campaign, level: Level, pooling: Pooling) -> CorrelationMatrix {
    let (rows, dropped) = rating_rows(c, level);
    let cells = match pooling {
        Pooling::Pooled => correlation_cells(&rows.iter().map(|(_, v)| *v).collect::<Vec<_>>()),
        Pooling::PerAnnotatorAverage => {
            let mut per: BTreeMap<&str, Vec<[f64; 7]>> = BTreeMap::new();
            for (a, v) in &rows {
                per.entry(a.as_str()).or_default().push(*v);
            }
            let mats: Vec<_> = per.values().map(|r| correlation_cells(r)).collect();
            (0..7)
                .map(|i| {
                    (0..7)
                        .map(|j| {
                            let vals: Vec<f64> = mats.iter().filter_map(|m| m[i][j]).collect();
                            mean_of(&vals)
                        })
                        .collect()
                })
                .collect()
        }
    };
    CorrelationMatrix {
        level,
        pooling,
        categories: Category::ALL.to_vec(),
        cells,
        observations: rows.len(),
        dropped,
    }
}

// ---------------------------------------------------------------------------
// Regression

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "snake_case")]
pub enum Feature {
    Category(Category),
    AnnotatorOneHot,
    GroupOneHot,
    Metric(MetricKind),
}

impl Feature {
    /// The six component categories, the usual predictors of Overall.
    pub fn components() -> Vec<Feature> {
        Category::COMPONENTS.iter().map(|c| Feature::Category(*c)).collect()
    }

    pub fn describe(&self) -> String {
        match self {
            Feature::Category(c) => c.name().to_string(),
            Feature::AnnotatorOneHot => "annotator one-hot".into(),
            Feature::GroupOneHot => "group one-hot".into(),
            Feature::Metric(m) => m.name().to_string(),
        }
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_lowercase();
        match t.as_str() {
            "annotator" | "annotators" | "annotator_onehot" => return Ok(Feature::AnnotatorOneHot),
            "group" | "groups" | "group_onehot" | "expertise" => return Ok(Feature::GroupOneHot),
            _ => {}
        }
        if let Ok(c) = t.parse::<Category>() {
            return Ok(Feature::Category(c));
        }
        t.parse::<MetricKind>()
            .map(Feature::Metric)
            .map_err(|_| format!("unknown feature `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    pub level: Level,
    pub features: Vec<Feature>,
    pub target: Category,
    /// Held-out rows; `None` scales 100 of the reference row count to the
    /// actual count.
    pub test_size: Option<usize>,
    pub seed: u64,
    /// Restrict to these annotators.
    pub annotators: Option<Vec<String>>,
}

impl RegressionConfig {
    pub fn new(level: Level, features: Vec<Feature>) -> Self {
        RegressionConfig {
            level,
            features,
            target: Category::Overall,
            test_size: None,
            seed: 42,
            annotators: None,
        }
    }

    pub fn describe(&self) -> String {
        let mut s = self.features.iter().map(Feature::describe).collect::<Vec<_>>().join(" + ");
        if let Some(a) = &self.annotators {
            s.push_str(&format!(" [annotators: {}]", a.join(",")));
        }
        s
    }
}

/// Test rows for `n` observations: the reference 100 when `n` matches the
/// reference count, otherwise scaled proportionally and kept in `1..n`.
pub fn default_test_size(level: Level, n: usize) -> usize {
    let reference = level.reference_rows();
    if n == reference {
        return REFERENCE_TEST_ROWS;
    }
    let scaled = (REFERENCE_TEST_ROWS as f64 * n as f64 / reference as f64).round() as usize;
    scaled.clamp(1, n.saturating_sub(1).max(1))
}

/// A design matrix ready to be split and fit repeatedly.
#[derive(Debug, Clone)]
pub struct Design {
    pub x: FeatureMatrix,
    pub y: Vec<f64>,
    pub dropped: usize,
}

pub fn build_design(c: &Campaign, config: &RegressionConfig) -> Result<Design, AnalysisError> {
    let groups: BTreeMap<&str, AnnotatorGroup> = c.annotators.iter().map(|a| (a.id.as_str(), a.group)).collect();
    let group_of = |id: &str| groups.get(id).map(|g| g.name()).unwrap_or("unknown").to_string();

    let (annotator_ids, values, segment_refs, dropped) = match config.level {
        Level::Segment => {
            let (rows, dropped) = segment_rows(c, config.annotators.as_deref());
            let ids: Vec<String> = rows.iter().map(|(a, _)| a.annotator_id.clone()).collect();
            let vals: Vec<[f64; 7]> = rows.iter().map(|(_, v)| *v).collect();
            let refs: Vec<&SegmentAnnotation> = rows.iter().map(|(a, _)| *a).collect();
            (ids, vals, Some(refs), dropped)
        }
        Level::Document => {
            let (rows, dropped) = document_rows(c, config.annotators.as_deref());
            let ids: Vec<String> = rows.iter().map(|(a, _)| a.annotator_id.clone()).collect();
            let vals: Vec<[f64; 7]> = rows.iter().map(|(_, v)| *v).collect();
            (ids, vals, None, dropped)
        }
    };
    if values.is_empty() {
        return Err(AnalysisError::NoObservations(format!("{} level regression", config.level)));
    }
    if config.features.is_empty() {
        return Err(AnalysisError::Stats(StatsError::DegenerateDesign));
    }

    let metrics = if config.features.iter().any(|f| matches!(f, Feature::Metric(_))) {
        let refs = segment_refs
            .as_ref()
            .ok_or_else(|| AnalysisError::UnsupportedFeature("edit-distance metrics at document level".into()))?;
        Some(metric_vectors(c, refs))
    } else {
        None
    };

    let n = values.len();
    let mut x: Option<FeatureMatrix> = None;
    for f in &config.features {
        let block = match f {
            Feature::Category(cat) => FeatureMatrix::new(
                vec![cat.name().to_string()],
                n,
                values.iter().map(|v| v[cat.index()]).collect(),
            )?,
            Feature::Metric(m) => FeatureMatrix::new(
                vec![m.name().to_string()],
                n,
                metrics.as_ref().expect("computed above").iter().map(|v| v.get(*m)).collect(),
            )?,
            Feature::AnnotatorOneHot => {
                let m = one_hot(&annotator_ids);
                let names = m.names().iter().map(|s| format!("annotator={s}")).collect();
                FeatureMatrix::new(names, n, (0..n).flat_map(|r| m.row(r).to_vec()).collect())?
            }
            Feature::GroupOneHot => {
                let labels: Vec<String> = annotator_ids.iter().map(|a| group_of(a)).collect();
                let m = one_hot(&labels);
                let names = m.names().iter().map(|s| format!("group={s}")).collect();
                FeatureMatrix::new(names, n, (0..n).flat_map(|r| m.row(r).to_vec()).collect())?
            }
        };
        x = Some(match x {
            None => block,
            Some(prev) => prev.hstack(&block)?,
        });
    }
    Ok(Design {
        x: x.expect("at least one feature"),
        y: values.iter().map(|v| v[config.target.index()]).collect(),
        dropped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionExperiment {
    pub level: Level,
    pub features: String,
    pub target: Category,
    pub seed: u64,
    pub n_observations: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub dropped: usize,
    pub model: OlsModel,
    pub r_test: f64,
    /// (true, predicted) for the held-out rows, in row order.
    pub test_points: Vec<[f64; 2]>,
    pub notes: Vec<String>,
}

fn test_size_for(config: &RegressionConfig, n: usize) -> (usize, Vec<String>) {
    let mut notes = Vec::new();
    let test = config.test_size.unwrap_or_else(|| {
        let t = default_test_size(config.level, n);
        if n != config.level.reference_rows() && config.annotators.is_none() {
            notes.push(format!(
                "{} observations instead of the reference {}; held out {t} rows",
                n,
                config.level.reference_rows()
            ));
        }
        t
    });
    (test, notes)
}

fn fit_split(design: &Design, config: &RegressionConfig, test: usize, seed: u64) -> Result<RegressionExperiment, AnalysisError> {
    let n = design.y.len();
    let plan = train_test_split(n, test, seed)?;
    let x_train = design.x.select_rows(&plan.train);
    let y_train: Vec<f64> = plan.train.iter().map(|&i| design.y[i]).collect();
    let x_test = design.x.select_rows(&plan.test);
    let y_test: Vec<f64> = plan.test.iter().map(|&i| design.y[i]).collect();
    let model = fit_ols(&x_train, &y_train, true)?;
    let pred = predict(&model, &x_test)?;
    let r_test = pearson(&y_test, &pred)?;
    Ok(RegressionExperiment {
        level: config.level,
        features: config.describe(),
        target: config.target,
        seed,
        n_observations: n,
        n_train: plan.train.len(),
        n_test: plan.test.len(),
        dropped: design.dropped,
        model,
        r_test,
        test_points: y_test.iter().zip(&pred).map(|(a, b)| [*a, *b]).collect(),
        notes: Vec::new(),
    })
}

/// Centered OLS of the target on the configured features, fit on a seeded
/// random training split and scored by Pearson r on the held-out rows.
pub fn regress_overall(c: &Campaign, config: &RegressionConfig) -> Result<RegressionExperiment, AnalysisError> {
    let design = build_design(c, config)?;
    let (test, notes) = test_size_for(config, design.y.len());
    let mut exp = fit_split(&design, config, test, config.seed)?;
    exp.notes = notes;
    Ok(exp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSeedSummary {
    pub level: Level,
    pub features: String,
    pub seeds: Vec<u64>,
    pub r_test: Vec<f64>,
    pub mean_r: f64,
    pub sd_r: f64,
    pub n_observations: usize,
    pub n_test: usize,
    pub dropped: usize,
    /// Coefficients averaged over seeds, in feature order.
    pub mean_coefficients: Vec<(String, f64)>,
    /// The experiment for the first seed, kept for plotting.
    pub first: RegressionExperiment,
    pub notes: Vec<String>,
}

/// Runs [`regress_overall`] for seeds `config.seed + i`, `i < n_seeds`.
pub fn regress_over_seeds(c: &Campaign, config: &RegressionConfig, n_seeds: usize) -> Result<MultiSeedSummary, AnalysisError> {
    let n_seeds = n_seeds.max(1);
    let design = build_design(c, config)?;
    let (test, notes) = test_size_for(config, design.y.len());
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| config.seed.wrapping_add(i)).collect();
    let runs: Vec<RegressionExperiment> = seeds
        .par_iter()
        .map(|&s| fit_split(&design, config, test, s))
        .collect::<Result<_, _>>()?;
    let r: Vec<f64> = runs.iter().map(|e| e.r_test).collect();
    let names = runs[0].model.feature_names.clone();
    let mean_coefficients = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let col: Vec<f64> = runs.iter().map(|e| e.model.coefficients[k]).collect();
            (name.clone(), stats::mean(&col))
        })
        .collect();
    let mut first = runs[0].clone();
    first.notes = notes.clone();
    Ok(MultiSeedSummary {
        level: config.level,
        features: config.describe(),
        mean_r: stats::mean(&r),
        sd_r: if r.len() > 1 { stats::std_dev(&r) } else { 0.0 },
        n_observations: design.y.len(),
        n_test: test,
        dropped: design.dropped,
        seeds,
        r_test: r,
        mean_coefficients,
        first,
        notes,
    })
}

// ---------------------------------------------------------------------------
// Metrics vs scores

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCorrelation {
    pub metric: MetricKind,
    pub category: Category,
    pub r: f64,
    pub n: usize,
}

/// Pearson r between a post-edit metric and a category rating over all
/// complete segment annotations.
pub fn metric_score_correlation(c: &Campaign, metric: MetricKind, category: Category) -> Result<MetricCorrelation, AnalysisError> {
    let (rows, _) = segment_rows(c, None);
    let refs: Vec<&SegmentAnnotation> = rows.iter().map(|(a, _)| *a).collect();
    let m: Vec<f64> = metric_vectors(c, &refs).iter().map(|v| v.get(metric)).collect();
    let y: Vec<f64> = rows.iter().map(|(_, v)| v[category.index()]).collect();
    let r = pearson(&m, &y)?;
    Ok(MetricCorrelation {
        metric,
        category,
        r,
        n: y.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub metrics: Vec<MetricKind>,
    pub categories: Vec<Category>,
    /// `cells[metric][category]`, `None` when undefined.
    pub cells: Vec<Vec<Option<f64>>>,
    pub n: usize,
}

/// All metric × category correlations; metric vectors are computed once.
pub fn metric_table(c: &Campaign) -> MetricTable {
    let (rows, _) = segment_rows(c, None);
    let refs: Vec<&SegmentAnnotation> = rows.iter().map(|(a, _)| *a).collect();
    let mv = metric_vectors(c, &refs);
    let cells = MetricKind::ALL
        .iter()
        .map(|m| {
            let x: Vec<f64> = mv.iter().map(|v| v.get(*m)).collect();
            Category::ALL
                .iter()
                .map(|cat| {
                    let y: Vec<f64> = rows.iter().map(|(_, v)| v[cat.index()]).collect();
                    pearson(&x, &y).ok()
                })
                .collect()
        })
        .collect();
    MetricTable {
        metrics: MetricKind::ALL.to_vec(),
        categories: Category::ALL.to_vec(),
        cells,
        n: rows.len(),
    }
}

// ---------------------------------------------------------------------------
// Segment -> document aggregation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    Min,
    Max,
    Avg,
    Med,
}

impl Aggregator {
    pub const ALL: [Aggregator; 4] = [Aggregator::Min, Aggregator::Max, Aggregator::Avg, Aggregator::Med];

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Min => "min",
            Aggregator::Max => "max",
            Aggregator::Avg => "avg",
            Aggregator::Med => "med",
        }
    }

    pub fn apply(self, xs: &[f64]) -> f64 {
        match self {
            Aggregator::Min => xs.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregator::Max => xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregator::Avg => stats::mean(xs),
            Aggregator::Med => stats::median(xs),
        }
    }
}

impl FromStr for Aggregator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "min" => Ok(Aggregator::Min),
            "max" => Ok(Aggregator::Max),
            "avg" | "mean" => Ok(Aggregator::Avg),
            "med" | "median" => Ok(Aggregator::Med),
            _ => Err(format!("unknown aggregator `{s}`")),
        }
    }
}

/// One (annotator, document, source) cell: its segment ratings of a
/// category and the document rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationCell {
    pub annotator_id: String,
    pub document_id: String,
    pub source_id: String,
    pub segment_values: Vec<f64>,
    pub document_value: f64,
}

pub fn aggregation_cells(c: &Campaign, category: Category) -> Vec<AggregationCell> {
    let mut segs: BTreeMap<(&str, &str, &str), Vec<f64>> = BTreeMap::new();
    for (a, v) in segment_rows(c, None).0 {
        segs.entry((&a.annotator_id, &a.document_id, &a.source_id))
            .or_default()
            .push(v[category.index()]);
    }
    document_rows(c, None)
        .0
        .into_iter()
        .filter_map(|(d, v)| {
            segs.get(&(d.annotator_id.as_str(), d.document_id.as_str(), d.source_id.as_str()))
                .map(|s| AggregationCell {
                    annotator_id: d.annotator_id.clone(),
                    document_id: d.document_id.clone(),
                    source_id: d.source_id.clone(),
                    segment_values: s.clone(),
                    document_value: v[category.index()],
                })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationResult {
    pub category: Category,
    pub aggregator: Aggregator,
    pub r: Option<f64>,
    pub n_cells: usize,
}

/// Pearson r between aggregated segment ratings and the document rating
/// across (annotator, document, source) cells.
pub fn aggregate_predict(c: &Campaign, category: Category, aggregator: Aggregator) -> AggregationResult {
    aggregate_cells(&aggregation_cells(c, category), category, aggregator)
}

fn aggregate_cells(cells: &[AggregationCell], category: Category, aggregator: Aggregator) -> AggregationResult {
    let x: Vec<f64> = cells.iter().map(|cell| aggregator.apply(&cell.segment_values)).collect();
    let y: Vec<f64> = cells.iter().map(|cell| cell.document_value).collect();
    AggregationResult {
        category,
        aggregator,
        r: pearson(&x, &y).ok(),
        n_cells: cells.len(),
    }
}

/// The full 7 × 4 table, category-major.
pub fn aggregation_table(c: &Campaign) -> Vec<AggregationResult> {
    Category::ALL
        .iter()
        .flat_map(|cat| {
            let cells = aggregation_cells(c, *cat);
            Aggregator::ALL
                .iter()
                .map(|agg| aggregate_cells(&cells, *cat, *agg))
                .collect::<Vec<_>>()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Source quality

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceMeans {
    pub source_id: String,
    pub segment: Vec<Option<f64>>,
    pub document: Vec<Option<f64>>,
    pub edit_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatsEntry {
    pub source_id: String,
    pub frequency: f64,
    pub beats: usize,
    pub cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedWithoutEdit {
    /// Category name or `any`.
    pub category: String,
    pub fraction: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceQualitySummary {
    pub pooling: Pooling,
    pub sources: Vec<SourceMeans>,
    pub edit_rate: Option<f64>,
    pub baseline: Option<String>,
    pub beats_baseline: Vec<BeatsEntry>,
    pub reduced_without_edit: Vec<ReducedWithoutEdit>,
    pub baseline_annotations: usize,
    pub notes: Vec<String>,
}

fn pooled_mean(items: &[(&str, f64)], pooling: Pooling) -> Option<f64> {
    match pooling {
        Pooling::Pooled => mean_of(&items.iter().map(|(_, v)| *v).collect::<Vec<_>>()),
        Pooling::PerAnnotatorAverage => {
            let mut per: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
            for (a, v) in items {
                per.entry(a).or_default().push(*v);
            }
            mean_of(&per.values().map(|v| stats::mean(v)).collect::<Vec<_>>())
        }
    }
}

/// Fraction of (annotator, segment) cases where each non-baseline source's
/// category rating strictly exceeds the optimal source's.
pub fn beats_baseline(c: &Campaign, category: Category) -> Result<(String, Vec<BeatsEntry>), AnalysisError> {
    let baseline = c.optimal_source().ok_or(AnalysisError::MissingBaseline)?.id.clone();
    let mut values: BTreeMap<(&str, &str, usize), BTreeMap<&str, f64>> = BTreeMap::new();
    for (a, v) in segment_rows(c, None).0 {
        values
            .entry((&a.annotator_id, &a.document_id, a.segment_index))
            .or_default()
            .insert(&a.source_id, v[category.index()]);
    }
    let entries = c
        .sources
        .iter()
        .filter(|s| s.id != baseline)
        .map(|s| {
            let (mut beats, mut cases) = (0, 0);
            for per in values.values() {
                if let (Some(b), Some(x)) = (per.get(baseline.as_str()), per.get(s.id.as_str())) {
                    cases += 1;
                    if x > b {
                        beats += 1;
                    }
                }
            }
            BeatsEntry {
                source_id: s.id.clone(),
                frequency: if cases == 0 { 0.0 } else { beats as f64 / cases as f64 },
                beats,
                cases,
            }
        })
        .collect();
    Ok((baseline, entries))
}

pub fn source_quality_summary(c: &Campaign, pooling: Pooling) -> SourceQualitySummary {
    let (seg, _) = segment_rows(c, None);
    let (doc, _) = document_rows(c, None);
    let mut notes = Vec::new();
    let sources = c
        .sources
        .iter()
        .map(|s| {
            let seg_s: Vec<_> = seg.iter().filter(|(a, _)| a.source_id == s.id).collect();
            let doc_s: Vec<_> = doc.iter().filter(|(a, _)| a.source_id == s.id).collect();
            let cat_means = |rows: &[(&str, [f64; 7])]| -> Vec<Option<f64>> {
                Category::ALL
                    .iter()
                    .map(|cat| {
                        let items: Vec<(&str, f64)> = rows.iter().map(|(a, v)| (*a, v[cat.index()])).collect();
                        pooled_mean(&items, pooling)
                    })
                    .collect()
            };
            let seg_rows: Vec<(&str, [f64; 7])> = seg_s.iter().map(|(a, v)| (a.annotator_id.as_str(), *v)).collect();
            let doc_rows: Vec<(&str, [f64; 7])> = doc_s.iter().map(|(a, v)| (a.annotator_id.as_str(), *v)).collect();
            let edits: Vec<(&str, f64)> = c
                .segment_annotations
                .iter()
                .filter(|a| a.source_id == s.id)
                .map(|a| (a.annotator_id.as_str(), if is_edited(c, a) { 1.0 } else { 0.0 }))
                .collect();
            SourceMeans {
                source_id: s.id.clone(),
                segment: cat_means(&seg_rows),
                document: cat_means(&doc_rows),
                edit_rate: pooled_mean(&edits, pooling),
            }
        })
        .collect();

    let all_edits: Vec<(&str, f64)> = c
        .segment_annotations
        .iter()
        .map(|a| (a.annotator_id.as_str(), if is_edited(c, a) { 1.0 } else { 0.0 }))
        .collect();

    let (baseline, beats) = match beats_baseline(c, Category::Overall) {
        Ok((b, e)) => (Some(b), e),
        Err(e) => {
            notes.push(format!("beats-baseline frequencies skipped: {e}"));
            (None, Vec::new())
        }
    };

    let max = c.meta.scale.max;
    let base_rows: Vec<&(&SegmentAnnotation, [f64; 7])> = match &baseline {
        Some(b) => seg.iter().filter(|(a, _)| &a.source_id == b).collect(),
        None => Vec::new(),
    };
    let unedited: Vec<&[f64; 7]> = base_rows.iter().filter(|(a, _)| !is_edited(c, a)).map(|(_, v)| v).collect();
    let n_base = base_rows.len();
    let frac = |count: usize| if n_base == 0 { 0.0 } else { count as f64 / n_base as f64 };
    let mut reduced: Vec<ReducedWithoutEdit> = Category::ALL
        .iter()
        .map(|cat| {
            let count = unedited.iter().filter(|v| v[cat.index()] < max).count();
            ReducedWithoutEdit {
                category: cat.name().to_string(),
                fraction: frac(count),
                count,
            }
        })
        .collect();
    let any = unedited.iter().filter(|v| v.iter().any(|x| *x < max)).count();
    reduced.push(ReducedWithoutEdit {
        category: "any".into(),
        fraction: frac(any),
        count: any,
    });

    SourceQualitySummary {
        pooling,
        sources,
        edit_rate: pooled_mean(&all_edits, pooling),
        baseline,
        beats_baseline: beats,
        reduced_without_edit: reduced,
        baseline_annotations: n_base,
        notes,
    }
}

/// Overall edit rate: share of segment annotations whose text differs from
/// the hypothesis.
pub fn edit_rate(c: &Campaign, pooling: Pooling) -> Option<f64> {
    let items: Vec<(&str, f64)> = c
        .segment_annotations
        .iter()
        .map(|a| (a.annotator_id.as_str(), if is_edited(c, a) { 1.0 } else { 0.0 }))
        .collect();
    pooled_mean(&items, pooling)
}

// ---------------------------------------------------------------------------
// Distributions

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingDistribution {
    pub label: String,
    pub n: usize,
    pub mean: Option<f64>,
    /// Counts per grid point `min + i·step`.
    pub counts: Vec<usize>,
}

fn histogram(c: &Campaign, label: String, values: &[f64]) -> RatingDistribution {
    let s = c.meta.scale;
    let bins = ((s.max - s.min) / s.step).round() as usize + 1;
    let mut counts = vec![0; bins];
    for v in values {
        let i = ((v - s.min) / s.step).round() as usize;
        counts[i.min(bins - 1)] += 1;
    }
    RatingDistribution {
        label,
        n: values.len(),
        mean: mean_of(values),
        counts,
    }
}

/// Per-category rating histograms at one level.
pub fn category_distributions(c: &Campaign, level: Level) -> Vec<RatingDistribution> {
    let (rows, _) = rating_rows(c, level);
    Category::ALL
        .iter()
        .map(|cat| {
            let v: Vec<f64> = rows.iter().map(|(_, r)| r[cat.index()]).collect();
            histogram(c, cat.name().to_string(), &v)
        })
        .collect()
}

/// Per-annotator histograms of segment-level Overall.
pub fn annotator_distributions(c: &Campaign) -> Vec<RatingDistribution> {
    let (rows, _) = segment_rows(c, None);
    c.annotators
        .iter()
        .map(|a| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|(x, _)| x.annotator_id == a.id)
                .map(|(_, r)| r[Category::Overall.index()])
                .collect();
            histogram(c, a.id.clone(), &v)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Annotator groups

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEffect {
    pub group: AnnotatorGroup,
    pub annotators: Vec<String>,
    pub mean_overall: Option<f64>,
    /// Categories-only regression restricted to the group.
    pub regression: Option<MultiSeedSummary>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorEffect {
    pub annotator_id: String,
    pub group: AnnotatorGroup,
    pub mean_overall: Option<f64>,
    pub r_test_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEffects {
    pub groups: Vec<GroupEffect>,
    pub annotators: Vec<AnnotatorEffect>,
    /// Group one-hot as the only feature.
    pub expertise_only: Option<MultiSeedSummary>,
    /// Annotator one-hot as the only feature.
    pub annotator_only: Option<MultiSeedSummary>,
    pub notes: Vec<String>,
}

/// Segment-level differences between annotator groups and individuals.
pub fn group_effects(c: &Campaign, seed: u64, n_seeds: usize) -> GroupEffects {
    let (rows, _) = segment_rows(c, None);
    let overall = |ids: &BTreeSet<&str>| -> Option<f64> {
        let v: Vec<f64> = rows
            .iter()
            .filter(|(a, _)| ids.contains(a.annotator_id.as_str()))
            .map(|(_, v)| v[Category::Overall.index()])
            .collect();
        mean_of(&v)
    };
    let base = |annotators: Option<Vec<String>>, features: Vec<Feature>| RegressionConfig {
        seed,
        annotators,
        ..RegressionConfig::new(Level::Segment, features)
    };
    let mut notes = Vec::new();
    let groups = AnnotatorGroup::ALL
        .iter()
        .filter_map(|g| {
            let ids: Vec<String> = c.annotators.iter().filter(|a| a.group == *g).map(|a| a.id.clone()).collect();
            if ids.is_empty() {
                notes.push(format!("no {} annotators", g.name()));
                return None;
            }
            let set: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
            let mut gnotes = Vec::new();
            let regression = match regress_over_seeds(c, &base(Some(ids.clone()), Feature::components()), n_seeds) {
                Ok(s) => Some(s),
                Err(e) => {
                    gnotes.push(format!("regression failed: {e}"));
                    None
                }
            };
            Some(GroupEffect {
                group: *g,
                mean_overall: overall(&set),
                annotators: ids,
                regression,
                notes: gnotes,
            })
        })
        .collect();
    let annotators = c
        .annotators
        .iter()
        .map(|a| {
            let set: BTreeSet<&str> = [a.id.as_str()].into_iter().collect();
            AnnotatorEffect {
                annotator_id: a.id.clone(),
                group: a.group,
                mean_overall: overall(&set),
                r_test_mean: regress_over_seeds(c, &base(Some(vec![a.id.clone()]), Feature::components()), n_seeds)
                    .ok()
                    .map(|s| s.mean_r),
            }
        })
        .collect();
    let mut single = |f: Feature| match regress_over_seeds(c, &base(None, vec![f]), n_seeds) {
        Ok(s) => Some(s),
        Err(e) => {
            notes.push(format!("{} regression failed: {e}", f.describe()));
            None
        }
    };
    let expertise_only = single(Feature::GroupOneHot);
    let annotator_only = single(Feature::AnnotatorOneHot);
    GroupEffects {
        groups,
        annotators,
        expertise_only,
        annotator_only,
        notes,
    }
}
