//! Report bundle: one JSON file per analysis plus views rendered from them.
//!
//! Rendering reads only the JSON files, so `render_dir` on a bundle
//! directory reproduces the markdown and SVG output byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use ortkit::analysis::{
    self, AgreementReport, AggregationResult, Aggregator, AnalysisError, ConcordanceReport, CorrelationMatrix,
    Feature, GroupEffects, Level, MetricTable, MultiSeedSummary, Pooling, RatingDistribution, RegressionConfig,
    SourceQualitySummary,
};
use ortkit::model::{validate_campaign, Campaign, Category, CountSummary, RatingScale};
use ortkit::textmetrics::MetricKind;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub seed: u64,
    pub split_seeds: usize,
    pub pooling: Pooling,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            seed: 42,
            split_seeds: 100,
            pooling: Pooling::Pooled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub campaign: String,
    pub options: ReportOptions,
    pub scale: RatingScale,
    pub counts: CountSummary,
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distributions {
    pub segment: Vec<RatingDistribution>,
    pub document: Vec<RatingDistribution>,
    /// Segment-level Overall per annotator.
    pub annotators: Vec<RatingDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementCell {
    pub category: Category,
    /// `None` for all sources together.
    pub source: Option<String>,
    pub mean_r: Option<f64>,
    pub pairs: usize,
    pub excluded_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    /// Overall over all sources, with every pair.
    pub overall: AgreementReport,
    pub cells: Vec<AgreementCell>,
    pub concordance: Vec<ConcordanceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub experiments: Vec<MultiSeedSummary>,
    pub groups: GroupEffects,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub summary: Summary,
    pub distributions: Distributions,
    pub sources: SourceQualitySummary,
    pub correlations: Vec<CorrelationMatrix>,
    pub agreement: Agreement,
    pub regression: Regression,
    pub metrics: MetricTable,
    pub aggregation: Vec<AggregationResult>,
}

pub const JSON_FILES: [&str; 8] = [
    "summary.json",
    "distributions.json",
    "sources.json",
    "correlations.json",
    "agreement.json",
    "regression.json",
    "metrics.json",
    "aggregation.json",
];

/// Regression setups reported, as (level, features).
pub fn standard_experiments() -> Vec<(Level, Vec<Feature>)> {
    let cats = Feature::components();
    let with = |extra: Feature| {
        let mut f = cats.clone();
        f.push(extra);
        f
    };
    let bleu = Feature::Metric(MetricKind::Bleu);
    vec![
        (Level::Segment, cats.clone()),
        (Level::Segment, with(Feature::AnnotatorOneHot)),
        (Level::Segment, with(Feature::GroupOneHot)),
        (Level::Segment, with(bleu)),
        (Level::Segment, vec![bleu]),
        (Level::Segment, vec![bleu, Feature::AnnotatorOneHot]),
        (Level::Document, cats.clone()),
        (Level::Document, with(Feature::AnnotatorOneHot)),
    ]
}

fn agreement(c: &Campaign) -> Result<Agreement, AnalysisError> {
    let overall = analysis::iaa(c, Category::Overall, None, None)?;
    let mut scopes: Vec<Option<String>> = vec![None];
    scopes.extend(c.sources.iter().map(|s| Some(s.id.clone())));
    let mut cells = Vec::new();
    for cat in Category::ALL {
        for scope in &scopes {
            let only = scope.as_ref().map(|s| vec![s.clone()]);
            let r = analysis::iaa(c, cat, only.as_deref(), None)?;
            cells.push(AgreementCell {
                category: cat,
                source: scope.clone(),
                mean_r: r.mean_r,
                pairs: r.pairs.len() - r.excluded_pairs,
                excluded_pairs: r.excluded_pairs,
            });
        }
    }
    let concordance = Category::ALL
        .iter()
        .map(|cat| analysis::ordering_concordance(c, *cat))
        .collect::<Result<_, _>>()?;
    Ok(Agreement {
        overall,
        cells,
        concordance,
    })
}

pub fn build(c: &Campaign, options: ReportOptions) -> Result<Bundle, AnalysisError> {
    let report = validate_campaign(c);
    let summary = Summary {
        campaign: c.meta.name.clone(),
        options,
        scale: c.meta.scale,
        counts: report.counts.clone(),
        warnings: report.warnings.len(),
    };
    let distributions = Distributions {
        segment: analysis::category_distributions(c, Level::Segment),
        document: analysis::category_distributions(c, Level::Document),
        annotators: analysis::annotator_distributions(c),
    };
    let correlations = Level::ALL
        .iter()
        .map(|l| analysis::category_correlations(c, *l, options.pooling))
        .collect();
    let experiments = standard_experiments()
        .into_iter()
        .map(|(level, features)| {
            let cfg = RegressionConfig {
                seed: options.seed,
                ..RegressionConfig::new(level, features)
            };
            analysis::regress_over_seeds(c, &cfg, options.split_seeds)
        })
        .collect::<Result<_, _>>()?;
    Ok(Bundle {
        summary,
        distributions,
        sources: analysis::source_quality_summary(c, options.pooling),
        correlations,
        agreement: agreement(c)?,
        regression: Regression {
            experiments,
            groups: analysis::group_effects(c, options.seed, options.split_seeds),
        },
        metrics: analysis::metric_table(c),
        aggregation: analysis::aggregation_table(c),
    })
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("report data serializes");
    out.push(b'\n');
    out
}

pub fn write_json(bundle: &Bundle, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let files: [(&str, Vec<u8>); 8] = [
        (JSON_FILES[0], json_bytes(&bundle.summary)),
        (JSON_FILES[1], json_bytes(&bundle.distributions)),
        (JSON_FILES[2], json_bytes(&bundle.sources)),
        (JSON_FILES[3], json_bytes(&bundle.correlations)),
        (JSON_FILES[4], json_bytes(&bundle.agreement)),
        (JSON_FILES[5], json_bytes(&bundle.regression)),
        (JSON_FILES[6], json_bytes(&bundle.metrics)),
        (JSON_FILES[7], json_bytes(&bundle.aggregation)),
    ];
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}: {1}")]
    Parse(String, serde_json::Error),
}

fn read<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T, LoadError> {
    let path = dir.join(name);
    let bytes = std::fs::read(&path).map_err(|e| LoadError::Io(path.display().to_string(), e))?;
    serde_json::from_slice(&bytes).map_err(|e| LoadError::Parse(path.display().to_string(), e))
}

pub fn load(dir: &Path) -> Result<Bundle, LoadError> {
    Ok(Bundle {
        summary: read(dir, JSON_FILES[0])?,
        distributions: read(dir, JSON_FILES[1])?,
        sources: read(dir, JSON_FILES[2])?,
        correlations: read(dir, JSON_FILES[3])?,
        agreement: read(dir, JSON_FILES[4])?,
        regression: read(dir, JSON_FILES[5])?,
        metrics: read(dir, JSON_FILES[6])?,
        aggregation: read(dir, JSON_FILES[7])?,
    })
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "n/a".into())
}

fn pct(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

fn cat_names(cats: &[Category]) -> Vec<String> {
    cats.iter().map(|c| c.title().to_string()).collect()
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out.push('\n');
}

fn notes<'a>(out: &mut String, items: impl Iterator<Item = &'a String>) {
    let mut any = false;
    for n in items {
        let _ = writeln!(out, "- {n}");
        any = true;
    }
    if any {
        out.push('\n');
    }
}

fn markdown(b: &Bundle) -> String {
    let mut md = String::new();
    let s = &b.summary;
    let _ = writeln!(md, "# Campaign report: {}\n", s.campaign);
    let _ = writeln!(
        md,
        "Split seeds {} from base seed {}; pooling {:?}.\n",
        s.options.split_seeds, s.options.seed, s.options.pooling
    );

    md.push_str("## Counts\n\n");
    let c = &s.counts;
    let mut rows = vec![
        vec!["documents".into(), c.documents.to_string()],
        vec!["evaluated segments".into(), c.segments_evaluated.to_string()],
        vec!["sources".into(), c.sources.to_string()],
        vec!["annotators".into(), c.annotators.to_string()],
    ];
    for (g, n) in &c.annotators_per_group {
        rows.push(vec![format!("annotators ({g})"), n.to_string()]);
    }
    rows.extend([
        vec!["segment annotations".into(), c.segment_annotations.to_string()],
        vec!["document annotations".into(), c.document_annotations.to_string()],
        vec!["partial vectors (dropped)".into(), c.partial_vectors.to_string()],
        vec!["ratings".into(), c.ratings.to_string()],
        vec!["edited segments".into(), c.edited_segments.to_string()],
        vec!["validation warnings".into(), s.warnings.to_string()],
    ]);
    table(&mut md, &["quantity".into(), "value".into()], &rows);

    md.push_str("## Rating distributions\n\n![segment](distributions_segment.svg)\n![document](distributions_document.svg)\n\n");
    let header: Vec<String> = ["category", "segment mean", "segment n", "document mean", "document n"]
        .iter()
        .map(|h| h.to_string())
        .collect();
    let rows: Vec<Vec<String>> = b
        .distributions
        .segment
        .iter()
        .zip(&b.distributions.document)
        .map(|(sd, dd)| vec![sd.label.clone(), num(sd.mean), sd.n.to_string(), num(dd.mean), dd.n.to_string()])
        .collect();
    table(&mut md, &header, &rows);

    md.push_str("## Source means\n\n![segment](source_means_segment.svg)\n![document](source_means_document.svg)\n\n");
    for (level, pick) in [("segment", 0usize), ("document", 1)] {
        let mut header = vec![format!("source ({level})")];
        header.extend(cat_names(&Category::ALL));
        let rows: Vec<Vec<String>> = b
            .sources
            .sources
            .iter()
            .map(|src| {
                let vals = if pick == 0 { &src.segment } else { &src.document };
                let mut r = vec![src.source_id.clone()];
                r.extend(vals.iter().map(|v| num(*v)));
                r
            })
            .collect();
        table(&mut md, &header, &rows);
    }
    let mut rows: Vec<Vec<String>> = b
        .sources
        .sources
        .iter()
        .map(|src| vec![src.source_id.clone(), src.edit_rate.map(pct).unwrap_or_else(|| "n/a".into())])
        .collect();
    rows.push(vec!["all".into(), b.sources.edit_rate.map(pct).unwrap_or_else(|| "n/a".into())]);
    table(&mut md, &["source".into(), "edit rate".into()], &rows);
    if let Some(base) = &b.sources.baseline {
        let rows: Vec<Vec<String>> = b
            .sources
            .beats_baseline
            .iter()
            .map(|e| vec![e.source_id.clone(), pct(e.frequency), format!("{}/{}", e.beats, e.cases)])
            .collect();
        table(
            &mut md,
            &["source".into(), format!("Overall above {base}"), "count".into()],
            &rows,
        );
        let rows: Vec<Vec<String>> = b
            .sources
            .reduced_without_edit
            .iter()
            .map(|r| vec![r.category.clone(), pct(r.fraction), r.count.to_string()])
            .collect();
        table(
            &mut md,
            &[format!("{base} rated below max without edit"), "share".into(), "count".into()],
            &rows,
        );
    }
    notes(&mut md, b.sources.notes.iter());

    md.push_str("## Category correlations\n\n![segment](correlations_segment.svg)\n![document](correlations_document.svg)\n\n");
    for m in &b.correlations {
        let mut header = vec![m.level.to_string()];
        header.extend(cat_names(&m.categories));
        let rows: Vec<Vec<String>> = m
            .categories
            .iter()
            .zip(&m.cells)
            .map(|(cat, row)| {
                let mut r = vec![cat.title().to_string()];
                r.extend(row.iter().map(|v| num(*v)));
                r
            })
            .collect();
        table(&mut md, &header, &rows);
    }

    md.push_str("## Inter-annotator agreement\n\n");
    let _ = writeln!(
        md,
        "Overall, all sources: mean pairwise r = {} over {} pairs ({} excluded).\n",
        num(b.agreement.overall.mean_r),
        b.agreement.overall.pairs.len() - b.agreement.overall.excluded_pairs,
        b.agreement.overall.excluded_pairs
    );
    let mut scopes: Vec<Option<String>> = Vec::new();
    for cell in &b.agreement.cells {
        if !scopes.contains(&cell.source) {
            scopes.push(cell.source.clone());
        }
    }
    let mut header = vec!["category".to_string()];
    header.extend(scopes.iter().map(|s| s.clone().unwrap_or_else(|| "all".into())));
    let rows: Vec<Vec<String>> = Category::ALL
        .iter()
        .map(|cat| {
            let mut r = vec![cat.title().to_string()];
            for scope in &scopes {
                let v = b
                    .agreement
                    .cells
                    .iter()
                    .find(|x| x.category == *cat && &x.source == scope)
                    .and_then(|x| x.mean_r);
                r.push(num(v));
            }
            r
        })
        .collect();
    table(&mut md, &header, &rows);
    let header: Vec<String> = ["category", "same order", "one swap", "two or more", "cases", "skipped"]
        .iter()
        .map(|h| h.to_string())
        .collect();
    let rows: Vec<Vec<String>> = b
        .agreement
        .concordance
        .iter()
        .map(|k| {
            vec![
                k.category.title().to_string(),
                pct(k.same),
                pct(k.one),
                pct(k.two_plus),
                k.cases.to_string(),
                k.skipped.to_string(),
            ]
        })
        .collect();
    table(&mut md, &header, &rows);

    md.push_str("## Regression of Overall\n\n![scatter](regression_scatter.svg)\n\n");
    let header: Vec<String> = ["level", "features", "mean r (test)", "sd", "rows", "test rows"]
        .iter()
        .map(|h| h.to_string())
        .collect();
    let rows: Vec<Vec<String>> = b
        .regression
        .experiments
        .iter()
        .map(|e| {
            vec![
                e.level.to_string(),
                e.features.clone(),
                format!("{:.3}", e.mean_r),
                format!("{:.3}", e.sd_r),
                e.n_observations.to_string(),
                e.n_test.to_string(),
            ]
        })
        .collect();
    table(&mut md, &header, &rows);
    if let Some(first) = b.regression.experiments.first() {
        let rows: Vec<Vec<String>> = first
            .mean_coefficients
            .iter()
            .map(|(n, v)| vec![n.clone(), format!("{v:.4}")])
            .collect();
        table(
            &mut md,
            &[format!("{} coefficient", first.features), "mean".into()],
            &rows,
        );
    }
    let mut exp_notes: Vec<&String> = b.regression.experiments.iter().flat_map(|e| &e.notes).collect();
    exp_notes.dedup();
    notes(&mut md, exp_notes.into_iter());
    let g = &b.regression.groups;
    let rows: Vec<Vec<String>> = g
        .groups
        .iter()
        .map(|x| {
            vec![
                x.group.name().to_string(),
                x.annotators.len().to_string(),
                num(x.mean_overall),
                num(x.regression.as_ref().map(|r| r.mean_r)),
            ]
        })
        .collect();
    table(
        &mut md,
        &["group".into(), "annotators".into(), "mean Overall".into(), "categories-only r".into()],
        &rows,
    );
    let rows = vec![
        vec!["group one-hot only".into(), num(g.expertise_only.as_ref().map(|r| r.mean_r))],
        vec!["annotator one-hot only".into(), num(g.annotator_only.as_ref().map(|r| r.mean_r))],
    ];
    table(&mut md, &["model".into(), "mean r (test)".into()], &rows);
    let rows: Vec<Vec<String>> = g
        .annotators
        .iter()
        .map(|a| {
            vec![
                a.annotator_id.clone(),
                a.group.name().to_string(),
                num(a.mean_overall),
                num(a.r_test_mean),
            ]
        })
        .collect();
    table(
        &mut md,
        &["annotator".into(), "group".into(), "mean Overall".into(), "categories-only r".into()],
        &rows,
    );
    notes(&mut md, g.notes.iter());

    md.push_str("## Post-edit metrics vs ratings\n\n![metrics](metrics.svg)\n\n");
    let mut header = vec!["metric".to_string()];
    header.extend(cat_names(&b.metrics.categories));
    let rows: Vec<Vec<String>> = b
        .metrics
        .metrics
        .iter()
        .zip(&b.metrics.cells)
        .map(|(m, row)| {
            let mut r = vec![m.name().to_string()];
            r.extend(row.iter().map(|v| num(*v)));
            r
        })
        .collect();
    table(&mut md, &header, &rows);

    md.push_str("## Segment to document aggregation\n\n![aggregation](aggregation.svg)\n\n");
    let mut header = vec!["category".to_string()];
    header.extend(Aggregator::ALL.iter().map(|a| a.name().to_string()));
    let rows: Vec<Vec<String>> = Category::ALL
        .iter()
        .map(|cat| {
            let mut r = vec![cat.title().to_string()];
            for agg in Aggregator::ALL {
                let v = b
                    .aggregation
                    .iter()
                    .find(|x| x.category == *cat && x.aggregator == agg)
                    .and_then(|x| x.r);
                r.push(num(v));
            }
            r
        })
        .collect();
    table(&mut md, &header, &rows);
    md
}

/// Every rendered file as (name, contents).
pub fn render(b: &Bundle) -> Vec<(String, String)> {
    let scale = b.summary.scale;
    let mut out = vec![("report.md".to_string(), markdown(b))];
    for (name, dists) in [
        ("distributions_segment.svg", &b.distributions.segment),
        ("distributions_document.svg", &b.distributions.document),
        ("distributions_annotators.svg", &b.distributions.annotators),
    ] {
        let panels: Vec<svg::HistogramPanel> = dists
            .iter()
            .map(|d| svg::HistogramPanel {
                label: &d.label,
                counts: &d.counts,
                mean: d.mean,
            })
            .collect();
        let title = name.trim_end_matches(".svg").replace('_', " ");
        out.push((name.into(), svg::histograms(&title, &panels, scale.min, scale.max, 4)));
    }
    for (name, pick) in [("source_means_segment.svg", 0usize), ("source_means_document.svg", 1)] {
        let series: Vec<(String, Vec<Option<f64>>)> = b
            .sources
            .sources
            .iter()
            .map(|s| (s.source_id.clone(), if pick == 0 { s.segment.clone() } else { s.document.clone() }))
            .collect();
        let title = name.trim_end_matches(".svg").replace('_', " ");
        out.push((
            name.into(),
            svg::grouped_bars(&title, &cat_names(&Category::ALL), &series, scale.min, scale.max),
        ));
    }
    for m in &b.correlations {
        let names = cat_names(&m.categories);
        out.push((
            format!("correlations_{}.svg", m.level),
            svg::heatmap(&format!("category correlations ({})", m.level), &names, &names, &m.cells),
        ));
    }
    let metric_names: Vec<String> = b.metrics.metrics.iter().map(|m| m.name().to_string()).collect();
    out.push((
        "metrics.svg".into(),
        svg::heatmap(
            "post-edit metric vs rating",
            &metric_names,
            &cat_names(&b.metrics.categories),
            &b.metrics.cells,
        ),
    ));
    let agg_cells: Vec<Vec<Option<f64>>> = Category::ALL
        .iter()
        .map(|cat| {
            Aggregator::ALL
                .iter()
                .map(|agg| {
                    b.aggregation
                        .iter()
                        .find(|x| x.category == *cat && x.aggregator == *agg)
                        .and_then(|x| x.r)
                })
                .collect()
        })
        .collect();
    let agg_names: Vec<String> = Aggregator::ALL.iter().map(|a| a.name().to_string()).collect();
    out.push((
        "aggregation.svg".into(),
        svg::heatmap(
            "segment aggregate vs document rating",
            &cat_names(&Category::ALL),
            &agg_names,
            &agg_cells,
        ),
    ));
    if let Some(first) = b.regression.experiments.first() {
        let e = &first.first;
        out.push((
            "regression_scatter.svg".into(),
            svg::scatter(
                &format!("{} (seed {}, r = {:.3})", first.features, e.seed, e.r_test),
                "true Overall",
                "predicted",
                &e.test_points,
                scale.min,
                scale.max,
            ),
        ));
    }
    out
}

/// Renders the views of the bundle stored in `dir` into `dir`.
pub fn render_dir(dir: &Path) -> Result<Vec<String>, LoadError> {
    let bundle = load(dir)?;
    let mut names = Vec::new();
    for (name, body) in render(&bundle) {
        let path = dir.join(&name);
        std::fs::write(&path, body).map_err(|e| LoadError::Io(path.display().to_string(), e))?;
        names.push(name);
    }
    Ok(names)
}
