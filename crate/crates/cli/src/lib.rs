//! The `ortkit` command line.
//!
//! Exit codes: 0 success, 1 domain error (invalid campaign, failed analysis,
//! campaigns differ), 2 I/O, parse, usage or bind error.

pub mod report;
pub mod svg;

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use ortkit::analysis::{self, AnalysisError, Feature, Level, Pooling, RegressionConfig};
use ortkit::ingest::{self, Format, IngestError};
use ortkit::model::{validate_campaign, Campaign, Category};
use ortkit::synth::{generate_campaign, SynthSpec};
use ortkit::textmetrics::metric_vector;
use ortkit_service::{Service, ServiceError};
use serde::Serialize;

use crate::report::ReportOptions;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Integrity(_) => Failure::domain(e.to_string()),
            _ => Failure::io(e.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Failure::domain(e.to_string())
    }
}

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Ingest(inner) => inner.into(),
            ServiceError::AlreadyInitialized(_) | ServiceError::ValidationFailed { .. } => {
                Failure::domain(e.to_string())
            }
            _ => Failure::io(e.to_string()),
        }
    }
}

type CmdResult = Result<i32, Failure>;

#[derive(Debug, Parser)]
#[command(name = "ortkit", version, about = "Translation rating campaigns: validation, analysis, synthesis and serving")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Campaign file.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Input format: canonical (JSON) or wide (TSV).
    #[arg(long, default_value = "canonical")]
    pub format: String,
}

impl Input {
    fn format(&self) -> Result<Format, Failure> {
        Ok(self.format.parse::<Format>()?)
    }

    /// Loads and validates the campaign.
    fn load(&self) -> Result<Campaign, Failure> {
        Ok(ingest::load_campaign(&self.input, self.format()?)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a campaign file; exits 1 when it has validation errors.
    Validate {
        #[command(flatten)]
        input: Input,
        /// Also write the validation report as JSON.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run every analysis and write a report bundle.
    Report {
        #[arg(long = "in", value_name = "FILE", required_unless_present = "render_only")]
        input: Option<PathBuf>,
        #[arg(long, default_value = "canonical")]
        format: String,
        /// Output directory; created if absent.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Base seed of the train/test splits.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of splits averaged per regression.
        #[arg(long, default_value_t = 100)]
        split_seeds: usize,
        /// Average statistics per annotator instead of pooling annotations.
        #[arg(long)]
        per_annotator: bool,
        /// Re-render markdown and charts from the JSON files in --out.
        #[arg(long)]
        render_only: bool,
    },
    /// Inter-annotator agreement and ordering concordance.
    Iaa {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "overall")]
        category: Category,
        /// Comma-separated source ids to restrict to.
        #[arg(long, value_delimiter = ',')]
        sources: Option<Vec<String>>,
        /// Comma-separated annotator ids to restrict to.
        #[arg(long, value_delimiter = ',')]
        annotators: Option<Vec<String>>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Linear regression of Overall on chosen features over repeated splits.
    Regress {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "segment")]
        level: Level,
        /// Comma-separated features: category names, metric names,
        /// `annotator` or `group`. Defaults to the six component categories.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<Feature>>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        split_seeds: usize,
        /// Held-out rows; scaled from the reference split when omitted.
        #[arg(long)]
        test_size: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        annotators: Option<Vec<String>>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Correlation of aggregated segment ratings with document ratings.
    Aggregate {
        #[command(flatten)]
        input: Input,
        /// Limit to one category; all seven by default.
        #[arg(long)]
        category: Option<Category>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Post-edit metrics: the campaign correlation table, or one pair.
    Metrics {
        #[arg(long = "in", value_name = "FILE", required_unless_present = "hyp")]
        input: Option<PathBuf>,
        #[arg(long, default_value = "canonical")]
        format: String,
        /// Original hypothesis (pair mode).
        #[arg(long, requires = "reference")]
        hyp: Option<String>,
        /// Edited text (pair mode).
        #[arg(long = "ref")]
        reference: Option<String>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic campaign.
    Synth {
        /// JSON generator settings; omitted fields take their defaults.
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "canonical")]
        format: String,
    },
    /// Run the annotation server.
    Serve {
        /// Campaign to import when the state directory is new.
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
        #[arg(long, default_value = "canonical")]
        format: String,
        #[arg(long, value_name = "DIR")]
        state: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "ORTKIT_ADMIN_TOKEN", hide_env_values = true)]
        admin_token: String,
    },
    /// Write the server state as a campaign file.
    Export {
        #[arg(long, value_name = "DIR")]
        state: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, default_value = "canonical")]
        format: String,
    },
    /// Compare two campaigns; exits 1 when they differ.
    Diff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "canonical")]
        format: String,
    },
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("output serializes");
    bytes.push(b'\n');
    write_file(path, &bytes)
}

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    match out {
        Some(path) => write_json(path, value),
        None => Ok(()),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "n/a".into())
}

fn validate(input: &Input, out: &Option<PathBuf>) -> CmdResult {
    let campaign = ingest::read_campaign(&input.input, input.format()?)?;
    let report = validate_campaign(&campaign);
    for e in &report.errors {
        println!("error: {e}");
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    let c = &report.counts;
    println!(
        "{} documents, {} sources, {} annotators, {} segment and {} document annotations",
        c.documents, c.sources, c.annotators, c.segment_annotations, c.document_annotations
    );
    println!("{} error(s), {} warning(s)", report.errors.len(), report.warnings.len());
    emit(out, &report)?;
    Ok(if report.is_valid() { 0 } else { 1 })
}

fn iaa(
    input: &Input,
    category: Category,
    sources: Option<&[String]>,
    annotators: Option<&[String]>,
    out: &Option<PathBuf>,
) -> CmdResult {
    let c = input.load()?;
    let agreement = analysis::iaa(&c, category, sources, annotators)?;
    let concordance = analysis::ordering_concordance(&c, category)?;
    for p in &agreement.pairs {
        println!("{} {} n={} r={}", p.annotator_a, p.annotator_b, p.n, opt(p.r));
    }
    println!(
        "mean pairwise r ({}): {} over {} pairs, {} excluded",
        category.name(),
        opt(agreement.mean_r),
        agreement.pairs.len() - agreement.excluded_pairs,
        agreement.excluded_pairs
    );
    println!(
        "ordering concordance: same {:.2}%, one swap {:.2}%, two or more {:.2}% of {} cases",
        100.0 * concordance.same,
        100.0 * concordance.one,
        100.0 * concordance.two_plus,
        concordance.cases
    );
    emit(out, &serde_json::json!({ "agreement": agreement, "concordance": concordance }))?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn regress(
    input: &Input,
    level: Level,
    features: Option<Vec<Feature>>,
    seed: u64,
    split_seeds: usize,
    test_size: Option<usize>,
    annotators: Option<Vec<String>>,
    out: &Option<PathBuf>,
) -> CmdResult {
    let c = input.load()?;
    let cfg = RegressionConfig {
        seed,
        test_size,
        annotators,
        ..RegressionConfig::new(level, features.unwrap_or_else(Feature::components))
    };
    let summary = analysis::regress_over_seeds(&c, &cfg, split_seeds)?;
    println!("{} ({} level), {} rows, {} held out", summary.features, level, summary.n_observations, summary.n_test);
    for (name, v) in &summary.mean_coefficients {
        println!("  {name:<24} {v:>9.4}");
    }
    println!(
        "test r over {} splits: mean {:.4}, sd {:.4}",
        summary.seeds.len(),
        summary.mean_r,
        summary.sd_r
    );
    for n in &summary.notes {
        println!("note: {n}");
    }
    emit(out, &summary)?;
    Ok(0)
}

fn aggregate(input: &Input, category: Option<Category>, out: &Option<PathBuf>) -> CmdResult {
    let c = input.load()?;
    let rows: Vec<_> = match category {
        Some(cat) => analysis::Aggregator::ALL
            .iter()
            .map(|a| analysis::aggregate_predict(&c, cat, *a))
            .collect(),
        None => analysis::aggregation_table(&c),
    };
    println!("{:<12} {:>7} {:>7} {:>7} {:>7}", "category", "min", "max", "avg", "med");
    for chunk in rows.chunks(4) {
        let cells: Vec<String> = chunk.iter().map(|r| format!("{:>7}", opt(r.r))).collect();
        println!("{:<12} {}", chunk[0].category.title(), cells.join(" "));
    }
    emit(out, &rows)?;
    Ok(0)
}

fn metrics(
    input: Option<&Path>,
    format: &str,
    pair: Option<(&str, &str)>,
    out: &Option<PathBuf>,
) -> CmdResult {
    if let Some((hyp, reference)) = pair {
        let v = metric_vector(hyp, reference);
        println!(
            "bleu {:.4}  chrf {:.4}  ter {:.4}  word_edit_ratio {:.4}  char_edit_ratio {:.4}",
            v.bleu, v.chrf, v.ter, v.word_edit_ratio, v.char_edit_ratio
        );
        emit(out, &v)?;
        return Ok(0);
    }
    let input = Input {
        input: input.expect("clap requires --in without --hyp").to_path_buf(),
        format: format.to_string(),
    };
    let c = input.load()?;
    let table = analysis::metric_table(&c);
    let header: Vec<String> = table.categories.iter().map(|c| format!("{:>12}", c.title())).collect();
    println!("{:<16}{}", "metric", header.join(""));
    for (m, row) in table.metrics.iter().zip(&table.cells) {
        let cells: Vec<String> = row.iter().map(|v| format!("{:>12}", opt(*v))).collect();
        println!("{:<16}{}", m.name(), cells.join(""));
    }
    println!("{} segment annotations", table.n);
    emit(out, &table)?;
    Ok(0)
}

fn synth(spec: Option<&Path>, out: &Path, seed: Option<u64>, format: &str) -> CmdResult {
    let mut settings = match spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<SynthSpec>(&text)
                .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?
        }
        None => SynthSpec::default(),
    };
    if let Some(s) = seed {
        settings.seed = s;
    }
    let format: Format = format.parse()?;
    let campaign = generate_campaign(&settings).map_err(|e| Failure::domain(e.to_string()))?;
    write_file(out, &ingest::export_campaign(&campaign, format)?)?;
    println!(
        "wrote {} ({} segment and {} document annotations)",
        out.display(),
        campaign.segment_annotations.len(),
        campaign.document_annotations.len()
    );
    Ok(0)
}

fn serve(input: Option<&Path>, format: &str, state: &Path, addr: SocketAddr, admin_token: &str) -> CmdResult {
    if admin_token.is_empty() {
        return Err(Failure::io("an admin token is required"));
    }
    let svc = if state.join("campaign.json").exists() {
        Service::open(state, admin_token)?
    } else {
        let path = input.ok_or_else(|| Failure::io(format!("{} is not initialized; pass --in", state.display())))?;
        let campaign = ingest::load_campaign(path, format.parse()?)?;
        let svc = Service::init(state, campaign, admin_token)?;
        for (annotator, token) in svc.tokens() {
            println!("{annotator}\t{token}");
        }
        svc
    };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::io(e.to_string()))?;
    runtime
        .block_on(ortkit_service::http::serve(Arc::new(svc), addr))
        .map_err(|e| Failure::io(format!("cannot serve on {addr}: {e}")))?;
    Ok(0)
}

fn export(state: &Path, out: &Path, format: &str) -> CmdResult {
    let format: Format = format.parse()?;
    let svc = Service::open(state, "")?;
    let campaign = svc.export();
    write_file(out, &ingest::export_campaign(&campaign, format)?)?;
    println!("wrote {} at journal sequence {}", out.display(), svc.last_sequence());
    Ok(0)
}

fn diff(a: &Path, b: &Path, format: &str) -> CmdResult {
    let format: Format = format.parse()?;
    let ca = ingest::read_campaign(a, format)?;
    let cb = ingest::read_campaign(b, format)?;
    let diffs = ingest::diff_campaigns(&ca, &cb);
    for d in &diffs {
        println!("{d}");
    }
    Ok(if diffs.is_empty() { 0 } else { 1 })
}

pub fn execute(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Validate { input, out } => validate(&input, &out),
        Command::Report {
            input,
            format,
            out,
            seed,
            split_seeds,
            per_annotator,
            render_only,
        } => {
            if !render_only {
                let input = Input {
                    input: input.expect("clap requires --in"),
                    format,
                };
                let c = input.load()?;
                let options = ReportOptions {
                    seed,
                    split_seeds,
                    pooling: if per_annotator {
                        Pooling::PerAnnotatorAverage
                    } else {
                        Pooling::Pooled
                    },
                };
                let bundle = report::build(&c, options)?;
                report::write_json(&bundle, &out)
                    .map_err(|e| Failure::io(format!("cannot write to {}: {e}", out.display())))?;
            }
            let rendered = report::render_dir(&out).map_err(|e| Failure::io(e.to_string()))?;
            println!("wrote {} ({} JSON files, {} rendered)", out.display(), report::JSON_FILES.len(), rendered.len());
            Ok(0)
        }
        Command::Iaa {
            input,
            category,
            sources,
            annotators,
            out,
        } => iaa(&input, category, sources.as_deref(), annotators.as_deref(), &out),
        Command::Regress {
            input,
            level,
            features,
            seed,
            split_seeds,
            test_size,
            annotators,
            out,
        } => regress(&input, level, features, seed, split_seeds, test_size, annotators, &out),
        Command::Aggregate { input, category, out } => aggregate(&input, category, &out),
        Command::Metrics {
            input,
            format,
            hyp,
            reference,
            out,
        } => {
            let pair = hyp.as_deref().zip(reference.as_deref());
            metrics(input.as_deref(), &format, pair, &out)
        }
        Command::Synth { spec, out, seed, format } => synth(spec.as_deref(), &out, seed, &format),
        Command::Serve {
            input,
            format,
            state,
            addr,
            admin_token,
        } => serve(input.as_deref(), &format, &state, addr, &admin_token),
        Command::Export { state, out, format } => export(&state, &out, &format),
        Command::Diff { a, b, format } => diff(&a, &b, &format),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
