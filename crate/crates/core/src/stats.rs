//! Numerical kernels shared by the analyses: Pearson correlation, centered
//! least squares, seeded train/test splits, one-hot encoding and ranking
//! comparison.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ridge strength used when the design is rank deficient.
pub const RIDGE_FALLBACK: f64 = 1e-8;

/// Relative size below which a diagonal entry of R counts as zero.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("zero variance")]
    ZeroVariance,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("design matrix has rank 0 after centering")]
    DegenerateDesign,
    #[error("feature mismatch: model expects {expected:?}, got {got:?}")]
    FeatureMismatch { expected: Vec<String>, got: Vec<String> },
    #[error("invalid split sizes: test {test} of {n}")]
    InvalidSizes { n: usize, test: usize },
    #[error("rankings cover different items ({0} vs {1})")]
    ItemMismatch(usize, usize),
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(StatsError::NonFinite(i)),
        None => Ok(()),
    }
}

/// Product-moment correlation of two equally long samples.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // Deviations of a constant sample are exactly zero, but guard against
    // values that differ only in the last ulp.
    let scale_x = mx.abs().max(1.0);
    let scale_y = my.abs().max(1.0);
    if sxx <= (1e-14 * scale_x).powi(2) * x.len() as f64 || syy <= (1e-14 * scale_y).powi(2) * y.len() as f64 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Row-major observations × named features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    names: Vec<String>,
    rows: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, rows: usize, data: Vec<f64>) -> Result<Self, StatsError> {
        if data.len() != rows * names.len() {
            return Err(StatsError::ShapeMismatch(format!(
                "{} values for {} rows x {} columns",
                data.len(),
                rows,
                names.len()
            )));
        }
        let unique: BTreeSet<_> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(StatsError::ShapeMismatch("duplicate column names".into()));
        }
        check_finite(&data)?;
        Ok(FeatureMatrix { names, rows, data })
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self, StatsError> {
        if let Some(bad) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(StatsError::ShapeMismatch(format!(
                "row of {} values for {} columns",
                bad.len(),
                names.len()
            )));
        }
        Self::new(names, rows.len(), rows.concat())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let k = self.n_cols();
        &self.data[row * k..(row + 1) * k]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            names: self.names.clone(),
            rows: indices.len(),
            data,
        }
    }

    /// Columns of `self` followed by columns of `other`.
    pub fn hstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix, StatsError> {
        if self.rows != other.rows {
            return Err(StatsError::ShapeMismatch(format!(
                "cannot stack {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        FeatureMatrix::new(names, self.rows, data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub residual_norm: f64,
    pub rank_deficient: bool,
    /// Ridge strength applied, 0 for a plain least-squares solve.
    pub ridge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsModel {
    pub feature_names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Zero when the model was fit on centered data.
    pub intercept: f64,
    pub centered: bool,
    pub feature_means: Vec<f64>,
    pub target_mean: f64,
    pub diagnostics: FitDiagnostics,
}

impl OlsModel {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.coefficients[i])
    }
}

/// Least squares of `a` (rows × cols, row-major) against `b` by Householder
/// QR. Returns `None` when R has a (relatively) zero diagonal entry.
fn qr_solve(a: &[f64], rows: usize, cols: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    let at = |r: usize, c: usize| r * cols + c;
    let mut diag = vec![0.0; cols];
    for k in 0..cols {
        let norm = (k..rows).map(|r| a[at(r, k)].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if a[at(k, k)] > 0.0 { -norm } else { norm };
        // v = x - alpha e1, stored in place of column k below the diagonal
        let mut v: Vec<f64> = (k..rows).map(|r| a[at(r, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            diag[k] = a[at(k, k)];
            continue;
        }
        for c in k..cols {
            let dot: f64 = (k..rows).map(|r| v[r - k] * a[at(r, c)]).sum();
            let f = 2.0 * dot / vnorm2;
            for r in k..rows {
                a[at(r, c)] -= f * v[r - k];
            }
        }
        let dot: f64 = (k..rows).map(|r| v[r - k] * b[r]).sum();
        let f = 2.0 * dot / vnorm2;
        for r in k..rows {
            b[r] -= f * v[r - k];
        }
        diag[k] = a[at(k, k)];
    }
    let max_diag = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if max_diag == 0.0 || diag.iter().any(|d| d.abs() <= RANK_TOLERANCE * max_diag) {
        return None;
    }
    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let s: f64 = ((k + 1)..cols).map(|c| a[at(k, c)] * x[c]).sum();
        x[k] = (b[k] - s) / a[at(k, k)];
    }
    Some(x)
}

/// Ordinary least squares. With `center`, column and target means are
/// subtracted first and the intercept is 0; predictions add the target mean
/// back. Rank-deficient designs (e.g. centered one-hot blocks) fall back to a
/// ridge solve with strength [`RIDGE_FALLBACK`], flagged in the diagnostics.
pub fn fit_ols(x: &FeatureMatrix, y: &[f64], center: bool) -> Result<OlsModel, StatsError> {
    let (n, k) = (x.n_rows(), x.n_cols());
    if y.len() != n {
        return Err(StatsError::ShapeMismatch(format!("{n} rows but {} targets", y.len())));
    }
    check_finite(y)?;
    if k == 0 {
        return Err(StatsError::DegenerateDesign);
    }
    if n < k {
        return Err(StatsError::ShapeMismatch(format!("{n} rows for {k} features")));
    }
    let feature_means: Vec<f64> = if center {
        (0..k).map(|c| mean(&x.column(c))).collect()
    } else {
        vec![0.0; k]
    };
    let target_mean = if center { mean(y) } else { 0.0 };
    let mut a = Vec::with_capacity(n * k);
    for r in 0..n {
        a.extend(x.row(r).iter().zip(&feature_means).map(|(v, m)| v - m));
    }
    let b: Vec<f64> = y.iter().map(|v| v - target_mean).collect();

    if a.iter().all(|v| *v == 0.0) {
        return Err(StatsError::DegenerateDesign);
    }

    let (coefficients, ridge) = match qr_solve(&a, n, k, &b) {
        Some(beta) => (beta, 0.0),
        None => {
            // augment with sqrt(lambda) * I rows and solve again
            let lambda = RIDGE_FALLBACK;
            let mut aug = a.clone();
            let mut rhs = b.clone();
            for c in 0..k {
                let mut row = vec![0.0; k];
                row[c] = lambda.sqrt();
                aug.extend(row);
                rhs.push(0.0);
            }
            let beta = qr_solve(&aug, n + k, k, &rhs).ok_or(StatsError::DegenerateDesign)?;
            (beta, lambda)
        }
    };

    let residual_norm = (0..n)
        .map(|r| {
            let fit: f64 = (0..k).map(|c| a[r * k + c] * coefficients[c]).sum();
            (b[r] - fit).powi(2)
        })
        .sum::<f64>()
        .sqrt();

    Ok(OlsModel {
        feature_names: x.names().to_vec(),
        coefficients,
        intercept: 0.0,
        centered: center,
        feature_means,
        target_mean,
        diagnostics: FitDiagnostics {
            residual_norm,
            rank_deficient: ridge > 0.0,
            ridge,
        },
    })
}

/// `(X - means) · beta + mean(y)`.
pub fn predict(model: &OlsModel, x: &FeatureMatrix) -> Result<Vec<f64>, StatsError> {
    if x.names() != model.feature_names.as_slice() {
        return Err(StatsError::FeatureMismatch {
            expected: model.feature_names.clone(),
            got: x.names().to_vec(),
        });
    }
    Ok((0..x.n_rows())
        .map(|r| {
            let row = x.row(r);
            let s: f64 = row
                .iter()
                .zip(&model.feature_means)
                .zip(&model.coefficients)
                .map(|((v, m), b)| (v - m) * b)
                .sum();
            s + model.target_mean + model.intercept
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Uniform sample of `test` of `n` indices without replacement; both index
/// lists are sorted. Deterministic in `seed`.
pub fn train_test_split(n: usize, test: usize, seed: u64) -> Result<SplitPlan, StatsError> {
    if test == 0 || test >= n {
        return Err(StatsError::InvalidSizes { n, test });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_idx = rand::seq::index::sample(&mut rng, n, test).into_vec();
    test_idx.sort_unstable();
    let mut is_test = vec![false; n];
    for &i in &test_idx {
        is_test[i] = true;
    }
    let train = (0..n).filter(|i| !is_test[*i]).collect();
    Ok(SplitPlan {
        seed,
        train,
        test: test_idx,
    })
}

/// One column per distinct label (sorted), named by the label.
pub fn one_hot<S: AsRef<str>>(labels: &[S]) -> FeatureMatrix {
    let distinct: Vec<String> = labels
        .iter()
        .map(|l| l.as_ref().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let k = distinct.len();
    let mut data = vec![0.0; labels.len() * k];
    for (r, l) in labels.iter().enumerate() {
        let c = distinct.binary_search_by(|d| d.as_str().cmp(l.as_ref())).expect("label present");
        data[r * k + c] = 1.0;
    }
    FeatureMatrix {
        names: distinct,
        rows: labels.len(),
        data,
    }
}

/// Descending ranking of items `0..n`; equal scores share a tie group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    /// Tie-group index per item, 0 for the best.
    groups: Vec<usize>,
}

impl Ranking {
    pub fn from_groups(groups: Vec<usize>) -> Self {
        Ranking { groups }
    }

    pub fn group_of(&self, item: usize) -> usize {
        self.groups[item]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn tie_groups(&self) -> usize {
        self.groups.iter().copied().collect::<BTreeSet<_>>().len()
    }

    pub fn is_strict(&self) -> bool {
        self.tie_groups() == self.groups.len()
    }
}

pub fn rank_of_scores(scores: &[f64]) -> Ranking {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    let groups = scores
        .iter()
        .map(|s| distinct.iter().position(|d| d == s).expect("score present"))
        .collect();
    Ranking { groups }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcordanceBucket {
    Same,
    One,
    TwoPlus,
}

impl ConcordanceBucket {
    pub fn of(discordant: usize) -> Self {
        match discordant {
            0 => ConcordanceBucket::Same,
            1 => ConcordanceBucket::One,
            _ => ConcordanceBucket::TwoPlus,
        }
    }
}

/// Item pairs ordered oppositely by the two rankings. Pairs tied in either
/// ranking are skipped.
pub fn kendall_discordance(a: &Ranking, b: &Ranking) -> Result<(usize, ConcordanceBucket), StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::ItemMismatch(a.len(), b.len()));
    }
    let mut discordant = 0;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let da = a.groups[i].cmp(&a.groups[j]);
            let db = b.groups[i].cmp(&b.groups[j]);
            if da.is_eq() || db.is_eq() {
                continue;
            }
            if da != db {
                discordant += 1;
            }
        }
    }
    Ok((discordant, ConcordanceBucket::of(discordant)))
}
