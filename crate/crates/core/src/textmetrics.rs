//! String similarity between an original hypothesis and its post-edited
//! version: Levenshtein ratios, sentence BLEU, chrF and TER.
//!
//! Tokenization is deliberately plain: word mode splits on Unicode
//! whitespace, char mode yields Unicode scalar values. Nothing is lowercased
//! or folded, so diacritic and case corrections count as edits.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenMode {
    Word,
    Char,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<String>,
    mode: TokenMode,
}

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn mode(&self) -> TokenMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub fn tokenize(text: &str, mode: TokenMode) -> TokenSequence {
    let tokens = match mode {
        TokenMode::Word => text.split_whitespace().map(str::to_string).collect(),
        TokenMode::Char => text.chars().map(String::from).collect(),
    };
    TokenSequence { tokens, mode }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("token sequences use different modes ({0:?} vs {1:?})")]
    ModeMismatch(TokenMode, TokenMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditDistance {
    pub distance: usize,
    /// `distance / max(|a|, |b|, 1)`
    pub ratio: f64,
}

/// Minimal number of insertions, deletions and substitutions.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn levenshtein(a: &TokenSequence, b: &TokenSequence) -> Result<EditDistance, MetricError> {
    if a.mode != b.mode {
        return Err(MetricError::ModeMismatch(a.mode, b.mode));
    }
    let distance = edit_distance(&a.tokens, &b.tokens);
    let denom = a.len().max(b.len()).max(1);
    Ok(EditDistance {
        distance,
        ratio: distance as f64 / denom as f64,
    })
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// (clipped matches, hypothesis n-gram count, reference n-gram count)
fn clipped_matches<T: Eq + Hash>(hyp: &[T], reference: &[T], n: usize) -> (usize, usize, usize) {
    let h = ngram_counts(hyp, n);
    let r = ngram_counts(reference, n);
    let matches = h
        .iter()
        .map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0)))
        .sum();
    (
        matches,
        hyp.len().saturating_sub(n - 1),
        reference.len().saturating_sub(n - 1),
    )
}

/// Sentence BLEU with `max_n`-gram precisions. Unigram precision is used as
/// is; higher orders get add-one smoothing. Brevity penalty is
/// `exp(min(0, 1 - |ref| / |hyp|))`; an empty hypothesis scores 0.
pub fn bleu(hyp: &TokenSequence, reference: &TokenSequence, max_n: usize) -> f64 {
    if hyp.is_empty() || max_n == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let (m, c, _) = clipped_matches(&hyp.tokens, &reference.tokens, n);
        let p = if n == 1 {
            m as f64 / c as f64
        } else {
            (m as f64 + 1.0) / (c as f64 + 1.0)
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    let ratio = reference.len() as f64 / hyp.len() as f64;
    let bp = (1.0 - ratio).min(0.0).exp();
    (bp * (log_sum / max_n as f64).exp()).clamp(0.0, 1.0)
}

/// Sentence BLEU on whitespace tokens, max order 4.
pub fn bleu_str(hyp: &str, reference: &str) -> f64 {
    bleu(
        &tokenize(hyp, TokenMode::Word),
        &tokenize(reference, TokenMode::Word),
        4,
    )
}

/// Character n-gram F-score. Whitespace is dropped before extracting
/// n-grams. Precision and recall are averaged over the orders for which the
/// hypothesis has at least one n-gram, then combined with weight `beta`.
pub fn chrf(hyp: &str, reference: &str, max_n: usize, beta: f64) -> f64 {
    let h: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if h.is_empty() || r.is_empty() {
        return 0.0;
    }
    let (mut p_sum, mut r_sum, mut orders) = (0.0, 0.0, 0usize);
    for n in 1..=max_n {
        let (m, hc, rc) = clipped_matches(&h, &r, n);
        if hc == 0 {
            continue;
        }
        p_sum += m as f64 / hc as f64;
        r_sum += if rc == 0 { 0.0 } else { m as f64 / rc as f64 };
        orders += 1;
    }
    let p = p_sum / orders as f64;
    let rec = r_sum / orders as f64;
    let b2 = beta * beta;
    let denom = b2 * p + rec;
    if denom == 0.0 {
        0.0
    } else {
        ((1.0 + b2) * p * rec / denom).clamp(0.0, 1.0)
    }
}

/// Caps on the greedy shift search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftLimits {
    pub max_block: usize,
    pub max_shifts: usize,
}

impl Default for ShiftLimits {
    fn default() -> Self {
        ShiftLimits {
            max_block: 10,
            max_shifts: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerStats {
    pub edits: usize,
    pub shifts: usize,
    pub ref_len: usize,
}

impl TerStats {
    pub fn score(&self) -> f64 {
        if self.ref_len == 0 {
            // Convention: an empty reference costs one per hypothesis word.
            self.edits as f64
        } else {
            (self.edits + self.shifts) as f64 / self.ref_len as f64
        }
    }
}

/// For every reference position, the hypothesis position it is aligned to in
/// one optimal edit alignment (deletions in the reference map to where the
/// missing word would be inserted).
fn reference_alignment<T: PartialEq>(hyp: &[T], reference: &[T]) -> Vec<usize> {
    let (n, m) = (hyp.len(), reference.len());
    let mut dp = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        dp[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dp[i - 1][j - 1] + usize::from(hyp[i - 1] != reference[j - 1]);
            dp[i][j] = sub.min(dp[i - 1][j] + 1).min(dp[i][j - 1] + 1);
        }
    }
    let mut align = vec![0; m];
    let (mut i, mut j) = (n, m);
    while j > 0 {
        if i > 0 && dp[i][j] == dp[i - 1][j - 1] + usize::from(hyp[i - 1] != reference[j - 1]) {
            align[j - 1] = i - 1;
            i -= 1;
            j -= 1;
        } else if dp[i][j] == dp[i][j - 1] + 1 {
            align[j - 1] = i;
            j -= 1;
        } else {
            i -= 1;
        }
    }
    align
}

/// Moves `hyp[start..start + len]` so that it begins at `dest` in the
/// sequence that remains after removing it.
pub fn apply_shift<T: Clone>(hyp: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let mut rest: Vec<T> = Vec::with_capacity(hyp.len());
    rest.extend_from_slice(&hyp[..start]);
    rest.extend_from_slice(&hyp[start + len..]);
    let block = &hyp[start..start + len];
    let mut out = Vec::with_capacity(hyp.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(block);
    out.extend_from_slice(&rest[dest..]);
    out
}

/// Greedy TER search: repeatedly apply the block shift with the largest net
/// reduction in edit distance (shift cost 1) until none helps.
///
/// Candidate blocks must occur verbatim in the reference, and are moved next
/// to the hypothesis position aligned with that occurrence.
pub fn ter_stats<T: Clone + Eq + Hash>(hyp: &[T], reference: &[T], limits: ShiftLimits) -> TerStats {
    if reference.is_empty() {
        return TerStats {
            edits: hyp.len(),
            shifts: 0,
            ref_len: 0,
        };
    }
    let mut current = hyp.to_vec();
    let mut dist = edit_distance(&current, reference);
    let mut shifts = 0;
    while shifts < limits.max_shifts && dist > 1 {
        let align = reference_alignment(&current, reference);
        let mut best: Option<(usize, Vec<T>)> = None;
        for start in 0..current.len() {
            for len in 1..=limits.max_block.min(current.len() - start) {
                if len > reference.len() {
                    break;
                }
                let block = &current[start..start + len];
                for k in 0..=(reference.len() - len) {
                    if &reference[k..k + len] != block {
                        continue;
                    }
                    let anchor = align[k];
                    for target in [anchor, anchor + 1] {
                        // target is a position in `current`; translate to the
                        // sequence with the block removed
                        if target >= start && target <= start + len {
                            continue;
                        }
                        let dest = if target > start + len { target - len } else { target };
                        if dest > current.len() - len {
                            continue;
                        }
                        let shifted = apply_shift(&current, start, len, dest);
                        let d = edit_distance(&shifted, reference);
                        if d + 1 < dist && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                            best = Some((d, shifted));
                        }
                    }
                }
            }
        }
        match best {
            Some((d, shifted)) => {
                current = shifted;
                dist = d;
                shifts += 1;
            }
            None => break,
        }
    }
    TerStats {
        edits: dist,
        shifts,
        ref_len: reference.len(),
    }
}

/// Translation edit rate of `hyp` against `reference`, word level. Lower is
/// better; both empty gives 0.
pub fn ter(hyp: &str, reference: &str) -> f64 {
    let h = tokenize(hyp, TokenMode::Word);
    let r = tokenize(reference, TokenMode::Word);
    ter_stats(h.tokens(), r.tokens(), ShiftLimits::default()).score()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Bleu,
    Chrf,
    Ter,
    WordEditRatio,
    CharEditRatio,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::Bleu,
        MetricKind::Chrf,
        MetricKind::Ter,
        MetricKind::WordEditRatio,
        MetricKind::CharEditRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Bleu => "bleu",
            MetricKind::Chrf => "chrf",
            MetricKind::Ter => "ter",
            MetricKind::WordEditRatio => "word_edit_ratio",
            MetricKind::CharEditRatio => "char_edit_ratio",
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_lowercase().replace('-', "_");
        MetricKind::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub bleu: f64,
    pub chrf: f64,
    pub ter: f64,
    pub word_edit_ratio: f64,
    pub char_edit_ratio: f64,
    pub identical: bool,
}

impl MetricVector {
    pub const IDENTICAL: MetricVector = MetricVector {
        bleu: 1.0,
        chrf: 1.0,
        ter: 0.0,
        word_edit_ratio: 0.0,
        char_edit_ratio: 0.0,
        identical: true,
    };

    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::Bleu => self.bleu,
            MetricKind::Chrf => self.chrf,
            MetricKind::Ter => self.ter,
            MetricKind::WordEditRatio => self.word_edit_ratio,
            MetricKind::CharEditRatio => self.char_edit_ratio,
        }
    }
}

/// All metrics between an original hypothesis and its edited version, with
/// the original as hypothesis and the edit as reference. Identical strings
/// short-circuit to [`MetricVector::IDENTICAL`] (this also pins the empty
/// string, for which BLEU and chrF are otherwise 0).
pub fn metric_vector(orig: &str, edited: &str) -> MetricVector {
    if orig == edited {
        return MetricVector::IDENTICAL;
    }
    let hw = tokenize(orig, TokenMode::Word);
    let rw = tokenize(edited, TokenMode::Word);
    let hc = tokenize(orig, TokenMode::Char);
    let rc = tokenize(edited, TokenMode::Char);
    MetricVector {
        bleu: bleu(&hw, &rw, 4),
        chrf: chrf(orig, edited, 6, 2.0),
        ter: ter_stats(hw.tokens(), rw.tokens(), ShiftLimits::default()).score(),
        word_edit_ratio: levenshtein(&hw, &rw).map(|d| d.ratio).unwrap_or(0.0),
        char_edit_ratio: levenshtein(&hc, &rc).map(|d| d.ratio).unwrap_or(0.0),
        identical: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{HashSet, VecDeque};

    fn words(s: &str) -> TokenSequence {
        tokenize(s, TokenMode::Word)
    }

    fn chars(s: &str) -> TokenSequence {
        tokenize(s, TokenMode::Char)
    }

    /// Plain recursive definition with memoization, independent of the
    /// rolling-row implementation.
    fn lev_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
        fn go<T: PartialEq>(a: &[T], b: &[T], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
            if i == a.len() {
                return b.len() - j;
            }
            if j == b.len() {
                return a.len() - i;
            }
            if let Some(&v) = memo.get(&(i, j)) {
                return v;
            }
            let v = if a[i] == b[j] {
                go(a, b, i + 1, j + 1, memo)
            } else {
                1 + go(a, b, i + 1, j + 1, memo)
                    .min(go(a, b, i + 1, j, memo))
                    .min(go(a, b, i, j + 1, memo))
            };
            memo.insert((i, j), v);
            v
        }
        go(a, b, 0, 0, &mut HashMap::new())
    }

    /// Exact TER: breadth-first over every block move, minimizing
    /// shifts + Levenshtein over all reachable orderings.
    fn ter_exhaustive(hyp: &[&str], reference: &[&str]) -> f64 {
        let mut best = edit_distance(hyp, reference);
        let mut seen: HashSet<Vec<&str>> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(hyp.to_vec());
        queue.push_back((hyp.to_vec(), 0usize));
        while let Some((cur, k)) = queue.pop_front() {
            best = best.min(k + edit_distance(&cur, reference));
            if k + 1 >= best {
                continue;
            }
            for start in 0..cur.len() {
                for len in 1..=cur.len() - start {
                    for dest in 0..=cur.len() - len {
                        let next = apply_shift(&cur, start, len, dest);
                        if seen.insert(next.clone()) {
                            queue.push_back((next, k + 1));
                        }
                    }
                }
            }
        }
        best as f64 / reference.len() as f64
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(words("a  b").tokens(), ["a", "b"]);
        assert_eq!(chars("ab").tokens(), ["a", "b"]);
        assert!(words("").is_empty());
        assert_eq!(words(" \tžluťoučký  kůň\n").tokens(), ["žluťoučký", "kůň"]);
        assert_eq!(chars("kůň").len(), 3);
    }

    #[test]
    fn levenshtein_examples() {
        let x = words("the same text");
        assert_eq!(levenshtein(&x, &x).unwrap(), EditDistance { distance: 0, ratio: 0.0 });

        let oracle = lev_oracle(&['k', 'i', 't', 't', 'e', 'n'], &['s', 'i', 't', 't', 'i', 'n', 'g']);
        assert_eq!(oracle, 3);
        let d = levenshtein(&chars("kitten"), &chars("sitting")).unwrap();
        assert_eq!(d.distance, oracle);
        assert!((d.ratio - 3.0 / 7.0).abs() < 1e-12);

        let d = levenshtein(&chars(""), &chars("abc")).unwrap();
        assert_eq!((d.distance, d.ratio), (3, 1.0));

        assert_eq!(
            levenshtein(&chars("a"), &words("a")),
            Err(MetricError::ModeMismatch(TokenMode::Char, TokenMode::Word))
        );
    }

    #[test]
    fn bleu_worked_example() {
        // p1 = 3/4, p2 = (2+1)/(3+1), p3 = (1+1)/(2+1), p4 = (0+1)/(1+1), BP = 1
        let oracle: f64 = (0.75_f64 * 0.75 * (2.0 / 3.0) * 0.5).powf(0.25);
        assert!((oracle - 0.6580).abs() < 1e-4);
        let got = bleu(&words("a b c d"), &words("a b c e"), 4);
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn bleu_edges() {
        let x = words("one two three four five");
        assert_eq!(bleu(&x, &x, 4), 1.0);
        assert_eq!(bleu(&words(""), &words("a"), 4), 0.0);
        assert_eq!(bleu(&words("x y z"), &words("a b c"), 4), 0.0);
        // brevity penalty for a short hypothesis
        let short = bleu(&words("a b"), &words("a b c d"), 4);
        assert!((short - (-1.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn bleu_degrades_monotonically() {
        let reference: Vec<String> = (0..12).map(|i| format!("w{i}")).collect();
        let mut prev = 1.0;
        for replaced in 1..=reference.len() {
            let hyp: Vec<String> = reference
                .iter()
                .enumerate()
                .map(|(i, w)| if i < replaced { format!("x{i}") } else { w.clone() })
                .collect();
            let score = bleu(&words(&hyp.join(" ")), &words(&reference.join(" ")), 4);
            assert!(score <= prev + 1e-15, "{replaced}: {score} > {prev}");
            prev = score;
        }
        // replacing from the middle outward
        let order = [6, 3, 9, 0, 11, 5];
        let mut hyp = reference.clone();
        let mut prev = 1.0;
        for (k, &i) in order.iter().enumerate() {
            hyp[i] = format!("fresh{k}");
            let score = bleu(&words(&hyp.join(" ")), &words(&reference.join(" ")), 4);
            assert!(score <= prev + 1e-15);
            prev = score;
        }
    }

    /// Counts shared n-grams by enumerating every window pair.
    fn chrf_oracle(hyp: &str, reference: &str) -> f64 {
        let h: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
        let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
        let (mut ps, mut rs, mut k) = (0.0, 0.0, 0.0);
        for n in 1..=6 {
            if h.len() < n {
                continue;
            }
            let hw: Vec<&[char]> = h.windows(n).collect();
            let rw: Vec<&[char]> = if r.len() >= n { r.windows(n).collect() } else { vec![] };
            let mut used = vec![false; rw.len()];
            let mut m = 0;
            for g in &hw {
                if let Some(pos) = (0..rw.len()).find(|&j| !used[j] && rw[j] == *g) {
                    used[pos] = true;
                    m += 1;
                }
            }
            ps += m as f64 / hw.len() as f64;
            rs += if rw.is_empty() { 0.0 } else { m as f64 / rw.len() as f64 };
            k += 1.0;
        }
        let (p, rr) = (ps / k, rs / k);
        if p + rr == 0.0 {
            0.0
        } else {
            5.0 * p * rr / (4.0 * p + rr)
        }
    }

    #[test]
    fn chrf_examples() {
        assert_eq!(chrf("abc def", "abc def", 6, 2.0), 1.0);
        assert_eq!(chrf("", "abc", 6, 2.0), 0.0);
        assert_eq!(chrf("abc", "", 6, 2.0), 0.0);
        // abcd vs abce: matches per order n=1..4 are 3,2,1,0 of 4,3,2,1 grams
        let oracle = chrf_oracle("abcd", "abce");
        let p: f64 = (3.0 / 4.0 + 2.0 / 3.0 + 1.0 / 2.0 + 0.0) / 4.0;
        assert!((oracle - p).abs() < 1e-12, "P = R here, so F = P");
        assert!((chrf("abcd", "abce", 6, 2.0) - oracle).abs() < 1e-12);
        for (h, r) in [("ab cd ef", "abcdeg"), ("kůň", "kun"), ("a", "aaaaaaa"), ("xyz", "abc")] {
            assert!((chrf(h, r, 6, 2.0) - chrf_oracle(h, r)).abs() < 1e-12, "{h} / {r}");
        }
    }

    #[test]
    fn ter_examples() {
        assert_eq!(ter("a b c", "a b c"), 0.0);
        let exact = ter_exhaustive(&["b", "a", "c"], &["a", "b", "c"]);
        assert!((exact - 1.0 / 3.0).abs() < 1e-12);
        assert!((ter("b a c", "a b c") - exact).abs() < 1e-12);
        assert!((ter("a b c d", "a b c") - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(ter("", ""), 0.0);
        assert_eq!(ter("a b", ""), 2.0);
        assert_eq!(ter("", "a b"), 1.0);
        // block shift of two words
        assert!((ter("c d a b", "a b c d") - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ter_matches_exhaustive_search_on_small_inputs() {
        let vocab = ["a", "b", "c", "d"];
        let mut rng_state = 12345u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng_state >> 33) as usize
        };
        let mut equal = 0;
        for _ in 0..300 {
            let hl = 1 + next() % 5;
            let rl = 1 + next() % 5;
            let h: Vec<&str> = (0..hl).map(|_| vocab[next() % 4]).collect();
            let r: Vec<&str> = (0..rl).map(|_| vocab[next() % 4]).collect();
            let exact = ter_exhaustive(&h, &r);
            let greedy = ter_stats(&h, &r, ShiftLimits::default()).score();
            let no_shift = edit_distance(&h, &r) as f64 / r.len() as f64;
            assert!(greedy + 1e-12 >= exact, "{h:?} {r:?}");
            assert!(greedy <= no_shift + 1e-12);
            if (greedy - exact).abs() < 1e-12 {
                equal += 1;
            }
        }
        // greedy is a heuristic but should agree almost always at this size
        assert!(equal >= 270, "only {equal}/300 agreed with the exact search");
    }

    #[test]
    fn metric_vector_identity_and_bounds() {
        assert_eq!(metric_vector("Dobrý den", "Dobrý den"), MetricVector::IDENTICAL);
        assert_eq!(metric_vector("", ""), MetricVector::IDENTICAL);
        let v = metric_vector("a b c d", "a b c e");
        assert!(!v.identical);
        assert!((v.bleu - bleu(&words("a b c d"), &words("a b c e"), 4)).abs() < 1e-15);
        assert!((v.chrf - chrf_oracle("a b c d", "a b c e")).abs() < 1e-12);
        assert!((v.ter - 0.25).abs() < 1e-12);
        assert!((v.word_edit_ratio - 0.25).abs() < 1e-12);
        assert!((v.char_edit_ratio - 1.0 / 7.0).abs() < 1e-12);
        // case and diacritics are edits
        let v = metric_vector("Williams", "Williamsová");
        assert!(!v.identical && v.ter > 0.0);
        let v = metric_vector("zname", "známe");
        assert!(v.char_edit_ratio > 0.0);
    }

    fn short_text() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "ř", "Ab", "é", " ", "  "]), 0..12)
            .prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn levenshtein_metric_axioms(
            a in prop::collection::vec(0u8..4, 0..8),
            b in prop::collection::vec(0u8..4, 0..8),
            c in prop::collection::vec(0u8..4, 0..8),
        ) {
            let ab = edit_distance(&a, &b);
            prop_assert_eq!(ab, edit_distance(&b, &a));
            prop_assert_eq!(ab, lev_oracle(&a, &b));
            prop_assert!(ab <= a.len().max(b.len()));
            prop_assert!(edit_distance(&a, &c) <= ab + edit_distance(&b, &c));
        }

        #[test]
        fn metric_bounds(h in short_text(), r in short_text()) {
            let v = metric_vector(&h, &r);
            prop_assert!((0.0..=1.0).contains(&v.bleu));
            prop_assert!((0.0..=1.0).contains(&v.chrf));
            prop_assert!(v.ter >= 0.0);
            prop_assert!((0.0..=1.0).contains(&v.word_edit_ratio));
            prop_assert!((0.0..=1.0).contains(&v.char_edit_ratio));
            prop_assert_eq!(v.identical, h == r);
            prop_assert_eq!(metric_vector(&h, &h), MetricVector::IDENTICAL);
        }
    }
}
