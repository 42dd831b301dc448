//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Edit distance by plain recursion with memoisation.
pub fn lev(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], i: usize, j: usize, memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if let Some(v) = memo[i][j] {
            return v;
        }
        let v = if i == a.len() {
            b.len() - j
        } else if j == b.len() {
            a.len() - i
        } else if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j, memo)
                .min(go(a, b, i, j + 1, memo))
                .min(go(a, b, i + 1, j + 1, memo))
        };
        memo[i][j] = Some(v);
        v
    }
    let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
    go(a, b, 0, 0, &mut memo)
}

pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

pub fn chars(s: &str) -> Vec<String> {
    s.chars().map(String::from).collect()
}

/// Clipped n-gram matches by counting each distinct n-gram with a linear scan.
fn clipped<T: PartialEq>(h: &[T], r: &[T], n: usize) -> (usize, usize, usize) {
    fn grams<T>(s: &[T], n: usize) -> Vec<&[T]> {
        if s.len() < n {
            return Vec::new();
        }
        (0..=s.len() - n).map(|i| &s[i..i + n]).collect()
    }
    let (hg, rg) = (grams(h, n), grams(r, n));
    let mut seen: Vec<&[T]> = Vec::new();
    let mut m = 0;
    for g in &hg {
        if seen.contains(g) {
            continue;
        }
        seen.push(g);
        let ch = hg.iter().filter(|x| *x == g).count();
        let cr = rg.iter().filter(|x| *x == g).count();
        m += ch.min(cr);
    }
    (m, hg.len(), rg.len())
}

/// Sentence BLEU, 4-gram, add-one smoothing above unigrams.
pub fn bleu(hyp: &str, reference: &str) -> f64 {
    let (h, r) = (words(hyp), words(reference));
    if h.is_empty() {
        return 0.0;
    }
    let mut prod = 1.0;
    for n in 1..=4 {
        let (m, t, _) = clipped(&h, &r, n);
        let p = if n == 1 {
            m as f64 / t as f64
        } else {
            (m as f64 + 1.0) / (t as f64 + 1.0)
        };
        prod *= p;
    }
    let bp = if h.len() >= r.len() {
        1.0
    } else {
        (1.0 - r.len() as f64 / h.len() as f64).exp()
    };
    bp * prod.powf(0.25)
}

/// chrF with n up to 6 and beta 2.
pub fn chrf(hyp: &str, reference: &str) -> f64 {
    let h: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    if h.is_empty() || r.is_empty() {
        return 0.0;
    }
    let (mut ps, mut rs, mut k) = (0.0, 0.0, 0.0);
    for n in 1..=6 {
        let (m, hc, rc) = clipped(&h, &r, n);
        if hc == 0 {
            continue;
        }
        ps += m as f64 / hc as f64;
        rs += if rc == 0 { 0.0 } else { m as f64 / rc as f64 };
        k += 1.0;
    }
    let (p, rec) = (ps / k, rs / k);
    if p + rec == 0.0 {
        0.0
    } else {
        5.0 * p * rec / (4.0 * p + rec)
    }
}

/// Least squares on centered data through the SVD pseudo-inverse.
pub fn ols_pinv(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let (n, k) = (rows.len(), rows[0].len());
    let means: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let ym = y.iter().sum::<f64>() / n as f64;
    let x = DMatrix::from_fn(n, k, |i, j| rows[i][j] - means[j]);
    let yv = DVector::from_iterator(n, y.iter().map(|v| v - ym));
    let pinv = x.pseudo_inverse(1e-12).expect("pseudo-inverse");
    (pinv * yv).iter().copied().collect()
}

/// Discordant pairs counted over all item pairs; pairs tied in either
/// ranking are skipped.
pub fn discordant_pairs(a: &[usize], b: &[usize]) -> usize {
    let mut d = 0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let sa = (a[i] as i64 - a[j] as i64).signum();
            let sb = (b[i] as i64 - b[j] as i64).signum();
            if sa != 0 && sb != 0 && sa != sb {
                d += 1;
            }
        }
    }
    d
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}
