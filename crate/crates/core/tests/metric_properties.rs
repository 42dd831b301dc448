mod common;

use ortkit::textmetrics::{bleu_str, chrf, edit_distance, metric_vector, ter, tokenize, MetricVector, TokenMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOCAB: [&str; 8] = ["a", "b", "c", "dům", "kočka", "the", "x", "yy"];

fn random_text(rng: &mut ChaCha8Rng, max: usize) -> String {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect::<Vec<_>>().join(" ")
}

/// Random pair, often with the second derived from the first.
fn random_pair(rng: &mut ChaCha8Rng) -> (String, String) {
    let a = random_text(rng, 12);
    let b = if rng.random_bool(0.5) {
        let mut t = common::words(&a);
        for _ in 0..rng.random_range(0..4) {
            match rng.random_range(0..3) {
                0 if !t.is_empty() => {
                    let i = rng.random_range(0..t.len());
                    t.remove(i);
                }
                1 => {
                    let i = rng.random_range(0..=t.len());
                    t.insert(i, VOCAB[rng.random_range(0..VOCAB.len())].to_string());
                }
                _ if t.len() > 1 => {
                    let i = rng.random_range(0..t.len() - 1);
                    t.swap(i, i + 1);
                }
                _ => {}
            }
        }
        t.join(" ")
    } else {
        random_text(rng, 12)
    };
    (a, b)
}

#[test]
fn identities_and_bounds_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let (h, r) = random_pair(&mut rng);
        let m = metric_vector(&h, &r);
        assert_eq!(metric_vector(&h, &h), MetricVector::IDENTICAL);
        for v in [m.bleu, m.chrf, m.word_edit_ratio, m.char_edit_ratio] {
            assert!((0.0..=1.0).contains(&v), "{h:?} {r:?} {m:?}");
        }
        assert!(m.ter >= 0.0);

        let (hw, rw) = (common::words(&h), common::words(&r));
        let (hc, rc) = (common::chars(&h), common::chars(&r));
        let lev_w = common::lev(&hw, &rw);
        assert_eq!(edit_distance(&hw, &rw), lev_w);
        assert_eq!(edit_distance(&hc, &rc), common::lev(&hc, &rc));
        assert_eq!(lev_w, common::lev(&rw, &hw));
        if h != r {
            let denom = hw.len().max(rw.len());
            let expect = if denom == 0 { 0.0 } else { lev_w as f64 / denom as f64 };
            assert!((m.word_edit_ratio - expect).abs() < 1e-12);
            assert!((m.bleu - common::bleu(&h, &r)).abs() < 1e-9, "{h:?} {r:?}");
            assert!((m.chrf - common::chrf(&h, &r)).abs() < 1e-9, "{h:?} {r:?}");
        }
        // shifts can only help: TER is at most the plain edit rate
        if !rw.is_empty() {
            let bound = m.word_edit_ratio * hw.len().max(rw.len()) as f64 / rw.len() as f64;
            assert!(ter(&h, &r) <= bound + 1e-12, "{h:?} {r:?}");
        } else {
            assert_eq!(ter(&h, &r), hw.len() as f64);
        }
    }
}

#[test]
fn bleu_worked_example() {
    // hyp: "the cat sat on the mat" vs ref: "the cat is on the mat"
    // 1-grams: 5/6; 2-grams: (3+1)/(5+1); 3-grams: (1+1)/(4+1); 4-grams: (0+1)/(3+1); BP = 1
    let expected = (5.0 / 6.0 * 4.0 / 6.0 * 2.0 / 5.0 * 1.0 / 4.0_f64).powf(0.25);
    let got = bleu_str("the cat sat on the mat", "the cat is on the mat");
    assert!((got - expected).abs() < 1e-4, "{got} vs {expected}");
    assert!((got - common::bleu("the cat sat on the mat", "the cat is on the mat")).abs() < 1e-12);
}

#[test]
fn chrf_and_tokenizer_edges() {
    assert_eq!(chrf("", "abc", 6, 2.0), 0.0);
    assert_eq!(chrf("a b c", "abc", 6, 2.0), 1.0);
    assert_eq!(tokenize("  a\tb \n", TokenMode::Word).tokens(), &["a".to_string(), "b".to_string()]);
    assert_eq!(tokenize("ďáb", TokenMode::Char).len(), 3);
}
