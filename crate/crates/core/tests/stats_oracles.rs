mod common;

use ortkit::analysis::{regress_overall, Feature, Level, RegressionConfig};
use ortkit::model::Category;
use ortkit::stats::{fit_ols, kendall_discordance, predict, ConcordanceBucket, FeatureMatrix, Ranking};
use ortkit::synth::{generate_campaign, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ols_matches_pseudo_inverse_on_random_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(1..=6);
        let n = rng.random_range(k + 5..=60);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..k).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let beta: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-0.5..0.5))
            .collect();
        let names = (0..k).map(|j| format!("x{j}")).collect();
        let x = FeatureMatrix::from_rows(names, &rows).unwrap();
        let model = fit_ols(&x, &y, true).unwrap();
        assert!(!model.diagnostics.rank_deficient);
        let oracle = common::ols_pinv(&rows, &y);
        for (a, b) in model.coefficients.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
        // predictions against the oracle's fitted values
        let ym = y.iter().sum::<f64>() / n as f64;
        let means: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        let pred = predict(&model, &x).unwrap();
        for (r, p) in rows.iter().zip(&pred) {
            let o: f64 = ym + r.iter().zip(&means).zip(&oracle).map(|((v, m), b)| (v - m) * b).sum::<f64>();
            assert!((o - p).abs() < 1e-6);
        }
    }
    assert!(worst < 1e-6, "max coefficient deviation {worst}");
}

#[test]
fn kendall_matches_brute_force_for_all_rankings_of_four() {
    let perms = common::permutations(4);
    assert_eq!(perms.len(), 24);
    let mut cases = 0;
    for a in &perms {
        for b in &perms {
            let expected = common::discordant_pairs(a, b);
            let (d, bucket) = kendall_discordance(&Ranking::from_groups(a.clone()), &Ranking::from_groups(b.clone())).unwrap();
            assert_eq!(d, expected, "{a:?} vs {b:?}");
            assert!(d <= 6);
            let want = match expected {
                0 => ConcordanceBucket::Same,
                1 => ConcordanceBucket::One,
                _ => ConcordanceBucket::TwoPlus,
            };
            assert_eq!(bucket, want);
            cases += 1;
        }
    }
    assert_eq!(cases, 576);
}

#[test]
fn kendall_with_ties_matches_brute_force() {
    // weak orderings of 4 items: every group assignment over 0..4
    let mut all = Vec::new();
    for code in 0..256usize {
        all.push((0..4).map(|i| (code >> (2 * i)) & 3).collect::<Vec<_>>());
    }
    for a in all.iter().step_by(7) {
        for b in all.iter().step_by(5) {
            let (d, _) = kendall_discordance(&Ranking::from_groups(a.clone()), &Ranking::from_groups(b.clone())).unwrap();
            assert_eq!(d, common::discordant_pairs(a, b));
        }
    }
}

pub fn planted_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        seed,
        documents: 6,
        noise_sd: 0.0,
        integer_snap_prob: 1.0,
        overall_integer_snap_prob: 0.0,
        category_weights: [0.1, 0.1, 0.2, 0.3, 0.2, 0.1],
        category_sd: 0.8,
        base_quality: 3.5,
        ..Default::default()
    }
}

#[test]
fn planted_weights_are_recovered_without_noise() {
    for seed in [1, 2, 3] {
        let spec = planted_spec(seed);
        let c = generate_campaign(&spec).unwrap();
        let exp = regress_overall(&c, &RegressionConfig::new(Level::Segment, Feature::components())).unwrap();
        assert!((exp.r_test - 1.0).abs() < 1e-9, "r_test {}", exp.r_test);
        for (cat, w) in Category::COMPONENTS.iter().zip(spec.category_weights) {
            let got = exp.model.coefficient(cat.name()).unwrap();
            assert!((got - w).abs() < 1e-6, "{cat}: {got} vs {w}");
        }
    }
}
