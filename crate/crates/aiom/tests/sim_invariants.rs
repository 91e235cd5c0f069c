//! Simulation harness invariants: accuracy is monotone in comparator
//! signal strength (paired seeds), and the measured baseline tracks the
//! configured assessor accuracy at scale.

use aiom::sim::{
    generate_corpus, run_trials, sweep_slopes, CorpusSpec, NoiseSpec, SearchConfig,
};

#[test]
fn exact_match_is_monotone_in_comparator_slope() {
    let corpus = generate_corpus(&CorpusSpec {
        n_genres: 8,
        sigma: 0.3,
        ..CorpusSpec::new(600, 11)
    })
    .unwrap();
    let rows = sweep_slopes(
        &corpus,
        &NoiseSpec::default(),
        &SearchConfig::default(),
        &[0.0, 0.05, 0.1, 0.15],
        12,
        5,
    )
    .unwrap();
    // Paired seeds cancel most Monte Carlo noise; allow a two-point slack.
    for pair in rows.windows(2) {
        let (slope_a, ref a) = pair[0];
        let (slope_b, ref b) = pair[1];
        assert!(
            b.exact_match >= a.exact_match - 0.02,
            "exact match fell from {:.4} (slope {slope_a}) to {:.4} (slope {slope_b})",
            a.exact_match,
            b.exact_match
        );
    }
    // And the strongest signal must clearly beat the weakest.
    assert!(rows.last().unwrap().1.exact_match > rows[0].1.exact_match + 0.05);
}

#[test]
fn measured_baseline_tracks_configured_assessor_accuracy() {
    let corpus = generate_corpus(&CorpusSpec {
        n_genres: 8,
        sigma: 0.3,
        ..CorpusSpec::new(1000, 23)
    })
    .unwrap();
    for accuracy in [0.5, 0.7] {
        let noise = NoiseSpec {
            assessor_accuracy: accuracy,
            ..NoiseSpec::default()
        };
        // 50 trials x 200 held-out articles = 10,000 article-trials.
        let result = run_trials(&corpus, &noise, &SearchConfig::default(), 50, 31).unwrap();
        let n: u32 = result.per_trial.iter().map(|t| t.n_test).sum();
        assert!(n >= 10_000);
        let baseline = result.report.baseline_exact_match;
        assert!(
            (baseline - accuracy).abs() <= 0.02,
            "baseline {baseline:.4} strays more than 2 points from configured {accuracy}"
        );
    }
}
