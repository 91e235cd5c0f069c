//! Parallel vs sequential Monte Carlo trials. `run_trials` uses the rayon
//! path when the `parallel` feature (default) is on; `run_trials_seq` is
//! the always-sequential fallback. Both must produce identical reports, so
//! the bench asserts equality once before measuring.
//!
//! Run with `cargo bench -p aiom`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use aiom::sim::{
    generate_corpus, perfect_oracle_exhaustive, run_trials, run_trials_seq, CorpusSpec,
    NoiseSpec, SearchConfig,
};

fn bench_trials(c: &mut Criterion) {
    let corpus = generate_corpus(&CorpusSpec {
        n_genres: 12,
        sigma: 0.3,
        ..CorpusSpec::new(600, 7)
    })
    .unwrap();
    let noise = NoiseSpec::default();
    let search = SearchConfig::default();

    let parallel = run_trials(&corpus, &noise, &search, 16, 42).unwrap();
    let sequential = run_trials_seq(&corpus, &noise, &search, 16, 42).unwrap();
    assert_eq!(
        parallel, sequential,
        "parallel and sequential paths must agree before timing them"
    );

    let mut group = c.benchmark_group("monte_carlo_trials");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            run_trials(
                black_box(&corpus),
                black_box(&noise),
                black_box(&search),
                16,
                42,
            )
            .unwrap()
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            run_trials_seq(
                black_box(&corpus),
                black_box(&noise),
                black_box(&search),
                16,
                42,
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_perfect_oracle(c: &mut Criterion) {
    let corpus = generate_corpus(&CorpusSpec {
        n_genres: 12,
        sigma: 0.3,
        ..CorpusSpec::new(200, 7)
    })
    .unwrap();
    let search = SearchConfig::default();

    let mut group = c.benchmark_group("perfect_oracle_exhaustive");
    group.sample_size(10);
    group.bench_function("all_starts", |b| {
        b.iter(|| perfect_oracle_exhaustive(black_box(&corpus), black_box(&search), 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_trials, bench_perfect_oracle);
criterion_main!(benches);
