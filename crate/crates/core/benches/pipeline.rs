use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use donut_core::index::build_index_with;
use donut_core::query::{execute, parse_query, PageRequest};
use donut_core::taxonomy::corpus_statistics_with;
use donut_core::Execution;
use donut_testkit::{synth_corpus, SynthConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_index");
    for n in [1_000usize, 10_000] {
        let corpus = synth_corpus(&SynthConfig::new(n, 1));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &corpus, |b, corpus| {
                b.iter(|| build_index_with(corpus, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn stats(c: &mut Criterion) {
    let mut group = c.benchmark_group("corpus_statistics");
    let corpus = synth_corpus(&SynthConfig::new(10_000, 2));
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| corpus_statistics_with(&corpus, exec)));
    }
    group.finish();
}

fn query(c: &mut Criterion) {
    let corpus = synth_corpus(&SynthConfig::new(10_000, 3));
    let snapshot = build_index_with(&corpus, Execution::default()).unwrap();
    let mut group = c.benchmark_group("query");
    for q in ["homology", "\"persistent homology\" tag:medicine", "author:pawel year:2020", "title:graph"] {
        let ast = parse_query(q).unwrap();
        group.bench_function(q, |b| b.iter(|| execute(&snapshot, &ast, PageRequest::default())));
    }
    group.finish();
}

fn config() -> Criterion {
    Criterion::default().configure_from_args().sample_size(10)
}

criterion_group! {
    name = benches;
    config = config();
    targets = build, stats, query
}
criterion_main!(benches);
