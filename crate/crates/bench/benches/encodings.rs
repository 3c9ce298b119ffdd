use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use amk_core::{
    at_most_counter, count_accepted_dp, encode_approx, rank_models, Cnf, ModelShape, ShapeBounds,
    VarRole,
};

fn bench_encode_chain(c: &mut Criterion) {
    let shape: ModelShape = "2x2,2x2,2x2;m=2;k=2".parse().unwrap();
    c.bench_function("encode_approx chain n=32", |b| {
        b.iter(|| encode_approx(black_box(&shape)).unwrap())
    });
}

fn bench_counter(c: &mut Criterion) {
    c.bench_function("at_most_counter n=128 k=64", |b| {
        b.iter(|| {
            let mut cnf = Cnf::new();
            let vars = cnf.alloc_vars(128, VarRole::Target);
            at_most_counter(&mut cnf, black_box(&vars), 64).unwrap();
            cnf
        })
    });
}

fn bench_dp_oracle(c: &mut Criterion) {
    let shape: ModelShape = "2x2,2x2;m=2;k=2".parse().unwrap();
    c.bench_function("count_accepted_dp chain n=16", |b| {
        b.iter(|| count_accepted_dp(black_box(&shape)).unwrap())
    });
}

fn bench_search(c: &mut Criterion) {
    c.bench_function("rank_models k=5 n=10", |b| {
        b.iter(|| rank_models(black_box(5), black_box(10), &ShapeBounds::default()).unwrap())
    });
}

criterion_group!(benches, bench_encode_chain, bench_counter, bench_dp_oracle, bench_search);
criterion_main!(benches);
