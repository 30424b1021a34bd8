use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use obddproof::bounds::{lemma_matrix_select, Color, LemmaConstant, MatrixColoring};
use obddproof::oracle::{canonical_export, TruthTable};
use obddproof::{
    run_schedule, verify_refutation, NodeRef, NodeStore, RunLimits, ScheduleKind, VarId, VarOrder,
};
use obddproof_bench::php_fixture;

fn apply_chain(c: &mut Criterion) {
    c.bench_function("and/or chain over 24 vars", |b| {
        b.iter(|| {
            let mut s = NodeStore::new(VarOrder::row_major(24));
            let mut acc = NodeRef::FALSE;
            for v in (0..24).step_by(2) {
                let x = s.literal(VarId(v), true).unwrap();
                let y = s.literal(VarId(v + 1), true).unwrap();
                let t = s.and(x, y).unwrap();
                acc = s.or(acc, t).unwrap();
            }
            black_box(s.size(acc).unwrap())
        })
    });
}

fn refutations(c: &mut Criterion) {
    let mut group = c.benchmark_group("refute");
    group.sample_size(10);
    for kind in [
        ScheduleKind::Gz2003,
        ScheduleKind::BalancedTree,
        ScheduleKind::BucketProjection,
    ] {
        for n in [4, 6] {
            let (php, order, schedule) = php_fixture(n, kind);
            group.bench_with_input(BenchmarkId::new(kind.name(), n), &n, |b, _| {
                b.iter(|| {
                    run_schedule(&php, &order, &schedule, RunLimits::default())
                        .unwrap()
                        .max_intermediate
                })
            });
        }
    }
    let (php, order, schedule) = php_fixture(5, ScheduleKind::Gz2003);
    let run = run_schedule(&php, &order, &schedule, RunLimits::default()).unwrap();
    group.bench_function("verify gz2003/5", |b| {
        b.iter(|| verify_refutation(&php, &order, &run).is_valid())
    });
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let t = TruthTable::from_fn(12, |b| b.count_ones() % 3 == 0).unwrap();
    let order = VarOrder::random(12, 1);
    c.bench_function("canonical export 12 vars", |b| {
        b.iter(|| canonical_export(&t, &order).unwrap().nodes.len())
    });
}

fn lemma(c: &mut Criterion) {
    let n = 64;
    let cells = (0..n * n)
        .map(|i| {
            if (i * 7919) % (n * n) < n * n / 2 {
                Color::White
            } else {
                Color::Black
            }
        })
        .collect();
    let m = MatrixColoring::new(n, cells).unwrap();
    c.bench_function("matrix selection n=64", |b| {
        b.iter(|| lemma_matrix_select(&m, LemmaConstant::Proven).unwrap())
    });
}

criterion_group!(benches, apply_chain, refutations, oracle, lemma);
criterion_main!(benches);
