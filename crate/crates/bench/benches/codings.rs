use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ietpc::construct::{build_pc_from_iet, verify_semiconjugacy};
use ietpc::pc::{certify_periodic, empirical_factor};
use ietpc::words::complexity;
use ietpc::{ExactNumber, Iet};
use ietpc_bench::{alpha, golden_pc, random_pcs};

fn iet(c: &mut Criterion) {
    let t = Iet::golden_rotation();
    let three = Iet::three_interval_example();
    let x3 = ExactNumber::sqrt_of(5).unwrap().mul_pow2(-3);
    c.bench_function("golden coding, 4000 letters", |b| {
        b.iter(|| t.coding(black_box(&alpha()), 4000).unwrap())
    });
    let word = t.coding(&alpha(), 4000).unwrap();
    c.bench_function("complexity, 4000 letters, k ≤ 30", |b| {
        b.iter(|| complexity(black_box(&word), 30).unwrap())
    });
    c.bench_function("refinement, 3-IET, k ≤ 12", |b| {
        b.iter(|| three.refinement_complexity(black_box(&x3), 12).unwrap())
    });
    c.bench_function("idoc, 3-IET, depth 200", |b| {
        b.iter(|| three.idoc_check(black_box(200)).unwrap())
    });
}

fn construction(c: &mut Criterion) {
    let t = Iet::golden_rotation();
    let mut g = c.benchmark_group("construct");
    g.sample_size(20);
    g.bench_function("golden, N = 64", |b| {
        b.iter(|| build_pc_from_iet(&t, None, black_box(64)).unwrap())
    });
    let built = golden_pc(64);
    g.bench_function("verify, L = 64, 20 gaps", |b| {
        b.iter(|| verify_semiconjugacy(&built, &t, black_box(64), 20).unwrap())
    });
    g.finish();
}

fn contractions(c: &mut Criterion) {
    let maps = random_pcs(20, 0);
    let zero = ExactNumber::zero();
    let mut g = c.benchmark_group("pc");
    g.sample_size(10);
    g.bench_function("certify 20 random 2-PCs", |b| {
        b.iter(|| {
            maps.iter()
                .filter(|f| certify_periodic(*f, &zero, 5000).unwrap().is_some())
                .count()
        })
    });
    let built = golden_pc(64);
    g.bench_function("empirical factor, m = 50000", |b| {
        b.iter(|| empirical_factor(&built.family, &zero, black_box(50_000), 1001).unwrap())
    });
    g.finish();
}

criterion_group!(benches, iet, construction, contractions);
criterion_main!(benches);
