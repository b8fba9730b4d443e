use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use twistjet::gen::Gen;
use twistjet::prolong::prolong_twisted;
use twistjet::symmetry::symmetry_residual;
use twistjet::{JetSpace, TwistForm, VectorField};

struct Workload {
    space: JetSpace,
    fields: Vec<VectorField>,
    mu: TwistForm,
    lagrangian: twistjet::Expr,
}

fn workload() -> Workload {
    let space = JetSpace::new(&["t", "x"], &["u", "v", "w"], 3).unwrap();
    let mut g = Gen::new(99);
    let fields = (0..4).map(|_| g.field(&space, true, 2)).collect();
    let mu = g.darboux_twist(&space).unwrap();
    let lagrangian = g.lagrangian(&space, 2);
    Workload {
        space,
        fields,
        mu,
        lagrangian,
    }
}

fn run(w: &Workload) {
    for x in &w.fields {
        black_box(prolong_twisted(&w.space, x, &w.mu, 3).unwrap());
        black_box(symmetry_residual(&w.space, &w.lagrangian, x, Some(&w.mu), "X").unwrap());
    }
}

fn par_vs_seq(c: &mut Criterion) {
    let w = workload();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut group = c.benchmark_group("twisted prolongation");
    group.measurement_time(Duration::from_secs(10));
    group.sample_size(10);
    group.bench_function("one thread", |b| b.iter(|| single.install(|| run(&w))));
    group.bench_function("global pool", |b| {
        b.iter(|| run(&w))
    });
    group.finish();
}

criterion_group!(benches, par_vs_seq);
criterion_main!(benches);
