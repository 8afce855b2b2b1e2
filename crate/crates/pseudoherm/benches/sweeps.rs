use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pseudoherm::connection::{axiom_report, identity_suite_with};
use pseudoherm::fefferman::{lift_connection_report, FeffermanMetric};
use pseudoherm::par::Exec;
use pseudoherm::*;

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn axioms(c: &mut Criterion) {
    let mut group = c.benchmark_group("axiom_report");
    group.sample_size(10);
    for id in ["heisenberg:2", "sphere:2", "scaled-heisenberg:2:0.3"] {
        let m = model_from_id(id).unwrap();
        let pts = m.sample_points(64, 1.0, 1);
        for (name, exec) in EXECS {
            group.bench_with_input(BenchmarkId::new(name, id), &pts, |b, pts| {
                b.iter(|| axiom_report(m.as_ref(), pts, 1e-6, exec))
            });
        }
    }
    group.finish();
}

fn identities(c: &mut Criterion) {
    let mut group = c.benchmark_group("identity_suite");
    group.sample_size(10);
    let m = scaled_heisenberg(2, 0.3).unwrap();
    let pts = m.sample_points(32, 1.0, 2);
    for (name, exec) in EXECS {
        group.bench_function(name, |b| b.iter(|| identity_suite_with(m.as_ref(), &pts, 4, 0, exec)));
    }
    group.finish();
}

fn fefferman(c: &mut Criterion) {
    let mut group = c.benchmark_group("lift_connection_report");
    group.sample_size(10);
    let m = heisenberg(2).unwrap();
    let f = FeffermanMetric::new(&m).unwrap();
    let pts = m.sample_points(16, 1.0, 3);
    for (name, exec) in EXECS {
        group.bench_function(name, |b| b.iter(|| lift_connection_report(&f, &pts, 1e-5, exec)));
    }
    group.finish();
}

criterion_group!(benches, axioms, identities, fefferman);
criterion_main!(benches);
