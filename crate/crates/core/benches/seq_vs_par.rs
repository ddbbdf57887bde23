use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use zb::auxiliary::{build_auxiliary, Walls};
use zb::branch::{compute_transitions, construct_system, limit_data, prune_to_active};
use zb::exec;
use zb::fixtures::schottky;
use zb::group::{primitive_hyperbolic_classes, ClassOptions};
use zb::transfer::{TransferFamily, DEFAULT_PADDING};

fn bench(c: &mut Criterion) {
    let group = schottky(6);
    let aux = build_auxiliary(&group, Walls::Default).unwrap();
    let ball = group.enumerate_ball(6).unwrap();
    let classes = primitive_hyperbolic_classes(&group, &ball, 12.0, ClassOptions::default());
    let limits =
        limit_data(&classes, &group.enumerate_ball(3).unwrap()).with_gaps(aux.domain.gaps.clone());
    let sys = construct_system(&aux, "schottky");

    let mut shots = c.benchmark_group("transitions");
    shots.sample_size(10);
    shots.bench_function(BenchmarkId::new("parallel", 16), |b| {
        b.iter(|| compute_transitions(&sys, &ball, &limits, 16))
    });
    shots.bench_function(BenchmarkId::new("sequential", 16), |b| {
        b.iter(|| exec::sequential(|| compute_transitions(&sys, &ball, &limits, 16)))
    });
    shots.finish();

    let pruned = prune_to_active(
        &compute_transitions(&sys, &ball, &limits, 16).system,
        &limits,
    )
    .unwrap();
    let family = TransferFamily::new(pruned, &limits, DEFAULT_PADDING).unwrap();
    let s = Complex64::new(2.0, 0.5);
    let mut assembly = c.benchmark_group("assemble");
    assembly.sample_size(20);
    for order in [8, 16] {
        assembly.bench_with_input(BenchmarkId::new("parallel", order), &order, |b, &n| {
            b.iter(|| family.assemble(s, n))
        });
        assembly.bench_with_input(BenchmarkId::new("sequential", order), &order, |b, &n| {
            b.iter(|| exec::sequential(|| family.assemble(s, n)))
        });
    }
    assembly.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
