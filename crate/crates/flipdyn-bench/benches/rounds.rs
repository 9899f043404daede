use criterion::{criterion_group, criterion_main, Criterion};
use flipdyn::analysis::{enumerate_colorings, exact_row};
use flipdyn::coupling::phi_scan;
use flipdyn::dynamics::{distributed_round, RoundParams};
use flipdyn::local::run_local_round;
use flipdyn::rat::rat;
use flipdyn::{Coloring, FlipSchedule, Graph};
use rand::SeedableRng;
use std::hint::black_box;

fn bench_rounds(c: &mut Criterion) {
    let g = Graph::random_regular(50, 3, 7).unwrap();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
    let sigma = Coloring::random_proper(&g, 6, &mut rng).unwrap();
    let params = RoundParams::new(0.05, FlipSchedule::vigoda(), 99);

    c.bench_function("distributed_round_n50_d3_k6", |b| {
        let mut t = 0u64;
        b.iter(|| {
            t += 1;
            black_box(distributed_round(&g, &sigma, &params, t).unwrap())
        })
    });

    c.bench_function("local_round_n50_d3_k6", |b| {
        let mut t = 0u64;
        b.iter(|| {
            t += 1;
            black_box(run_local_round(&g, &sigma, &params, t).unwrap())
        })
    });
}

fn bench_exact(c: &mut Criterion) {
    let g = Graph::path(3).unwrap();
    let space = enumerate_colorings(&g, 4, 1000).unwrap();
    let sigma = Coloring::new(vec![1, 2, 1], 4).unwrap();
    let alpha = rat(1, 20);
    let schedule = FlipSchedule::vigoda();
    c.bench_function("exact_row_p3_k4", |b| {
        b.iter(|| black_box(exact_row(&g, &space, &sigma, &alpha, &schedule, 16).unwrap()))
    });
}

fn bench_phi(c: &mut Criterion) {
    let schedule = FlipSchedule::cdmpp();
    c.bench_function("phi_scan_d3", |b| {
        b.iter(|| black_box(phi_scan(&schedule, 3, 6, true)))
    });
}

criterion_group!(benches, bench_rounds, bench_exact, bench_phi);
criterion_main!(benches);
