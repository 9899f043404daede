use flipdyn::coupling::{coalescence_experiment, median_coalescence};
use flipdyn::dynamics::RoundParams;
use flipdyn::{Coloring, FlipSchedule, Graph};
use rand::SeedableRng;
use std::time::Instant;

fn main() {
    for k in [5u16, 6] {
        for alpha in [0.05f64, 0.1, 0.15, 0.25] {
            let g = Graph::cycle(16).unwrap();
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
            let starts: Vec<(Coloring, Coloring)> = (0..12)
                .map(|_| {
                    (
                        Coloring::random_proper(&g, k, &mut rng).unwrap(),
                        Coloring::random_proper(&g, k, &mut rng).unwrap(),
                    )
                })
                .collect();
            let params = RoundParams::new(alpha, FlipSchedule::vigoda(), 77);
            let t = Instant::now();
            let rows = coalescence_experiment(&g, &starts, &params, 100_000);
            let censored = rows.iter().filter(|r| r.coalesced_at.is_none()).count();
            println!(
                "k={k} alpha={alpha}: median={} censored={censored}/12 ({:?})",
                median_coalescence(&rows, 100_000),
                t.elapsed()
            );
        }
    }
}
