use flipdyn::coupling::{coalescence_experiment, median_coalescence};
use flipdyn::dynamics::RoundParams;
use flipdyn::{Coloring, FlipSchedule, Graph};
use rand::SeedableRng;
use std::time::Instant;

fn main() {
    let k = 5u16;
    let alpha = 0.15f64;
    for n in [16usize, 32, 64] {
        let g = Graph::cycle(n).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1010 + n as u64);
        let starts: Vec<(Coloring, Coloring)> = (0..16)
            .map(|_| {
                (
                    Coloring::random_proper(&g, k, &mut rng).unwrap(),
                    Coloring::random_proper(&g, k, &mut rng).unwrap(),
                )
            })
            .collect();
        let params = RoundParams::new(alpha, FlipSchedule::vigoda(), 2024 + n as u64);
        let t = Instant::now();
        let rows = coalescence_experiment(&g, &starts, &params, 400_000);
        let censored = rows.iter().filter(|r| r.coalesced_at.is_none()).count();
        println!(
            "n={n}: median={} censored={censored}/16 ({:?})",
            median_coalescence(&rows, 400_000),
            t.elapsed()
        );
    }
}
