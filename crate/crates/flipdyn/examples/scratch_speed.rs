use flipdyn::dynamics::{ChainRunner, RoundParams};
use flipdyn::{Coloring, FlipSchedule, Graph};
use std::time::Instant;

fn main() {
    let g = Graph::path(3).unwrap();
    let params = RoundParams::new(0.05, FlipSchedule::vigoda(), 7);
    let start = Coloring::new(vec![1, 2, 1], 4).unwrap();
    let t0 = Instant::now();
    let chains = 100_000u64;
    let rounds = 56u64;
    let mut acc = 0usize;
    for i in 0..chains {
        let p = RoundParams::new(0.05, FlipSchedule::vigoda(), 7 + i);
        let mut runner = ChainRunner::new(&g, 4, &p).unwrap();
        let mut sigma = start.clone();
        for t in 0..rounds {
            acc += runner.step(&mut sigma, t);
        }
    }
    println!("{} chains x {} rounds: {:?} ({} flips)", chains, rounds, t0.elapsed(), acc);
}
