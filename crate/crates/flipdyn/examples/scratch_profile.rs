use flipdyn::analysis::*;
use flipdyn::{rat, FlipSchedule, Graph};
use std::time::Instant;

fn main() {
    let g = Graph::cycle(4).unwrap();
    let space = enumerate_colorings(&g, 4, 1000).unwrap();
    let t0 = Instant::now();
    let tm = transition_matrix(&g, &space, &rat(1, 20), &FlipSchedule::vigoda(), 16).unwrap();
    println!("matrix build: {:?}", t0.elapsed());
    let t1 = Instant::now();
    let pi = stationary_exact(&tm, &space).unwrap();
    println!("exact solve: {:?}", t1.elapsed());
    let t2 = Instant::now();
    let pf = stationary_power(&tm, 1e-13, 500_000).unwrap();
    println!("power iteration: {:?}", t2.elapsed());
    let _ = (pi, pf);
}
