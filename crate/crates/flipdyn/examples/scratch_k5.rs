use flipdyn::coupling::contraction_sweep_exact;
use flipdyn::{rat, FlipSchedule, Graph};
use num::ToPrimitive;
use std::time::Instant;

fn main() {
    let alpha = rat(1, 100);
    let g = Graph::path(3).unwrap();
    let t = Instant::now();
    let sweep = contraction_sweep_exact(&g, 5, &alpha, &FlipSchedule::vigoda(), None, 20).unwrap();
    println!(
        "P3 k=5 vigoda: pairs={} maxE[H']={:.8} contract={} ({:?})",
        sweep.pairs,
        sweep.max_expected_hamming.to_f64().unwrap(),
        sweep.all_hamming_contract,
        t.elapsed()
    );
}
