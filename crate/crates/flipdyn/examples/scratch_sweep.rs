use flipdyn::coupling::contraction_sweep_exact;
use flipdyn::{rat, FlipSchedule, Graph};
use num::ToPrimitive;
use std::time::Instant;

fn main() {
    let alpha = rat(1, 100);
    let delta = rat(1, 264);
    for (name, g) in [("P3", Graph::path(3).unwrap()), ("C4", Graph::cycle(4).unwrap())] {
        let eta = &delta * rat(g.max_degree() as i64, 1) / rat(34 * 4, 1);
        let t = Instant::now();
        let sweep = contraction_sweep_exact(&g, 4, &alpha, &FlipSchedule::vigoda(), None, 16).unwrap();
        println!(
            "{name} vigoda: pairs={} maxE[H']={:.8} contract={} ({:?})",
            sweep.pairs,
            sweep.max_expected_hamming.to_f64().unwrap(),
            sweep.all_hamming_contract,
            t.elapsed()
        );
        let t = Instant::now();
        let sweep2 =
            contraction_sweep_exact(&g, 4, &alpha, &FlipSchedule::cdmpp(), Some(&eta), 16).unwrap();
        println!(
            "{name} cdmpp+weighted: maxE[H']={:.8} maxRatio={:.10} wcontract={:?} ({:?})",
            sweep2.max_expected_hamming.to_f64().unwrap(),
            sweep2.max_weighted_ratio.as_ref().unwrap().to_f64().unwrap(),
            sweep2.all_weighted_contract,
            t.elapsed()
        );
    }
}
