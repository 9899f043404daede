use flipdyn::coupling::phi_scan;
use flipdyn::FlipSchedule;
use std::time::Instant;

fn main() {
    for (name, sched, ne) in [
        ("vigoda", FlipSchedule::vigoda(), false),
        ("cdmpp", FlipSchedule::cdmpp(), true),
    ] {
        let t = Instant::now();
        let scan = phi_scan(&sched, 6, 6, ne);
        println!(
            "{name}: checked={} hamming_viol={} ne_viol={} witnesses={:?} pass={} ({:?})",
            scan.configs_checked,
            scan.hamming_violations.len(),
            scan.non_extremal_violations.len(),
            scan.equality_witnesses.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            scan.pass(),
            t.elapsed()
        );
    }
}
