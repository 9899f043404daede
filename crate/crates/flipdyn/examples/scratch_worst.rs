use flipdyn::analysis::enumerate_colorings;
use flipdyn::coupling::{adjacent_pairs, ExactCoupling};
use flipdyn::{rat, FlipSchedule, Graph, Rat};
use num::{One, ToPrimitive};

fn main() {
    let g = Graph::path(3).unwrap();
    let alpha = rat(1, 100);
    let space = enumerate_colorings(&g, 4, 100000).unwrap();
    let pairs = adjacent_pairs(&g, &space);
    let mut worst: Option<(Rat, usize)> = None;
    for (i, pair) in pairs.iter().enumerate() {
        let ec = ExactCoupling::new(&g, pair, alpha.clone(), &FlipSchedule::vigoda(), 16).unwrap();
        let eh = ec.expected_hamming();
        if worst.as_ref().is_none_or(|(w, _)| eh > *w) {
            worst = Some((eh, i));
        }
    }
    let (eh, i) = worst.unwrap();
    let pair = &pairs[i];
    println!("worst pair: X={:?} Y={:?} v*={} E[H']={:.8} ({})",
        pair.x().colors(), pair.y().colors(), pair.v_star(), eh.to_f64().unwrap(), eh);
    println!("agree prob = {:.8}", ExactCoupling::new(&g, pair, alpha.clone(), &FlipSchedule::vigoda(), 16).unwrap().agree_probability().to_f64().unwrap());
    // How many pairs fail?
    let mut fails = 0;
    for pair in &pairs {
        let ec = ExactCoupling::new(&g, pair, alpha.clone(), &FlipSchedule::vigoda(), 16).unwrap();
        if ec.expected_hamming() >= Rat::one() {
            fails += 1;
            println!("  fail: X={:?} Y={:?} v*={} E={:.8}", pair.x().colors(), pair.y().colors(), pair.v_star(),
                     ec.expected_hamming().to_f64().unwrap());
        }
    }
    println!("{fails} of {} pairs fail", pairs.len());
}
