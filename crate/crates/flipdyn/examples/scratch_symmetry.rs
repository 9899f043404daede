use flipdyn::analysis::*;
use flipdyn::{rat, Coloring, FlipSchedule, Graph, Rat};
use num::{ToPrimitive, Zero};

fn main() {
    let sched = FlipSchedule::vigoda();
    let alpha = rat(1, 20);

    let g = Graph::path(3).unwrap();
    let space = enumerate_colorings(&g, 4, 1000).unwrap();
    let tm = transition_matrix(&g, &space, &alpha, &sched, 16).unwrap();
    let n = tm.n();
    let mut bad_cols = 0;
    for j in 0..n {
        let mut col = Rat::zero();
        for i in 0..n {
            col += tm.entry(i, j);
        }
        if col != rat(1, 1) {
            bad_cols += 1;
        }
    }
    println!("P3 k4: {} columns with sum != 1 (of {})", bad_cols, n);
    let aba = Coloring::new(vec![1, 2, 1], 4).unwrap();
    let abc = Coloring::new(vec![3, 2, 1], 4).unwrap();
    let fwd = transition_probability(&g, &aba, &abc, &alpha, &sched, 16).unwrap();
    let bwd = transition_probability(&g, &abc, &aba, &alpha, &sched, 16).unwrap();
    println!("P3: P(aba->abc) = {fwd}");
    println!("P3: P(abc->aba) = {bwd}");
    println!("P3: equal? {}", fwd == bwd);
    let mut asym = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if tm.entry(i, j) != tm.entry(j, i) {
                asym += 1;
            }
        }
    }
    println!("P3: asymmetric entry pairs: {asym}");

    let g4 = Graph::cycle(4).unwrap();
    let space4 = enumerate_colorings(&g4, 4, 1000).unwrap();
    let tm4 = transition_matrix(&g4, &space4, &alpha, &sched, 16).unwrap();
    let pi4 = stationary_exact(&tm4, &space4).unwrap();
    let uni: Vec<Rat> = vec![rat(1, space4.len() as i64); space4.len()];
    let tv = tv_exact(&pi4, &uni);
    println!("C4 k4: |Omega| = {}, TV(pi, uniform) ~ {:.8}", space4.len(), tv.to_f64().unwrap());
}
