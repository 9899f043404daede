use flipdyn::analysis::*;
use flipdyn::{rat, FlipSchedule, Graph};

fn main() {
    let g = Graph::path(3).unwrap();
    let space = enumerate_colorings(&g, 4, 1000).unwrap();
    for (alpha, af) in [(rat(1, 20), "1/20"), (rat(1, 10), "1/10")] {
        let tm = transition_matrix(&g, &space, &alpha, &FlipSchedule::vigoda(), 16).unwrap();
        let pi = stationary_power(&tm, 1e-13, 500_000).unwrap();
        let prof = mixing_profile(&tm, &pi, 2000);
        println!("alpha={af}: t_mix={:?} curve[0]={:.3}", prof.t_mix, prof.curve[0]);
    }
}
