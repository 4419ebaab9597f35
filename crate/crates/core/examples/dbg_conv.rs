use cgs_core::fixed_point::{assemble_ground_state, solve_fixed_point, FixedPointContext, SolverConfig};
use cgs_core::params::ModelParams;
use std::time::Instant;

fn main() {
    let params = ModelParams::new(3, 4.0).unwrap();
    let t = 1e-3;
    for (ni, no) in [(768usize, 12288usize), (1024, 16384), (2048, 16384)] {
        let start = Instant::now();
        let config = SolverConfig { n_inner: ni, n_outer: no, ..Default::default() };
        let ctx = FixedPointContext::new(params, config, t, t).unwrap();
        match solve_fixed_point(&ctx, t) {
            Ok(state) => {
                let gs = assemble_ground_state(&ctx, &state).unwrap();
                println!(
                    "({ni:4},{no:4}) tau={:.8e} pde={:.2e} nehari={:+.2e} pohozaev={:+.2e}  [{:?}]",
                    state.tau, gs.pde_residual, gs.nehari_rel, gs.pohozaev_rel, start.elapsed()
                );
            }
            Err(e) => println!("({ni:4},{no:4}) ERR {e}"),
        }
    }
}
