use cgs_core::fixed_point::{assemble_ground_state, solve_fixed_point, FixedPointContext, SolverConfig};
use cgs_core::params::ModelParams;
use cgs_core::resolvent::compute_a1;
use cgs_core::radial::GridSpec;

fn main() {
    let params = ModelParams::new(3, 4.0).unwrap();
    let a1 = compute_a1(&params, Some(GridSpec::new(512, 2048, 100.0))).unwrap();
    println!("A1 fit = {:.8} (6π = {:.8}), order {:.3}, rel err {:+.2e}", a1.value, 6.0*std::f64::consts::PI, a1.order, (a1.value - 6.0*std::f64::consts::PI)/(6.0*std::f64::consts::PI));
    let config = SolverConfig { n_inner: 256, n_outer: 1024, ..Default::default() };
    let ctx = FixedPointContext::new(params, config, 1e-3, 1e-3).unwrap();
    let state = solve_fixed_point(&ctx, 1e-3).unwrap();
    println!("tau = {:.6e}, |eta|_q = {:.3e}, iters {}", state.tau, state.eta_norm, state.iter_count);
    match assemble_ground_state(&ctx, &state) {
        Ok(gs) => println!("pde {:.2e} nehari {:.2e} pohozaev {:.2e}", gs.pde_residual, gs.nehari_rel, gs.pohozaev_rel),
        Err(e) => println!("ASSEMBLE ERR: {e}"),
    }
}
