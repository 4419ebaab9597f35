use cgs_core::fixed_point::{solve_fixed_point, FixedPointContext, SolverConfig};
use cgs_core::oracle::{find_ground_state_shooting, ShootConfig};
use cgs_core::params::ModelParams;
use cgs_core::closed_forms::alpha;

fn main() {
    let params = ModelParams::new(3, 4.0).unwrap();
    let config = SolverConfig { n_inner: 256, n_outer: 1024, ..Default::default() };
    let t = 1e-3;
    let ctx = FixedPointContext::new(params, config, t, t).unwrap();
    let state = solve_fixed_point(&ctx, t).unwrap();
    let s = alpha(&params, state.tau).unwrap();
    println!("tau={:.6e} s={:.3e} 1/sqrt(s)={:.1}", state.tau, s, 1.0/s.sqrt());
    let u = ctx.profiles.w.axpy(1.0, &state.eta);
    // L2 norm on grid
    let l2: f64 = ctx.profiles.grid.dot(&u.values, &u.values);
    println!("||u||_2^2 (grid) = {:.6e}", l2);
    // oracle
    let sep = find_ground_state_shooting(&params, s, t, Some(1.0 + state.eta.values[0]), ShootConfig::default()).unwrap();
    println!("oracle u0={:.8} vs fp u(0)={:.8}", sep.u0, u.values[0]);
    let o = sep.on_grid(std::sync::Arc::clone(&ctx.profiles.grid));
    let l2o: f64 = ctx.profiles.grid.dot(&o.values, &o.values);
    println!("||u_oracle||_2^2 (grid) = {:.6e}", l2o);
    // sample far-field comparison
    let nodes = ctx.profiles.grid.nodes();
    for &rt in &[50000.0, 65000.0, 75000.0, 85000.0, 100000.0, 120000.0, 138000.0, 139000.0] {
        let i = nodes.iter().position(|&r| r >= rt).unwrap_or(nodes.len()-1);
        println!("r={:9.1} u_fp={:+.6e} u_oracle={:+.6e} W={:+.6e}", nodes[i], u.values[i], o.values[i], ctx.profiles.w.values[i]);
    }
    // cumulative L2 mass difference profile
    let w = ctx.profiles.grid.weights();
    let mut acc_fp = 0.0;
    let mut acc_o = 0.0;
    let mut next_print = 1.0;
    for i in 0..nodes.len() {
        acc_fp += w[i] * u.values[i] * u.values[i];
        acc_o += w[i] * o.values[i] * o.values[i];
        if nodes[i] >= next_print {
            println!("  up to r={:9.1}: fp {:12.4e}  oracle {:12.4e}  diff {:+.4e}", nodes[i], acc_fp, acc_o, acc_fp - acc_o);
            next_print *= 1.6;
        }
    }
}
// appended second pass
