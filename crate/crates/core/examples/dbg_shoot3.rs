use cgs_core::oracle::{find_ground_state_shooting, ShootConfig};
use cgs_core::params::ModelParams;

fn main() {
    let params = ModelParams::new(3, 4.0).unwrap();
    for (s, t) in [(0.09f64, 0.2f64), (0.01, 0.05), (1e-3, 0.01), (1.33e-8, 1e-3)] {
        match find_ground_state_shooting(&params, s, t, None, ShootConfig::default()) {
            Ok(sep) => println!("s={s:.2e} t={t}: separatrix u0 = {:.8}, width {:.2e}, pts {}", sep.u0, sep.bisection_width, sep.rs.len()),
            Err(e) => println!("s={s:.2e} t={t}: ERR {e}"),
        }
    }
}
