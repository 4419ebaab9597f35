use cgs_core::oracle::{find_ground_state_shooting, shoot, ShootConfig};
use cgs_core::params::ModelParams;

fn main() {
    let params = ModelParams::new(3, 4.0).unwrap();
    for (s, t) in [(0.09, 0.2), (0.04, 0.1), (0.01, 0.05)] {
        print!("s={s} t={t}: ");
        for i in 0..17 {
            let f: f64 = 0.5 * 4f64.powf(i as f64 / 16.0);
            let shot = shoot(&params, s, t, f, ShootConfig::default()).unwrap();
            print!("{:?} ", shot.classified);
        }
        println!();
        match find_ground_state_shooting(&params, s, t, None, ShootConfig::default()) {
            Ok(sep) => println!("  separatrix u0 = {:.8}, width {:.2e}", sep.u0, sep.bisection_width),
            Err(e) => println!("  ERR: {e}"),
        }
    }
}
