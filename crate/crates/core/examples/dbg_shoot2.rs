use cgs_core::oracle::{shoot, ShootConfig};
use cgs_core::params::ModelParams;

fn main() {
    let params = ModelParams::new(3, 4.0).unwrap();
    let shot = shoot(&params, 0.09, 0.2, 2.0, ShootConfig::default()).unwrap();
    println!("class {:?}, steps recorded {}", shot.classified, shot.rs.len());
    for k in (0..shot.rs.len()).step_by(shot.rs.len() / 20 + 1) {
        println!("r={:10.5} u={:+.6e}", shot.rs[k], shot.us[k]);
    }
    println!("last r={:.4} u={:+.4e}", shot.rs.last().unwrap(), shot.us.last().unwrap());
}
