//! Model parameters: dimension, subcritical exponent, and the Lebesgue
//! exponents controlling the contraction estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension and nonlinearity exponents of the scalar field equation
/// -Δu + ωu - |u|^{p-1}u - |u|^{4/(d-2)}u = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Spatial dimension, 3 or 4.
    pub d: u32,
    /// Subcritical power. Admissible range: 3 < p < 5 for d = 3,
    /// 1 < p < 3 for d = 4.
    pub p: f64,
    /// Sobolev critical exponent 2* = 2d/(d-2).
    pub two_star: f64,
}

impl ModelParams {
    pub fn new(d: u32, p: f64) -> Result<Self> {
        if d != 3 && d != 4 {
            return Err(Error::Config(format!("dimension must be 3 or 4, got {d}")));
        }
        let df = d as f64;
        let p_lo = 4.0 / (df - 2.0) - 1.0;
        let p_hi = (df + 2.0) / (df - 2.0);
        if !(p > p_lo && p < p_hi) {
            return Err(Error::Config(format!(
                "exponent p = {p} outside admissible range ({p_lo}, {p_hi}) for d = {d}"
            )));
        }
        Ok(Self {
            d,
            p,
            two_star: 2.0 * df / (df - 2.0),
        })
    }

    #[inline]
    pub fn dim_f(&self) -> f64 {
        self.d as f64
    }

    /// d/(d-2), the integrability threshold for W-type tails.
    #[inline]
    pub fn tail_threshold(&self) -> f64 {
        self.dim_f() / (self.dim_f() - 2.0)
    }

    /// Smallest Lebesgue index for which the contraction estimates close:
    /// q must exceed max{2*, 2*/(p-1)}.
    pub fn q_lower_bound(&self) -> f64 {
        self.two_star.max(self.two_star / (self.p - 1.0))
    }

    /// Default working index: 2 * max{2*, 2*/(p-1), 2*/(p+3-2*)}, rounded up.
    /// Satisfies every constraint of the contraction scheme with margin.
    pub fn default_q(&self) -> f64 {
        let cands = [
            self.two_star,
            self.two_star / (self.p - 1.0),
            self.two_star / (self.p + 3.0 - self.two_star),
        ];
        let m = cands.iter().cloned().fold(f64::MIN, f64::max);
        (2.0 * m).ceil()
    }
}

/// The exponent triple (Θ_q, ν_q, θ_q) attached to a Lebesgue index q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub q: f64,
    /// Θ_q = (d-2)/2 - d/(2q); the decay order of the correction in L^q.
    pub theta_big: f64,
    /// ν_q = d/(2q) when d/(d-2) <= p, else 1 - (d-2)(p-1)/4.
    pub nu: f64,
    /// θ_q = min{Θ_q - ν_q, Θ_q + (d-2)(p-1)/2 - 1} / 2; the contraction margin.
    pub theta_small: f64,
}

/// Computes the exponent triple for an admissible q.
pub fn compute_exponents(params: &ModelParams, q: f64) -> Result<Exponents> {
    if !(q > params.q_lower_bound()) {
        return Err(Error::Domain(format!(
            "q = {q} must exceed max(2*, 2*/(p-1)) = {}",
            params.q_lower_bound()
        )));
    }
    let d = params.dim_f();
    let p = params.p;
    let theta_big = (d - 2.0) / 2.0 - d / (2.0 * q);
    // The boundary case p = d/(d-2) deliberately takes the first branch.
    let nu = if d / (d - 2.0) <= p {
        d / (2.0 * q)
    } else {
        1.0 - (d - 2.0) * (p - 1.0) / 4.0
    };
    let a = theta_big - nu;
    let b = theta_big + (d - 2.0) * (p - 1.0) / 2.0 - 1.0;
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!(
            "exponent margins not positive at q = {q}: {a}, {b}"
        )));
    }
    Ok(Exponents {
        q,
        theta_big,
        nu,
        theta_small: 0.5 * a.min(b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_ranges() {
        assert!(ModelParams::new(3, 4.0).is_ok());
        assert!(ModelParams::new(4, 2.0).is_ok());
        assert!(ModelParams::new(3, 3.0).is_err());
        assert!(ModelParams::new(3, 5.0).is_err());
        assert!(ModelParams::new(4, 3.0).is_err());
        assert!(ModelParams::new(5, 2.0).is_err());
    }

    #[test]
    fn critical_exponent_values() {
        assert_eq!(ModelParams::new(3, 4.0).unwrap().two_star, 6.0);
        assert_eq!(ModelParams::new(4, 2.0).unwrap().two_star, 4.0);
    }

    #[test]
    fn exponents_d3_p4_q8() {
        let params = ModelParams::new(3, 4.0).unwrap();
        let e = compute_exponents(&params, 8.0).unwrap();
        // Θ_q = 1/2 - 3/16 = 5/16
        assert!((e.theta_big - 5.0 / 16.0).abs() < 1e-15);
        // p = 4 >= d/(d-2) = 3, so ν_q = d/(2q) = 3/16
        assert!((e.nu - 3.0 / 16.0).abs() < 1e-15);
        assert!(e.theta_small > 0.0);
    }

    #[test]
    fn exponents_boundary_branch_d4_p2() {
        // p = 2 equals d/(d-2) = 2 for d = 4: the first branch applies,
        // so ν_q = d/(2q) = 1/6 at q = 12.
        let params = ModelParams::new(4, 2.0).unwrap();
        let e = compute_exponents(&params, 12.0).unwrap();
        assert!((e.nu - 4.0 / 24.0).abs() < 1e-15);
        assert!(e.theta_big > 0.0 && e.theta_small > 0.0);
    }

    #[test]
    fn exponents_reject_small_q() {
        let params = ModelParams::new(3, 4.0).unwrap();
        assert!(compute_exponents(&params, 6.0).is_err());
        assert!(compute_exponents(&params, 2.0).is_err());
    }

    #[test]
    fn default_q_values() {
        // d=3, p=4: max{6, 3, 6} = 6 -> 12.
        assert_eq!(ModelParams::new(3, 4.0).unwrap().default_q(), 12.0);
        // d=4, p=2: max{4, 4, 4} = 4 -> 8.
        assert_eq!(ModelParams::new(4, 2.0).unwrap().default_q(), 8.0);
    }
}
