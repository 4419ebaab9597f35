//! Closed-form evaluation of the model's explicit functions and scalars:
//! the Sobolev extremal profile W, its scaling generator ΛW, the
//! linearisation potential V, the frequency reparametrisation triple
//! (δ, β, α), and the τ-interval of the contraction box.

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Aubin-Talenti function W(r) = (1 + r²/(d(d-2)))^{-(d-2)/2}, normalised
/// so W(0) = 1. Solves ΔW + W^{(d+2)/(d-2)} = 0.
pub fn aubin_talenti(params: &ModelParams, r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    let d = params.dim_f();
    let base = 1.0 + r * r / (d * (d - 2.0));
    base.powf(-(d - 2.0) / 2.0)
}

/// Radial derivative W'(r) = -(r/d)(1 + r²/(d(d-2)))^{-d/2}.
pub fn aubin_talenti_deriv(params: &ModelParams, r: f64) -> f64 {
    let d = params.dim_f();
    let base = 1.0 + r * r / (d * (d - 2.0));
    -(r / d) * base.powf(-d / 2.0)
}

/// Scaling generator ΛW = (d-2)/2·W + r·W'
///                      = ((d-2)/2 - r²/(2d))(1 + r²/(d(d-2)))^{-d/2}.
/// Spans the radial kernel of -Δ + V.
pub fn scaling_generator(params: &ModelParams, r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    let d = params.dim_f();
    let base = 1.0 + r * r / (d * (d - 2.0));
    ((d - 2.0) / 2.0 - r * r / (2.0 * d)) * base.powf(-d / 2.0)
}

/// Linearisation potential V = -((d+2)/(d-2))·W^{4/(d-2)} < 0.
pub fn potential(params: &ModelParams, r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    let d = params.dim_f();
    let w = aubin_talenti(params, r);
    -(d + 2.0) / (d - 2.0) * w.powf(4.0 / (d - 2.0))
}

/// δ(s): s^{1/2} in dimension 3, 1/log(1 + s^{-1}) in dimension 4.
pub fn delta(params: &ModelParams, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("delta requires s > 0, got {s}")));
    }
    Ok(match params.d {
        3 => s.sqrt(),
        _ => 1.0 / (1.0 / s).ln_1p(),
    })
}

/// β(s) = s/δ(s). Strictly increasing; for d = 4 its range is (0, 1).
pub fn beta(params: &ModelParams, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("beta requires s > 0, got {s}")));
    }
    Ok(match params.d {
        3 => s.sqrt(),
        _ => s * (1.0 / s).ln_1p(),
    })
}

/// d/ds of β for d = 4: log(1 + 1/s) - 1/(1 + s).
fn beta_deriv_d4(s: f64) -> f64 {
    (1.0 / s).ln_1p() - 1.0 / (1.0 + s)
}

/// α(t) = β^{-1}(t); the mass shift producing rescaled coupling t.
/// Exactly t² in dimension 3. In dimension 4 the domain is (0, 1) and the
/// root is bracketed by bisection, then polished by Newton to 1e-14 relative.
pub fn alpha(params: &ModelParams, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("alpha requires t > 0, got {t}")));
    }
    if params.d == 3 {
        return Ok(t * t);
    }
    if t >= 1.0 {
        return Err(Error::Domain(format!(
            "alpha in dimension 4 is defined on (0, 1); got t = {t}"
        )));
    }
    // Asymptotic seed α(t) ~ t/log(1 + 1/t), then expand to a bracket.
    let seed = (t / (1.0 / t).ln_1p()).max(f64::MIN_POSITIVE);
    let mut lo = seed;
    while beta(params, lo)? >= t {
        lo *= 0.25;
        if lo < 1e-300 {
            return Err(Error::Domain(format!("alpha bracket underflow at t = {t}")));
        }
    }
    let mut hi = seed.max(1e-12);
    while beta(params, hi)? <= t {
        hi *= 4.0;
        if hi > 1e300 {
            return Err(Error::Domain(format!("alpha bracket overflow at t = {t}")));
        }
    }
    // Bisect until Newton is safe, then polish.
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if beta(params, mid)? < t {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-3 * lo {
            break;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..60 {
        let f = beta(params, s)? - t;
        let step = f / beta_deriv_d4(s);
        let next = (s - step).clamp(0.5 * lo, 2.0 * hi);
        let done = (next - s).abs() <= 1e-15 * s;
        s = next;
        if done {
            break;
        }
    }
    Ok(s)
}

/// The τ-interval I(t) = [K_p t/(2A₁), 3K_p t/(2A₁)] boxing the fixed point.
pub fn tau_interval(t: f64, kp: f64, a1: f64) -> (f64, f64) {
    debug_assert!(t > 0.0 && kp > 0.0 && a1 > 0.0);
    let mid = kp * t / a1;
    (0.5 * mid, 1.5 * mid)
}

/// Γ at half-integer and integer arguments, by recurrence from
/// Γ(1/2) = √π and Γ(1) = 1. Covers every Gamma value the solver needs.
pub fn gamma_half_integer(x: f64) -> f64 {
    let two_x = 2.0 * x;
    assert!(
        two_x > 0.0 && (two_x - two_x.round()).abs() < 1e-12,
        "gamma_half_integer expects positive half-integer argument, got {x}"
    );
    let mut n = two_x.round() as u64; // argument in half-units
    let mut acc = 1.0;
    while n > 2 {
        // Γ(k/2) = (k/2 - 1) Γ(k/2 - 1)
        acc *= n as f64 / 2.0 - 1.0;
        n -= 2;
    }
    if n == 1 {
        acc * std::f64::consts::PI.sqrt()
    } else {
        acc
    }
}

/// Surface area of the unit sphere in R^d: d·π^{d/2}/Γ(d/2 + 1).
pub fn unit_sphere_area(d: u32) -> f64 {
    let df = d as f64;
    df * std::f64::consts::PI.powf(df / 2.0) / gamma_half_integer(df / 2.0 + 1.0)
}
