//! Independent shooting solver for the rescaled radial equation
//!   u'' + ((d-1)/r) u' = s u - t|u|^{p-1}u - |u|^{2*-2}u,
//! used as a construction-route-independent ground truth. Integrates
//! outward from a regular series start with an adaptive embedded
//! Dormand-Prince 5(4) pair and bisects the initial height to the decaying
//! separatrix between the positive-escape and sign-crossing branches.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::nonlinear::odd_pow;
use crate::params::ModelParams;
use crate::radial::{Pchip, RadialFunction, RadialGrid};

/// Outcome of a single outward shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Reached the classification radius without triggering either branch.
    Decayed,
    /// Dropped through zero (overshoot: u0 too large).
    CrossedZero,
    /// Turned back upward while positive, or grew past the escape factor
    /// (undershoot: the mass term feeds the growing mode, possibly after
    /// capture by the small positive equilibrium). Once the profile has a
    /// positive minimum its energy sits below the barrier at zero, so it
    /// can never decay; flagging the turning point keeps the window short.
    BlewUp,
}

/// A shot's record: sampled profile and how it terminated.
#[derive(Debug, Clone)]
pub struct ShootingResult {
    pub u0: f64,
    pub rs: Vec<f64>,
    pub us: Vec<f64>,
    pub classified: Classification,
    /// Final bisection bracket width relative to u0 (zero for single shots).
    pub bisection_width: f64,
}

impl ShootingResult {
    /// Resamples the shot onto a grid by monotone cubic interpolation.
    pub fn on_grid(&self, grid: Arc<RadialGrid>) -> RadialFunction {
        let interp = Pchip::new(&self.rs, &self.us);
        let r_end = *self.rs.last().unwrap();
        let values = grid
            .nodes()
            .iter()
            .map(|&r| if r <= r_end { interp.eval(r) } else { 0.0 })
            .collect();
        let mut f = RadialFunction::from_values(grid, values);
        f.fit_tail();
        f
    }
}

/// Integration controls for the shooting solver.
#[derive(Debug, Clone, Copy)]
pub struct ShootConfig {
    /// Relative local tolerance of the embedded pair.
    pub rtol: f64,
    /// Classification radius; defaults to 8/sqrt(s) when None.
    pub r_end: Option<f64>,
    /// Escape factor: exceeding this multiple of u0 classifies as blow-up.
    pub escape_factor: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            r_end: None,
            escape_factor: 10.0,
        }
    }
}

/// Right-hand side in first-order form (u, v) with v = u'.
#[inline]
fn rhs(params: &ModelParams, s: f64, t: f64, r: f64, u: f64, v: f64) -> (f64, f64) {
    let d = params.dim_f();
    let crit = params.two_star - 1.0;
    let nonlin = s * u - t * odd_pow(u, params.p) - odd_pow(u, crit);
    (v, -((d - 1.0) / r) * v + nonlin)
}

/// Single outward integration from the regular origin start
/// u(r) ≈ u0 + u''(0) r²/2 with u''(0) = (s·u0 - t·u0^p - u0^{2*-1})/d.
pub fn shoot(
    params: &ModelParams,
    s: f64,
    t: f64,
    u0: f64,
    cfg: ShootConfig,
) -> Result<ShootingResult> {
    if !(s > 0.0 && t >= 0.0 && u0 > 0.0) && !(s == 0.0 && cfg.r_end.is_some()) {
        return Err(Error::Domain(
            "shoot requires positive s (or an explicit r_end), t >= 0, u0 > 0".into(),
        ));
    }
    let r_end = cfg.r_end.unwrap_or(8.0 / s.sqrt());
    let udd0 = (s * u0 - t * odd_pow(u0, params.p) - odd_pow(u0, params.two_star - 1.0))
        / params.dim_f();
    let r0 = 1e-6_f64.min(r_end * 1e-6);
    let mut r = r0;
    let mut u = u0 + 0.5 * udd0 * r0 * r0;
    let mut v = udd0 * r0;
    let mut h = r0;
    let mut rs = vec![0.0, r];
    let mut us = vec![u0, u];
    let escape = cfg.escape_factor * u0;

    // Dormand-Prince 5(4) coefficients.
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const E: [f64; 7] = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];

    let mut classified = Classification::Decayed;
    let mut steps = 0usize;
    'outer: while r < r_end {
        h = h.min(r_end - r).max(f64::MIN_POSITIVE);
        let mut k = [(0.0, 0.0); 7];
        k[0] = rhs(params, s, t, r, u, v);
        for stage in 0..6 {
            let mut du = 0.0;
            let mut dv = 0.0;
            for j in 0..=stage {
                du += A[stage][j] * k[j].0;
                dv += A[stage][j] * k[j].1;
            }
            k[stage + 1] = rhs(params, s, t, r + C[stage] * h, u + h * du, v + h * dv);
        }
        // 5th-order solution (FSAL layout: row 6 of A holds the weights).
        let mut du5 = 0.0;
        let mut dv5 = 0.0;
        for j in 0..6 {
            du5 += A[5][j] * k[j].0;
            dv5 += A[5][j] * k[j].1;
        }
        let u_new = u + h * du5;
        let v_new = v + h * dv5;
        // embedded error estimate
        let mut eu = 0.0;
        let mut ev = 0.0;
        for j in 0..7 {
            eu += E[j] * k[j].0;
            ev += E[j] * k[j].1;
        }
        let scale_u = cfg.rtol * (u.abs().max(u_new.abs()) + u0 * 1e-3);
        let scale_v = cfg.rtol * (v.abs().max(v_new.abs()) + u0 * 1e-3);
        let err = ((h * eu / scale_u).powi(2) + (h * ev / scale_v).powi(2)).sqrt();
        if err <= 1.0 {
            r += h;
            u = u_new;
            v = v_new;
            rs.push(r);
            us.push(u);
            if u <= 0.0 {
                classified = Classification::CrossedZero;
                break 'outer;
            }
            if u >= escape || (v >= 0.0 && rs.len() > 2) {
                classified = Classification::BlewUp;
                break 'outer;
            }
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < 1e-14 * r.max(1.0) {
            return Err(Error::StepUnderflow(format!(
                "step size underflow at r = {r} (u0 = {u0})"
            )));
        }
        steps += 1;
        if steps > 50_000_000 {
            return Err(Error::StepUnderflow("step budget exhausted".into()));
        }
    }
    Ok(ShootingResult {
        u0,
        rs,
        us,
        classified,
        bisection_width: 0.0,
    })
}

/// Bisects the initial height between the positive-escape and sign-crossing
/// branches to the decaying separatrix. `warm_start` centres the bracket
/// scan (the fixed-point route provides 1 + η(0) for free).
pub fn find_ground_state_shooting(
    params: &ModelParams,
    s: f64,
    t: f64,
    warm_start: Option<f64>,
    cfg: ShootConfig,
) -> Result<ShootingResult> {
    // With a warm start the scan covers [0.5, 2]·center; blind scans cast a
    // wide net since the separatrix height grows away from the small-(s, t)
    // regime.
    let (center, lo_f, hi_f, n_scan) = match warm_start {
        Some(c) => (c, 0.5f64, 4.0f64, 17usize),
        None => (1.0, 0.25, 256.0, 41),
    };
    let mut heights = Vec::with_capacity(n_scan);
    let mut classes = Vec::with_capacity(n_scan);
    for i in 0..n_scan {
        let f = lo_f * hi_f.powf(i as f64 / (n_scan - 1) as f64);
        let u0 = center * f;
        let shot = shoot(params, s, t, u0, cfg)?;
        heights.push(u0);
        classes.push(shot.classified);
    }
    let mut bracket = None;
    let mut flips = 0;
    for i in 0..n_scan - 1 {
        let pair = (classes[i], classes[i + 1]);
        if pair == (Classification::BlewUp, Classification::CrossedZero) {
            flips += 1;
            if bracket.is_none() {
                bracket = Some((heights[i], heights[i + 1]));
            }
        }
        if pair == (Classification::CrossedZero, Classification::BlewUp) {
            flips += 1;
        }
    }
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::Bracket(format!(
            "no escape/crossing dichotomy in [{:.3}, {:.3}]: {classes:?}",
            heights[0],
            heights[n_scan - 1]
        ))
    })?;
    if flips > 1 {
        // Multiple sign changes would mean several separatrices in the scan
        // window; report rather than interpret.
        return Err(Error::Bracket(format!(
            "classification not monotone across the scan ({flips} flips)"
        )));
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        let shot = shoot(params, s, t, mid, cfg)?;
        match shot.classified {
            Classification::CrossedZero => hi = mid,
            _ => lo = mid,
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut best = shoot(params, s, t, mid, cfg)?;
    best.bisection_width = (hi - lo) / mid;
    best.u0 = mid;
    Ok(best)
}

/// Relative difference norms of two profiles on a common grid:
/// (max |u1-u2| / max |u1|, ‖u1-u2‖_q / ‖u1‖_q).
pub fn compare_profiles(u1: &RadialFunction, u2: &RadialFunction, q: f64) -> (f64, f64) {
    assert_eq!(u1.values.len(), u2.values.len());
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for i in 0..u1.values.len() {
        num = num.max((u1.values[i] - u2.values[i]).abs());
        den = den.max(u1.values[i].abs());
    }
    let linf_rel = num / den.max(1e-300);
    let w = u1.grid.weights();
    let mut nq = 0.0;
    let mut dq = 0.0;
    for i in 0..u1.values.len() {
        nq += w[i] * (u1.values[i] - u2.values[i]).abs().powf(q);
        dq += w[i] * u1.values[i].abs().powf(q);
    }
    (linf_rel, (nq / dq).powf(1.0 / q))
}
