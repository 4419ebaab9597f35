//! Radial discretisation: graded grids with Simpson quadrature for
//! d-dimensional radial integrals, sampled profiles with power-law tail
//! metadata, L^q norms, inner products, discrete gradient energy, and the
//! H¹-scaling operator.

use std::sync::Arc;

use crate::closed_forms::unit_sphere_area;
use crate::error::{Error, Result};

/// Mesh parameters. The mesh is uniform on [0, 1] with `n_inner` cells and
/// geometrically widening on [1, r_max] with `n_outer` cells whose first
/// width continues the uniform spacing, so the spacing has no kink at r = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_inner: usize,
    pub n_outer: usize,
    pub r_max: f64,
}

impl GridSpec {
    pub fn new(n_inner: usize, n_outer: usize, r_max: f64) -> Self {
        Self {
            n_inner,
            n_outer,
            r_max,
        }
    }

    /// Default resolution with the far-field radius sized to the smallest
    /// resolvent shift the run will use: the Yukawa kernel's range is
    /// s^{-1/2} and the Robin closure absorbs the remainder.
    pub fn for_smallest_shift(s_min: f64) -> Self {
        Self {
            n_inner: 512,
            n_outer: 2048,
            r_max: r_max_policy(s_min),
        }
    }
}

/// r_max = max(100, 8/sqrt(s_min)).
pub fn r_max_policy(s_min: f64) -> f64 {
    (8.0 / s_min.sqrt()).max(100.0)
}

/// Graded radial mesh. Nodes include each cell's endpoints and midpoint,
/// so every Simpson pair is internally uniform. `weights` realises
/// ∫_{R^d} f dx ≈ Σ w_i f(r_i) over the ball of radius r_max (weights carry
/// the surface measure; the origin weight vanishes with it). `dual_mass`
/// and `face_area` support the conservative finite-difference operator.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub d: u32,
    sigma: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    dual_mass: Vec<f64>,
    face_area: Vec<f64>,
    r_max: f64,
}

impl RadialGrid {
    /// Builds the composite mesh. Requires r_max > 1 and both cell counts
    /// at least 16.
    pub fn build(d: u32, spec: GridSpec) -> Result<Arc<Self>> {
        if d != 3 && d != 4 {
            return Err(Error::Config(format!("grid dimension must be 3 or 4, got {d}")));
        }
        if !(spec.r_max > 1.0) {
            return Err(Error::Config(format!("r_max must exceed 1, got {}", spec.r_max)));
        }
        if spec.n_inner < 16 || spec.n_outer < 16 {
            return Err(Error::Config(format!(
                "cell counts must be at least 16, got ({}, {})",
                spec.n_inner, spec.n_outer
            )));
        }
        let h = 1.0 / spec.n_inner as f64;
        let ratio = solve_growth_ratio(h, spec.n_outer, spec.r_max - 1.0)?;

        let mut boundaries = Vec::with_capacity(spec.n_inner + spec.n_outer + 1);
        for k in 0..=spec.n_inner {
            boundaries.push(k as f64 * h);
        }
        let mut width = h;
        for _ in 0..spec.n_outer {
            width *= ratio;
            boundaries.push(boundaries.last().unwrap() + width);
        }
        *boundaries.last_mut().unwrap() = spec.r_max;

        Ok(Arc::new(Self::from_boundaries(d, &boundaries)))
    }

    /// Assembles nodes, Simpson weights and operator masses from cell
    /// boundaries.
    fn from_boundaries(d: u32, boundaries: &[f64]) -> Self {
        let sigma = unit_sphere_area(d);
        let df = d as f64;
        let n_cells = boundaries.len() - 1;
        let mut nodes = Vec::with_capacity(2 * n_cells + 1);
        for k in 0..n_cells {
            nodes.push(boundaries[k]);
            nodes.push(0.5 * (boundaries[k] + boundaries[k + 1]));
        }
        nodes.push(boundaries[n_cells]);

        let surf = |r: f64| sigma * r.powi(d as i32 - 1);
        let mut weights = vec![0.0; nodes.len()];
        for k in 0..n_cells {
            let (a, b) = (boundaries[k], boundaries[k + 1]);
            let m = 0.5 * (a + b);
            let c = (b - a) / 6.0;
            weights[2 * k] += c * surf(a);
            weights[2 * k + 1] += 4.0 * c * surf(m);
            weights[2 * k + 2] += c * surf(b);
        }

        // Dual cells: [0, m_{1/2}], [m_{i-1/2}, m_{i+1/2}], [m_{N-1/2}, r_max].
        let n = nodes.len();
        let mut face_r = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            face_r.push(0.5 * (nodes[i] + nodes[i + 1]));
        }
        let ball = |r: f64| sigma / df * r.powi(d as i32);
        let mut dual_mass = Vec::with_capacity(n);
        dual_mass.push(ball(face_r[0]));
        for i in 1..n - 1 {
            dual_mass.push(ball(face_r[i]) - ball(face_r[i - 1]));
        }
        dual_mass.push(ball(boundaries[n_cells]) - ball(face_r[n - 2]));
        let face_area = face_r.iter().map(|&r| surf(r)).collect();

        Self {
            d,
            sigma,
            nodes,
            weights,
            dual_mass,
            face_area,
            r_max: boundaries[n_cells],
        }
    }

    /// Exact geometric rescaling of the mesh by `factor` > 0: nodes scale
    /// linearly, volumes by factor^d. Used to re-grid H¹-scaled profiles
    /// without interpolation.
    pub fn scaled(&self, factor: f64) -> Arc<Self> {
        let fd = factor.powi(self.d as i32);
        Arc::new(Self {
            d: self.d,
            sigma: self.sigma,
            nodes: self.nodes.iter().map(|r| r * factor).collect(),
            weights: self.weights.iter().map(|w| w * fd).collect(),
            dual_mass: self.dual_mass.iter().map(|m| m * fd).collect(),
            face_area: self
                .face_area
                .iter()
                .map(|a| a * factor.powi(self.d as i32 - 1))
                .collect(),
            r_max: self.r_max * factor,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    #[inline]
    pub fn dual_mass(&self) -> &[f64] {
        &self.dual_mass
    }
    #[inline]
    pub fn face_area(&self) -> &[f64] {
        &self.face_area
    }
    #[inline]
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    #[inline]
    pub fn spacing(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// Quadrature-weighted inner product of raw value slices.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f)
            .zip(g)
            .map(|((w, a), b)| w * a * b)
            .sum()
    }
}

/// Solves h·Σ_{j=1..n} ρ^j = span for the growth ratio ρ.
fn solve_growth_ratio(h: f64, n: usize, span: f64) -> Result<f64> {
    if !(span > 0.0) {
        return Err(Error::Config("outer span must be positive".into()));
    }
    let total = |rho: f64| -> f64 {
        if (rho - 1.0).abs() < 1e-14 {
            return h * n as f64;
        }
        h * rho * (rho.powi(n as i32) - 1.0) / (rho - 1.0)
    };
    let mut lo = 1e-3;
    let mut hi = 1.5;
    while total(hi) < span {
        hi *= 1.5;
        if hi > 1e3 {
            return Err(Error::Config("outer mesh growth ratio out of range".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < span {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Power-law far-field model f(r) ≈ amplitude·r^{-exponent} for r ≥ r_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail {
    pub exponent: f64,
    pub amplitude: f64,
}

/// |c|^pow · r^net in log space: steep fitted tails (Yukawa-range
/// profiles) would overflow the naive powf product.
#[inline]
fn pow_product(c_abs: f64, pow: f64, r: f64, net: f64) -> f64 {
    if c_abs == 0.0 {
        return 0.0;
    }
    let ln_mag = pow * c_abs.ln() + net * r.ln();
    if ln_mag < -700.0 {
        0.0
    } else {
        ln_mag.exp()
    }
}

/// A sampled radial profile tied to a grid, with optional tail metadata.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
    pub tail: Option<Tail>,
}

impl RadialFunction {
    pub fn from_values(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            tail: None,
        }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self {
            grid,
            values,
            tail: None,
        }
    }

    pub fn zero(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
            tail: None,
        }
    }

    /// Attaches a tail with the given exponent, fitting the amplitude from
    /// the last node and requiring the model to match the last five node
    /// values within 5% relative.
    pub fn with_tail_exponent(mut self, gamma: f64) -> Result<Self> {
        let n = self.values.len();
        let r_last = self.grid.nodes()[n - 1];
        let amp = self.values[n - 1] * r_last.powf(gamma);
        for i in (n - 5)..n {
            let r = self.grid.nodes()[i];
            let model = amp * r.powf(-gamma);
            let v = self.values[i];
            if v.abs() > 1e-300 && ((model - v) / v).abs() > 0.05 {
                return Err(Error::Domain(format!(
                    "tail exponent {gamma} inconsistent with sampled values near r_max"
                )));
            }
        }
        self.tail = Some(Tail {
            exponent: gamma,
            amplitude: amp,
        });
        Ok(self)
    }

    /// Estimates a power-law tail by log-log regression over the last eight
    /// nodes. Returns the fitted tail (also stored) when the samples are
    /// one-signed and the fit reproduces the last five values within 5%.
    pub fn fit_tail(&mut self) -> Option<Tail> {
        let n = self.values.len();
        if n < 10 {
            return None;
        }
        let k = 8;
        let seg = &self.values[n - k..];
        let sign = seg[0].signum();
        if sign == 0.0 || seg.iter().any(|v| v.signum() != sign || v.abs() < 1e-300) {
            self.tail = None;
            return None;
        }
        let xs: Vec<f64> = self.grid.nodes()[n - k..].iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = seg.iter().map(|v| v.abs().ln()).collect();
        let xm = xs.iter().sum::<f64>() / k as f64;
        let ym = ys.iter().sum::<f64>() / k as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..k {
            num += (xs[i] - xm) * (ys[i] - ym);
            den += (xs[i] - xm) * (xs[i] - xm);
        }
        let gamma = -num / den;
        let r_last = self.grid.nodes()[n - 1];
        let amp = self.values[n - 1] * r_last.powf(gamma);
        for i in (n - 5)..n {
            let r = self.grid.nodes()[i];
            let model = amp * r.powf(-gamma);
            if ((model - self.values[i]) / self.values[i]).abs() > 0.05 {
                self.tail = None;
                return None;
            }
        }
        let tail = Tail {
            exponent: gamma,
            amplitude: amp,
        };
        self.tail = Some(tail);
        Some(tail)
    }

    /// ∫_{R^d} f dx: weighted node sum plus the analytic tail integral
    /// ∫_{r_max}^∞ c r^{-γ} σ r^{d-1} dr when a convergent tail is present.
    pub fn integrate(&self) -> Result<f64> {
        let core: f64 = self
            .grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v)
            .sum();
        match self.tail {
            None => Ok(core),
            Some(t) => {
                let d = self.grid.d as f64;
                if t.exponent > d {
                    let r = self.grid.r_max();
                    let mag = pow_product(t.amplitude.abs(), 1.0, r, d - t.exponent);
                    Ok(core + t.amplitude.signum() * self.grid.sigma() * mag / (t.exponent - d))
                } else if t.amplitude == 0.0 {
                    Ok(core)
                } else {
                    Err(Error::DivergentTail(format!(
                        "tail exponent {} <= d = {d} with nonzero amplitude",
                        t.exponent
                    )))
                }
            }
        }
    }

    /// (∫ |f|^q dx)^{1/q} with tail handling as in `integrate`.
    pub fn lq_norm(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("lq_norm requires q >= 1, got {q}")));
        }
        let core: f64 = self
            .grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.abs().powf(q))
            .sum();
        let total = match self.tail {
            None => core,
            Some(t) => {
                let d = self.grid.d as f64;
                let gq = t.exponent * q;
                if gq > d {
                    let r = self.grid.r_max();
                    core + self.grid.sigma() * pow_product(t.amplitude.abs(), q, r, d - gq)
                        / (gq - d)
                } else if t.amplitude == 0.0 {
                    core
                } else {
                    return Err(Error::DivergentTail(format!(
                        "L^{q} norm divergent: tail exponent {} gives q·γ = {gq} <= d = {d}",
                        t.exponent
                    )));
                }
            }
        };
        Ok(total.powf(1.0 / q))
    }

    /// Real inner product ⟨f, g⟩ = ∫ f g dx on a shared grid.
    pub fn inner(&self, other: &RadialFunction) -> Result<f64> {
        assert_eq!(self.values.len(), other.values.len(), "grid mismatch");
        let core = self.grid.dot(&self.values, &other.values);
        match (self.tail, other.tail) {
            (Some(a), Some(b)) => {
                let d = self.grid.d as f64;
                let gamma = a.exponent + b.exponent;
                let amp = a.amplitude * b.amplitude;
                if gamma > d {
                    let r = self.grid.r_max();
                    let mag = pow_product(amp.abs(), 1.0, r, d - gamma);
                    Ok(core + amp.signum() * self.grid.sigma() * mag / (gamma - d))
                } else if amp == 0.0 {
                    Ok(core)
                } else {
                    Err(Error::DivergentTail(format!(
                        "inner product divergent: combined tail exponent {gamma} <= d = {d}"
                    )))
                }
            }
            _ => Ok(core),
        }
    }

    /// ‖∇f‖²_{L²} from face-centred differences (the discrete Dirichlet
    /// energy matched to the conservative operator) plus the analytic tail.
    pub fn grad_norm_sq(&self) -> Result<f64> {
        let grid = &self.grid;
        let mut acc = 0.0;
        for i in 0..grid.len() - 1 {
            let h = grid.spacing(i);
            let df = (self.values[i + 1] - self.values[i]) / h;
            acc += grid.face_area()[i] * h * df * df;
        }
        if let Some(t) = self.tail {
            let d = grid.d as f64;
            let expo = 2.0 * (t.exponent + 1.0);
            if expo > d {
                let c = (t.exponent * t.amplitude).abs();
                acc += grid.sigma() * pow_product(c, 2.0, grid.r_max(), d - expo) / (expo - d);
            } else if t.amplitude != 0.0 {
                return Err(Error::DivergentTail(
                    "gradient energy divergent under fitted tail".into(),
                ));
            }
        }
        Ok(acc)
    }

    /// H¹-scaling T_λ[f](r) = λ^{-1} f(λ^{-2/(d-2)} r), resampled onto the
    /// same grid by monotone cubic interpolation; the tail exponent is
    /// preserved and its amplitude transformed exactly.
    pub fn scale(&self, lambda: f64) -> RadialFunction {
        assert!(lambda > 0.0);
        if lambda == 1.0 {
            return self.clone();
        }
        let d = self.grid.d as f64;
        let shift = lambda.powf(-2.0 / (d - 2.0));
        let interp = Pchip::new(self.grid.nodes(), &self.values);
        let r_max = self.grid.r_max();
        let tail = self.tail;
        let values = self
            .grid
            .nodes()
            .iter()
            .map(|&r| {
                let x = shift * r;
                if x <= r_max {
                    interp.eval(x) / lambda
                } else {
                    match tail {
                        Some(t) => t.amplitude * x.powf(-t.exponent) / lambda,
                        None => 0.0,
                    }
                }
            })
            .collect();
        let new_tail = tail.map(|t| Tail {
            exponent: t.exponent,
            amplitude: t.amplitude * shift.powf(-t.exponent) / lambda,
        });
        RadialFunction {
            grid: Arc::clone(&self.grid),
            values,
            tail: new_tail,
        }
    }

    /// T_λ[f] represented exactly on the rescaled mesh (no interpolation):
    /// T_λ[f](λ^{2/(d-2)} r_i) = λ^{-1} f(r_i), so the dilated samples live
    /// on `grid.scaled(λ^{2/(d-2)})` verbatim.
    pub fn scale_regrid(&self, lambda: f64) -> RadialFunction {
        let d = self.grid.d as f64;
        let factor = lambda.powf(2.0 / (d - 2.0));
        let grid = self.grid.scaled(factor);
        let values = self.values.iter().map(|v| v / lambda).collect();
        let tail = self.tail.map(|t| Tail {
            exponent: t.exponent,
            amplitude: t.amplitude * factor.powf(t.exponent) / lambda,
        });
        RadialFunction { grid, values, tail }
    }

    /// Pointwise binary combination on a shared grid. The tail is dropped
    /// (callers re-fit when the result has a clean power law).
    pub fn zip_with(&self, other: &RadialFunction, f: impl Fn(f64, f64) -> f64) -> RadialFunction {
        assert_eq!(self.values.len(), other.values.len());
        RadialFunction {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            tail: None,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialFunction {
        RadialFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| f(*v)).collect(),
            tail: None,
        }
    }

    /// self + c · other, preserving self's tail when other's matches or is absent.
    pub fn axpy(&self, c: f64, other: &RadialFunction) -> RadialFunction {
        let mut out = self.zip_with(other, |a, b| a + c * b);
        out.tail = match (self.tail, other.tail) {
            (Some(a), Some(b)) if (a.exponent - b.exponent).abs() < 1e-12 => Some(Tail {
                exponent: a.exponent,
                amplitude: a.amplitude + c * b.amplitude,
            }),
            (Some(a), None) => Some(a),
            _ => None,
        };
        out
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Monotone cubic (Fritsch-Carlson) interpolant.
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        assert!(xs.len() == ys.len() && xs.len() >= 3);
        let n = xs.len();
        let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
        let sec: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut m = vec![0.0; n];
        for i in 1..n - 1 {
            if sec[i - 1] * sec[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                m[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
            }
        }
        m[0] = endpoint_slope(h[0], h[1], sec[0], sec[1]);
        m[n - 1] = endpoint_slope(h[n - 2], h[n - 3], sec[n - 2], sec[n - 3]);
        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slopes: m,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - self.xs[n - 1]);
        }
        let i = match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(k) => return self.ys[k],
            Err(k) => k - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }
}

/// Shape-preserving one-sided endpoint slope.
fn endpoint_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if m.signum() != s0.signum() {
        0.0
    } else if s0.signum() != s1.signum() && m.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{aubin_talenti, scaling_generator};
    use crate::params::ModelParams;
    use std::f64::consts::PI;

    fn grid3() -> Arc<RadialGrid> {
        RadialGrid::build(3, GridSpec::new(128, 512, 100.0)).unwrap()
    }

    #[test]
    fn ball_volume_d3() {
        let grid = RadialGrid::build(3, GridSpec::new(64, 256, 100.0)).unwrap();
        let one = RadialFunction::from_fn(Arc::clone(&grid), |_| 1.0);
        let vol = one.integrate().unwrap();
        let exact = 4.0 * PI / 3.0 * 1e6;
        assert!(((vol - exact) / exact).abs() < 1e-10, "vol = {vol}");
    }

    #[test]
    fn ball_volume_d4() {
        let grid = RadialGrid::build(4, GridSpec::new(64, 256, 10.0)).unwrap();
        let one = RadialFunction::from_fn(Arc::clone(&grid), |_| 1.0);
        let vol = one.integrate().unwrap();
        let exact = PI * PI / 2.0 * 1e4;
        assert!(((vol - exact) / exact).abs() < 1e-10, "vol = {vol}");
    }

    #[test]
    fn gaussian_integral() {
        let grid = RadialGrid::build(3, GridSpec::new(512, 2048, 10.0)).unwrap();
        let f = RadialFunction::from_fn(grid, |r| (-r * r).exp());
        let got = f.integrate().unwrap();
        let exact = PI.powf(1.5);
        assert!(((got - exact) / exact).abs() < 1e-10, "got {got}");
    }

    #[test]
    fn quadrature_order_under_halving() {
        // Fourth-order rule: halving the spacing shrinks the Gaussian-moment
        // error far more than the 4x a second-order rule would give.
        let exact = PI.powf(1.5);
        let err = |ni: usize, no: usize| -> f64 {
            let grid = RadialGrid::build(3, GridSpec::new(ni, no, 12.0)).unwrap();
            let f = RadialFunction::from_fn(grid, |r| (-r * r).exp());
            (f.integrate().unwrap() - exact).abs()
        };
        let coarse = err(32, 64);
        let fine = err(64, 128);
        assert!(
            coarse > 4.0 * fine,
            "expected >= 4x reduction, got {coarse} -> {fine}"
        );
    }

    #[test]
    fn w_norms_and_divergences() {
        let params = ModelParams::new(3, 4.0).unwrap();
        let grid = grid3();
        let mut w = RadialFunction::from_fn(Arc::clone(&grid), |r| aubin_talenti(&params, r));
        w.fit_tail().expect("W has a clean power tail");
        let t = w.tail.unwrap();
        assert!(
            (t.exponent - 1.0).abs() < 0.05,
            "fitted tail exponent {} for W in d=3",
            t.exponent
        );
        // W not in L² for d = 3, but in L^q for q > d/(d-2) = 3.
        assert!(w.lq_norm(2.0).is_err());
        assert!(w.lq_norm(4.0).is_ok());
        // ΛW not in L² either.
        let mut lw = RadialFunction::from_fn(Arc::clone(&grid), |r| scaling_generator(&params, r));
        lw.fit_tail().expect("ΛW has a power tail");
        assert!(lw.lq_norm(2.0).is_err());
        // Homogeneity of the norm.
        let scaled = w.map(|v| -2.0 * v);
        let mut scaled = scaled;
        scaled.tail = w.tail.map(|t| Tail {
            exponent: t.exponent,
            amplitude: -2.0 * t.amplitude,
        });
        let a = scaled.lq_norm(4.0).unwrap();
        let b = w.lq_norm(4.0).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-12 * b);
    }

    #[test]
    fn norm_of_w_analytic_d3() {
        // ‖W‖_{L^6}^6 = 3^{3/2} π² / 4 in d = 3 (u-substitution to the Euler
        // integral), an independent closed form pinning the quadrature+tail.
        let params = ModelParams::new(3, 4.0).unwrap();
        let grid = grid3();
        let mut w6 =
            RadialFunction::from_fn(Arc::clone(&grid), |r| aubin_talenti(&params, r).powi(6));
        w6.fit_tail().unwrap();
        let got = w6.integrate().unwrap();
        let exact = 3f64.powf(1.5) * PI * PI / 4.0;
        assert!(((got - exact) / exact).abs() < 1e-7, "got {got}, exact {exact}");
    }

    #[test]
    fn zero_integrates_to_zero() {
        let grid = grid3();
        let z = RadialFunction::zero(grid);
        assert_eq!(z.integrate().unwrap(), 0.0);
    }

    #[test]
    fn inner_product_positivity() {
        let grid = grid3();
        let f = RadialFunction::from_fn(Arc::clone(&grid), |r| (-r).exp() * (1.0 + r));
        let ip = f.inner(&f).unwrap();
        assert!(ip > 0.0);
        let z = RadialFunction::zero(grid);
        assert_eq!(z.inner(&z).unwrap(), 0.0);
    }

    #[test]
    fn scaling_identity_and_h1_invariance() {
        // The dilation by λ^{2/(d-2)} = 4 pushes the pre-asymptotic region
        // out fourfold, so the power-law tail model needs r_max/4 to sit in
        // the asymptotic regime.
        let params = ModelParams::new(3, 4.0).unwrap();
        let grid = RadialGrid::build(3, GridSpec::new(512, 2048, 1000.0)).unwrap();
        let mut w = RadialFunction::from_fn(Arc::clone(&grid), |r| aubin_talenti(&params, r));
        w.fit_tail().unwrap();
        // T_1 is the identity.
        let same = w.scale(1.0);
        for (a, b) in same.values.iter().zip(&w.values) {
            assert_eq!(a, b);
        }
        // ‖∇T_λ[W]‖ = ‖∇W‖ for λ = 2 within 1e-6 relative.
        let g0 = w.grad_norm_sq().unwrap().sqrt();
        let g2 = w.scale(2.0).grad_norm_sq().unwrap().sqrt();
        assert!(
            ((g2 - g0) / g0).abs() < 1e-6,
            "gradient norms {g0} vs {g2}"
        );
    }

    #[test]
    fn scaling_derivative_is_generator() {
        // (d/dλ) T_λ[W] |_{λ=1} = -(2/(d-2)) ΛW by centred difference.
        let params = ModelParams::new(3, 4.0).unwrap();
        let grid = RadialGrid::build(3, GridSpec::new(512, 2048, 100.0)).unwrap();
        let mut w = RadialFunction::from_fn(Arc::clone(&grid), |r| aubin_talenti(&params, r));
        w.fit_tail().unwrap();
        let eps = 1e-4;
        let up = w.scale(1.0 + eps);
        let dn = w.scale(1.0 - eps);
        let d = params.dim_f();
        let mut max_err: f64 = 0.0;
        for i in 0..grid.len() {
            let dquot = (up.values[i] - dn.values[i]) / (2.0 * eps);
            let expect = -2.0 / (d - 2.0) * scaling_generator(&params, grid.nodes()[i]);
            max_err = max_err.max((dquot - expect).abs());
        }
        assert!(max_err < 1e-6, "max node error {max_err}");
    }

    #[test]
    fn tail_fit_rejects_sign_changes() {
        let grid = grid3();
        let mut f = RadialFunction::from_fn(grid, |r| r.cos() / (1.0 + r * r));
        assert!(f.fit_tail().is_none());
    }

    #[test]
    fn pchip_monotone_no_overshoot() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 / (1.0 + x * x)).collect();
        let p = Pchip::new(&xs, &ys);
        let mut prev = p.eval(0.0);
        for k in 1..400 {
            let x = 0.025 * k as f64 - 0.0125;
            let v = p.eval(x);
            assert!(v <= prev + 1e-12, "overshoot at x = {x}");
            assert!(v >= 0.0);
            prev = v;
        }
    }
}
