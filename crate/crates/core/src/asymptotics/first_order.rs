//! First-order terms for one-dimensional problems with A(u) = −u.

use super::{FrontEvaluator, EXP_CLAMP};
use crate::error::{Error, Result};
use crate::problems::{Advection, ProblemSpec, Side};
use crate::quadrature::{gauss_legendre, QuadratureRule};

const PANEL: f64 = 0.25;
const TAIL_TOL: f64 = 1e-12;
const TAIL_LIMIT: f64 = 200.0;
/// Beyond this |ξ| the first-order inner function is taken as zero.
pub const Q1_RANGE: f64 = 40.0;

/// A scalar function of time with its derivative.
pub trait ScalarPath {
    fn value(&self, t: f64) -> f64;
    fn slope(&self, t: f64) -> f64;
}

/// Zero-order layer quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerData {
    pub h0: f64,
    pub dh0: f64,
    pub phi_m: f64,
    pub phi_p: f64,
    /// φ^∓′(h₀).
    pub dphi_m: f64,
    pub dphi_p: f64,
    /// ū₁^∓(h₀).
    pub ubar_m: f64,
    pub ubar_p: f64,
    /// P = ½(φ⁺ − φ⁻)(h₀) and dP/dt.
    pub p: f64,
    pub dp: f64,
}

impl LayerData {
    fn side_p(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Minus => (self.p, self.dp),
            Side::Plus => (-self.p, -self.dp),
        }
    }

    fn dphi(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.dphi_m,
            Side::Plus => self.dphi_p,
        }
    }

    fn ubar(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.ubar_m,
            Side::Plus => self.ubar_p,
        }
    }

    fn logistic(&self, side: Side, xi: f64) -> (f64, f64) {
        let (ps, _) = self.side_p(side);
        let e = (-xi * ps).clamp(-EXP_CLAMP, EXP_CLAMP).exp();
        (ps, e)
    }

    pub fn q0(&self, side: Side, xi: f64) -> f64 {
        let (ps, e) = self.logistic(side, xi);
        2.0 * ps / (e + 1.0)
    }

    /// Υ = ∂ξ ũ; the same function on both sides.
    pub fn upsilon(&self, xi: f64) -> f64 {
        let (ps, e) = self.logistic(Side::Minus, xi);
        if e.is_infinite() {
            return 0.0;
        }
        2.0 * ps * ps * e / ((1.0 + e) * (1.0 + e))
    }

    /// ∂ₜQ₀ at fixed ξ.
    pub fn q0_t(&self, side: Side, xi: f64) -> f64 {
        let (ps, dps) = self.side_p(side);
        let (_, e) = self.logistic(side, xi);
        let dq = 2.0 / (1.0 + e) + 2.0 * ps * xi * e / ((1.0 + e) * (1.0 + e));
        dq * dps
    }

    /// r₁ = −(ξ φ′ Υ + Q₀ φ′) + ∂ₜQ₀.
    pub fn r1(&self, side: Side, xi: f64) -> f64 {
        let d = self.dphi(side);
        -(xi * d * self.upsilon(xi) + self.q0(side, xi) * d) + self.q0_t(side, xi)
    }
}

/// First-order expansion terms for the 1D problem.
#[derive(Debug, Clone)]
pub struct FirstOrder {
    p: ProblemSpec,
    /// Constant multiplying Φ₁ and the ū₁ part of Φ₂.
    pub k: f64,
    rule32: QuadratureRule,
    rule16: QuadratureRule,
}

impl FirstOrder {
    /// `k` is the coefficient of the h₁ equation; matching requires ∂A/∂u.
    pub fn new(p: &ProblemSpec, k: f64) -> Result<Self> {
        if p.dim != 1 {
            return Err(Error::config("problem", "first-order terms are implemented in one dimension"));
        }
        if p.advection != (Advection::Linear { coeff: -1.0 }) {
            return Err(Error::config("advection", "first-order terms require A(u) = -u"));
        }
        Ok(FirstOrder { p: p.clone(), k, rule32: gauss_legendre(32)?, rule16: gauss_legendre(16)? })
    }

    /// Uses k = ∂A/∂u.
    pub fn with_matching_k(p: &ProblemSpec) -> Result<Self> {
        Self::new(p, p.advection.du(0.0))
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.p
    }

    fn w_and_y(&self, side: Side, x: f64) -> Result<(f64, f64)> {
        let (phi, d1, d2) = self.p.outer_derivs_1d(side, x)?;
        Ok((d1 / phi, d2 / phi))
    }

    /// First-order outer term ū₁ from its integral representation.
    pub fn ubar1(&self, side: Side, x: f64) -> Result<f64> {
        let (lo, hi) = (self.p.lo, self.p.hi);
        let int_w = |a: f64, b: f64| self.rule32.integrate(a, b, |s| self.w_and_y(side, s).map(|w| w.0).unwrap_or(f64::NAN));
        match side {
            Side::Minus => {
                let outer = self.rule32.integrate(lo, x, |s| {
                    let inner = int_w(lo, s).unwrap_or(f64::NAN);
                    let y = self.w_and_y(side, s).map(|w| w.1).unwrap_or(f64::NAN);
                    -inner.exp() * y
                })?;
                Ok((-int_w(lo, x)?).exp() * outer)
            }
            Side::Plus => {
                let outer = self.rule32.integrate(x, hi, |s| {
                    let inner = int_w(s, hi).unwrap_or(f64::NAN);
                    let y = self.w_and_y(side, s).map(|w| w.1).unwrap_or(f64::NAN);
                    (-inner).exp() * y
                })?;
                Ok(int_w(x, hi)?.exp() * outer)
            }
        }
    }

    /// Layer quantities for front position `h0` moving with speed `dh0`.
    pub fn layer(&self, h0: f64, dh0: f64) -> Result<LayerData> {
        let (phi_m, dphi_m, _) = self.p.outer_derivs_1d(Side::Minus, h0)?;
        let (phi_p, dphi_p, _) = self.p.outer_derivs_1d(Side::Plus, h0)?;
        Ok(LayerData {
            h0,
            dh0,
            phi_m,
            phi_p,
            dphi_m,
            dphi_p,
            ubar_m: self.ubar1(Side::Minus, h0)?,
            ubar_p: self.ubar1(Side::Plus, h0)?,
            p: 0.5 * (phi_p - phi_m),
            dp: 0.5 * (dphi_p - dphi_m) * dh0,
        })
    }

    /// ∫₀^{∓∞} g over panels until the integrand falls below tolerance.
    fn tail(&self, side: Side, g: impl Fn(f64) -> f64) -> Result<f64> {
        let dir = side.sign();
        let mut total = 0.0;
        let mut a = 0.0f64;
        loop {
            let b = a + dir * PANEL;
            total += self.rule16.integrate(a, b, &g)?;
            if g(b).abs() < TAIL_TOL * 1e-2 && g(b + dir * PANEL).abs() < TAIL_TOL * 1e-2 {
                return Ok(total);
            }
            if b.abs() > TAIL_LIMIT {
                return Err(Error::TailConvergence { limit: TAIL_LIMIT });
            }
            a = b;
        }
    }

    /// ∫₀^{∓∞} r₁ dξ.
    pub fn r1_integral(&self, side: Side, layer: &LayerData) -> Result<f64> {
        self.tail(side, |xi| layer.r1(side, xi))
    }

    /// Coefficients (a, Φ₁, Φ₂) of a·h₁′ + Φ₁·h₁ = Φ₂.
    pub fn ode_coefficients(&self, layer: &LayerData) -> Result<(f64, f64, f64)> {
        let l = layer;
        let a = l.phi_m - l.phi_p;
        let phi1 = 0.5 * self.k * (l.phi_p - l.phi_m) * (l.dphi_p + l.dphi_m);
        let phi2 = 0.5 * self.k * (l.ubar_m + l.ubar_p) * (l.phi_m - l.phi_p) - l.dphi_m
            + l.dphi_p
            + self.r1_integral(Side::Minus, l)?
            - self.r1_integral(Side::Plus, l)?;
        Ok((a, phi1, phi2))
    }

    /// Precomputes the first-order inner functions for given h₁, h₁′.
    pub fn q1_context(&self, layer: &LayerData, h1: f64, dh1: f64) -> Result<Q1Context> {
        let sides = [Side::Minus, Side::Plus].map(|side| self.q1_side(side, layer, h1, dh1));
        let [m, p] = sides;
        Ok(Q1Context { layer: *layer, minus: m?, plus: p? })
    }

    fn q1_side(&self, side: Side, layer: &LayerData, h1: f64, dh1: f64) -> Result<SideTables> {
        let dir = side.sign();
        let p1 = -layer.ubar(side) - h1 * layer.dphi(side);
        let c = p1 - dh1;
        let h = move |xi: f64| c * layer.upsilon(xi) + layer.r1(side, xi);
        // Truncation where H₁ is negligible.
        let mut n = 1usize;
        loop {
            let b = dir * n as f64 * PANEL;
            if h(b).abs() < TAIL_TOL && h(b + dir * PANEL).abs() < TAIL_TOL {
                break;
            }
            if b.abs() > TAIL_LIMIT {
                return Err(Error::TailConvergence { limit: TAIL_LIMIT });
            }
            n += 1;
        }
        let bound = |j: usize| dir * j as f64 * PANEL;
        let mut g = vec![0.0; n + 1];
        for j in (0..n).rev() {
            g[j] = g[j + 1] + self.rule16.integrate(bound(j), bound(j + 1), h)?;
        }
        let ups0 = layer.upsilon(0.0);
        let tables = SideTables { side, p1, c, ups0, bounds_g: g, cumulative: vec![0.0; n + 1], rule: self.rule16.clone() };
        let mut cumulative = vec![0.0; n + 1];
        for j in 0..n {
            cumulative[j + 1] = cumulative[j] + tables.g_over_z(layer, j, bound(j), bound(j + 1))?;
        }
        Ok(SideTables { cumulative, ..tables })
    }
}

#[derive(Debug, Clone)]
struct SideTables {
    side: Side,
    p1: f64,
    /// p₁ − h₁′.
    c: f64,
    ups0: f64,
    /// G at the panel boundaries.
    bounds_g: Vec<f64>,
    /// ∫₀ G/z at the panel boundaries.
    cumulative: Vec<f64>,
    rule: QuadratureRule,
}

impl SideTables {
    fn h(&self, layer: &LayerData, xi: f64) -> f64 {
        self.c * layer.upsilon(xi) + layer.r1(self.side, xi)
    }

    fn bound(&self, j: usize) -> f64 {
        self.side.sign() * j as f64 * PANEL
    }

    /// G(s) = ∫_s^{∓∞} H₁ for s inside panel j.
    fn g(&self, layer: &LayerData, j: usize, s: f64) -> Result<f64> {
        Ok(self.bounds_g[j + 1] + self.rule.integrate(s, self.bound(j + 1), |x| self.h(layer, x))?)
    }

    fn g_over_z(&self, layer: &LayerData, j: usize, a: f64, b: f64) -> Result<f64> {
        let mut sum = 0.0;
        for (s, w) in self.rule.mapped(a, b) {
            let z = layer.upsilon(s) / self.ups0;
            sum += w * self.g(layer, j, s)? / z;
        }
        Ok(sum)
    }

    fn value(&self, layer: &LayerData, xi: f64) -> Result<f64> {
        let n = self.bounds_g.len() - 1;
        let j = (xi.abs() / PANEL).floor() as usize;
        let integral = if j >= n {
            self.cumulative[n]
        } else {
            self.cumulative[j] + self.g_over_z(layer, j, self.bound(j), xi)?
        };
        let z = layer.upsilon(xi) / self.ups0;
        Ok(z * (self.p1 - integral))
    }
}

/// First-order inner functions Q₁^∓ at one instant.
#[derive(Debug, Clone)]
pub struct Q1Context {
    pub layer: LayerData,
    minus: SideTables,
    plus: SideTables,
}

impl Q1Context {
    fn tables(&self, side: Side) -> &SideTables {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    /// p₁^∓ = −ū₁^∓(h₀) − h₁ φ^∓′(h₀).
    pub fn p1(&self, side: Side) -> f64 {
        self.tables(side).p1
    }

    /// Q₁^∓(ξ); ξ must lie on the side's half-line.
    pub fn value(&self, side: Side, xi: f64) -> Result<f64> {
        if xi * side.sign() < 0.0 {
            return Err(Error::config("xi", format!("{xi} is on the wrong side for {side:?}")));
        }
        if xi.abs() > Q1_RANGE {
            return Ok(0.0);
        }
        self.tables(side).value(&self.layer, xi)
    }

    /// ∂ξQ₁^∓(0) = −G(0), since z′(0) = 0.
    pub fn slope_at_zero(&self, side: Side) -> f64 {
        -self.tables(side).bounds_g[0]
    }
}

/// h₁ and h₁′ sampled on a uniform grid, Hermite-interpolated.
#[derive(Debug, Clone)]
pub struct H1Trajectory {
    pub dt: f64,
    pub h1: Vec<f64>,
    pub dh1: Vec<f64>,
}

impl ScalarPath for H1Trajectory {
    fn value(&self, t: f64) -> f64 {
        self.hermite(t).0
    }
    fn slope(&self, t: f64) -> f64 {
        self.hermite(t).1
    }
}

impl H1Trajectory {
    fn hermite(&self, t: f64) -> (f64, f64) {
        let n = self.h1.len() - 1;
        let pos = (t / self.dt).clamp(0.0, n as f64);
        let k = (pos.floor() as usize).min(n - 1);
        let tau = pos - k as f64;
        let (h0, h1, d0, d1) = (self.h1[k], self.h1[k + 1], self.dh1[k] * self.dt, self.dh1[k + 1] * self.dt);
        let (t2, t3) = (tau * tau, tau * tau * tau);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * h0 + (t3 - 2.0 * t2 + tau) * d0 + (-2.0 * t3 + 3.0 * t2) * h1 + (t3 - t2) * d1;
        let dv = (6.0 * t2 - 6.0 * tau) * h0 + (3.0 * t2 - 4.0 * tau + 1.0) * d0 + (-6.0 * t2 + 6.0 * tau) * h1 + (3.0 * t2 - 2.0 * tau) * d1;
        (v, dv / self.dt)
    }
}

/// RK4 solution of a·h₁′ + Φ₁h₁ = Φ₂, h₁(0) = 0, along the front `h0`.
pub fn solve_h1_rk4(fo: &FirstOrder, h0: &dyn FrontEvaluator, steps: usize) -> Result<H1Trajectory> {
    let t_final = fo.p.t_final;
    let dt = t_final / steps as f64;
    let rhs = |t: f64, h1: f64| -> Result<f64> {
        let fs = h0.front(&[], t);
        let layer = fo.layer(fs.h0, fs.ht.unwrap_or(0.0))?;
        let (a, phi1, phi2) = fo.ode_coefficients(&layer)?;
        Ok((phi2 - phi1 * h1) / a)
    };
    let mut h = 0.0;
    let mut hs = vec![0.0];
    let mut ds = vec![rhs(0.0, 0.0)?];
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = ds[i];
        let k2 = rhs(t + 0.5 * dt, h + 0.5 * dt * k1)?;
        let k3 = rhs(t + 0.5 * dt, h + 0.5 * dt * k2)?;
        let k4 = rhs(t + dt, h + dt * k3)?;
        h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        hs.push(h);
        ds.push(rhs(t + dt, h)?);
    }
    Ok(H1Trajectory { dt, h1: hs, dh1: ds })
}

/// U₁ = φ^∓(x) + Q₀^∓(ξ₀) + μ(ū₁^∓(x) + Q₁^∓(ξ₁)) with ξ₀ = (x − h₀)/μ,
/// ξ₁ = (x − h₀ − μh₁)/μ; branch switch at h₀ + μh₁.
pub fn assemble_u1(fo: &FirstOrder, h0: &dyn FrontEvaluator, h1: &dyn ScalarPath, x: f64, t: f64) -> Result<f64> {
    let fs = h0.front(&[], t);
    let layer = fo.layer(fs.h0, fs.ht.unwrap_or(0.0))?;
    let (v1, d1) = (h1.value(t), h1.slope(t));
    let ctx = fo.q1_context(&layer, v1, d1)?;
    assemble_u1_with(fo, &ctx, v1, x)
}

/// [`assemble_u1`] with a precomputed context.
pub fn assemble_u1_with(fo: &FirstOrder, ctx: &Q1Context, h1: f64, x: f64) -> Result<f64> {
    let mu = fo.p.mu;
    let l = &ctx.layer;
    let switch = l.h0 + mu * h1;
    let side = if x < switch { Side::Minus } else { Side::Plus };
    let xi0 = (x - l.h0) / mu;
    let xi1 = ((x - switch) / mu).clamp(if side == Side::Plus { 0.0 } else { f64::MIN }, if side == Side::Minus { 0.0 } else { f64::MAX });
    let phi = fo.p.outer_at(side, x, &[])?;
    Ok(phi + l.q0(side, xi0) + mu * (fo.ubar1(side, x)? + ctx.value(side, xi1)?))
}
