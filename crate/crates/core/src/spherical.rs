//! Spherical functions, the spherical transform and multiplier kernels.

use std::sync::Arc;

use num::complex::Complex64;
use serde::Serialize;

use crate::abel_calculus::build_fr_symbol;
use crate::error::{invalid, Result};
use crate::kernel::{kernel_at, profile_direct, KernelProfile, Multiplier, RadialTable};
use crate::ode::{dopri5, OdeOptions};
use crate::quad::{integrate_panels, uniform_edges, QuadOptions};
use crate::dr_space::{DRSpace, SPoint};

const R_LAUNCH: f64 = 1e-3;

/// φ_s on [0, r_max], stored as u = e^{Qr/2}φ_s so that large radii stay representable.
#[derive(Debug, Clone)]
pub struct SphericalFunction {
    s: f64,
    q: f64,
    r_max: f64,
    taylor: [f64; 4],
    lin: (f64, f64, f64),
    nodes: Vec<(f64, f64, f64, f64)>,
    sp: DRSpace,
}

impl SphericalFunction {
    /// Solves φ'' + (A'/A)φ' + (s² + Q²/4)φ = 0, φ(0) = 1, φ'(0) = 0.
    pub fn new(sp: &DRSpace, s: f64, r_max: f64) -> Result<Self> {
        if !(r_max > R_LAUNCH) || !s.is_finite() {
            return invalid(format!("bad spherical function request s={s}, r_max={r_max}"));
        }
        let q = sp.q();
        let n = sp.n() as f64;
        let e = s * s + 0.25 * q * q;
        let (p, m) = (0.5 * (sp.m_v() + sp.m_z()) as f64, 0.5 * sp.m_z() as f64);
        // A'/A = (n−1)/r + b1 r + b3 r³ + …
        let b1 = p / 6.0 + m / 2.0;
        let b3 = -p / 360.0 - m / 24.0;
        let c2 = -e / (2.0 * n);
        let c4 = -(e + 2.0 * b1) * c2 / (4.0 * (n + 2.0));
        let c6 = -((e + 4.0 * b1) * c4 + 2.0 * b3 * c2) / (6.0 * (n + 4.0));
        let taylor = [1.0, c2, c4, c6];
        let r0 = R_LAUNCH;
        let phi0 = 1.0 + r0 * r0 * (c2 + r0 * r0 * (c4 + r0 * r0 * c6));
        let dphi0 = r0 * (2.0 * c2 + r0 * r0 * (4.0 * c4 + 6.0 * r0 * r0 * c6));
        let sc = (0.5 * q * r0).exp();
        let y0 = [sc * phi0, sc * (dphi0 + 0.5 * q * phi0)];
        // u'' = (Q − a)u' + ((Q/2)a − Q²/2 − s²)u
        let lin = (q, 0.5 * q * q, s * s);
        let rhs = |r: f64, y: &[f64; 2]| -> [f64; 2] {
            let a = sp.density_log_derivative(r);
            [y[1], (q - a) * y[1] + (0.5 * q * a - lin.1 - lin.2) * y[0]]
        };
        let opts = OdeOptions { rtol: 1e-11, atol: 1e-14, h_init: 1e-4, h_max: 0.02, h_min: 1e-12 };
        let mut nodes = Vec::with_capacity((r_max / 0.02) as usize + 16);
        dopri5(rhs, r0, y0, r_max, opts, |r, y| {
            let d = rhs(r, y);
            nodes.push((r, y[0], y[1], d[1]));
        })?;
        Ok(SphericalFunction { s, q, r_max, taylor, lin, nodes, sp: sp.clone() })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn space(&self) -> &DRSpace {
        &self.sp
    }

    fn taylor(&self, r: f64) -> (f64, f64) {
        let [_, c2, c4, c6] = self.taylor;
        let r2 = r * r;
        (1.0 + r2 * (c2 + r2 * (c4 + r2 * c6)), r * (2.0 * c2 + r2 * (4.0 * c4 + 6.0 * r2 * c6)))
    }

    /// (u, u') with u = e^{Qr/2}φ_s; NaN outside [0, r_max].
    pub fn scaled_with_derivative(&self, r: f64) -> (f64, f64) {
        if r < 0.0 || r > self.r_max {
            return (f64::NAN, f64::NAN);
        }
        if r <= R_LAUNCH {
            let (p, dp) = self.taylor(r);
            let sc = (0.5 * self.q * r).exp();
            return (sc * p, sc * (dp + 0.5 * self.q * p));
        }
        let i = match self.nodes.binary_search_by(|n| n.0.partial_cmp(&r).unwrap()) {
            Ok(i) => return (self.nodes[i].1, self.nodes[i].2),
            Err(i) => i.clamp(1, self.nodes.len() - 1),
        };
        let (x0, u0, du0, ddu0) = self.nodes[i - 1];
        let (x1, u1, du1, ddu1) = self.nodes[i];
        quintic_hermite((x0, u0, du0, ddu0), (x1, u1, du1, ddu1), r)
    }

    /// e^{Qr/2} φ_s(r).
    pub fn scaled(&self, r: f64) -> f64 {
        self.scaled_with_derivative(r).0
    }

    pub fn value(&self, r: f64) -> f64 {
        self.scaled(r) * (-0.5 * self.q * r).exp()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let (u, du) = self.scaled_with_derivative(r);
        (du - 0.5 * self.q * u) * (-0.5 * self.q * r).exp()
    }

    /// Nodes (r, φ_s, φ_s') of the integration grid.
    pub fn samples(&self) -> Vec<(f64, f64, f64)> {
        let mut out = vec![(0.0, 1.0, 0.0)];
        out.extend(self.nodes.iter().map(|&(r, u, du, _)| {
            let e = (-0.5 * self.q * r).exp();
            (r, u * e, (du - 0.5 * self.q * u) * e)
        }));
        out
    }

    /// Residual of the scaled equation at r, used by tests.
    pub fn residual(&self, r: f64) -> f64 {
        let h = 1e-4;
        let u = |x: f64| self.scaled(x);
        let d2 = (u(r + h) - 2.0 * u(r) + u(r - h)) / (h * h);
        let (u0, du) = self.scaled_with_derivative(r);
        let a = self.sp.density_log_derivative(r);
        d2 - (self.lin.0 - a) * du - (0.5 * self.q * a - self.lin.1 - self.lin.2) * u0
    }
}

fn quintic_hermite(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64), x: f64) -> (f64, f64) {
    let h = b.0 - a.0;
    let t = (x - a.0) / h;
    let (y0, d0, s0) = (a.1, a.2 * h, a.3 * h * h);
    let (y1, d1, s1) = (b.1, b.2 * h, b.3 * h * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let dh0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let dh1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let dh2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let dh3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let dh4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let dh5 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let v = y0 * h0 + d0 * h1 + s0 * h2 + s1 * h3 + d1 * h4 + y1 * h5;
    let dv = y0 * dh0 + d0 * dh1 + s0 * dh2 + s1 * dh3 + d1 * dh4 + y1 * dh5;
    (v, dv / h)
}

type Profile = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Radial factor of k(x) = δ^{1/2}(x) profile(R(x)).
///
/// The profile is held in the scaled form e^{QR/2} profile(R) and vanishes past `r_max`.
#[derive(Clone)]
pub struct RadialKernel {
    sp: DRSpace,
    scaled: Profile,
    r_max: f64,
}

impl RadialKernel {
    pub fn new(sp: &DRSpace, profile: impl Fn(f64) -> Complex64 + Send + Sync + 'static, r_max: f64) -> Self {
        let q = sp.q();
        RadialKernel {
            sp: sp.clone(),
            scaled: Arc::new(move |r| profile(r) * (0.5 * q * r).exp()),
            r_max,
        }
    }

    pub fn from_scaled(sp: &DRSpace, scaled: impl Fn(f64) -> Complex64 + Send + Sync + 'static, r_max: f64) -> Self {
        RadialKernel { sp: sp.clone(), scaled: Arc::new(scaled), r_max }
    }

    pub fn from_table(sp: &DRSpace, table: RadialTable) -> Self {
        let r_max = table.r_end();
        Self::from_scaled(sp, move |r| Complex64::new(table.scaled_value(r), 0.0), r_max)
    }

    pub fn zero(sp: &DRSpace) -> Self {
        Self::from_scaled(sp, |_| Complex64::new(0.0, 0.0), 1.0)
    }

    pub fn space(&self) -> &DRSpace {
        &self.sp
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn profile(&self, r: f64) -> Complex64 {
        if r > self.r_max {
            return Complex64::new(0.0, 0.0);
        }
        (self.scaled)(r) * (-0.5 * self.sp.q() * r).exp()
    }

    pub fn scaled_profile(&self, r: f64) -> Complex64 {
        if r > self.r_max {
            return Complex64::new(0.0, 0.0);
        }
        (self.scaled)(r)
    }

    pub fn at(&self, x: &SPoint) -> Complex64 {
        let r = self.sp.radius(x);
        if r > self.r_max {
            return Complex64::new(0.0, 0.0);
        }
        (self.scaled)(r) * (-0.5 * self.sp.q() * (x.a.ln() + r)).exp()
    }

    /// CSV "r,re,im" of the profile on `grid`.
    pub fn to_csv(&self, grid: &[f64]) -> String {
        let mut out = String::from("r,re,im\n");
        for &r in grid {
            let v = self.profile(r);
            out.push_str(&format!("{r},{:e},{:e}\n", v.re, v.im));
        }
        out
    }
}

/// Hf(s) = ∫_0^∞ φ_s(r) f(r) A(r) dr for f the profile of `k`.
pub fn spherical_transform(k: &RadialKernel, s: f64) -> Result<Complex64> {
    let phi = SphericalFunction::new(k.space(), s, k.r_max().max(2.0 * R_LAUNCH))?;
    spherical_transform_with(k, &phi)
}

/// As [`spherical_transform`] with a prebuilt φ_s covering the kernel support.
pub fn spherical_transform_with(k: &RadialKernel, phi: &SphericalFunction) -> Result<Complex64> {
    let sp = k.space();
    if phi.r_max() < k.r_max() {
        return invalid(format!("φ_s grid ends at {} before kernel support {}", phi.r_max(), k.r_max()));
    }
    let q = sp.q();
    let g = |r: f64| -> Complex64 {
        if r <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        k.scaled_profile(r) * phi.scaled(r) * (sp.ln_density_a(r) - q * r).exp()
    };
    let width = (std::f64::consts::PI / (2.0 * (1.0 + phi.s().abs()))).min(0.5);
    let res = integrate_panels(g, &uniform_edges(0.0, k.r_max(), width), QuadOptions { abs_tol: 1e-11, rel_tol: 1e-12, max_intervals: 100_000 });
    if !res.converged && res.abs_err > 1e-8 {
        return Err(crate::error::Error::QuadratureFailure { a: 0.0, b: k.r_max(), achieved: res.abs_err });
    }
    Ok(res.value)
}

/// k_{ψ(L)}(x) by direct quadrature, with the flag reporting a clamp of R to 1e-4 near e.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub re: f64,
    pub im: f64,
    pub clamped: bool,
}

impl KernelValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

pub const R_CLAMP: f64 = 1e-4;

/// k_{ψ(L)}(x) = δ^{1/2}(x) ∫ m(s) F_{R(x)}(s) ds with m(s) = ψ(s²).
pub fn multiplier_kernel(sp: &DRSpace, m: &dyn Multiplier, x: &SPoint) -> Result<KernelValue> {
    let pr = build_fr_symbol(sp)?;
    let r = sp.radius(x);
    let clamped = r < R_CLAMP;
    let w = profile_direct(sp, &pr, m, r.max(R_CLAMP))?;
    let v = w * sp.sqrt_delta(x);
    Ok(KernelValue { re: v.re, im: v.im, clamped })
}

/// The same kernel through the moment engine, as a [`RadialKernel`].
pub fn multiplier_radial_kernel(sp: &DRSpace, m: &dyn Multiplier) -> Result<(KernelProfile, RadialKernel)> {
    let kp = KernelProfile::new(sp, m)?;
    let table = kp.table(kp.reach());
    Ok((kp, RadialKernel::from_table(sp, table)))
}

/// k at x from a profile, see [`kernel_at`].
pub fn multiplier_kernel_fast(sp: &DRSpace, kp: &KernelProfile, x: &SPoint) -> f64 {
    kernel_at(sp, kp, x)
}

/// Radial test function with its first two derivatives.
pub trait RadialFunction {
    fn eval(&self, r: f64) -> (f64, f64, f64);
}

impl<F: Fn(f64) -> (f64, f64, f64)> RadialFunction for F {
    fn eval(&self, r: f64) -> (f64, f64, f64) {
        self(r)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugationRow {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    /// Discrepancy with plain central differences at steps h and h/2.
    pub coarse: f64,
    pub fine: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugationReport {
    pub rows: Vec<ConjugationRow>,
    pub max_discrepancy: f64,
    /// log2(coarse/fine) minimized over the rows.
    pub min_order: f64,
}

/// Compares δ^{−1/2} L(δ^{1/2} f) with −f'' − (A'/A) f' − (Q²/4) f at the given points.
pub fn conjugation_check(sp: &DRSpace, f: &dyn RadialFunction, points: &[SPoint], h: f64) -> ConjugationReport {
    let q = sp.q();
    let g = |x: &SPoint| sp.sqrt_delta(x) * f.eval(sp.radius(x)).0;
    let mut rows = Vec::new();
    for x in points {
        let r = sp.radius(x);
        let (f0, f1, f2) = f.eval(r);
        let rhs = -f2 - sp.density_log_derivative(r) * f1 - 0.25 * q * q * f0;
        let sd = sp.sqrt_delta(x);
        let lhs = sp.laplacian_fd_with(&g, x, h, true) / sd;
        let coarse = (sp.laplacian_fd_with(&g, x, h, false) / sd - rhs).abs();
        let fine = (sp.laplacian_fd_with(&g, x, 0.5 * h, false) / sd - rhs).abs();
        rows.push(ConjugationRow { r, lhs, rhs, discrepancy: (lhs - rhs).abs(), coarse, fine });
    }
    let max_discrepancy = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    let min_order = rows
        .iter()
        .map(|r| if r.fine > 0.0 { (r.coarse / r.fine).log2() } else { f64::INFINITY })
        .fold(f64::INFINITY, f64::min);
    ConjugationReport { rows, max_discrepancy, min_order }
}
