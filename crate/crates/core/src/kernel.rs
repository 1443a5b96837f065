//! Radial profiles of spectral-multiplier kernels.
//!
//! For an even multiplier m the Fubini swap ∫ m(s) D₁^pD₂^q e^{isv} ds = D₁^pD₂^q M(v)
//! reduces every kernel to moments M_k(v) = ∫ m(s)(is)^k e^{isv} ds, computed once per v.

use std::sync::Arc;

use num::complex::Complex64;
use rayon::prelude::*;

use crate::abel_calculus::{apply_operator_series, build_fr_symbol, eval_dfr_dr, eval_fr, nu_weight, nu_weight_u, EvenSeries, FRProfile, FrSampler, Parity};
use crate::error::{invalid, Result};
use crate::quad::{integrate_panels, uniform_edges, GaussLegendre, QuadOptions};
use crate::dr_space::{DRSpace, SPoint};

/// Even real spectral multiplier s ↦ m(s).
pub trait Multiplier: Send + Sync {
    fn eval(&self, s: f64) -> f64;
    /// Interval [lo, hi] of |s| outside which m vanishes.
    fn support(&self) -> (f64, f64);
    /// Radius around which the kernel concentrates (the time of a wave multiplier).
    fn propagation(&self) -> f64 {
        0.0
    }
}

/// Multiplier from a closure.
pub struct FnMultiplier<F> {
    f: F,
    lo: f64,
    hi: f64,
    prop: f64,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnMultiplier<F> {
    pub fn new(f: F, lo: f64, hi: f64) -> Self {
        FnMultiplier { f, lo, hi, prop: 0.0 }
    }

    pub fn with_propagation(mut self, prop: f64) -> Self {
        self.prop = prop;
        self
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Multiplier for FnMultiplier<F> {
    fn eval(&self, s: f64) -> f64 {
        (self.f)(s.abs())
    }
    fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    fn propagation(&self) -> f64 {
        self.prop
    }
}

/// s ↦ ψ(s²) for ψ supported in [y_lo, y_hi].
pub struct SquaredArgument<F> {
    psi: F,
    y_lo: f64,
    y_hi: f64,
}

impl<F: Fn(f64) -> f64 + Send + Sync> SquaredArgument<F> {
    pub fn new(psi: F, y_lo: f64, y_hi: f64) -> Self {
        SquaredArgument { psi, y_lo, y_hi }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> Multiplier for SquaredArgument<F> {
    fn eval(&self, s: f64) -> f64 {
        (self.psi)(s * s)
    }
    fn support(&self) -> (f64, f64) {
        (self.y_lo.max(0.0).sqrt(), self.y_hi.sqrt())
    }
}

impl<M: Multiplier + ?Sized> Multiplier for Arc<M> {
    fn eval(&self, s: f64) -> f64 {
        (**self).eval(s)
    }
    fn support(&self) -> (f64, f64) {
        (**self).support()
    }
    fn propagation(&self) -> f64 {
        (**self).propagation()
    }
}

const MIN_NODES: usize = 1024;
const RESYNC: usize = 64;

/// Trapezoid moments on a uniform s-grid; spectrally accurate for smooth compactly supported m.
#[derive(Debug, Clone)]
pub struct SpectralMoments {
    s0: f64,
    ds: f64,
    kmax: usize,
    n: usize,
    weights: Vec<f64>,
    s_hi: f64,
}

impl SpectralMoments {
    /// Grid fine enough for |v| ≤ v_need.
    pub fn new(m: &dyn Multiplier, kmax: usize, v_need: f64) -> Result<Self> {
        let (lo, hi) = m.support();
        if !(hi > lo && lo >= 0.0) {
            return invalid(format!("bad multiplier support [{lo}, {hi}]"));
        }
        let width = hi - lo;
        let spread = 1.5e3 / width;
        let ds_alias = std::f64::consts::PI / (v_need + m.propagation() + spread);
        let n = ((width / ds_alias).ceil() as usize).max(MIN_NODES);
        let ds = width / n as f64;
        let mut weights = Vec::with_capacity((n + 1) * (kmax + 1));
        for j in 0..=n {
            let s = lo + j as f64 * ds;
            let mut w = ds * m.eval(s);
            if j == 0 || j == n {
                w *= 0.5;
            }
            let mut sk = 1.0;
            for _ in 0..=kmax {
                weights.push(w * sk);
                sk *= s;
            }
        }
        Ok(SpectralMoments { s0: lo, ds, kmax, n, weights, s_hi: hi })
    }

    pub fn s_hi(&self) -> f64 {
        self.s_hi
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    /// M_k(v) = ∫ m(s)(is)^k e^{isv} ds, real for even m.
    pub fn eval(&self, v: f64, out: &mut [f64]) {
        let kk = self.kmax + 1;
        let mut c = [0.0f64; 8];
        let mut s = [0.0f64; 8];
        let (sd, cd) = (self.ds * v).sin_cos();
        let mut z = (0.0, 0.0);
        for j in 0..=self.n {
            if j % RESYNC == 0 {
                let (sn, cs) = ((self.s0 + j as f64 * self.ds) * v).sin_cos();
                z = (cs, sn);
            }
            let w = &self.weights[j * kk..(j + 1) * kk];
            for k in 0..kk {
                c[k] += w[k] * z.0;
                s[k] += w[k] * z.1;
            }
            z = (z.0 * cd - z.1 * sd, z.0 * sd + z.1 * cd);
        }
        for k in 0..kk {
            out[k] = match k % 4 {
                0 => 2.0 * c[k],
                1 => -2.0 * s[k],
                2 => -2.0 * c[k],
                _ => 2.0 * s[k],
            };
        }
    }

    /// Even series of M_0(v) = ∫ m(s) e^{isv} ds in w = v².
    pub fn series(&self, len: usize) -> EvenSeries {
        let kk = self.kmax + 1;
        let mut coeffs = vec![0.0; len];
        for j in 0..=self.n {
            let s = self.s0 + j as f64 * self.ds;
            let w = self.weights[j * kk];
            let s2 = s * s;
            let mut term = 2.0 * w;
            for (i, c) in coeffs.iter_mut().enumerate() {
                if i > 0 {
                    term *= -s2 / ((2 * i - 1) * (2 * i)) as f64;
                }
                *c += term;
            }
        }
        EvenSeries(coeffs)
    }
}

const SERIES_LEN: usize = 34;
const RELATIVE_FLOOR: f64 = 1e-12;

/// Radial profile w(R) with k(x) = δ^{1/2}(x) w(R(x)), for one multiplier on one space.
///
/// Values are handled in the scaled form w̃(R) = e^{QR/2} w(R).
#[derive(Clone)]
pub struct KernelProfile {
    profile: FRProfile,
    moments: SpectralMoments,
    series: EvenSeries,
    v_series: f64,
    q: f64,
    scale: f64,
    reach: f64,
    tail: f64,
    panel: f64,
    cache: Vec<f64>,
    bary: Vec<f64>,
}

impl KernelProfile {
    pub fn new(sp: &DRSpace, m: &dyn Multiplier) -> Result<Self> {
        Self::with_reach(sp, m, None)
    }

    /// `reach`: radius beyond which the kernel is negligible; estimated from the moments when absent.
    pub fn with_reach(sp: &DRSpace, m: &dyn Multiplier, reach: Option<f64>) -> Result<Self> {
        let profile = build_fr_symbol(sp)?;
        let kmax = profile.compiled_derivative().kmax();
        let q = sp.q();
        let tail = 2.0 * 27.7 / q;
        let (_, hi) = m.support();
        let scan_moments = SpectralMoments::new(m, kmax, 2.0 * m.propagation() + 400.0)?;
        let reach = match reach {
            Some(r) => r,
            None => estimate_reach(&scan_moments, m.propagation()),
        };
        let v_end = reach + tail + 1.0;
        let moments = SpectralMoments::new(m, kmax, v_end)?;
        let g = apply_operator_series(&moments.series(SERIES_LEN + profile.p + profile.q), profile.p, profile.q);
        let v_series = (1.5 / hi).min(0.5);
        let panel = (2.0 / hi).min(0.25);
        let mut kp = KernelProfile {
            scale: profile.scale(),
            profile,
            moments,
            series: g,
            v_series,
            q,
            reach,
            tail,
            panel,
            cache: Vec::new(),
            bary: barycentric_weights(&GaussLegendre::g16().nodes),
        };
        if kp.profile.parity == Parity::Odd {
            let npanels = (v_end / panel).ceil() as usize + 1;
            let gl = GaussLegendre::g16();
            let cache: Vec<f64> = (0..npanels)
                .into_par_iter()
                .flat_map_iter(|j| {
                    let a = j as f64 * panel;
                    gl.mapped(a, a + panel).map(|(v, _)| kp.p_scaled(v)).collect::<Vec<_>>()
                })
                .collect();
            kp.cache = cache;
        }
        Ok(kp)
    }

    pub fn parity(&self) -> Parity {
        self.profile.parity
    }

    pub fn fr_profile(&self) -> &FRProfile {
        &self.profile
    }

    /// Radius beyond which the profile is below the relative floor.
    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// Largest |s| in the support.
    pub fn s_hi(&self) -> f64 {
        self.moments.s_hi()
    }

    /// P(v)·e^{γv}, P = D₁^pD₂^q M_0.
    fn p_scaled(&self, v: f64) -> f64 {
        let gamma = self.profile.gamma;
        if v < self.v_series {
            return self.series.value(v) * (gamma * v).exp();
        }
        let kk = self.profile.compiled().kmax() + 1;
        let mut m = [0.0; 8];
        self.moments.eval(v, &mut m);
        let mut r = [0.0; 8];
        self.profile.compiled().real_coefficients_scaled(v, gamma, &mut r[..kk]);
        (0..kk).map(|k| r[k] * m[k]).sum()
    }

    /// P'(v)·e^{γv}.
    fn dp_scaled(&self, v: f64) -> f64 {
        let gamma = self.profile.gamma;
        if v < self.v_series {
            return self.series.derivative(v) * (gamma * v).exp();
        }
        let d = self.profile.compiled_derivative();
        let kk = d.kmax() + 1;
        let mut m = [0.0; 8];
        self.moments.eval(v, &mut m);
        let mut r = [0.0; 8];
        d.real_coefficients_scaled(v, gamma, &mut r[..kk]);
        (0..kk).map(|k| r[k] * m[k]).sum()
    }

    fn cached(&self, v: f64) -> f64 {
        let j = ((v / self.panel).floor() as usize).min(self.cache.len() / 16 - 1);
        let a = j as f64 * self.panel;
        let x = 2.0 * (v - a) / self.panel - 1.0;
        barycentric(&GaussLegendre::g16().nodes, &self.bary, &self.cache[16 * j..16 * j + 16], x)
    }

    /// w̃(R) = e^{QR/2} w(R).
    pub fn scaled_value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.reach + 1.0 {
            return 0.0;
        }
        match self.profile.parity {
            Parity::Even => self.scale * self.p_scaled(r),
            Parity::Odd => self.scale * self.odd_integral(r),
        }
    }

    fn odd_integral(&self, r: f64) -> f64 {
        let h = self.panel;
        let hq = 0.5 * self.q;
        let mut j0 = (r / h).floor() as usize + 1;
        if j0 as f64 * h - r < 0.5 * h {
            j0 += 1;
        }
        let e = j0 as f64 * h;
        let gl = GaussLegendre::g32();
        let mut local = 0.0;
        for (u, w) in gl.mapped(0.0, (e - r).sqrt()) {
            let v = r + u * u;
            local += w * self.cached(v) * nu_weight_u(r, u) * (-hq * u * u).exp();
        }
        let g16 = GaussLegendre::g16();
        let npanels = self.cache.len() / 16;
        let j1 = (((r + self.tail) / h).ceil() as usize).min(npanels);
        let mut far = 0.0;
        let ch_r = r.cosh();
        for j in j0..j1 {
            let a = j as f64 * h;
            let vals = &self.cache[16 * j..16 * j + 16];
            for (i, (v, w)) in g16.mapped(a, a + h).enumerate() {
                let wt = if v < 300.0 {
                    (-0.5 * v).exp() * v.sinh() / (v.cosh() - ch_r).sqrt()
                } else {
                    nu_weight(r, v)
                };
                far += w * vals[i] * wt * (-hq * (v - r)).exp();
            }
        }
        local + far
    }

    /// w(R).
    pub fn value(&self, r: f64) -> f64 {
        self.scaled_value(r) * (-0.5 * self.q * r.abs()).exp()
    }

    /// e^{QR/2} w'(R).
    pub fn scaled_derivative(&self, r: f64) -> f64 {
        match self.profile.parity {
            Parity::Even => {
                let gamma = self.profile.gamma;
                if r < self.v_series {
                    return self.scale * self.series.derivative(r) * (gamma * r).exp();
                }
                self.scale * self.dp_scaled(r)
            }
            Parity::Odd => {
                let h = crate::dr_space::FD_STEP;
                if r < 2.0 * h {
                    // w is even in R
                    let f = |x: f64| self.value(x);
                    let d = crate::numdiff::richardson(&f, r, h);
                    return d * (0.5 * self.q * r).exp();
                }
                let f = |x: f64| self.scaled_value(x);
                crate::numdiff::richardson(&f, r, h) - 0.5 * self.q * self.scaled_value(r)
            }
        }
    }

    /// w'(R).
    pub fn derivative(&self, r: f64) -> f64 {
        self.scaled_derivative(r) * (-0.5 * self.q * r).exp()
    }

    /// Tabulates w̃ and its derivative on GL16 panels covering [0, r_end].
    pub fn table(&self, r_end: f64) -> RadialTable {
        let h = self.panel.min(0.25);
        RadialTable::build(|r| self.scaled_value(r), r_end, h, self.q)
    }
}

fn estimate_reach(m: &SpectralMoments, prop: f64) -> f64 {
    let kk = m.kmax() + 1;
    let s_hi = m.s_hi();
    let dv = (0.25 / s_hi).min(0.05);
    let window = (8.0 * std::f64::consts::PI / s_hi).max(2.0);
    let mut out = [0.0; 8];
    let mut peak = 0.0f64;
    let mut last = 0.0;
    let mut v = 0.0;
    let cap = 2.0 * prop + 400.0;
    while v < cap {
        m.eval(v, &mut out);
        let mut mag = 0.0;
        let mut sc = 1.0;
        for o in out.iter().take(kk) {
            mag += o.abs() * sc;
            sc /= s_hi;
        }
        peak = peak.max(mag);
        if mag > RELATIVE_FLOOR * peak {
            last = v;
        }
        if v > prop && v - last > window {
            break;
        }
        v += dv;
    }
    last + window.min(1.0)
}

fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| 1.0 / (0..x.len()).filter(|&k| k != j).map(|k| x[j] - x[k]).product::<f64>())
        .collect()
}

fn barycentric(x: &[f64], w: &[f64], y: &[f64], t: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..x.len() {
        let d = t - x[j];
        if d == 0.0 {
            return y[j];
        }
        let c = w[j] / d;
        num += c * y[j];
        den += c;
    }
    num / den
}

fn barycentric_with_derivative(x: &[f64], w: &[f64], y: &[f64], t: f64) -> (f64, f64) {
    let t = if x.contains(&t) { t + 1e-13 } else { t };
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..x.len() {
        let c = w[j] / (t - x[j]);
        num += c * y[j];
        den += c;
    }
    let p = num / den;
    let mut dnum = 0.0;
    for j in 0..x.len() {
        let d = t - x[j];
        dnum += w[j] / d * (p - y[j]) / d;
    }
    (p, dnum / den)
}

/// A smooth radial function tabulated at GL16 nodes of uniform panels starting at 0.
#[derive(Debug, Clone)]
pub struct RadialTable {
    h: f64,
    r_end: f64,
    q: f64,
    values: Vec<f64>,
    bary: Vec<f64>,
}

impl RadialTable {
    /// `f` is a scaled profile w̃; `q` undoes the scaling in [`RadialTable::value`].
    pub fn build<F: Fn(f64) -> f64 + Sync>(f: F, r_end: f64, h: f64, q: f64) -> Self {
        let npanels = (r_end / h).ceil().max(1.0) as usize;
        let gl = GaussLegendre::g16();
        let values: Vec<f64> = (0..npanels)
            .into_par_iter()
            .flat_map_iter(|j| {
                let a = j as f64 * h;
                gl.mapped(a, a + h).map(|(r, _)| f(r)).collect::<Vec<_>>()
            })
            .collect();
        RadialTable { h, r_end: npanels as f64 * h, q, values, bary: barycentric_weights(&gl.nodes) }
    }

    pub fn r_end(&self) -> f64 {
        self.r_end
    }

    pub fn panel_width(&self) -> f64 {
        self.h
    }

    fn locate(&self, r: f64) -> Option<(usize, f64)> {
        if r < 0.0 || r > self.r_end {
            return None;
        }
        let j = ((r / self.h).floor() as usize).min(self.values.len() / 16 - 1);
        Some((j, 2.0 * (r - j as f64 * self.h) / self.h - 1.0))
    }

    /// w̃(r), zero past the table end.
    pub fn scaled_value(&self, r: f64) -> f64 {
        match self.locate(r) {
            Some((j, x)) => barycentric(&GaussLegendre::g16().nodes, &self.bary, &self.values[16 * j..16 * j + 16], x),
            None => 0.0,
        }
    }

    /// (w̃(r), w̃'(r)).
    pub fn scaled_with_derivative(&self, r: f64) -> (f64, f64) {
        match self.locate(r) {
            Some((j, x)) => {
                let (p, dp) = barycentric_with_derivative(
                    &GaussLegendre::g16().nodes,
                    &self.bary,
                    &self.values[16 * j..16 * j + 16],
                    x,
                );
                (p, dp * 2.0 / self.h)
            }
            None => (0.0, 0.0),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.scaled_value(r) * (-0.5 * self.q * r).exp()
    }

    /// ∫_0^{r_end} |w̃(r)| g(r) dr, splitting panels at sign changes of w̃.
    pub fn integrate_abs<G: Fn(f64) -> f64 + Sync>(&self, g: G) -> f64 {
        let gl = GaussLegendre::g16();
        let npanels = self.values.len() / 16;
        (0..npanels)
            .into_par_iter()
            .map(|j| {
                let a = j as f64 * self.h;
                let vals = &self.values[16 * j..16 * j + 16];
                let p = |x: f64| barycentric(&gl.nodes, &self.bary, vals, x);
                // sign changes of the interpolant on a fine sampling
                let mut cuts = vec![-1.0];
                let ns = 48;
                let mut prev = p(-1.0);
                for i in 1..=ns {
                    let x = -1.0 + 2.0 * i as f64 / ns as f64;
                    let cur = p(x);
                    if prev * cur < 0.0 {
                        let (mut lo, mut hi) = (x - 2.0 / ns as f64, x);
                        let flo = prev;
                        for _ in 0..50 {
                            let mid = 0.5 * (lo + hi);
                            if p(mid) * flo > 0.0 {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        cuts.push(0.5 * (lo + hi));
                    }
                    prev = cur;
                }
                cuts.push(1.0);
                let mut acc = 0.0;
                for w in cuts.windows(2) {
                    for (x, wt) in gl.mapped(w[0], w[1]) {
                        let r = a + 0.5 * (x + 1.0) * self.h;
                        acc += wt * p(x).abs() * g(r);
                    }
                }
                acc * 0.5 * self.h
            })
            .sum()
    }
}

/// w(R) by the s-outer route: scale·∫ m(s) F_R(s) ds with F_R from [`eval_fr`].
pub fn profile_direct(sp: &DRSpace, pr: &FRProfile, m: &dyn Multiplier, r: f64) -> Result<Complex64> {
    direct_integral(m, r, |s| eval_fr(pr, sp, r, s))
}

/// w'(R) by the s-outer route, with ∂_R F_R from [`eval_dfr_dr`].
pub fn profile_direct_derivative(sp: &DRSpace, pr: &FRProfile, m: &dyn Multiplier, r: f64) -> Result<Complex64> {
    direct_integral(m, r, |s| eval_dfr_dr(pr, sp, r, s))
}

fn direct_integral<G: Fn(f64) -> Result<Complex64>>(m: &dyn Multiplier, r: f64, g: G) -> Result<Complex64> {
    let (lo, hi) = m.support();
    let width = std::f64::consts::PI / (4.0 * (1.0 + r + m.propagation()));
    let failed = std::cell::Cell::new(None);
    let f = |s: f64| -> Complex64 {
        let mv = m.eval(s);
        if mv == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match g(s) {
            Ok(v) => v * mv,
            Err(e) => {
                failed.set(Some(e));
                Complex64::new(0.0, 0.0)
            }
        }
    };
    // m even: ∫_R F_R m = ∫_{lo}^{hi} [F_R(s) + F_R(−s)] m(s) ds
    let res = integrate_panels(
        |s: f64| f(s) + f(-s),
        &uniform_edges(lo, hi, width),
        QuadOptions { abs_tol: 1e-13, rel_tol: 1e-10, max_intervals: 4000 },
    );
    if let Some(e) = failed.take() {
        return Err(e);
    }
    if !res.converged {
        return Err(crate::error::Error::QuadratureFailure { a: lo, b: hi, achieved: res.abs_err });
    }
    Ok(res.value)
}

/// F_R(s) + F_R(−s) cached on Gauss nodes in s for one R, shared by multipliers with a common support.
pub struct SampledProfile {
    r: f64,
    q: f64,
    nodes: Vec<(f64, f64, Complex64)>,
}

impl SampledProfile {
    /// Resolves multipliers supported in lo ≤ |s| ≤ hi with propagation up to `prop`.
    pub fn new(sp: &DRSpace, pr: &FRProfile, r: f64, lo: f64, hi: f64, prop: f64) -> Result<Self> {
        if !(hi > lo) || lo < 0.0 {
            return invalid(format!("bad support [{lo}, {hi}]"));
        }
        let sampler = FrSampler::new(pr, sp, r, hi)?;
        // at most 2 rad of phase per 16-point panel
        let width = 2.0 / (1.0 + r + prop);
        let gl = GaussLegendre::g16();
        let mut nodes = Vec::new();
        for e in uniform_edges(lo, hi, width).windows(2) {
            for (s, w) in gl.mapped(e[0], e[1]) {
                nodes.push((s, w, sampler.eval(s) + sampler.eval(-s)));
            }
        }
        Ok(SampledProfile { r, q: sp.q(), nodes })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// ∫ m(s) F_R(s) ds.
    pub fn value(&self, m: &dyn Multiplier) -> Complex64 {
        self.nodes.iter().map(|(s, w, f)| f * (m.eval(*s) * w)).sum()
    }

    /// e^{QR/2} Re ∫ m F_R ds.
    pub fn scaled_value(&self, m: &dyn Multiplier) -> f64 {
        self.value(m).re * (0.5 * self.q * self.r).exp()
    }

    /// Nodes s with weight × e^{QR/2} Re[F_R(s) + F_R(−s)].
    pub fn scaled_nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let e = (0.5 * self.q * self.r).exp();
        self.nodes.iter().map(move |(s, w, f)| (*s, w * f.re * e))
    }
}

/// k(x) = δ^{1/2}(x) w(R(x)).
pub fn kernel_at(sp: &DRSpace, kp: &KernelProfile, x: &SPoint) -> f64 {
    // δ^{1/2} e^{−QR/2} w̃(R) without overflow
    let r = sp.radius(x);
    let ld = -0.5 * sp.q() * x.a.ln() - 0.5 * sp.q() * r;
    kp.scaled_value(r) * ld.exp()
}
