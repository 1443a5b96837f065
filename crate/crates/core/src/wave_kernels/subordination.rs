use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::dyadic::{smooth_step, Symbol};
use super::norms::{multiplier_l1_norm, L1Norm};
use crate::abel_calculus::build_fr_symbol;
use crate::dr_space::DRSpace;
use crate::error::{invalid, Result};
use crate::kernel::{FnMultiplier, KernelProfile, SampledProfile};
use crate::quad::{uniform_edges, GaussLegendre};

const V_HALF_WIDTH: f64 = 8.0;
const V_POINTS: usize = 4096;
const FHAT_FLOOR: f64 = 1e-10;
/// Plateau cutoff: 1 on [1, 2], supported in [3/4, 3].
const PLATEAU: (f64, f64, f64, f64) = (0.75, 1.0, 2.0, 3.0);

fn plateau(x: f64) -> f64 {
    let x = x.abs();
    let (a, b, c, d) = PLATEAU;
    smooth_step((x - a) / (b - a)) * smooth_step((d - x) / (d - c))
}

/// f̂(t) for f(v) = F(v²), by the trapezoid rule on [−8, 8].
#[derive(Debug, Clone, Serialize)]
pub struct FourierProfile {
    #[serde(skip)]
    samples: Vec<(f64, f64)>,
    dv: f64,
    /// Last time where |f̂(t)|(1+t) ≥ 1e-10, at most 0.9π/Δv.
    pub t_cut: f64,
    /// The floor was not reached before the aliasing cap.
    pub capped: bool,
}

impl FourierProfile {
    pub fn new(f: &dyn Fn(f64) -> f64) -> Self {
        let dv = 2.0 * V_HALF_WIDTH / V_POINTS as f64;
        // the trapezoid end weights vanish with f at ±8
        let samples: Vec<(f64, f64)> = (0..=V_POINTS)
            .map(|i| -V_HALF_WIDTH + dv * i as f64)
            .map(|v| (v, f(v * v)))
            .filter(|p| p.1 != 0.0)
            .collect();
        let mut fp = FourierProfile { samples, dv, t_cut: 0.0, capped: false };
        let cap = 0.9 * PI / dv;
        let step = 0.05;
        let mut last = 0.0;
        let mut t = 0.0;
        while t <= cap {
            if fp.eval(t).abs() * (1.0 + t) >= FHAT_FLOOR {
                last = t;
            }
            t += step;
        }
        fp.capped = last + 1.0 > cap;
        fp.t_cut = if fp.capped { cap } else { last + step };
        fp
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.samples.iter().map(|(v, y)| y * (t * v).cos()).sum::<f64>() * self.dv
    }

    pub fn is_zero(&self) -> bool {
        self.samples.is_empty()
    }

    /// Gauss nodes (t, weight, f̂(t)) on [0, t_cut].
    fn nodes(&self, width: f64) -> Vec<(f64, f64, f64)> {
        let gl = GaussLegendre::g16();
        let mut out = Vec::new();
        for e in uniform_edges(0.0, self.t_cut, width).windows(2) {
            for (t, w) in gl.mapped(e[0], e[1]) {
                out.push((t, w, self.eval(t)));
            }
        }
        out
    }

    /// (1/2π ∫ |f̂|²(1+t²)^{s} dt)^{1/2} over |t| ≤ t_cut.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let acc: f64 = self.nodes(0.25).iter().map(|(t, w, f)| w * f * f * (1.0 + t * t).powf(s)).sum();
        (acc / PI).sqrt()
    }
}

/// Kernel profile of F(L/λ²) at one radius by two routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubordinationRow {
    pub lambda: f64,
    pub r: f64,
    /// (1/π)∫_0^{t_cut} f̂(t) W^t_λ(r) dt, scaled by e^{Qr/2}.
    pub via_time: f64,
    /// Direct kernel of the multiplier F(s²/λ²), scaled by e^{Qr/2}.
    pub via_multiplier: f64,
    pub rel_err: f64,
    pub t_cut: f64,
    pub capped: bool,
}

fn check_support(f: &dyn Fn(f64) -> f64) -> Result<()> {
    for i in 0..=400 {
        let y = 3.0 * i as f64 / 400.0;
        if !(1.0..=2.0).contains(&y) && f(y) != 0.0 {
            return invalid(format!("F must vanish outside [1, 2], F({y}) = {}", f(y)));
        }
    }
    Ok(())
}

/// k_{F(L/λ²)} at radius r through the wave propagator and directly.
pub fn subordination_kernel(sp: &DRSpace, f: Symbol, lambda: f64, r: f64) -> Result<SubordinationRow> {
    if !(lambda > 0.0) {
        return invalid(format!("λ must be positive, got {lambda}"));
    }
    if !(r > 0.0) {
        return invalid(format!("r must be positive, got {r}"));
    }
    check_support(&*f)?;
    let fp = FourierProfile::new(&*f);
    let direct = {
        let g = f.clone();
        let m = FnMultiplier::new(move |s: f64| g(s * s / (lambda * lambda)), lambda, 2f64.sqrt() * lambda);
        if fp.is_zero() {
            0.0
        } else {
            KernelProfile::with_reach(sp, &m, Some(r + 1.0))?.scaled_value(r)
        }
    };
    let via_time = if fp.is_zero() {
        0.0
    } else {
        let (a, _, _, d) = PLATEAU;
        let pr = build_fr_symbol(sp)?;
        let tau_max = fp.t_cut / lambda;
        let sampled = SampledProfile::new(sp, &pr, r, a * lambda, d * lambda, tau_max)?;
        let base: Vec<(f64, f64)> = sampled.scaled_nodes().map(|(s, g)| (s / lambda, g * plateau(s / lambda))).collect();
        let mut acc = 0.0;
        // W^t_λ(r) at each time node
        for (t, w, fh) in fp.nodes(0.5) {
            let wt: f64 = base.iter().map(|(x, g)| g * (t * x).cos()).sum();
            acc += w * fh * wt;
        }
        acc / PI
    };
    let rel_err = if direct == 0.0 { via_time.abs() } else { (via_time - direct).abs() / direct.abs() };
    Ok(SubordinationRow { lambda, r, via_time, via_multiplier: direct, rel_err, t_cut: fp.t_cut, capped: fp.capped })
}

/// ∫_S |k_{F(L/λ²)}| (1+λR)^ε dρ, its Sobolev reference ‖F‖_{H^{s₁}} with s₁ = n/2 + ε + 0.1, and their ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryRow {
    pub lambda: f64,
    pub epsilon: f64,
    pub norm: L1Norm,
    pub sobolev: f64,
    pub ratio: f64,
}

pub fn corollary_norm(sp: &DRSpace, f: Symbol, lambda: f64, eps: f64) -> Result<CorollaryRow> {
    check_support(&*f)?;
    let fp = FourierProfile::new(&*f);
    let s1 = 0.5 * sp.n() as f64 + eps + 0.1;
    let g = f.clone();
    let m = FnMultiplier::new(move |s: f64| g(s * s / (lambda * lambda)), lambda, 2f64.sqrt() * lambda);
    let norm = multiplier_l1_norm(sp, &m, |r| (1.0 + lambda * r).powf(eps))?;
    let sobolev = fp.sobolev_norm(s1);
    Ok(CorollaryRow { lambda, epsilon: eps, norm, sobolev, ratio: norm.value / sobolev })
}

/// Smooth bump F(y) = exp(1 − 1/(1−x²)), x = 2(y − 3/2), supported in [1, 2].
pub fn default_f() -> Symbol {
    Arc::new(|y: f64| {
        let x = 2.0 * (y - 1.5);
        if x.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - x * x)).exp()
        }
    })
}
