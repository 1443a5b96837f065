use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bump::BumpFunction;
use crate::abel_calculus::build_fr_symbol;
use crate::dr_space::{DRSpace, SPoint};
use crate::error::{invalid, Result};
use crate::kernel::{profile_direct, profile_direct_derivative, KernelProfile, Multiplier, RadialTable};
use crate::spherical::R_CLAMP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// cos(ts)
    Cosine,
    /// sin(ts)/s
    Sinc,
}

/// Time convention of a wave kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScale {
    /// k^t_λ: multiplier ψ(s/λ) cos(ts)
    Plain,
    /// W^t_λ = k^{t/λ}_λ
    PerLambda,
}

#[derive(Debug, Clone)]
pub struct WaveKernelSpec {
    pub space: DRSpace,
    pub psi: BumpFunction,
    pub t: f64,
    pub lambda: f64,
    pub flavor: Flavor,
    pub time: TimeScale,
}

impl WaveKernelSpec {
    /// k^t_λ.
    pub fn k(space: &DRSpace, psi: BumpFunction, lambda: f64, t: f64) -> Result<Self> {
        Self::new(space, psi, lambda, t, Flavor::Cosine, TimeScale::Plain)
    }

    /// W^t_λ = k^{t/λ}_λ.
    pub fn w(space: &DRSpace, psi: BumpFunction, lambda: f64, t: f64) -> Result<Self> {
        Self::new(space, psi, lambda, t, Flavor::Cosine, TimeScale::PerLambda)
    }

    pub fn new(space: &DRSpace, psi: BumpFunction, lambda: f64, t: f64, flavor: Flavor, time: TimeScale) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return invalid(format!("λ must be positive, got {lambda}"));
        }
        if !t.is_finite() {
            return invalid("t must be finite");
        }
        psi.check_lambda(lambda)?;
        Ok(WaveKernelSpec { space: space.clone(), psi, t, lambda, flavor, time })
    }

    /// Time entering cos(τs).
    pub fn propagation_time(&self) -> f64 {
        match self.time {
            TimeScale::Plain => self.t,
            TimeScale::PerLambda => self.t / self.lambda,
        }
    }

    pub fn multiplier(&self) -> WaveMultiplier {
        WaveMultiplier { psi: self.psi, lambda: self.lambda, tau: self.propagation_time(), flavor: self.flavor }
    }
}

/// s ↦ ψ(s/λ) cos(τs) or ψ(s/λ) sin(τs)/s.
#[derive(Debug, Clone, Copy)]
pub struct WaveMultiplier {
    pub psi: BumpFunction,
    pub lambda: f64,
    pub tau: f64,
    pub flavor: Flavor,
}

impl Multiplier for WaveMultiplier {
    fn eval(&self, s: f64) -> f64 {
        let p = self.psi.eval(s / self.lambda);
        if p == 0.0 {
            return 0.0;
        }
        match self.flavor {
            Flavor::Cosine => p * (self.tau * s).cos(),
            Flavor::Sinc => {
                let x = self.tau * s;
                // sin(τs)/s → τ at s = 0
                if x.abs() < 1e-8 {
                    p * self.tau * (1.0 - x * x / 6.0)
                } else {
                    p * x.sin() / s
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.psi.support();
        (lo * self.lambda, hi * self.lambda)
    }

    fn propagation(&self) -> f64 {
        self.tau.abs()
    }
}

/// k(x) for a spec, by direct s-quadrature of ψ(s/λ)cos(ts)F_R(s); R is clamped to 1e-4 near e.
pub fn wave_kernel(spec: &WaveKernelSpec, x: &SPoint) -> Result<Complex64> {
    let sp = &spec.space;
    let pr = build_fr_symbol(sp)?;
    let r = sp.radius(x).max(R_CLAMP);
    Ok(profile_direct(sp, &pr, &spec.multiplier(), r)? * sp.sqrt_delta(x))
}

/// X_i k(x) by direct s-quadrature, with ∂_R F_R and X_iR from finite differences of R.
pub fn gradient_wave_kernel(spec: &WaveKernelSpec, x: &SPoint, i: usize) -> Result<Complex64> {
    let sp = &spec.space;
    if i >= sp.n() {
        return invalid(format!("direction {i} out of range for dimension {}", sp.n()));
    }
    let pr = build_fr_symbol(sp)?;
    let m = spec.multiplier();
    let r = sp.radius(x).max(R_CLAMP);
    let xr = sp.left_derivative(&|y: &SPoint| sp.radius(y), x, i);
    let mut acc = profile_direct_derivative(sp, &pr, &m, r)? * xr;
    if i == 0 {
        acc -= profile_direct(sp, &pr, &m, r)? * (0.5 * sp.q());
    }
    Ok(acc * sp.sqrt_delta(x))
}

/// Radial profile of a wave kernel through the moment engine.
#[derive(Clone)]
pub struct WaveKernel {
    spec: WaveKernelSpec,
    profile: KernelProfile,
}

impl WaveKernel {
    pub fn new(spec: &WaveKernelSpec) -> Result<Self> {
        let profile = KernelProfile::new(&spec.space, &spec.multiplier())?;
        Ok(WaveKernel { spec: spec.clone(), profile })
    }

    /// Accurate for R ≤ `reach`, zero beyond.
    pub fn with_reach(spec: &WaveKernelSpec, reach: f64) -> Result<Self> {
        let profile = KernelProfile::with_reach(&spec.space, &spec.multiplier(), Some(reach))?;
        Ok(WaveKernel { spec: spec.clone(), profile })
    }

    pub fn spec(&self) -> &WaveKernelSpec {
        &self.spec
    }

    pub fn profile(&self) -> &KernelProfile {
        &self.profile
    }

    pub fn reach(&self) -> f64 {
        self.profile.reach()
    }

    /// e^{QR/2} w(R) where k = δ^{1/2} w(R).
    pub fn scaled_profile(&self, r: f64) -> f64 {
        self.profile.scaled_value(r)
    }

    pub fn at(&self, x: &SPoint) -> f64 {
        crate::kernel::kernel_at(&self.spec.space, &self.profile, x)
    }

    /// X_i k(x) = δ^{1/2}[w'(R) X_iR − (Q/2) w(R) 1_{i=0}].
    pub fn gradient(&self, x: &SPoint, i: usize) -> f64 {
        let sp = &self.spec.space;
        let r = sp.radius(x);
        let xr = if i == 0 { sp.x0_radius(x) } else { sp.left_derivative(&|y: &SPoint| sp.radius(y), x, i) };
        let q = sp.q();
        let mut g = self.profile.scaled_derivative(r) * xr;
        if i == 0 {
            g -= 0.5 * q * self.profile.scaled_value(r);
        }
        g * (-0.5 * q * (x.a.ln() + r)).exp()
    }

    /// ‖∇k(x)‖, using |∇R| = 1.
    pub fn gradient_norm(&self, x: &SPoint) -> f64 {
        let sp = &self.spec.space;
        let r = sp.radius(x);
        let q = sp.q();
        let w = self.profile.scaled_value(r);
        let dw = self.profile.scaled_derivative(r);
        gradient_norm_scaled(q, w, dw, sp.x0_radius(x)) * (-0.5 * q * (x.a.ln() + r)).exp()
    }

    pub fn table(&self, r_end: f64) -> RadialTable {
        self.profile.table(r_end)
    }
}

/// e^{QR/2}δ^{−1/2}‖∇k‖ from w̃, (e^{QR/2}w') and X_0R.
pub(crate) fn gradient_norm_scaled(q: f64, w: f64, dw: f64, x0r: f64) -> f64 {
    let h = 0.5 * q;
    (h * h * w * w - q * w * dw * x0r + dw * dw).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::super::bump::SupportClass;
    use super::*;

    #[test]
    fn time_conventions() {
        let sp = DRSpace::heisenberg();
        let b = BumpFunction::gauss(SupportClass::Annular);
        let w = WaveKernelSpec::w(&sp, b, 4.0, 2.0).unwrap();
        let k = WaveKernelSpec::k(&sp, b, 4.0, 0.5).unwrap();
        assert_eq!(w.propagation_time(), k.propagation_time());
        assert!(WaveKernelSpec::k(&sp, BumpFunction::gauss(SupportClass::Full), 2.0, 1.0).is_err());
        assert!(WaveKernelSpec::k(&sp, b, 0.0, 1.0).is_err());
    }

    #[test]
    fn sinc_limit_at_zero() {
        let m = WaveMultiplier { psi: BumpFunction::gauss(SupportClass::Full), lambda: 0.5, tau: 3.0, flavor: Flavor::Sinc };
        assert!((m.eval(0.0) - 3.0).abs() < 1e-15);
        assert!((m.eval(1e-6) - (3e-6f64).sin() / 1e-6 * m.psi.eval(2e-6)).abs() < 1e-12);
    }

    #[test]
    fn fast_matches_direct_and_is_even_in_t() {
        for sp in [DRSpace::heisenberg(), DRSpace::quaternionic(2).unwrap()] {
            let b = BumpFunction::gauss(SupportClass::Annular);
            let spec = WaveKernelSpec::k(&sp, b, 4.0, 1.0).unwrap();
            let neg = WaveKernelSpec::k(&sp, b, 4.0, -1.0).unwrap();
            let fast = WaveKernel::new(&spec).unwrap();
            let x = sp.shell_point(1.5, 0.3, 0.2);
            let d = wave_kernel(&spec, &x).unwrap();
            let dn = wave_kernel(&neg, &x).unwrap();
            assert!((d - dn).norm() < 1e-10 * d.norm().max(1.0));
            assert!(d.im.abs() < 1e-9);
            assert!((fast.at(&x) - d.re).abs() < 1e-7 * d.re.abs().max(1e-3), "{} vs {}", fast.at(&x), d.re);
        }
    }

    #[test]
    fn gradient_routes_agree() {
        let sp = DRSpace::heisenberg();
        let b = BumpFunction::gauss(SupportClass::Annular);
        let spec = WaveKernelSpec::k(&sp, b, 4.0, 1.0).unwrap();
        let fast = WaveKernel::new(&spec).unwrap();
        let x = sp.shell_point(1.5, 0.4, 0.3);
        let mut norm2 = 0.0;
        for i in 0..sp.n() {
            let g = gradient_wave_kernel(&spec, &x, i).unwrap().re;
            let f = fast.gradient(&x, i);
            let fd = sp.left_derivative(&|y: &SPoint| fast.at(y), &x, i);
            assert!((g - f).abs() < 1e-5 * g.abs().max(1e-2), "i={i}: {g} vs {f}");
            assert!((fd - f).abs() < 1e-5 * f.abs().max(1e-2), "i={i}: {fd} vs {f}");
            norm2 += f * f;
        }
        assert!((norm2.sqrt() - fast.gradient_norm(&x)).abs() < 1e-6 * norm2.sqrt());
    }
}
