use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::propagator::{gradient_norm_scaled, TimeScale, WaveKernel, WaveKernelSpec};
use crate::dr_space::{sphere_area, DRSpace, McEstimate};
use crate::error::{invalid, Result};
use crate::kernel::{KernelProfile, Multiplier, RadialTable};
use crate::spherical::SphericalFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// R^ε
    RPower,
    /// (1 + λR)^ε
    OnePlusLambdaR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Norm {
    pub value: f64,
    /// Radius where the table ends.
    pub r_end: f64,
    /// Integrand at the end of the table times r_end exceeded 1e-6 of the value.
    pub truncated: bool,
}

/// ∫_S δ^{1/2}|w(R)| g(R) dρ = ∫_0^∞ |w(r)| g(r) φ_0(r) A(r) dr for a tabulated w̃.
pub fn radial_l1(sp: &DRSpace, table: &RadialTable, g: impl Fn(f64) -> f64 + Sync) -> Result<L1Norm> {
    let r_end = table.r_end();
    let phi0 = SphericalFunction::new(sp, 0.0, r_end + 1e-9)?;
    let q = sp.q();
    let weight = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        g(r) * phi0.scaled(r) * (sp.ln_density_a(r) - q * r).exp()
    };
    let value = table.integrate_abs(weight);
    // largest integrand over the last panel
    let h = table.panel_width();
    let tail = (0..=16).map(|i| r_end - h * i as f64 / 16.0).map(|r| (table.scaled_value(r) * weight(r)).abs()).fold(0.0, f64::max);
    Ok(L1Norm { value, r_end, truncated: tail * r_end > 1e-6 * value })
}

/// ∫_S |k| weight dρ for the kernel of a multiplier.
pub fn multiplier_l1_norm(sp: &DRSpace, m: &dyn Multiplier, g: impl Fn(f64) -> f64 + Sync) -> Result<L1Norm> {
    let kp = KernelProfile::new(sp, m)?;
    radial_l1(sp, &kp.table(kp.reach()), g)
}

/// ∫_S |W^t_λ| R^ε dρ or ∫_S |W^t_λ| (1+λR)^ε dρ.
pub fn weighted_l1_norm(spec: &WaveKernelSpec, epsilon: f64, weight: WeightKind) -> Result<L1Norm> {
    if spec.time != TimeScale::PerLambda {
        return invalid("weighted L1 norms are defined for W^t_λ (time t/λ)");
    }
    if epsilon < 0.0 {
        return invalid(format!("ε must be ≥ 0, got {epsilon}"));
    }
    let lambda = spec.lambda;
    let g = move |r: f64| match weight {
        WeightKind::RPower => {
            if epsilon == 0.0 {
                1.0
            } else {
                r.powf(epsilon)
            }
        }
        WeightKind::OnePlusLambdaR => (1.0 + lambda * r).powf(epsilon),
    };
    multiplier_l1_norm(&spec.space, &spec.multiplier(), g)
}

/// Monte Carlo settings for [`gradient_l1_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub samples: usize,
    pub seed: u64,
    /// Share of samples spent on the pilot pass.
    pub pilot_share: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { samples: 100_000, seed: 0, pilot_share: 0.2 }
    }
}

/// ∫_S ‖∇W^t_λ‖ dρ by Monte Carlo in shell coordinates, stratified in R with Neyman allocation.
pub fn gradient_l1_norm(spec: &WaveKernelSpec, opts: McOptions) -> Result<McEstimate> {
    if spec.time != TimeScale::PerLambda {
        return invalid("the gradient L1 norm is defined for W^t_λ (time t/λ)");
    }
    let kernel = WaveKernel::new(spec)?;
    let table = kernel.table(kernel.reach());
    Ok(shell_monte_carlo(&spec.space, &table, opts))
}

/// Stratified estimate of ∫_S ‖∇(δ^{1/2} w(R))‖ dρ for a tabulated w̃.
pub fn shell_monte_carlo(sp: &DRSpace, table: &RadialTable, opts: McOptions) -> McEstimate {
    let integrand = |r: f64, l: f64, th: f64| -> f64 {
        let (w, dw) = table.scaled_with_derivative(r);
        let q = sp.q();
        let x = sp.shell_point(r, l, th);
        let g = gradient_norm_scaled(q, w, dw - 0.5 * q * w, sp.x0_radius(&x));
        g * scaled_shell_jacobian(sp, r, l, th)
    };
    stratified(sp, table, opts, integrand)
}

/// Shell Jacobian times δ^{1/2} e^{−QR/2}, free of a.
pub(crate) fn scaled_shell_jacobian(sp: &DRSpace, r: f64, l: f64, th: f64) -> f64 {
    let (mv, mz) = (sp.m_v() as f64, sp.m_z() as f64);
    let c = (0.5 * l).cosh();
    let ln_big = crate::dr_space::ln_cosh(0.5 * r);
    let alpha_minus_c = (ln_big.exp() * th.cos() - c).max(0.0);
    let mut ln = sp.haar_constant().ln() + sphere_area(sp.m_v()).ln() + sphere_area(sp.m_z()).ln();
    if mv > 2.0 {
        ln += 0.5 * (mv - 2.0) * (8.0 * alpha_minus_c).ln();
    }
    if mz > 1.0 {
        ln += (mz - 1.0) * (2.0f64.ln() + ln_big + th.sin().ln());
    }
    ln += std::f64::consts::LN_2 + crate::dr_space::ln_sinh(r) - 0.5 * sp.q() * r;
    ln.exp()
}

fn stratified(sp: &DRSpace, table: &RadialTable, opts: McOptions, f: impl Fn(f64, f64, f64) -> f64) -> McEstimate {
    let h = table.panel_width();
    let strata = (table.r_end() / h).round().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let sample = |rng: &mut ChaCha8Rng, k: usize| -> f64 {
        let r = (k as f64 + rng.gen::<f64>()) * h;
        let l = rng.gen_range(-r..r);
        let tmax = sp.shell_theta_max(r, l);
        let th = rng.gen::<f64>() * tmax;
        f(r, l, th) * h * 2.0 * r * tmax
    };
    // pilot: proportional to the radial mass |w̃| + |w̃'|/Q of each stratum
    let q = sp.q();
    let proxy: Vec<f64> = (0..strata)
        .map(|k| {
            let r = (k as f64 + 0.5) * h;
            let (w, dw) = table.scaled_with_derivative(r);
            (w.abs() + dw.abs() / q) * scaled_shell_jacobian(sp, r, 0.0, 0.0).max(1e-300) * r * r + 1e-300
        })
        .collect();
    let total_proxy: f64 = proxy.iter().sum();
    let pilot_total = (opts.samples as f64 * opts.pilot_share) as usize;
    let mut stats: Vec<(usize, f64, f64)> = vec![(0, 0.0, 0.0); strata];
    let push = |st: &mut (usize, f64, f64), x: f64| {
        st.0 += 1;
        let d = x - st.1;
        st.1 += d / st.0 as f64;
        st.2 += d * (x - st.1);
    };
    for k in 0..strata {
        let nk = ((pilot_total as f64 * proxy[k] / total_proxy) as usize).max(4);
        for _ in 0..nk {
            let x = sample(&mut rng, k);
            push(&mut stats[k], x);
        }
    }
    let used: usize = stats.iter().map(|s| s.0).sum();
    let remaining = opts.samples.saturating_sub(used);
    let sigma: Vec<f64> = stats.iter().map(|s| (s.2 / (s.0 - 1) as f64).sqrt()).collect();
    let total_sigma: f64 = sigma.iter().sum();
    if total_sigma > 0.0 {
        for k in 0..strata {
            let nk = (remaining as f64 * sigma[k] / total_sigma).round() as usize;
            for _ in 0..nk {
                let x = sample(&mut rng, k);
                push(&mut stats[k], x);
            }
        }
    }
    let mean: f64 = stats.iter().map(|s| s.1).sum();
    let var: f64 = stats.iter().map(|s| s.2 / ((s.0 - 1) as f64) / s.0 as f64).sum();
    McEstimate { mean, stderr: var.sqrt(), samples: stats.iter().map(|s| s.0).sum() }
}

/// Stratified shell estimate of ∫_S δ^{1/2}|w(R)| dρ, a cross-check of [`radial_l1`].
pub fn shell_monte_carlo_value(sp: &DRSpace, table: &RadialTable, opts: McOptions) -> McEstimate {
    let integrand = |r: f64, l: f64, th: f64| table.scaled_value(r).abs() * scaled_shell_jacobian(sp, r, l, th);
    stratified(sp, table, opts, integrand)
}

/// sup_x |k(x)| = sup_R e^{QR/2}|w(R)| with its location.
pub fn sup_norm(table: &RadialTable) -> (f64, f64) {
    let per_panel = 64;
    let n = ((table.r_end() / table.panel_width()).round() as usize) * per_panel;
    let mut best = (0.0f64, 0.0f64);
    for i in 0..=n {
        let r = table.r_end() * i as f64 / n as f64;
        let v = table.scaled_value(r).abs();
        if v > best.0 {
            best = (v, r);
        }
    }
    // golden-section polish around the sampled maximum
    let d = table.r_end() / n as f64;
    let (mut a, mut b) = ((best.1 - d).max(0.0), (best.1 + d).min(table.r_end()));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let e = a + g * (b - a);
        if table.scaled_value(c).abs() > table.scaled_value(e).abs() {
            b = e;
        } else {
            a = c;
        }
    }
    let m = 0.5 * (a + b);
    let v = table.scaled_value(m).abs();
    if v > best.0 {
        best = (v, m);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::super::bump::{BumpFunction, SupportClass};
    use super::*;
    use crate::dr_space::SPoint;

    #[test]
    fn zero_multiplier_has_zero_norm() {
        let sp = DRSpace::heisenberg();
        let m = crate::kernel::FnMultiplier::new(|_| 0.0, 1.0, 2.0);
        let kp = KernelProfile::with_reach(&sp, &m, Some(5.0)).unwrap();
        let r = radial_l1(&sp, &kp.table(5.0), |_| 1.0).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn radial_route_matches_shell_and_coordinate_monte_carlo() {
        let sp = DRSpace::heisenberg();
        let spec = WaveKernelSpec::w(&sp, BumpFunction::gauss(SupportClass::Annular), 2.0, 2.0).unwrap();
        let kernel = WaveKernel::new(&spec).unwrap();
        let table = kernel.table(kernel.reach());
        let exact = radial_l1(&sp, &table, |_| 1.0).unwrap().value;
        let shell = shell_monte_carlo_value(&sp, &table, McOptions { samples: 40_000, seed: 3, pilot_share: 0.2 });
        assert!((shell.mean - exact).abs() < 4.0 * shell.stderr + 1e-3 * exact, "{shell:?} vs {exact}");
        let r_cut = 8.0;
        let short = table.clone();
        let coord = sp.monte_carlo_coordinates(
            |x: &SPoint| {
                let r = sp.radius(x);
                if r > r_cut {
                    0.0
                } else {
                    short.scaled_value(r).abs() * (-0.5 * sp.q() * (x.a.ln() + r)).exp()
                }
            },
            r_cut,
            200_000,
            5,
        );
        let cut = radial_l1(&sp, &kernel.profile().table(r_cut), |_| 1.0).unwrap().value;
        assert!((coord.mean - cut).abs() < 5.0 * coord.stderr, "{coord:?} vs {cut}");
    }

    #[test]
    fn gradient_monte_carlo_is_reproducible() {
        let sp = DRSpace::heisenberg();
        let spec = WaveKernelSpec::w(&sp, BumpFunction::gauss(SupportClass::Annular), 2.0, 1.0).unwrap();
        let opts = McOptions { samples: 20_000, seed: 11, pilot_share: 0.2 };
        let a = gradient_l1_norm(&spec, opts).unwrap();
        let b = gradient_l1_norm(&spec, opts).unwrap();
        assert_eq!(a, b);
        assert!(a.rel_err() < 0.03);
    }
}
