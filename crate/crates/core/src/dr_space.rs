//! The solvable extension S = N ⋊ R⁺ of an H-type group.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::htype_group::{dot, AlgebraDescriptor, HTypeAlgebra};
use crate::numdiff;
use crate::quad::{integrate_panels, uniform_edges, QuadOptions};

/// Finite-difference step for first derivatives along one-parameter subgroups.
pub const FD_STEP: f64 = 1e-4;
/// Step for second derivatives, where rounding scales like 1/h².
pub const FD_STEP2: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct DRSpace {
    algebra: HTypeAlgebra,
    n: usize,
    two_q: usize,
}

/// Element (v, z, a) of S.
#[derive(Debug, Clone, PartialEq)]
pub struct SPoint {
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    pub a: f64,
}

impl SPoint {
    pub fn new(v: Vec<f64>, z: Vec<f64>, a: f64) -> Self {
        SPoint { v, z, a }
    }

    /// Flat layout [v..., z..., a].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.v.clone();
        out.extend_from_slice(&self.z);
        out.push(self.a);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub algebra: AlgebraDescriptor,
}

/// Unit sphere area in R^d.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI * sphere_area(d - 2) / (d - 2) as f64,
    }
}

// ln cosh and ln sinh without overflow
pub(crate) fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

pub(crate) fn ln_sinh(x: f64) -> f64 {
    if x < 1.0 {
        x.sinh().ln()
    } else {
        x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2
    }
}

impl DRSpace {
    pub fn new(algebra: HTypeAlgebra) -> Result<Self> {
        if !algebra.verify() {
            return invalid("algebra is not of H-type");
        }
        if !algebra.m_v().is_multiple_of(2) {
            return invalid("m_v must be even");
        }
        let n = algebra.dim();
        let two_q = algebra.two_q();
        Ok(DRSpace { algebra, n, two_q })
    }

    pub fn from_descriptor(d: &SpaceDescriptor) -> Result<Self> {
        DRSpace::new(d.algebra.build()?)
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        SpaceDescriptor { algebra: self.algebra.descriptor() }
    }

    /// Heisenberg k = 1: m_v = 2, m_z = 1.
    pub fn heisenberg() -> Self {
        DRSpace::new(HTypeAlgebra::complex_heisenberg(1).expect("k = 1")).expect("H-type")
    }

    /// Quaternionic k = 1 with the given m_z.
    pub fn quaternionic(m_z: usize) -> Result<Self> {
        DRSpace::new(HTypeAlgebra::quaternionic(1, m_z)?)
    }

    pub fn algebra(&self) -> &HTypeAlgebra {
        &self.algebra
    }

    pub fn m_v(&self) -> usize {
        self.algebra.m_v()
    }

    pub fn m_z(&self) -> usize {
        self.algebra.m_z()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn two_q(&self) -> usize {
        self.two_q
    }

    pub fn q(&self) -> f64 {
        self.two_q as f64 / 2.0
    }

    pub fn mz_even(&self) -> bool {
        self.m_z().is_multiple_of(2)
    }

    pub fn point_from_flat(&self, flat: &[f64]) -> Result<SPoint> {
        let (mv, mz) = (self.m_v(), self.m_z());
        if flat.len() != mv + mz + 1 {
            return invalid(format!("expected {} coordinates, got {}", mv + mz + 1, flat.len()));
        }
        let a = flat[mv + mz];
        if !(a > 0.0) {
            return invalid("a must be positive");
        }
        Ok(SPoint::new(flat[..mv].to_vec(), flat[mv..mv + mz].to_vec(), a))
    }

    pub fn identity(&self) -> SPoint {
        SPoint::new(vec![0.0; self.m_v()], vec![0.0; self.m_z()], 1.0)
    }

    /// (0, 0, a).
    pub fn a_point(&self, a: f64) -> SPoint {
        SPoint::new(vec![0.0; self.m_v()], vec![0.0; self.m_z()], a)
    }

    pub fn s_multiply(&self, x: &SPoint, y: &SPoint) -> SPoint {
        let sa = x.a.sqrt();
        let br = self.algebra.bracket(&x.v, &y.v);
        SPoint {
            v: x.v.iter().zip(&y.v).map(|(a, b)| a + sa * b).collect(),
            z: (0..self.m_z()).map(|i| x.z[i] + x.a * y.z[i] + 0.5 * sa * br[i]).collect(),
            a: x.a * y.a,
        }
    }

    pub fn s_inverse(&self, x: &SPoint) -> SPoint {
        let isa = 1.0 / x.a.sqrt();
        SPoint {
            v: x.v.iter().map(|v| -isa * v).collect(),
            z: x.z.iter().map(|z| -z / x.a).collect(),
            a: 1.0 / x.a,
        }
    }

    /// δ(v, z, a) = a^{-Q}.
    pub fn modular_delta(&self, x: &SPoint) -> f64 {
        x.a.powf(-self.q())
    }

    /// δ^{1/2}.
    pub fn sqrt_delta(&self, x: &SPoint) -> f64 {
        x.a.powf(-0.5 * self.q())
    }

    /// R(x) = d(x, e), through sinh²(R/2) = cosh²(R/2) − 1 kept free of cancellation.
    pub fn radius(&self, x: &SPoint) -> f64 {
        radius_from(dot(&x.v, &x.v), dot(&x.z, &x.z), x.a)
    }

    /// X_0 R(x) = a ∂R/∂a, undefined at e.
    pub fn x0_radius(&self, x: &SPoint) -> f64 {
        x0_radius_from(dot(&x.v, &x.v), dot(&x.z, &x.z), x.a)
    }

    pub fn distance(&self, x: &SPoint, y: &SPoint) -> f64 {
        self.radius(&self.s_multiply(&self.s_inverse(x), y))
    }

    /// A(r) = 2^{m_v+2m_z} sinh^{m_v+m_z}(r/2) cosh^{m_z}(r/2).
    pub fn density_a(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.ln_density_a(r).exp()
    }

    pub fn ln_density_a(&self, r: f64) -> f64 {
        let (mv, mz) = (self.m_v() as f64, self.m_z() as f64);
        (mv + 2.0 * mz) * std::f64::consts::LN_2 + (mv + mz) * ln_sinh(0.5 * r) + mz * ln_cosh(0.5 * r)
    }

    /// A'/A = ((m_v+m_z)/2) coth(r/2) + (m_z/2) tanh(r/2).
    pub fn density_log_derivative(&self, r: f64) -> f64 {
        let (mv, mz) = (self.m_v() as f64, self.m_z() as f64);
        0.5 * (mv + mz) / (0.5 * r).tanh() + 0.5 * mz * (0.5 * r).tanh()
    }

    /// Normalization of ρ = c a^{-1} dv dz da matching the density A.
    pub fn haar_constant(&self) -> f64 {
        2f64.powi(self.m_z() as i32) / sphere_area(self.n)
    }

    /// ∫_0^{r_max} f(r) A(r) dr.
    pub fn radial_integral<F: Fn(f64) -> f64>(&self, f: F, r_max: f64) -> RadialIntegral {
        let g = |r: f64| f(r) * self.density_a(r);
        let edges = uniform_edges(0.0, r_max, 1.0);
        let res = integrate_panels(g, &edges, QuadOptions { abs_tol: 1e-10, rel_tol: 1e-13, max_intervals: 5000 });
        let tail = g(r_max).abs();
        RadialIntegral {
            value: res.value,
            abs_err: res.abs_err,
            converged: res.converged,
            truncated: tail > 1e-14,
        }
    }

    /// x · exp(t X_i).
    pub fn along(&self, x: &SPoint, i: usize, t: f64) -> SPoint {
        let (mv, mz) = (self.m_v(), self.m_z());
        let mut step = self.identity();
        if i == 0 {
            step.a = t.exp();
        } else if i <= mv {
            step.v[i - 1] = t;
        } else {
            debug_assert!(i <= mv + mz);
            step.z[i - 1 - mv] = t;
        }
        self.s_multiply(x, &step)
    }

    /// X_i f(x), with index 0 the A-direction, then the v-block, then the z-block.
    pub fn left_derivative<F: Fn(&SPoint) -> f64>(&self, f: &F, x: &SPoint, i: usize) -> f64 {
        self.left_derivative_with(f, x, i, FD_STEP)
    }

    pub fn left_derivative_with<F: Fn(&SPoint) -> f64>(&self, f: &F, x: &SPoint, i: usize, h: f64) -> f64 {
        let g = |t: f64| f(&self.along(x, i, t));
        numdiff::richardson(&g, 0.0, h)
    }

    pub fn gradient<F: Fn(&SPoint) -> f64>(&self, f: &F, x: &SPoint) -> Vec<f64> {
        (0..self.n).map(|i| self.left_derivative(f, x, i)).collect()
    }

    pub fn gradient_norm<F: Fn(&SPoint) -> f64>(&self, f: &F, x: &SPoint) -> f64 {
        self.gradient(f, x).iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// L f = −Σ X_i² f.
    pub fn laplacian_fd<F: Fn(&SPoint) -> f64>(&self, f: &F, x: &SPoint) -> f64 {
        self.laplacian_fd_with(f, x, FD_STEP2, true)
    }

    pub fn laplacian_fd_with<F: Fn(&SPoint) -> f64>(&self, f: &F, x: &SPoint, h: f64, richardson: bool) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let g = |t: f64| f(&self.along(x, i, t));
            acc += if richardson { numdiff::richardson2(&g, 0.0, h) } else { numdiff::central2(&g, 0.0, h) };
        }
        -acc
    }

    /// Point (v, z, a) of radius `r` with v and z along the first basis vectors.
    ///
    /// `theta` in [0, theta_max(l, r)] splits cosh(r/2) between the v and z terms and `l = log a`.
    pub fn shell_point(&self, r: f64, l: f64, theta: f64) -> SPoint {
        let c = (0.5 * l).cosh();
        let big = (0.5 * r).cosh();
        let sa = (0.5 * l).exp();
        let alpha = big * theta.cos();
        let beta = big * theta.sin();
        let rv = (8.0 * sa * (alpha - c).max(0.0)).sqrt();
        let rz = 2.0 * sa * beta;
        let mut x = self.a_point(sa * sa);
        x.v[0] = rv;
        x.z[0] = rz;
        x
    }

    pub fn shell_theta_max(&self, r: f64, l: f64) -> f64 {
        ((0.5 * l).cosh() / (0.5 * r).cosh()).min(1.0).acos()
    }

    /// Density of ρ in the coordinates (r, l, theta) of [`DRSpace::shell_point`].
    pub fn shell_jacobian(&self, r: f64, l: f64, theta: f64) -> f64 {
        let (mv, mz) = (self.m_v(), self.m_z());
        let c = (0.5 * l).cosh();
        let big = (0.5 * r).cosh();
        let sa = (0.5 * l).exp();
        let rv2 = 8.0 * sa * (big * theta.cos() - c).max(0.0);
        let rz = 2.0 * sa * big * theta.sin();
        self.haar_constant()
            * sphere_area(mv)
            * sphere_area(mz)
            * rv2.powi((mv as i32 - 2) / 2)
            * rz.powi(mz as i32 - 1)
            * 2.0
            * sa
            * sa
            * r.sinh()
    }

    /// Monte Carlo estimate of ∫_S f dρ over coordinates, for f supported in {R ≤ r_cut}.
    ///
    /// log a is uniform on [−r_cut, r_cut]; v and z are uniform in the balls allowed by the cut.
    pub fn monte_carlo_coordinates<F: Fn(&SPoint) -> f64>(
        &self,
        f: F,
        r_cut: f64,
        samples: usize,
        seed: u64,
    ) -> McEstimate {
        let (mv, mz) = (self.m_v(), self.m_z());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = (0.5 * r_cut).cosh();
        let mut acc = McAccumulator::default();
        for _ in 0..samples {
            let l: f64 = rng.gen_range(-r_cut..r_cut);
            let sa = (0.5 * l).exp();
            let c = (0.5 * l).cosh();
            let rv = (8.0 * sa * (ch - c)).sqrt();
            let rz = 2.0 * sa * (ch * ch - c * c).sqrt();
            let v: Vec<f64> = ball_sample(&mut rng, mv).into_iter().map(|x| rv * x).collect();
            let z: Vec<f64> = ball_sample(&mut rng, mz).into_iter().map(|x| rz * x).collect();
            let vol = ball_volume(mv) * rv.powi(mv as i32) * ball_volume(mz) * rz.powi(mz as i32);
            let x = SPoint::new(v, z, sa * sa);
            acc.push(self.haar_constant() * 2.0 * r_cut * vol * f(&x));
        }
        acc.finish()
    }
}

pub(crate) fn radius_from(v2: f64, z2: f64, a: f64) -> f64 {
    let l = a.ln();
    let sa = (0.5 * l).exp();
    let t1m = 2.0 * (0.25 * l).sinh().powi(2) + v2 / (8.0 * sa);
    let s2 = t1m * (t1m + 2.0) + z2 / (4.0 * a);
    2.0 * s2.sqrt().asinh()
}

pub(crate) fn x0_radius_from(v2: f64, z2: f64, a: f64) -> f64 {
    let l = a.ln();
    let sa = (0.5 * l).exp();
    let t1m = 2.0 * (0.25 * l).sinh().powi(2) + v2 / (8.0 * sa);
    let s2 = t1m * (t1m + 2.0) + z2 / (4.0 * a);
    let dt = 0.5 * (0.5 * l).sinh() - v2 / (16.0 * sa);
    let ds2 = 2.0 * (t1m + 1.0) * dt - z2 / (4.0 * a);
    ds2 / (s2.sqrt() * (1.0 + s2).sqrt())
}

fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

fn ball_sample<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if dot(&p, &p) <= 1.0 {
            return p;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialIntegral {
    pub value: f64,
    pub abs_err: f64,
    pub converged: bool,
    /// The integrand had not decayed below 1e-14 at r_max.
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn rel_err(&self) -> f64 {
        self.stderr / self.mean.abs()
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct McAccumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl McAccumulator {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub(crate) fn finish(&self) -> McEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        McEstimate { mean: self.mean, stderr: (var / self.n as f64).sqrt(), samples: self.n }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        let pi = std::f64::consts::PI;
        assert!((sphere_area(4) - 2.0 * pi * pi).abs() < 1e-13);
        assert!((sphere_area(7) - 16.0 * pi.powi(3) / 15.0).abs() < 1e-12);
    }

    #[test]
    fn radius_examples() {
        let sp = DRSpace::heisenberg();
        assert_eq!(sp.radius(&sp.identity()), 0.0);
        for a in [0.01, 0.5, 3.0, 1e3] {
            assert!((sp.radius(&sp.a_point(a)) - a.ln().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn radius_matches_textbook_formula() {
        let sp = DRSpace::quaternionic(2).unwrap();
        let x = SPoint::new(vec![0.3, -1.0, 2.0, 0.1], vec![0.7, -0.2], 2.5);
        let v2 = dot(&x.v, &x.v);
        let z2 = dot(&x.z, &x.z);
        let t = (0.5 * (x.a.sqrt() + 1.0 / x.a.sqrt()) + v2 / (8.0 * x.a.sqrt())).powi(2) + z2 / (4.0 * x.a);
        let want = 2.0 * t.sqrt().acosh();
        assert!((sp.radius(&x) - want).abs() < 1e-12);
    }

    #[test]
    fn delta_example() {
        let sp = DRSpace::heisenberg();
        assert!((sp.modular_delta(&sp.a_point(2.0)) - 0.25).abs() < 1e-15);
        assert_eq!(sp.modular_delta(&sp.identity()), 1.0);
    }

    #[test]
    fn inverse_examples() {
        let sp = DRSpace::heisenberg();
        assert_eq!(sp.s_inverse(&sp.a_point(4.0)), sp.a_point(0.25));
        let x = SPoint::new(vec![1.0, 2.0], vec![3.0], 1.0);
        assert_eq!(sp.s_inverse(&x), SPoint::new(vec![-1.0, -2.0], vec![-3.0], 1.0));
    }

    #[test]
    fn density_small_r() {
        for sp in [DRSpace::heisenberg(), DRSpace::quaternionic(2).unwrap()] {
            assert_eq!(sp.density_a(0.0), 0.0);
            let r: f64 = 1e-4;
            let ratio = sp.density_a(r) / r.powi(sp.n() as i32 - 1);
            let want = 2f64.powi(sp.m_z() as i32);
            assert!((ratio / want - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn log_derivative_matches_fd() {
        let sp = DRSpace::quaternionic(3).unwrap();
        for r in [0.1, 1.0, 5.0] {
            let fd = numdiff::richardson(&|x: f64| sp.ln_density_a(x), r, 1e-4);
            assert!((fd - sp.density_log_derivative(r)).abs() < 1e-9);
        }
    }

    #[test]
    fn x0_examples() {
        let sp = DRSpace::heisenberg();
        let x = SPoint::new(vec![0.4, -0.3], vec![1.1], 0.7);
        let d = sp.left_derivative(&|p: &SPoint| p.a.ln(), &x, 0);
        assert!((d - 1.0).abs() < 1e-9);
        let d = sp.left_derivative(&|p: &SPoint| sp.modular_delta(p), &x, 0);
        assert!((d + sp.q() * sp.modular_delta(&x)).abs() < 1e-8);
        let lap = sp.laplacian_fd(&|p: &SPoint| p.a.ln(), &x);
        assert!(lap.abs() < 1e-6);
        let lap = sp.laplacian_fd(&|_p: &SPoint| 3.0, &x);
        assert!(lap.abs() < 1e-6);
    }

    #[test]
    fn flat_roundtrip() {
        let sp = DRSpace::quaternionic(2).unwrap();
        let x = SPoint::new(vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0], 7.0);
        assert_eq!(sp.point_from_flat(&x.to_flat()).unwrap(), x);
        assert!(sp.point_from_flat(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn shell_points_have_requested_radius() {
        let sp = DRSpace::quaternionic(2).unwrap();
        for (r, l) in [(1.0, 0.3), (3.0, -2.0), (0.5, 0.0)] {
            let tm = sp.shell_theta_max(r, l);
            for f in [0.0, 0.3, 0.9] {
                let x = sp.shell_point(r, l, f * tm);
                assert!((sp.radius(&x) - r).abs() < 1e-10, "r={r} l={l} f={f}");
            }
        }
    }

    #[test]
    fn shell_jacobian_integrates_to_density() {
        for sp in [DRSpace::heisenberg(), DRSpace::quaternionic(2).unwrap(), DRSpace::quaternionic(3).unwrap()] {
            for r in [0.4, 1.5, 4.0] {
                let inner = |l: f64| {
                    let tm = sp.shell_theta_max(r, l);
                    crate::quad::integrate(|th: f64| sp.shell_jacobian(r, l, th), 0.0, tm, QuadOptions::abs(1e-13)).value
                };
                let total = crate::quad::integrate(inner, -r, r, QuadOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 500 }).value;
                let want = sp.density_a(r);
                assert!((total / want - 1.0).abs() < 1e-6, "r={r}: {total} vs {want}");
            }
        }
    }

    #[test]
    fn x0_radius_matches_difference() {
        let sp = DRSpace::quaternionic(3).unwrap();
        for (r, l, th) in [(0.7, 0.2, 0.4), (3.0, -1.5, 0.1), (9.0, 4.0, 0.05)] {
            let x = sp.shell_point(r, l, th);
            let fd = sp.left_derivative(&|y: &SPoint| sp.radius(y), &x, 0);
            assert!((sp.x0_radius(&x) - fd).abs() < 1e-8, "{} {fd}", sp.x0_radius(&x));
            let g = sp.gradient_norm(&|y: &SPoint| sp.radius(y), &x);
            assert!((g - 1.0).abs() < 1e-7);
        }
    }
}