//! Exact calculus for D₁ = −(1/sinh v)∂_v and D₂ = −(1/sinh(v/2))∂_v on e^{isv},
//! and the inverse Abel profile F_R(s).

use std::collections::BTreeMap;
use std::fmt;

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_panels, uniform_edges, QuadOptions};
use crate::dr_space::{ln_cosh, ln_sinh, sphere_area, DRSpace};

/// Exact complex rational re + i·im.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl ComplexRational {
    pub fn zero() -> Self {
        ComplexRational { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        ComplexRational { re: BigRational::one(), im: BigRational::zero() }
    }

    pub fn from_integer(n: i64) -> Self {
        ComplexRational { re: BigRational::from_integer(BigInt::from(n)), im: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn scale(&self, r: &BigRational) -> Self {
        ComplexRational { re: &self.re * r, im: &self.im * r }
    }

    /// Multiplication by i.
    fn times_i(&self) -> Self {
        ComplexRational { re: -self.im.clone(), im: self.re.clone() }
    }

    fn add_assign(&mut self, other: &Self) {
        self.re += &other.re;
        self.im += &other.im;
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

/// Exponents of cosh v, sinh v, cosh(v/2), sinh(v/2).
pub type Exponents = [i32; 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperbolicMonomial {
    pub coeff: ComplexRational,
    pub e_ch: i32,
    pub e_sh: i32,
    pub e_ch2: i32,
    pub e_sh2: i32,
}

impl HyperbolicMonomial {
    pub fn exponents(&self) -> Exponents {
        [self.e_ch, self.e_sh, self.e_ch2, self.e_sh2]
    }
}

/// Σ_k s^k (Σ monomials)(v) · e^{isv}.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OscillatorySymbol {
    terms: BTreeMap<u32, BTreeMap<Exponents, ComplexRational>>,
}

impl OscillatorySymbol {
    /// The bare exponential e^{isv}.
    pub fn exponential() -> Self {
        let mut s = OscillatorySymbol::default();
        s.add_term(0, [0; 4], &ComplexRational::one());
        s
    }

    pub fn add_term(&mut self, k: u32, e: Exponents, c: &ComplexRational) {
        let slot = self.terms.entry(k).or_default().entry(e).or_insert_with(ComplexRational::zero);
        slot.add_assign(c);
        if slot.is_zero() {
            let row = self.terms.get_mut(&k).unwrap();
            row.remove(&e);
            if row.is_empty() {
                self.terms.remove(&k);
            }
        }
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        let mut out = OscillatorySymbol::default();
        for (k, e, coeff) in self.iter() {
            out.add_term(k, e, &coeff.scale(c));
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, e, c) in other.iter() {
            out.add_term(k, e, c);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Exponents, &ComplexRational)> {
        self.terms.iter().flat_map(|(k, row)| row.iter().map(move |(e, c)| (*k, *e, c)))
    }

    pub fn monomials(&self) -> Vec<(u32, HyperbolicMonomial)> {
        self.iter()
            .map(|(k, e, c)| {
                (k, HyperbolicMonomial { coeff: c.clone(), e_ch: e[0], e_sh: e[1], e_ch2: e[2], e_sh2: e[3] })
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_power(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_power(&self) -> Option<u32> {
        self.terms.keys().next().copied()
    }

    pub fn max_abs_exponent(&self) -> i32 {
        self.iter().flat_map(|(_, e, _)| e).map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.terms.values().map(|r| r.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// ∂_v of the full expression, e^{isv} included.
    pub fn derivative(&self) -> Self {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let mut out = OscillatorySymbol::default();
        for (k, [a, b, c, d], coeff) in self.iter() {
            if a != 0 {
                out.add_term(k, [a - 1, b + 1, c, d], &coeff.scale(&BigRational::from_integer(a.into())));
            }
            if b != 0 {
                out.add_term(k, [a + 1, b - 1, c, d], &coeff.scale(&BigRational::from_integer(b.into())));
            }
            if c != 0 {
                let f = BigRational::from_integer(c.into()) * &half;
                out.add_term(k, [a, b, c - 1, d + 1], &coeff.scale(&f));
            }
            if d != 0 {
                let f = BigRational::from_integer(d.into()) * &half;
                out.add_term(k, [a, b, c + 1, d - 1], &coeff.scale(&f));
            }
            out.add_term(k + 1, [a, b, c, d], &coeff.times_i());
        }
        out
    }

    fn apply_d(&self, slot: usize) -> Self {
        let d = self.derivative();
        let mut out = OscillatorySymbol::default();
        let minus_one = BigRational::from_integer((-1).into());
        for (k, mut e, c) in d.iter() {
            e[slot] -= 1;
            out.add_term(k, e, &c.scale(&minus_one));
        }
        out
    }

    /// D₁ = −(1/sinh v)∂_v.
    pub fn apply_d1(&self) -> Self {
        self.apply_d(1)
    }

    /// D₂ = −(1/sinh(v/2))∂_v.
    pub fn apply_d2(&self) -> Self {
        self.apply_d(3)
    }

    /// D₁^p D₂^q e^{isv}.
    pub fn operator_power(p: usize, q: usize) -> Self {
        let mut s = Self::exponential();
        for _ in 0..q {
            s = s.apply_d2();
        }
        for _ in 0..p {
            s = s.apply_d1();
        }
        s
    }

    pub fn compile(&self) -> CompiledSymbol {
        CompiledSymbol {
            terms: self.iter().map(|(k, e, c)| (k as usize, c.to_complex(), e)).collect(),
            kmax: self.max_power().unwrap_or(0) as usize,
        }
    }

    pub fn evaluate(&self, s: f64, v: f64) -> Complex64 {
        self.compile().evaluate(s, v)
    }

    /// One line per term: "k coeff_re coeff_im e_ch e_sh e_ch2 e_sh2".
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for (k, e, c) in self.iter() {
            out.push_str(&format!("{} {} {} {} {} {} {}\n", k, c.re, c.im, e[0], e[1], e[2], e[3]));
        }
        out
    }
}

impl fmt::Display for OscillatorySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.debug_dump())
    }
}

/// Hyperbolic factors at one v, in linear or log form.
struct Hyp {
    lin: [f64; 4],
    log: [f64; 4],
    sign_sh: f64,
    use_log: bool,
}

impl Hyp {
    fn new(v: f64) -> Self {
        let av = v.abs();
        let use_log = av > 30.0;
        let lin = if use_log {
            [0.0; 4]
        } else {
            [av.cosh(), av.sinh(), (0.5 * av).cosh(), (0.5 * av).sinh()]
        };
        let log = if use_log {
            [ln_cosh(av), ln_sinh(av), ln_cosh(0.5 * av), ln_sinh(0.5 * av)]
        } else {
            [0.0; 4]
        };
        Hyp { lin, log, sign_sh: if v < 0.0 { -1.0 } else { 1.0 }, use_log }
    }

    /// Monomial value times e^{shift}.
    fn monomial(&self, e: &Exponents, shift: f64) -> f64 {
        let sign = if (e[1] + e[3]) % 2 != 0 { self.sign_sh } else { 1.0 };
        if self.use_log {
            let l = e[0] as f64 * self.log[0]
                + e[1] as f64 * self.log[1]
                + e[2] as f64 * self.log[2]
                + e[3] as f64 * self.log[3];
            sign * (l + shift).exp()
        } else {
            let mut p = 1.0;
            for i in 0..4 {
                if e[i] != 0 {
                    p *= self.lin[i].powi(e[i]);
                }
            }
            sign * p * shift.exp()
        }
    }
}

/// Floating-point copy of a symbol for fast evaluation.
#[derive(Debug, Clone)]
pub struct CompiledSymbol {
    terms: Vec<(usize, Complex64, Exponents)>,
    kmax: usize,
}

impl CompiledSymbol {
    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// Coefficients c_k(v)·e^{γv} of s^k.
    pub fn coefficients_scaled(&self, v: f64, gamma: f64) -> Vec<Complex64> {
        let h = Hyp::new(v);
        let mut out = vec![Complex64::new(0.0, 0.0); self.kmax + 1];
        for (k, c, e) in &self.terms {
            out[*k] += c * h.monomial(e, gamma * v);
        }
        out
    }

    pub fn coefficients(&self, v: f64) -> Vec<Complex64> {
        self.coefficients_scaled(v, 0.0)
    }

    /// Real coefficients r_k with c_k = i^k r_k, scaled by e^{γv}.
    pub fn real_coefficients_scaled(&self, v: f64, gamma: f64, out: &mut [f64]) {
        let h = Hyp::new(v);
        out.iter_mut().for_each(|x| *x = 0.0);
        for (k, c, e) in &self.terms {
            // c · i^{-k}
            let r = match k % 4 {
                0 => c.re,
                1 => c.im,
                2 => -c.re,
                _ => -c.im,
            };
            out[*k] += r * h.monomial(e, gamma * v);
        }
    }

    pub fn evaluate(&self, s: f64, v: f64) -> Complex64 {
        let c = self.coefficients(v);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut sk = 1.0;
        for ck in c {
            acc += ck * sk;
            sk *= s;
        }
        acc * Complex64::new(0.0, s * v).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// D₁^p D₂^q e^{isv} together with the inversion constant for one space.
#[derive(Debug, Clone)]
pub struct FRProfile {
    pub parity: Parity,
    pub p: usize,
    pub q: usize,
    pub symbol: OscillatorySymbol,
    /// ã_S^e or ã_S^o.
    pub constant: f64,
    /// ω_{n−1}/2^{m_z}, the Haar normalization carried by kernels, see [`DRSpace::haar_constant`].
    pub kappa: f64,
    /// e^{γv} tames the decay of the symbol coefficients.
    pub gamma: f64,
    compiled: CompiledSymbol,
    compiled_derivative: CompiledSymbol,
}

impl FRProfile {
    pub fn scale(&self) -> f64 {
        self.constant * self.kappa
    }

    pub fn compiled(&self) -> &CompiledSymbol {
        &self.compiled
    }

    /// ∂_v of the symbol, compiled.
    pub fn compiled_derivative(&self) -> &CompiledSymbol {
        &self.compiled_derivative
    }
}

pub fn build_fr_symbol(sp: &DRSpace) -> Result<FRProfile> {
    let (mv, mz) = (sp.m_v(), sp.m_z());
    if mv % 2 != 0 {
        return Err(Error::Unsupported(format!("odd m_v = {mv}")));
    }
    let n = sp.n() as f64;
    let pi = std::f64::consts::PI;
    let base = (2.0 * pi).recip() * 2f64.powf(-((2 * mv + mz) as f64) / 2.0);
    let (parity, p, constant) = if mz % 2 == 0 {
        (Parity::Even, mz / 2, base * pi.powf(-((mv + mz) as f64) / 2.0))
    } else {
        (Parity::Odd, mz.div_ceil(2), base * pi.powf(-n / 2.0))
    };
    let q = mv / 2;
    let symbol = OscillatorySymbol::operator_power(p, q);
    let compiled = symbol.compile();
    let compiled_derivative = symbol.derivative().compile();
    Ok(FRProfile {
        parity,
        p,
        q,
        compiled,
        compiled_derivative,
        symbol,
        constant,
        kappa: sphere_area(sp.n()) / 2f64.powi(mz as i32),
        gamma: p as f64 + 0.5 * q as f64,
    })
}

/// Weight of dν_R at v = R + u² including the Jacobian 2u, scaled by e^{−v/2}.
pub(crate) fn nu_weight_u(r: f64, u: f64) -> f64 {
    let v = r + u * u;
    let ln = ln_sinh(v) - 0.5 * v - 0.5 * (std::f64::consts::LN_2 + ln_sinh(r + 0.5 * u * u) + (0.5 * u * u).sinh().ln());
    2.0 * u * ln.exp()
}

/// sinh v (cosh v − cosh R)^{−1/2}, scaled by e^{−v/2}.
pub(crate) fn nu_weight(r: f64, v: f64) -> f64 {
    let ln = ln_sinh(v) - 0.5 * v - 0.5 * (std::f64::consts::LN_2 + ln_sinh(0.5 * (v + r)) + ln_sinh(0.5 * (v - r)));
    ln.exp()
}

/// Length past R after which e^{−(Q/2)(v−R)} is below 1e-15.
pub(crate) fn odd_tail_length(sp: &DRSpace) -> f64 {
    2.0 * 34.6 / sp.q()
}

/// F_R(s) including the Haar normalization factor.
pub fn eval_fr(profile: &FRProfile, sp: &DRSpace, r: f64, s: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return invalid(format!("F_R needs R > 0, got {r}"));
    }
    let sym = &profile.compiled;
    match profile.parity {
        Parity::Even => Ok(sym.evaluate(s, r) * profile.scale()),
        Parity::Odd => {
            let g = profile.gamma;
            let width = std::f64::consts::PI / (4.0 * (1.0 + s.abs()));
            let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-11, max_intervals: 20000 };
            // symbol · e^{−v/2}·weight: scale symbol by e^{γv} then undo with e^{(1/2−γ)v}
            let integrand = |v: f64, w: f64| -> Complex64 {
                let c = sym.coefficients_scaled(v, g);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut sk = 1.0;
                for ck in c {
                    acc += ck * sk;
                    sk *= s;
                }
                acc * Complex64::new(0.0, s * v).exp() * (w * ((0.5 - g) * v).exp())
            };
            let u_end = 1.0;
            let local = integrate_panels(
                |u: f64| integrand(r + u * u, nu_weight_u(r, u)),
                &uniform_edges(0.0, u_end, width),
                opts,
            );
            let v0 = r + u_end * u_end;
            let v1 = v0 + odd_tail_length(sp);
            let far = integrate_panels(|v: f64| integrand(v, nu_weight(r, v)), &uniform_edges(v0, v1, width), opts);
            let err = local.abs_err + far.abs_err;
            if err > 1e-9 * (local.value + far.value).norm().max(1.0) {
                return Err(Error::QuadratureFailure { a: r, b: v1, achieved: err });
            }
            Ok((local.value + far.value) * profile.scale())
        }
    }
}

/// ∂_R F_R(s): exact for even m_z, Richardson central difference otherwise.
pub fn eval_dfr_dr(profile: &FRProfile, sp: &DRSpace, r: f64, s: f64) -> Result<Complex64> {
    match profile.parity {
        Parity::Even => {
            if !(r > 0.0) {
                return invalid(format!("F_R needs R > 0, got {r}"));
            }
            Ok(profile.compiled_derivative.evaluate(s, r) * profile.scale())
        }
        Parity::Odd => {
            let h = crate::dr_space::FD_STEP;
            if r <= 2.0 * h {
                return invalid(format!("odd branch derivative needs R > {}", 2.0 * h));
            }
            let f = |x: f64| eval_fr(profile, sp, x, s);
            let d1 = (f(r + h)? - f(r - h)?) / (2.0 * h);
            let d2 = (f(r + 0.5 * h)? - f(r - 0.5 * h)?) / h;
            Ok((d2 * 4.0 - d1) / 3.0)
        }
    }
}

/// F_R(s) for one R and many s, with the v-quadrature of the odd case precomputed.
pub struct FrSampler {
    scale: f64,
    even: Option<(CompiledSymbol, f64)>,
    nodes: Vec<(f64, f64, Vec<f64>)>,
}

impl FrSampler {
    /// Accurate for |s| ≤ s_max.
    pub fn new(profile: &FRProfile, sp: &DRSpace, r: f64, s_max: f64) -> Result<Self> {
        if !(r > 0.0) {
            return invalid(format!("F_R needs R > 0, got {r}"));
        }
        let scale = profile.scale();
        if profile.parity == Parity::Even {
            return Ok(FrSampler { scale, even: Some((profile.compiled.clone(), r)), nodes: Vec::new() });
        }
        let g = profile.gamma;
        let kk = profile.compiled.kmax() + 1;
        let gl = crate::quad::GaussLegendre::g16();
        let mut nodes = Vec::new();
        let mut push = |v: f64, w: f64| {
            let mut c = vec![0.0; kk];
            profile.compiled.real_coefficients_scaled(v, g, &mut c);
            nodes.push((v, w * ((0.5 - g) * v).exp(), c));
        };
        let hu = (2.0 / (1.0 + 2.0 * s_max)).min(0.125);
        for e in uniform_edges(0.0, 1.0, hu).windows(2) {
            for (u, w) in gl.mapped(e[0], e[1]) {
                push(r + u * u, w * nu_weight_u(r, u));
            }
        }
        let v0 = r + 1.0;
        let hv = (2.0 / (1.0 + s_max)).min(0.25);
        for e in uniform_edges(v0, v0 + odd_tail_length(sp), hv).windows(2) {
            for (v, w) in gl.mapped(e[0], e[1]) {
                push(v, w * nu_weight(r, v));
            }
        }
        Ok(FrSampler { scale, even: None, nodes })
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        if let Some((sym, r)) = &self.even {
            return sym.evaluate(s, *r) * self.scale;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (v, w, c) in &self.nodes {
            // Σ r_k (is)^k
            let mut p = Complex64::new(0.0, 0.0);
            let mut ik = Complex64::new(1.0, 0.0);
            for rk in c {
                p += ik * *rk;
                ik *= Complex64::new(0.0, s);
            }
            acc += p * Complex64::new(0.0, s * v).exp() * *w;
        }
        acc * self.scale
    }
}

/// Even power series Σ c_j w^j in w = v².
#[derive(Debug, Clone, PartialEq)]
pub struct EvenSeries(pub Vec<f64>);

impl EvenSeries {
    /// σv / sinh(σv) truncated to `len` coefficients.
    pub fn x_over_sinh(sigma: f64, len: usize) -> Self {
        // invert sinh x / x = Σ x^{2j}/(2j+1)!
        let mut fwd = vec![0.0; len];
        let mut fact = 1.0;
        for (j, f) in fwd.iter_mut().enumerate() {
            if j > 0 {
                fact *= ((2 * j) * (2 * j + 1)) as f64;
            }
            *f = 1.0 / fact;
        }
        let mut inv = vec![0.0; len];
        inv[0] = 1.0;
        for j in 1..len {
            inv[j] = -(1..=j).map(|i| fwd[i] * inv[j - i]).sum::<f64>();
        }
        let s2 = sigma * sigma;
        let mut p = 1.0;
        for c in inv.iter_mut() {
            *c *= p;
            p *= s2;
        }
        EvenSeries(inv)
    }

    /// D g = −(1/sinh(σv)) g' = −(2/σ) (dg/dw) · σv/sinh(σv).
    pub fn apply_d(&self, sigma: f64) -> Self {
        let len = self.0.len();
        if len < 2 {
            return EvenSeries(vec![0.0]);
        }
        let dw: Vec<f64> = (1..len).map(|j| j as f64 * self.0[j]).collect();
        let x = Self::x_over_sinh(sigma, dw.len());
        let mut out = vec![0.0; dw.len()];
        for i in 0..dw.len() {
            for j in 0..dw.len() - i {
                out[i + j] += dw[i] * x.0[j];
            }
        }
        out.iter_mut().for_each(|c| *c *= -2.0 / sigma);
        EvenSeries(out)
    }

    pub fn value(&self, v: f64) -> f64 {
        let w = v * v;
        self.0.iter().rev().fold(0.0, |acc, c| acc * w + c)
    }

    pub fn derivative(&self, v: f64) -> f64 {
        let w = v * v;
        let mut acc = 0.0;
        for (j, c) in self.0.iter().enumerate().skip(1).rev() {
            acc = acc * w + j as f64 * c;
        }
        2.0 * v * acc
    }
}

/// D₁^p D₂^q applied to an even series.
pub fn apply_operator_series(g: &EvenSeries, p: usize, q: usize) -> EvenSeries {
    let mut s = g.clone();
    for _ in 0..q {
        s = s.apply_d(0.5);
    }
    for _ in 0..p {
        s = s.apply_d(1.0);
    }
    s
}

/// Largest |rational| among coefficients, for growth diagnostics.
pub fn max_coefficient(sym: &OscillatorySymbol) -> f64 {
    sym.iter()
        .map(|(_, _, c)| c.re.abs().to_f64().unwrap_or(f64::INFINITY).max(c.im.abs().to_f64().unwrap_or(f64::INFINITY)))
        .fold(0.0, f64::max)
}
