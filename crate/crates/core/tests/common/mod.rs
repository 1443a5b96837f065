#![allow(dead_code)]

use num::complex::Complex64;

/// Kernel profiles w(r) of W^t_λ with the annular gauss bump, from `jacobi_oracle.py`.
/// Rows are (m_v, m_z, λ, t, r, w).
pub const JACOBI_PROFILES: [(usize, usize, f64, f64, f64, f64); 4] = [
    (2, 1, 4.0, 2.0, 1.5, -1.04023378840159),
    (2, 1, 2.0, 1.0, 0.7, 0.0598352229071919),
    (4, 2, 4.0, 2.0, 1.5, -0.258498431644877),
    (4, 2, 2.0, 1.0, 0.7, -0.0256156174500497),
];

#[derive(Clone, Copy, Debug)]
pub enum Op {
    D1,
    D2,
}

const CAUCHY_POINTS: usize = 24;
const CAUCHY_RADIUS: f64 = 0.075;

/// f'(z) from the trapezoid rule on a circle around z.
fn cauchy_derivative(f: &dyn Fn(Complex64) -> Complex64, z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..CAUCHY_POINTS {
        let th = 2.0 * std::f64::consts::PI * j as f64 / CAUCHY_POINTS as f64;
        let e = Complex64::from_polar(1.0, th);
        acc += f(z + e * CAUCHY_RADIUS) / e;
    }
    acc / (CAUCHY_POINTS as f64 * CAUCHY_RADIUS)
}

/// ops applied right to left to e^{isz}, each derivative taken numerically.
fn nested(ops: &[Op], s: f64, z: Complex64) -> Complex64 {
    match ops.split_first() {
        None => (Complex64::i() * s * z).exp(),
        Some((op, rest)) => {
            let d = cauchy_derivative(&|w| nested(rest, s, w), z);
            let c = match op {
                Op::D1 => z.sinh(),
                Op::D2 => (0.5 * z).sinh(),
            };
            -d / c
        }
    }
}

/// D₁^p D₂^q e^{isv} by nested contour differentiation.
pub fn nested_operator(p: usize, q: usize, s: f64, v: f64) -> Complex64 {
    let mut ops = vec![Op::D1; p];
    ops.extend(std::iter::repeat_n(Op::D2, q));
    nested(&ops, s, Complex64::new(v, 0.0))
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}
