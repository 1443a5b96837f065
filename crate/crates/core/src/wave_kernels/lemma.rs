use serde::Serialize;

use crate::dr_space::{sphere_area, DRSpace};
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, QuadOptions};

/// ∫_N (a+1+|v|²/4)^{−Q−1} [1 + (a+1+|v|²/4)^{−2}|z|²]^{−Q/2−1} dv dz by nested quadrature in (|v|, |z|).
pub fn n_integral(sp: &DRSpace, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return invalid(format!("a must be positive, got {a}"));
    }
    let (mv, mz) = (sp.m_v(), sp.m_z());
    let q = sp.q();
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-11, max_intervals: 4000 };
    let failure = std::cell::Cell::new(None);
    let inner = |b: f64| -> f64 {
        // ζ = b u/(1−u)
        let f = |u: f64| -> f64 {
            if u >= 1.0 {
                return 0.0;
            }
            let z = b * u / (1.0 - u);
            let jac = b / ((1.0 - u) * (1.0 - u));
            z.powi(mz as i32 - 1) * (1.0 + z * z / (b * b)).powf(-0.5 * q - 1.0) * jac
        };
        let r = integrate(f, 0.0, 1.0, opts);
        if !r.converged {
            failure.set(Some(Error::QuadratureFailure { a: 0.0, b: 1.0, achieved: r.abs_err }));
        }
        r.value
    };
    let scale = 2.0 * (a + 1.0).sqrt();
    let outer = |u: f64| -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        let rho = scale * u / (1.0 - u);
        let jac = scale / ((1.0 - u) * (1.0 - u));
        let b = a + 1.0 + 0.25 * rho * rho;
        rho.powi(mv as i32 - 1) * b.powf(-q - 1.0) * inner(b) * jac
    };
    let r = integrate(outer, 0.0, 1.0, opts);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    if !r.converged {
        return Err(Error::QuadratureFailure { a: 0.0, b: 1.0, achieved: r.abs_err });
    }
    Ok(r.value * sphere_area(mv) * sphere_area(mz))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRow {
    pub a: f64,
    pub integral: f64,
    /// integral · (a + 1)
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub rows: Vec<LemmaRow>,
    /// max/min of the products.
    pub spread: f64,
    pub pass: bool,
}

/// Checks that integral·(a+1) is constant within 1% over the given a.
pub fn lemma_report(sp: &DRSpace, a_values: &[f64]) -> Result<LemmaReport> {
    if a_values.is_empty() {
        return invalid("a grid is empty");
    }
    let mut rows = Vec::new();
    for &a in a_values {
        let integral = n_integral(sp, a)?;
        rows.push(LemmaRow { a, integral, product: integral * (a + 1.0) });
    }
    let hi = rows.iter().map(|r| r.product).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.product).fold(f64::INFINITY, f64::min);
    let spread = hi / lo;
    Ok(LemmaReport { rows, spread, pass: spread <= 1.01 })
}
