//! Least-squares slopes for scaling exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub var: String,
    pub exponent: f64,
    pub stderr: f64,
    pub r2: f64,
}

impl ExponentFit {
    pub fn good(&self) -> bool {
        self.r2 >= 0.98
    }

    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.exponent - target).abs() <= tol
    }
}

/// Ordinary least squares y = c + m x; returns (m, c, stderr of m, r2).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} points", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite sample".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("constant regressor".into()));
    }
    let m = sxy / sxx;
    let c = my - m * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - c - m * a).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let stderr = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((m, c, stderr, r2))
}

/// Slope of log y against log x.
pub fn fit_loglog(var: &str, x: &[f64], y: &[f64]) -> Result<ExponentFit> {
    if x.iter().chain(y).any(|v| *v <= 0.0) {
        return Err(Error::DegenerateFit("non-positive sample in log-log fit".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (m, _, se, r2) = linear_fit(&lx, &ly)?;
    Ok(ExponentFit { var: var.to_string(), exponent: m, stderr: se, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        let f = fit_loglog("t", &x, &y).unwrap();
        assert!((f.exponent - 1.5).abs() < 1e-12);
        assert!(f.r2 > 0.999999);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(fit_loglog("t", &[1.0, 2.0], &[1.0, 0.0]).is_err());
    }
}
