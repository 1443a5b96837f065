//! Central differences with one Richardson level.

use crate::quad::QuadValue;

pub fn central<T: QuadValue, F: Fn(f64) -> T>(f: &F, x: f64, h: f64) -> T {
    (f(x + h) - f(x - h)) * (0.5 / h)
}

/// First derivative, (4 D(h/2) - D(h)) / 3.
pub fn richardson<T: QuadValue, F: Fn(f64) -> T>(f: &F, x: f64, h: f64) -> T {
    let d1 = central(f, x, h);
    let d2 = central(f, x, 0.5 * h);
    (d2 * 4.0 - d1) * (1.0 / 3.0)
}

pub fn central2<T: QuadValue, F: Fn(f64) -> T>(f: &F, x: f64, h: f64) -> T {
    (f(x + h) - f(x) * 2.0 + f(x - h)) * (1.0 / (h * h))
}

/// Second derivative with one Richardson level.
pub fn richardson2<T: QuadValue, F: Fn(f64) -> T>(f: &F, x: f64, h: f64) -> T {
    let d1 = central2(f, x, h);
    let d2 = central2(f, x, 0.5 * h);
    (d2 * 4.0 - d1) * (1.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_derivatives() {
        let f = |x: f64| x.sin();
        assert!((richardson(&f, 0.7, 1e-3) - 0.7f64.cos()).abs() < 1e-12);
        assert!((richardson2(&f, 0.7, 1e-2) + 0.7f64.sin()).abs() < 1e-9);
    }
}
