use std::sync::Arc;

use serde::Serialize;

use super::bump::cn_norm;
use super::propagator::Flavor;
use super::norms::multiplier_l1_norm;
use crate::dr_space::DRSpace;
use crate::error::{invalid, Result};
use crate::fit::{fit_loglog, ExponentFit};
use crate::kernel::FnMultiplier;

pub type Symbol = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub(crate) fn smooth_step(x: f64) -> f64 {
    // 0 for x ≤ 0, 1 for x ≥ 1
    let f = |y: f64| if y <= 0.0 { 0.0 } else { (-1.0 / y).exp() };
    let a = f(x);
    let b = f(1.0 - x);
    a / (a + b)
}

/// Even cutoff χ with χ = 1 on [−1/2, 1/2] and χ = 0 off [−1, 1].
#[derive(Clone)]
pub struct Cutoff {
    chi: Symbol,
}

impl Cutoff {
    pub fn standard() -> Self {
        Cutoff { chi: Arc::new(|s: f64| smooth_step(2.0 * (1.0 - s.abs()))) }
    }

    /// Validates the support contract on a sample grid.
    pub fn custom(chi: Symbol) -> Result<Self> {
        for i in 0..=400 {
            let s = -2.0 + 4.0 * i as f64 / 400.0;
            let v = chi(s);
            if (v - chi(-s)).abs() > 1e-14 {
                return invalid(format!("cutoff is not even at s = {s}"));
            }
            if s.abs() <= 0.5 && (v - 1.0).abs() > 1e-14 {
                return invalid(format!("cutoff differs from 1 at s = {s}"));
            }
            if s.abs() >= 1.0 && v != 0.0 {
                return invalid(format!("cutoff is nonzero at s = {s}"));
            }
        }
        Ok(Cutoff { chi })
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.chi)(s)
    }

    /// ψ_0(s) = χ(s/2), ψ_j(s) = χ(2^{−j−1}s) − χ(2^{−j}s).
    pub fn psi_j(&self, j: u32, s: f64) -> f64 {
        if j == 0 {
            self.eval(0.5 * s)
        } else {
            let sc = 0.5f64.powi(j as i32);
            self.eval(0.5 * sc * s) - self.eval(sc * s)
        }
    }
}

/// One dyadic piece; `normalized(s)` = m_j(s) = m(2^j s)ψ(s), `rescaled(s)` = m_j(2^{−j}s) = (mψ_j)(s).
#[derive(Clone)]
pub struct DyadicPiece {
    pub j: u32,
    m: Symbol,
    chi: Cutoff,
}

impl DyadicPiece {
    pub fn rescaled(&self, s: f64) -> f64 {
        let p = self.chi.psi_j(self.j, s);
        if p == 0.0 {
            0.0
        } else {
            (self.m)(s) * p
        }
    }

    pub fn normalized(&self, s: f64) -> f64 {
        self.rescaled(2f64.powi(self.j as i32) * s)
    }

    /// Range of |s| carrying the rescaled piece.
    pub fn support(&self) -> (f64, f64) {
        if self.j == 0 {
            (0.0, 2.0)
        } else {
            let c = 2f64.powi(self.j as i32);
            (0.5 * c, 2.0 * c)
        }
    }

    /// ‖m_j‖_{C^N} by sampled differences.
    pub fn cn_norm(&self, n: usize) -> f64 {
        cn_norm(&|s| self.normalized(s), 2.0, n)
    }
}

/// m(s) = Σ_j m_j(2^{−j}s) for j = 0..=j_max, with m_0 = mχ(·/2) so that the sum telescopes.
pub fn dyadic_decomposition(m: Symbol, chi: &Cutoff, j_max: u32) -> Vec<DyadicPiece> {
    (0..=j_max).map(|j| DyadicPiece { j, m: m.clone(), chi: chi.clone() }).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DyadicRow {
    pub j: u32,
    pub norm: f64,
    pub bound: f64,
    pub partial_sum: f64,
    pub bound_partial_sum: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DyadicReport {
    pub t: f64,
    pub alpha: f64,
    pub flavor: Flavor,
    pub rows: Vec<DyadicRow>,
    /// Geometric tail estimate from the last ratio; infinite when the ratio is ≥ 1.
    pub remainder: f64,
    /// Slope of log₂ norm_j against j over j ≥ 1.
    pub growth: Option<ExponentFit>,
}

impl DyadicReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[1].norm / w[0].norm).collect()
    }
}

/// Per-piece bound: 2^{−αj}(1+2^jt)^{(n−1)/2} for t < 1, 2^{−αj}2^{j(n−3)/2}2^jt for t ≥ 1.
pub fn dyadic_bound(n: usize, alpha: f64, t: f64, j: u32, flavor: Flavor) -> f64 {
    let nf = n as f64;
    let c = 2f64.powi(j as i32);
    let t = t.abs();
    match flavor {
        Flavor::Cosine => {
            if t < 1.0 {
                c.powf(-alpha) * (1.0 + c * t).powf(0.5 * (nf - 1.0))
            } else {
                c.powf(-alpha) * c.powf(0.5 * (nf - 3.0)) * c * t
            }
        }
        Flavor::Sinc => {
            if j == 0 {
                1.0 + t
            } else if t < 1.0 {
                c.powf(-alpha - 1.0) * (1.0 + c * t).powf(0.5 * (nf - 1.0))
            } else {
                c.powf(-alpha) * c.powf(0.5 * (nf - 3.0)) * t
            }
        }
    }
}

/// max|m_j| over [1/2, 2] for j = 1..=j_max and its log-log slope against 2^j.
pub fn piece_decay(m: Symbol, j_max: u32) -> Result<(Vec<(u32, f64)>, ExponentFit)> {
    if j_max < 2 {
        return invalid(format!("need j_max ≥ 2, got {j_max}"));
    }
    let chi = Cutoff::standard();
    let pieces = dyadic_decomposition(m, &chi, j_max);
    let sups: Vec<(u32, f64)> = pieces[1..]
        .iter()
        .map(|p| (p.j, (0..=3000).map(|i| p.normalized(0.5 + 1.5 * i as f64 / 3000.0).abs()).fold(0.0, f64::max)))
        .collect();
    let x: Vec<f64> = sups.iter().map(|(j, _)| 2f64.powi(*j as i32)).collect();
    let y: Vec<f64> = sups.iter().map(|(_, v)| *v).collect();
    let fit = fit_loglog("j", &x, &y)?;
    Ok((sups, fit))
}

/// L¹ norms of the kernels of m_j(√L/2^j) cos(t√L) (or sin(t√L)/√L), j = 0..=j_max.
pub fn dyadic_l1_report(sp: &DRSpace, m: Symbol, alpha: f64, t: f64, j_max: u32, flavor: Flavor) -> Result<DyadicReport> {
    let chi = Cutoff::standard();
    let pieces = dyadic_decomposition(m, &chi, j_max);
    let mut rows: Vec<DyadicRow> = Vec::new();
    let (mut ps, mut bs) = (0.0, 0.0);
    for piece in &pieces {
        let (lo, hi) = piece.support();
        let p = piece.clone();
        let f = move |s: f64| {
            let v = p.rescaled(s);
            match flavor {
                Flavor::Cosine => v * (t * s).cos(),
                Flavor::Sinc => {
                    if (t * s).abs() < 1e-8 {
                        v * t
                    } else {
                        v * (t * s).sin() / s
                    }
                }
            }
        };
        let mult = FnMultiplier::new(f, lo, hi).with_propagation(t.abs());
        let l1 = multiplier_l1_norm(sp, &mult, |_| 1.0)?;
        let bound = dyadic_bound(sp.n(), alpha, t, piece.j, flavor);
        ps += l1.value;
        bs += bound;
        rows.push(DyadicRow { j: piece.j, norm: l1.value, bound, partial_sum: ps, bound_partial_sum: bs, truncated: l1.truncated });
    }
    let remainder = match rows.len() {
        n if n >= 2 => {
            let rho = rows[n - 1].norm / rows[n - 2].norm;
            if rho < 1.0 {
                rows[n - 1].norm * rho / (1.0 - rho)
            } else {
                f64::INFINITY
            }
        }
        _ => f64::INFINITY,
    };
    let tail: Vec<&DyadicRow> = rows.iter().filter(|r| r.j >= 1 && r.norm > 0.0).collect();
    let growth = if tail.len() >= 2 {
        let x: Vec<f64> = tail.iter().map(|r| 2f64.powi(r.j as i32)).collect();
        let y: Vec<f64> = tail.iter().map(|r| r.norm).collect();
        fit_loglog("j", &x, &y).ok()
    } else {
        None
    };
    Ok(DyadicReport { t, alpha, flavor, rows, remainder, growth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symbol(alpha: f64) -> Symbol {
        Arc::new(move |s: f64| (1.0 + s * s).powf(-0.5 * alpha))
    }

    #[test]
    fn partition_of_unity_telescopes() {
        let chi = Cutoff::standard();
        let j_max = 8;
        for i in 0..100 {
            let s = -(2f64.powi(j_max)) + 2f64.powi(j_max + 1) * i as f64 / 99.0;
            let sum: f64 = (0..=j_max as u32).map(|j| chi.psi_j(j, s)).sum();
            assert!((sum - 1.0).abs() < 1e-12, "s={s}: {sum}");
        }
    }

    #[test]
    fn pieces_reconstruct_and_are_localized() {
        let m = symbol(1.5);
        let pieces = dyadic_decomposition(m.clone(), &Cutoff::standard(), 10);
        for i in 0..50 {
            let s = 0.37 * i as f64;
            let sum: f64 = pieces.iter().map(|p| p.rescaled(s)).sum();
            assert!((sum - m(s)).abs() < 1e-12);
        }
        for p in pieces.iter().skip(1) {
            let c = 2f64.powi(p.j as i32);
            for i in 0..200 {
                let s = 4.0 * c * i as f64 / 199.0;
                if s < 0.5 * c || s > 2.0 * c {
                    assert_eq!(p.rescaled(s), 0.0);
                }
            }
        }
    }

    #[test]
    fn custom_cutoff_contract() {
        assert!(Cutoff::custom(Arc::new(|s: f64| if s.abs() < 0.9 { 1.0 } else { 0.0 })).is_ok());
        assert!(Cutoff::custom(Arc::new(|s: f64| if s.abs() < 1.2 { 1.0 } else { 0.0 })).is_err());
        assert!(Cutoff::custom(Arc::new(|s: f64| if s.abs() < 0.4 { 1.0 } else { 0.0 })).is_err());
    }

    #[test]
    fn zero_symbol_gives_zero_norms() {
        let sp = DRSpace::heisenberg();
        let rep = dyadic_l1_report(&sp, Arc::new(|_| 0.0), 3.0, 0.5, 2, Flavor::Cosine).unwrap();
        assert!(rep.rows.iter().all(|r| r.norm == 0.0));
    }
}
