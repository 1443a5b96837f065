use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BumpPreset {
    GaussBump,
    PolyBump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportClass {
    /// supp ψ ⊆ [−2, 2]
    Full,
    /// supp ψ ⊆ [−2, −1] ∪ [1, 2]
    Annular,
}

/// Even bump ψ with peak value 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub preset: BumpPreset,
    pub class: SupportClass,
}

fn profile(preset: BumpPreset, x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let y = 1.0 - x * x;
    match preset {
        BumpPreset::GaussBump => (1.0 - 1.0 / y).exp(),
        BumpPreset::PolyBump => y.powi(5),
    }
}

impl BumpFunction {
    pub fn new(preset: BumpPreset, class: SupportClass) -> Self {
        BumpFunction { preset, class }
    }

    pub fn gauss(class: SupportClass) -> Self {
        Self::new(BumpPreset::GaussBump, class)
    }

    pub fn poly(class: SupportClass) -> Self {
        Self::new(BumpPreset::PolyBump, class)
    }

    pub fn all() -> Vec<BumpFunction> {
        let mut out = Vec::new();
        for p in [BumpPreset::GaussBump, BumpPreset::PolyBump] {
            for c in [SupportClass::Annular, SupportClass::Full] {
                out.push(Self::new(p, c));
            }
        }
        out
    }

    pub fn name(&self) -> &'static str {
        match self.preset {
            BumpPreset::GaussBump => "gauss-bump",
            BumpPreset::PolyBump => "poly-bump",
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let a = s.abs();
        match self.class {
            SupportClass::Full => profile(self.preset, 0.5 * a),
            SupportClass::Annular => profile(self.preset, 2.0 * (a - 1.5)),
        }
    }

    /// Range of |s| outside which ψ vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self.class {
            SupportClass::Full => (0.0, 2.0),
            SupportClass::Annular => (1.0, 2.0),
        }
    }

    /// Number of continuous derivatives; `None` for C^∞.
    pub fn smoothness(&self) -> Option<u32> {
        match self.preset {
            BumpPreset::GaussBump => None,
            BumpPreset::PolyBump => Some(4),
        }
    }

    /// Rejects full-support bumps at λ ≥ 1.
    pub fn check_lambda(&self, lambda: f64) -> Result<()> {
        if lambda >= 1.0 && self.class == SupportClass::Full {
            return invalid(format!("{} with full support needs λ < 1, got λ = {lambda}", self.name()));
        }
        Ok(())
    }

    /// max_{j ≤ n} sup |ψ^{(j)}| by sampled central differences.
    pub fn cn_norm(&self, n: usize) -> f64 {
        cn_norm(&|s| self.eval(s), self.support().1, n)
    }

    pub fn describe(&self) -> String {
        let support = match self.class {
            SupportClass::Full => "[-2,2]",
            SupportClass::Annular => "[-2,-1]∪[1,2]",
        };
        let smooth = match self.smoothness() {
            None => "C^inf".to_string(),
            Some(k) => format!("C^{k}"),
        };
        let class = match self.class {
            SupportClass::Full => "full",
            SupportClass::Annular => "annular",
        };
        format!("{} {class} support ⊆ {support} smoothness {smooth}", self.name())
    }
}

/// Text listing of all presets, one per line.
pub fn list_presets() -> String {
    BumpFunction::all().iter().map(|b| b.describe() + "\n").collect()
}

pub(crate) fn cn_norm(f: &dyn Fn(f64) -> f64, half_width: f64, n: usize) -> f64 {
    let h = 1e-2;
    let pts = 2000;
    let mut best = 0.0f64;
    for i in 0..=pts {
        let s = -half_width - 0.1 + (2.0 * half_width + 0.2) * i as f64 / pts as f64;
        // j-th central difference from binomial weights
        for j in 0..=n {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for k in 0..=j {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * f(s + (0.5 * j as f64 - k as f64) * h);
                binom *= (j - k) as f64 / (k + 1) as f64;
            }
            best = best.max((acc / h.powi(j as i32)).abs());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supports_and_evenness() {
        for b in BumpFunction::all() {
            let (lo, hi) = b.support();
            for i in 0..200 {
                let s = -3.0 + 6.0 * i as f64 / 199.0;
                assert_eq!(b.eval(s), b.eval(-s));
                if s.abs() >= hi || s.abs() <= lo && b.class == SupportClass::Annular {
                    assert_eq!(b.eval(s), 0.0);
                }
            }
            assert!((b.eval(if b.class == SupportClass::Full { 0.0 } else { 1.5 }) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda_rule() {
        assert!(BumpFunction::gauss(SupportClass::Full).check_lambda(2.0).is_err());
        assert!(BumpFunction::gauss(SupportClass::Full).check_lambda(0.5).is_ok());
        assert!(BumpFunction::poly(SupportClass::Annular).check_lambda(8.0).is_ok());
    }

    #[test]
    fn listing_is_stable() {
        let a = list_presets();
        assert_eq!(a, list_presets());
        assert!(a.contains("gauss-bump"));
        assert!(a.contains("annular support ⊆ [-2,-1]∪[1,2]"));
    }

    #[test]
    fn cn_norm_of_poly() {
        let b = BumpFunction::poly(SupportClass::Full);
        // sup |ψ| = 1, sup |ψ'| attained inside
        assert!(b.cn_norm(0) > 0.999 && b.cn_norm(0) <= 1.0 + 1e-12);
        assert!(b.cn_norm(2) > b.cn_norm(0));
    }
}
