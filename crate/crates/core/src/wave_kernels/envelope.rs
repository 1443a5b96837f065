//! Case-split bounds for G_λ and H_λ, with all constants set to 1.

use crate::dr_space::DRSpace;

fn decay(lambda: f64, u: f64, n_exp: i32) -> f64 {
    (1.0 + (lambda * u).abs()).powi(-n_exp)
}

/// Envelope of |G_λ(R, u)|; τ ∈ [0, 1/2] only matters for odd m_z.
pub fn envelope_g(sp: &DRSpace, lambda: f64, r: f64, u: f64, n_exp: i32, tau: f64) -> f64 {
    let n = sp.n() as i32;
    let nf = n as f64;
    let pow = if sp.mz_even() {
        (1..=(n - 1) / 2)
            .map(|k| {
                let kf = k as f64;
                let l = lambda.powf(kf + 1.0);
                if r >= 1.0 {
                    l
                } else {
                    r.powf(1.0 - nf + kf) * l
                }
            })
            .sum()
    } else if r >= 1.0 {
        if lambda >= 1.0 {
            lambda.powf(0.5 * (nf + 1.0))
        } else {
            lambda * lambda
        }
    } else if lambda >= 1.0 {
        (1..=n / 2)
            .map(|k| {
                let kf = k as f64;
                r.powf(-nf + kf + 0.5 + tau) * lambda.powf(kf + 0.5 + tau)
            })
            .sum()
    } else {
        r.powf(-nf + 1.5 + tau) * lambda * lambda
    };
    decay(lambda, u, n_exp) * pow
}

/// Envelope of |H_λ(R, u)|, the gradient counterpart of [`envelope_g`].
pub fn envelope_h(sp: &DRSpace, lambda: f64, r: f64, u: f64, n_exp: i32, tau: f64) -> f64 {
    let n = sp.n() as i32;
    let nf = n as f64;
    let pow = if sp.mz_even() {
        (1..=(n + 1) / 2)
            .map(|k| {
                let kf = k as f64;
                let l = lambda.powf(kf + 1.0);
                if r >= 1.0 {
                    l
                } else {
                    r.powf(-nf + kf) * l
                }
            })
            .sum()
    } else if r >= 1.0 {
        if lambda >= 1.0 {
            lambda.powf(0.5 * (nf + 3.0))
        } else {
            lambda * lambda
        }
    } else if lambda >= 1.0 {
        (1..=n / 2 + 1)
            .map(|k| {
                let kf = k as f64;
                r.powf(-nf + kf - 0.5 + tau) * lambda.powf(kf + 0.5 + tau)
            })
            .sum()
    } else {
        r.powf(-nf + 0.5 + tau) * lambda * lambda
    };
    decay(lambda, u, n_exp) * pow
}

/// δ^{1/2}e^{−QR/2}[env(R, R−t) + env(R, R+t)] without the δ^{1/2}e^{−QR/2} factor.
pub fn pair_envelope(env: fn(&DRSpace, f64, f64, f64, i32, f64) -> f64, sp: &DRSpace, lambda: f64, r: f64, t: f64, n_exp: i32, tau: f64) -> f64 {
    env(sp, lambda, r, r - t, n_exp, tau) + env(sp, lambda, r, r + t, n_exp, tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_branch_power_laws() {
        let sp = DRSpace::heisenberg();
        let n = sp.n() as f64;
        let a = envelope_g(&sp, 4.0, 2.0, 0.0, 6, 0.0);
        let b = envelope_g(&sp, 8.0, 2.0, 0.0, 6, 0.0);
        assert!((b / a - 2f64.powf(0.5 * (n + 1.0))).abs() < 1e-12);
        assert!((a - 4f64.powf(0.5 * (n + 1.0))).abs() < 1e-9);
        let h = envelope_h(&sp, 8.0, 2.0, 0.0, 6, 0.0);
        assert!((h / b - 8.0).abs() < 1e-12);
        let u = envelope_g(&sp, 4.0, 2.0, 0.5, 6, 0.0);
        assert!((u - a * 3f64.powi(-6)).abs() < 1e-12);
    }

    #[test]
    fn even_branch_sums() {
        let sp = DRSpace::quaternionic(2).unwrap();
        // n = 7: Σ_{k=1}^{3} λ^{k+1}
        let g = envelope_g(&sp, 2.0, 1.5, 0.0, 9, 0.0);
        assert!((g - (4.0 + 8.0 + 16.0)).abs() < 1e-12);
        let g = envelope_g(&sp, 2.0, 0.5, 0.0, 9, 0.0);
        let want: f64 = (1..=3).map(|k| 0.5f64.powi(1 - 7 + k) * 2f64.powi(k + 1)).sum();
        assert!((g - want).abs() < 1e-9);
    }
}
