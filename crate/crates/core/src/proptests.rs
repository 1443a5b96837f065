//! Invariants checked on random inputs.

use crate::abel_calculus::OscillatorySymbol;
use crate::dr_space::{DRSpace, SPoint};
use crate::spherical::SphericalFunction;
use crate::wave_kernels::*;
use proptest::prelude::*;

fn space(even: bool) -> DRSpace {
    if even {
        DRSpace::quaternionic(2).unwrap()
    } else {
        DRSpace::heisenberg()
    }
}

fn point(sp: &DRSpace, c: &[f64]) -> SPoint {
    let (mv, mz) = (sp.m_v(), sp.m_z());
    SPoint::new(c[..mv].to_vec(), c[mv..mv + mz].to_vec(), c[mv + mz].exp())
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, 7)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_is_associative(even in any::<bool>(), a in coords(), b in coords(), c in coords()) {
        let sp = space(even);
        let (x, y, z) = (point(&sp, &a), point(&sp, &b), point(&sp, &c));
        let l = sp.s_multiply(&sp.s_multiply(&x, &y), &z).to_flat();
        let r = sp.s_multiply(&x, &sp.s_multiply(&y, &z)).to_flat();
        for (p, q) in l.iter().zip(&r) {
            prop_assert!(close(*p, *q, 1e-12));
        }
    }

    #[test]
    fn modular_function_is_multiplicative(even in any::<bool>(), a in coords(), b in coords()) {
        let sp = space(even);
        let (x, y) = (point(&sp, &a), point(&sp, &b));
        let d = sp.modular_delta(&sp.s_multiply(&x, &y));
        prop_assert!(close(d, sp.modular_delta(&x) * sp.modular_delta(&y), 1e-12));
    }

    #[test]
    fn distance_is_left_invariant(even in any::<bool>(), a in coords(), b in coords(), g in coords()) {
        let sp = space(even);
        let (x, y, h) = (point(&sp, &a), point(&sp, &b), point(&sp, &g));
        let d0 = sp.distance(&x, &y);
        let d1 = sp.distance(&sp.s_multiply(&h, &x), &sp.s_multiply(&h, &y));
        prop_assert!(close(d0, d1, 1e-8));
        prop_assert!(close(d0, sp.distance(&y, &x), 1e-8));
    }

    #[test]
    fn dyadic_partition_telescopes(s in 0.0f64..2000.0) {
        let chi = Cutoff::standard();
        let sum: f64 = (0..=12).map(|j| chi.psi_j(j, s)).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!((0..=12).all(|j| chi.psi_j(j, s) >= 0.0));
    }

    #[test]
    fn symbol_conjugate_symmetry(p in 0usize..3, q in 0usize..3, s in 0.1f64..5.0, v in 0.3f64..4.0) {
        let sym = OscillatorySymbol::operator_power(p, q);
        let a = sym.evaluate(s, v);
        let b = sym.evaluate(-s, v).conj();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn sup_bound_scales_in_lambda(n in 3usize..10, lambda in 1.0f64..50.0, t in 0.05f64..20.0) {
        let ratio = sup_bound(n, 2.0 * lambda, t) / sup_bound(n, lambda, t);
        prop_assert!(close(ratio, 2f64.powf(0.5 * (n as f64 + 1.0)), 1e-12));
    }

    #[test]
    fn wave_multiplier_is_even(lambda in 0.3f64..20.0, t in -10.0f64..10.0, x in 0.0f64..2.5, sinc in any::<bool>()) {
        use crate::kernel::Multiplier;
        let flavor = if sinc { Flavor::Sinc } else { Flavor::Cosine };
        let class = if lambda < 1.0 { SupportClass::Full } else { SupportClass::Annular };
        let spec = WaveKernelSpec::new(&DRSpace::heisenberg(), BumpFunction::gauss(class), lambda, t, flavor, TimeScale::Plain).unwrap();
        let m = spec.multiplier();
        let s = x * lambda;
        prop_assert_eq!(m.eval(s), m.eval(-s));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spherical_function_even_in_s_and_bounded(even in any::<bool>(), s in 0.0f64..4.0, r in 0.0f64..6.0) {
        let sp = space(even);
        let a = SphericalFunction::new(&sp, s, 7.0).unwrap();
        let b = SphericalFunction::new(&sp, -s, 7.0).unwrap();
        let p0 = SphericalFunction::new(&sp, 0.0, 7.0).unwrap();
        prop_assert!(close(a.value(r), b.value(r), 1e-12));
        prop_assert!(a.value(r).abs() <= p0.value(r) * (1.0 + 1e-9));
    }

    #[test]
    fn kernel_is_even_in_time(even in any::<bool>(), t in 0.1f64..3.0, r in 0.1f64..3.0) {
        let sp = space(even);
        let g = BumpFunction::gauss(SupportClass::Annular);
        let k = |t: f64| WaveKernel::new(&WaveKernelSpec::w(&sp, g, 2.0, t).unwrap()).unwrap().scaled_profile(r);
        prop_assert!(close(k(t), k(-t), 1e-12));
    }
}

#[test]
fn csv_is_deterministic() {
    let sp = DRSpace::heisenberg();
    let g = BumpFunction::gauss(SupportClass::Annular);
    let a = sup_norm_check(&sp, g, &[4.0], &[1.0, 2.0]).unwrap();
    let b = sup_norm_check(&sp, g, &[4.0], &[1.0, 2.0]).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.sidecar(), b.sidecar());
}
