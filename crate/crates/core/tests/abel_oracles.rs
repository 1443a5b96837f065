mod common;

use common::{nested_operator, rel_err, JACOBI_PROFILES};
use drwave_core::abel_calculus::OscillatorySymbol;
use drwave_core::wave_kernels::{BumpFunction, SupportClass, WaveKernel, WaveKernelSpec};
use drwave_core::DRSpace;

#[test]
fn symbol_matches_contour_differentiation() {
    for (p, q) in [(1, 0), (0, 1), (2, 1), (1, 3), (0, 4)] {
        let sym = OscillatorySymbol::operator_power(p, q);
        for (s, v) in [(0.3, 0.8), (2.5, 1.7), (5.0, 3.1)] {
            let e = rel_err(sym.evaluate(s, v), nested_operator(p, q, s, v));
            assert!(e < 1e-9, "p={p} q={q} s={s} v={v}: {e:e}");
        }
    }
}

#[test]
fn profiles_match_jacobi_inversion() {
    for (mv, mz, lambda, t, r, want) in JACOBI_PROFILES {
        let sp = if mz == 1 { DRSpace::heisenberg() } else { DRSpace::quaternionic(mz).unwrap() };
        assert_eq!(sp.m_v(), mv);
        let spec = WaveKernelSpec::w(&sp, BumpFunction::gauss(SupportClass::Annular), lambda, t).unwrap();
        let got = WaveKernel::new(&spec).unwrap().profile().value(r);
        assert!((got - want).abs() < 1e-8 * want.abs(), "n={} λ={lambda} t={t} r={r}: {got} vs {want}", sp.n());
    }
}
