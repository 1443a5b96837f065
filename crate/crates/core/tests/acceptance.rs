//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::sync::Arc;
use std::time::Instant;

use common::{nested_operator, rel_err};
use drwave_core::abel_calculus::OscillatorySymbol;
use drwave_core::kernel::SquaredArgument;
use drwave_core::spherical::{conjugation_check, multiplier_radial_kernel, spherical_transform};
use drwave_core::wave_kernels::*;
use drwave_core::{DRSpace, SPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (u32, &'static str, f64, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn spaces() -> [DRSpace; 2] {
    [DRSpace::heisenberg(), DRSpace::quaternionic(2).unwrap()]
}

fn check_line(r: &SweepReport, name: &str) -> (bool, String) {
    match r.check(name) {
        Some(c) => (c.pass, format!("{} {:.3} (target {} {} {})", name, c.value, c.target, c.mode, c.tol)),
        None => (false, format!("{name} missing; failures {:?}", r.failures)),
    }
}

fn symbol_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let s = rng.gen_range(0.1..6.0);
        let v = rng.gen_range(0.6..4.0);
        for p in 0..=4 {
            for q in 0..=4 - p {
                let sym = OscillatorySymbol::operator_power(p, q);
                worst = worst.max(rel_err(sym.evaluate(s, v), nested_operator(p, q, s, v)));
            }
        }
    }
    Outcome { pass: worst < 1e-8, detail: format!("max rel err {worst:.2e} over 20 points, p+q <= 4 (limit 1e-8)") }
}

fn master_roundtrip() -> Outcome {
    let mut worst: f64 = 0.0;
    for sp in spaces() {
        for preset in [BumpPreset::GaussBump, BumpPreset::PolyBump] {
            let b = BumpFunction::new(preset, SupportClass::Annular);
            let m = SquaredArgument::new(move |y: f64| b.eval(y), 1.0, 2.0);
            let (_, k) = multiplier_radial_kernel(&sp, &m).unwrap();
            for y in [1.25f64, 1.5, 1.75] {
                let h = spherical_transform(&k, y.sqrt()).unwrap();
                let want = b.eval(y);
                worst = worst.max((h - want).norm() / want);
            }
        }
    }
    Outcome { pass: worst < 1e-4, detail: format!("max rel err {worst:.2e}, 2 bumps x 2 spaces x 3 s (limit 1e-4)") }
}

fn conjugation() -> Outcome {
    let f = |r: f64| {
        let e = (-r * r).exp();
        (e, -2.0 * r * e, (4.0 * r * r - 2.0) * e)
    };
    let mut disc: f64 = 0.0;
    let mut order = f64::INFINITY;
    for sp in spaces() {
        let pts: Vec<SPoint> = [0.5, 1.0, 2.0].iter().map(|&r| sp.shell_point(r, 0.2 * r, 0.3)).collect();
        let rep = conjugation_check(&sp, &f, &pts, 1e-3);
        disc = disc.max(rep.max_discrepancy);
        order = order.min(rep.min_order);
    }
    Outcome {
        pass: disc < 1e-4 && order > 1.8,
        detail: format!("max discrepancy {disc:.2e} (limit 1e-4), min observed order {order:.2} (want 2)"),
    }
}

fn envelope() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for sp in spaces() {
        for preset in [BumpPreset::GaussBump, BumpPreset::PolyBump] {
            for tau in [0.0, 0.5] {
                let grid = EnvelopeGrid::standard(&sp, tau);
                let r = verify_envelope_g(&sp, BumpFunction::new(preset, SupportClass::Annular), &grid).unwrap();
                let c = r.check("per-lambda max ratio spread").unwrap();
                pass &= c.pass && r.failures.is_empty();
                parts.push(format!("n={} {:?} tau={tau}: {:.2}", sp.n(), preset, c.value));
            }
        }
    }
    Outcome { pass, detail: format!("spread (limit 10) {}", parts.join(", ")) }
}

fn l1_exponents() -> Outcome {
    let g = BumpFunction::gauss(SupportClass::Annular);
    let mut pass = true;
    let mut parts = Vec::new();
    for sp in spaces() {
        let n = sp.n();
        let runs: [(&[f64], &[f64], &str); 4] = [
            (&[0.5], &[2.0, 4.0, 8.0, 16.0], "1+t-exponent at lambda=0.5 eps=0"),
            (&[4.0], &[8.0, 16.0, 32.0, 64.0], "t-exponent at lambda=4 eps=0"),
            (&[2.0, 4.0, 8.0, 16.0], &[64.0], "lambda-exponent at t=64 eps=0"),
            (&[32.0], &[2.0, 4.0, 8.0, 16.0], "1+t-exponent at lambda=32 eps=0"),
        ];
        for (lambdas, ts, name) in runs {
            let r = sweep_l1(&sp, g, lambdas, ts, &[0.0], WeightKind::RPower).unwrap();
            let (ok, line) = check_line(&r, name);
            pass &= ok;
            parts.push(format!("n={n} {line} {}", if ok { "ok" } else { "off" }));
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn gradient_exponents() -> Outcome {
    let sp = DRSpace::heisenberg();
    let g = BumpFunction::gauss(SupportClass::Annular);
    let mut pass = true;
    let mut parts = Vec::new();
    for (lambdas, ts, name) in [
        (&[0.5][..], &[2.0, 4.0, 8.0, 16.0][..], "1+t-exponent at lambda=0.5 eps=0"),
        (&[32.0][..], &[1.0, 2.0, 4.0, 8.0][..], "1+t-exponent at lambda=32 eps=0"),
    ] {
        let r = sweep_gradient(&sp, g, lambdas, ts, McOptions::default()).unwrap();
        let (ok, line) = check_line(&r, name);
        let worst_se = r.rows.iter().filter_map(|x| x.stderr.map(|se| se / x.value)).fold(0.0, f64::max);
        let se_ok = worst_se < 0.03;
        pass &= ok && se_ok;
        parts.push(format!("{line} {}, max rel stderr {worst_se:.4}", if ok { "ok" } else { "off" }));
    }
    Outcome { pass, detail: format!("n=4 {}", parts.join("; ")) }
}

fn lemma() -> Outcome {
    let rep = lemma_report(&DRSpace::heisenberg(), &[0.1, 1.0, 10.0]).unwrap();
    let prods: Vec<String> = rep.rows.iter().map(|r| format!("{:.6}", r.product)).collect();
    Outcome { pass: rep.pass, detail: format!("products {} spread {:.2e} (limit 1.01)", prods.join(", "), rep.spread) }
}

fn sup_norm() -> Outcome {
    let g = BumpFunction::gauss(SupportClass::Annular);
    let mut pass = true;
    let mut parts = Vec::new();
    for sp in spaces() {
        let a = sup_norm_check(&sp, g, &[4.0, 8.0, 16.0, 32.0], &[1.0]).unwrap();
        let (ok1, l1) = check_line(&a, "lambda-exponent at t=1");
        let b = sup_norm_check(&sp, g, &[8.0], &[1.0, 2.0, 4.0, 7.0, 10.0]).unwrap();
        let (ok2, l2) = check_line(&b, "sup variation over t in [1,10] at lambda=8");
        pass &= ok1 && ok2;
        parts.push(format!("n={} {l1} {}, {l2} {}", sp.n(), if ok1 { "ok" } else { "off" }, if ok2 { "ok" } else { "off" }));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn dyadic() -> Outcome {
    let chi = Cutoff::standard();
    let mut pu: f64 = 0.0;
    for i in 0..=4000 {
        let s = 1000.0 * i as f64 / 4000.0;
        let sum: f64 = (0..=12).map(|j| chi.psi_j(j, s)).sum();
        pu = pu.max((sum - 1.0).abs());
    }
    let alpha = 1.5;
    let m: Symbol = Arc::new(move |s: f64| (1.0 + s * s).powf(-0.5 * alpha));
    let (_, fit) = piece_decay(m, 10).unwrap();
    let decay_ok = (fit.exponent + alpha).abs() <= 0.05 * alpha;
    let sp = DRSpace::heisenberg();
    let m3: Symbol = Arc::new(|s: f64| (1.0 + s * s).powf(-1.5));
    let mut conv = Vec::new();
    let mut conv_ok = true;
    for t in [0.5, 2.0] {
        let rep = dyadic_l1_report(&sp, m3.clone(), 3.0, t, 6, Flavor::Cosine).unwrap();
        let sw = rep.to_sweep(sp.n());
        conv_ok &= sw.pass();
        let last = rep.rows.last().unwrap();
        conv.push(format!("t={t} partial sum {:.4} remainder {:.1e}", last.partial_sum, rep.remainder));
    }
    Outcome {
        pass: pu < 1e-12 && decay_ok && conv_ok,
        detail: format!(
            "partition error {pu:.1e} (limit 1e-12), C0 decay exponent {:.3} (target -{alpha} +/- 5%), {}",
            fit.exponent,
            conv.join(", ")
        ),
    }
}

fn subordination() -> Outcome {
    let mut worst: f64 = 0.0;
    for sp in spaces() {
        for lambda in [2.0, 4.0] {
            for r in [0.5, 1.0, 2.0] {
                let row = subordination_kernel(&sp, default_f(), lambda, r).unwrap();
                worst = worst.max(row.rel_err);
            }
        }
    }
    Outcome { pass: worst < 1e-3, detail: format!("max rel disagreement {worst:.2e} over 2 spaces x 2 lambda x 3 radii (limit 1e-3)") }
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "symbolic calculus exactness", 10.0, symbol_exactness),
        (2, "master roundtrip", 300.0, master_roundtrip),
        (3, "conjugation identity", 60.0, conjugation),
        (4, "kernel envelope constant stability", 1800.0, envelope),
        (5, "weighted L1 exponents", 1800.0, l1_exponents),
        (6, "gradient L1 exponents", 3600.0, gradient_exponents),
        (7, "N-integral identity", 120.0, lemma),
        (8, "sup-norm bound", 600.0, sup_norm),
        (9, "dyadic machinery", 600.0, dyadic),
        (10, "subordination consistency", 600.0, subordination),
    ];
    let mut all = true;
    for (id, title, budget, run) in criteria {
        let t0 = Instant::now();
        let out = run();
        let secs = t0.elapsed().as_secs_f64();
        let pass = out.pass && secs <= budget;
        all &= pass;
        println!("criterion {id:>2} {}: {title}: {} [{secs:.1}s of {budget:.0}s]", if pass { "PASS" } else { "FAIL" }, out.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
