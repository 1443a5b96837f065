use criterion::{criterion_group, criterion_main, Criterion};
use drwave_core::abel_calculus::{build_fr_symbol, eval_fr, FrSampler};
use drwave_core::spherical::SphericalFunction;
use drwave_core::wave_kernels::{n_integral, BumpFunction, SupportClass, WaveKernel, WaveKernelSpec};
use drwave_core::DRSpace;
use std::hint::black_box;

fn spaces() -> [(&'static str, DRSpace); 2] {
    [("n4", DRSpace::heisenberg()), ("n7", DRSpace::quaternionic(2).unwrap())]
}

fn fr_profile(c: &mut Criterion) {
    for (tag, sp) in spaces() {
        let pr = build_fr_symbol(&sp).unwrap();
        c.bench_function(&format!("eval_fr {tag}"), |b| b.iter(|| eval_fr(&pr, &sp, black_box(1.5), black_box(7.0)).unwrap()));
        c.bench_function(&format!("fr_sampler {tag} s<=64"), |b| b.iter(|| FrSampler::new(&pr, &sp, black_box(1.5), 64.0).unwrap()));
    }
}

fn spherical(c: &mut Criterion) {
    for (tag, sp) in spaces() {
        c.bench_function(&format!("phi_s {tag} s=3 r<=20"), |b| b.iter(|| SphericalFunction::new(&sp, black_box(3.0), 20.0).unwrap()));
    }
}

fn wave_kernel(c: &mut Criterion) {
    let mut g = c.benchmark_group("wave_kernel");
    g.sample_size(10);
    for (tag, sp) in spaces() {
        for lambda in [4.0, 16.0] {
            let spec = WaveKernelSpec::w(&sp, BumpFunction::gauss(SupportClass::Annular), lambda, 8.0).unwrap();
            g.bench_function(format!("profile {tag} lambda={lambda} t=8"), |b| b.iter(|| WaveKernel::new(black_box(&spec)).unwrap()));
        }
    }
    g.finish();
}

fn lemma(c: &mut Criterion) {
    let sp = DRSpace::heisenberg();
    c.bench_function("n_integral a=1", |b| b.iter(|| n_integral(&sp, black_box(1.0)).unwrap()));
}

criterion_group!(benches, fr_profile, spherical, wave_kernel, lemma);
criterion_main!(benches);
