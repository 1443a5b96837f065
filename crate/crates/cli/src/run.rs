use std::fmt::Write as _;
use std::sync::Arc;

use drwave_core::kernel::SquaredArgument;
use drwave_core::spherical::{multiplier_radial_kernel, spherical_transform};
use drwave_core::wave_kernels::*;
use drwave_core::{DRSpace, Error};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Command, RunConfig};
use crate::plot::plot_script;

/// One output file set: `<stem>.csv`, `<stem>.json` and optionally `<stem>.gp`.
pub struct Artifact {
    pub stem: String,
    pub csv: String,
    pub sidecar: serde_json::Value,
    pub plot: Option<String>,
    pub pass: bool,
    /// Failed cells, each identified.
    pub failures: Vec<String>,
}

pub enum RunError {
    Invalid(String),
    Numeric(String),
}

fn classify(e: Error, cell: &str) -> RunError {
    match e {
        Error::InvalidArgument(m) | Error::Unsupported(m) => RunError::Invalid(format!("{cell}: {m}")),
        other => RunError::Numeric(format!("{cell}: {other}")),
    }
}

fn from_report(stem: String, r: &SweepReport) -> Artifact {
    Artifact {
        plot: Some(plot_script(&stem, r)),
        csv: r.to_detail_csv(),
        sidecar: r.sidecar(),
        pass: r.pass(),
        failures: r.failures.clone(),
        stem,
    }
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Artifact>, RunError> {
    let sp = DRSpace::from_descriptor(&cfg.space).map_err(|e| classify(e, "space"))?;
    let g = &cfg.grids;
    let o = &cfg.options;
    let name = cfg.command.name();
    let psi = cfg.psi;
    let out = match cfg.command {
        Command::EvalKernel => vec![from_report(name.into(), &eval_kernel(&sp, cfg)?)],
        Command::SweepL1 => {
            let r = sweep_l1(&sp, psi, &g.lambda, &g.t, &g.epsilon, o.weight).map_err(|e| classify(e, name))?;
            vec![from_report(name.into(), &r)]
        }
        Command::SweepGradient => {
            let mc = McOptions { samples: o.samples, seed: cfg.seed, ..McOptions::default() };
            let r = sweep_gradient(&sp, psi, &g.lambda, &g.t, mc).map_err(|e| classify(e, name))?;
            vec![from_report(name.into(), &r)]
        }
        Command::VerifyEnvelopes => {
            let grid = EnvelopeGrid {
                lambdas: g.lambda.clone(),
                radii: g.r.clone(),
                offsets: o.offsets.clone(),
                n_exp: o.n_exp.unwrap_or(sp.n() as i32 + 2),
                tau: o.tau,
            };
            let rg = verify_envelope_g(&sp, psi, &grid).map_err(|e| classify(e, name))?;
            let rh = verify_envelope_h(&sp, psi, &grid).map_err(|e| classify(e, name))?;
            vec![from_report(format!("{name}-g"), &rg), from_report(format!("{name}-h"), &rh)]
        }
        Command::VerifyRoundtrip => vec![roundtrip(&sp, cfg)?],
        Command::DyadicReport => {
            let alpha = o.alpha;
            let m: Symbol = Arc::new(move |s: f64| (1.0 + s * s).powf(-0.5 * alpha));
            let mut arts = Vec::new();
            for (i, &t) in g.t.iter().enumerate() {
                let rep = dyadic_l1_report(&sp, m.clone(), alpha, t, o.j_max, o.flavor).map_err(|e| classify(e, &format!("t={t}")))?;
                arts.push(from_report(format!("{name}-{i}"), &rep.to_sweep(sp.n())));
            }
            arts
        }
        Command::SupNorm => {
            let r = sup_norm_check(&sp, psi, &g.lambda, &g.t).map_err(|e| classify(e, name))?;
            vec![from_report(name.into(), &r)]
        }
        Command::Subordinate => vec![subordinate(&sp, cfg)?],
    };
    Ok(out)
}

/// |k^t_λ| on the sphere of radius R at its largest δ^{1/2}, against the paired G-envelope.
fn eval_kernel(sp: &DRSpace, cfg: &RunConfig) -> Result<SweepReport, RunError> {
    let g = &cfg.grids;
    let n_exp = cfg.options.n_exp.unwrap_or(sp.n() as i32 + 2);
    let r_max = g.r.iter().cloned().fold(0.0, f64::max);
    let cells: Vec<(f64, f64)> = g.lambda.iter().flat_map(|&l| g.t.iter().map(move |&t| (l, t))).collect();
    let rows: Vec<Result<Vec<SweepRow>, RunError>> = cells
        .par_iter()
        .map(|&(lambda, t)| {
            let cell = format!("lambda={lambda} t={t}");
            let spec = WaveKernelSpec::new(sp, cfg.psi, lambda, t, Flavor::Cosine, TimeScale::Plain).map_err(|e| classify(e, &cell))?;
            let k = WaveKernel::with_reach(&spec, r_max + 1.0).map_err(|e| classify(e, &cell))?;
            Ok(g.r
                .iter()
                .map(|&r| {
                    let env = pair_envelope(envelope_g, sp, lambda, r, t, n_exp, cfg.options.tau);
                    let mut row = SweepRow::new(lambda, t, 0.0, k.scaled_profile(r).abs(), env);
                    row.r = Some(r);
                    row
                })
                .collect())
        })
        .collect();
    let mut report = SweepReport::new("eval-kernel");
    for res in rows {
        report.rows.extend(res?);
    }
    Ok(report)
}

fn roundtrip(sp: &DRSpace, cfg: &RunConfig) -> Result<Artifact, RunError> {
    let b = cfg.psi;
    let (lo, hi) = b.support();
    let s_grid: Vec<f64> = if cfg.grids.s.is_empty() {
        [0.25, 0.5, 0.75].iter().map(|f| (lo + f * (hi - lo)).sqrt()).collect()
    } else {
        cfg.grids.s.clone()
    };
    let m = SquaredArgument::new(move |y: f64| b.eval(y), lo, hi);
    let (_, k) = multiplier_radial_kernel(sp, &m).map_err(|e| classify(e, "kernel"))?;
    let mut csv = String::from("s,target,value,rel_err\n");
    let mut worst: f64 = 0.0;
    for &s in &s_grid {
        let h = spherical_transform(&k, s).map_err(|e| classify(e, &format!("s={s}")))?;
        let target = b.eval(s * s);
        if target == 0.0 {
            return Err(RunError::Invalid(format!("s={s} lies outside the support of ψ(s²)")));
        }
        let err = (h - target).norm() / target.abs();
        worst = worst.max(err);
        let _ = writeln!(csv, "{s:e},{target:e},{:e},{err:e}", h.re);
    }
    let pass = worst < 1e-4;
    Ok(Artifact {
        stem: "verify-roundtrip".into(),
        csv,
        sidecar: json!({"name": "verify-roundtrip", "psi": b.name(), "max_rel_err": worst, "limit": 1e-4, "pass": pass}),
        plot: None,
        pass,
        failures: Vec::new(),
    })
}

fn subordinate(sp: &DRSpace, cfg: &RunConfig) -> Result<Artifact, RunError> {
    let cells: Vec<(f64, f64)> = cfg.grids.lambda.iter().flat_map(|&l| cfg.grids.r.iter().map(move |&r| (l, r))).collect();
    let rows: Vec<Result<SubordinationRow, RunError>> = cells
        .par_iter()
        .map(|&(lambda, r)| subordination_kernel(sp, default_f(), lambda, r).map_err(|e| classify(e, &format!("lambda={lambda} R={r}"))))
        .collect();
    let mut csv = String::from("lambda,r,via_time,via_multiplier,rel_err,t_cut,capped\n");
    let mut worst: f64 = 0.0;
    for row in rows {
        let row = row?;
        worst = worst.max(row.rel_err);
        let _ = writeln!(csv, "{:e},{:e},{:e},{:e},{:e},{:e},{}", row.lambda, row.r, row.via_time, row.via_multiplier, row.rel_err, row.t_cut, row.capped);
    }
    let pass = worst < 1e-3;
    Ok(Artifact {
        stem: "subordinate".into(),
        csv,
        sidecar: json!({"name": "subordinate", "max_rel_err": worst, "limit": 1e-3, "pass": pass}),
        plot: None,
        pass,
        failures: Vec::new(),
    })
}
