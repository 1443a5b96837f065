use std::fmt::Write as _;

use drwave_core::wave_kernels::SweepReport;

fn distinct(xs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for x in xs {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Envelope rescaled to pass through the first value, so its slope is the predicted one.
fn anchor(report: &SweepReport, pick: impl Fn(f64, f64) -> bool) -> Option<f64> {
    report.rows.iter().find(|r| pick(r.lambda, r.t) && r.value > 0.0 && r.envelope > 0.0).map(|r| r.value / r.envelope)
}

/// gnuplot script: log-log value against t for each λ, and against λ for each t, each with its predicted line dashed.
///
/// Columns of `<stem>.csv`: 1 lambda, 2 t, 3 epsilon, 4 r, 5 value, 6 stderr, 7 envelope, 8 ratio.
pub fn plot_script(stem: &str, report: &SweepReport) -> String {
    let csv = format!("{stem}.csv");
    let mut s = String::new();
    let _ = writeln!(s, "# {}", report.name);
    let _ = writeln!(s, "set terminal pngcairo size 1200,500");
    let _ = writeln!(s, "set output '{stem}.png'");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set key left top");
    let _ = writeln!(s, "set multiplot layout 1,2");
    let panels: [(&str, usize, usize, Vec<f64>); 2] = [
        ("t", 2, 1, distinct(report.rows.iter().map(|r| r.lambda))),
        ("lambda", 1, 2, distinct(report.rows.iter().map(|r| r.t))),
    ];
    for (xlabel, xcol, keycol, keys) in panels {
        let _ = writeln!(s, "set xlabel '{xlabel}'");
        let _ = writeln!(s, "set ylabel 'value'");
        let mut parts = Vec::new();
        let other = if keycol == 1 { "lambda" } else { "t" };
        for k in keys {
            let pick = |l: f64, t: f64| if keycol == 1 { l == k } else { t == k };
            let n = report.rows.iter().filter(|r| pick(r.lambda, r.t)).count();
            if n < 2 {
                continue;
            }
            parts.push(format!("'{csv}' every ::1 using {xcol}:(${keycol}=={k:e} ? $5 : 1/0) with linespoints title '{other}={k}'"));
            if let Some(c) = anchor(report, pick) {
                parts.push(format!("'{csv}' every ::1 using {xcol}:(${keycol}=={k:e} ? {c:e}*$7 : 1/0) with lines dt 2 title 'predicted, {other}={k}'"));
            }
        }
        if parts.is_empty() {
            let _ = writeln!(s, "set label 1 'single {xlabel} value' at graph 0.5,0.5 center");
            let _ = writeln!(s, "plot 1/0 notitle");
            let _ = writeln!(s, "unset label 1");
        } else {
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
    }
    let _ = writeln!(s, "unset multiplot");
    s
}
