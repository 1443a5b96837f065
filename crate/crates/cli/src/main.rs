mod config;
mod plot;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use run::{Artifact, RunError};

#[derive(Parser)]
#[command(name = "drwave", version, about = "Wave kernels and their estimates on Damek-Ricci spaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configured command and write CSV, JSON and gnuplot files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; all cores when absent.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Monte Carlo seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the bump presets.
    ListPresets,
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn write_all(dir: &Path, arts: &[Artifact]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for a in arts {
        fs::write(dir.join(format!("{}.csv", a.stem)), &a.csv)?;
        let mut js = serde_json::to_string_pretty(&a.sidecar).expect("sidecar serializes");
        js.push('\n');
        fs::write(dir.join(format!("{}.json", a.stem)), js)?;
        if let Some(p) = &a.plot {
            fs::write(dir.join(format!("{}.gp", a.stem)), p)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, jobs, out, seed) = match cli.command {
        Cmd::ListPresets => {
            print!("{}", drwave_core::wave_kernels::list_presets());
            return ExitCode::SUCCESS;
        }
        Cmd::Run { config, jobs, out, seed } => (config, jobs, out, seed),
    };
    let text = match fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => return fail(2, &format!("cannot read {}: {e}", config.display())),
    };
    let mut cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail(2, &e),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let Some(dir) = out.or_else(|| cfg.output.clone()) else {
        return fail(2, "no output directory: set \"output\" or pass --out");
    };
    if let Err(e) = cfg.validate() {
        return fail(2, &e);
    }
    if let Some(j) = jobs {
        if j == 0 {
            return fail(2, "--jobs must be at least 1");
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let arts = match run::run(&cfg) {
        Ok(a) => a,
        Err(RunError::Invalid(m)) => return fail(2, &m),
        Err(RunError::Numeric(m)) => return fail(3, &format!("numeric failure at {m}")),
    };
    if let Err(e) = write_all(&dir, &arts) {
        return fail(3, &format!("cannot write to {}: {e}", dir.display()));
    }
    for a in &arts {
        println!("{} {}", if a.pass { "PASS" } else { "FAIL" }, dir.join(format!("{}.csv", a.stem)).display());
    }
    if let Some(f) = arts.iter().flat_map(|a| a.failures.first()).next() {
        return fail(3, &format!("numeric failure at {f}"));
    }
    if arts.iter().all(|a| a.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
