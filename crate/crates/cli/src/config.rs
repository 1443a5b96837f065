use std::path::PathBuf;

use drwave_core::wave_kernels::{BumpFunction, BumpPreset, Flavor, SupportClass, WeightKind};
use drwave_core::SpaceDescriptor;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EvalKernel,
    SweepL1,
    SweepGradient,
    VerifyEnvelopes,
    VerifyRoundtrip,
    DyadicReport,
    SupNorm,
    Subordinate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EvalKernel => "eval-kernel",
            Command::SweepL1 => "sweep-l1",
            Command::SweepGradient => "sweep-gradient",
            Command::VerifyEnvelopes => "verify-envelopes",
            Command::VerifyRoundtrip => "verify-roundtrip",
            Command::DyadicReport => "dyadic-report",
            Command::SupNorm => "sup-norm",
            Command::Subordinate => "subordinate",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default, rename = "R")]
    pub r: Vec<f64>,
    /// Spectral points for verify-roundtrip.
    #[serde(default)]
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default = "default_weight")]
    pub weight: WeightKind,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub tau: f64,
    /// Envelope exponent N; n + 2 when absent.
    pub n_exp: Option<i32>,
    /// Offsets w in t = R + w/λ for verify-envelopes.
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_j_max")]
    pub j_max: u32,
    #[serde(default = "default_flavor")]
    pub flavor: Flavor,
}

fn default_weight() -> WeightKind {
    WeightKind::RPower
}
fn default_samples() -> usize {
    100_000
}
fn default_offsets() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 4.0, 8.0]
}
fn default_alpha() -> f64 {
    3.0
}
fn default_j_max() -> u32 {
    6
}
fn default_flavor() -> Flavor {
    Flavor::Cosine
}

impl Default for Options {
    fn default() -> Self {
        Options {
            weight: default_weight(),
            samples: default_samples(),
            tau: 0.0,
            n_exp: None,
            offsets: default_offsets(),
            alpha: default_alpha(),
            j_max: default_j_max(),
            flavor: default_flavor(),
        }
    }
}

fn default_psi() -> BumpFunction {
    BumpFunction::new(BumpPreset::GaussBump, SupportClass::Annular)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceDescriptor,
    pub command: Command,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default = "default_psi")]
    pub psi: BumpFunction,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub options: Options,
}

fn need(name: &str, g: &[f64]) -> Result<(), String> {
    if g.is_empty() {
        return Err(format!("grids.{name} is empty"));
    }
    if let Some(v) = g.iter().find(|v| !v.is_finite()) {
        return Err(format!("grids.{name} has a non-finite entry {v}"));
    }
    Ok(())
}

fn positive(name: &str, g: &[f64]) -> Result<(), String> {
    match g.iter().find(|&&v| v <= 0.0) {
        Some(v) => Err(format!("grids.{name} must be positive, found {v}")),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config does not parse: {e}"))
    }

    /// Grid presence and λ / support-class compatibility.
    pub fn validate(&self) -> Result<(), String> {
        let g = &self.grids;
        match self.command {
            Command::EvalKernel => {
                need("lambda", &g.lambda)?;
                need("t", &g.t)?;
                need("R", &g.r)?;
                positive("R", &g.r)?;
            }
            Command::SweepL1 => {
                need("lambda", &g.lambda)?;
                need("t", &g.t)?;
                need("epsilon", &g.epsilon)?;
            }
            Command::SweepGradient => {
                need("lambda", &g.lambda)?;
                need("t", &g.t)?;
                if self.options.samples < 1000 {
                    return Err(format!("options.samples must be at least 1000, got {}", self.options.samples));
                }
            }
            Command::VerifyEnvelopes => {
                need("lambda", &g.lambda)?;
                need("R", &g.r)?;
                positive("R", &g.r)?;
            }
            Command::VerifyRoundtrip => {
                if !g.s.is_empty() {
                    need("s", &g.s)?;
                }
            }
            Command::DyadicReport => need("t", &g.t)?,
            Command::SupNorm => {
                need("lambda", &g.lambda)?;
                need("t", &g.t)?;
                positive("t", &g.t)?;
            }
            Command::Subordinate => {
                need("lambda", &g.lambda)?;
                need("R", &g.r)?;
                positive("R", &g.r)?;
            }
        }
        positive("lambda", &g.lambda)?;
        if self.command != Command::VerifyRoundtrip {
            for &l in &g.lambda {
                self.psi.check_lambda(l).map_err(|e| e.to_string())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"space": {"algebra": {"family": "complex", "k": 1, "m_z": 1}}, "command": "sweep-l1",
        "grids": {"lambda": [0.5], "t": [2, 4], "epsilon": [0]}}"#;

    #[test]
    fn parses_and_validates() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.command, Command::SweepL1);
        assert_eq!(c.psi.name(), "gauss-bump");
        c.validate().unwrap();
    }

    #[test]
    fn rejects_empty_grid_and_full_support_at_large_lambda() {
        let c = RunConfig::parse(&BASE.replace("[2, 4]", "[]")).unwrap();
        assert!(c.validate().unwrap_err().contains("grids.t"));
        let txt = BASE.replace("[0.5]", "[2]").replace("\"command\"", "\"psi\": {\"preset\": \"poly-bump\", \"class\": \"full\"}, \"command\"");
        assert!(RunConfig::parse(&txt).unwrap().validate().is_err());
        assert!(RunConfig::parse(&BASE.replace("sweep-l1", "sweep-l2")).is_err());
    }

    #[test]
    fn shipped_configs_validate() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        let mut count = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let c = RunConfig::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
        assert_eq!(count, 9);
    }
}
