//! TOML run configuration. Keys are listed in `docs/config.md`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::canonical::parse_scalar;
use crate::jacobi::PartitionTree;
use crate::pipeline::RunSpec;
use crate::pzw::{ParticleSystem, Scheme};
use crate::symkernel::ScalarExpr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("config field `{field}`: {msg}")]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

fn bad(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_owned(),
        msg: msg.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Latex,
    Canonical,
    Both,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "latex" => Some(OutputFormat::Latex),
            "canonical" => Some(OutputFormat::Canonical),
            "both" => Some(OutputFormat::Both),
            _ => None,
        }
    }
}

pub fn parse_scheme(s: &str) -> Option<Scheme> {
    match s {
        "mp" | "multipolar" => Some(Scheme::Multipolar),
        "mc" | "minimal" => Some(Scheme::Minimal),
        _ => None,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    name: String,
    particles: Option<usize>,
    charges: Vec<i64>,
    masses: Vec<String>,
    nucleus: usize,
    #[serde(rename = "Z")]
    z: u32,
    spins: Option<Vec<bool>>,
    partition: Option<String>,
    scheme: Option<String>,
    order: Option<u32>,
    output: Option<String>,
    reference: Option<PathBuf>,
    include_self_energy: Option<bool>,
    hbar_c_units: Option<bool>,
    #[serde(default)]
    abbreviations: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spec: RunSpec,
    pub output: OutputFormat,
    pub reference: Option<PathBuf>,
    pub hbar_c_units: bool,
    /// Printing-only names for mass combinations, e.g. `M1 = (+ m1 m2)`.
    pub abbreviations: Vec<(String, ScalarExpr)>,
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<RunConfig, ConfigError> {
        let raw: Raw = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_owned();
            let field = msg
                .split('`')
                .nth(1)
                .map(str::to_owned)
                .unwrap_or_else(|| "<document>".to_owned());
            ConfigError { field, msg }
        })?;
        let n = raw.charges.len();
        if let Some(p) = raw.particles {
            if p != n {
                return Err(bad("particles", format!("{p} particles but {n} charges")));
            }
        }
        let spins = raw.spins.unwrap_or_else(|| vec![true; n]);
        let system = ParticleSystem {
            name: raw.name,
            charges: raw.charges,
            masses: raw.masses,
            nucleus: raw.nucleus,
            z: raw.z,
            spins,
        };
        system.validate().map_err(|e| {
            let field = match e {
                crate::pzw::SystemError::Length { field, .. } => field,
                crate::pzw::SystemError::Nucleus(_) => "nucleus",
                crate::pzw::SystemError::ZeroZ => "Z",
                crate::pzw::SystemError::MassName(_) => "masses",
                _ => "charges",
            };
            bad(field, e.to_string())
        })?;
        if system.charges[system.nucleus - 1].unsigned_abs() != system.z as u64 {
            return Err(bad(
                "Z",
                format!(
                    "nucleus charge {} does not have magnitude Z = {}",
                    system.charges[system.nucleus - 1],
                    system.z
                ),
            ));
        }
        let partition = raw
            .partition
            .map(|p| PartitionTree::parse(&p))
            .transpose()
            .map_err(|e| bad("partition", e.to_string()))?;
        if let Some(t) = &partition {
            t.validate(n).map_err(|e| bad("partition", e.to_string()))?;
        }
        let scheme = match raw.scheme.as_deref() {
            None => Scheme::Multipolar,
            Some(s) => {
                parse_scheme(s).ok_or_else(|| bad("scheme", format!("`{s}` is not mp or mc")))?
            }
        };
        let order = raw.order.unwrap_or(2);
        if order == 0 {
            return Err(bad("order", "order must be at least 1"));
        }
        let output = match raw.output.as_deref() {
            None => OutputFormat::Both,
            Some(s) => OutputFormat::parse(s)
                .ok_or_else(|| bad("output", format!("`{s}` is not latex, canonical or both")))?,
        };
        let table = system.symbol_table();
        let mut abbreviations = Vec::new();
        for (name, expr) in raw.abbreviations {
            let value = parse_scalar(&expr, &table)
                .map_err(|e| bad(&format!("abbreviations.{name}"), e.to_string()))?;
            abbreviations.push((name, value));
        }
        let reference = raw.reference.map(|r| match base_dir {
            Some(d) if r.is_relative() => d.join(r),
            _ => r,
        });
        Ok(RunConfig {
            spec: RunSpec {
                system,
                partition,
                scheme,
                order,
                include_self_energy: raw.include_self_energy.unwrap_or(false),
            },
            output,
            reference,
            hbar_c_units: raw.hbar_c_units.unwrap_or(true),
            abbreviations,
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad("<file>", format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text, path.parent())
    }
}
