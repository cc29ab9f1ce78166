//! Run configuration: a TOML file with explicit keys, plus dotted-path
//! `--set key=value` overrides applied to the raw document before
//! deserialization. A fixed seed makes every report byte-reproducible.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::OperatorParams;
use crate::spectral::SolverConfig;
use crate::verify::KernelConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: OperatorParams,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RMaxSpec {
    Auto(String),
    Value(f64),
}

impl Default for RMaxSpec {
    fn default() -> Self {
        RMaxSpec::Auto("auto".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    pub n_cells: usize,
    pub r_max: RMaxSpec,
    pub grading: f64,
    pub truncation_tol: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n_cells: 512,
            r_max: RMaxSpec::default(),
            grading: 1.0,
            truncation_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralSection {
    pub l_max: usize,
    pub n_per_mode: usize,
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection { l_max: 12, n_per_mode: 96 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelSection {
    pub b_factor: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_t: usize,
    pub n_radii: usize,
    pub n_angles: usize,
    pub seed: u64,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            b_factor: 1.1,
            t_lo: 1e-2,
            t_hi: 10.0,
            n_t: 14,
            n_radii: 10,
            n_angles: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveSection {
    /// One of `gaussian`, `bump`, `eigenmode:<n>`, `csv:<path>`.
    pub datum: String,
    pub t_final: f64,
    pub local_tol: f64,
    pub ell: usize,
}

impl Default for EvolveSection {
    fn default() -> Self {
        EvolveSection { datum: "gaussian".into(), t_final: 0.5, local_tol: 1e-8, ell: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    /// `csv` or `json`; subcommands with a fixed natural format ignore it.
    pub format: String,
    pub directory: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { format: "json".into(), directory: "out".into() }
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Value = text
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("config is not valid TOML: {e}")))?;
        for ov in overrides {
            apply_override(&mut doc, ov)?;
        }
        let cfg: RunConfig = doc
            .try_into()
            .map_err(|e| Error::InvalidConfig(format!("config rejected: {e}")))?;
        cfg.params.validate()?;
        if !(cfg.kernel.b_factor > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "kernel.b_factor must exceed 1 (strict inequality in the kernel bound exponent), got {}",
                cfg.kernel.b_factor
            )));
        }
        Ok(cfg)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            n_cells: self.grid.n_cells,
            r_max: match self.grid.r_max {
                RMaxSpec::Value(v) => Some(v),
                RMaxSpec::Auto(_) => None,
            },
            grading: self.grid.grading,
            truncation_tol: self.grid.truncation_tol,
        }
    }

    pub fn kernel_config(&self) -> KernelConfig {
        KernelConfig {
            l_max: self.spectral.l_max,
            n_per_mode: self.spectral.n_per_mode,
            b_factor: self.kernel.b_factor,
            t_lo: self.kernel.t_lo,
            t_hi: self.kernel.t_hi,
            n_t: self.kernel.n_t,
            n_radii: self.kernel.n_radii,
            n_angles: self.kernel.n_angles,
            seed: self.kernel.seed,
        }
    }
}

/// Applies one `a.b.c=value` override to the TOML tree; scalars are parsed
/// as bool, integer, float, then string, in that order.
fn apply_override(doc: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("override '{spec}' is not key=value")))?;
    let value = if let Ok(b) = raw.parse::<bool>() {
        toml::Value::Boolean(b)
    } else if let Ok(i) = raw.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = raw.parse::<f64>() {
        toml::Value::Float(f)
    } else {
        toml::Value::String(raw.to_string())
    };

    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node.as_table_mut().ok_or_else(|| {
            Error::InvalidConfig(format!("override path '{path}' crosses a non-table"))
        })?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    unreachable!("override path was empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[params]
alpha = 1.0
beta = 3.0
dim = 3
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::parse(MINIMAL, &[]).unwrap();
        assert_eq!(cfg.params.theta, 1.0);
        assert_eq!(cfg.grid.n_cells, 512);
        assert!(matches!(cfg.grid.r_max, RMaxSpec::Auto(_)));
        assert_eq!(cfg.kernel.seed, 0);
        assert_eq!(cfg.output.directory, "out");
    }

    #[test]
    fn overrides_apply_with_type_inference() {
        let cfg = RunConfig::parse(
            MINIMAL,
            &[
                "grid.n_cells=256".into(),
                "grid.r_max=12.5".into(),
                "params.theta=2.0".into(),
                "params.diffusion=unit".into(),
                "output.format=csv".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.grid.n_cells, 256);
        assert!(matches!(cfg.grid.r_max, RMaxSpec::Value(v) if v == 12.5));
        assert_eq!(cfg.params.theta, 2.0);
        assert_eq!(cfg.params.diffusion, crate::model::Diffusion::Unit);
        assert_eq!(cfg.output.format, "csv");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(RunConfig::parse("params = 3", &[]).is_err());
        assert!(RunConfig::parse(MINIMAL, &["kernel.b_factor=0.9".into()]).is_err());
        assert!(RunConfig::parse(MINIMAL, &["params.alpha=3.0".into()]).is_err());
        assert!(RunConfig::parse(MINIMAL, &["nonsense".into()]).is_err());
    }
}
