//! Run configuration: a TOML (or JSON, by extension) file describing the
//! divider, the sweep grid, and which artifacts to write. Loading and
//! dumping round-trip exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use fpd_core::synthesis::DividerSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub divider: DividerSection,
    pub grid: GridSection,
    #[serde(default)]
    pub outputs: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<RefineSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substrate: Option<SubstrateSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DividerSection {
    pub f0_hz: f64,
    pub fbw: f64,
    pub n_way: usize,
    pub order: usize,
    #[serde(default = "default_z0")]
    pub z0: f64,
    pub ripple_db: f64,
}

fn default_z0() -> f64 {
    50.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "yes")]
    pub touchstone: bool,
    #[serde(default)]
    pub csv: bool,
    #[serde(default)]
    pub svg: bool,
    #[serde(default = "yes")]
    pub metrics: bool,
    #[serde(default = "yes")]
    pub netlist: bool,
    #[serde(default = "yes")]
    pub plan: bool,
    #[serde(default = "default_stem")]
    pub stem: String,
}

fn yes() -> bool {
    true
}

fn default_stem() -> String {
    "divider".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            touchstone: true,
            csv: false,
            svg: false,
            metrics: true,
            netlist: true,
            plan: true,
            stem: default_stem(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    pub unloaded_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_refine_iters")]
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_rl_db: Option<f64>,
}

fn default_refine_iters() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateSection {
    pub eps_r: f64,
    pub h_m: f64,
    #[serde(default)]
    pub tan_delta: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.divider_spec()?;
        if !(self.grid.start_hz > 0.0) {
            return Err(CliError::Config(
                "grid.start_hz must be positive".into(),
            ));
        }
        if self.grid.start_hz >= self.grid.stop_hz {
            return Err(CliError::Config(
                "grid.start_hz must be below grid.stop_hz".into(),
            ));
        }
        if self.grid.points < 2 {
            return Err(CliError::Config("grid.points must be at least 2".into()));
        }
        if let Some(loss) = &self.loss {
            if !(loss.unloaded_q > 0.0) {
                return Err(CliError::Config(
                    "loss.unloaded_q must be positive".into(),
                ));
            }
        }
        if let Some(sub) = &self.substrate {
            fpd_core::microstrip::Substrate::new(sub.eps_r, sub.h_m, sub.tan_delta)
                .map_err(|e| CliError::Config(format!("substrate: {e}")))?;
        }
        Ok(())
    }

    pub fn divider_spec(&self) -> Result<DividerSpec> {
        let d = &self.divider;
        DividerSpec::new(d.f0_hz, d.fbw, d.n_way, d.order, d.z0, d.ripple_db)
            .map_err(|e| CliError::Config(format!("divider: {e}")))
    }

    /// Reference three-way design on its published grid; used when no
    /// config is given to `microstrip`.
    pub fn reference() -> Self {
        RunConfig {
            divider: DividerSection {
                f0_hz: 2.6e9,
                fbw: 0.03,
                n_way: 3,
                order: 3,
                z0: 50.0,
                ripple_db: 0.04321,
            },
            grid: GridSection {
                start_hz: 2.4e9,
                stop_hz: 2.8e9,
                points: 2001,
            },
            outputs: OutputSection::default(),
            loss: None,
            refine: None,
            substrate: None,
        }
    }
}

/// Reads a config, accepting TOML or JSON depending on the file extension.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config: RunConfig = if is_json(path) {
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    };
    config.validate()?;
    Ok(config)
}

/// Serializes a config in the format implied by the target extension.
pub fn dump_config(config: &RunConfig, path: &Path) -> Result<String> {
    let text = if is_json(path) {
        let mut t = serde_json::to_string_pretty(config)
            .map_err(|e| CliError::Config(e.to_string()))?;
        t.push('\n');
        t
    } else {
        toml::to_string_pretty(config).map_err(|e| CliError::Config(e.to_string()))?
    };
    Ok(text)
}

/// Writes a config next to the other artifacts.
pub fn save_config(config: &RunConfig, path: &Path) -> Result<()> {
    std::fs::write(path, dump_config(config, path)?)?;
    Ok(())
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}
