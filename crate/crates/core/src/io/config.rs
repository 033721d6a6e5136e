use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raytracer::{Summation, MAX_ORDER};

/// Angle added for the tiled panel, whose beam is too narrow for 5° steps.
const TILED_EXTRA_ANGLE: f64 = 62.5;

/// Continuous-wave sweep definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySweep {
    pub start_ghz: f64,
    pub stop_ghz: f64,
    pub step_ghz: f64,
    pub angles_deg: Vec<f64>,
}

impl FrequencySweep {
    /// Sweep points, computed as `start + i·step` to avoid drift.
    pub fn frequencies_ghz(&self) -> Vec<f64> {
        let n = ((self.stop_ghz - self.start_ghz) / self.step_ghz + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start_ghz + i as f64 * self.step_ghz).collect()
    }
}

/// SNR-based EVM estimate settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvmSettings {
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
}

impl Default for EvmSettings {
    fn default() -> Self {
        EvmSettings {
            bandwidth_hz: 400e6,
            noise_figure_db: 2.7,
        }
    }
}

/// Externally supplied reflector patterns for one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSource {
    pub freq_ghz: f64,
    /// Response toward the source.
    pub rx: PathBuf,
    /// Re-radiated pattern.
    pub tx: PathBuf,
}

/// Input files; shipped data is used for any that are absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_params: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrections: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurements: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub patterns: Vec<PatternSource>,
}

/// Experiment manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Unit cells per side: 48, or 96 for the 2 × 2 tiling.
    pub panel: usize,
    pub angles_deg: Vec<f64>,
    pub frequencies_ghz: Vec<f64>,
    pub max_order: usize,
    #[serde(default)]
    pub summation: Summation,
    /// Also emit `P_r − P_diff` for each method.
    #[serde(default)]
    pub corrected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evm: Option<EvmSettings>,
    pub frequency_sweep: FrequencySweep,
    #[serde(default)]
    pub paths: RunPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            panel: 48,
            angles_deg: vec![55.0, 60.0, 65.0, 70.0, 75.0, 80.0, 85.0],
            frequencies_ghz: vec![25.0, 26.0, 27.0],
            max_order: 3,
            summation: Summation::Incoherent,
            corrected: false,
            evm: None,
            frequency_sweep: FrequencySweep {
                start_ghz: 24.5,
                stop_ghz: 27.5,
                step_ghz: 0.25,
                angles_deg: vec![60.0, 65.0, 70.0],
            },
            paths: RunPaths::default(),
        }
    }
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    if !v.contains(&x) {
        v.push(x);
        v.sort_by(f64::total_cmp);
    }
}

impl RunConfig {
    /// Selects a panel; the tiled panel also gets the extra 62.5° angle.
    pub fn with_panel(mut self, panel: usize) -> Self {
        self.panel = panel;
        if panel > 48 {
            insert_sorted(&mut self.angles_deg, TILED_EXTRA_ANGLE);
            insert_sorted(&mut self.frequency_sweep.angles_deg, TILED_EXTRA_ANGLE);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.panel != 48 && self.panel != 96 {
            return Err(Error::Config(format!("panel must be 48 or 96, got {}", self.panel)));
        }
        if self.max_order > MAX_ORDER {
            return Err(Error::Config(format!("max_order must be at most {MAX_ORDER}")));
        }
        let sweep = &self.frequency_sweep;
        for (what, list) in [
            ("angles_deg", &self.angles_deg),
            ("frequency_sweep.angles_deg", &sweep.angles_deg),
        ] {
            if list.is_empty() {
                return Err(Error::Config(format!("{what} is empty")));
            }
            if list.iter().any(|a| !a.is_finite() || a.abs() >= 90.0) {
                return Err(Error::Config(format!("{what} must lie in (-90, 90)")));
            }
        }
        if self.frequencies_ghz.is_empty() {
            return Err(Error::Config("frequencies_ghz is empty".into()));
        }
        if self.frequencies_ghz.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return Err(Error::Config("frequencies must be positive".into()));
        }
        if !(sweep.step_ghz > 0.0 && sweep.start_ghz > 0.0 && sweep.stop_ghz >= sweep.start_ghz)
            || ![sweep.start_ghz, sweep.stop_ghz, sweep.step_ghz].iter().all(|v| v.is_finite())
        {
            return Err(Error::Config("frequency_sweep needs 0 < start <= stop and step > 0".into()));
        }
        if let Some(evm) = &self.evm {
            if !(evm.bandwidth_hz > 0.0) || !evm.noise_figure_db.is_finite() {
                return Err(Error::Config("evm settings out of range".into()));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
