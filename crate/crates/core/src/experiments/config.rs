//! Scenario configuration loaded from a flat TOML file.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::channel::{FrequencyGrid, NoiseModel};
use crate::error::{LwaError, Result};
use crate::mimo::UlaGeometry;
use crate::optimizer::{OptimizerSettings, SearchGrids};
use crate::physics::LwaBounds;

/// Every tunable of an experiment. Unknown keys in a config file are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub subbands: usize,
    pub users: usize,
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub range_min_m: f64,
    pub range_max_m: f64,
    /// Total transmit power budget (linear).
    pub power: f64,
    /// Noise variance (linear).
    pub sigma2: f64,
    pub b_min_m: f64,
    pub b_max_m: f64,
    pub l_min_m: f64,
    pub l_max_m: f64,
    pub b_grid_points: usize,
    pub l_grid_points: usize,
    pub max_iterations: usize,
    pub early_exit: bool,
    pub mimo_elements: usize,
    /// Frequency at which the array spacing is half a wavelength.
    pub mimo_reference_hz: f64,
    pub seed: u64,
    pub trials: usize,
    pub snr_db: Vec<f64>,
    pub map_angle_min_deg: f64,
    pub map_angle_max_deg: f64,
    pub map_angle_step_deg: f64,
    pub map_range_min_m: f64,
    pub map_range_max_m: f64,
    pub map_range_step_m: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            band_low_hz: 200e9,
            band_high_hz: 800e9,
            subbands: 40,
            users: 4,
            angle_min_deg: 10.0,
            angle_max_deg: 55.0,
            range_min_m: 10.0,
            range_max_m: 20.0,
            power: 10.0,
            sigma2: 1.0,
            b_min_m: 0.9e-3,
            b_max_m: 1.1e-3,
            l_min_m: 10e-3,
            l_max_m: 50e-3,
            b_grid_points: 21,
            l_grid_points: 21,
            max_iterations: 10,
            early_exit: true,
            mimo_elements: 8,
            mimo_reference_hz: 500e9,
            seed: 0,
            trials: 20,
            snr_db: (0..=8).map(|i| -10.0 + 5.0 * i as f64).collect(),
            map_angle_min_deg: 0.0,
            map_angle_max_deg: 90.0,
            map_angle_step_deg: 0.25,
            map_range_min_m: 5.0,
            map_range_max_m: 25.0,
            map_range_step_m: 0.25,
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(LwaError::Config(msg()))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LwaError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LwaError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        check(
            self.band_low_hz > 0.0 && self.band_high_hz > self.band_low_hz,
            || {
                format!(
                    "band [{}, {}] Hz is invalid",
                    self.band_low_hz, self.band_high_hz
                )
            },
        )?;
        check(self.subbands >= 1, || "subbands must be at least 1".into())?;
        check(self.users >= 1, || "users must be at least 1".into())?;
        check(
            self.angle_min_deg > 0.0
                && self.angle_min_deg <= self.angle_max_deg
                && self.angle_max_deg <= 90.0,
            || {
                format!(
                    "user angles [{}, {}] deg must satisfy 0 < min <= max <= 90",
                    self.angle_min_deg, self.angle_max_deg
                )
            },
        )?;
        check(
            self.range_min_m > 0.0
                && self.range_min_m <= self.range_max_m
                && self.range_max_m.is_finite(),
            || {
                format!(
                    "user ranges [{}, {}] m are invalid",
                    self.range_min_m, self.range_max_m
                )
            },
        )?;
        check(self.power >= 0.0 && self.power.is_finite(), || {
            format!("power must be non-negative, got {}", self.power)
        })?;
        check(self.sigma2 > 0.0 && self.sigma2.is_finite(), || {
            format!("sigma2 must be positive, got {}", self.sigma2)
        })?;
        LwaBounds::new(self.b_min_m, self.b_max_m, self.l_min_m, self.l_max_m)
            .map_err(|e| LwaError::Config(e.to_string()))?;
        check(self.b_grid_points >= 1 && self.l_grid_points >= 1, || {
            "grid resolutions must be at least 1".into()
        })?;
        check(self.max_iterations >= 1, || {
            "max_iterations must be at least 1".into()
        })?;
        check(self.mimo_elements >= 1, || {
            "mimo_elements must be at least 1".into()
        })?;
        check(self.mimo_reference_hz > 0.0, || {
            "mimo_reference_hz must be positive".into()
        })?;
        check(self.trials >= 1, || "trials must be at least 1".into())?;
        check(self.snr_db.iter().all(|s| s.is_finite()), || {
            "snr_db values must be finite".into()
        })?;
        check(
            self.map_angle_min_deg >= 0.0
                && self.map_angle_min_deg <= self.map_angle_max_deg
                && self.map_angle_max_deg <= 180.0
                && self.map_angle_step_deg > 0.0,
            || "beampattern angle grid is invalid".into(),
        )?;
        check(
            self.map_range_min_m > 0.0
                && self.map_range_min_m <= self.map_range_max_m
                && self.map_range_step_m > 0.0,
            || "beampattern range grid is invalid".into(),
        )?;
        Ok(())
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::subband_centers(self.band_low_hz, self.band_high_hz, self.subbands)
    }

    pub fn bounds(&self) -> Result<LwaBounds> {
        LwaBounds::new(self.b_min_m, self.b_max_m, self.l_min_m, self.l_max_m)
    }

    pub fn search_grids(&self) -> Result<SearchGrids> {
        SearchGrids::uniform(&self.bounds()?, self.b_grid_points, self.l_grid_points)
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.sigma2)
    }

    pub fn optimizer_settings(&self) -> OptimizerSettings {
        OptimizerSettings {
            max_iterations: self.max_iterations,
            early_exit: self.early_exit,
        }
    }

    pub fn ula(&self) -> Result<UlaGeometry> {
        UlaGeometry::half_wavelength(self.mimo_elements, self.mimo_reference_hz)
    }

    /// Budget giving average SNR `P / (N sigma^2)` equal to `snr_db`.
    pub fn power_for_snr_db(&self, snr_db: f64) -> f64 {
        10f64.powf(snr_db / 10.0) * self.subbands as f64 * self.sigma2
    }

    /// Average SNR `P / (N sigma^2)` of the configured budget, in dB.
    pub fn snr_db_of_power(&self) -> f64 {
        10.0 * (self.power / (self.subbands as f64 * self.sigma2)).log10()
    }

    /// Beampattern angles (radians) and ranges (meters), both inclusive.
    pub fn map_axes(&self) -> (Vec<f64>, Vec<f64>) {
        let angles = inclusive_steps(
            self.map_angle_min_deg,
            self.map_angle_max_deg,
            self.map_angle_step_deg,
        )
        .into_iter()
        .map(f64::to_radians)
        .collect();
        let ranges = inclusive_steps(
            self.map_range_min_m,
            self.map_range_max_m,
            self.map_range_step_m,
        );
        (angles, ranges)
    }
}

fn inclusive_steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| lo + step * i as f64).collect()
}
