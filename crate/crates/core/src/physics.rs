//! Leaky-wave antenna emission physics.
//!
//! A parallel-plate leaky-wave antenna radiates the spectral component at
//! frequency `f` towards the azimuth `asin(c / (2 b f))`, measured from the
//! plate axis. The finite slit of length `L` shapes each monochromatic beam
//! into a sinc-shaped diffraction pattern around that angle.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{LwaError, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Below this magnitude the complex sinc is evaluated from its Taylor series.
const SINC_SERIES_THRESHOLD: f64 = 1e-6;

/// Geometry of a single leaky-wave antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LwaConfig {
    /// Plate separation `b` in meters.
    pub plate_separation: f64,
    /// Slit length `L` in meters.
    pub slit_length: f64,
    /// Leakage attenuation `alpha` in 1/m.
    pub leakage: f64,
}

impl LwaConfig {
    pub fn new(plate_separation: f64, slit_length: f64) -> Result<Self> {
        Self::with_leakage(plate_separation, slit_length, 0.0)
    }

    pub fn with_leakage(plate_separation: f64, slit_length: f64, leakage: f64) -> Result<Self> {
        if !(plate_separation > 0.0 && plate_separation.is_finite()) {
            return Err(LwaError::InvalidInput(format!(
                "plate separation must be positive, got {plate_separation}"
            )));
        }
        if !(slit_length > 0.0 && slit_length.is_finite()) {
            return Err(LwaError::InvalidInput(format!(
                "slit length must be positive, got {slit_length}"
            )));
        }
        if !(leakage >= 0.0 && leakage.is_finite()) {
            return Err(LwaError::InvalidInput(format!(
                "leakage must be non-negative, got {leakage}"
            )));
        }
        Ok(Self {
            plate_separation,
            slit_length,
            leakage,
        })
    }

    /// Lowest frequency that propagates between the plates, `c / (2b)`.
    pub fn cutoff_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.plate_separation)
    }

    fn check_cutoff(&self, frequency: f64) -> Result<f64> {
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(LwaError::Domain(format!(
                "frequency must be positive, got {frequency}"
            )));
        }
        let ratio = SPEED_OF_LIGHT / (2.0 * self.plate_separation * frequency);
        if ratio > 1.0 {
            return Err(LwaError::CutoffViolation {
                frequency_hz: frequency,
                cutoff_hz: self.cutoff_frequency(),
            });
        }
        Ok(ratio)
    }
}

/// Physical bounds on the tunable geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LwaBounds {
    pub b_min: f64,
    pub b_max: f64,
    pub l_min: f64,
    pub l_max: f64,
}

impl LwaBounds {
    pub fn new(b_min: f64, b_max: f64, l_min: f64, l_max: f64) -> Result<Self> {
        if !(b_min > 0.0 && b_min <= b_max && b_max.is_finite()) {
            return Err(LwaError::InvalidInput(format!(
                "plate separation bounds must satisfy 0 < b_min <= b_max, got [{b_min}, {b_max}]"
            )));
        }
        if !(l_min > 0.0 && l_min <= l_max && l_max.is_finite()) {
            return Err(LwaError::InvalidInput(format!(
                "slit length bounds must satisfy 0 < L_min <= L_max, got [{l_min}, {l_max}]"
            )));
        }
        Ok(Self {
            b_min,
            b_max,
            l_min,
            l_max,
        })
    }

    pub fn contains(&self, config: &LwaConfig) -> bool {
        (self.b_min..=self.b_max).contains(&config.plate_separation)
            && (self.l_min..=self.l_max).contains(&config.slit_length)
    }
}

impl Default for LwaBounds {
    /// `b` in [0.9, 1.1] mm and `L` in [10, 50] mm.
    fn default() -> Self {
        Self {
            b_min: 0.9e-3,
            b_max: 1.1e-3,
            l_min: 10e-3,
            l_max: 50e-3,
        }
    }
}

/// Free-space wavenumber `2 pi f / c`.
pub fn wavenumber(frequency: f64) -> f64 {
    2.0 * PI * frequency / SPEED_OF_LIGHT
}

/// Azimuth (radians from the plate axis) at which `frequency` is radiated.
pub fn emission_angle(config: &LwaConfig, frequency: f64) -> Result<f64> {
    let ratio = config.check_cutoff(frequency)?;
    Ok(ratio.asin())
}

/// Complex diffraction gain of the slit towards `angle` at `frequency`.
///
/// Evaluates `sinc((beta - j alpha - k0 cos(angle)) L / 2)` with the
/// unnormalized `sin(z) / z` convention, so the peak of `|G|` (equal to one
/// when `alpha = 0`) sits exactly on [`emission_angle`].
pub fn diffraction_gain(config: &LwaConfig, angle: f64, frequency: f64) -> Result<Complex64> {
    let ratio = config.check_cutoff(frequency)?;
    if !(0.0..=PI).contains(&angle) {
        return Err(LwaError::Domain(format!(
            "angle must lie in [0, pi], got {angle}"
        )));
    }
    let k0 = wavenumber(frequency);
    let beta = k0 * (1.0 - ratio * ratio).sqrt();
    let z = Complex64::new(beta - k0 * angle.cos(), -config.leakage) * (config.slit_length / 2.0);
    Ok(sinc(z))
}

/// Frequency whose beam peaks at `angle`, i.e. the inverse of [`emission_angle`].
pub fn beam_peak_frequency(config: &LwaConfig, angle: f64) -> Result<f64> {
    if !(angle > 0.0 && angle <= FRAC_PI_2) {
        return Err(LwaError::Domain(format!(
            "peak angle must lie in (0, pi/2], got {angle}"
        )));
    }
    Ok(SPEED_OF_LIGHT / (2.0 * config.plate_separation * angle.sin()))
}

/// Unnormalized complex sinc, `sin(z) / z` with `sinc(0) = 1`.
pub fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < SINC_SERIES_THRESHOLD {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}
