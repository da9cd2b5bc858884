//! Fully digital uniform-linear-array reference system.
//!
//! Users are reached over line-of-sight spherical wavefronts from every
//! element, which covers both the radiative near field and the far field.
//! The sum-rate pools the eigenmodes of all subbands and waterfills jointly
//! across space and frequency.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::channel::{rate_from_gain, ChannelMatrix, FrequencyGrid, NoiseModel, UserSet};
use crate::error::{LwaError, Result};
use crate::optimizer::waterfill;
use crate::physics::SPEED_OF_LIGHT;

/// Amplitude reference range, so a single element reproduces `1 / rho`.
const REFERENCE_RANGE: f64 = 1.0;

/// Elements on the plate axis (x axis), centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct UlaGeometry {
    positions: Vec<f64>,
    spacing: f64,
}

impl UlaGeometry {
    /// `elements` antennas spaced half a wavelength at `reference_frequency`.
    pub fn half_wavelength(elements: usize, reference_frequency: f64) -> Result<Self> {
        if !(reference_frequency > 0.0 && reference_frequency.is_finite()) {
            return Err(LwaError::InvalidInput(format!(
                "reference frequency must be positive, got {reference_frequency}"
            )));
        }
        Self::with_spacing(elements, SPEED_OF_LIGHT / (2.0 * reference_frequency))
    }

    pub fn with_spacing(elements: usize, spacing: f64) -> Result<Self> {
        if elements == 0 {
            return Err(LwaError::InvalidInput(
                "array needs at least one element".into(),
            ));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(LwaError::InvalidInput(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        let center = (elements as f64 - 1.0) / 2.0;
        let positions = (0..elements)
            .map(|m| (m as f64 - center) * spacing)
            .collect();
        Ok(Self { positions, spacing })
    }

    pub fn num_elements(&self) -> usize {
        self.positions.len()
    }

    /// Element x coordinates in meters.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Distance between the two outermost elements.
    pub fn aperture(&self) -> f64 {
        self.spacing * (self.positions.len() as f64 - 1.0)
    }
}

/// `N x K x M` complex gains of the array channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoChannelTensor {
    entries: Vec<Complex64>,
    subbands: usize,
    users: usize,
    elements: usize,
    normalization: f64,
}

impl MimoChannelTensor {
    pub fn from_entries(
        entries: Vec<Complex64>,
        subbands: usize,
        users: usize,
        elements: usize,
    ) -> Result<Self> {
        if entries.len() != subbands * users * elements {
            return Err(LwaError::LengthMismatch {
                expected: subbands * users * elements,
                actual: entries.len(),
            });
        }
        if entries.is_empty() {
            return Err(LwaError::InvalidInput("empty channel tensor".into()));
        }
        Ok(Self {
            entries,
            subbands,
            users,
            elements,
            normalization: 1.0,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.subbands, self.users, self.elements)
    }

    pub fn entry(&self, subband: usize, user: usize, element: usize) -> Complex64 {
        self.entries[(subband * self.users + user) * self.elements + element]
    }

    /// Cumulative scale applied by [`normalize_to_lwa`].
    pub fn normalization_factor(&self) -> f64 {
        self.normalization
    }

    pub fn max_magnitude(&self) -> f64 {
        self.entries.iter().map(|h| h.norm()).fold(0.0, f64::max)
    }

    /// The `K x M` matrix `H_n`.
    pub fn subband_matrix(&self, subband: usize) -> DMatrix<Complex64> {
        let start = subband * self.users * self.elements;
        DMatrix::from_row_slice(
            self.users,
            self.elements,
            &self.entries[start..start + self.users * self.elements],
        )
    }

    /// Singular values of every `H_n`, in descending order.
    pub fn singular_values(&self) -> Vec<Vec<f64>> {
        (0..self.subbands)
            .into_par_iter()
            .map(|n| {
                let mut s: Vec<f64> = self
                    .subband_matrix(n)
                    .singular_values()
                    .iter()
                    .copied()
                    .collect();
                s.sort_by(|a, b| b.total_cmp(a));
                s
            })
            .collect()
    }
}

/// Line-of-sight array channel: `(rho_ref / d) exp(-j 2 pi f d / c)` per element.
pub fn build_mimo_channel(
    geometry: &UlaGeometry,
    grid: &FrequencyGrid,
    users: &UserSet,
) -> Result<MimoChannelTensor> {
    let half_aperture = geometry.aperture() / 2.0;
    for (k, user) in users.iter().enumerate() {
        if user.range <= half_aperture {
            return Err(LwaError::GeometryViolation(format!(
                "user {k} at {} m lies within the array half-aperture {half_aperture} m",
                user.range
            )));
        }
    }
    // distances[k][m]
    let distances: Vec<Vec<f64>> = users
        .iter()
        .map(|u| {
            let (ux, uy) = (u.range * u.angle.cos(), u.range * u.angle.sin());
            geometry
                .positions()
                .iter()
                .map(|x| (ux - x).hypot(uy))
                .collect()
        })
        .collect();
    let mut entries = Vec::with_capacity(grid.len() * users.len() * geometry.num_elements());
    for &f in grid.as_slice() {
        let k = 2.0 * PI * f / SPEED_OF_LIGHT;
        for row in &distances {
            for &d in row {
                entries.push(Complex64::from_polar(REFERENCE_RANGE / d, -k * d));
            }
        }
    }
    MimoChannelTensor::from_entries(entries, grid.len(), users.len(), geometry.num_elements())
}

/// Scales the tensor so its largest entry matches the largest LWA entry.
pub fn normalize_to_lwa(
    tensor: &MimoChannelTensor,
    lwa_channel: &ChannelMatrix,
) -> Result<MimoChannelTensor> {
    normalize_to_magnitude(tensor, lwa_channel.max_magnitude())
}

/// Scales the tensor so its largest entry magnitude equals `target`.
pub fn normalize_to_magnitude(
    tensor: &MimoChannelTensor,
    target: f64,
) -> Result<MimoChannelTensor> {
    let current = tensor.max_magnitude();
    if current.is_nan() || target.is_nan() || current <= 0.0 || target <= 0.0 {
        return Err(LwaError::ZeroChannel);
    }
    let scale = target / current;
    let mut out = tensor.clone();
    if scale != 1.0 {
        for h in &mut out.entries {
            *h *= scale;
        }
    }
    out.normalization *= scale;
    Ok(out)
}

/// Spatial-spectral waterfilling rate in bits per channel use.
///
/// Pools the squared singular values of all `H_n` as parallel channels,
/// waterfills `budget` across them and averages the total over subbands.
pub fn mimo_sum_rate(tensor: &MimoChannelTensor, budget: f64, noise: &NoiseModel) -> Result<f64> {
    if budget.is_nan() || budget <= 0.0 {
        return Err(LwaError::InvalidInput(format!(
            "power budget must be positive, got {budget}"
        )));
    }
    let pooled: Vec<f64> = tensor
        .singular_values()
        .into_iter()
        .flatten()
        .map(|s| s * s)
        .collect();
    pooled_rate(&pooled, budget, tensor.subbands, noise)
}

/// Waterfilled rate over pooled eigenchannel gains, averaged over `subbands`.
pub fn pooled_rate(gains: &[f64], budget: f64, subbands: usize, noise: &NoiseModel) -> Result<f64> {
    let alloc = waterfill(gains, budget, noise)?;
    let total: f64 = gains
        .iter()
        .zip(alloc.powers())
        .map(|(&g, &p)| rate_from_gain(g, p, noise))
        .sum();
    Ok(total / subbands as f64)
}
