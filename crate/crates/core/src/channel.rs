//! Multi-user wideband downlink channel of a single leaky-wave antenna.
//!
//! Subband `n` reaches user `k` through the slit diffraction gain at the
//! user's azimuth times a range attenuation, so each subband carries a
//! `K`-vector `h_n`. Rates aggregate users through `||h_n||^2`.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{LwaError, Result};
use crate::format::sig9;
use crate::optimizer::PowerAllocation;
use crate::physics::{diffraction_gain, LwaConfig};

/// Default floor (log10 scale) for beampattern points that receive no energy.
pub const DEFAULT_LOG_FLOOR: f64 = -300.0;

/// Center frequencies of the `N` subbands, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    frequencies: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(LwaError::InvalidInput("frequency grid is empty".into()));
        }
        if frequencies.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(LwaError::InvalidInput(
                "frequencies must be positive and finite".into(),
            ));
        }
        if frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LwaError::InvalidInput(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Ok(Self { frequencies })
    }

    /// Splits `[low, high]` into `count` equal subbands and returns their centers.
    pub fn subband_centers(low: f64, high: f64, count: usize) -> Result<Self> {
        if count == 0 || !(low > 0.0 && high > low) {
            return Err(LwaError::InvalidInput(format!(
                "need 0 < low < high and at least one subband, got [{low}, {high}] / {count}"
            )));
        }
        let width = (high - low) / count as f64;
        Self::new((0..count).map(|n| low + (n as f64 + 0.5) * width).collect())
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.frequencies
    }
}

/// Polar position of a user relative to the antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct User {
    /// Azimuth from the plate axis, radians.
    pub angle: f64,
    /// Distance in meters.
    pub range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserSet {
    users: Vec<User>,
}

impl UserSet {
    pub fn new(users: Vec<User>) -> Result<Self> {
        if users.is_empty() {
            return Err(LwaError::InvalidInput("user set is empty".into()));
        }
        for (k, u) in users.iter().enumerate() {
            if !(u.range > 0.0 && u.range.is_finite()) {
                return Err(LwaError::InvalidInput(format!(
                    "user {k}: range must be positive, got {}",
                    u.range
                )));
            }
            if !(u.angle > 0.0 && u.angle <= std::f64::consts::FRAC_PI_2) {
                return Err(LwaError::InvalidInput(format!(
                    "user {k}: angle must lie in (0, pi/2], got {}",
                    u.angle
                )));
            }
        }
        Ok(Self { users })
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn as_slice(&self) -> &[User] {
        &self.users
    }

    pub fn iter(&self) -> std::slice::Iter<'_, User> {
        self.users.iter()
    }
}

/// Range/frequency attenuation `Gamma(rho, f)` applied on top of the slit gain.
pub trait PathLoss: fmt::Debug + Send + Sync {
    /// Amplitude attenuation; must be positive for valid inputs.
    fn attenuation(&self, range: f64, frequency: f64) -> f64;

    fn name(&self) -> String;
}

/// `Gamma(rho, f) = rho_ref / rho`, independent of frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseRange {
    pub reference_range: f64,
}

impl Default for InverseRange {
    fn default() -> Self {
        Self {
            reference_range: 1.0,
        }
    }
}

impl PathLoss for InverseRange {
    fn attenuation(&self, range: f64, _frequency: f64) -> f64 {
        self.reference_range / range
    }

    fn name(&self) -> String {
        format!("inverse-range(ref={} m)", self.reference_range)
    }
}

/// Receiver noise, identical across users and subbands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    variance: f64,
}

impl NoiseModel {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(LwaError::InvalidInput(format!(
                "noise variance must be positive, got {variance}"
            )));
        }
        Ok(Self { variance })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { variance: 1.0 }
    }
}

/// A subband that could not propagate and was given zero gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffWarning {
    pub subband: usize,
    pub frequency_hz: f64,
    pub cutoff_hz: f64,
}

/// Everything about a deployment except the antenna geometry.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: FrequencyGrid,
    pub users: UserSet,
    pub loss: Arc<dyn PathLoss>,
}

impl Scenario {
    pub fn new(grid: FrequencyGrid, users: UserSet, loss: Arc<dyn PathLoss>) -> Self {
        Self { grid, users, loss }
    }

    /// Scenario with the default inverse-range path loss.
    pub fn with_default_loss(grid: FrequencyGrid, users: UserSet) -> Self {
        Self::new(grid, users, Arc::new(InverseRange::default()))
    }
}

/// `N x K` complex gains; row `n` is the subband channel vector `h_n`.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    entries: Vec<Complex64>,
    num_users: usize,
    config: LwaConfig,
    grid: FrequencyGrid,
    users: UserSet,
    loss_name: String,
    warnings: Vec<CutoffWarning>,
}

impl ChannelMatrix {
    pub fn num_subbands(&self) -> usize {
        self.grid.len()
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn entry(&self, subband: usize, user: usize) -> Complex64 {
        self.entries[subband * self.num_users + user]
    }

    /// The subband channel vector `h_n`.
    pub fn row(&self, subband: usize) -> &[Complex64] {
        let start = subband * self.num_users;
        &self.entries[start..start + self.num_users]
    }

    /// `||h_n||^2` for every subband.
    pub fn gains_squared(&self) -> Vec<f64> {
        (0..self.num_subbands())
            .map(|n| self.row(n).iter().map(|h| h.norm_sqr()).sum())
            .collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.entries.iter().map(|h| h.norm()).fold(0.0, f64::max)
    }

    pub fn config(&self) -> &LwaConfig {
        &self.config
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn users(&self) -> &UserSet {
        &self.users
    }

    pub fn loss_name(&self) -> &str {
        &self.loss_name
    }

    /// Subbands below the waveguide cutoff, which carry zero gain.
    pub fn warnings(&self) -> &[CutoffWarning] {
        &self.warnings
    }
}

/// Builds the channel of `users` for the antenna `config`.
///
/// Subbands below the cutoff of `config` get zero gain and are listed in
/// [`ChannelMatrix::warnings`].
pub fn build_channel(
    config: &LwaConfig,
    grid: &FrequencyGrid,
    users: &UserSet,
    loss: &dyn PathLoss,
) -> ChannelMatrix {
    let k = users.len();
    let mut entries = Vec::with_capacity(grid.len() * k);
    let mut warnings = Vec::new();
    for (n, &f) in grid.as_slice().iter().enumerate() {
        for user in users.iter() {
            match diffraction_gain(config, user.angle, f) {
                Ok(g) => entries.push(g * loss.attenuation(user.range, f)),
                Err(LwaError::CutoffViolation { cutoff_hz, .. }) => {
                    if warnings.last().map(|w: &CutoffWarning| w.subband) != Some(n) {
                        warnings.push(CutoffWarning {
                            subband: n,
                            frequency_hz: f,
                            cutoff_hz,
                        });
                    }
                    entries.push(Complex64::new(0.0, 0.0));
                }
                // UserSet and FrequencyGrid validation rule out every other error.
                Err(other) => unreachable!("validated inputs rejected: {other}"),
            }
        }
    }
    ChannelMatrix {
        entries,
        num_users: k,
        config: *config,
        grid: grid.clone(),
        users: users.clone(),
        loss_name: loss.name(),
        warnings,
    }
}

/// `log2(1 + P g / sigma^2)` for a scalar channel power gain `g`.
pub fn rate_from_gain(gain_squared: f64, power: f64, noise: &NoiseModel) -> f64 {
    (power * gain_squared / noise.variance()).ln_1p() / LN_2
}

/// Rate of one subband, `log2(1 + P_n ||h_n||^2 / sigma^2)`, in bits.
pub fn subband_rate(h: &[Complex64], power: f64, noise: &NoiseModel) -> f64 {
    let gain: f64 = h.iter().map(|x| x.norm_sqr()).sum();
    rate_from_gain(gain, power, noise)
}

/// Mean subband rate for precomputed `||h_n||^2` values.
pub fn average_rate_from_gains(
    gains_squared: &[f64],
    powers: &[f64],
    noise: &NoiseModel,
) -> Result<f64> {
    if gains_squared.len() != powers.len() {
        return Err(LwaError::LengthMismatch {
            expected: gains_squared.len(),
            actual: powers.len(),
        });
    }
    let total: f64 = gains_squared
        .iter()
        .zip(powers)
        .map(|(&g, &p)| rate_from_gain(g, p, noise))
        .sum();
    Ok(total / gains_squared.len() as f64)
}

/// Average sum-rate over subbands in bits per channel use.
pub fn average_sum_rate(
    channel: &ChannelMatrix,
    powers: &PowerAllocation,
    noise: &NoiseModel,
) -> Result<f64> {
    average_rate_from_gains(&channel.gains_squared(), powers.powers(), noise)
}

/// Spectral energy radiated towards each `(angle, range)` point, log10 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamMap {
    /// Angles in radians.
    pub angles: Vec<f64>,
    /// Ranges in meters.
    pub ranges: Vec<f64>,
    /// Row-major over angles, then ranges.
    pub values: Vec<f64>,
    pub floor: f64,
}

impl BeamMap {
    pub fn value(&self, angle_index: usize, range_index: usize) -> f64 {
        self.values[angle_index * self.ranges.len() + range_index]
    }

    /// Grid indices of the highest value; first occurrence wins.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        (best / self.ranges.len(), best % self.ranges.len())
    }

    /// CSV with header `angle_deg,range_m,log_energy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle_deg,range_m,log_energy\n");
        for (a, angle) in self.angles.iter().enumerate() {
            let deg = sig9(angle.to_degrees());
            for (r, range) in self.ranges.iter().enumerate() {
                out.push_str(&deg);
                out.push(',');
                out.push_str(&sig9(*range));
                out.push(',');
                out.push_str(&sig9(self.value(a, r)));
                out.push('\n');
            }
        }
        out
    }
}

/// Evaluates `log10(sum_n |G(phi, f_n) Gamma(rho, f_n)|^2 P_n)` on a grid.
///
/// Points that receive no energy are set to `floor`. Subbands below cutoff
/// contribute nothing.
pub fn beampattern(
    config: &LwaConfig,
    grid: &FrequencyGrid,
    powers: &PowerAllocation,
    loss: &dyn PathLoss,
    angles: &[f64],
    ranges: &[f64],
    floor: f64,
) -> Result<BeamMap> {
    if powers.len() != grid.len() {
        return Err(LwaError::LengthMismatch {
            expected: grid.len(),
            actual: powers.len(),
        });
    }
    if angles.is_empty() || ranges.is_empty() {
        return Err(LwaError::InvalidInput(
            "beampattern grids must be non-empty".into(),
        ));
    }
    if ranges.iter().any(|r| r.is_nan() || *r <= 0.0) {
        return Err(LwaError::InvalidInput("ranges must be positive".into()));
    }
    let freqs = grid.as_slice();
    let range_weights: Vec<Vec<f64>> = ranges
        .iter()
        .map(|&rho| {
            freqs
                .iter()
                .zip(powers.powers())
                .map(|(&f, &p)| loss.attenuation(rho, f).powi(2) * p)
                .collect()
        })
        .collect();
    let rows: Vec<Result<Vec<f64>>> = angles
        .par_iter()
        .map(|&phi| {
            let mut pattern = Vec::with_capacity(freqs.len());
            for &f in freqs {
                pattern.push(match diffraction_gain(config, phi, f) {
                    Ok(g) => g.norm_sqr(),
                    Err(LwaError::CutoffViolation { .. }) => 0.0,
                    Err(e) => return Err(e),
                });
            }
            Ok(range_weights
                .iter()
                .map(|w| {
                    let energy: f64 = pattern.iter().zip(w).map(|(g, w)| g * w).sum();
                    if energy > 0.0 {
                        energy.log10()
                    } else {
                        floor
                    }
                })
                .collect())
        })
        .collect();
    let mut values = Vec::with_capacity(angles.len() * ranges.len());
    for row in rows {
        values.extend(row?);
    }
    Ok(BeamMap {
        angles: angles.to_vec(),
        ranges: ranges.to_vec(),
        values,
        floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::emission_angle;
    use std::f64::consts::FRAC_PI_2;

    fn single_user(angle: f64, range: f64) -> UserSet {
        UserSet::new(vec![User { angle, range }]).unwrap()
    }

    #[test]
    fn on_peak_user_at_unit_range_has_unit_gain() {
        let cfg = LwaConfig::new(1e-3, 20e-3).unwrap();
        let grid = FrequencyGrid::new(vec![300e9, 400e9, 500e9]).unwrap();
        let phi = emission_angle(&cfg, 400e9).unwrap();
        let ch = build_channel(
            &cfg,
            &grid,
            &single_user(phi, 1.0),
            &InverseRange::default(),
        );
        assert!((ch.entry(1, 0).re - 1.0).abs() < 1e-12);
        assert!(ch.warnings().is_empty());
    }

    #[test]
    fn doubling_range_halves_column() {
        let cfg = LwaConfig::new(1e-3, 20e-3).unwrap();
        let grid = FrequencyGrid::subband_centers(200e9, 800e9, 8).unwrap();
        let users = UserSet::new(vec![
            User {
                angle: 0.4,
                range: 3.0,
            },
            User {
                angle: 0.6,
                range: 5.0,
            },
        ])
        .unwrap();
        let far = UserSet::new(vec![
            User {
                angle: 0.4,
                range: 6.0,
            },
            User {
                angle: 0.6,
                range: 5.0,
            },
        ])
        .unwrap();
        let loss = InverseRange::default();
        let a = build_channel(&cfg, &grid, &users, &loss);
        let b = build_channel(&cfg, &grid, &far, &loss);
        for n in 0..grid.len() {
            assert!((b.entry(n, 0).norm() - a.entry(n, 0).norm() / 2.0).abs() < 1e-15);
            assert_eq!(b.entry(n, 1), a.entry(n, 1));
        }
    }

    #[test]
    fn broadside_entry_matches_gain_example() {
        let cfg = LwaConfig::new(1e-3, 10e-3).unwrap();
        let grid = FrequencyGrid::new(vec![300e9]).unwrap();
        let ch = build_channel(
            &cfg,
            &grid,
            &single_user(FRAC_PI_2, 1.0),
            &InverseRange::default(),
        );
        assert!((ch.entry(0, 0).re - 0.031_710_092_947).abs() < 1e-9);
    }

    #[test]
    fn sub_cutoff_subbands_are_zero_and_flagged() {
        let cfg = LwaConfig::new(1e-3, 10e-3).unwrap();
        let grid = FrequencyGrid::new(vec![100e9, 140e9, 300e9]).unwrap();
        let users = UserSet::new(vec![
            User {
                angle: 0.5,
                range: 2.0,
            },
            User {
                angle: 1.0,
                range: 2.0,
            },
        ])
        .unwrap();
        let ch = build_channel(&cfg, &grid, &users, &InverseRange::default());
        let flagged: Vec<usize> = ch.warnings().iter().map(|w| w.subband).collect();
        assert_eq!(flagged, vec![0, 1]);
        assert_eq!(ch.row(0), &[Complex64::new(0.0, 0.0); 2]);
        assert!(ch.row(2).iter().any(|h| h.norm() > 0.0));
    }

    #[test]
    fn subband_rate_examples() {
        let noise = NoiseModel::default();
        let one = [Complex64::new(1.0, 0.0)];
        assert!((subband_rate(&one, 1.0, &noise) - 1.0).abs() < 1e-15);
        assert_eq!(subband_rate(&one, 0.0, &noise), 0.0);
        let three = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 1.0)];
        assert!((subband_rate(&three, 1.0, &noise) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn average_rate_examples() {
        let noise = NoiseModel::default();
        let r = average_rate_from_gains(&[1.0; 5], &[1.0; 5], &noise).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        let r =
            average_rate_from_gains(&[3.0, 1.0, 1.0, 1.0], &[1.0, 0.0, 0.0, 0.0], &noise).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
        assert!(matches!(
            average_rate_from_gains(&[1.0, 2.0], &[1.0], &noise),
            Err(LwaError::LengthMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn scaling_loss_acts_like_scaling_power() {
        let cfg = LwaConfig::new(1e-3, 30e-3).unwrap();
        let grid = FrequencyGrid::subband_centers(200e9, 800e9, 6).unwrap();
        let users = UserSet::new(vec![User {
            angle: 0.3,
            range: 12.0,
        }])
        .unwrap();
        let base = build_channel(&cfg, &grid, &users, &InverseRange::default());
        let scaled = build_channel(
            &cfg,
            &grid,
            &users,
            &InverseRange {
                reference_range: 3.0,
            },
        );
        let noise = NoiseModel::default();
        for n in 0..grid.len() {
            assert!((scaled.entry(n, 0).norm() - 3.0 * base.entry(n, 0).norm()).abs() < 1e-15);
            let a = subband_rate(scaled.row(n), 2.0, &noise);
            let b = subband_rate(base.row(n), 18.0, &noise);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn beampattern_floor_when_no_power() {
        let cfg = LwaConfig::new(1e-3, 30e-3).unwrap();
        let grid = FrequencyGrid::subband_centers(200e9, 800e9, 4).unwrap();
        let powers = PowerAllocation::new(vec![0.0; 4], 1.0).unwrap();
        let map = beampattern(
            &cfg,
            &grid,
            &powers,
            &InverseRange::default(),
            &[0.1, 0.5, 1.0],
            &[5.0, 10.0],
            DEFAULT_LOG_FLOOR,
        )
        .unwrap();
        assert!(map.values.iter().all(|v| *v == DEFAULT_LOG_FLOOR));
    }

    #[test]
    fn beampattern_csv_layout() {
        let cfg = LwaConfig::new(1e-3, 30e-3).unwrap();
        let grid = FrequencyGrid::new(vec![400e9]).unwrap();
        let powers = PowerAllocation::new(vec![1.0], 1.0).unwrap();
        let map = beampattern(
            &cfg,
            &grid,
            &powers,
            &InverseRange::default(),
            &[0.25_f64.to_radians() * 100.0, FRAC_PI_2],
            &[5.0, 7.5, 10.0],
            DEFAULT_LOG_FLOOR,
        )
        .unwrap();
        let csv = map.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "angle_deg,range_m,log_energy");
        assert_eq!(lines.len(), 1 + 6);
        assert!(lines[1].starts_with("25,5,"));
        assert!(lines[4].starts_with("90,5,"));
        assert!(lines[6].starts_with("90,10,"));
    }
}
