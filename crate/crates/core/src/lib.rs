//! Leaky-wave antenna (LWA) aided wideband THz downlink.
//!
//! * [`physics`]: frequency-to-angle law and slit diffraction gain.
//! * [`channel`]: multi-user wideband channel, sum-rates, beampattern maps.
//! * [`optimizer`]: waterfilling, geometry grid search, alternating optimization.
//! * [`mimo`]: fully digital ULA baseline with spatial-spectral waterfilling.
//! * [`experiments`]: seeded Monte-Carlo harness behind the `lwa` CLI.

pub mod channel;
pub mod error;
pub mod experiments;
pub mod format;
pub mod mimo;
pub mod optimizer;
pub mod physics;

pub use error::{LwaError, Result};
