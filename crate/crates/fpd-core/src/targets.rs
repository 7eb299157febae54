//! Published performance figures for the reference divider, kept as fixed
//! comparison data.
//!
//! Two kinds of figures live here and must not be mixed up. Theory figures
//! describe the ideal coupled-resonator model and are reproduced by the
//! engines in this crate. Measured figures come from fabricated hardware;
//! no desk-scale simulation reproduces them, so they are carried as
//! reference metadata only (the loss fit uses the measured excess
//! insertion loss as its fitting target, nothing more).

use serde::Serialize;

/// Where a target number comes from, which decides whether the toolkit is
/// expected to reproduce it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// Ideal-model figure; the engines reproduce it.
    Theory,
    /// Hardware measurement; stored for comparison only.
    MeasuredReferenceOnly,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Theory => write!(f, "[theory: reproduced]"),
            Provenance::MeasuredReferenceOnly => write!(f, "[measured: reference-only]"),
        }
    }
}

/// The reference design's published figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceTargets {
    pub f0_hz: f64,
    pub design_fbw: f64,
    /// Theory: worst in-band return loss of the ideal response, dB.
    pub theory_min_rl_db: f64,
    /// Theory: insertion-loss floor 10 log10(3) for an equal 3-way split, dB.
    pub theory_il_floor_db: f64,
    /// Measured: in-band return loss of the fabricated divider, dB.
    pub measured_rl_db: f64,
    /// Measured: insertion loss beyond the split floor, dB.
    pub measured_excess_il_db: f64,
    /// Measured: layout area in guided wavelengths squared.
    pub footprint_lambda_g_sq: f64,
}

impl ReferenceTargets {
    pub fn reference() -> Self {
        ReferenceTargets {
            f0_hz: 2.6e9,
            design_fbw: 0.03,
            theory_min_rl_db: 20.0,
            theory_il_floor_db: 10.0 * 3f64.log10(),
            measured_rl_db: 15.5,
            measured_excess_il_db: 0.34,
            footprint_lambda_g_sq: 0.0558,
        }
    }
}
