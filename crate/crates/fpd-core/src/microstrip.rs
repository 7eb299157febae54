//! Closed-form quasi-static microstrip estimation.
//!
//! Effective permittivity and characteristic impedance follow the familiar
//! two-regime quasi-static fits in w/h:
//!
//! ```text
//! eps_eff = (er+1)/2 + (er-1)/2 * F(u),   u = w/h
//! u <= 1: F = (1 + 12/u)^-1/2 + 0.04 (1-u)^2
//!         z0 = eta0 / (2 pi sqrt(eps_eff)) * ln(8/u + u/4)
//! u >= 1: F = (1 + 12/u)^-1/2
//!         z0 = eta0 / (sqrt(eps_eff) * (u + 1.393 + 0.677 ln(u + 1.444)))
//! ```
//!
//! The two z0 branches disagree by ~0.7% at u = 1, so they are linearly
//! blended over u in [0.95, 1.05]. That keeps z0(w) continuous and strictly
//! decreasing, which width synthesis relies on for a clean bisection.
//! No dispersion or conductor-thickness correction: estimation-grade
//! output for thin substrates at single-digit GHz.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const ETA0: f64 = 376.730313668;
const BLEND_LO: f64 = 0.95;
const BLEND_HI: f64 = 1.05;

/// Dielectric substrate description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Substrate {
    pub eps_r: f64,
    /// Thickness in meters.
    pub h: f64,
    pub tan_delta: f64,
}

impl Substrate {
    pub fn new(eps_r: f64, h: f64, tan_delta: f64) -> Result<Self> {
        if !(eps_r >= 1.0) {
            return Err(Error::domain("relative permittivity must be >= 1"));
        }
        if !(h > 0.0) {
            return Err(Error::domain("substrate thickness must be positive"));
        }
        if !(tan_delta >= 0.0) {
            return Err(Error::domain("loss tangent must be >= 0"));
        }
        Ok(Substrate { eps_r, h, tan_delta })
    }

    /// The reference design's substrate: eps_r = 10.7, h = 1.27 mm,
    /// tan_delta = 0.0023.
    pub fn reference() -> Self {
        Substrate {
            eps_r: 10.7,
            h: 1.27e-3,
            tan_delta: 0.0023,
        }
    }
}

/// Quasi-static line parameters for one strip width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineGeometry {
    /// Strip width in meters.
    pub width: f64,
    pub eps_eff: f64,
    pub z0: f64,
}

impl LineGeometry {
    /// Guided wavelength c / (f sqrt(eps_eff)) in meters.
    pub fn lambda_g(&self, f_hz: f64) -> f64 {
        SPEED_OF_LIGHT / (f_hz * self.eps_eff.sqrt())
    }
}

fn eps_eff(u: f64, eps_r: f64) -> f64 {
    let f = if u <= 1.0 {
        (1.0 + 12.0 / u).powf(-0.5) + 0.04 * (1.0 - u).powi(2)
    } else {
        (1.0 + 12.0 / u).powf(-0.5)
    };
    (eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 * f
}

fn z0_narrow(u: f64, ee: f64) -> f64 {
    ETA0 / (2.0 * std::f64::consts::PI * ee.sqrt()) * (8.0 / u + 0.25 * u).ln()
}

fn z0_wide(u: f64, ee: f64) -> f64 {
    ETA0 / (ee.sqrt() * (u + 1.393 + 0.677 * (u + 1.444).ln()))
}

/// Computes effective permittivity and characteristic impedance for a
/// strip of width w on the given substrate.
pub fn analyze(width: f64, substrate: &Substrate) -> Result<LineGeometry> {
    if !(width > 0.0) {
        return Err(Error::domain("strip width must be positive"));
    }
    let u = width / substrate.h;
    let ee = eps_eff(u, substrate.eps_r);
    let z0 = if u <= BLEND_LO {
        z0_narrow(u, ee)
    } else if u >= BLEND_HI {
        z0_wide(u, ee)
    } else {
        let t = (u - BLEND_LO) / (BLEND_HI - BLEND_LO);
        (1.0 - t) * z0_narrow(u, ee) + t * z0_wide(u, ee)
    };
    Ok(LineGeometry {
        width,
        eps_eff: ee,
        z0,
    })
}

/// Finds the width giving a target impedance by bisection over
/// w/h in [0.05, 20], relying on z0 being strictly decreasing in w.
pub fn synthesize_width(z0_target: f64, substrate: &Substrate) -> Result<f64> {
    let mut lo = 0.05 * substrate.h;
    let mut hi = 20.0 * substrate.h;
    let z_hi = analyze(lo, substrate)?.z0;
    let z_lo = analyze(hi, substrate)?.z0;
    if !(z0_target <= z_hi && z0_target >= z_lo) {
        return Err(Error::Range {
            target: z0_target,
            lo: z_lo,
            hi: z_hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if analyze(mid, substrate)?.z0 > z0_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) / mid < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Guided wavelength at f for an analyzed line, meters.
pub fn guided_wavelength(f_hz: f64, geometry: &LineGeometry) -> Result<f64> {
    if !(f_hz > 0.0) {
        return Err(Error::domain("frequency must be positive"));
    }
    Ok(geometry.lambda_g(f_hz))
}

/// Physical footprint (x, y) in meters from a guided wavelength and the
/// per-axis size ratios.
pub fn footprint(lambda_g: f64, ratio_x: f64, ratio_y: f64) -> (f64, f64) {
    (ratio_x * lambda_g, ratio_y * lambda_g)
}

/// Footprint ratios of the reference layout, 0.31 x 0.18 guided
/// wavelengths (an area of 0.0558 lambda_g^2).
pub const REF_FOOTPRINT_RATIOS: (f64, f64) = (0.31, 0.18);
