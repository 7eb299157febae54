//! Chebyshev lowpass prototype element values.
//!
//! The g-values are the normalized element values of the doubly terminated
//! lowpass prototype ladder (g0 = source, g1..gn = alternating shunt C /
//! series L, g(n+1) = load). Every bandpass quantity downstream (coupling
//! coefficients, external Q) is derived from them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Order and passband ripple of a Chebyshev lowpass prototype.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrototypeSpec {
    /// Filter order n (number of reactive elements), n >= 1.
    pub order: usize,
    /// Passband ripple L_Ar in dB, > 0.
    pub ripple_db: f64,
}

impl PrototypeSpec {
    pub fn new(order: usize, ripple_db: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::domain("prototype order must be >= 1"));
        }
        if !(ripple_db > 0.0) || !ripple_db.is_finite() {
            return Err(Error::domain(format!(
                "ripple must be positive and finite, got {ripple_db}"
            )));
        }
        Ok(PrototypeSpec { order, ripple_db })
    }

    /// Builds a spec from an equiripple return-loss target instead of a
    /// ripple level.
    pub fn from_return_loss(order: usize, rl_db: f64) -> Result<Self> {
        Self::new(order, ripple_from_return_loss(rl_db)?)
    }
}

/// Normalized prototype element values g0..g(n+1).
#[derive(Debug, Clone, PartialEq)]
pub struct GValues {
    g: Vec<f64>,
}

impl GValues {
    /// Wraps raw element values, checking basic sanity (length >= 3, all
    /// positive, g0 = 1).
    pub fn from_values(g: Vec<f64>) -> Result<Self> {
        if g.len() < 3 {
            return Err(Error::domain("g-value sequence needs at least g0, g1, g2"));
        }
        if g[0] != 1.0 {
            return Err(Error::domain(format!("g0 must be 1, got {}", g[0])));
        }
        if g.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::domain("all g-values must be positive and finite"));
        }
        Ok(GValues { g })
    }

    /// Prototype order n (the sequence holds n + 2 values).
    pub fn order(&self) -> usize {
        self.g.len() - 2
    }

    /// Element value g_i, i in 0..=n+1.
    pub fn g(&self, i: usize) -> f64 {
        self.g[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }
}

/// Converts an equiripple return-loss level to the corresponding passband
/// ripple: ripple = -10 log10(1 - 10^(-RL/10)). The map is an involution,
/// so it also converts ripple back to return loss.
pub fn ripple_from_return_loss(rl_db: f64) -> Result<f64> {
    if !(rl_db > 0.0) || !rl_db.is_finite() {
        return Err(Error::domain(format!(
            "return loss must be positive and finite, got {rl_db}"
        )));
    }
    Ok(-10.0 * (1.0 - 10f64.powf(-rl_db / 10.0)).log10())
}

/// Inverse of [`ripple_from_return_loss`]; same closed form.
pub fn return_loss_from_ripple(ripple_db: f64) -> Result<f64> {
    ripple_from_return_loss(ripple_db)
}

/// Computes the prototype element values by the standard Chebyshev
/// recursion:
///
/// ```text
/// beta  = ln(coth(L_Ar / 17.37))
/// gamma = sinh(beta / 2n)
/// a_i   = sin((2i - 1) pi / 2n)
/// b_i   = gamma^2 + sin^2(i pi / n)
/// g1    = 2 a1 / gamma
/// g_i   = 4 a_{i-1} a_i / (b_{i-1} g_{i-1})
/// ```
///
/// with g0 = 1 and g(n+1) = 1 for odd n, coth^2(beta/4) for even n.
pub fn compute_g_values(spec: &PrototypeSpec) -> Result<GValues> {
    let n = spec.order;
    if n == 0 {
        return Err(Error::domain("prototype order must be >= 1"));
    }
    let nf = n as f64;
    let beta = coth(spec.ripple_db / 17.37).ln();
    let gamma = (beta / (2.0 * nf)).sinh();

    let a = |i: usize| ((2.0 * i as f64 - 1.0) * std::f64::consts::PI / (2.0 * nf)).sin();
    let b = |i: usize| gamma * gamma + (i as f64 * std::f64::consts::PI / nf).sin().powi(2);

    let mut g = Vec::with_capacity(n + 2);
    g.push(1.0);
    g.push(2.0 * a(1) / gamma);
    for i in 2..=n {
        let gi = 4.0 * a(i - 1) * a(i) / (b(i - 1) * g[i - 1]);
        g.push(gi);
    }
    g.push(if n % 2 == 1 {
        1.0
    } else {
        coth(beta / 4.0).powi(2)
    });
    GValues::from_values(g)
}

/// Published rounded element values for the reference third-order design
/// with a 20 dB equiripple return loss: g = [1, 0.8516, 1.1032, 0.8516, 1].
///
/// Kept verbatim so comparisons against the reference design do not inherit
/// recursion rounding.
pub fn ref_3rd_order_20db() -> GValues {
    GValues {
        g: vec![1.0, 0.8516, 1.1032, 0.8516, 1.0],
    }
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}
