//! Shared helpers for the integration tests.
//!
//! `ladder_reflection_power` evaluates the classical lowpass prototype
//! directly: shunt capacitors at odd positions, series inductors at even
//! positions, resistive terminations. It shares no code with the library's
//! coupling-matrix path, so agreement between the two is evidence rather
//! than a tautology.

use num_complex::Complex64;

/// |S11|^2 of the lowpass prototype ladder at normalized frequency `omega`.
///
/// `g` is the full prototype vector g0..g_{n+1}. The final value is a load
/// resistance when the last element is a shunt capacitor (odd n) and a load
/// conductance when it is a series inductor (even n).
pub fn ladder_reflection_power(g: &[f64], omega: f64) -> f64 {
    let n = g.len() - 2;
    let j = Complex64::new(0.0, 1.0);
    let mut a = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(0.0, 0.0);
    let mut c = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(1.0, 0.0);
    for (i, &gi) in g.iter().enumerate().take(n + 1).skip(1) {
        if i % 2 == 1 {
            let y = j * omega * gi;
            a += b * y;
            c += d * y;
        } else {
            let z = j * omega * gi;
            b += a * z;
            d += c * z;
        }
    }
    let zl = if n % 2 == 1 { g[n + 1] } else { 1.0 / g[n + 1] };
    let zin = (a * zl + b) / (c * zl + d);
    let zs = g[0];
    let gamma = (zin - zs) / (zin + zs);
    gamma.norm_sqr()
}

/// Insertion loss of the prototype ladder in dB at normalized frequency `omega`.
pub fn ladder_insertion_loss_db(g: &[f64], omega: f64) -> f64 {
    let refl = ladder_reflection_power(g, omega);
    -10.0 * (1.0 - refl).max(1e-300).log10()
}

/// Worst insertion loss over the normalized passband [0, 1].
pub fn ladder_worst_inband_il_db(g: &[f64], points: usize) -> f64 {
    (0..points)
        .map(|i| ladder_insertion_loss_db(g, i as f64 / (points - 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}
