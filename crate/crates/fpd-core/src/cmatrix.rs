//! Coupling-matrix S-parameter engine.
//!
//! A bandpass network of R synchronously tuned resonators is described by a
//! normalized coupling matrix m (m_ij = M_ij / FBW) plus a port-loading
//! diagonal q_e = Qe * FBW. At the normalized lowpass frequency
//! p = (1/FBW)(f/f0 - f0/f) the network response comes from one dense solve:
//!
//! ```text
//! A = (delta + j p) I + Q - j m,   Q = diag(1/q_e at loaded resonators)
//! S = I_P - 2 D^T A^-1 D,          D[r_k, k] = 1 / sqrt(q_e,k)
//! ```
//!
//! with delta = 1/(FBW * Qu) a uniform resonator loss term (0 when
//! lossless). For delta = 0 this S is exactly unitary and reciprocal, which
//! the sweep invariants check to 1e-9.

use crate::error::{Error, Result};
use crate::synthesis::{plan_from_parts, CouplingPlan, DividerSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// One frequency expressed both in Hz and as the normalized lowpass
/// variable p = (1/FBW)(f/f0 - f0/f).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationPoint {
    pub f_hz: f64,
    pub p: f64,
}

impl EvaluationPoint {
    pub fn new(f_hz: f64, f0_hz: f64, fbw: f64) -> Self {
        EvaluationPoint {
            f_hz,
            p: (f_hz / f0_hz - f0_hz / f_hz) / fbw,
        }
    }
}

/// Port attachment in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortLoading {
    pub resonator: usize,
    /// Normalized external quality factor q_e = Qe * FBW (equal to g0*g1
    /// for prototype-derived plans, independent of FBW).
    pub q_e: f64,
}

/// Normalized coupling matrix plus port loading, immutable once built and
/// shareable across sweep workers.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCouplingMatrix {
    m: DMatrix<f64>,
    loading: Vec<PortLoading>,
    f0_hz: f64,
    fbw: f64,
    z0: f64,
    /// Uniform loss term 1/(FBW * Qu); 0 = lossless.
    delta: f64,
    plan: Option<CouplingPlan>,
}

impl NormalizedCouplingMatrix {
    /// Normalizes a coupling plan: m_ij = M_ij / FBW, q_e = Qe * FBW.
    pub fn from_plan(plan: &CouplingPlan, spec: &DividerSpec) -> Result<Self> {
        spec.validate()?;
        plan.graph.validate()?;
        let r = plan.graph.n_resonators;
        let mut m = DMatrix::zeros(r, r);
        for e in &plan.graph.edges {
            m[(e.a, e.b)] = e.m / spec.fbw;
            m[(e.b, e.a)] = e.m / spec.fbw;
        }
        let loading = plan
            .graph
            .ports
            .iter()
            .map(|p| PortLoading {
                resonator: p.resonator,
                q_e: p.qe * spec.fbw,
            })
            .collect();
        Ok(NormalizedCouplingMatrix {
            m,
            loading,
            f0_hz: spec.f0_hz,
            fbw: spec.fbw,
            z0: spec.z0,
            delta: 0.0,
            plan: Some(plan.clone()),
        })
    }

    /// Builds directly from a normalized matrix and loadings (no plan
    /// attached); the matrix must be symmetric with zero diagonal.
    pub fn from_parts(
        m: DMatrix<f64>,
        loading: Vec<PortLoading>,
        f0_hz: f64,
        fbw: f64,
        z0: f64,
    ) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::domain("coupling matrix must be square"));
        }
        for i in 0..m.nrows() {
            if m[(i, i)] != 0.0 {
                return Err(Error::domain("coupling matrix diagonal must be zero"));
            }
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::domain("coupling matrix must be symmetric"));
                }
            }
        }
        let mut seen = vec![false; m.nrows()];
        for l in &loading {
            if l.resonator >= m.nrows() || !(l.q_e > 0.0) {
                return Err(Error::domain("invalid port loading"));
            }
            if std::mem::replace(&mut seen[l.resonator], true) {
                return Err(Error::domain("duplicate port resonator"));
            }
        }
        Ok(NormalizedCouplingMatrix {
            m,
            loading,
            f0_hz,
            fbw,
            z0,
            delta: 0.0,
            plan: None,
        })
    }

    pub fn n_resonators(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_ports(&self) -> usize {
        self.loading.len()
    }

    pub fn f0_hz(&self) -> f64 {
        self.f0_hz
    }

    pub fn fbw(&self) -> f64 {
        self.fbw
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn loading(&self) -> &[PortLoading] {
        &self.loading
    }

    pub fn loss_delta(&self) -> f64 {
        self.delta
    }

    /// Copy with a uniform resonator loss delta = 1/(FBW * Qu) on the
    /// diagonal. Infinite Qu recovers the lossless matrix.
    pub fn with_uniform_loss(&self, qu: f64) -> Result<Self> {
        if !(qu > 0.0) {
            return Err(Error::domain("unloaded Q must be positive"));
        }
        let mut out = self.clone();
        out.delta = if qu.is_finite() {
            1.0 / (self.fbw * qu)
        } else {
            0.0
        };
        Ok(out)
    }

    /// Full P x P scattering matrix at one normalized frequency.
    pub fn evaluate(&self, point: &EvaluationPoint) -> Result<DMatrix<Complex64>> {
        if !point.p.is_finite() {
            return Err(Error::Numeric {
                freq_hz: point.f_hz,
                message: "normalized frequency is not finite".into(),
            });
        }
        let r = self.m.nrows();
        let np = self.loading.len();
        let mut a = DMatrix::from_element(r, r, Complex64::new(0.0, 0.0));
        for i in 0..r {
            for j in 0..r {
                if i == j {
                    a[(i, i)] = Complex64::new(self.delta, point.p);
                } else if self.m[(i, j)] != 0.0 {
                    a[(i, j)] = Complex64::new(0.0, -self.m[(i, j)]);
                }
            }
        }
        let mut d = DMatrix::from_element(r, np, Complex64::new(0.0, 0.0));
        for (k, l) in self.loading.iter().enumerate() {
            a[(l.resonator, l.resonator)] += Complex64::new(1.0 / l.q_e, 0.0);
            d[(l.resonator, k)] = Complex64::new(1.0 / l.q_e.sqrt(), 0.0);
        }
        let x = a.lu().solve(&d).ok_or_else(|| Error::Numeric {
            freq_hz: point.f_hz,
            message: "singular coupling-matrix system".into(),
        })?;
        let mut s = DMatrix::identity(np, np);
        s -= (d.transpose() * x) * Complex64::new(2.0, 0.0);
        Ok(s)
    }

    pub fn evaluate_at(&self, f_hz: f64) -> Result<DMatrix<Complex64>> {
        self.evaluate(&EvaluationPoint::new(f_hz, self.f0_hz, self.fbw))
    }

    /// Sweeps a sorted frequency grid. Work fans out across the rayon pool
    /// with per-frequency results collected into pre-ordered slots, so the
    /// output is bitwise identical at any thread count.
    pub fn sweep(&self, freqs: &[f64]) -> Result<SweepResult> {
        if freqs.is_empty() {
            return Err(Error::domain("frequency grid is empty"));
        }
        if freqs.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return Err(Error::domain("frequencies must be positive and finite"));
        }
        if freqs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("frequency grid must be sorted"));
        }
        let s = freqs
            .par_iter()
            .map(|&f| self.evaluate_at(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepResult {
            freqs: freqs.to_vec(),
            s,
            z0: self.z0,
            plan: self.plan.clone(),
        })
    }
}

/// Uniformly spaced frequency grid, endpoints included.
pub fn frequency_grid(start_hz: f64, stop_hz: f64, points: usize) -> Result<Vec<f64>> {
    if !(start_hz > 0.0) || !(stop_hz > start_hz) {
        return Err(Error::domain("grid needs 0 < start < stop"));
    }
    if points < 2 {
        return Err(Error::domain("grid needs at least 2 points"));
    }
    let step = (stop_hz - start_hz) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| start_hz + i as f64 * step).collect();
    // Pin the endpoint; i*step can land an ulp off stop_hz.
    grid[points - 1] = stop_hz;
    Ok(grid)
}

/// Per-frequency scattering matrices from one sweep. Port 1 (index 0) is
/// the input.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub freqs: Vec<f64>,
    pub s: Vec<DMatrix<Complex64>>,
    /// Port reference impedance the S-parameters are normalized to.
    pub z0: f64,
    /// The plan the sweep was produced from, when one exists.
    pub plan: Option<CouplingPlan>,
}

impl SweepResult {
    pub fn new(freqs: Vec<f64>, s: Vec<DMatrix<Complex64>>, z0: f64) -> Result<Self> {
        if freqs.is_empty() || freqs.len() != s.len() {
            return Err(Error::domain(
                "sweep needs equal, nonzero frequency and matrix counts",
            ));
        }
        let np = s[0].nrows();
        if np == 0 || s.iter().any(|m| m.nrows() != np || m.ncols() != np) {
            return Err(Error::domain("all S matrices must be square and same size"));
        }
        Ok(SweepResult {
            freqs,
            s,
            z0,
            plan: None,
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn n_ports(&self) -> usize {
        self.s[0].nrows()
    }

    /// |S_ij| in dB at a sweep index (0-based port indices).
    pub fn s_db(&self, idx: usize, i: usize, j: usize) -> f64 {
        20.0 * self.s[idx][(i, j)].norm().max(1e-20).log10()
    }

    /// Index of the sample closest to f_hz.
    pub fn nearest_index(&self, f_hz: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &f) in self.freqs.iter().enumerate() {
            let d = (f - f_hz).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }

    /// Worst deviation from unitarity, max over points of the largest
    /// |(S^H S - I)| entry. Zero-loss sweeps stay below 1e-9.
    pub fn max_unitarity_defect(&self) -> f64 {
        self.s
            .iter()
            .map(|s| {
                let d = s.adjoint() * s - DMatrix::<Complex64>::identity(s.nrows(), s.ncols());
                d.iter().map(|c| c.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Worst deviation from reciprocity, max over points of |S - S^T|.
    pub fn max_reciprocity_defect(&self) -> f64 {
        self.s
            .iter()
            .map(|s| {
                let d = s - s.transpose();
                d.iter().map(|c| c.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Single-path filter equivalent to the divider: an order-resonator chain
/// with the trunk coupling folded back to M_12 = M_trunk * sqrt(n_way).
/// Its S11 equals the divider's, and its S21 equals sqrt(n_way) * S_k1.
pub fn fold_equivalent_filter(plan: &CouplingPlan) -> CouplingPlan {
    plan_from_parts(1, plan.m_chain.clone(), plan.qe_in, plan.qe_out)
}

/// Response summary extracted from one sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResponseMetrics {
    /// Insertion loss at the sample nearest f0, one entry per output port.
    pub il_at_f0_db: Vec<f64>,
    pub worst_in_band_rl_db: f64,
    /// Analytic ripple-band edges f0 (-FBW/2 + sqrt(1 + (FBW/2)^2)) and
    /// f0 (FBW/2 + sqrt(1 + (FBW/2)^2)).
    pub band_edges_hz: (f64, f64),
    /// Bandwidth between the outermost crossings of the worst in-band
    /// reflection level, divided by f0.
    pub measured_fbw: f64,
    pub reflection_zeros_hz: Vec<f64>,
    /// Worst in-band coupling between output ports in dB; None for
    /// two-port sweeps. Reported only, no design target.
    pub worst_output_coupling_db: Option<f64>,
}

/// Analytic edges of the ripple band |p| <= 1.
pub fn ripple_band_edges(f0_hz: f64, fbw: f64) -> (f64, f64) {
    let half = fbw / 2.0;
    let root = (1.0 + half * half).sqrt();
    (f0_hz * (root - half), f0_hz * (root + half))
}

/// Computes response metrics from a sweep. The grid must cover the ripple
/// band of (f0, fbw); in-band means |p| <= 1.
pub fn metrics(sweep: &SweepResult, f0_hz: f64, fbw: f64) -> Result<ResponseMetrics> {
    let (band_lo, band_hi) = ripple_band_edges(f0_hz, fbw);
    let n = sweep.len();
    if sweep.freqs[0] > band_lo || sweep.freqs[n - 1] < band_hi {
        return Err(Error::domain(format!(
            "sweep [{:.4e}, {:.4e}] does not cover the ripple band [{:.4e}, {:.4e}]",
            sweep.freqs[0],
            sweep.freqs[n - 1],
            band_lo,
            band_hi
        )));
    }

    let db: Vec<f64> = (0..n).map(|i| sweep.s_db(i, 0, 0)).collect();
    let in_band: Vec<bool> = sweep
        .freqs
        .iter()
        .map(|&f| {
            let p = (f / f0_hz - f0_hz / f) / fbw;
            p.abs() <= 1.0
        })
        .collect();

    let level = db
        .iter()
        .zip(&in_band)
        .filter(|(_, &ib)| ib)
        .map(|(&v, _)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_in_band_rl_db = -level;

    // Outermost crossings of the worst in-band reflection level, walking
    // out from f0 with linear interpolation between samples.
    let i0 = sweep.nearest_index(f0_hz);
    let cross = |i: usize, j: usize| {
        sweep.freqs[i]
            + (sweep.freqs[j] - sweep.freqs[i]) * (level - db[i]) / (db[j] - db[i])
    };
    let mut i = i0;
    while i > 0 && db[i] <= level {
        i -= 1;
    }
    let f_lo = if db[i] <= level {
        sweep.freqs[i]
    } else {
        cross(i, i + 1)
    };
    let mut i = i0;
    while i + 1 < n && db[i] <= level {
        i += 1;
    }
    let f_hi = if db[i] <= level {
        sweep.freqs[i]
    } else {
        cross(i - 1, i)
    };
    let measured_fbw = (f_hi - f_lo) / f0_hz;

    // Reflection zeros: local |S11| minima below -40 dB, refined by a
    // parabolic fit through the three neighboring dB samples.
    let mut reflection_zeros_hz = Vec::new();
    for i in 1..n - 1 {
        if db[i] < -40.0 && db[i] <= db[i - 1] && db[i] < db[i + 1] {
            let denom = db[i - 1] - 2.0 * db[i] + db[i + 1];
            let offset = if denom.abs() > 1e-12 {
                0.5 * (db[i - 1] - db[i + 1]) / denom
            } else {
                0.0
            };
            let half_span = (sweep.freqs[i + 1] - sweep.freqs[i - 1]) / 2.0;
            reflection_zeros_hz.push(sweep.freqs[i] + offset.clamp(-1.0, 1.0) * half_span);
        }
    }

    let idx0 = sweep.nearest_index(f0_hz);
    let np = sweep.n_ports();
    let il_at_f0_db: Vec<f64> = (1..np).map(|k| -sweep.s_db(idx0, k, 0)).collect();

    let worst_output_coupling_db = if np >= 3 {
        let mut worst = f64::NEG_INFINITY;
        for (i, ib) in in_band.iter().enumerate() {
            if !ib {
                continue;
            }
            for k in 1..np {
                for l in 1..np {
                    if k != l {
                        worst = worst.max(sweep.s_db(i, k, l));
                    }
                }
            }
        }
        Some(worst)
    } else {
        None
    };

    Ok(ResponseMetrics {
        il_at_f0_db,
        worst_in_band_rl_db,
        band_edges_hz: (band_lo, band_hi),
        measured_fbw,
        reflection_zeros_hz,
        worst_output_coupling_db,
    })
}

/// Finds the unloaded Q whose uniform loss raises the insertion loss at f0
/// by `excess_il_db` over the lossless value, by geometric bisection on
/// [10, 1e8].
pub fn fit_unloaded_q(ncm: &NormalizedCouplingMatrix, excess_il_db: f64) -> Result<f64> {
    if !(excess_il_db > 0.0) {
        return Err(Error::domain("excess insertion loss must be positive"));
    }
    let f0 = ncm.f0_hz();
    let il = |s: &DMatrix<Complex64>| -20.0 * s[(1, 0)].norm().max(1e-20).log10();
    let il0 = il(&ncm.with_uniform_loss(f64::INFINITY)?.evaluate_at(f0)?);
    let excess = |qu: f64| -> Result<f64> {
        Ok(il(&ncm.with_uniform_loss(qu)?.evaluate_at(f0)?) - il0)
    };

    let (mut lo, mut hi) = (10.0f64, 1e8f64);
    if excess(lo)? < excess_il_db || excess(hi)? > excess_il_db {
        return Err(Error::Range {
            target: excess_il_db,
            lo,
            hi,
        });
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if excess(mid)? > excess_il_db {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-12 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}
