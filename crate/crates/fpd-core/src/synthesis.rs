//! Divider synthesis: from a specification to a coupling plan.
//!
//! The target topology is a star of filter paths sharing one common
//! resonator (CR): the input port loads the CR, each of the `n_way` branches
//! is a chain of `order - 1` resonators, and every branch ends in an output
//! port. Each path therefore realizes a full order-n bandpass response
//! while the CR is shared, so a divider with R = 1 + n_way * (order - 1)
//! resonators replaces n_way separate filters.
//!
//! Couplings come from the lowpass prototype:
//!
//! ```text
//! M_{i,i+1} = FBW / sqrt(g_i * g_{i+1})     (along one path)
//! M_trunk   = M_{12} / sqrt(n_way)          (CR to each branch)
//! Qe        = g0 * g1 / FBW                 (port loading)
//! ```
//!
//! Splitting the first coupling by sqrt(n_way) keeps the input match of the
//! single-path filter while feeding the branches equally; `cmatrix`'s fold
//! equivalence verifies this identity numerically.

use crate::error::{Error, Result};
use crate::prototype::GValues;
use serde::{Deserialize, Serialize};

/// Everything needed to synthesize an equal-split filtering divider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DividerSpec {
    /// Center frequency in Hz.
    pub f0_hz: f64,
    /// Fractional bandwidth, 0 < fbw < 1.
    pub fbw: f64,
    /// Number of output ports.
    pub n_way: usize,
    /// Filter order per path (CR counts as the first resonator).
    pub order: usize,
    /// Port reference impedance in ohms.
    pub z0: f64,
    /// Chebyshev passband ripple in dB.
    pub ripple_db: f64,
}

impl DividerSpec {
    pub fn new(
        f0_hz: f64,
        fbw: f64,
        n_way: usize,
        order: usize,
        z0: f64,
        ripple_db: f64,
    ) -> Result<Self> {
        let spec = DividerSpec {
            f0_hz,
            fbw,
            n_way,
            order,
            z0,
            ripple_db,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f0_hz > 0.0) {
            return Err(Error::domain("center frequency must be positive"));
        }
        if !(self.fbw > 0.0 && self.fbw < 1.0) {
            return Err(Error::domain(format!(
                "fractional bandwidth must be in (0, 1), got {}",
                self.fbw
            )));
        }
        if self.n_way < 1 {
            return Err(Error::domain("n_way must be >= 1"));
        }
        if self.order < 2 {
            return Err(Error::Topology(
                "order must be >= 2 (common resonator plus at least one branch resonator)".into(),
            ));
        }
        if !(self.z0 > 0.0) {
            return Err(Error::domain("port impedance must be positive"));
        }
        if !(self.ripple_db > 0.0) {
            return Err(Error::domain("ripple must be positive"));
        }
        Ok(())
    }

    /// The three-way, third-order reference design: f0 = 2.6 GHz,
    /// FBW = 0.03, Z0 = 50 ohm, ripple 0.04321 dB (a 20 dB equiripple
    /// return loss).
    pub fn reference() -> Self {
        DividerSpec {
            f0_hz: 2.6e9,
            fbw: 0.03,
            n_way: 3,
            order: 3,
            z0: 50.0,
            ripple_db: 0.04321,
        }
    }

    pub fn prototype(&self) -> crate::prototype::PrototypeSpec {
        crate::prototype::PrototypeSpec {
            order: self.order,
            ripple_db: self.ripple_db,
        }
    }

    /// Angular center frequency in rad/s.
    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f0_hz
    }
}

/// Coupling edge between two resonators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub m: f64,
}

/// A port attached to a resonator with a given external Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortAttachment {
    /// 1-based port number; port 1 is the input.
    pub port: usize,
    pub resonator: usize,
    pub qe: f64,
}

/// Resonator-level description of the divider: ids, coupling edges and
/// port attachments. Resonator 0 is the common resonator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorGraph {
    pub n_resonators: usize,
    pub edges: Vec<Edge>,
    pub ports: Vec<PortAttachment>,
}

impl ResonatorGraph {
    pub fn validate(&self) -> Result<()> {
        for e in &self.edges {
            if e.a >= self.n_resonators || e.b >= self.n_resonators || e.a == e.b {
                return Err(Error::Topology(format!(
                    "edge ({}, {}) references invalid resonators",
                    e.a, e.b
                )));
            }
            if !(e.m > 0.0) {
                return Err(Error::domain("coupling coefficients must be positive"));
            }
        }
        let mut seen = vec![false; self.n_resonators];
        for p in &self.ports {
            if p.resonator >= self.n_resonators {
                return Err(Error::Topology(format!(
                    "port {} references invalid resonator {}",
                    p.port, p.resonator
                )));
            }
            if std::mem::replace(&mut seen[p.resonator], true) {
                return Err(Error::Topology(format!(
                    "resonator {} carries more than one port",
                    p.resonator
                )));
            }
            if !(p.qe > 0.0) {
                return Err(Error::domain("external Q must be positive"));
            }
        }
        if !self.is_connected() {
            return Err(Error::Topology("resonator graph is not connected".into()));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        if self.n_resonators == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.n_resonators];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        let mut visited = vec![false; self.n_resonators];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
        visited.into_iter().all(|v| v)
    }
}

/// Coupling coefficients, external Qs and topology for one divider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPlan {
    /// M_{i,i+1} along one path, starting with M_{12}; length order - 1.
    pub m_chain: Vec<f64>,
    /// CR-to-branch coupling, m_chain[0] / sqrt(n_way).
    pub m_trunk: f64,
    pub qe_in: f64,
    pub qe_out: f64,
    pub graph: ResonatorGraph,
}

impl CouplingPlan {
    pub fn n_way(&self) -> usize {
        self.graph.ports.len() - 1
    }

    pub fn order(&self) -> usize {
        self.m_chain.len() + 1
    }

    /// Same topology with different coupling values; qe_out is scaled by
    /// the same factor as qe_in so mismatched (even-order) loads keep their
    /// ratio.
    pub fn with_couplings(&self, m_chain: &[f64], qe_in: f64) -> CouplingPlan {
        assert_eq!(m_chain.len(), self.m_chain.len());
        let qe_out = self.qe_out * (qe_in / self.qe_in);
        plan_from_parts(self.n_way(), m_chain.to_vec(), qe_in, qe_out)
    }
}

/// Inter-resonator coupling coefficients M_{i,i+1} = FBW / sqrt(g_i g_{i+1})
/// along one filter path, i = 1..order-1.
pub fn inter_resonator_couplings(fbw: f64, g: &GValues) -> Result<Vec<f64>> {
    if !(fbw > 0.0 && fbw < 1.0) {
        return Err(Error::domain("fractional bandwidth must be in (0, 1)"));
    }
    let n = g.order();
    Ok((1..n)
        .map(|i| fbw / (g.g(i) * g.g(i + 1)).sqrt())
        .collect())
}

/// Trunk coupling M1 = M_first / sqrt(n_way): splitting the first coupling
/// of the prototype chain over n_way identical branches.
pub fn branch_coupling(m_first: f64, n_way: usize) -> Result<f64> {
    if !(m_first > 0.0) {
        return Err(Error::domain("coupling coefficient must be positive"));
    }
    if n_way < 1 {
        return Err(Error::domain("n_way must be >= 1"));
    }
    Ok(m_first / (n_way as f64).sqrt())
}

/// External quality factor Qe = g0 g1 / FBW (same formula on the output
/// side with g_n g_{n+1}).
pub fn external_q(g_a: f64, g_b: f64, fbw: f64) -> Result<f64> {
    if !(g_a > 0.0 && g_b > 0.0) {
        return Err(Error::domain("g-values must be positive"));
    }
    if !(fbw > 0.0 && fbw < 1.0) {
        return Err(Error::domain("fractional bandwidth must be in (0, 1)"));
    }
    Ok(g_a * g_b / fbw)
}

/// Builds the full coupling plan for a divider spec: couplings from the
/// prototype, topology from n_way and order.
pub fn build_coupling_plan(spec: &DividerSpec, g: &GValues) -> Result<CouplingPlan> {
    spec.validate()?;
    if g.order() != spec.order {
        return Err(Error::domain(format!(
            "prototype order {} does not match spec order {}",
            g.order(),
            spec.order
        )));
    }
    let m_chain = inter_resonator_couplings(spec.fbw, g)?;
    let qe_in = external_q(g.g(0), g.g(1), spec.fbw)?;
    let n = spec.order;
    let qe_out = external_q(g.g(n), g.g(n + 1), spec.fbw)?;
    let plan = plan_from_parts(spec.n_way, m_chain, qe_in, qe_out);
    plan.graph.validate()?;
    Ok(plan)
}

/// Assembles the star topology for given couplings. Branch k occupies
/// resonators 1 + k(order-1) .. (k+1)(order-1), chained away from the CR.
pub(crate) fn plan_from_parts(
    n_way: usize,
    m_chain: Vec<f64>,
    qe_in: f64,
    qe_out: f64,
) -> CouplingPlan {
    let order = m_chain.len() + 1;
    let per_branch = order - 1;
    let n_resonators = 1 + n_way * per_branch;
    let m_trunk = m_chain[0] / (n_way as f64).sqrt();

    let mut edges = Vec::new();
    let mut ports = vec![PortAttachment {
        port: 1,
        resonator: 0,
        qe: qe_in,
    }];
    for k in 0..n_way {
        let first = 1 + k * per_branch;
        edges.push(Edge {
            a: 0,
            b: first,
            m: m_trunk,
        });
        for j in 1..per_branch {
            edges.push(Edge {
                a: first + j - 1,
                b: first + j,
                m: m_chain[j],
            });
        }
        ports.push(PortAttachment {
            port: 2 + k,
            resonator: first + per_branch - 1,
            qe: qe_out,
        });
    }

    CouplingPlan {
        m_chain,
        m_trunk,
        qe_in,
        qe_out,
        graph: ResonatorGraph {
            n_resonators,
            edges,
            ports,
        },
    }
}

/// Knobs for [`refine_couplings`].
#[derive(Debug, Clone, Copy)]
pub struct RefineOptions {
    /// Simplex iteration budget; 0 returns the input plan unchanged.
    pub max_iters: usize,
    /// Initial vertex displacement in log-coupling space.
    pub simplex_scale: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_iters: 200,
            simplex_scale: 0.02,
        }
    }
}

/// Result of a refinement run. `aborted` is set when the objective went
/// non-finite and the input plan was returned untouched.
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub plan: CouplingPlan,
    pub aborted: bool,
    pub evaluations: usize,
    pub worst_rl_before_db: f64,
    pub worst_rl_after_db: f64,
}

/// Derivative-free improvement of the worst in-band return loss.
///
/// Runs a Nelder-Mead simplex over [ln m_chain.., ln qe] with the trunk
/// coupling tied to m_chain[0]/sqrt(n_way). The evaluator receives a
/// candidate plan and the band and must return the worst in-band return
/// loss in dB (higher is better). Initialization is deterministic (fixed
/// axis-aligned simplex), evaluation strictly sequential, so results are
/// reproducible. The best plan seen is returned, which can never be worse
/// than the input; iteration stops early once `target_rl_db` is reached.
pub fn refine_couplings<F>(
    plan: &CouplingPlan,
    target_rl_db: f64,
    band: (f64, f64),
    evaluator: F,
    opts: &RefineOptions,
) -> RefineOutcome
where
    F: Fn(&CouplingPlan, (f64, f64)) -> f64,
{
    let dim = plan.m_chain.len() + 1;
    let decode = |x: &[f64]| {
        let m: Vec<f64> = x[..dim - 1].iter().map(|v| v.exp()).collect();
        plan.with_couplings(&m, x[dim - 1].exp())
    };
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evaluations.set(evaluations.get() + 1);
        -evaluator(&decode(x), band)
    };

    let mut x0: Vec<f64> = plan.m_chain.iter().map(|m| m.ln()).collect();
    x0.push(plan.qe_in.ln());
    let f0 = eval(&x0);
    let rl_before = -f0;
    let abort = || RefineOutcome {
        plan: plan.clone(),
        aborted: true,
        evaluations: evaluations.get(),
        worst_rl_before_db: rl_before,
        worst_rl_after_db: rl_before,
    };
    if !f0.is_finite() {
        return abort();
    }
    if opts.max_iters == 0 || rl_before >= target_rl_db {
        return RefineOutcome {
            plan: plan.clone(),
            aborted: false,
            evaluations: evaluations.get(),
            worst_rl_before_db: rl_before,
            worst_rl_after_db: rl_before,
        };
    }

    // Simplex vertices as (point, value), kept sorted best-first.
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.clone(), f0)];
    for i in 0..dim {
        let mut v = x0.clone();
        v[i] += opts.simplex_scale;
        let fv = eval(&v);
        if !fv.is_finite() {
            return abort();
        }
        simplex.push((v, fv));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut best = simplex[0].clone();
    for _ in 0..opts.max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if simplex[0].1 < best.1 {
            best = simplex[0].clone();
        }
        if -best.1 >= target_rl_db || simplex[dim].1 - simplex[0].1 < 1e-10 {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(v, _)| v[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let point = |coef: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| centroid[i] + coef * (centroid[i] - worst.0[i]))
                .collect()
        };

        let xr = point(alpha);
        let fr = eval(&xr);
        if !fr.is_finite() {
            return abort();
        }
        if fr < simplex[0].1 {
            let xe = point(gamma);
            let fe = eval(&xe);
            if !fe.is_finite() {
                return abort();
            }
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let xc = point(if fr < worst.1 { rho } else { -rho });
            let fc = eval(&xc);
            if !fc.is_finite() {
                return abort();
            }
            if fc < worst.1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                // Shrink toward the best vertex.
                let x_best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for i in 0..dim {
                        v.0[i] = x_best[i] + sigma * (v.0[i] - x_best[i]);
                    }
                    v.1 = eval(&v.0);
                    if !v.1.is_finite() {
                        return abort();
                    }
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    if simplex[0].1 < best.1 {
        best = simplex[0].clone();
    }

    RefineOutcome {
        plan: decode(&best.0),
        aborted: false,
        evaluations: evaluations.get(),
        worst_rl_before_db: rl_before,
        worst_rl_after_db: -best.1,
    }
}
