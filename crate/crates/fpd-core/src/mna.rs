//! Independent lumped-circuit oracle based on nodal analysis.
//!
//! The coupling-matrix engine and this module model the same divider in two
//! unrelated ways: `cmatrix` solves the normalized lowpass system, while
//! this module synthesizes an actual L/C/inverter netlist and runs standard
//! AC nodal analysis on it. With ideal inverters the two agree to solver
//! precision, which is the repository's central cross-check.
//!
//! Node 0 is ground. The admittance matrix is assembled per frequency from
//! element stamps; for a two-terminal admittance y between nodes a and b,
//! y is added at (a,a) and (b,b) and subtracted at (a,b) and (b,a), with
//! ground rows and columns dropped. Port k is excited by replacing its
//! termination with a source: a shunt conductance G = 1/z0 plus an injected
//! current 2 sqrt(G), which corresponds to a unit incident wave; then
//! S_lk = sqrt(G_l) V_l - delta_lk.

use crate::cmatrix::SweepResult;
use crate::error::{Error, Result};
use crate::synthesis::{CouplingPlan, DividerSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// One netlist element. Values are in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    Capacitor { n1: usize, n2: usize, farads: f64 },
    /// Inductance may be negative: the inductive-pi inverter realization
    /// leaves a -L shunt arm at port nodes where there is no tank to
    /// absorb it.
    Inductor { n1: usize, n2: usize, henries: f64 },
    Resistor { n1: usize, n2: usize, ohms: f64 },
    /// Ideal admittance inverter, Y = [[0, -jJ], [-jJ, 0]]. It stamps only
    /// off-diagonal entries, so an inverter with one terminal grounded
    /// stamps nothing at all (the surviving entries sit in the eliminated
    /// ground row and column).
    Inverter { n1: usize, n2: usize, siemens: f64 },
    /// Port attachment: S-parameters are referenced to z0 at this node.
    Port { node: usize, z0: f64 },
}

/// Lumped circuit: ground node 0 plus numbered nodes, elements in
/// insertion order. Ports are numbered by order of appearance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Netlist {
    elements: Vec<Element>,
    n_nodes: usize,
}

impl Netlist {
    pub fn new() -> Self {
        Netlist::default()
    }

    pub fn capacitor(&mut self, n1: usize, n2: usize, farads: f64) -> &mut Self {
        self.push(Element::Capacitor { n1, n2, farads })
    }

    pub fn inductor(&mut self, n1: usize, n2: usize, henries: f64) -> &mut Self {
        self.push(Element::Inductor { n1, n2, henries })
    }

    pub fn resistor(&mut self, n1: usize, n2: usize, ohms: f64) -> &mut Self {
        self.push(Element::Resistor { n1, n2, ohms })
    }

    pub fn inverter(&mut self, n1: usize, n2: usize, siemens: f64) -> &mut Self {
        self.push(Element::Inverter { n1, n2, siemens })
    }

    pub fn port(&mut self, node: usize, z0: f64) -> &mut Self {
        self.push(Element::Port { node, z0 })
    }

    fn push(&mut self, e: Element) -> &mut Self {
        let top = match e {
            Element::Capacitor { n1, n2, .. }
            | Element::Inductor { n1, n2, .. }
            | Element::Resistor { n1, n2, .. }
            | Element::Inverter { n1, n2, .. } => n1.max(n2),
            Element::Port { node, .. } => node,
        };
        self.n_nodes = self.n_nodes.max(top + 1);
        self.elements.push(e);
        self
    }

    /// Node count including ground.
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// (node, z0) per port, in port order.
    pub fn ports(&self) -> Vec<(usize, f64)> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                Element::Port { node, z0 } => Some((*node, *z0)),
                _ => None,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.elements {
            match *e {
                Element::Capacitor { n1, n2, farads } => {
                    check_branch(n1, n2)?;
                    check_value(farads, "capacitance", false)?;
                }
                Element::Inductor { n1, n2, henries } => {
                    check_branch(n1, n2)?;
                    check_value(henries, "inductance", true)?;
                }
                Element::Resistor { n1, n2, ohms } => {
                    check_branch(n1, n2)?;
                    check_value(ohms, "resistance", false)?;
                }
                Element::Inverter { n1, n2, siemens } => {
                    check_branch(n1, n2)?;
                    check_value(siemens, "inverter J", false)?;
                }
                Element::Port { node, z0 } => {
                    if node == 0 {
                        return Err(Error::domain("ports may not sit on ground"));
                    }
                    check_value(z0, "port impedance", false)?;
                }
            }
        }
        Ok(())
    }

    /// Admittance matrix at f_hz with all port terminations stamped;
    /// ground row/column eliminated (node n maps to row n-1).
    fn admittance_matrix(&self, f_hz: f64) -> DMatrix<Complex64> {
        let n = self.n_nodes.saturating_sub(1);
        let omega = 2.0 * std::f64::consts::PI * f_hz;
        let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        fn stamp(y: &mut DMatrix<Complex64>, n1: usize, n2: usize, val: Complex64) {
            if n1 > 0 {
                y[(n1 - 1, n1 - 1)] += val;
            }
            if n2 > 0 {
                y[(n2 - 1, n2 - 1)] += val;
            }
            if n1 > 0 && n2 > 0 {
                y[(n1 - 1, n2 - 1)] -= val;
                y[(n2 - 1, n1 - 1)] -= val;
            }
        }
        for e in &self.elements {
            match *e {
                Element::Capacitor { n1, n2, farads } => {
                    stamp(&mut y, n1, n2, Complex64::new(0.0, omega * farads));
                }
                Element::Inductor { n1, n2, henries } => {
                    stamp(&mut y, n1, n2, Complex64::new(0.0, -1.0 / (omega * henries)));
                }
                Element::Resistor { n1, n2, ohms } => {
                    stamp(&mut y, n1, n2, Complex64::new(1.0 / ohms, 0.0));
                }
                Element::Inverter { n1, n2, siemens } => {
                    if n1 > 0 && n2 > 0 {
                        let j = Complex64::new(0.0, -siemens);
                        y[(n1 - 1, n2 - 1)] += j;
                        y[(n2 - 1, n1 - 1)] += j;
                    }
                }
                Element::Port { node, z0 } => {
                    y[(node - 1, node - 1)] += Complex64::new(1.0 / z0, 0.0);
                }
            }
        }
        y
    }

    /// Full S-matrix at a single frequency.
    pub fn sparams_at(&self, f_hz: f64) -> Result<DMatrix<Complex64>> {
        let ports = self.ports();
        if ports.is_empty() {
            return Err(Error::domain("netlist has no ports"));
        }
        let n = self.n_nodes - 1;
        let np = ports.len();
        let y = self.admittance_matrix(f_hz);
        let mut rhs = DMatrix::from_element(n, np, Complex64::new(0.0, 0.0));
        for (k, &(node, z0)) in ports.iter().enumerate() {
            rhs[(node - 1, k)] = Complex64::new(2.0 / z0.sqrt(), 0.0);
        }
        let v = y.lu().solve(&rhs).ok_or_else(|| Error::Numeric {
            freq_hz: f_hz,
            message: "singular nodal matrix".into(),
        })?;
        let mut s = DMatrix::from_element(np, np, Complex64::new(0.0, 0.0));
        for (l, &(node_l, z0_l)) in ports.iter().enumerate() {
            for k in 0..np {
                s[(l, k)] = v[(node_l - 1, k)] / z0_l.sqrt();
                if l == k {
                    s[(l, k)] -= Complex64::new(1.0, 0.0);
                }
            }
        }
        Ok(s)
    }

    /// AC S-parameter sweep; same parallel-but-bitwise-deterministic
    /// contract as the coupling-matrix sweep.
    pub fn ac_sparams(&self, freqs: &[f64]) -> Result<SweepResult> {
        self.validate()?;
        if freqs.is_empty() {
            return Err(Error::domain("frequency grid is empty"));
        }
        if freqs.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return Err(Error::domain("frequencies must be positive and finite"));
        }
        let ports = self.ports();
        if ports.is_empty() {
            return Err(Error::domain("netlist has no ports"));
        }
        let s = freqs
            .par_iter()
            .map(|&f| self.sparams_at(f))
            .collect::<Result<Vec<_>>>()?;
        SweepResult::new(freqs.to_vec(), s, ports[0].1)
    }

    /// Text form, one element per line: `C n1 n2 value`, `L n1 n2 value`,
    /// `R n1 n2 value`, `J n1 n2 value`, `P n z0`. Values print in
    /// scientific notation with enough digits to round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.elements {
            match *e {
                Element::Capacitor { n1, n2, farads } => {
                    out.push_str(&format!("C {n1} {n2} {farads:e}\n"));
                }
                Element::Inductor { n1, n2, henries } => {
                    out.push_str(&format!("L {n1} {n2} {henries:e}\n"));
                }
                Element::Resistor { n1, n2, ohms } => {
                    out.push_str(&format!("R {n1} {n2} {ohms:e}\n"));
                }
                Element::Inverter { n1, n2, siemens } => {
                    out.push_str(&format!("J {n1} {n2} {siemens:e}\n"));
                }
                Element::Port { node, z0 } => {
                    out.push_str(&format!("P {node} {z0:e}\n"));
                }
            }
        }
        out
    }

    /// Parses the text form. Blank lines and lines starting with `#` are
    /// skipped; errors carry 1-based line numbers.
    pub fn from_text(text: &str) -> Result<Netlist> {
        let mut netlist = Netlist::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let parse_node = |s: &str| -> Result<usize> {
                s.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid node index '{s}'"),
                })
            };
            let parse_value = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid value '{s}'"),
                })
            };
            match fields[0] {
                kind @ ("C" | "L" | "R" | "J") => {
                    if fields.len() != 4 {
                        return Err(Error::Parse {
                            line,
                            message: format!("{kind} element needs: {kind} n1 n2 value"),
                        });
                    }
                    let n1 = parse_node(fields[1])?;
                    let n2 = parse_node(fields[2])?;
                    let v = parse_value(fields[3])?;
                    match kind {
                        "C" => netlist.capacitor(n1, n2, v),
                        "L" => netlist.inductor(n1, n2, v),
                        "R" => netlist.resistor(n1, n2, v),
                        _ => netlist.inverter(n1, n2, v),
                    };
                }
                "P" => {
                    if fields.len() != 3 {
                        return Err(Error::Parse {
                            line,
                            message: "port needs: P node z0".into(),
                        });
                    }
                    let node = parse_node(fields[1])?;
                    let z0 = parse_value(fields[2])?;
                    netlist.port(node, z0);
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown element kind '{other}'"),
                    });
                }
            }
        }
        netlist.validate().map_err(|e| match e {
            Error::Domain(msg) => Error::Parse { line: 0, message: msg },
            other => other,
        })?;
        Ok(netlist)
    }
}

fn check_branch(n1: usize, n2: usize) -> Result<()> {
    if n1 == n2 {
        return Err(Error::domain(format!(
            "element terminals must differ, got node {n1} twice"
        )));
    }
    Ok(())
}

fn check_value(v: f64, what: &str, signed: bool) -> Result<()> {
    if !v.is_finite() || v == 0.0 || (!signed && v < 0.0) {
        return Err(Error::domain(format!("invalid {what}: {v}")));
    }
    Ok(())
}

/// Published inductor values of the reference circuit, kept as fixed
/// comparison data (never recomputed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitConstants {
    /// Port inverter equivalent, henries.
    pub l01: f64,
    /// Intra-branch inverter equivalent, henries.
    pub l12: f64,
    /// Trunk inverter equivalent, henries.
    pub le: f64,
    pub z0: f64,
}

impl CircuitConstants {
    pub fn reference() -> Self {
        CircuitConstants {
            l01: 3.0607e-9,
            l12: 3.4836e-9,
            le: 6.0337e-9,
            z0: 50.0,
        }
    }
}

/// An inverter in the synthesized circuit with its equivalent inductor
/// L = 1/(omega0 J).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverterRecord {
    /// Resonator pair for edge inverters; (resonator, port node) meaning
    /// is documented per field below for port inverters.
    pub nodes: (usize, usize),
    pub j_siemens: f64,
    pub l_equiv_henries: f64,
}

/// Netlist plus the element values it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedCircuit {
    pub netlist: Netlist,
    /// Susceptance slope b = omega0 C of each tank, siemens.
    pub b_slope: f64,
    pub tank_c_farads: f64,
    pub tank_l_henries: f64,
    /// Inter-resonator inverters, nodes = resonator node pair.
    pub edge_inverters: Vec<InverterRecord>,
    /// Port inverters, nodes = (resonator node, port node), one per port
    /// in port order.
    pub port_inverters: Vec<InverterRecord>,
    pub z0: f64,
    pub f0_hz: f64,
}

/// Synthesizes the lumped divider circuit from a coupling plan.
///
/// Convention: the input port inverter is J01 = 1/Z0, which fixes the tank
/// susceptance slope b = Qe J01^2 Z0 = Qe/Z0, hence C = b/omega0 and
/// L = 1/(omega0^2 C). Each coupling edge M becomes an ideal inverter
/// J = M b; a port with external quality factor Qe gets
/// J = sqrt(b/(Qe Z0)). Resonator i sits on node i+1, port k on node
/// R+k (R = resonator count).
pub fn build_divider_netlist(
    plan: &CouplingPlan,
    spec: &DividerSpec,
) -> Result<SynthesizedCircuit> {
    spec.validate()?;
    plan.graph.validate()?;
    let omega0 = spec.omega0();
    let b = plan.qe_in / spec.z0;
    let tank_c = b / omega0;
    let tank_l = 1.0 / (omega0 * omega0 * tank_c);
    let r = plan.graph.n_resonators;

    let mut netlist = Netlist::new();
    for i in 0..r {
        netlist.capacitor(i + 1, 0, tank_c);
        netlist.inductor(i + 1, 0, tank_l);
    }
    let mut edge_inverters = Vec::new();
    for e in &plan.graph.edges {
        let j = e.m * b;
        netlist.inverter(e.a + 1, e.b + 1, j);
        edge_inverters.push(InverterRecord {
            nodes: (e.a + 1, e.b + 1),
            j_siemens: j,
            l_equiv_henries: 1.0 / (omega0 * j),
        });
    }
    let mut port_inverters = Vec::new();
    for p in &plan.graph.ports {
        let port_node = r + p.port;
        let j = (b / (p.qe * spec.z0)).sqrt();
        netlist.inverter(p.resonator + 1, port_node, j);
        netlist.port(port_node, spec.z0);
        port_inverters.push(InverterRecord {
            nodes: (p.resonator + 1, port_node),
            j_siemens: j,
            l_equiv_henries: 1.0 / (omega0 * j),
        });
    }
    netlist.validate()?;
    Ok(SynthesizedCircuit {
        netlist,
        b_slope: b,
        tank_c_farads: tank_c,
        tank_l_henries: tank_l,
        edge_inverters,
        port_inverters,
        z0: spec.z0,
        f0_hz: spec.f0_hz,
    })
}

/// Same circuit with every ideal inverter replaced by its inductive-pi
/// equivalent: a series inductor L = 1/(omega0 J) whose -L shunt arms are
/// absorbed into the adjacent tank inductors. Port nodes have no tank, so
/// their -L arm stays in the netlist as a negative shunt inductor. Exact
/// at f0, narrowband-accurate around it.
pub fn build_divider_netlist_pi(
    plan: &CouplingPlan,
    spec: &DividerSpec,
) -> Result<SynthesizedCircuit> {
    let ideal = build_divider_netlist(plan, spec)?;
    let r = plan.graph.n_resonators;

    // Accumulated 1/L of the -L arms each tank absorbs.
    let mut absorb = vec![0.0f64; r];
    for inv in &ideal.edge_inverters {
        absorb[inv.nodes.0 - 1] += 1.0 / inv.l_equiv_henries;
        absorb[inv.nodes.1 - 1] += 1.0 / inv.l_equiv_henries;
    }
    for inv in &ideal.port_inverters {
        absorb[inv.nodes.0 - 1] += 1.0 / inv.l_equiv_henries;
    }

    let mut netlist = Netlist::new();
    for i in 0..r {
        let inv_l = 1.0 / ideal.tank_l_henries - absorb[i];
        if inv_l <= 0.0 {
            return Err(Error::domain(format!(
                "tank {i} cannot absorb its -L arms; inductive-pi realization \
                 is invalid for these couplings"
            )));
        }
        netlist.capacitor(i + 1, 0, ideal.tank_c_farads);
        netlist.inductor(i + 1, 0, 1.0 / inv_l);
    }
    for inv in &ideal.edge_inverters {
        netlist.inductor(inv.nodes.0, inv.nodes.1, inv.l_equiv_henries);
    }
    for (inv, &(port_node, z0)) in ideal.port_inverters.iter().zip(ideal.netlist.ports().iter()) {
        netlist.inductor(inv.nodes.0, port_node, inv.l_equiv_henries);
        netlist.inductor(port_node, 0, -inv.l_equiv_henries);
        netlist.port(port_node, z0);
    }
    netlist.validate()?;
    Ok(SynthesizedCircuit { netlist, ..ideal })
}

/// Two identical tanks from a synthesized circuit, coupled by an inverter
/// J = m b and probed through weak port inverters (J01/100) so the
/// loading shifts the natural peaks by well under 0.01%.
pub fn coupled_tank_pair(circ: &SynthesizedCircuit, m: f64) -> Result<Netlist> {
    if !(m > 0.0) {
        return Err(Error::domain("coupling coefficient must be positive"));
    }
    let j_weak = circ.port_inverters[0].j_siemens / 100.0;
    let mut netlist = Netlist::new();
    for node in [1, 2] {
        netlist.capacitor(node, 0, circ.tank_c_farads);
        netlist.inductor(node, 0, circ.tank_l_henries);
    }
    netlist.inverter(1, 2, m * circ.b_slope);
    netlist.inverter(1, 3, j_weak);
    netlist.inverter(2, 4, j_weak);
    netlist.port(3, circ.z0);
    netlist.port(4, circ.z0);
    Ok(netlist)
}

/// One tank loaded only by its input port inverter; the one-port whose
/// reflection group delay encodes Qe.
pub fn singly_loaded_tank(circ: &SynthesizedCircuit) -> Netlist {
    let mut netlist = Netlist::new();
    netlist.capacitor(1, 0, circ.tank_c_farads);
    netlist.inductor(1, 0, circ.tank_l_henries);
    netlist.inverter(1, 2, circ.port_inverters[0].j_siemens);
    netlist.port(2, circ.z0);
    netlist
}

/// Extracts the coupling coefficient of a weakly probed two-tank netlist
/// from its two natural resonance peaks: k = (fh^2 - fl^2)/(fh^2 + fl^2).
///
/// Scans |S21| on a fixed grid around f0, takes the two strongest local
/// maxima and sharpens each by golden-section search (the peaks are only
/// tens of kHz wide at practical couplings, far narrower than any
/// reasonable grid). Suited to narrowband couplings k <~ 0.1.
pub fn extract_k(netlist: &Netlist, f0_hz: f64) -> Result<f64> {
    if netlist.ports().len() != 2 {
        return Err(Error::domain("coupling extraction needs a two-port netlist"));
    }
    let s21 = |f: f64| -> Result<f64> { Ok(netlist.sparams_at(f)?[(1, 0)].norm()) };

    let n = 8001;
    let (lo, hi) = (0.85 * f0_hz, 1.15 * f0_hz);
    let step = (hi - lo) / (n - 1) as f64;
    let freqs: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    let mags = freqs.iter().map(|&f| s21(f)).collect::<Result<Vec<_>>>()?;

    let mut peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| mags[i] >= mags[i - 1] && mags[i] > mags[i + 1])
        .collect();
    peaks.sort_by(|&a, &b| mags[b].partial_cmp(&mags[a]).unwrap());
    if peaks.len() < 2 {
        return Err(Error::domain(
            "degenerate response: fewer than two resonance peaks (coupling \
             absent or unresolvable)",
        ));
    }
    peaks.truncate(2);

    let mut refined = Vec::new();
    for &i in &peaks {
        let (mut a, mut c) = (freqs[i - 1], freqs[i + 1]);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = c - gr * (c - a);
        let mut x2 = a + gr * (c - a);
        let (mut f1, mut f2) = (s21(x1)?, s21(x2)?);
        for _ in 0..200 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (c - a);
                f2 = s21(x2)?;
            } else {
                c = x2;
                x2 = x1;
                f2 = f1;
                x1 = c - gr * (c - a);
                f1 = s21(x1)?;
            }
            if (c - a) / f0_hz < 1e-12 {
                break;
            }
        }
        refined.push(0.5 * (a + c));
    }
    let (fl, fh) = (refined[0].min(refined[1]), refined[0].max(refined[1]));
    if (fh - fl) / f0_hz < 1e-9 {
        return Err(Error::domain(
            "degenerate response: resonance peaks coincide",
        ));
    }
    Ok((fh * fh - fl * fl) / (fh * fh + fl * fl))
}

/// Extracts the external quality factor of a singly loaded tank from the
/// reflection group delay at resonance: Qe = omega0 tau(f0) / 4. The
/// delay comes from a central difference of the S11 phase with
/// delta_f = 1e-6 f0; taking the argument of the S11 ratio keeps the
/// difference free of phase-wrapping.
pub fn extract_qe(netlist: &Netlist, f0_hz: f64) -> Result<f64> {
    if netlist.ports().is_empty() {
        return Err(Error::domain("Qe extraction needs a ported netlist"));
    }
    let df = f0_hz * 1e-6;
    let s_lo = netlist.sparams_at(f0_hz - df)?[(0, 0)];
    let s_hi = netlist.sparams_at(f0_hz + df)?[(0, 0)];
    let dphi = (s_hi / s_lo).arg();
    let tau = -dphi / (2.0 * std::f64::consts::PI * 2.0 * df);
    Ok(2.0 * std::f64::consts::PI * f0_hz * tau / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::{frequency_grid, NormalizedCouplingMatrix};
    use crate::prototype::{compute_g_values, PrototypeSpec};
    use crate::synthesis::build_coupling_plan;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn reference() -> (DividerSpec, CouplingPlan) {
        let spec = DividerSpec::reference();
        let g = compute_g_values(&PrototypeSpec::new(3, 0.04321).unwrap()).unwrap();
        (spec, build_coupling_plan(&spec, &g).unwrap())
    }

    #[test]
    fn synthesized_constants_match_published_circuit() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist(&plan, &spec).unwrap();
        let k = CircuitConstants::reference();

        assert_relative_eq!(circ.b_slope, 0.5677222, max_relative = 1e-6);
        assert_relative_eq!(circ.tank_c_farads, 3.475223e-11, max_relative = 1e-6);
        assert_relative_eq!(circ.tank_l_henries, 1.078229e-10, max_relative = 1e-6);

        for p in &circ.port_inverters {
            assert_relative_eq!(p.l_equiv_henries, k.l01, max_relative = 1e-3);
        }
        // Edges touching the common resonator (node 1) are trunk edges.
        for e in &circ.edge_inverters {
            let expect = if e.nodes.0 == 1 { k.le } else { k.l12 };
            assert_relative_eq!(e.l_equiv_henries, expect, max_relative = 2e-3);
        }
        // omega0^2 L C = 1.
        let w0 = spec.omega0();
        assert_abs_diff_eq!(
            w0 * w0 * circ.tank_l_henries * circ.tank_c_farads,
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn netlist_shape() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist(&plan, &spec).unwrap();
        // 7 tanks (C+L), 6 edge inverters, 4 port inverters, 4 ports.
        assert_eq!(circ.netlist.elements().len(), 7 * 2 + 6 + 4 + 4);
        assert_eq!(circ.netlist.ports().len(), 4);
        assert_eq!(circ.netlist.n_nodes(), 1 + 7 + 4);
    }

    #[test]
    fn oracle_matches_coupling_matrix_engine() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist(&plan, &spec).unwrap();
        let ncm = NormalizedCouplingMatrix::from_plan(&plan, &spec).unwrap();
        let grid = frequency_grid(2.4e9, 2.8e9, 41).unwrap();
        let sa = circ.netlist.ac_sparams(&grid).unwrap();
        let sb = ncm.sweep(&grid).unwrap();
        let mut worst = 0.0f64;
        for (ma, mb) in sa.s.iter().zip(&sb.s) {
            for (a, b) in ma.iter().zip(mb.iter()) {
                worst = worst.max((a - b).norm());
            }
        }
        assert!(worst <= 1e-6, "max |dS| = {worst:e}");
    }

    #[test]
    fn resistor_free_netlists_are_unitary_and_reciprocal() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist(&plan, &spec).unwrap();
        let sweep = circ
            .netlist
            .ac_sparams(&frequency_grid(2.5e9, 2.7e9, 21).unwrap())
            .unwrap();
        assert!(sweep.max_unitarity_defect() <= 1e-8);
        assert!(sweep.max_reciprocity_defect() <= 1e-9);
    }

    #[test]
    fn pi_variant_is_close_in_band() {
        let (spec, plan) = reference();
        let ideal = build_divider_netlist(&plan, &spec).unwrap();
        let pi = build_divider_netlist_pi(&plan, &spec).unwrap();
        let grid = frequency_grid(2.561e9, 2.64e9, 81).unwrap();
        let si = ideal.netlist.ac_sparams(&grid).unwrap();
        let sp = pi.netlist.ac_sparams(&grid).unwrap();
        for i in 0..grid.len() {
            let di = -si.s_db(i, 1, 0);
            let dp = -sp.s_db(i, 1, 0);
            assert!((di - dp).abs() < 0.3, "IL deviation {} at {}", di - dp, grid[i]);
        }
    }

    #[test]
    fn pi_variant_keeps_tanks_realizable() {
        let (spec, plan) = reference();
        let pi = build_divider_netlist_pi(&plan, &spec).unwrap();
        let mut shunt_l = Vec::new();
        for e in pi.netlist.elements() {
            if let Element::Inductor { n1, n2, henries } = *e {
                if n2 == 0 && n1 <= 7 {
                    shunt_l.push(henries);
                }
            }
        }
        assert_eq!(shunt_l.len(), 7);
        assert!(shunt_l.iter().all(|&l| l > 0.0));
        // Port arms are the retained negative inductors.
        let negatives = pi
            .netlist
            .elements()
            .iter()
            .filter(|e| matches!(e, Element::Inductor { henries, .. } if *henries < 0.0))
            .count();
        assert_eq!(negatives, 4);
    }

    #[test]
    fn lossless_one_port_tank() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist(&plan, &spec).unwrap();
        let tank = singly_loaded_tank(&circ);
        for f in frequency_grid(2.3e9, 2.9e9, 13).unwrap() {
            let s = tank.sparams_at(f).unwrap();
            assert_abs_diff_eq!(s[(0, 0)].norm(), 1.0, epsilon = 1e-9);
        }
        // At resonance the inverter transforms the open tank into a short:
        // S11 phase is 180 degrees.
        let s0 = tank.sparams_at(spec.f0_hz).unwrap()[(0, 0)];
        assert_abs_diff_eq!(s0.arg().abs(), std::f64::consts::PI, epsilon = 1e-6);
    }

    #[test]
    fn extraction_recovers_plan_values() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist(&plan, &spec).unwrap();

        let k23 = extract_k(&coupled_tank_pair(&circ, plan.m_chain[1]).unwrap(), spec.f0_hz)
            .unwrap();
        assert_relative_eq!(k23, plan.m_chain[1], max_relative = 0.02);

        let k1 = extract_k(&coupled_tank_pair(&circ, plan.m_trunk).unwrap(), spec.f0_hz).unwrap();
        assert_relative_eq!(k1, plan.m_trunk, max_relative = 0.02);

        let qe = extract_qe(&singly_loaded_tank(&circ), spec.f0_hz).unwrap();
        assert_relative_eq!(qe, plan.qe_in, max_relative = 0.02);
    }

    #[test]
    fn extraction_is_symmetric_in_tank_order() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist(&plan, &spec).unwrap();
        let pair = coupled_tank_pair(&circ, plan.m_chain[1]).unwrap();
        // Same circuit with tank/port labels 1<->2, 3<->4 exchanged.
        let mut swapped = Netlist::new();
        for node in [2, 1] {
            swapped.capacitor(node, 0, circ.tank_c_farads);
            swapped.inductor(node, 0, circ.tank_l_henries);
        }
        swapped.inverter(2, 1, plan.m_chain[1] * circ.b_slope);
        swapped.inverter(2, 4, circ.port_inverters[0].j_siemens / 100.0);
        swapped.inverter(1, 3, circ.port_inverters[0].j_siemens / 100.0);
        swapped.port(4, circ.z0);
        swapped.port(3, circ.z0);
        let a = extract_k(&pair, spec.f0_hz).unwrap();
        let b = extract_k(&swapped, spec.f0_hz).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn doubling_the_port_inverter_quarters_qe() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist(&plan, &spec).unwrap();
        let mut strong = Netlist::new();
        strong.capacitor(1, 0, circ.tank_c_farads);
        strong.inductor(1, 0, circ.tank_l_henries);
        strong.inverter(1, 2, 2.0 * circ.port_inverters[0].j_siemens);
        strong.port(2, circ.z0);
        let qe_base = extract_qe(&singly_loaded_tank(&circ), spec.f0_hz).unwrap();
        let qe_strong = extract_qe(&strong, spec.f0_hz).unwrap();
        assert_relative_eq!(qe_base / qe_strong, 4.0, max_relative = 1e-3);
    }

    #[test]
    fn uncoupled_tanks_are_flagged() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist(&plan, &spec).unwrap();
        // Two tanks, no coupling edge: |S21| = 0 everywhere, no peaks.
        let mut uncoupled = Netlist::new();
        for node in [1, 2] {
            uncoupled.capacitor(node, 0, circ.tank_c_farads);
            uncoupled.inductor(node, 0, circ.tank_l_henries);
        }
        uncoupled.inverter(1, 3, circ.port_inverters[0].j_siemens / 100.0);
        uncoupled.inverter(2, 4, circ.port_inverters[0].j_siemens / 100.0);
        uncoupled.port(3, circ.z0);
        uncoupled.port(4, circ.z0);
        assert!(extract_k(&uncoupled, spec.f0_hz).is_err());
    }

    #[test]
    fn series_resistor_values_by_hand() {
        // Port - z0 series resistor - port: S11 = 1/3, S21 = 2/3 exactly.
        let mut n = Netlist::new();
        n.resistor(1, 2, 50.0);
        n.port(1, 50.0);
        n.port(2, 50.0);
        let s = n.sparams_at(1e9).unwrap();
        assert_abs_diff_eq!(s[(0, 0)].re, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(1, 0)].re, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[(0, 0)].im, 0.0, epsilon = 1e-12);
        // Power balance: reflected 1/9 + through 4/9 + dissipated 4/9 = 1.
        let total = s[(0, 0)].norm_sqr() + s[(1, 0)].norm_sqr();
        assert_abs_diff_eq!(total, 5.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let (spec, plan) = reference();
        let circ = build_divider_netlist_pi(&plan, &spec).unwrap();
        let text = circ.netlist.to_text();
        let parsed = Netlist::from_text(&text).unwrap();
        assert_eq!(parsed, circ.netlist);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Netlist::from_text("C 1 0 1e-12\nX 1 2 5\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = Netlist::from_text("L 1 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Netlist::from_text("P 0 50\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
