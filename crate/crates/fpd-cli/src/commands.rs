//! Implementations behind the CLI subcommands. Each run_* function loads
//! nothing itself; it takes a validated config, writes its artifacts under
//! `out_dir`, prints a short human summary, and returns the paths written.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{OutputSection, RunConfig};
use crate::error::{CliError, Result};
use fpd_core::cmatrix::{
    frequency_grid, metrics, ripple_band_edges, NormalizedCouplingMatrix, ResponseMetrics,
    SweepResult,
};
use fpd_core::io::{csv, svg, touchstone};
use fpd_core::microstrip::{self, Substrate};
use fpd_core::mna::{build_divider_netlist, build_divider_netlist_pi, SynthesizedCircuit};
use fpd_core::prototype::{compute_g_values, return_loss_from_ripple, GValues};
use fpd_core::synthesis::{
    build_coupling_plan, refine_couplings, CouplingPlan, DividerSpec, RefineOptions,
};
use fpd_core::targets::{Provenance, ReferenceTargets};

fn ensure_out_dir(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Config(format!("{}: {e}", out_dir.display())))
}

fn design(config: &RunConfig) -> Result<(DividerSpec, GValues, CouplingPlan)> {
    let spec = config.divider_spec()?;
    let g = compute_g_values(&spec.prototype())?;
    let plan = build_coupling_plan(&spec, &g)?;
    Ok((spec, g, plan))
}

fn matrix_for(config: &RunConfig, plan: &CouplingPlan, spec: &DividerSpec) -> Result<NormalizedCouplingMatrix> {
    let ncm = NormalizedCouplingMatrix::from_plan(plan, spec)?;
    match &config.loss {
        Some(loss) => Ok(ncm.with_uniform_loss(loss.unloaded_q)?),
        None => Ok(ncm),
    }
}

fn grid_for(config: &RunConfig) -> Result<Vec<f64>> {
    Ok(frequency_grid(
        config.grid.start_hz,
        config.grid.stop_hz,
        config.grid.points,
    )?)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct PlanArtifact<'a> {
    divider: &'a DividerSpec,
    g_values: &'a [f64],
    plan: &'a CouplingPlan,
    #[serde(skip_serializing_if = "Option::is_none")]
    refinement: Option<RefinementArtifact>,
}

#[derive(Serialize)]
struct RefinementArtifact {
    worst_rl_before_db: f64,
    worst_rl_after_db: f64,
    evaluations: usize,
    aborted: bool,
}

/// Worst in-band return loss of a candidate plan, the refinement objective.
/// Non-finite on solver failure, which makes the refiner abort cleanly.
fn worst_inband_rl(plan: &CouplingPlan, band: (f64, f64), spec: &DividerSpec) -> f64 {
    let ncm = match NormalizedCouplingMatrix::from_plan(plan, spec) {
        Ok(n) => n,
        Err(_) => return f64::NAN,
    };
    let freqs = match frequency_grid(band.0, band.1, 201) {
        Ok(f) => f,
        Err(_) => return f64::NAN,
    };
    match ncm.sweep(&freqs) {
        Ok(sweep) => (0..sweep.len())
            .map(|i| -sweep.s_db(i, 0, 0))
            .fold(f64::INFINITY, f64::min),
        Err(_) => f64::NAN,
    }
}

pub fn run_synth(config: &RunConfig, out_dir: &Path, force_refine: bool) -> Result<Vec<PathBuf>> {
    ensure_out_dir(out_dir)?;
    let (spec, g, mut plan) = design(config)?;

    println!(
        "{}-way divider synthesis, f0 = {:.4} GHz, FBW = {:.4}, order {}",
        spec.n_way,
        spec.f0_hz / 1e9,
        spec.fbw,
        spec.order
    );
    let gs: Vec<String> = g.as_slice().iter().map(|v| format!("{v:.6}")).collect();
    println!("  g-values      {}", gs.join(" "));
    let ms: Vec<String> = plan.m_chain.iter().map(|v| format!("{v:.6}")).collect();
    println!("  M chain       {}", ms.join(" "));
    println!("  M trunk       {:.6}", plan.m_trunk);
    println!("  Qe in / out   {:.5} / {:.5}", plan.qe_in, plan.qe_out);
    println!(
        "  resonators    {} (1 common + {} branches x {})",
        plan.graph.n_resonators,
        spec.n_way,
        spec.order - 1
    );

    let mut refinement = None;
    let wants_refine =
        force_refine || config.refine.map(|r| r.enabled).unwrap_or(false);
    if wants_refine {
        let opts = RefineOptions {
            max_iters: config.refine.map(|r| r.max_iters).unwrap_or(200),
            ..RefineOptions::default()
        };
        let target = match config.refine.and_then(|r| r.target_rl_db) {
            Some(t) => t,
            None => return_loss_from_ripple(spec.ripple_db)?,
        };
        let band = ripple_band_edges(spec.f0_hz, spec.fbw);
        let outcome = refine_couplings(
            &plan,
            target,
            band,
            |p, b| worst_inband_rl(p, b, &spec),
            &opts,
        );
        if outcome.aborted {
            println!("  refinement    aborted (objective went non-finite), plan unchanged");
        } else {
            println!(
                "  refinement    worst in-band RL {:.4} -> {:.4} dB, {} evaluations",
                outcome.worst_rl_before_db, outcome.worst_rl_after_db, outcome.evaluations
            );
        }
        refinement = Some(RefinementArtifact {
            worst_rl_before_db: outcome.worst_rl_before_db,
            worst_rl_after_db: outcome.worst_rl_after_db,
            evaluations: outcome.evaluations,
            aborted: outcome.aborted,
        });
        plan = outcome.plan;
    }

    let circ = build_divider_netlist(&plan, &spec)?;
    println!(
        "  tank C / L    {:.5} pF / {:.5} nH",
        circ.tank_c_farads * 1e12,
        circ.tank_l_henries * 1e9
    );
    for inv in &circ.port_inverters {
        println!(
            "  port inverter J = {:.6} S  (L = {:.5} nH) at nodes {:?}",
            inv.j_siemens,
            inv.l_equiv_henries * 1e9,
            inv.nodes
        );
    }
    for inv in &circ.edge_inverters {
        println!(
            "  edge inverter J = {:.6} S  (L = {:.5} nH) at nodes {:?}",
            inv.j_siemens,
            inv.l_equiv_henries * 1e9,
            inv.nodes
        );
    }

    let mut written = Vec::new();
    let stem = &config.outputs.stem;
    if config.outputs.plan {
        let path = out_dir.join(format!("{stem}.plan.json"));
        write_json(
            &PlanArtifact {
                divider: &spec,
                g_values: g.as_slice(),
                plan: &plan,
                refinement,
            },
            &path,
        )?;
        written.push(path);
    }
    if config.outputs.netlist {
        let path = out_dir.join(format!("{stem}.cir"));
        std::fs::write(&path, circ.netlist.to_text())?;
        written.push(path);
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(written)
}

#[derive(Serialize)]
struct MetricsArtifact {
    metrics: ResponseMetrics,
    max_unitarity_defect: f64,
    max_reciprocity_defect: f64,
}

fn write_sweep_artifacts(
    sweep: &SweepResult,
    outputs: &OutputSection,
    spec: &DividerSpec,
    out_dir: &Path,
    base: &str,
    title: &str,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if outputs.touchstone {
        let path = out_dir.join(format!("{base}.s{}p", sweep.n_ports()));
        touchstone::write(sweep, &path)?;
        written.push(path);
    }
    if outputs.csv {
        let path = out_dir.join(format!("{base}.csv"));
        csv::write(sweep, &path)?;
        written.push(path);
    }
    if outputs.svg {
        let path = out_dir.join(format!("{base}.svg"));
        svg::write(sweep, title, &path)?;
        written.push(path);
    }
    if outputs.metrics {
        let m = metrics(sweep, spec.f0_hz, spec.fbw)?;
        let path = out_dir.join(format!("{base}.metrics.json"));
        write_json(
            &MetricsArtifact {
                metrics: m,
                max_unitarity_defect: sweep.max_unitarity_defect(),
                max_reciprocity_defect: sweep.max_reciprocity_defect(),
            },
            &path,
        )?;
        written.push(path);
    }
    Ok(written)
}

fn print_sweep_summary(sweep: &SweepResult, spec: &DividerSpec) -> Result<()> {
    println!(
        "swept {} points, {:.4}-{:.4} GHz, {} ports",
        sweep.len(),
        sweep.freqs[0] / 1e9,
        sweep.freqs[sweep.len() - 1] / 1e9,
        sweep.n_ports()
    );
    let m = metrics(sweep, spec.f0_hz, spec.fbw)?;
    println!("  worst in-band RL   {:.4} dB", m.worst_in_band_rl_db);
    println!("  IL at f0           {:.4} dB", m.il_at_f0_db[0]);
    println!("  measured FBW       {:.5}", m.measured_fbw);
    println!("  reflection zeros   {}", m.reflection_zeros_hz.len());
    if let Some(iso) = m.worst_output_coupling_db {
        println!("  worst output-output coupling {iso:.2} dB");
    }
    Ok(())
}

pub fn run_sweep(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_out_dir(out_dir)?;
    let (spec, _, plan) = design(config)?;
    let ncm = matrix_for(config, &plan, &spec)?;
    let sweep = ncm.sweep(&grid_for(config)?)?;

    print_sweep_summary(&sweep, &spec)?;
    let title = format!(
        "{}-way divider, f0 {:.3} GHz, coupling-matrix model",
        spec.n_way,
        spec.f0_hz / 1e9
    );
    let written = write_sweep_artifacts(
        &sweep,
        &config.outputs,
        &spec,
        out_dir,
        &config.outputs.stem,
        &title,
    )?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(written)
}

fn mna_circuit(config: &RunConfig, pi: bool) -> Result<(DividerSpec, SynthesizedCircuit)> {
    let (spec, _, plan) = design(config)?;
    let circ = if pi {
        build_divider_netlist_pi(&plan, &spec)?
    } else {
        build_divider_netlist(&plan, &spec)?
    };
    Ok((spec, circ))
}

pub fn run_mna(config: &RunConfig, out_dir: &Path, pi: bool) -> Result<Vec<PathBuf>> {
    ensure_out_dir(out_dir)?;
    let (spec, circ) = mna_circuit(config, pi)?;
    let sweep = circ.netlist.ac_sparams(&grid_for(config)?)?;

    let variant = if pi { "inductive-pi inverters" } else { "ideal inverters" };
    println!("nodal-analysis model, {variant}");
    print_sweep_summary(&sweep, &spec)?;

    let base = if pi {
        format!("{}-mna-pi", config.outputs.stem)
    } else {
        format!("{}-mna", config.outputs.stem)
    };
    let title = format!(
        "{}-way divider, f0 {:.3} GHz, nodal analysis ({variant})",
        spec.n_way,
        spec.f0_hz / 1e9
    );
    let mut written =
        write_sweep_artifacts(&sweep, &config.outputs, &spec, out_dir, &base, &title)?;
    if config.outputs.netlist {
        let path = out_dir.join(format!("{base}.cir"));
        std::fs::write(&path, circ.netlist.to_text())?;
        written.push(path);
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(written)
}

pub struct MicrostripRequest {
    /// Target characteristic impedance; defaults to the divider's port
    /// impedance.
    pub z0: Option<f64>,
    /// Analyze this width in meters instead of synthesizing one.
    pub width_m: Option<f64>,
}

#[derive(Serialize)]
struct LineArtifact {
    substrate: Substrate,
    f0_hz: f64,
    width_m: f64,
    eps_eff: f64,
    z0_ohm: f64,
    lambda_g_m: f64,
    footprint_m: (f64, f64),
}

pub fn run_microstrip(
    config: &RunConfig,
    out_dir: &Path,
    request: &MicrostripRequest,
) -> Result<Vec<PathBuf>> {
    ensure_out_dir(out_dir)?;
    let substrate = match &config.substrate {
        Some(s) => Substrate::new(s.eps_r, s.h_m, s.tan_delta)?,
        None => Substrate::reference(),
    };
    let f0 = config.divider.f0_hz;

    let width = match request.width_m {
        Some(w) => w,
        None => {
            let target = request.z0.unwrap_or(config.divider.z0);
            microstrip::synthesize_width(target, &substrate)?
        }
    };
    let line = microstrip::analyze(width, &substrate)?;
    let u = width / substrate.h;
    let regime = if u < 0.95 {
        "narrow-strip formula"
    } else if u <= 1.05 {
        "blended at the w/h = 1 seam"
    } else {
        "wide-strip formula"
    };
    let lambda_g = line.lambda_g(f0);
    let (rx, ry) = microstrip::REF_FOOTPRINT_RATIOS;
    let (fx, fy) = microstrip::footprint(lambda_g, rx, ry);

    println!(
        "microstrip on eps_r = {:.2}, h = {:.3} mm, tan_delta = {:.4}",
        substrate.eps_r,
        substrate.h * 1e3,
        substrate.tan_delta
    );
    println!("  width      {:.4} mm  (w/h = {:.4}, {regime})", width * 1e3, u);
    println!("  eps_eff    {:.4}", line.eps_eff);
    println!("  z0         {:.3} ohm", line.z0);
    println!("  lambda_g   {:.3} mm at {:.3} GHz", lambda_g * 1e3, f0 / 1e9);
    println!(
        "  footprint  {rx} x {ry} lambda_g = {:.2} x {:.2} mm ({:.4} lambda_g^2)",
        fx * 1e3,
        fy * 1e3,
        rx * ry
    );

    let mut written = Vec::new();
    if config.outputs.metrics {
        let path = out_dir.join(format!("{}.line.json", config.outputs.stem));
        write_json(
            &LineArtifact {
                substrate,
                f0_hz: f0,
                width_m: width,
                eps_eff: line.eps_eff,
                z0_ohm: line.z0,
                lambda_g_m: lambda_g,
                footprint_m: (fx, fy),
            },
            &path,
        )?;
        written.push(path);
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(written)
}

struct ReportRow {
    name: &'static str,
    expected: String,
    computed: String,
    provenance: Provenance,
    /// None for reference-only rows, which carry no pass/fail meaning.
    pass: Option<bool>,
}

pub fn run_report(config: &RunConfig, strict: bool) -> Result<()> {
    let (spec, _, plan) = design(config)?;
    // Theory rows always grade the lossless model; a loss section only adds
    // an informational excess-IL row.
    let ncm = NormalizedCouplingMatrix::from_plan(&plan, &spec)?;
    let sweep = ncm.sweep(&grid_for(config)?)?;
    let m = metrics(&sweep, spec.f0_hz, spec.fbw)?;
    let targets = ReferenceTargets::reference();

    let rl_target = return_loss_from_ripple(spec.ripple_db)?;
    let il_floor = 10.0 * (spec.n_way as f64).log10();
    let idx0 = sweep.nearest_index(spec.f0_hz);
    let il = -sweep.s_db(idx0, 1, 0);

    let mut rows = vec![
        ReportRow {
            name: "worst in-band return loss",
            expected: format!(">= {:.1} dB", rl_target),
            computed: format!("{:.2} dB", m.worst_in_band_rl_db),
            provenance: Provenance::Theory,
            pass: Some(m.worst_in_band_rl_db >= rl_target - 0.1),
        },
        ReportRow {
            name: "insertion loss at f0",
            expected: format!("{:.3} dB +/- 0.01", il_floor),
            computed: format!("{:.3} dB", il),
            provenance: Provenance::Theory,
            pass: Some((il - il_floor).abs() <= 0.01),
        },
        ReportRow {
            name: "ripple fractional bandwidth",
            expected: format!("{:.4} +/- 5%", spec.fbw),
            computed: format!("{:.5}", m.measured_fbw),
            provenance: Provenance::Theory,
            pass: Some((m.measured_fbw - spec.fbw).abs() <= 0.05 * spec.fbw),
        },
        ReportRow {
            name: "reflection zeros",
            expected: format!("{}", spec.order),
            computed: format!("{}", m.reflection_zeros_hz.len()),
            provenance: Provenance::Theory,
            pass: Some(m.reflection_zeros_hz.len() == spec.order),
        },
    ];

    if let Some(loss) = &config.loss {
        let lossy = ncm.with_uniform_loss(loss.unloaded_q)?;
        let s0 = lossy.evaluate_at(spec.f0_hz)?;
        let il_lossy = -20.0 * s0[(1, 0)].norm().max(1e-20).log10();
        rows.push(ReportRow {
            name: "excess insertion loss at f0",
            expected: format!("{:.2} dB measured", targets.measured_excess_il_db),
            computed: format!("{:.3} dB at Qu = {}", il_lossy - il_floor, loss.unloaded_q),
            provenance: Provenance::MeasuredReferenceOnly,
            pass: None,
        });
    }
    rows.push(ReportRow {
        name: "fabricated return loss",
        expected: format!("{:.1} dB", targets.measured_rl_db),
        computed: "-".into(),
        provenance: Provenance::MeasuredReferenceOnly,
        pass: None,
    });
    rows.push(ReportRow {
        name: "fabricated excess insertion loss",
        expected: format!("{:.2} dB", targets.measured_excess_il_db),
        computed: "-".into(),
        provenance: Provenance::MeasuredReferenceOnly,
        pass: None,
    });
    rows.push(ReportRow {
        name: "fabricated footprint",
        expected: format!("{:.4} lambda_g^2", targets.footprint_lambda_g_sq),
        computed: "-".into(),
        provenance: Provenance::MeasuredReferenceOnly,
        pass: None,
    });

    println!(
        "target comparison, f0 = {:.4} GHz, FBW = {:.4}, {} points {:.4}-{:.4} GHz",
        spec.f0_hz / 1e9,
        spec.fbw,
        config.grid.points,
        config.grid.start_hz / 1e9,
        config.grid.stop_hz / 1e9
    );
    println!(
        "  in-band region is the ripple band: {:.4}-{:.4} GHz",
        m.band_edges_hz.0 / 1e9,
        m.band_edges_hz.1 / 1e9
    );
    println!(
        "  {:<34} {:<18} {:<22} {:<28} {}",
        "target", "expected", "computed", "provenance", "status"
    );
    let mut failed = Vec::new();
    for row in &rows {
        let status = match row.pass {
            Some(true) => "pass",
            Some(false) => {
                failed.push(row.name);
                "FAIL"
            }
            None => "info",
        };
        println!(
            "  {:<34} {:<18} {:<22} {:<28} {}",
            row.name,
            row.expected,
            row.computed,
            row.provenance.to_string(),
            status
        );
    }

    if !failed.is_empty() {
        let theory_total = rows.iter().filter(|r| r.pass.is_some()).count();
        println!("{} of {} theory targets missed", failed.len(), theory_total);
        if strict {
            return Err(CliError::Targets(format!(
                "theory targets missed: {}",
                failed.join(", ")
            )));
        }
    }
    Ok(())
}

pub struct ExportRequest {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub touchstone: Option<PathBuf>,
}

pub fn run_export(input: &Path, request: &ExportRequest) -> Result<Vec<PathBuf>> {
    if request.csv.is_none() && request.svg.is_none() && request.touchstone.is_none() {
        return Err(CliError::Config(
            "export needs at least one of --csv, --svg, --touchstone".into(),
        ));
    }
    let sweep = touchstone::read(input)?;
    let mut written = Vec::new();
    if let Some(path) = &request.csv {
        csv::write(&sweep, path)?;
        written.push(path.clone());
    }
    if let Some(path) = &request.svg {
        let title = input
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("sweep")
            .to_string();
        svg::write(&sweep, &title, path)?;
        written.push(path.clone());
    }
    if let Some(path) = &request.touchstone {
        touchstone::write(&sweep, path)?;
        written.push(path.clone());
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(written)
}
