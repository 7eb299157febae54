use std::path::PathBuf;

use clap::{Parser, Subcommand};

use fpd_cli::commands::{self, ExportRequest, MicrostripRequest};
use fpd_cli::config::{load_config, LossSection, RunConfig};
use fpd_cli::error::Result;

#[derive(Parser)]
#[command(
    name = "fpd",
    version,
    about = "Design toolkit for N-way coupled-resonator filtering power dividers"
)]
struct Cli {
    /// Directory for output artifacts [env: FPD_OUT_DIR] [default: .]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the coupling plan and lumped-element circuit
    Synth {
        #[arg(long)]
        config: PathBuf,
        /// Refine the couplings even if the config does not ask for it
        #[arg(long)]
        refine: bool,
        /// Override the number of output ports
        #[arg(long)]
        n_way: Option<usize>,
    },
    /// Sweep the coupling-matrix model and write S-parameter artifacts
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Override the grid start frequency in Hz
        #[arg(long)]
        start_hz: Option<f64>,
        /// Override the grid stop frequency in Hz
        #[arg(long)]
        stop_hz: Option<f64>,
        /// Override the number of grid points
        #[arg(long)]
        points: Option<usize>,
        /// Override the number of output ports
        #[arg(long)]
        n_way: Option<usize>,
        /// Uniform resonator unloaded Q (overrides the config's loss section)
        #[arg(long)]
        unloaded_q: Option<f64>,
    },
    /// Sweep the independent nodal-analysis circuit model
    Mna {
        #[arg(long)]
        config: PathBuf,
        /// Replace ideal inverters with their inductive-pi equivalents
        #[arg(long)]
        pi: bool,
        /// Override the grid start frequency in Hz
        #[arg(long)]
        start_hz: Option<f64>,
        /// Override the grid stop frequency in Hz
        #[arg(long)]
        stop_hz: Option<f64>,
        /// Override the number of grid points
        #[arg(long)]
        points: Option<usize>,
    },
    /// Estimate microstrip width, effective permittivity and footprint
    Microstrip {
        /// Config supplying f0, port impedance and substrate; reference
        /// values are used when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Target characteristic impedance in ohms
        #[arg(long)]
        z0: Option<f64>,
        /// Analyze this strip width in meters instead of synthesizing one
        #[arg(long)]
        width_m: Option<f64>,
    },
    /// Compare the swept response against the stored reference targets
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Exit with code 4 if any theory target fails
        #[arg(long)]
        strict: bool,
    },
    /// Convert an existing Touchstone file to other formats
    Export {
        /// Input .sNp file
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        touchstone: Option<PathBuf>,
    },
}

fn apply_grid_overrides(
    config: &mut RunConfig,
    start_hz: Option<f64>,
    stop_hz: Option<f64>,
    points: Option<usize>,
) {
    if let Some(v) = start_hz {
        config.grid.start_hz = v;
    }
    if let Some(v) = stop_hz {
        config.grid.stop_hz = v;
    }
    if let Some(v) = points {
        config.grid.points = v;
    }
}

fn run(cli: Cli) -> Result<()> {
    let out_dir = cli
        .out_dir
        .or_else(|| std::env::var_os("FPD_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    match cli.command {
        Command::Synth {
            config,
            refine,
            n_way,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(n) = n_way {
                cfg.divider.n_way = n;
            }
            cfg.validate()?;
            commands::run_synth(&cfg, &out_dir, refine)?;
        }
        Command::Sweep {
            config,
            start_hz,
            stop_hz,
            points,
            n_way,
            unloaded_q,
        } => {
            let mut cfg = load_config(&config)?;
            apply_grid_overrides(&mut cfg, start_hz, stop_hz, points);
            if let Some(n) = n_way {
                cfg.divider.n_way = n;
            }
            if let Some(q) = unloaded_q {
                cfg.loss = Some(LossSection { unloaded_q: q });
            }
            cfg.validate()?;
            commands::run_sweep(&cfg, &out_dir)?;
        }
        Command::Mna {
            config,
            pi,
            start_hz,
            stop_hz,
            points,
        } => {
            let mut cfg = load_config(&config)?;
            apply_grid_overrides(&mut cfg, start_hz, stop_hz, points);
            cfg.validate()?;
            commands::run_mna(&cfg, &out_dir, pi)?;
        }
        Command::Microstrip {
            config,
            z0,
            width_m,
        } => {
            let cfg = match config {
                Some(path) => load_config(&path)?,
                None => RunConfig::reference(),
            };
            commands::run_microstrip(&cfg, &out_dir, &MicrostripRequest { z0, width_m })?;
        }
        Command::Report { config, strict } => {
            let cfg = load_config(&config)?;
            commands::run_report(&cfg, strict)?;
        }
        Command::Export {
            input,
            csv,
            svg,
            touchstone,
        } => {
            commands::run_export(
                &input,
                &ExportRequest {
                    csv,
                    svg,
                    touchstone,
                },
            )?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
