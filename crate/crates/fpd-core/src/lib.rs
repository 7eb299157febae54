//! Synthesis and simulation toolkit for N-way coupled-resonator filtering
//! power dividers.
//!
//! A filtering power divider merges a bandpass filter and an equal N-way
//! splitter into one resonator network: the input port drives a common
//! resonator which feeds N identical resonator chains, each ending in an
//! output port. The crate covers the full desk workflow:
//!
//! * [`prototype`] computes Chebyshev lowpass g-values;
//! * [`synthesis`] maps them to coupling coefficients, external Qs and the
//!   divider topology, with optional simplex refinement;
//! * [`cmatrix`] sweeps the normalized coupling matrix into full multiport
//!   S-parameters and response metrics;
//! * [`mna`] independently cross-checks those S-parameters by nodal
//!   analysis of a synthesized lumped circuit and provides coupling/Qe
//!   extraction utilities;
//! * [`microstrip`] estimates physical line dimensions;
//! * [`io`] writes Touchstone/CSV/SVG with byte-deterministic output.
//!
//! ```
//! use fpd_core::prototype::compute_g_values;
//! use fpd_core::synthesis::{build_coupling_plan, DividerSpec};
//! use fpd_core::cmatrix::{frequency_grid, NormalizedCouplingMatrix};
//!
//! let spec = DividerSpec::reference();
//! let g = compute_g_values(&spec.prototype()).unwrap();
//! let plan = build_coupling_plan(&spec, &g).unwrap();
//! let ncm = NormalizedCouplingMatrix::from_plan(&plan, &spec).unwrap();
//! let sweep = ncm.sweep(&frequency_grid(2.4e9, 2.8e9, 401).unwrap()).unwrap();
//! let s21_db = sweep.s_db(sweep.nearest_index(2.6e9), 1, 0);
//! assert!((s21_db + 4.771).abs() < 0.01);
//! ```

pub mod cmatrix;
pub mod error;
pub mod io;
pub mod microstrip;
pub mod mna;
pub mod prototype;
pub mod synthesis;
pub mod targets;

pub use cmatrix::{NormalizedCouplingMatrix, ResponseMetrics, SweepResult};
pub use error::{Error, Result};
pub use microstrip::{LineGeometry, Substrate};
pub use mna::{CircuitConstants, Netlist, SynthesizedCircuit};
pub use prototype::{GValues, PrototypeSpec};
pub use synthesis::{CouplingPlan, DividerSpec, ResonatorGraph};
pub use targets::ReferenceTargets;
