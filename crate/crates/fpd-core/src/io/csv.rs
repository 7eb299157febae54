//! CSV export of sweep magnitudes and phases.
//!
//! Columns: `f_Hz`, then `S<i><j>_dB` and `S<i><j>_deg` in row-major port
//! order (S11, S12, ... S21, ...). Fixed formatting keeps the output
//! byte-deterministic.

use crate::cmatrix::SweepResult;
use crate::error::Result;
use std::path::Path;

pub fn to_string(sweep: &SweepResult) -> String {
    let np = sweep.n_ports();
    let mut out = String::from("f_Hz");
    for r in 0..np {
        for c in 0..np {
            out.push_str(&format!(",S{}{}_dB,S{}{}_deg", r + 1, c + 1, r + 1, c + 1));
        }
    }
    out.push('\n');
    for (i, &f) in sweep.freqs.iter().enumerate() {
        out.push_str(&format!("{f:.8e}"));
        for r in 0..np {
            for c in 0..np {
                let v = sweep.s[i][(r, c)];
                out.push_str(&format!(
                    ",{:.6},{:.6}",
                    sweep.s_db(i, r, c),
                    v.arg().to_degrees()
                ));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write(sweep: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(sweep))?;
    Ok(())
}
