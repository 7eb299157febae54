//! Touchstone v1 reader and writer.
//!
//! Files carry the option line `# Hz S RI R <z0>` followed by real and
//! imaginary pairs with 9 significant digits. Two-port files use the
//! standard single-line order S11 S21 S12 S22; one-port and three-or-more
//! port files are row-major, with one matrix row per line and the
//! frequency prefixed to the first row. Output is byte-deterministic:
//! fixed formatting, no timestamps.

use crate::cmatrix::SweepResult;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::path::Path;

/// Renders a sweep in Touchstone form.
pub fn to_string(sweep: &SweepResult) -> String {
    let np = sweep.n_ports();
    let mut out = String::new();
    out.push_str(&format!("# Hz S RI R {}\n", format_z0(sweep.z0)));
    for (i, &f) in sweep.freqs.iter().enumerate() {
        let s = &sweep.s[i];
        if np <= 2 {
            out.push_str(&format!("{f:.8e}"));
            // 2-port order is S11 S21 S12 S22.
            let order: &[(usize, usize)] = if np == 1 {
                &[(0, 0)]
            } else {
                &[(0, 0), (1, 0), (0, 1), (1, 1)]
            };
            for &(r, c) in order {
                push_pair(&mut out, s[(r, c)]);
            }
            out.push('\n');
        } else {
            for r in 0..np {
                if r == 0 {
                    out.push_str(&format!("{f:.8e}"));
                } else {
                    out.push_str("         ");
                }
                for c in 0..np {
                    push_pair(&mut out, s[(r, c)]);
                }
                out.push('\n');
            }
        }
    }
    out
}

fn push_pair(out: &mut String, v: Complex64) {
    out.push_str(&format!(" {:.8e} {:.8e}", v.re, v.im));
}

fn format_z0(z0: f64) -> String {
    if z0.fract() == 0.0 {
        format!("{z0:.0}")
    } else {
        format!("{z0}")
    }
}

/// Writes `to_string` output to a file; the conventional extension is
/// `.sNp` for an N-port sweep.
pub fn write(sweep: &SweepResult, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(sweep))?;
    Ok(())
}

/// Reads a Touchstone file, inferring the port count from the `.sNp`
/// extension.
pub fn read(path: &Path) -> Result<SweepResult> {
    let np = ports_from_extension(path)?;
    let text = std::fs::read_to_string(path)?;
    parse(&text, np)
}

fn ports_from_extension(path: &Path) -> Result<usize> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let inner = ext.strip_prefix('s').and_then(|e| e.strip_suffix('p'));
    match inner.and_then(|n| n.parse::<usize>().ok()) {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(Error::domain(format!(
            "cannot infer port count from extension '{ext}'; expected .sNp"
        ))),
    }
}

/// Parses Touchstone text for a known port count.
pub fn parse(text: &str, n_ports: usize) -> Result<SweepResult> {
    if n_ports == 0 {
        return Err(Error::domain("port count must be >= 1"));
    }
    let mut freq_scale: Option<f64> = None;
    let mut z0 = 50.0;
    // Numeric tokens with their 1-based source lines.
    let mut tokens: Vec<(f64, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('#') {
            if freq_scale.is_some() {
                return Err(Error::Parse {
                    line,
                    message: "duplicate option line".into(),
                });
            }
            let (scale, r) = parse_option_line(rest, line)?;
            freq_scale = Some(scale);
            z0 = r;
            continue;
        }
        if freq_scale.is_none() {
            return Err(Error::Parse {
                line,
                message: "data before option line".into(),
            });
        }
        for tok in content.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid number '{tok}'"),
            })?;
            tokens.push((v, line));
        }
    }

    let scale = freq_scale.ok_or(Error::Parse {
        line: 1,
        message: "missing option line".into(),
    })?;
    let per_point = 1 + 2 * n_ports * n_ports;
    if tokens.is_empty() || tokens.len() % per_point != 0 {
        let line = tokens.last().map_or(1, |t| t.1);
        return Err(Error::Parse {
            line,
            message: format!(
                "expected whole records of {per_point} values for {n_ports} ports, got {} values",
                tokens.len()
            ),
        });
    }

    let mut freqs = Vec::new();
    let mut mats = Vec::new();
    for chunk in tokens.chunks(per_point) {
        freqs.push(chunk[0].0 * scale);
        let vals = &chunk[1..];
        let mut s = DMatrix::from_element(n_ports, n_ports, Complex64::new(0.0, 0.0));
        let order: Vec<(usize, usize)> = if n_ports == 2 {
            vec![(0, 0), (1, 0), (0, 1), (1, 1)]
        } else {
            (0..n_ports)
                .flat_map(|r| (0..n_ports).map(move |c| (r, c)))
                .collect()
        };
        for (k, &(r, c)) in order.iter().enumerate() {
            s[(r, c)] = Complex64::new(vals[2 * k].0, vals[2 * k + 1].0);
        }
        mats.push(s);
    }
    SweepResult::new(freqs, mats, z0)
}

fn parse_option_line(rest: &str, line: usize) -> Result<(f64, f64)> {
    let fields: Vec<String> = rest
        .split_whitespace()
        .map(str::to_ascii_uppercase)
        .collect();
    let mut scale = 1e9; // Touchstone default unit is GHz.
    let mut z0 = 50.0;
    let mut i = 0;
    while i < fields.len() {
        match fields[i].as_str() {
            "HZ" => scale = 1.0,
            "KHZ" => scale = 1e3,
            "MHZ" => scale = 1e6,
            "GHZ" => scale = 1e9,
            "S" => {}
            "RI" => {}
            "MA" | "DB" => {
                return Err(Error::Parse {
                    line,
                    message: format!("unsupported data format '{}'; only RI", fields[i]),
                });
            }
            "R" => {
                i += 1;
                let v = fields.get(i).ok_or(Error::Parse {
                    line,
                    message: "option 'R' needs a resistance value".into(),
                })?;
                z0 = v.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid reference resistance '{v}'"),
                })?;
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown option token '{other}'"),
                });
            }
        }
        i += 1;
    }
    Ok((scale, z0))
}
