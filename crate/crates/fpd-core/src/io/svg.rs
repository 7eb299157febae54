//! Static SVG plot of |S11| and the |S_k1| transmission traces in dB
//! against frequency in GHz. Purely emissive with fixed number formatting,
//! so identical sweeps render byte-identical files.

use crate::cmatrix::SweepResult;
use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 48.0;
const DB_MIN: f64 = -60.0;
const DB_MAX: f64 = 0.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub fn to_string(sweep: &SweepResult, title: &str) -> String {
    let f_lo = sweep.freqs[0] / 1e9;
    let f_hi = sweep.freqs[sweep.len() - 1] / 1e9;
    let x = |f_hz: f64| -> f64 {
        let t = (f_hz / 1e9 - f_lo) / (f_hi - f_lo).max(1e-300);
        MARGIN_L + t * (WIDTH - MARGIN_L - MARGIN_R)
    };
    let y = |db: f64| -> f64 {
        let t = (db.clamp(DB_MIN, DB_MAX) - DB_MIN) / (DB_MAX - DB_MIN);
        HEIGHT - MARGIN_B - t * (HEIGHT - MARGIN_T - MARGIN_B)
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" \
         viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">\n\
         <rect width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );

    // Horizontal grid every 10 dB, vertical grid at frequency ticks.
    for k in 0..=6 {
        let db = DB_MAX - 10.0 * k as f64;
        let yy = y(db);
        let _ = write!(
            svg,
            "<line x1=\"{MARGIN_L:.1}\" y1=\"{yy:.1}\" x2=\"{:.1}\" y2=\"{yy:.1}\" \
             stroke=\"#dddddd\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{db:.0}</text>\n",
            WIDTH - MARGIN_R,
            MARGIN_L - 8.0,
            yy + 4.0
        );
    }
    let n_ticks = 5;
    for k in 0..n_ticks {
        let f = f_lo + (f_hi - f_lo) * k as f64 / (n_ticks - 1) as f64;
        let xx = x(f * 1e9);
        let _ = write!(
            svg,
            "<line x1=\"{xx:.1}\" y1=\"{MARGIN_T:.1}\" x2=\"{xx:.1}\" y2=\"{:.1}\" \
             stroke=\"#dddddd\"/>\n\
             <text x=\"{xx:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{f:.3}</text>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 18.0
        );
    }
    let _ = write!(
        svg,
        "<rect x=\"{MARGIN_L:.1}\" y=\"{MARGIN_T:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"#333333\"/>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">frequency (GHz)</text>\n\
         <text x=\"16\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">magnitude (dB)</text>\n",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 10.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
    );

    // Traces: S11 plus each S_k1.
    let np = sweep.n_ports();
    let traces: Vec<(usize, usize, String)> = (0..np)
        .map(|k| (k, 0, format!("|S{}1|", k + 1)))
        .collect();
    for (t, &(r, c, ref label)) in traces.iter().enumerate() {
        let color = COLORS[t % COLORS.len()];
        let mut points = String::new();
        for i in 0..sweep.len() {
            let _ = write!(
                points,
                "{}{:.2},{:.2}",
                if i == 0 { "" } else { " " },
                x(sweep.freqs[i]),
                y(sweep.s_db(i, r, c))
            );
        }
        let _ = write!(
            svg,
            "<polyline points=\"{points}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"{color}\">{label} dB</text>\n",
            MARGIN_L + 12.0,
            MARGIN_T + 18.0 + 16.0 * t as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write(sweep: &SweepResult, title: &str, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(sweep, title))?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
