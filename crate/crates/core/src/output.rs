//! CSV and JSON writers for the command-line outputs.
//!
//! Every CSV has a header row, UTF-8 text and LF line endings. Angles are
//! written in degrees.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::json;

use crate::attractors::PdScan;
use crate::equilibria::HopfCurvePoint;
use crate::integrator::{IntegratorSettings, SectionSpec};
use crate::model::{Parameters, State};
use crate::sweep::{SweepCell, RNG_NAME};

pub const TIME_SERIES_HEADER: &str = "t,x1,y1,x2,y2";
pub const PD_SCAN_HEADER: &str = "alpha_deg,x1_section,branch_seed";
pub const SWEEP_HEADER: &str = "alpha_deg,delta_deg,labels,multistable";
pub const HOPF_HEADER: &str = "delta_deg,alpha_deg,y0,branch";

// 17 significant digits
fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_time_series<W: Write>(w: &mut W, samples: impl IntoIterator<Item = (f64, State)>) -> io::Result<()> {
    writeln!(w, "{TIME_SERIES_HEADER}")?;
    for (t, s) in samples {
        writeln!(w, "{},{},{},{},{}", sci(t), sci(s.x1), sci(s.y1), sci(s.x2), sci(s.y2))?;
    }
    Ok(())
}

/// One row per recorded return; `branch_seed` is 0 for the seed, 1 for its swap.
/// Flagged points contribute no rows.
pub fn write_pd_scan<W: Write>(w: &mut W, scan: &PdScan) -> io::Result<()> {
    writeln!(w, "{PD_SCAN_HEADER}")?;
    for pt in &scan.points {
        for (b, values) in pt.branches.iter().enumerate() {
            for v in values.iter().flatten() {
                writeln!(w, "{},{v},{b}", pt.alpha_deg)?;
            }
        }
    }
    Ok(())
}

/// `labels` is the cell inventory joined with `;`.
pub fn write_sweep<W: Write>(w: &mut W, cells: &[SweepCell]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for c in cells {
        let labels: Vec<String> = c.inventory.iter().map(ToString::to_string).collect();
        writeln!(w, "{},{},{},{}", c.alpha_deg, c.delta_deg, labels.join(";"), c.multistable)?;
    }
    Ok(())
}

pub fn write_hopf_curve<W: Write>(w: &mut W, points: &[HopfCurvePoint]) -> io::Result<()> {
    writeln!(w, "{HOPF_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            p.delta.to_degrees(),
            p.alpha.to_degrees(),
            p.y0,
            p.branch.name()
        )?;
    }
    Ok(())
}

/// Run description attached to every JSON document.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub alpha_deg: f64,
    pub delta_deg: f64,
    pub a: f64,
    pub eps: f64,
    pub k: f64,
    pub g: f64,
    pub integrator: IntegratorSettings,
    pub seed: u64,
    pub rng: &'static str,
    pub section: SectionSpec,
    pub version: &'static str,
}

impl Metadata {
    pub fn new(p: &Parameters, integrator: &IntegratorSettings, seed: u64) -> Self {
        Self {
            alpha_deg: p.alpha_deg(),
            delta_deg: p.delta_deg(),
            a: p.a,
            eps: p.eps,
            k: p.k,
            g: p.g,
            integrator: *integrator,
            seed,
            rng: RNG_NAME,
            section: SectionSpec::standard(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// `{"metadata": …, "<key>": …}`, pretty-printed, with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(w: &mut W, meta: &Metadata, key: &str, value: &T) -> io::Result<()> {
    let doc = json!({ "metadata": meta, key: value });
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)
}
