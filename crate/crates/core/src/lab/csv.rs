//! Sweep and trace files.
//!
//! Sweep files open with `# key=value` lines echoing the configuration and a
//! SHA-256 hash of it, then one row per point. Numbers carry 12 significant
//! digits; missing values are written as `NA`. Output depends only on the
//! request, so equal requests give byte-identical files.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::sweep::SweepResult;
use crate::error::{Error, Result};
use crate::propagator::TrajectoryTrace;

pub const SWEEP_HEADER: &str = "eps,delta_mhz,delta_rad_per_us,fidelity_sim,fidelity_oracle,infidelity_sim,status";
pub const TRACE_HEADER: &str = "t_us,p0,p1,pe,fidelity";

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "NA".to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), num)
}

fn config_echo(res: &SweepResult) -> Vec<(&'static str, String)> {
    let r = &res.request;
    vec![
        ("generator", format!("nhqc {}", env!("CARGO_PKG_VERSION"))),
        ("gate", r.gate.to_string()),
        ("a", r.scheme.a.to_string()),
        ("b", r.scheme.b.to_string()),
        ("cp", r.cp.to_string()),
        ("sweep", r.axes.name().to_string()),
        ("points", r.axes.len().to_string()),
        ("tau_us", r.tau_us.to_string()),
        ("steps", r.steps.to_string()),
        ("delta_convention", "delta_rad_per_us=2*pi*delta_mhz".to_string()),
        (
            "oracle",
            if r.oracle_applies() { "second-order" } else { "na" }.to_string(),
        ),
    ]
}

fn config_hash(res: &SweepResult, echo: &[(&str, String)]) -> String {
    let mut h = Sha256::new();
    for (k, v) in echo {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    for (e, d) in res.request.axes.points() {
        h.update(e.to_bits().to_le_bytes());
        h.update(d.to_bits().to_le_bytes());
    }
    let digest = h.finalize();
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// The sweep file as a string.
pub fn render_csv(res: &SweepResult) -> String {
    let echo = config_echo(res);
    let mut out = String::new();
    for (k, v) in &echo {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "# config_hash={}", config_hash(res, &echo));
    let _ = writeln!(out, "{SWEEP_HEADER}");
    for p in &res.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(p.eps),
            num(p.delta_mhz),
            num(p.delta_rad_per_us),
            opt(p.fidelity_sim),
            opt(p.fidelity_oracle),
            opt(p.fidelity_sim.map(|f| 1.0 - f)),
            p.status
        );
    }
    out
}

pub fn write_csv(res: &SweepResult, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(render_csv(res).as_bytes())
}

pub fn emit_csv(res: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_csv(res)).map_err(|e| Error::io(path, e))
}

pub fn render_trace_csv(trace: &TrajectoryTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TRACE_HEADER}");
    for k in 0..trace.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(trace.times[k]),
            num(trace.p0[k]),
            num(trace.p1[k]),
            num(trace.pe[k]),
            num(trace.fidelity[k])
        );
    }
    out
}

pub fn write_trace_csv(trace: &TrajectoryTrace, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(render_trace_csv(trace).as_bytes())
}

pub fn emit_trace_csv(trace: &TrajectoryTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_trace_csv(trace)).map_err(|e| Error::io(path, e))
}
