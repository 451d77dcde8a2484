//! Experiment harness: single gate runs, parameter sweeps and their files.
//!
//! Detuning enters at this boundary as a linear frequency in MHz and is
//! converted with `delta_rad_per_us = 2 pi delta_mhz`; times are in us.

pub mod config;
pub mod csv;
pub mod sweep;

use std::f64::consts::TAU;

use crate::catalog::{GateName, Scheme};
use crate::error::Result;
use crate::propagator::{evolve, ErrorModel, TrajectoryTrace};

pub use config::ConfigFile;
pub use csv::{emit_csv, emit_trace_csv, write_csv, write_trace_csv};
pub use sweep::{parse_axis, sweep, PointStatus, SweepAxes, SweepPoint, SweepRequest, SweepResult};

/// Default stage duration in us.
pub const DEFAULT_TAU_US: f64 = 0.1;

/// Largest number of points a sweep may request.
pub const MAX_SWEEP_POINTS: usize = 1_000_000;

/// `2 pi delta_mhz`, in rad/us.
pub fn delta_rad_per_us(delta_mhz: f64) -> f64 {
    TAU * delta_mhz
}

/// Parameters of a single gate run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunRequest {
    pub gate: GateName,
    pub scheme: Scheme,
    pub cp: bool,
    pub eps: f64,
    pub delta_mhz: f64,
    pub tau_us: f64,
    pub steps: usize,
    /// Trace sample spacing in RK4 steps.
    pub stride: usize,
}

impl RunRequest {
    pub fn new(gate: GateName) -> Self {
        RunRequest {
            gate,
            scheme: Scheme::AB4,
            cp: true,
            eps: 0.0,
            delta_mhz: 0.0,
            tau_us: DEFAULT_TAU_US,
            steps: crate::pulse::DEFAULT_STAGE_SAMPLES,
            stride: 100,
        }
    }

    pub fn error_model(&self) -> Result<ErrorModel> {
        ErrorModel::new(self.eps, delta_rad_per_us(self.delta_mhz))
    }
}

/// Outcome of [`run_gate`].
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub request: RunRequest,
    pub trace: TrajectoryTrace,
    pub fidelity_sim: f64,
    /// Second-order prediction, when the scheme realises the target exactly.
    pub fidelity_oracle: Option<f64>,
}

/// Simulates one gate on its catalog input, through the compensation stage
/// if requested.
pub fn run_gate(req: &RunRequest) -> Result<RunSummary> {
    let entry = req.gate.entry();
    let cfg = entry
        .sim_config(req.scheme, req.cp, req.tau_us, req.steps)?
        .with_stride(req.stride)?;
    let err = req.error_model()?;
    let trace = evolve(&entry.init.state(), &cfg, &err, &entry.target())?;
    let fidelity_oracle = if req.scheme.is_holonomic() {
        let oracle = entry.oracle(req.scheme, req.cp, req.tau_us, req.steps)?;
        let (c_d, c_b) = entry.amplitudes();
        Some(oracle.fidelity(c_d, c_b, &err, entry.spec.gamma)?.p)
    } else {
        None
    };
    Ok(RunSummary {
        request: *req,
        fidelity_sim: trace.final_fidelity(),
        trace,
        fidelity_oracle,
    })
}
