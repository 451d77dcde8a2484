//! Fixed-step RK4 integration of `i d psi/dt = H(t) psi` over one or more
//! drive stages.
//!
//! Waveforms are sampled at twice the step count, so the three time points of
//! every RK4 step are grid nodes and no interpolation enters the integrator.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pulse::{compensation_stage, inverse_engineer, DriveSample, DriveWaveform, PulseFamily, StageKind};
use crate::qutrit::{state_fidelity, QutritOperator, QutritState, I};

/// Norm drift beyond which a run is reported as failed.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Systematic errors: Rabi amplitudes scaled by `1 + epsilon`, detuning
/// offset by `delta` (rad/us).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorModel {
    pub epsilon: f64,
    pub delta: f64,
}

impl ErrorModel {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= -1.0 || !delta.is_finite() {
            return Err(Error::domain(format!(
                "error model needs finite epsilon > -1 and finite delta, got ({epsilon}, {delta})"
            )));
        }
        Ok(ErrorModel { epsilon, delta })
    }

    pub fn ideal() -> Self {
        ErrorModel::default()
    }
}

/// One stage before its waveform is built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StagePlan {
    pub kind: StageKind,
    pub family: PulseFamily,
    pub theta: f64,
    pub phi: f64,
}

impl StagePlan {
    pub fn gate(family: PulseFamily, theta: f64, phi: f64) -> Self {
        StagePlan {
            kind: StageKind::Gate,
            family,
            theta,
            phi,
        }
    }

    /// The dark/bright-swapping identity stage that follows `gate`.
    pub fn compensating(gate: &StagePlan) -> Self {
        let (family, theta, phi) = compensation_stage(&gate.family, gate.theta, gate.phi);
        StagePlan {
            kind: StageKind::Compensation,
            family,
            theta,
            phi,
        }
    }

    /// Resonant waveform for this stage with `2 * steps` grid intervals.
    pub fn waveform(&self, steps: usize) -> Result<DriveWaveform> {
        let wf = inverse_engineer(&self.family.schedule(), &|_| 0.0, 2 * steps)?;
        Ok(wf.placed(self.kind, self.theta, self.phi))
    }
}

/// Stages to integrate in order, with `steps` RK4 steps per stage and a
/// trace sample every `stride` steps.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub plans: Vec<StagePlan>,
    pub steps: usize,
    pub stride: usize,
    waveforms: Vec<DriveWaveform>,
}

impl SimConfig {
    pub fn new(plans: Vec<StagePlan>, steps: usize, stride: usize) -> Result<Self> {
        if steps < 1000 {
            return Err(Error::config(format!(
                "at least 1000 steps per stage required, got {steps}"
            )));
        }
        if !steps.is_multiple_of(2) {
            return Err(Error::config(format!("steps must be even, got {steps}")));
        }
        if stride == 0 || !steps.is_multiple_of(stride) {
            return Err(Error::config(format!("stride {stride} must divide steps {steps}")));
        }
        let waveforms = plans.iter().map(|p| p.waveform(steps)).collect::<Result<Vec<_>>>()?;
        Ok(SimConfig {
            plans,
            steps,
            stride,
            waveforms,
        })
    }

    /// Gate stage for `family` in the `(theta, phi)` frame, optionally
    /// followed by its compensation stage.
    pub fn for_gate(family: PulseFamily, theta: f64, phi: f64, cp: bool, steps: usize) -> Result<Self> {
        let gate = StagePlan::gate(family, theta, phi);
        let mut plans = vec![gate];
        if cp {
            plans.push(StagePlan::compensating(&gate));
        }
        SimConfig::new(plans, steps, steps)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.steps.is_multiple_of(stride) {
            return Err(Error::config(format!(
                "stride {stride} must divide steps {}",
                self.steps
            )));
        }
        self.stride = stride;
        Ok(self)
    }

    /// The same stages at a different resolution.
    pub fn resampled(&self, steps: usize) -> Result<Self> {
        let stride = if steps.is_multiple_of(self.stride) {
            self.stride
        } else {
            steps
        };
        SimConfig::new(self.plans.clone(), steps, stride)
    }

    /// A configuration holding only the stages in `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        SimConfig {
            plans: self.plans[range.clone()].to_vec(),
            steps: self.steps,
            stride: self.stride,
            waveforms: self.waveforms[range].to_vec(),
        }
    }

    pub fn waveforms(&self) -> &[DriveWaveform] {
        &self.waveforms
    }

    pub fn duration(&self) -> f64 {
        self.waveforms.iter().map(|w| w.tau).sum()
    }
}

/// Populations and fidelity sampled along a run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryTrace {
    pub times: Vec<f64>,
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    pub pe: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub final_state: QutritState,
}

impl TrajectoryTrace {
    fn with_capacity(n: usize, init: QutritState) -> Self {
        TrajectoryTrace {
            times: Vec::with_capacity(n),
            p0: Vec::with_capacity(n),
            p1: Vec::with_capacity(n),
            pe: Vec::with_capacity(n),
            fidelity: Vec::with_capacity(n),
            final_state: init,
        }
    }

    fn record(&mut self, t: f64, psi: &Vector3<C64>, target: &QutritState) {
        let state = QutritState::from_vector(*psi);
        let [p0, p1, pe] = state.populations();
        self.times.push(t);
        self.p0.push(p0);
        self.p1.push(p1);
        self.pe.push(pe);
        self.fidelity.push(state_fidelity(&state, target));
    }

    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity.last().expect("trace always holds the initial sample")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `H(t)` of stage waveform `wf` at local time `t` under `err`.
pub fn assemble_hamiltonian(t: f64, wf: &DriveWaveform, err: &ErrorModel) -> Result<QutritOperator> {
    let s = wf.sample(t)?;
    Ok(QutritOperator::from_matrix(hamiltonian(&s, wf.theta, wf.phi, err)))
}

fn hamiltonian(s: &DriveSample, theta: f64, phi: f64, err: &ErrorModel) -> Matrix3<C64> {
    let (sn, cs) = (0.5 * theta).sin_cos();
    let amp = C64::from_polar((1.0 + err.epsilon) * s.omega, -s.xi);
    let pump = amp * sn;
    let stokes = -amp * cs * C64::from_polar(1.0, phi);
    let zero = C64::new(0.0, 0.0);
    Matrix3::new(
        zero,
        zero,
        pump,
        zero,
        zero,
        stokes,
        pump.conj(),
        stokes.conj(),
        C64::new(s.delta + err.delta, 0.0),
    )
}

/// Visits every RK4 step of every stage with the Hamiltonians at the step's
/// start, midpoint and end, and the absolute time at its end.
fn walk(cfg: &SimConfig, err: &ErrorModel, mut step: impl FnMut(f64, [Matrix3<C64>; 3], f64)) {
    let mut offset = 0.0;
    for wf in &cfg.waveforms {
        for seg in wf.segments() {
            let h = 2.0 * seg.step();
            let n = seg.intervals() / 2;
            let mut lo = hamiltonian(&seg.node(0), wf.theta, wf.phi, err);
            for k in 0..n {
                let mid = hamiltonian(&seg.node(2 * k + 1), wf.theta, wf.phi, err);
                let hi = hamiltonian(&seg.node(2 * k + 2), wf.theta, wf.phi, err);
                let t = offset + seg.time(2 * k + 2);
                step(h, [lo, mid, hi], t);
                lo = hi;
            }
        }
        offset += wf.tau;
    }
}

type Block<const C: usize> = nalgebra::SMatrix<C64, 3, C>;

/// RK4 state with a compensated (Kahan) running sum, which keeps roundoff
/// below the truncation error even at fine resolutions.
struct Stepper<const C: usize> {
    y: Block<C>,
    carry: Block<C>,
}

impl<const C: usize> Stepper<C> {
    fn new(y: Block<C>) -> Self {
        Stepper {
            y,
            carry: Block::<C>::zeros(),
        }
    }

    fn advance(&mut self, h: f64, [h0, hm, h1]: &[Matrix3<C64>; 3]) {
        let f = |m: &Matrix3<C64>, y: &Block<C>| (m * y) * (-I);
        let y = &self.y;
        let k1 = f(h0, y);
        let k2 = f(hm, &(y + k1 * C64::from(0.5 * h)));
        let k3 = f(hm, &(y + k2 * C64::from(0.5 * h)));
        let k4 = f(h1, &(y + k3 * C64::from(h)));
        let incr = (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0) - self.carry;
        let next = self.y + incr;
        self.carry = (next - self.y) - incr;
        self.y = next;
    }
}

fn drift_check(psi: &Vector3<C64>, steps: usize) -> Result<()> {
    let drift = (psi.norm_squared() - 1.0).abs();
    if drift > NORM_TOLERANCE || !drift.is_finite() {
        return Err(Error::Integrator {
            drift,
            suggested_steps: 2 * steps,
        });
    }
    Ok(())
}

/// Integrates `init` through every stage of `cfg`, recording populations and
/// the fidelity against `target` every `stride` steps.
pub fn evolve(init: &QutritState, cfg: &SimConfig, err: &ErrorModel, target: &QutritState) -> Result<TrajectoryTrace> {
    if cfg.waveforms.is_empty() {
        return Err(Error::config("no stages to evolve"));
    }
    let samples = cfg.waveforms.len() * cfg.steps / cfg.stride + 1;
    let mut trace = TrajectoryTrace::with_capacity(samples, *init);
    let mut psi = Stepper::new(*init.as_vector());
    trace.record(0.0, &psi.y, target);
    let mut count = 0usize;
    walk(cfg, err, |h, hs, t| {
        psi.advance(h, &hs);
        count += 1;
        if count.is_multiple_of(cfg.stride) {
            trace.record(t, &psi.y, target);
        }
    });
    drift_check(&psi.y, cfg.steps)?;
    trace.final_state = QutritState::from_vector(psi.y);
    Ok(trace)
}

/// Final state only; no trace is kept.
pub fn final_state(init: &QutritState, cfg: &SimConfig, err: &ErrorModel) -> Result<QutritState> {
    let mut psi = Stepper::new(*init.as_vector());
    walk(cfg, err, |h, hs, _| psi.advance(h, &hs));
    drift_check(&psi.y, cfg.steps)?;
    Ok(QutritState::from_vector(psi.y))
}

/// `(t, psi(t))` every `stride` steps, starting with `(0, init)`.
pub fn sample_states(init: &QutritState, cfg: &SimConfig, err: &ErrorModel) -> Vec<(f64, QutritState)> {
    let mut out = vec![(0.0, *init)];
    let mut psi = Stepper::new(*init.as_vector());
    let mut count = 0usize;
    walk(cfg, err, |h, hs, t| {
        psi.advance(h, &hs);
        count += 1;
        if count.is_multiple_of(cfg.stride) {
            out.push((t, QutritState::from_vector(psi.y)));
        }
    });
    out
}

/// Numerical propagator over all stages of `cfg`.
pub fn propagator_matrix(cfg: &SimConfig, err: &ErrorModel) -> QutritOperator {
    let mut u = Stepper::new(Matrix3::<C64>::identity());
    walk(cfg, err, |h, hs, _| u.advance(h, &hs));
    QutritOperator::from_matrix(u.y)
}

/// Outcome of rerunning a simulation at twice the resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub steps: usize,
    pub fidelity_n: f64,
    pub fidelity_2n: f64,
    pub difference: f64,
    pub passed: bool,
}

/// Largest `|F_N - F_2N|` accepted by [`convergence_probe`].
pub const CONVERGENCE_TOLERANCE: f64 = 1e-9;

/// Compares final fidelities at `cfg.steps` and twice that.
pub fn convergence_probe(
    init: &QutritState,
    cfg: &SimConfig,
    err: &ErrorModel,
    target: &QutritState,
) -> Result<ConvergenceReport> {
    if cfg.plans.is_empty() {
        let f = state_fidelity(init, target);
        return Ok(ConvergenceReport {
            steps: cfg.steps,
            fidelity_n: f,
            fidelity_2n: f,
            difference: 0.0,
            passed: true,
        });
    }
    let f_n = state_fidelity(&final_state(init, cfg, err)?, target);
    let fine = cfg.resampled(2 * cfg.steps)?;
    let f_2n = state_fidelity(&final_state(init, &fine, err)?, target);
    let difference = (f_n - f_2n).abs();
    Ok(ConvergenceReport {
        steps: cfg.steps,
        fidelity_n: f_n,
        fidelity_2n: f_2n,
        difference,
        passed: difference < CONVERGENCE_TOLERANCE,
    })
}
