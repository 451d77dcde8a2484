//! Second-order error-picture fidelities.
//!
//! The ideal evolution is known in closed form: the dark state is frozen and
//! `|chi+->` pick up the phases `phi+-(t)`. Writing the ideal trajectory of the
//! input as `psi1` and completing it with
//!
//! ```text
//! psi2(t) = ideal image of |e>            (tracks |chi->)
//! psi3(t) = ideal image of c_b*|d> - c_d*|b>, with sign flipped
//! ```
//!
//! the leakage amplitudes `A_m = int <psi1|H'|psi_m> dt` give
//! `1 - P = |A_2|^2 + |A_3|^2` to second order in `H' = delta|e><e| + eps H_c`.
//! A compensation stage continues the same basis through a frame with dark
//! and bright states exchanged.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::propagator::{ErrorModel, StagePlan};
use crate::pulse::{beta_dot_sin_tan, half_tan_integral, AngleSchedule, DriveWaveform, PulseFamily};
use crate::quadrature::{cumulative_simpson, node, simpson, simpson_fn};

/// Accumulated phases `phi+(t)`, `phi-(t)` of `|chi+->` on a waveform grid,
/// one array per smooth segment.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTrack {
    pub segments: Vec<PhaseSegment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSegment {
    pub start: f64,
    pub end: f64,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl PhaseSegment {
    fn intervals(&self) -> usize {
        self.plus.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        node(self.start, self.end, k, self.intervals())
    }
}

impl PhaseTrack {
    /// `(phi+, phi-)` at the end of the stage.
    pub fn end(&self) -> (f64, f64) {
        let s = self.segments.last().expect("phase track has segments");
        (*s.plus.last().unwrap(), *s.minus.last().unwrap())
    }

    /// `(phi+, phi-)` at `t`, linear between nodes; `t` on a segment boundary
    /// takes the earlier segment's value.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let k = self
            .segments
            .iter()
            .position(|s| t <= s.end)
            .unwrap_or(self.segments.len() - 1);
        let s = &self.segments[k];
        let n = s.intervals();
        let x = ((t - s.start) / (s.end - s.start) * n as f64).clamp(0.0, n as f64);
        let lo = (x.floor() as usize).min(n - 1);
        let w = x - lo as f64;
        (
            s.plus[lo] + w * (s.plus[lo + 1] - s.plus[lo]),
            s.minus[lo] + w * (s.minus[lo + 1] - s.minus[lo]),
        )
    }
}

/// Integrates
///
/// ```text
/// d phi+/dt = -beta_dot sin^2(a/2) - Delta sin^2(a/2) - Omega sin(a) cos(beta - xi)
/// d phi-/dt = -beta_dot cos^2(a/2) - Delta cos^2(a/2) + Omega sin(a) cos(beta - xi)
/// ```
///
/// over the waveform grid. A jump `d` of `beta` shifts `phi+` by
/// `-d sin^2(a/2)` and `phi-` by `-d cos^2(a/2)`, which keeps the ideal
/// state continuous.
pub fn accumulated_phases(sched: &AngleSchedule, wf: &DriveWaveform) -> Result<PhaseTrack> {
    let segs = sched.segments();
    let wsegs = wf.segments();
    let mismatch = wsegs.len() != segs.len()
        || (wf.tau - sched.tau()).abs() > 1e-12 * sched.tau()
        || segs
            .iter()
            .zip(wsegs)
            .any(|(s, w)| (s.start - w.start).abs() > 1e-12 || (s.end - w.end).abs() > 1e-12);
    if mismatch {
        return Err(Error::config("waveform grid does not match the angle schedule"));
    }
    let mut out = Vec::with_capacity(segs.len());
    let (mut plus0, mut minus0) = (0.0, 0.0);
    for (k, ws) in wsegs.iter().enumerate() {
        let n = ws.intervals();
        let mut dp = Vec::with_capacity(n + 1);
        let mut dm = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let p = sched.point(k, ws.time(j));
            let d = ws.node(j);
            let s2 = (0.5 * p.alpha).sin().powi(2);
            let c2 = 1.0 - s2;
            let drive = d.omega * p.alpha.sin() * (p.beta - d.xi).cos();
            dp.push(-(p.beta_dot + d.delta) * s2 - drive);
            dm.push(-(p.beta_dot + d.delta) * c2 + drive);
        }
        let h = ws.step();
        let plus: Vec<f64> = cumulative_simpson(&dp, h).into_iter().map(|v| v + plus0).collect();
        let minus: Vec<f64> = cumulative_simpson(&dm, h).into_iter().map(|v| v + minus0).collect();
        plus0 = *plus.last().unwrap();
        minus0 = *minus.last().unwrap();
        if k + 1 < wsegs.len() {
            let jump = sched.beta_jump(k);
            let s2 = (0.5 * sched.point(k, ws.end).alpha).sin().powi(2);
            plus0 -= jump * s2;
            minus0 -= jump * (1.0 - s2);
        }
        out.push(PhaseSegment {
            start: ws.start,
            end: ws.end,
            plus,
            minus,
        });
    }
    Ok(PhaseTrack { segments: out })
}

/// Error integrals of one stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageIntegrals {
    /// `int e^{-i(phi+ - phi-)} sin(a) dt`
    pub o12_delta: C64,
    /// `-int e^{-i(phi+ - phi-)} [beta_dot sin(a) + i alpha_dot] dt`
    pub o12_eps: C64,
    /// `int sin^2(a/2) dt`
    pub o13_delta: f64,
    /// `(1/2) int beta_dot sin(a) tan(a) dt`
    pub o13_eps: f64,
    /// `phi+(tau)`, the phase of the bright state after the loop.
    pub holonomy: f64,
    pub phi_minus_end: f64,
    pub beta_start: f64,
    pub beta_end: f64,
}

/// All second-order quantities of a gate, with or without compensation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorIntegrals {
    pub gate: StageIntegrals,
    /// `int_0^{tau/2} e^{-i a alpha} sin(alpha) dt`
    pub w: C64,
    /// `int_0^{tau/2} sin(alpha) dt`
    pub q: f64,
    /// `(1/2) e^{-i beta(0)} O12^delta`: the gate-stage `<psi1|e><e|psi2>`
    /// integral per unit `delta c_b*`.
    pub i12: C64,
    pub compensation: Option<CompensationIntegrals>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompensationIntegrals {
    pub stage: StageIntegrals,
    /// Phase `phi-(tau) + beta(tau) - beta(0)` carried by `psi2` into the
    /// second stage.
    pub kappa: f64,
    /// `(1/2) e^{i(kappa - beta~(0))} O~12^delta`: the compensation-stage
    /// `<psi1|e><e|psi2>` integral per unit `delta c_d*`.
    pub i12_tilde: C64,
}

impl ErrorIntegrals {
    pub fn o12_delta(&self) -> C64 {
        self.gate.o12_delta
    }

    pub fn o12_eps(&self) -> C64 {
        self.gate.o12_eps
    }

    pub fn o13_delta(&self) -> f64 {
        self.gate.o13_delta
    }

    pub fn o13_eps(&self) -> f64 {
        self.gate.o13_eps
    }
}

/// Stage integrals on the grid of `phases`.
pub fn stage_integrals(sched: &AngleSchedule, phases: &PhaseTrack) -> Result<StageIntegrals> {
    let mut o12_delta = C64::new(0.0, 0.0);
    let mut o12_eps = C64::new(0.0, 0.0);
    let mut o13_delta = 0.0;
    let mut samples = 0;
    for (k, seg) in phases.segments.iter().enumerate() {
        let n = seg.intervals();
        samples += n;
        let mut f12d = Vec::with_capacity(n + 1);
        let mut f12e = Vec::with_capacity(n + 1);
        let mut f13d = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let p = sched.point(k, seg.time(j));
            let rot = C64::from_polar(1.0, -(seg.plus[j] - seg.minus[j]));
            let sa = p.alpha.sin();
            f12d.push(rot * sa);
            f12e.push(-rot * C64::new(p.beta_dot * sa, p.alpha_dot));
            f13d.push((0.5 * p.alpha).sin().powi(2));
        }
        let h = (seg.end - seg.start) / n as f64;
        o12_delta += simpson(&f12d, h);
        o12_eps += simpson(&f12e, h);
        o13_delta += simpson(&f13d, h);
    }
    let o13_eps = half_tan_integral(sched, samples)?;
    let (holonomy, phi_minus_end) = phases.end();
    Ok(StageIntegrals {
        o12_delta,
        o12_eps,
        o13_delta,
        o13_eps,
        holonomy,
        phi_minus_end,
        beta_start: sched.point(0, 0.0).beta,
        beta_end: sched.point(sched.segments().len() - 1, sched.tau()).beta,
    })
}

/// `W` and `Q` of a family with first-half slope `a`.
pub fn suppression_integrals(fam: &PulseFamily, n: usize) -> (C64, f64) {
    let sched = fam.schedule();
    let half = 0.5 * fam.tau;
    let w = simpson_fn(
        |t| {
            let p = sched.point(0, t);
            C64::from_polar(p.alpha.sin(), -fam.a * p.alpha)
        },
        0.0,
        half,
        n,
    );
    let q = simpson_fn(|t| sched.point(0, t).alpha.sin(), 0.0, half, n);
    (w, q)
}

/// Error integrals of the gate stage and, if given, its compensation stage.
pub fn error_integrals(
    gate: (&AngleSchedule, &PhaseTrack),
    compensation: Option<(&AngleSchedule, &PhaseTrack)>,
) -> Result<ErrorIntegrals> {
    let (sched, phases) = gate;
    let g = stage_integrals(sched, phases)?;
    let n: usize = phases.segments.iter().map(PhaseSegment::intervals).sum();
    let (w, q) = suppression_integrals(sched.family(), n.max(2000));
    let i12 = 0.5 * C64::from_polar(1.0, -g.beta_start) * g.o12_delta;
    let compensation = match compensation {
        Some((cs, cp)) => {
            let stage = stage_integrals(cs, cp)?;
            let kappa = g.phi_minus_end + g.beta_end - g.beta_start;
            let i12_tilde = 0.5 * C64::from_polar(1.0, kappa - stage.beta_start) * stage.o12_delta;
            Some(CompensationIntegrals {
                stage,
                kappa,
                i12_tilde,
            })
        }
        None => None,
    };
    Ok(ErrorIntegrals {
        gate: g,
        w,
        q,
        i12,
        compensation,
    })
}

/// Predicted fidelity with its two leakage contributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticFidelity {
    pub p: f64,
    /// `[|A_2|^2, |A_3|^2]`; sums to `1 - p`.
    pub breakdown: [f64; 2],
    /// Closed form for a symmetric `alpha` with detuning error only.
    pub p_symmetric: f64,
}

impl AnalyticFidelity {
    fn from_amplitudes(a2: C64, a3: C64, p_symmetric: f64) -> Self {
        let breakdown = [a2.norm_sqr(), a3.norm_sqr()];
        AnalyticFidelity {
            p: 1.0 - breakdown[0] - breakdown[1],
            breakdown,
            p_symmetric,
        }
    }

    pub fn infidelity(&self) -> f64 {
        self.breakdown[0] + self.breakdown[1]
    }
}

/// Leakage amplitudes after the gate stage alone.
fn gate_amplitudes(c_d: C64, c_b: C64, ints: &ErrorIntegrals, err: &ErrorModel) -> (C64, C64) {
    let g = &ints.gate;
    let (eps, delta) = (err.epsilon, err.delta);
    let a2 = 0.5 * c_b.conj() * C64::from_polar(1.0, -g.beta_start) * (delta * g.o12_delta + eps * g.o12_eps);
    let a3 = c_d.conj() * c_b.conj() * (delta * g.o13_delta - eps * g.o13_eps);
    (a2, a3)
}

/// `P(tau)` of the gate stage.
pub fn analytic_fidelity_gate(
    c_d: C64,
    c_b: C64,
    ints: &ErrorIntegrals,
    err: &ErrorModel,
    gamma: f64,
) -> AnalyticFidelity {
    let (a2, a3) = gate_amplitudes(c_d, c_b, ints, err);
    let sym = err.delta.powi(2)
        * c_b.norm_sqr()
        * (0.5 * ints.w.norm_sqr() * (1.0 + gamma.cos()) + c_d.norm_sqr() * ints.gate.o13_delta.powi(2));
    AnalyticFidelity::from_amplitudes(a2, a3, 1.0 - sym)
}

/// `P(2 tau)` after the compensation stage.
pub fn analytic_fidelity_cp(
    c_d: C64,
    c_b: C64,
    ints: &ErrorIntegrals,
    err: &ErrorModel,
    gamma: f64,
) -> Result<AnalyticFidelity> {
    let comp = ints
        .compensation
        .as_ref()
        .ok_or_else(|| Error::config("compensation integrals were not computed"))?;
    let (a2, a3) = gate_amplitudes(c_d, c_b, ints, err);
    let s = &comp.stage;
    let (eps, delta) = (err.epsilon, err.delta);
    let b2 =
        0.5 * c_d.conj() * C64::from_polar(1.0, comp.kappa - s.beta_start) * (delta * s.o12_delta + eps * s.o12_eps);
    let b3 = -c_d.conj() * c_b.conj() * (delta * s.o13_delta - eps * s.o13_eps);
    let e_g = C64::from_polar(1.0, gamma);
    let sym = err.delta.powi(2)
        * ints.w.norm_sqr()
        * (c_d.norm_sqr() + 0.5 * c_b.norm_sqr() * (1.0 + gamma.cos()) + ((1.0 + e_g) * c_d * c_b.conj()).re);
    Ok(AnalyticFidelity::from_amplitudes(a2 + b2, a3 + b3, 1.0 - sym))
}

/// Context fixing the constant phases of `<psi1|H'|psi_m>` in one stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageLink {
    /// Prefactor of `(1/2) e^{-i(phi+ - phi-)} [...]` in `H'12`.
    pub pre12: C64,
    /// Prefactor of `[...]` in `H'13`.
    pub pre13: C64,
}

impl StageLink {
    pub fn gate(c_d: C64, c_b: C64, gate: &StageIntegrals) -> Self {
        StageLink {
            pre12: c_b.conj() * C64::from_polar(1.0, -gate.beta_start),
            pre13: c_d.conj() * c_b.conj(),
        }
    }

    pub fn compensation(c_d: C64, c_b: C64, comp: &CompensationIntegrals) -> Self {
        StageLink {
            pre12: c_d.conj() * C64::from_polar(1.0, comp.kappa - comp.stage.beta_start),
            pre13: -c_d.conj() * c_b.conj(),
        }
    }
}

/// `(H'12(t), H'13(t))` at local stage time `t`:
///
/// ```text
/// H'12 = (1/2) pre12 e^{-i(phi+ - phi-)} [delta sin(a) - eps (beta_dot sin(a) + i alpha_dot)]
/// H'13 = pre13 [delta sin^2(a/2) - (eps/2) beta_dot sin(a) tan(a)]
/// ```
pub fn matrix_elements(
    t: f64,
    sched: &AngleSchedule,
    phases: &PhaseTrack,
    link: &StageLink,
    err: &ErrorModel,
) -> Result<(C64, C64)> {
    if !(0.0..=sched.tau()).contains(&t) {
        return Err(Error::domain(format!("t = {t} outside the stage [0, {}]", sched.tau())));
    }
    let p = sched.at(t);
    let (plus, minus) = phases.at(t);
    let sa = p.alpha.sin();
    let bracket = err.delta * sa - err.epsilon * C64::new(p.beta_dot * sa, p.alpha_dot);
    let h12 = 0.5 * link.pre12 * C64::from_polar(1.0, -(plus - minus)) * bracket;
    let h13 = link.pre13 * (err.delta * (0.5 * p.alpha).sin().powi(2) - 0.5 * err.epsilon * beta_dot_sin_tan(&p));
    Ok((h12, h13))
}

/// Phase tracks and integrals for a gate, ready to evaluate at any error.
#[derive(Clone, Debug)]
pub struct GateOracle {
    pub gate: (AngleSchedule, PhaseTrack),
    pub compensation: Option<(AngleSchedule, PhaseTrack)>,
    pub integrals: ErrorIntegrals,
}

impl GateOracle {
    /// Builds resonant waveforms with `2 * steps` intervals per stage for the
    /// gate in the `(theta, phi)` frame, plus its compensation stage if `cp`.
    pub fn new(family: PulseFamily, theta: f64, phi: f64, cp: bool, steps: usize) -> Result<Self> {
        let gate_plan = StagePlan::gate(family, theta, phi);
        let track = |plan: &StagePlan| -> Result<(AngleSchedule, PhaseTrack)> {
            let sched = plan.family.schedule();
            let wf = plan.waveform(steps)?;
            let ph = accumulated_phases(&sched, &wf)?;
            Ok((sched, ph))
        };
        let gate = track(&gate_plan)?;
        let compensation = if cp {
            Some(track(&StagePlan::compensating(&gate_plan))?)
        } else {
            None
        };
        let integrals = error_integrals((&gate.0, &gate.1), compensation.as_ref().map(|(s, p)| (s, p)))?;
        Ok(GateOracle {
            gate,
            compensation,
            integrals,
        })
    }

    /// Gate-stage or two-stage fidelity, whichever this oracle was built for.
    pub fn fidelity(&self, c_d: C64, c_b: C64, err: &ErrorModel, gamma: f64) -> Result<AnalyticFidelity> {
        if self.compensation.is_some() {
            analytic_fidelity_cp(c_d, c_b, &self.integrals, err, gamma)
        } else {
            Ok(analytic_fidelity_gate(c_d, c_b, &self.integrals, err, gamma))
        }
    }
}
