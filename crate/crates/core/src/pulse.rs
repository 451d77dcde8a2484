//! Bloch-angle schedules and the drive waveforms that realise them.
//!
//! The effective two-level problem lives in `{|b>, |e>}` with
//! `H = Delta |e><e| + (Omega e^{-i xi} |b><e| + h.c.)`. A trajectory
//! `|chi+(t)> = cos(alpha/2)|b> + sin(alpha/2) e^{i beta}|e>` is exact under
//! that Hamiltonian when
//!
//! ```text
//! -2 Omega sin(beta - xi)        = alpha_dot
//! -2 Omega cos(beta - xi) cos(a) = (Delta + beta_dot) sin(a)
//! ```
//!
//! which [`inverse_engineer`] solves for `Omega >= 0` and `xi`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::qutrit::{make_dark_bright, DarkBrightFrame};

/// Default number of grid intervals per stage.
pub const DEFAULT_STAGE_SAMPLES: usize = 20_000;

/// Smallest waveform grid accepted by [`inverse_engineer`].
pub const MIN_STAGE_SAMPLES: usize = 1_000;

/// Polar-angle profile. Only the smooth `pi sin^2(pi t / tau)` loop is
/// provided; further shapes slot in as new variants with their derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AlphaShape {
    #[default]
    SinSquared,
}

/// `beta(t) = a sin(alpha) + beta1` on `[0, tau/2]` and
/// `b sin(alpha) + beta2` on `(tau/2, tau]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseFamily {
    pub shape: AlphaShape,
    pub a: f64,
    pub b: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub tau: f64,
}

impl PulseFamily {
    pub fn new(a: f64, b: f64, beta1: f64, beta2: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!("stage duration must be positive, got {tau}")));
        }
        Ok(PulseFamily {
            shape: AlphaShape::SinSquared,
            a,
            b,
            beta1,
            beta2,
            tau,
        })
    }

    /// Family whose bright state picks up `e^{i gamma}` over one cycle.
    ///
    /// The loop encloses the lune between azimuths `beta1` and `beta2`, and
    /// the phase it imprints is `beta1 - beta2`, so `beta2 = -gamma`.
    pub fn for_gate(gamma: f64, a: f64, b: f64, tau: f64) -> Result<Self> {
        Self::new(a, b, 0.0, -gamma, tau)
    }

    /// Whether the dynamical phase cancels over the loop (`a == b`).
    pub fn is_holonomic(&self) -> bool {
        self.a == self.b
    }

    pub fn schedule(&self) -> AngleSchedule {
        AngleSchedule { family: *self }
    }
}

/// `pi sin^2(pi t / tau)`.
pub fn alpha_profile(t: f64, tau: f64) -> Result<f64> {
    check_time(t, tau)?;
    Ok(alpha_terms(t, tau).0)
}

/// `beta(t)` of the family; `t = tau/2` belongs to the first half.
pub fn beta_profile(t: f64, fam: &PulseFamily) -> Result<f64> {
    check_time(t, fam.tau)?;
    Ok(fam.schedule().at(t).beta)
}

fn check_time(t: f64, tau: f64) -> Result<()> {
    if !(0.0..=tau).contains(&t) {
        return Err(Error::domain(format!("t = {t} outside [0, {tau}]")));
    }
    Ok(())
}

fn alpha_terms(t: f64, tau: f64) -> (f64, f64, f64) {
    let w = PI / tau;
    let s = (w * t).sin();
    let (s2, c2) = (2.0 * w * t).sin_cos();
    (PI * s * s, PI * w * s2, 2.0 * PI * w * w * c2)
}

/// Bloch angles and their first two time derivatives at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnglePoint {
    pub alpha: f64,
    pub alpha_dot: f64,
    pub alpha_ddot: f64,
    pub beta: f64,
    pub beta_dot: f64,
    pub beta_ddot: f64,
}

/// Smooth piece of a schedule between two discontinuities of `beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
}

/// `(alpha(t), beta(t))` over one stage, split where `beta` jumps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleSchedule {
    family: PulseFamily,
}

impl AngleSchedule {
    pub fn family(&self) -> &PulseFamily {
        &self.family
    }

    pub fn tau(&self) -> f64 {
        self.family.tau
    }

    /// Times at which `beta` is discontinuous.
    pub fn discontinuities(&self) -> Vec<f64> {
        vec![0.5 * self.family.tau]
    }

    pub fn segments(&self) -> [Segment; 2] {
        let half = 0.5 * self.family.tau;
        [
            Segment { start: 0.0, end: half },
            Segment {
                start: half,
                end: self.family.tau,
            },
        ]
    }

    /// Angles at `t` evaluated with segment `seg`'s branch of `beta`; at a
    /// shared endpoint this selects the one-sided limit.
    pub fn point(&self, seg: usize, t: f64) -> AnglePoint {
        let f = &self.family;
        let (alpha, alpha_dot, alpha_ddot) = match f.shape {
            AlphaShape::SinSquared => alpha_terms(t, f.tau),
        };
        let (slope, offset) = if seg == 0 { (f.a, f.beta1) } else { (f.b, f.beta2) };
        let (sa, ca) = alpha.sin_cos();
        AnglePoint {
            alpha,
            alpha_dot,
            alpha_ddot,
            beta: slope * sa + offset,
            beta_dot: slope * ca * alpha_dot,
            beta_ddot: slope * (ca * alpha_ddot - sa * alpha_dot * alpha_dot),
        }
    }

    pub fn at(&self, t: f64) -> AnglePoint {
        let seg = if t <= 0.5 * self.family.tau { 0 } else { 1 };
        self.point(seg, t)
    }

    /// Right limit minus left limit of `beta` at the `k`-th segment boundary.
    pub fn beta_jump(&self, k: usize) -> f64 {
        let t = self.segments()[k].end;
        self.point(k + 1, t).beta - self.point(k, t).beta
    }

    /// `alpha(0) = alpha(tau) = 0`.
    pub fn is_cyclic(&self) -> bool {
        let tol = 1e-12;
        self.point(0, 0.0).alpha.abs() < tol && self.point(1, self.tau()).alpha.abs() < tol
    }
}

/// Which part of a two-stage protocol a waveform drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageKind {
    Gate,
    Compensation,
}

/// Drive values at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSample {
    pub omega: f64,
    pub xi: f64,
    pub delta: f64,
}

/// Uniformly sampled controls over one [`Segment`].
#[derive(Clone, Debug, PartialEq)]
pub struct WaveSegment {
    pub start: f64,
    pub end: f64,
    pub omega: Vec<f64>,
    /// Unwrapped drive phase.
    pub xi: Vec<f64>,
    pub delta: Vec<f64>,
}

impl WaveSegment {
    pub fn intervals(&self) -> usize {
        self.omega.len() - 1
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.intervals() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        quadrature::node(self.start, self.end, k, self.intervals())
    }

    pub fn node(&self, k: usize) -> DriveSample {
        DriveSample {
            omega: self.omega[k],
            xi: self.xi[k],
            delta: self.delta[k],
        }
    }

    /// Controls at fractional grid position `x` (in units of the node
    /// spacing). Positions within `1e-9` of a node return the node exactly;
    /// otherwise the neighbours are interpolated linearly.
    pub fn at_position(&self, x: f64) -> DriveSample {
        let n = self.intervals();
        let x = x.clamp(0.0, n as f64);
        let k = x.round();
        if (x - k).abs() < 1e-9 {
            return self.node(k as usize);
        }
        let lo = (x.floor() as usize).min(n - 1);
        let w = x - lo as f64;
        let lerp = |v: &[f64]| v[lo] + w * (v[lo + 1] - v[lo]);
        DriveSample {
            omega: lerp(&self.omega),
            xi: lerp(&self.xi),
            delta: lerp(&self.delta),
        }
    }

    pub fn at_time(&self, t: f64) -> DriveSample {
        self.at_position((t - self.start) / self.step())
    }
}

/// Inverse-engineered controls `Omega(t)`, `xi(t)`, `Delta(t)` for one stage,
/// together with the dark/bright frame they act in.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveWaveform {
    pub stage: StageKind,
    pub theta: f64,
    pub phi: f64,
    pub tau: f64,
    segments: Vec<WaveSegment>,
}

impl DriveWaveform {
    pub fn segments(&self) -> &[WaveSegment] {
        &self.segments
    }

    /// Total number of grid intervals across all segments.
    pub fn intervals(&self) -> usize {
        self.segments.iter().map(WaveSegment::intervals).sum()
    }

    pub fn frame(&self) -> DarkBrightFrame {
        make_dark_bright(self.theta, self.phi)
    }

    /// Tags the waveform with the stage it drives and its `(theta, phi)` frame.
    pub fn placed(mut self, stage: StageKind, theta: f64, phi: f64) -> Self {
        self.stage = stage;
        self.theta = theta;
        self.phi = phi;
        self
    }

    /// Index of the segment owning local time `t`; shared boundaries belong
    /// to the earlier segment.
    pub fn segment_index(&self, t: f64) -> Result<usize> {
        if !(0.0..=self.tau).contains(&t) {
            return Err(Error::domain(format!("t = {t} outside the stage [0, {}]", self.tau)));
        }
        Ok(self
            .segments
            .iter()
            .position(|s| t <= s.end)
            .unwrap_or(self.segments.len() - 1))
    }

    pub fn sample(&self, t: f64) -> Result<DriveSample> {
        let k = self.segment_index(t)?;
        Ok(self.segments[k].at_time(t))
    }

    pub fn omega_max(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| s.omega.iter().copied())
            .fold(0.0, f64::max)
    }

    /// Flattened `(t, sample)` pairs, boundary nodes listed once per segment.
    pub fn samples(&self) -> impl Iterator<Item = (f64, DriveSample)> + '_ {
        self.segments
            .iter()
            .flat_map(|s| (0..=s.intervals()).map(move |k| (s.time(k), s.node(k))))
    }
}

/// Solves the tracking constraints for the drive that steers `|chi+(t)>`
/// along `sched`, sampled on `n` intervals split evenly over the segments.
///
/// `delta` is the designed detuning. Points where `cos(alpha) = 0` are
/// removable only when `Delta + beta_dot` vanishes there too; anything else
/// needs an infinite Rabi frequency and is reported as a design error.
pub fn inverse_engineer(sched: &AngleSchedule, delta: &dyn Fn(f64) -> f64, n: usize) -> Result<DriveWaveform> {
    if !sched.is_cyclic() {
        return Err(Error::Design {
            t: 0.0,
            reason: "alpha(0) and alpha(tau) must vanish".into(),
        });
    }
    if n < MIN_STAGE_SAMPLES {
        return Err(Error::domain(format!(
            "at least {MIN_STAGE_SAMPLES} samples per stage required, got {n}"
        )));
    }
    let segs = sched.segments();
    let per = n.div_ceil(segs.len());
    let tau = sched.tau();
    let scale = PI * PI / tau;
    let mut out = Vec::with_capacity(segs.len());
    for (k, seg) in segs.iter().enumerate() {
        let mut omega = Vec::with_capacity(per + 1);
        let mut xi = Vec::with_capacity(per + 1);
        let mut det = Vec::with_capacity(per + 1);
        for j in 0..=per {
            let t = quadrature::node(seg.start, seg.end, j, per);
            let p = sched.point(k, t);
            let d = delta(t);
            let g = transverse_term(&p, d, || derivative(delta, t, tau), t)?;
            let (sin_part, cos_part) = (-0.5 * p.alpha_dot, -0.5 * g);
            let om = sin_part.hypot(cos_part);
            if !om.is_finite() {
                return Err(Error::Design {
                    t,
                    reason: "non-finite Rabi frequency".into(),
                });
            }
            omega.push(om);
            det.push(d);
            // the phase is immaterial where the drive is off; filled below
            xi.push(if om > 1e-10 * scale {
                p.beta - sin_part.atan2(cos_part)
            } else {
                f64::NAN
            });
        }
        fill_and_unwrap(&mut xi);
        out.push(WaveSegment {
            start: seg.start,
            end: seg.end,
            omega,
            xi,
            delta: det,
        });
    }
    Ok(DriveWaveform {
        stage: StageKind::Gate,
        theta: 0.0,
        phi: 0.0,
        tau,
        segments: out,
    })
}

/// `(Delta + beta_dot) tan(alpha)`, with the `cos(alpha) -> 0` limit taken by
/// l'Hopital when the numerator vanishes alongside.
fn transverse_term(p: &AnglePoint, delta: f64, delta_dot: impl Fn() -> f64, t: f64) -> Result<f64> {
    let (s, c) = p.alpha.sin_cos();
    let num = delta + p.beta_dot;
    if c.abs() > 1e-9 {
        return Ok(num * s / c);
    }
    let scale = p.alpha_dot.abs().max(1e-300);
    if num.abs() > 1e-6 * scale {
        return Err(Error::Design {
            t,
            reason: format!("cos(alpha) = 0 with Delta + beta_dot = {num:.3e}: Rabi frequency diverges"),
        });
    }
    if p.alpha_dot == 0.0 {
        return Err(Error::Design {
            t,
            reason: "cos(alpha) and alpha_dot vanish together".into(),
        });
    }
    Ok(-(delta_dot() + p.beta_ddot) / p.alpha_dot)
}

fn derivative(f: &dyn Fn(f64) -> f64, t: f64, tau: f64) -> f64 {
    let h = 1e-6 * tau;
    (f(t + h) - f(t - h)) / (2.0 * h)
}

fn fill_and_unwrap(xi: &mut [f64]) {
    let Some(first) = xi.iter().position(|x| x.is_finite()) else {
        xi.iter_mut().for_each(|x| *x = 0.0);
        return;
    };
    let v = xi[first];
    xi[..first].iter_mut().for_each(|x| *x = v);
    for k in first + 1..xi.len() {
        if !xi[k].is_finite() {
            xi[k] = xi[k - 1];
            continue;
        }
        let prev = xi[k - 1];
        xi[k] -= TAU * ((xi[k] - prev) / TAU).round();
    }
}

/// `(family, theta_c, phi_c)` for the stage that swaps dark and bright states
/// and closes an identity loop: `theta -> pi - theta`, `phi -> pi + phi`, same
/// slopes, `beta1 = beta2 = 0`.
pub fn compensation_stage(fam: &PulseFamily, theta: f64, phi: f64) -> (PulseFamily, f64, f64) {
    let comp = PulseFamily {
        beta1: 0.0,
        beta2: 0.0,
        ..*fam
    };
    (comp, PI - theta, PI + phi)
}

/// Geometric and dynamical phase of `|chi+>` over one resonant cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseDecomposition {
    pub gamma_g: f64,
    pub gamma_d: f64,
}

/// `gamma_g = -int beta_dot sin^2(alpha/2) dt` including each jump of `beta`,
/// `gamma_d = (1/2) PV int beta_dot sin^2(alpha) / cos(alpha) dt`.
pub fn phase_decomposition(sched: &AngleSchedule) -> Result<PhaseDecomposition> {
    phase_decomposition_with(sched, DEFAULT_STAGE_SAMPLES)
}

pub fn phase_decomposition_with(sched: &AngleSchedule, n: usize) -> Result<PhaseDecomposition> {
    let segs = sched.segments();
    let per = n.div_ceil(segs.len()).max(2);
    let mut gamma_g = 0.0;
    for (k, seg) in segs.iter().enumerate() {
        gamma_g -= quadrature::simpson_fn(
            |t| {
                let p = sched.point(k, t);
                p.beta_dot * (0.5 * p.alpha).sin().powi(2)
            },
            seg.start,
            seg.end,
            per,
        );
        if k + 1 < segs.len() {
            let alpha = sched.point(k, seg.end).alpha;
            gamma_g -= sched.beta_jump(k) * (0.5 * alpha).sin().powi(2);
        }
    }
    let gamma_d = half_tan_integral(sched, n)?;
    Ok(PhaseDecomposition { gamma_g, gamma_d })
}

/// `(1/2) int beta_dot sin(alpha) tan(alpha) dt` over the stage, as a
/// principal value where `cos(alpha)` vanishes with `beta_dot != 0`.
///
/// This is both the resonant dynamical phase and the Rabi-error
/// excited-population integral.
pub(crate) fn half_tan_integral(sched: &AngleSchedule, n: usize) -> Result<f64> {
    let segs = sched.segments();
    let per = n.div_ceil(segs.len()).max(4);
    let mut total = 0.0;
    for (k, seg) in segs.iter().enumerate() {
        let integrand = |t: f64| beta_dot_sin_tan(&sched.point(k, t));
        let poles = genuine_poles(sched, k, seg, per);
        if poles.is_empty() {
            total += quadrature::simpson_fn(integrand, seg.start, seg.end, per);
            continue;
        }
        // one pole per sub-interval, cut halfway between neighbours
        let mut cuts = vec![seg.start];
        cuts.extend(poles.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        cuts.push(seg.end);
        let sub = (per / poles.len()).max(64);
        for (i, &pole) in poles.iter().enumerate() {
            let pv_integrand = |t: f64| {
                let p = sched.point(k, t);
                let (s, c) = p.alpha.sin_cos();
                p.beta_dot * s * s / c
            };
            total += quadrature::principal_value(pv_integrand, cuts[i], cuts[i + 1], pole, sub, 1e-6)?;
        }
    }
    Ok(0.5 * total)
}

/// `beta_dot sin(alpha) tan(alpha)`, continued through removable zeros of
/// `cos(alpha)`.
pub(crate) fn beta_dot_sin_tan(p: &AnglePoint) -> f64 {
    let (s, c) = p.alpha.sin_cos();
    if c.abs() > 1e-9 {
        p.beta_dot * s * s / c
    } else {
        // beta_dot and cos(alpha) vanish together; take the ratio of slopes
        -p.beta_ddot * s / p.alpha_dot
    }
}

/// Zeros of `cos(alpha)` inside the open segment where `beta_dot` does not
/// vanish alongside.
fn genuine_poles(sched: &AngleSchedule, k: usize, seg: &Segment, n: usize) -> Vec<f64> {
    let cos_at = |t: f64| sched.point(k, t).alpha.cos();
    let scan = n.min(4096);
    let mut poles = Vec::new();
    let mut prev_t = seg.start;
    let mut prev = cos_at(prev_t);
    for j in 1..=scan {
        let t = quadrature::node(seg.start, seg.end, j, scan);
        let cur = cos_at(t);
        if prev.signum() != cur.signum() && prev != 0.0 && cur != 0.0 {
            let root = bisect(&cos_at, prev_t, t);
            let p = sched.point(k, root);
            if p.beta_dot.abs() > 1e-6 * p.alpha_dot.abs().max(1.0 / sched.tau()) && root > seg.start && root < seg.end
            {
                poles.push(root);
            }
        }
        prev_t = t;
        prev = cur;
    }
    poles
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TAU_US: f64 = 0.1;

    fn resonant(_: f64) -> f64 {
        0.0
    }

    #[test]
    fn alpha_examples() {
        assert_abs_diff_eq!(alpha_profile(0.0, TAU_US).unwrap(), 0.0);
        assert_abs_diff_eq!(alpha_profile(TAU_US / 2.0, TAU_US).unwrap(), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(alpha_profile(TAU_US / 4.0, TAU_US).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert!(matches!(alpha_profile(1.1 * TAU_US, TAU_US), Err(Error::Domain(_))));
        assert!(matches!(alpha_profile(-1e-9, TAU_US), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_examples() {
        let oss = PulseFamily::new(0.0, 0.0, 0.0, PI, TAU_US).unwrap();
        assert_eq!(beta_profile(0.7 * TAU_US, &oss).unwrap(), PI);
        let fam = PulseFamily::new(4.0, 4.0, 0.0, PI, TAU_US).unwrap();
        assert_abs_diff_eq!(beta_profile(0.0, &fam).unwrap(), 0.0);
        assert_abs_diff_eq!(beta_profile(TAU_US / 2.0 + 1e-12, &fam).unwrap(), PI, epsilon = 1e-9);
        assert!(beta_profile(2.0 * TAU_US, &fam).is_err());
    }

    #[test]
    fn oss_beta_is_piecewise_constant() {
        let oss = PulseFamily::new(0.0, 0.0, 0.3, -1.2, TAU_US).unwrap();
        for k in 0..=1000 {
            let t = TAU_US * k as f64 / 1000.0;
            let want = if t <= TAU_US / 2.0 { 0.3 } else { -1.2 };
            assert_eq!(beta_profile(t, &oss).unwrap(), want);
        }
    }

    #[test]
    fn family_rejects_non_positive_tau() {
        assert!(PulseFamily::new(0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(PulseFamily::new(0.0, 0.0, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn oss_waveform_is_half_alpha_dot() {
        let fam = PulseFamily::new(0.0, 0.0, 0.0, PI, TAU_US).unwrap();
        let sched = fam.schedule();
        let wf = inverse_engineer(&sched, &resonant, 4000).unwrap();
        for (t, s) in wf.samples() {
            let p = sched.at(t);
            assert_abs_diff_eq!(s.omega, 0.5 * p.alpha_dot.abs(), epsilon = 1e-9);
        }
        assert_abs_diff_eq!(wf.omega_max(), PI * PI / (2.0 * TAU_US), epsilon = 1e-6);
        // xi = beta -/+ pi/2
        let first = &wf.segments()[0];
        let off = (first.xi[first.intervals() / 2] - 0.0).rem_euclid(TAU);
        assert_abs_diff_eq!(off, PI / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn waveform_endpoints_vanish() {
        for a in [0.0, 1.0, 2.0, 4.0] {
            let fam = PulseFamily::new(a, a, 0.0, PI / 2.0, TAU_US).unwrap();
            let wf = inverse_engineer(&fam.schedule(), &resonant, 2000).unwrap();
            let segs = wf.segments();
            assert!(segs[0].omega[0].abs() < 1e-9);
            assert!(segs.last().unwrap().omega.last().unwrap().abs() < 1e-9);
            assert!(wf.samples().all(|(_, s)| s.omega >= 0.0 && s.xi.is_finite()));
            let p0 = fam.schedule().point(0, 0.0);
            let p1 = fam.schedule().point(1, TAU_US);
            assert!(p0.alpha_dot.abs() < 1e-9 && p1.alpha_dot.abs() < 1e-9);
        }
    }

    #[test]
    fn designed_waveform_closed_form() {
        // beta = a sin(alpha) gives Omega = |alpha_dot|/2 sqrt(1 + a^2 sin^2 alpha)
        let fam = PulseFamily::new(4.0, 4.0, 0.0, PI, TAU_US).unwrap();
        let sched = fam.schedule();
        let wf = inverse_engineer(&sched, &resonant, 4000).unwrap();
        for (k, seg) in wf.segments().iter().enumerate() {
            for j in 0..=seg.intervals() {
                let p = sched.point(k, seg.time(j));
                let want = 0.5 * p.alpha_dot.abs() * (1.0 + 16.0 * p.alpha.sin().powi(2)).sqrt();
                assert_abs_diff_eq!(seg.omega[j], want, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn constant_detuning_is_not_realisable() {
        let fam = PulseFamily::new(0.0, 0.0, 0.0, PI, TAU_US).unwrap();
        // Delta != 0 makes (Delta + beta_dot) tan(alpha) blow up at alpha = pi/2
        let err = inverse_engineer(&fam.schedule(), &|_| 5.0, 4000);
        assert!(matches!(err, Err(Error::Design { .. })), "{err:?}");
    }

    #[test]
    fn too_few_samples() {
        let fam = PulseFamily::new(0.0, 0.0, 0.0, PI, TAU_US).unwrap();
        assert!(inverse_engineer(&fam.schedule(), &resonant, 999).is_err());
    }

    #[test]
    fn compensation_examples() {
        let fam = PulseFamily::new(4.0, 4.0, 0.0, -PI, TAU_US).unwrap();
        let (c, th, ph) = compensation_stage(&fam, PI / 2.0, 0.0);
        assert_abs_diff_eq!(th, PI / 2.0);
        assert_abs_diff_eq!(ph, PI);
        assert_eq!((c.a, c.b, c.beta1, c.beta2, c.tau), (4.0, 4.0, 0.0, 0.0, TAU_US));
        let (_, th, ph) = compensation_stage(&fam, 0.0, 0.0);
        assert_abs_diff_eq!(th, PI);
        assert_abs_diff_eq!(ph, PI);
        // dark and bright swap
        let f = make_dark_bright(0.4, 0.9);
        let (_, th, ph) = compensation_stage(&fam, 0.4, 0.9);
        let g = make_dark_bright(th, ph);
        assert!((g.dark.inner(&f.bright).norm() - 1.0).abs() < 1e-12);
        assert!((g.bright.inner(&f.dark).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oss_geometric_phase() {
        let fam = PulseFamily::new(0.0, 0.0, 0.0, PI, TAU_US).unwrap();
        let ph = phase_decomposition(&fam.schedule()).unwrap();
        assert_abs_diff_eq!(ph.gamma_g.rem_euclid(TAU), PI, epsilon = 1e-9);
        assert_abs_diff_eq!(ph.gamma_d, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn designed_family_phases() {
        // the loop imprints beta1 - beta2
        let fam = PulseFamily::new(4.0, 4.0, 0.0, PI / 2.0, TAU_US).unwrap();
        let ph = phase_decomposition(&fam.schedule()).unwrap();
        assert_abs_diff_eq!(ph.gamma_g, -PI / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ph.gamma_d, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn no_beta_change_no_phase() {
        let fam = PulseFamily::new(0.0, 0.0, 0.8, 0.8, TAU_US).unwrap();
        let ph = phase_decomposition(&fam.schedule()).unwrap();
        assert_abs_diff_eq!(ph.gamma_g, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn unequal_slopes_leave_dynamical_phase() {
        // each half contributes slope * pi / 4
        let fam = PulseFamily::new(1.0, 3.0, 0.0, 0.0, TAU_US).unwrap();
        let ph = phase_decomposition(&fam.schedule()).unwrap();
        assert_abs_diff_eq!(ph.gamma_d, (1.0 - 3.0) * PI / 4.0, epsilon = 1e-9);
        assert!(!fam.is_holonomic());
    }
}
