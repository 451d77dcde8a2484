//! Acceptance checks A1 to A9.
//!
//! Every criterion returns a [`CriterionReport`] made of named sub-checks; a
//! criterion passes when all of its sub-checks do. Errors are expressed in
//! units of the stage duration: `eps` is dimensionless and detuning enters as
//! `delta tau`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::catalog::{GateName, Scheme};
use crate::error::Result;
use crate::lab::{self, RunRequest, SweepAxes, SweepRequest};
use crate::oracle::{matrix_elements, GateOracle, StageLink};
use crate::propagator::{evolve, final_state, propagator_matrix, sample_states, ErrorModel, SimConfig, StagePlan};
use crate::pulse::{phase_decomposition, PulseFamily};
use crate::qutrit::{make_dark_bright, state_fidelity, InitialState, QutritState};

/// Stage duration used by the simulated checks, in us.
pub const TAU_US: f64 = 0.1;
const STEPS: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            label: label.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn failed(label: impl Into<String>, e: crate::error::Error) -> Self {
        Check::new(label, false, format!("error: {e}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub id: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    fn new(id: &'static str, title: &'static str) -> Self {
        CriterionReport {
            id,
            title,
            checks: Vec::new(),
        }
    }

    fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    fn record(&mut self, label: impl Into<String>, res: Result<Check>) {
        let label = label.into();
        self.push(res.unwrap_or_else(|e| Check::failed(label, e)));
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// `A1 PASS ideal gates (4/4)`.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        format!(
            "{} {} {} ({ok}/{})",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len()
        )
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary_line())?;
        for c in &self.checks {
            writeln!(
                f,
                "    [{}] {}: {}",
                if c.passed { "ok" } else { "XX" },
                c.label,
                c.detail
            )?;
        }
        Ok(())
    }
}

fn detuning(delta_tau: f64) -> f64 {
    delta_tau / TAU_US
}

fn simulate(gate: GateName, scheme: Scheme, cp: bool, err: &ErrorModel, steps: usize) -> Result<f64> {
    let e = gate.entry();
    let cfg = e.sim_config(scheme, cp, TAU_US, steps)?;
    let psi = final_state(&e.init.state(), &cfg, err)?;
    Ok(state_fidelity(&psi, &e.target()))
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

/// Radical inverse of `k` in `base`.
fn halton(mut k: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

/// Ideal gates reach their targets.
pub fn a1_ideal_gates() -> CriterionReport {
    let mut rep = CriterionReport::new("A1", "ideal gates reach their targets");
    for gate in GateName::ALL {
        let start = Instant::now();
        let res = simulate(gate, Scheme::AB4, false, &ErrorModel::ideal(), STEPS).map(|f| {
            let secs = start.elapsed().as_secs_f64();
            Check::new(
                gate.to_string(),
                f >= 1.0 - 1e-9 && secs < 1.0,
                format!("1-F = {:.3e}, {secs:.3} s", 1.0 - f),
            )
        });
        rep.record(gate.to_string(), res);
    }
    rep
}

/// Rabi-error coefficients of the `a = b = 0` loop.
pub fn a2_rabi_coefficients() -> CriterionReport {
    let mut rep = CriterionReport::new("A2", "Rabi-error coefficients, a=b=0");
    let s2 = (PI / 8.0).sin().powi(2);
    let table = [
        (GateName::Not, PI * PI / 2.0),
        (GateName::Hadamard, PI * PI / 2.0 * s2),
        (GateName::S, PI * PI / 4.0),
        (GateName::T, PI * PI / 4.0 * (1.0 - SQRT_2 / 2.0)),
    ];
    for (gate, expected) in table {
        for eps in [0.01, 0.02, 0.05] {
            let tol = if eps <= 0.01 { 0.05 } else { 0.15 };
            let label = format!("{gate} eps={eps}");
            let res = ErrorModel::new(eps, 0.0)
                .and_then(|err| simulate(gate, Scheme::AB0, false, &err, STEPS))
                .map(|f| {
                    let coeff = (1.0 - f) / (eps * eps);
                    let rel = (coeff - expected).abs() / expected;
                    Check::new(
                        label.clone(),
                        rel <= tol,
                        format!("(1-F)/eps^2 = {coeff:.5}, expected {expected:.5}, rel {rel:.3} (tol {tol})"),
                    )
                });
            rep.record(label, res);
        }
    }
    rep
}

/// Rabi error is removed to second order when `a = b = 4`.
pub fn a3_rabi_elimination() -> CriterionReport {
    let mut rep = CriterionReport::new("A3", "Rabi error eliminated, a=b=4");
    let eps: Vec<f64> = (0..5).map(|k| 0.01 * 10f64.powf(k as f64 / 4.0)).collect();
    for gate in GateName::ALL {
        let label = format!("{gate} slope");
        let res = eps
            .iter()
            .map(|&e| ErrorModel::new(e, 0.0).and_then(|err| simulate(gate, Scheme::AB4, false, &err, STEPS)))
            .collect::<Result<Vec<f64>>>()
            .map(|fs| {
                let inf: Vec<f64> = fs.iter().map(|f| 1.0 - f).collect();
                let slope = log_slope(&eps, &inf);
                Check::new(
                    label.clone(),
                    (slope - 4.0).abs() <= 0.3,
                    format!("slope {slope:.3}, 1-F from {:.3e} to {:.3e}", inf[0], inf[4]),
                )
            });
        rep.record(label, res);

        let label = format!("{gate} integrals");
        let res = gate.entry().oracle(Scheme::AB4, false, TAU_US, STEPS).map(|o| {
            let (o12, o13) = (o.integrals.o12_eps().norm(), o.integrals.o13_eps().abs());
            let bound = 1e-6 * TAU_US;
            Check::new(
                label.clone(),
                o12 < bound && o13 < bound,
                format!("|O12^eps| = {o12:.2e}, |O13^eps| = {o13:.2e}, bound {bound:.1e}"),
            )
        });
        rep.record(label, res);
    }
    rep
}

/// Detuning integrals of the `a = b = 4` loop relative to `|W|`.
pub fn a4_detuning_ratios() -> CriterionReport {
    let mut rep = CriterionReport::new("A4", "detuning suppression ratios");
    let integrals = |steps| {
        let fam = PulseFamily::for_gate(PI, 4.0, 4.0, 1.0)?;
        let o = GateOracle::new(fam, FRAC_PI_2, 0.0, false, steps)?;
        Ok::<_, crate::error::Error>((o.integrals.o13_delta(), o.integrals.q, o.integrals.w.norm()))
    };
    let res = integrals(STEPS).and_then(|coarse| Ok((coarse, integrals(2 * STEPS)?)));
    match res {
        Ok(((o13, q, w), (o13f, qf, wf))) => {
            let (r13, rq) = (o13 / w, q / w);
            rep.push(Check::new(
                "O13^delta/|W|",
                (28.8..=35.2).contains(&r13),
                format!("{r13:.6} in [28.8, 35.2]"),
            ));
            rep.push(Check::new(
                "Q/|W|",
                (13.5..=16.5).contains(&rq),
                format!("{rq:.6} in [13.5, 16.5]"),
            ));
            let drift = [(o13, o13f), (q, qf), (w, wf)]
                .iter()
                .map(|(a, b)| (a - b).abs() / b.abs())
                .fold(0.0, f64::max);
            rep.push(Check::new(
                "two-resolution agreement",
                drift < 1e-10,
                format!("largest relative change {drift:.2e} (O13 = {o13:.12}, Q = {q:.12}, W = {w:.12e})"),
            ));
        }
        Err(e) => rep.push(Check::failed("integrals", e)),
    }
    rep
}

/// The compensation stage cancels the population term.
pub fn a5_compensation() -> CriterionReport {
    let mut rep = CriterionReport::new("A5", "compensation cancels the population term");
    let delta_tau = 0.02;
    for gate in GateName::ALL {
        for scheme in [Scheme::AB0, Scheme::AB4] {
            let label = format!("{gate} {scheme}");
            let res = (|| -> Result<Check> {
                let e = gate.entry();
                let (c_d, c_b) = e.amplitudes();
                let o = e.oracle(scheme, true, TAU_US, 4000)?;
                let (gs, gp) = &o.gate;
                let (cs, cpp) = o.compensation.as_ref().expect("built with cp");
                let gl = StageLink::gate(c_d, c_b, &o.integrals.gate);
                let cl = StageLink::compensation(c_d, c_b, o.integrals.compensation.as_ref().expect("built with cp"));
                let err = ErrorModel::new(0.0, detuning(delta_tau))?;
                let mut worst: f64 = 0.0;
                for k in 0..=200 {
                    let t = TAU_US * k as f64 / 200.0;
                    let (_, h13) = matrix_elements(t, gs, gp, &gl, &err)?;
                    let (_, h13c) = matrix_elements(t, cs, cpp, &cl, &err)?;
                    worst = worst.max((h13 + h13c).norm());
                }
                let summed = o.fidelity(c_d, c_b, &err, e.spec.gamma)?.breakdown[1];
                let bound = 1e-10 * delta_tau * delta_tau;
                Ok(Check::new(
                    label.clone(),
                    worst < 1e-12 * err.delta && summed < bound,
                    format!("max |H~13 + H13| = {worst:.2e}, summed term {summed:.2e} (bound {bound:.1e})"),
                ))
            })();
            rep.record(label, res);
        }
    }
    let w = match GateName::Not.entry().oracle(Scheme::AB4, true, 1.0, STEPS) {
        Ok(o) => o.integrals.w.norm(),
        Err(e) => {
            rep.push(Check::failed("W", e));
            return rep;
        }
    };
    for dt in [0.005, 0.01, 0.02] {
        let label = format!("not with cp, delta*tau={dt}");
        let res = ErrorModel::new(0.0, detuning(dt))
            .and_then(|err| simulate(GateName::Not, Scheme::AB4, true, &err, STEPS))
            .map(|f| {
                let expected = dt * dt * w * w / 2.0;
                let rel = ((1.0 - f) - expected).abs() / expected;
                Check::new(
                    label.clone(),
                    rel <= 0.15,
                    format!(
                        "1-F = {:.4e}, (delta tau)^2 W^2/2 = {expected:.4e}, rel {rel:.3}",
                        1.0 - f
                    ),
                )
            });
        rep.record(label, res);
    }
    rep
}

/// Simulation and oracle agree to third order in the errors.
pub fn a6_oracle_agreement() -> CriterionReport {
    let mut rep = CriterionReport::new("A6", "oracle agrees with simulation");
    let points: Vec<(f64, f64)> = (1..=20)
        .map(|k| (0.1 * halton(k, 2) - 0.05, 0.1 * halton(k, 3) - 0.05))
        .collect();
    let mut combos = Vec::new();
    for gate in GateName::ALL {
        for scheme in [Scheme::AB0, Scheme::AB4] {
            for cp in [false, true] {
                combos.push((gate, scheme, cp));
            }
        }
    }
    let checks: Vec<Check> = combos
        .par_iter()
        .map(|&(gate, scheme, cp)| {
            let label = format!("{gate} {scheme} cp={cp}");
            let res = (|| -> Result<Check> {
                let e = gate.entry();
                let cfg = e.sim_config(scheme, cp, TAU_US, STEPS)?;
                let o = e.oracle(scheme, cp, TAU_US, STEPS)?;
                let (c_d, c_b) = e.amplitudes();
                let (init, target) = (e.init.state(), e.target());
                let mut worst_ratio: f64 = 0.0;
                for &(eps, dt) in &points {
                    let err = ErrorModel::new(eps, detuning(dt))?;
                    let sim = state_fidelity(&final_state(&init, &cfg, &err)?, &target);
                    let ora = o.fidelity(c_d, c_b, &err, e.spec.gamma)?.p;
                    let bound = 10.0 * eps.abs().max(dt.abs()).powi(3);
                    worst_ratio = worst_ratio.max((sim - ora).abs() / bound);
                }
                Ok(Check::new(
                    label.clone(),
                    worst_ratio <= 1.0,
                    format!("max |F_sim - F_oracle| / bound = {worst_ratio:.3}"),
                ))
            })();
            res.unwrap_or_else(|e| Check::failed(label, e))
        })
        .collect();
    for c in checks {
        rep.push(c);
    }
    rep
}

/// NOT with compensation under eps = 0.2 and delta = 2 MHz.
pub fn a7_headline() -> CriterionReport {
    let mut rep = CriterionReport::new("A7", "headline fidelity >= 0.999");
    let mut req = RunRequest::new(GateName::Not);
    req.eps = 0.2;
    req.delta_mhz = 2.0;
    req.tau_us = TAU_US;
    let res = lab::run_gate(&req).map(|s| {
        Check::new(
            "not a=b=4 cp eps=0.2 delta=2MHz",
            s.fidelity_sim >= 0.999,
            format!("F(2 tau) = {:.12}", s.fidelity_sim),
        )
    });
    rep.record("headline", res);
    rep
}

/// Invariants that hold exactly, independent of the error size.
pub fn a8_invariants() -> CriterionReport {
    let mut rep = CriterionReport::new("A8", "exact invariants");
    let errors: Vec<ErrorModel> = [(0.0, 0.0), (0.2, 0.0), (0.0, 40.0), (-0.15, -25.0), (0.1, 12.0)]
        .iter()
        .map(|&(e, d)| ErrorModel::new(e, d).expect("finite errors"))
        .collect();

    let res = (|| -> Result<Check> {
        let mut worst: f64 = 0.0;
        for (theta, phi) in [(FRAC_PI_2, 0.0), (0.0, 0.0), (2.1, -0.7)] {
            let fam = PulseFamily::for_gate(PI, 4.0, 4.0, TAU_US)?;
            let cfg = SimConfig::new(vec![StagePlan::gate(fam, theta, phi)], 4000, 40)?;
            let d = make_dark_bright(theta, phi).dark;
            for err in &errors {
                let tr = evolve(&d, &cfg, err, &d)?;
                worst = tr.fidelity.iter().map(|f| 1.0 - f).fold(worst, f64::max);
            }
        }
        Ok(Check::new(
            "dark-state immunity",
            worst < 1e-10,
            format!("max 1-F = {worst:.2e}"),
        ))
    })();
    rep.record("dark-state immunity", res);

    let res = (|| -> Result<Check> {
        let mut worst: f64 = 0.0;
        let mut worst_norm: f64 = 0.0;
        let init = InitialState::new(0.3, 0.8).state();
        for cp in [false, true] {
            let cfg = GateName::Not.entry().sim_config(Scheme::AB4, cp, TAU_US, STEPS)?;
            for err in &errors {
                worst = worst.max(propagator_matrix(&cfg, err).unitarity_defect());
                let cfg = cfg.clone().with_stride(100)?;
                for (_, psi) in sample_states(&init, &cfg, err) {
                    worst_norm = worst_norm.max((psi.norm_sqr() - 1.0).abs());
                }
            }
        }
        Ok(Check::new(
            "unitarity and norm",
            worst < 1e-7 && worst_norm < 1e-8,
            format!("max |U'U - 1| = {worst:.2e}, max |norm - 1| = {worst_norm:.2e}"),
        ))
    })();
    rep.record("unitarity and norm", res);

    let res = (|| -> Result<Check> {
        let init = QutritState::ground0();
        let err = ErrorModel::ideal();
        let cfg = |n| GateName::Not.entry().sim_config(Scheme::AB4, false, TAU_US, n);
        let reference = final_state(&init, &cfg(160_000)?, &err)?;
        let ns = [2500usize, 5000, 10_000, 20_000];
        let errs = ns
            .iter()
            .map(|&n| Ok((final_state(&init, &cfg(n)?, &err)?.as_vector() - reference.as_vector()).norm()))
            .collect::<Result<Vec<f64>>>()?;
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let slope = -log_slope(&xs, &errs);
        Ok(Check::new(
            "RK4 order",
            (slope - 4.0).abs() <= 0.2,
            format!("slope {slope:.3}, errors {:.2e} to {:.2e}", errs[0], errs[3]),
        ))
    })();
    rep.record("RK4 order", res);

    let gammas = [PI, FRAC_PI_2, FRAC_PI_4, 1.3];
    let slopes = [0.0, 2.0, 4.0];
    let mut worst_d: f64 = 0.0;
    let mut worst_lit: f64 = 0.0;
    let mut worst_rev: f64 = 0.0;
    let mut failure = None;
    for &a in &slopes {
        for &g in &gammas {
            match PulseFamily::for_gate(g, a, a, TAU_US).and_then(|f| Ok((f, phase_decomposition(&f.schedule())?))) {
                Ok((f, ph)) => {
                    worst_d = worst_d.max(ph.gamma_d.abs());
                    worst_lit = worst_lit.max(wrap(ph.gamma_g - (f.beta2 - f.beta1)).abs());
                    worst_rev = worst_rev.max(wrap(ph.gamma_g - (f.beta1 - f.beta2)).abs());
                }
                Err(e) => failure = Some(e),
            }
        }
    }
    if let Some(e) = failure {
        rep.push(Check::failed("phases", e));
    } else {
        rep.push(Check::new(
            "gamma_d = 0",
            worst_d < 1e-6,
            format!("max |gamma_d| = {worst_d:.2e}"),
        ));
        rep.push(Check::new(
            "gamma_g = beta2 - beta1",
            worst_lit < 1e-6,
            format!("max deviation {worst_lit:.3e} (mod 2 pi)"),
        ));
        rep.push(Check::new(
            "gamma_g = beta1 - beta2 (reported, not required)",
            true,
            format!("max deviation {worst_rev:.3e} (mod 2 pi)"),
        ));
    }
    rep
}

/// Areas of the `F >= 0.99` region on a 51 x 51 error grid.
pub fn a9_region_ordering() -> CriterionReport {
    let mut rep = CriterionReport::new("A9", "high-fidelity region ordering");
    let axes = || -> Result<SweepAxes> {
        Ok(SweepAxes::Grid {
            eps: lab::parse_axis("-0.2:0.2:51")?,
            delta_mhz: lab::parse_axis("-4:4:51")?,
        })
    };
    for gate in [GateName::Not, GateName::S] {
        let label = gate.to_string();
        let res = (|| -> Result<Check> {
            let mut areas = Vec::new();
            for (scheme, cp) in [(Scheme::AB0, false), (Scheme::AB4, false), (Scheme::AB4, true)] {
                let req = SweepRequest {
                    gate,
                    scheme,
                    cp,
                    axes: axes()?,
                    tau_us: TAU_US,
                    steps: 4000,
                };
                areas.push(lab::sweep(&req)?.area_above(0.99));
            }
            Ok(Check::new(
                label.clone(),
                areas[0] < areas[1] && areas[1] < areas[2],
                format!(
                    "area ab0 {:.4} < ab4 {:.4} < ab4+cp {:.4}",
                    areas[0], areas[1], areas[2]
                ),
            ))
        })();
        rep.record(label, res);
    }
    rep
}

/// All criteria, in order.
pub fn run_all() -> Vec<CriterionReport> {
    vec![
        a1_ideal_gates(),
        a2_rabi_coefficients(),
        a3_rabi_elimination(),
        a4_detuning_ratios(),
        a5_compensation(),
        a6_oracle_agreement(),
        a7_headline(),
        a8_invariants(),
        a9_region_ordering(),
    ]
}
