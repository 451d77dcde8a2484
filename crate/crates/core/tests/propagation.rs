use std::f64::consts::PI;

use nhqc::propagator::{
    convergence_probe, evolve, final_state, propagator_matrix, sample_states, ErrorModel, SimConfig, StagePlan,
};
use nhqc::pulse::PulseFamily;
use nhqc::quadrature::simpson;
use nhqc::qutrit::{make_dark_bright, InitialState, QutritOperator, QutritState};
use num_complex::Complex64 as C64;

const TAU: f64 = 0.1;
const HEADLINE_F: f64 = 0.998_588_076_252;

fn not_config(a: f64, cp: bool, steps: usize) -> SimConfig {
    let fam = PulseFamily::for_gate(PI, a, a, TAU).unwrap();
    SimConfig::for_gate(fam, PI / 2.0, 0.0, cp, steps).unwrap()
}

fn errors() -> Vec<ErrorModel> {
    [(0.0, 0.0), (0.2, 0.0), (0.0, 12.5), (-0.15, -20.0), (0.3, 40.0)]
        .into_iter()
        .map(|(e, d)| ErrorModel::new(e, d).unwrap())
        .collect()
}

/// Propagating |b> must follow |chi+(t)> = cos(a/2)|b> + sin(a/2)e^{i beta}|e>
/// as a projector at every sampled time.
#[test]
fn waveforms_track_the_designed_trajectory() {
    for a in [0.0, 2.0, 4.0] {
        let fam = PulseFamily::new(a, a, 0.0, -PI / 3.0, TAU).unwrap();
        let (theta, phi) = (1.1, 0.4);
        let cfg = SimConfig::new(vec![StagePlan::gate(fam, theta, phi)], 20_000, 50).unwrap();
        let frame = make_dark_bright(theta, phi);
        let sched = fam.schedule();
        let mut worst: f64 = 0.0;
        for (t, psi) in sample_states(&frame.bright, &cfg, &ErrorModel::ideal()) {
            let p = sched.at(t);
            let chi = frame.bright.superpose(
                C64::new((0.5 * p.alpha).cos(), 0.0),
                &QutritState::excited(),
                C64::from_polar((0.5 * p.alpha).sin(), p.beta),
            );
            let rho = QutritOperator::outer(&psi, &psi);
            let want = QutritOperator::outer(&chi, &chi);
            worst = worst.max(rho.max_abs_diff(&want));
        }
        assert!(worst < 1e-5, "a = {a}: projector mismatch {worst:.3e}");
    }
}

#[test]
fn compensation_stage_is_identity() {
    for a in [0.0, 4.0] {
        let fam = PulseFamily::for_gate(PI, a, a, TAU).unwrap();
        let gate = StagePlan::gate(fam, 0.7, 1.3);
        let cfg = SimConfig::new(vec![StagePlan::compensating(&gate)], 20_000, 20_000).unwrap();
        let u = propagator_matrix(&cfg, &ErrorModel::ideal());
        let d = u.phase_gauged_distance(&QutritOperator::identity());
        assert!(d < 1e-6, "a = {a}: distance {d:.3e}");
    }
}

#[test]
fn ideal_not_reaches_target() {
    let cfg = not_config(4.0, false, 20_000);
    let tr = evolve(
        &QutritState::ground0(),
        &cfg,
        &ErrorModel::ideal(),
        &QutritState::ground1(),
    )
    .unwrap();
    assert!(tr.final_fidelity() > 1.0 - 1e-9);
}

#[test]
fn dark_state_is_immune() {
    for (theta, phi) in [(PI / 2.0, 0.0), (0.0, 0.0), (2.1, -0.7)] {
        let fam = PulseFamily::for_gate(PI, 4.0, 4.0, TAU).unwrap();
        let cfg = SimConfig::new(vec![StagePlan::gate(fam, theta, phi)], 4000, 40).unwrap();
        let d = make_dark_bright(theta, phi).dark;
        for err in errors() {
            let tr = evolve(&d, &cfg, &err, &d).unwrap();
            let worst = tr.fidelity.iter().map(|f| 1.0 - f).fold(0.0, f64::max);
            assert!(worst < 1e-10, "{err:?}: {worst:.3e}");
        }
    }
}

#[test]
fn propagator_is_unitary() {
    for cp in [false, true] {
        let cfg = not_config(4.0, cp, 20_000);
        for err in errors() {
            let u = propagator_matrix(&cfg, &err);
            assert!(u.unitarity_defect() < 1e-7, "{err:?}: {:.3e}", u.unitarity_defect());
        }
    }
}

#[test]
fn norm_is_conserved_along_the_trace() {
    let cfg = not_config(4.0, true, 20_000).with_stride(100).unwrap();
    let init = InitialState::new(0.3, 0.8).state();
    for err in errors() {
        let tr = evolve(&init, &cfg, &err, &QutritState::ground1()).unwrap();
        for k in 0..tr.len() {
            let total = tr.p0[k] + tr.p1[k] + tr.pe[k];
            assert!((total - 1.0).abs() < 1e-8, "{err:?} at t = {}", tr.times[k]);
        }
    }
}

/// Global error against a fine reference falls as N^-4.
#[test]
fn rk4_converges_at_fourth_order() {
    let init = QutritState::ground0();
    let err = ErrorModel::ideal();
    let reference = final_state(&init, &not_config(4.0, false, 160_000), &err).unwrap();
    let ns = [2500usize, 5000, 10_000, 20_000];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let psi = final_state(&init, &not_config(4.0, false, n), &err).unwrap();
            (psi.as_vector() - reference.as_vector()).norm()
        })
        .collect();
    let slope = -(errs[3] / errs[0]).ln() / (ns[3] as f64 / ns[0] as f64).ln();
    assert!((slope - 4.0).abs() < 0.2, "slope {slope:.3}, errors {errs:?}");
}

#[test]
fn stages_compose() {
    let cfg = not_config(4.0, true, 10_000);
    let init = InitialState::new(0.4, 1.1).state();
    let err = ErrorModel::new(0.12, -9.0).unwrap();
    let whole = final_state(&init, &cfg, &err).unwrap();
    let mid = final_state(&init, &cfg.slice(0..1), &err).unwrap();
    let split = final_state(&mid, &cfg.slice(1..2), &err).unwrap();
    assert!((whole.as_vector() - split.as_vector()).norm() < 1e-12);
}

/// int |c_e|^2 dt = |c_b|^2 int sin^2(alpha/2) dt under the ideal drive.
#[test]
fn integrated_excited_population() {
    let fam = PulseFamily::for_gate(PI / 2.0, 4.0, 4.0, TAU).unwrap();
    let (theta, phi) = (0.9, 0.3);
    let cfg = SimConfig::new(vec![StagePlan::gate(fam, theta, phi)], 20_000, 1).unwrap();
    let init = InitialState::new(0.6, 1.7);
    let (_, c_b) = nhqc::qutrit::decompose_initial(&init, theta, phi);
    let tr = evolve(&init.state(), &cfg, &ErrorModel::ideal(), &QutritState::ground0()).unwrap();
    let h = tr.times[1] - tr.times[0];
    let got = simpson(&tr.pe, h);
    let want = c_b.norm_sqr() * TAU / 2.0;
    assert!((got - want).abs() < 1e-6 * TAU, "{got} vs {want}");
}

#[test]
fn convergence_probe_passes_on_ideal_not() {
    let rep = convergence_probe(
        &QutritState::ground0(),
        &not_config(4.0, false, 20_000),
        &ErrorModel::ideal(),
        &QutritState::ground1(),
    )
    .unwrap();
    assert!(rep.passed, "{rep:?}");
}

#[test]
fn convergence_probe_difference_shrinks() {
    let err = ErrorModel::new(0.2, 2.0 * PI * 2.0).unwrap();
    let diffs: Vec<f64> = [1000, 2000, 4000]
        .into_iter()
        .map(|n| {
            convergence_probe(
                &QutritState::ground0(),
                &not_config(4.0, true, n),
                &err,
                &QutritState::ground1(),
            )
            .unwrap()
            .difference
        })
        .collect();
    assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{diffs:?}");
}

#[test]
fn headline_regression() {
    let cfg = not_config(4.0, true, 40_000);
    let err = ErrorModel::new(0.2, 2.0 * PI * 2.0).unwrap();
    let tr = evolve(&QutritState::ground0(), &cfg, &err, &QutritState::ground1()).unwrap();
    assert!(
        (tr.final_fidelity() - HEADLINE_F).abs() < 1e-11,
        "{:.15}",
        tr.final_fidelity()
    );
}
