//! Three-level state and operator algebra over the bare basis `{|0>, |1>, |e>}`.
//!
//! The qubit lives in `span{|0>, |1>}`; `|e>` is the auxiliary excited level.
//! Hamiltonians are expressed in angular frequency (rad/us) with hbar = 1, so
//! a propagator over a duration in microseconds is dimensionless.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Index of the excited level in the bare basis.
pub const EXCITED: usize = 2;

/// Normalized amplitude vector `c0|0> + c1|1> + ce|e>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QutritState(Vector3<C64>);

impl QutritState {
    /// Builds a state, rejecting inputs whose norm differs from one by more
    /// than `1e-12`.
    pub fn new(c0: C64, c1: C64, ce: C64) -> Result<Self> {
        let state = QutritState(Vector3::new(c0, c1, ce));
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(state)
    }

    /// Wraps a raw vector without checking its norm. Used for states produced
    /// by the integrator, which may drift within its tolerance.
    pub fn from_vector(amps: Vector3<C64>) -> Self {
        QutritState(amps)
    }

    pub fn basis(index: usize) -> Self {
        let mut v = Vector3::zeros();
        v[index] = C64::new(1.0, 0.0);
        QutritState(v)
    }

    pub fn ground0() -> Self {
        Self::basis(0)
    }

    pub fn ground1() -> Self {
        Self::basis(1)
    }

    pub fn excited() -> Self {
        Self::basis(EXCITED)
    }

    pub fn c0(&self) -> C64 {
        self.0[0]
    }

    pub fn c1(&self) -> C64 {
        self.0[1]
    }

    pub fn ce(&self) -> C64 {
        self.0[EXCITED]
    }

    pub fn as_vector(&self) -> &Vector3<C64> {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QutritState) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.0[0].norm_sqr(), self.0[1].norm_sqr(), self.0[2].norm_sqr()]
    }

    pub fn scale(&self, factor: C64) -> Self {
        QutritState(self.0 * factor)
    }

    /// `a|self> + b|other>` with no renormalization.
    pub fn superpose(&self, a: C64, other: &QutritState, b: C64) -> Self {
        QutritState(self.0 * a + other.0 * b)
    }
}

impl fmt::Display for QutritState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.6}{:+.6}i)|0> + ({:.6}{:+.6}i)|1> + ({:.6}{:+.6}i)|e>",
            self.0[0].re, self.0[0].im, self.0[1].re, self.0[1].im, self.0[2].re, self.0[2].im
        )
    }
}

/// A 3x3 complex matrix acting on [`QutritState`]s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QutritOperator(Matrix3<C64>);

impl QutritOperator {
    pub fn from_matrix(m: Matrix3<C64>) -> Self {
        QutritOperator(m)
    }

    pub fn zero() -> Self {
        QutritOperator(Matrix3::zeros())
    }

    pub fn identity() -> Self {
        QutritOperator(Matrix3::identity())
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &QutritState, bra: &QutritState) -> Self {
        QutritOperator(ket.0 * bra.0.adjoint())
    }

    /// Builds an operator whose columns are the images of `|0>`, `|1>`, `|e>`.
    pub fn from_columns(cols: [QutritState; 3]) -> Self {
        QutritOperator(Matrix3::from_columns(&[cols[0].0, cols[1].0, cols[2].0]))
    }

    pub fn matrix(&self) -> &Matrix3<C64> {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        QutritOperator(self.0.adjoint())
    }

    pub fn apply(&self, psi: &QutritState) -> QutritState {
        QutritState(self.0 * psi.0)
    }

    /// Largest entry of `|A - B|`.
    pub fn max_abs_diff(&self, other: &QutritOperator) -> f64 {
        (self.0 - other.0).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `||H - H^dagger||_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `||U^dagger U - I||_max`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    /// `min_phi ||self - e^{i phi} other||_F`, the distance between two
    /// operators with the global phase gauged away.
    pub fn phase_gauged_distance(&self, other: &QutritOperator) -> f64 {
        let a = self.0.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let b = other.0.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let overlap = (other.0.adjoint() * self.0).trace().norm();
        (a + b - 2.0 * overlap).max(0.0).sqrt()
    }
}

impl Mul for QutritOperator {
    type Output = QutritOperator;

    fn mul(self, rhs: QutritOperator) -> QutritOperator {
        QutritOperator(self.0 * rhs.0)
    }
}

/// Holonomic gate parameters: phase `gamma` about the Bloch axis with polar
/// angle `theta` and azimuth `phi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateSpec {
    pub gamma: f64,
    pub theta: f64,
    pub phi: f64,
}

impl GateSpec {
    pub fn new(gamma: f64, theta: f64, phi: f64) -> Self {
        GateSpec { gamma, theta, phi }
    }

    /// Rotation axis `n = (sin t cos p, sin t sin p, cos t)`.
    pub fn axis(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Computational-subspace input `cos t0 |0> + sin t0 e^{i p0} |1>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialState {
    pub theta0: f64,
    pub phi0: f64,
}

impl InitialState {
    pub fn new(theta0: f64, phi0: f64) -> Self {
        InitialState { theta0, phi0 }
    }

    pub fn state(&self) -> QutritState {
        let (s, c) = self.theta0.sin_cos();
        QutritState(Vector3::new(
            C64::new(c, 0.0),
            C64::from_polar(s, self.phi0),
            C64::new(0.0, 0.0),
        ))
    }
}

/// Dark and bright vectors of the drive for a given `(theta, phi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DarkBrightFrame {
    pub dark: QutritState,
    pub bright: QutritState,
}

/// `|d> = cos(t/2)|0> + sin(t/2)e^{ip}|1>`, `|b> = sin(t/2)|0> - cos(t/2)e^{ip}|1>`.
pub fn make_dark_bright(theta: f64, phi: f64) -> DarkBrightFrame {
    let (s, c) = (theta / 2.0).sin_cos();
    let e = C64::from_polar(1.0, phi);
    let zero = C64::new(0.0, 0.0);
    DarkBrightFrame {
        dark: QutritState(Vector3::new(C64::new(c, 0.0), e * s, zero)),
        bright: QutritState(Vector3::new(C64::new(s, 0.0), -e * c, zero)),
    }
}

/// `U = |d><d| + e^{i gamma}|b><b| + |e><e|`.
pub fn target_unitary(spec: &GateSpec) -> QutritOperator {
    let frame = make_dark_bright(spec.theta, spec.phi);
    let e = QutritState::excited();
    let mut u = QutritOperator::outer(&frame.dark, &frame.dark).0
        + QutritOperator::outer(&frame.bright, &frame.bright).0 * C64::from_polar(1.0, spec.gamma);
    u += QutritOperator::outer(&e, &e).0;
    QutritOperator(u)
}

/// Amplitudes `(c_d, c_b)` of `init` in the dark/bright frame `(theta, phi)`.
pub fn decompose_initial(init: &InitialState, theta: f64, phi: f64) -> (C64, C64) {
    let (s0, c0) = init.theta0.sin_cos();
    let (s, c) = (theta / 2.0).sin_cos();
    let rel = C64::from_polar(1.0, init.phi0 - phi);
    let c_d = c0 * c + rel * (s0 * s);
    let c_b = c0 * s - rel * (s0 * c);
    (c_d, c_b)
}

/// `|<target|psi>|^2`.
pub fn state_fidelity(psi: &QutritState, target: &QutritState) -> f64 {
    target.inner(psi).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn assert_state_eq(a: &QutritState, b: &QutritState) {
        for k in 0..3 {
            assert_abs_diff_eq!(a.0[k].re, b.0[k].re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.0[k].im, b.0[k].im, epsilon = 1e-12);
        }
    }

    #[test]
    fn dark_bright_examples() {
        let f = make_dark_bright(0.0, 0.0);
        assert_state_eq(&f.dark, &QutritState::ground0());
        assert_state_eq(&f.bright, &QutritState::ground1().scale(c(-1.0)));

        let f = make_dark_bright(PI / 2.0, 0.0);
        let plus = QutritState::new(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)).unwrap();
        let minus = QutritState::new(c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)).unwrap();
        assert_state_eq(&f.dark, &plus);
        assert_state_eq(&f.bright, &minus);

        let f = make_dark_bright(PI, 0.0);
        assert_state_eq(&f.dark, &QutritState::ground1());
        assert_state_eq(&f.bright, &QutritState::ground0());
    }

    #[test]
    fn state_rejects_bad_norm() {
        assert!(matches!(
            QutritState::new(c(1.0), c(1.0), c(0.0)),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn identity_gate() {
        let u = target_unitary(&GateSpec::new(0.0, 0.7, 1.3));
        assert!(u.max_abs_diff(&QutritOperator::identity()) < 1e-12);
    }

    #[test]
    fn not_gate_flips() {
        let u = target_unitary(&GateSpec::new(PI, PI / 2.0, 0.0));
        let out = u.apply(&QutritState::ground0());
        assert_abs_diff_eq!(out.c1().norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.c0().norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn s_gate_phase() {
        let u = target_unitary(&GateSpec::new(PI / 2.0, 0.0, 0.0));
        let plus = QutritState::new(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)).unwrap();
        let want = QutritState::new(c(FRAC_1_SQRT_2), C64::new(0.0, FRAC_1_SQRT_2), c(0.0)).unwrap();
        assert_abs_diff_eq!(state_fidelity(&u.apply(&plus), &want), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn su2_form_of_target() {
        // Restricted to the qubit, U = e^{ig/2} exp(-i g/2 n.sigma).
        let spec = GateSpec::new(0.9, 1.1, -0.4);
        let u = target_unitary(&spec);
        let [nx, ny, nz] = spec.axis();
        let (s, co) = (spec.gamma / 2.0).sin_cos();
        let g = C64::from_polar(1.0, spec.gamma / 2.0);
        let want = [
            [g * C64::new(co, -s * nz), g * C64::new(-s * ny, -s * nx)],
            [g * C64::new(s * ny, -s * nx), g * C64::new(co, s * nz)],
        ];
        for (r, row) in want.iter().enumerate() {
            for (col, w) in row.iter().enumerate() {
                assert_abs_diff_eq!((u.entry(r, col) - w).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let (cd, cb) = decompose_initial(&InitialState::new(0.0, 0.0), 0.0, 0.0);
        assert_abs_diff_eq!(cd.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cb.norm(), 0.0, epsilon = 1e-15);

        let (cd, cb) = decompose_initial(&InitialState::new(0.0, 0.0), PI / 2.0, 0.0);
        assert_abs_diff_eq!(cd.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(cb.re, FRAC_1_SQRT_2, epsilon = 1e-15);

        let (cd, cb) = decompose_initial(&InitialState::new(PI / 4.0, 0.0), 0.0, 0.0);
        assert_abs_diff_eq!(cd.re, (PI / 4.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(cb.re, -(PI / 4.0).sin(), epsilon = 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let a = QutritState::ground0();
        assert_abs_diff_eq!(state_fidelity(&a, &a), 1.0);
        assert_abs_diff_eq!(state_fidelity(&a, &QutritState::ground1()), 0.0);
        let plus = QutritState::new(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)).unwrap();
        assert_abs_diff_eq!(state_fidelity(&plus, &a), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn phase_gauged_distance_ignores_global_phase() {
        let u = target_unitary(&GateSpec::new(1.0, 0.3, 0.2));
        let v = QutritOperator::from_matrix(u.matrix() * C64::from_polar(1.0, 2.1));
        assert!(u.phase_gauged_distance(&v) < 1e-7);
        assert!(u.phase_gauged_distance(&QutritOperator::identity()) > 0.1);
    }

    proptest! {
        #[test]
        fn frame_is_orthonormal(theta in -10.0f64..10.0, phi in -10.0f64..10.0) {
            let f = make_dark_bright(theta, phi);
            prop_assert!((f.dark.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((f.bright.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!(f.dark.inner(&f.bright).norm() < 1e-12);
            prop_assert!(f.dark.ce().norm() == 0.0 && f.bright.ce().norm() == 0.0);
        }

        #[test]
        fn target_is_unitary_and_fixes_excited(g in -7.0f64..7.0, t in -7.0f64..7.0, p in -7.0f64..7.0) {
            let u = target_unitary(&GateSpec::new(g, t, p));
            prop_assert!(u.unitarity_defect() < 1e-12);
            let e = u.apply(&QutritState::excited());
            prop_assert!((e.ce() - C64::new(1.0, 0.0)).norm() < 1e-12);
        }

        #[test]
        fn decomposition_recomposes(t0 in -7.0f64..7.0, p0 in -7.0f64..7.0, t in -7.0f64..7.0, p in -7.0f64..7.0) {
            let init = InitialState::new(t0, p0);
            let (cd, cb) = decompose_initial(&init, t, p);
            prop_assert!((cd.norm_sqr() + cb.norm_sqr() - 1.0).abs() < 1e-12);
            let f = make_dark_bright(t, p);
            let back = f.dark.superpose(cd, &f.bright, cb);
            let want = init.state();
            for k in 0..3 {
                prop_assert!((back.as_vector()[k] - want.as_vector()[k]).norm() < 1e-12);
            }
        }

        #[test]
        fn fidelity_is_phase_invariant(t0 in -7.0f64..7.0, p0 in -7.0f64..7.0, phase in -7.0f64..7.0) {
            let a = InitialState::new(t0, p0).state();
            let b = InitialState::new(0.3, 1.1).state();
            let f = state_fidelity(&a, &b);
            let g = C64::from_polar(1.0, phase);
            prop_assert!((state_fidelity(&a.scale(g), &b) - f).abs() < 1e-12);
            prop_assert!((state_fidelity(&a, &b.scale(g)) - f).abs() < 1e-12);
            prop_assert!(f <= 1.0 + 1e-12);
        }
    }
}
