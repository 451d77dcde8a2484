//! The four reference gates and their second-order infidelity coefficients.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::oracle::GateOracle;
use crate::propagator::{ErrorModel, SimConfig};
use crate::pulse::PulseFamily;
use crate::qutrit::{decompose_initial, target_unitary, GateSpec, InitialState, QutritState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateName {
    Not,
    Hadamard,
    S,
    T,
}

impl GateName {
    pub const ALL: [GateName; 4] = [GateName::Not, GateName::Hadamard, GateName::S, GateName::T];

    pub fn entry(self) -> CatalogEntry {
        let (theta0, phi0, gamma, theta, phi) = match self {
            GateName::Not => (0.0, 0.0, PI, FRAC_PI_2, 0.0),
            GateName::Hadamard => (0.0, 0.0, PI, FRAC_PI_4, 0.0),
            GateName::S => (FRAC_PI_4, 0.0, FRAC_PI_2, 0.0, 0.0),
            GateName::T => (FRAC_PI_4, 0.0, FRAC_PI_4, 0.0, 0.0),
        };
        CatalogEntry {
            name: self,
            spec: GateSpec::new(gamma, theta, phi),
            init: InitialState::new(theta0, phi0),
        }
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateName::Not => "not",
            GateName::Hadamard => "hadamard",
            GateName::S => "s",
            GateName::T => "t",
        })
    }
}

impl FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "not" | "x" => Ok(GateName::Not),
            "hadamard" | "h" => Ok(GateName::Hadamard),
            "s" => Ok(GateName::S),
            "t" => Ok(GateName::T),
            _ => Err(Error::UnknownGate(s.to_string())),
        }
    }
}

/// Slopes of `beta` against `sin(alpha)` on the two halves of the loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scheme {
    pub a: f64,
    pub b: f64,
}

impl Scheme {
    /// Piecewise-constant azimuth.
    pub const AB0: Scheme = Scheme { a: 0.0, b: 0.0 };
    /// `a = b = 4`, which removes the second-order Rabi error.
    pub const AB4: Scheme = Scheme { a: 4.0, b: 4.0 };

    pub fn is_holonomic(&self) -> bool {
        self.a == self.b
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={},b={}", self.a, self.b)
    }
}

/// A gate together with the input state it is exercised on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: GateName,
    pub spec: GateSpec,
    pub init: InitialState,
}

impl CatalogEntry {
    pub fn target(&self) -> QutritState {
        target_unitary(&self.spec).apply(&self.init.state())
    }

    /// `(c_d, c_b)` of the input in the gate's frame.
    pub fn amplitudes(&self) -> (C64, C64) {
        decompose_initial(&self.init, self.spec.theta, self.spec.phi)
    }

    pub fn family(&self, scheme: Scheme, tau: f64) -> Result<PulseFamily> {
        PulseFamily::for_gate(self.spec.gamma, scheme.a, scheme.b, tau)
    }

    pub fn sim_config(&self, scheme: Scheme, cp: bool, tau: f64, steps: usize) -> Result<SimConfig> {
        SimConfig::for_gate(self.family(scheme, tau)?, self.spec.theta, self.spec.phi, cp, steps)
    }

    pub fn oracle(&self, scheme: Scheme, cp: bool, tau: f64, steps: usize) -> Result<GateOracle> {
        GateOracle::new(self.family(scheme, tau)?, self.spec.theta, self.spec.phi, cp, steps)
    }
}

/// Which systematic error a table coefficient multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Rabi,
    Detuning,
}

/// `f` in `1 - P = x^2 f`, with `x = eps` for Rabi errors and `x = delta tau`
/// for detuning errors.
pub fn table_coefficient(gate: GateName, scheme: Scheme, cp: bool, kind: ErrorKind) -> Result<f64> {
    if !scheme.is_holonomic() {
        return Err(Error::config(format!("no closed-form coefficient for {scheme}")));
    }
    let entry = gate.entry();
    let oracle = entry.oracle(scheme, cp, 1.0, 20_000)?;
    let err = match kind {
        ErrorKind::Rabi => ErrorModel::new(1.0, 0.0)?,
        ErrorKind::Detuning => ErrorModel::new(0.0, 1.0)?,
    };
    let (c_d, c_b) = entry.amplitudes();
    // the second-order sum is a quadratic form, so unit error gives f directly
    Ok(oracle.fidelity(c_d, c_b, &err, entry.spec.gamma)?.infidelity())
}
