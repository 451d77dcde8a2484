use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{delta_rad_per_us, MAX_SWEEP_POINTS};
use crate::catalog::{GateName, Scheme};
use crate::error::{Error, Result};
use crate::propagator::{final_state, ErrorModel};
use crate::qutrit::state_fidelity;

/// Which errors vary across a sweep. The other error is held at zero for the
/// one-dimensional sweeps.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxes {
    Epsilon(Vec<f64>),
    DeltaMhz(Vec<f64>),
    Grid { eps: Vec<f64>, delta_mhz: Vec<f64> },
}

impl SweepAxes {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxes::Epsilon(_) => "eps",
            SweepAxes::DeltaMhz(_) => "delta",
            SweepAxes::Grid { .. } => "grid",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxes::Epsilon(v) | SweepAxes::DeltaMhz(v) => v.len(),
            SweepAxes::Grid { eps, delta_mhz } => eps.len().saturating_mul(delta_mhz.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(eps, delta_mhz)` pairs, epsilon-major.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self {
            SweepAxes::Epsilon(v) => v.iter().map(|&e| (e, 0.0)).collect(),
            SweepAxes::DeltaMhz(v) => v.iter().map(|&d| (0.0, d)).collect(),
            SweepAxes::Grid { eps, delta_mhz } => eps
                .iter()
                .flat_map(|&e| delta_mhz.iter().map(move |&d| (e, d)))
                .collect(),
        }
    }

    fn lists(&self) -> Vec<(&'static str, &[f64])> {
        match self {
            SweepAxes::Epsilon(v) => vec![("eps", v)],
            SweepAxes::DeltaMhz(v) => vec![("delta_mhz", v)],
            SweepAxes::Grid { eps, delta_mhz } => vec![("eps", eps), ("delta_mhz", delta_mhz)],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRequest {
    pub gate: GateName,
    pub scheme: Scheme,
    pub cp: bool,
    pub axes: SweepAxes,
    pub tau_us: f64,
    pub steps: usize,
}

impl SweepRequest {
    pub fn validate(&self) -> Result<()> {
        for (name, list) in self.axes.lists() {
            if let Some(bad) = list.iter().find(|v| !v.is_finite()) {
                return Err(Error::config(format!("{name} axis holds non-finite value {bad}")));
            }
            if list.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::config(format!("{name} axis must be strictly increasing")));
            }
        }
        if self.axes.len() > MAX_SWEEP_POINTS {
            return Err(Error::config(format!(
                "{} points requested, at most {MAX_SWEEP_POINTS} allowed",
                self.axes.len()
            )));
        }
        if !(self.tau_us > 0.0 && self.tau_us.is_finite()) {
            return Err(Error::config(format!("tau must be positive, got {}", self.tau_us)));
        }
        Ok(())
    }

    /// The oracle applies when equal slopes make the ideal run hit the target.
    pub fn oracle_applies(&self) -> bool {
        self.scheme.is_holonomic()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    OracleNa,
    IntegratorFailure,
}

impl fmt::Display for PointStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointStatus::Ok => "ok",
            PointStatus::OracleNa => "oracle-na",
            PointStatus::IntegratorFailure => "integrator-failure",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub eps: f64,
    pub delta_mhz: f64,
    pub delta_rad_per_us: f64,
    pub fidelity_sim: Option<f64>,
    pub fidelity_oracle: Option<f64>,
    pub status: PointStatus,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub request: SweepRequest,
    pub points: Vec<SweepPoint>,
    pub elapsed: Duration,
}

impl SweepResult {
    /// Fraction of points whose simulated fidelity reaches `threshold`.
    pub fn area_above(&self, threshold: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let hits = self
            .points
            .iter()
            .filter(|p| p.fidelity_sim.is_some_and(|f| f >= threshold))
            .count();
        hits as f64 / self.points.len() as f64
    }
}

/// Simulates every point of `req` in parallel; results keep the
/// epsilon-major order of the axes. A point whose integration fails is
/// recorded as such and the sweep carries on.
pub fn sweep(req: &SweepRequest) -> Result<SweepResult> {
    req.validate()?;
    let start = Instant::now();
    let entry = req.gate.entry();
    let cfg = entry.sim_config(req.scheme, req.cp, req.tau_us, req.steps)?;
    let oracle = if req.oracle_applies() {
        Some(entry.oracle(req.scheme, req.cp, req.tau_us, req.steps)?)
    } else {
        None
    };
    let init = entry.init.state();
    let target = entry.target();
    let (c_d, c_b) = entry.amplitudes();
    let gamma = entry.spec.gamma;
    let points = req
        .axes
        .points()
        .into_par_iter()
        .map(|(eps, delta_mhz)| -> Result<SweepPoint> {
            let delta = delta_rad_per_us(delta_mhz);
            let err = ErrorModel::new(eps, delta)?;
            let fidelity_oracle = match &oracle {
                Some(o) => Some(o.fidelity(c_d, c_b, &err, gamma)?.p),
                None => None,
            };
            let (fidelity_sim, status) = match final_state(&init, &cfg, &err) {
                Ok(psi) => {
                    let status = if fidelity_oracle.is_some() {
                        PointStatus::Ok
                    } else {
                        PointStatus::OracleNa
                    };
                    (Some(state_fidelity(&psi, &target)), status)
                }
                Err(Error::Integrator { .. }) => (None, PointStatus::IntegratorFailure),
                Err(e) => return Err(e),
            };
            Ok(SweepPoint {
                eps,
                delta_mhz,
                delta_rad_per_us: delta,
                fidelity_sim,
                fidelity_oracle,
                status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        request: req.clone(),
        points,
        elapsed: start.elapsed(),
    })
}

/// Parses `value` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_axis(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::config(format!("'{s}' is not a number in axis '{spec}'")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [start, stop, count] => {
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("'{count}' is not a point count in axis '{spec}'")))?;
            match n {
                0 => Ok(Vec::new()),
                1 => Ok(vec![a]),
                _ => Ok((0..n)
                    .map(|k| {
                        if k + 1 == n {
                            b
                        } else {
                            a + (b - a) * (k as f64 / (n - 1) as f64)
                        }
                    })
                    .collect()),
            }
        }
        _ => Err(Error::config(format!(
            "axis '{spec}' is neither a value nor start:stop:count"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(axes: SweepAxes) -> SweepRequest {
        SweepRequest {
            gate: GateName::Not,
            scheme: Scheme::AB4,
            cp: true,
            axes,
            tau_us: 0.1,
            steps: 1000,
        }
    }

    #[test]
    fn axis_specs() {
        assert_eq!(parse_axis("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_axis("-1:1:5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(parse_axis("0:1:0").unwrap(), Vec::<f64>::new());
        assert!(parse_axis("0:1").is_err());
        assert!(parse_axis("a:1:3").is_err());
        assert!(parse_axis("0:1:-2").is_err());
    }

    #[test]
    fn validation() {
        assert!(request(SweepAxes::Epsilon(vec![0.0, 0.1])).validate().is_ok());
        assert!(request(SweepAxes::Epsilon(vec![0.1, 0.1])).validate().is_err());
        assert!(request(SweepAxes::DeltaMhz(vec![1.0, -1.0])).validate().is_err());
        let big: Vec<f64> = (0..1001).map(f64::from).collect();
        let grid = SweepAxes::Grid {
            eps: big.clone(),
            delta_mhz: big,
        };
        assert!(request(grid).validate().is_err());
    }

    #[test]
    fn grid_is_epsilon_major() {
        let axes = SweepAxes::Grid {
            eps: vec![0.0, 0.1],
            delta_mhz: vec![-1.0, 0.0, 1.0],
        };
        let pts = axes.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], (0.0, -1.0));
        assert_eq!(pts[2], (0.0, 1.0));
        assert_eq!(pts[3], (0.1, -1.0));
    }

    #[test]
    fn unequal_slopes_mark_oracle_na() {
        let mut req = request(SweepAxes::Epsilon(vec![0.0, 0.05]));
        req.scheme = Scheme { a: 1.0, b: 3.0 };
        let res = sweep(&req).unwrap();
        assert!(res
            .points
            .iter()
            .all(|p| p.status == PointStatus::OracleNa && p.fidelity_oracle.is_none()));
        assert!(res.points.iter().all(|p| p.fidelity_sim.is_some()));
    }
}
