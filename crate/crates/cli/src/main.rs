use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nhqc::acceptance;
use nhqc::catalog::{table_coefficient, ErrorKind, GateName, Scheme};
use nhqc::lab::{self, ConfigFile, RunRequest, SweepAxes, SweepRequest};
use nhqc::pulse::DEFAULT_STAGE_SAMPLES;
use nhqc::Error;

const DEFAULT_EPS_AXIS: &str = "-0.2:0.2:41";
const DEFAULT_DELTA_AXIS: &str = "-4:4:41";
const DEFAULT_GRID_EPS: &str = "-0.2:0.2:51";
const DEFAULT_GRID_DELTA: &str = "-4:4:51";

/// Robust holonomic single-qubit gates on a three-level system.
///
/// Detuning is given as a linear frequency in MHz and converted with
/// delta = 2 pi delta_mhz rad/us; times are in us.
#[derive(Parser, Debug)]
#[command(name = "nhqc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one gate and print its fidelity; --out writes the trace CSV.
    Run(Common),
    /// Sweep the Rabi error with zero detuning.
    SweepEps(Common),
    /// Sweep the detuning with zero Rabi error.
    SweepDelta(Common),
    /// Sweep both errors on a grid, epsilon-major.
    Grid(Common),
    /// Print the second-order infidelity coefficients of every gate.
    Tables,
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// not, hadamard, s or t.
    #[arg(long)]
    gate: Option<String>,
    /// Slope of beta against sin(alpha) on the first half.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Slope of beta against sin(alpha) on the second half.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Append the compensation stage (default).
    #[arg(long, overrides_with = "no_cp")]
    cp: bool,
    /// Gate stage only.
    #[arg(long, overrides_with = "cp")]
    no_cp: bool,
    /// Rabi error: a value or start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    /// Detuning in MHz: a value or start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    delta_mhz: Option<String>,
    /// Stage duration in us.
    #[arg(long)]
    tau_us: Option<f64>,
    /// RK4 steps per stage.
    #[arg(long)]
    steps: Option<usize>,
    /// Output file; sweeps print to stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io { .. } => Failure::Io(msg),
            Error::Config(_) | Error::UnknownGate(_) | Error::Domain(_) => Failure::Usage(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Flags merged over the config file.
struct Settings {
    gate: GateName,
    scheme: Scheme,
    cp: bool,
    eps: Option<String>,
    delta_mhz: Option<String>,
    tau_us: f64,
    steps: usize,
    out: Option<PathBuf>,
}

impl Settings {
    fn resolve(c: &Common) -> Result<Self, Failure> {
        let file = match &c.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let gate = match (&c.gate, file.raw("gate")) {
            (Some(g), _) => g.parse()?,
            (None, Some(g)) => g.parse()?,
            (None, None) => GateName::Not,
        };
        let a = c.a.or(file.get("a")?).unwrap_or(Scheme::AB4.a);
        let b = c.b.or(file.get("b")?).unwrap_or(Scheme::AB4.b);
        let cp = if c.cp {
            true
        } else if c.no_cp {
            false
        } else {
            file.get("cp")?.unwrap_or(true)
        };
        Ok(Settings {
            gate,
            scheme: Scheme { a, b },
            cp,
            eps: c.eps.clone().or_else(|| file.raw("eps").map(str::to_string)),
            delta_mhz: c
                .delta_mhz
                .clone()
                .or_else(|| file.raw("delta_mhz").map(str::to_string)),
            tau_us: c.tau_us.or(file.get("tau_us")?).unwrap_or(lab::DEFAULT_TAU_US),
            steps: c.steps.or(file.get("steps")?).unwrap_or(DEFAULT_STAGE_SAMPLES),
            out: c.out.clone().or_else(|| file.raw("out").map(PathBuf::from)),
        })
    }

    fn axis(spec: &Option<String>, default: &str) -> Result<Vec<f64>, Failure> {
        Ok(lab::parse_axis(spec.as_deref().unwrap_or(default))?)
    }

    fn single(spec: &Option<String>, name: &str) -> Result<f64, Failure> {
        match Settings::axis(spec, "0")?.as_slice() {
            [v] => Ok(*v),
            _ => Err(Failure::Usage(format!("run takes a single --{name} value"))),
        }
    }

    fn sweep_request(&self, axes: SweepAxes) -> SweepRequest {
        SweepRequest {
            gate: self.gate,
            scheme: self.scheme,
            cp: self.cp,
            axes,
            tau_us: self.tau_us,
            steps: self.steps,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.12}"))
}

fn write_stdout(text: &str) -> Outcome {
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn run(c: &Common) -> Outcome {
    let s = Settings::resolve(c)?;
    let mut req = RunRequest::new(s.gate);
    req.scheme = s.scheme;
    req.cp = s.cp;
    req.eps = Settings::single(&s.eps, "eps")?;
    req.delta_mhz = Settings::single(&s.delta_mhz, "delta-mhz")?;
    req.tau_us = s.tau_us;
    req.steps = s.steps;
    req.stride = gcd(s.steps, 100).max(1);
    let sum = lab::run_gate(&req)?;
    let pops = sum.trace.final_state.populations();
    let mut text = String::new();
    text.push_str(&format!(
        "gate {} {} cp={} eps={} delta_mhz={} (delta={} rad/us) tau_us={} steps={}\n",
        req.gate,
        req.scheme,
        req.cp,
        req.eps,
        req.delta_mhz,
        lab::delta_rad_per_us(req.delta_mhz),
        req.tau_us,
        req.steps
    ));
    text.push_str(&format!("fidelity_sim    {:.12}\n", sum.fidelity_sim));
    text.push_str(&format!("fidelity_oracle {}\n", fmt_opt(sum.fidelity_oracle)));
    text.push_str(&format!(
        "populations p0={:.6} p1={:.6} pe={:.6}\n",
        pops[0], pops[1], pops[2]
    ));
    if let Some(path) = &s.out {
        lab::emit_trace_csv(&sum.trace, path)?;
        text.push_str(&format!("trace written to {}\n", path.display()));
    }
    write_stdout(&text)
}

fn sweep(c: &Common, kind: &str) -> Outcome {
    let s = Settings::resolve(c)?;
    let axes = match kind {
        "eps" => SweepAxes::Epsilon(Settings::axis(&s.eps, DEFAULT_EPS_AXIS)?),
        "delta" => SweepAxes::DeltaMhz(Settings::axis(&s.delta_mhz, DEFAULT_DELTA_AXIS)?),
        _ => SweepAxes::Grid {
            eps: Settings::axis(&s.eps, DEFAULT_GRID_EPS)?,
            delta_mhz: Settings::axis(&s.delta_mhz, DEFAULT_GRID_DELTA)?,
        },
    };
    let res = lab::sweep(&s.sweep_request(axes))?;
    match &s.out {
        Some(path) => emit(&res, path),
        None => write_stdout(&lab::csv::render_csv(&res)),
    }
}

fn emit(res: &lab::SweepResult, path: &Path) -> Outcome {
    lab::emit_csv(res, path)?;
    let failed = res
        .points
        .iter()
        .filter(|p| p.status == lab::PointStatus::IntegratorFailure)
        .count();
    eprintln!(
        "{} points written to {} in {:.2} s",
        res.points.len(),
        path.display(),
        res.elapsed.as_secs_f64()
    );
    if failed > 0 {
        eprintln!("{failed} points failed to integrate");
    }
    Ok(())
}

fn tables() -> Outcome {
    let mut text = String::from("Rabi error, 1-F = eps^2 f\n");
    text.push_str(&format!("{:<10}{:>16}{:>16}\n", "gate", "a=b=0", "a=b=4"));
    for g in GateName::ALL {
        text.push_str(&format!(
            "{:<10}{:>16.6e}{:>16.6e}\n",
            g.to_string(),
            table_coefficient(g, Scheme::AB0, false, ErrorKind::Rabi)?,
            table_coefficient(g, Scheme::AB4, false, ErrorKind::Rabi)?
        ));
    }
    text.push_str("\nDetuning error, 1-F = (delta tau)^2 f\n");
    text.push_str(&format!(
        "{:<10}{:>16}{:>16}{:>16}{:>16}\n",
        "gate", "a=b=0", "a=b=0 cp", "a=b=4", "a=b=4 cp"
    ));
    for g in GateName::ALL {
        let mut row = format!("{:<10}", g.to_string());
        for (scheme, cp) in [
            (Scheme::AB0, false),
            (Scheme::AB0, true),
            (Scheme::AB4, false),
            (Scheme::AB4, true),
        ] {
            row.push_str(&format!(
                "{:>16.6e}",
                table_coefficient(g, scheme, cp, ErrorKind::Detuning)?
            ));
        }
        row.push('\n');
        text.push_str(&row);
    }
    write_stdout(&text)
}

fn selftest() -> Outcome {
    let reports = acceptance::run_all();
    let mut text = String::new();
    for r in &reports {
        text.push_str(&r.to_string());
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.id).collect();
    text.push_str(&format!(
        "{}/{} criteria passed\n",
        reports.len() - failed.len(),
        reports.len()
    ));
    write_stdout(&text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("failed: {}", failed.join(", "))))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Run(c) => run(c),
        Command::SweepEps(c) => sweep(c, "eps"),
        Command::SweepDelta(c) => sweep(c, "delta"),
        Command::Grid(c) => sweep(c, "grid"),
        Command::Tables => tables(),
        Command::Selftest => selftest(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nhqc: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
