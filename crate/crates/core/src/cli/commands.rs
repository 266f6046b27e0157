use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use sha2::{Digest, Sha256};

use super::files::{
    parse_control, to_json_string, DensityJson, FieldError, MatrixJson, ReportFile, SimulationFile,
    StateJson, SystemFile,
};
use crate::criteria::{analyze, ControllabilityReport, Tolerances};
use crate::error::Error;
use crate::lie::closure_dim_from_bracket_table;
use crate::linalg::C64;
use crate::models::{diagonal_pair, oscillator_bracket_table, random_dense, truncated_oscillator};
use crate::simulator::{
    propagate_density, propagate_state, propagator, DensityMatrix, PiecewiseConstantControl, QuantumState,
};
use crate::system::ControlSystem;

pub const TOOL: &str = "qlie";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    Invalid = 2,
    Consistency = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            Self::Invalid(_) => Exit::Invalid,
            Self::Consistency(_) => Exit::Consistency,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_consistency() {
            Self::Consistency(e.to_string())
        } else {
            Self::Invalid(e.to_string())
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        Self::Invalid(e.to_string())
    }
}

fn read(path: &Path) -> Result<(String, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let hex: String = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    let digest = format!("sha256:{hex}");
    let text = String::from_utf8(bytes).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    Ok((text, digest))
}

fn write_json(path: &Path, json: &str) -> Result<(), CliError> {
    std::fs::write(path, json).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<(SystemFile, ControlSystem, String), CliError> {
    let (text, digest) = read(path)?;
    let file = SystemFile::parse(&text)?;
    let sys = file.to_system()?;
    Ok((file, sys, digest))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Human-readable report.
pub fn render_report(r: &ControllabilityReport, out: &mut dyn Write) -> std::io::Result<()> {
    let n = r.n;
    writeln!(out, "dimension n: {n}")?;
    writeln!(
        out,
        "value set: {} points in [{}, {}]",
        r.value_set.len(),
        r.value_set.first().unwrap_or(&0.0),
        r.value_set.last().unwrap_or(&0.0)
    )?;
    writeln!(
        out,
        "functionals {{1, F1..FL}} independent: {} (effective count {}, witnesses {:?}, condition {:.3e})",
        yes_no(r.functional_independent),
        r.effective_count,
        r.witnesses,
        r.witness_condition
    )?;
    writeln!(out, "lie algebra dimension: {} (n^2 = {})", r.lie_dim, n * n)?;
    writeln!(
        out,
        "traceless lie algebra dimension: {} (n^2 - 1 = {})",
        r.traceless_lie_dim,
        n * n - 1
    )?;
    writeln!(out, "nonzero trace: {}", yes_no(r.any_nonzero_trace))?;
    writeln!(
        out,
        "centralizer dimension: {} (codimension {}, target 2n - 2 = {})",
        r.centralizer_dim, r.wavefunction_codimension, r.wavefunction_target_codimension
    )?;
    writeln!(out, "full algebra u(n): {}", yes_no(r.full_algebra))?;
    writeln!(
        out,
        "density-matrix controllable: {} (dimension {} vs target {})",
        yes_no(r.density_controllable),
        r.lie_dim,
        r.density_target_dim
    )?;
    writeln!(
        out,
        "wavefunction controllable: {}",
        yes_no(r.wavefunction_controllable)
    )?;
    for w in &r.warnings {
        writeln!(out, "warning: {w}")?;
    }
    Ok(())
}

fn io(e: std::io::Error) -> CliError {
    CliError::Invalid(format!("output: {e}"))
}

#[derive(Clone, Debug, Default)]
pub struct AnalyzeArgs {
    pub path: PathBuf,
    pub tol: Option<f64>,
    pub json: Option<PathBuf>,
    pub max_rounds: Option<usize>,
}

/// Tolerances from the system file, then `--tol` / `--max-rounds`.
pub fn resolve_tolerances(
    file: Option<Tolerances>,
    tol: Option<f64>,
    max_rounds: Option<usize>,
) -> Result<Tolerances, CliError> {
    let mut t = file.unwrap_or_default();
    if let Some(tol) = tol {
        if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
            return Err(CliError::Invalid(format!("--tol: {tol} must lie in (0, 1)")));
        }
        t.closure = tol;
        t.rank = tol;
        t.independence = tol;
    }
    if let Some(m) = max_rounds {
        t.max_rounds = Some(m);
    }
    Ok(t)
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<ControllabilityReport, CliError> {
    let start = Instant::now();
    let (file, sys, digest) = load_system(&args.path)?;
    let tol = resolve_tolerances(file.tolerances, args.tol, args.max_rounds)?;
    let report = analyze(&sys, &tol)?;
    render_report(&report, out).map_err(io)?;
    if let Some(json) = &args.json {
        let rf = ReportFile {
            tool: TOOL.into(),
            version: VERSION.into(),
            input: args.path.display().to_string(),
            input_digest: digest,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            report: report.clone(),
        };
        write_json(json, &to_json_string(&rf))?;
    }
    Ok(report)
}

/// Parses `1`, `-0.5i`, `0.6+0.8i`, `i`, `1e-3-2i`.
pub fn parse_complex(token: &str) -> Option<C64> {
    let t: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse().ok().map(|re| C64::new(re, 0.0));
    };
    let split = body
        .char_indices()
        .rev()
        .find(|&(k, c)| k > 0 && (c == '+' || c == '-') && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
        .map(|(k, _)| k);
    let imag = |s: &str| match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        s => s.parse().ok(),
    };
    match split {
        Some(k) => Some(C64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(C64::new(0.0, imag(body)?)),
    }
}

pub fn parse_state_csv(csv: &str) -> Result<QuantumState, CliError> {
    let amps = csv
        .split(',')
        .enumerate()
        .map(|(k, tok)| {
            parse_complex(tok).ok_or_else(|| CliError::Invalid(format!("--state[{k}]: cannot parse '{tok}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    QuantumState::new(DVector::from_vec(amps)).map_err(|e| CliError::Invalid(format!("--state: {e}")))
}

#[derive(Clone, Debug, Default)]
pub struct SimulateArgs {
    pub path: PathBuf,
    pub control: Option<PathBuf>,
    pub state: Option<String>,
    pub density: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

fn fmt_c(z: C64) -> String {
    format!("{:+.12}{:+.12}i", z.re, z.im)
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<SimulationFile, CliError> {
    let start = Instant::now();
    let (_, sys, digest) = load_system(&args.path)?;
    let n = sys.n();
    let ctrl = match &args.control {
        Some(p) => parse_control(&read(p)?.0)?,
        None => PiecewiseConstantControl::empty(),
    };
    let state = args.state.as_deref().map(parse_state_csv).transpose()?;
    if let Some(s) = &state {
        if s.dim() != n {
            return Err(CliError::Invalid(format!(
                "--state: {} amplitudes for n = {n}",
                s.dim()
            )));
        }
    }
    let density = match &args.density {
        Some(p) => {
            let m: MatrixJson =
                serde_json::from_str(&read(p)?.0).map_err(|e| CliError::Invalid(format!("density: {e}")))?;
            let rho = m.to_matrix(n, "density")?;
            Some(DensityMatrix::new(rho).map_err(|e| CliError::Invalid(format!("density: {e}")))?)
        }
        None => None,
    };

    let u = propagator(&sys, &ctrl)?;
    let unitarity_residual = u.unitarity_residual();
    writeln!(out, "segments: {}, total time: {}", ctrl.len(), ctrl.total_time()).map_err(io)?;
    writeln!(out, "propagator:").map_err(io)?;
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| fmt_c(u.get(r, c))).collect();
        writeln!(out, "  [{}]", row.join(", ")).map_err(io)?;
    }
    writeln!(out, "unitarity residual: {unitarity_residual:.3e}").map_err(io)?;

    let final_state = match &state {
        Some(c0) => {
            let c = propagate_state(&sys, &ctrl, c0)?;
            let drift = (c.norm() - 1.0).abs();
            let amps: Vec<String> = c.amplitudes().iter().map(|&z| fmt_c(z)).collect();
            writeln!(out, "final state: [{}]", amps.join(", ")).map_err(io)?;
            let pops: Vec<String> = c.populations().iter().map(|p| format!("{p:.12}")).collect();
            writeln!(out, "populations: [{}]", pops.join(", ")).map_err(io)?;
            writeln!(out, "norm drift: {drift:.3e}").map_err(io)?;
            Some(StateJson {
                re: c.amplitudes().iter().map(|z| z.re).collect(),
                im: c.amplitudes().iter().map(|z| z.im).collect(),
                populations: c.populations(),
                norm_drift: drift,
            })
        }
        None => None,
    };
    let final_density = match &density {
        Some(rho0) => {
            let rho = propagate_density(&sys, &ctrl, rho0)?;
            let ev = rho.eigenvalues();
            let drift = ev
                .iter()
                .zip(rho0.eigenvalues())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let trace_drift = (rho.matrix().trace().re - 1.0).abs();
            writeln!(out, "final density:").map_err(io)?;
            for r in 0..n {
                let row: Vec<String> = (0..n).map(|c| fmt_c(rho.matrix().get(r, c))).collect();
                writeln!(out, "  [{}]", row.join(", ")).map_err(io)?;
            }
            writeln!(out, "eigenvalue drift: {drift:.3e}").map_err(io)?;
            writeln!(out, "trace drift: {trace_drift:.3e}").map_err(io)?;
            Some(DensityJson {
                re: rho.matrix().re_rows(),
                im: rho.matrix().im_rows(),
                eigenvalues: ev,
                eigenvalue_drift: drift,
                trace_drift,
            })
        }
        None => None,
    };

    let sim = SimulationFile {
        tool: TOOL.into(),
        version: VERSION.into(),
        input: args.path.display().to_string(),
        input_digest: digest,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        segments: ctrl.len(),
        total_time: ctrl.total_time(),
        propagator: MatrixJson::from_matrix(&u),
        unitarity_residual,
        final_state,
        final_density,
    };
    if let Some(json) = &args.json {
        write_json(json, &to_json_string(&sim))?;
    }
    Ok(sim)
}

#[derive(Clone, Debug)]
pub struct DemoArgs {
    pub name: String,
    pub n: Option<usize>,
    pub l: usize,
    pub seed: u64,
    pub json: Option<PathBuf>,
}

pub const DEMOS: [&str; 4] = ["oscillator", "random", "diagonal", "bracket-table"];

pub fn cmd_demo(args: &DemoArgs, out: &mut dyn Write) -> Result<Option<ControllabilityReport>, CliError> {
    let sys = match args.name.as_str() {
        "oscillator" => truncated_oscillator(args.n.unwrap_or(4))?,
        "random" => random_dense(args.n.unwrap_or(3), args.l, args.seed)?,
        "diagonal" => diagonal_pair(args.n.unwrap_or(3))?,
        "bracket-table" => {
            let table = oscillator_bracket_table();
            let d = closure_dim_from_bracket_table(&table, Tolerances::default().closure, None)?;
            writeln!(out, "generators: {}", table.names().join(", ")).map_err(io)?;
            writeln!(out, "closure dimension: {d}").map_err(io)?;
            return Ok(None);
        }
        other => {
            return Err(CliError::Invalid(format!(
                "unknown demo '{other}', expected one of {}",
                DEMOS.join(", ")
            )))
        }
    };
    writeln!(out, "model: {}", args.name).map_err(io)?;
    let report = analyze(&sys, &Tolerances::default())?;
    render_report(&report, out).map_err(io)?;
    if let Some(json) = &args.json {
        write_json(json, &to_json_string(&report))?;
    }
    Ok(Some(report))
}
