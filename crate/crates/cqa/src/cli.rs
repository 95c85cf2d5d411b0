//! Command-line front end: construction, verification, spectra and
//! annealing runs with file-based JSON/CSV I/O.
//!
//! Every run is deterministic: identical inputs produce byte-identical
//! artifacts. Failures print a machine-readable error object to stderr and
//! exit with a class-specific code (see [`error_code`]).

use crate::anneal::{evolve_with_limit, prepare_initial, InitialState, Schedule};
use crate::constraints::{gf2_solve, Constraint, Gf2Solution, SectorBasis};
use crate::drivers::DriverSpec;
use crate::encodings::{resource_counts, EncodingKind};
use crate::error::CqaError;
use crate::pauli::{Hamiltonian, DEFAULT_MAX_DENSE_DIM, FORMAT_VERSION};
use crate::spectral::{magnetization_curve_with_limit, spectrum_sweep_with_limit, linear_grid};
use crate::statespace::{analyze_driver, ClosureWitness};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Toolkit for constraint-commuting driver Hamiltonians: constructs and
/// verifies drivers, enumerates charge sectors, and runs exact desk-scale
/// spectra and annealing schedules.
#[derive(Parser)]
#[command(name = "cqa", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a driver Hamiltonian from a family tag and a parameter file.
    Driver {
        /// transverse | xy_cycle | gi_row_xy | gi_fourbody | nae_clause |
        /// lhz_twoflip | lhz_gf2
        #[arg(long)]
        family: String,
        /// JSON file with the family-specific parameters.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check closure and hop connectivity of a driver against constraints.
    /// Exits nonzero when either fails.
    Verify {
        #[arg(long)]
        driver: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the basis of the sector selected by the constraint targets.
    Sector {
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep H(s) = s·H_p + (1−s)·H_d over an s grid; CSV of the lowest
    /// eigenvalues per point.
    Spectrum {
        #[arg(long)]
        hp: PathBuf,
        #[arg(long)]
        hd: PathBuf,
        /// Number of evenly spaced s points in [0, 1].
        #[arg(long)]
        grid: usize,
        /// Constraints file selecting a charge sector to restrict to.
        #[arg(long)]
        sector: Option<PathBuf>,
        /// How many eigenvalues to report per grid point.
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Magnetization staircase of the XY ring with an auxiliary Z field.
    Magcurve {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bmax: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Anneal from the driver ground state and report overlap and leakage.
    Anneal {
        #[arg(long)]
        hp: PathBuf,
        #[arg(long)]
        hd: PathBuf,
        /// Total annealing time (inverse energy units).
        #[arg(long = "T")]
        total_time: f64,
        /// Constraints file; the initial state becomes the driver ground
        /// state of this sector and leakage is measured against it.
        #[arg(long)]
        sector: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form qubit/coupling counts for an encoding.
    Resources {
        /// gi_standard | gi_partial | gi_fourbody | gi_log_binary |
        /// gi_qudit | lhz
        #[arg(long)]
        encoding: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a Z-parity system over GF(2).
    Gf2 {
        #[arg(long)]
        parities: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// CLI failure, carrying the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Cqa(#[from] CqaError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

/// Exit code classes: 1 verification failure, 3 i/o, 4 parse/format,
/// 5 dimension limits, 6 infeasible systems, 7 domain validation,
/// 8 numeric conditions.
pub fn error_code(err: &CliError) -> i32 {
    match err {
        CliError::VerificationFailed(_) => 1,
        CliError::Io { .. } => 3,
        CliError::Parse { .. } => 4,
        CliError::Cqa(c) => match c {
            CqaError::InvalidFormat(_) => 4,
            CqaError::DimensionLimit { .. } => 5,
            CqaError::InfeasibleSystem { .. } => 6,
            CqaError::DegenerateGround { .. }
            | CqaError::WrongSector { .. }
            | CqaError::NotNormalized { .. }
            | CqaError::NoConvergence { .. } => 8,
            _ => 7,
        },
    }
}

fn error_kind(err: &CliError) -> &'static str {
    match err {
        CliError::VerificationFailed(_) => "verification_failed",
        CliError::Io { .. } => "io",
        CliError::Parse { .. } => "parse",
        CliError::Cqa(c) => match c {
            CqaError::InvalidFormat(_) => "format",
            CqaError::DimensionLimit { .. } => "dimension_limit",
            CqaError::InfeasibleSystem { .. } => "infeasible",
            CqaError::DegenerateGround { .. } => "degenerate_ground",
            CqaError::WrongSector { .. } => "wrong_sector",
            CqaError::NotNormalized { .. } => "not_normalized",
            CqaError::NoConvergence { .. } => "no_convergence",
            _ => "invalid_input",
        },
    }
}

/// Entry point used by the binary: parses arguments, runs, prints a
/// structured error to stderr on failure, and returns the exit code.
pub fn main_with_exit_code() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(err) => {
            let code = error_code(&err);
            let payload = serde_json::json!({
                "error": { "code": code, "kind": error_kind(&err), "message": err.to_string() }
            });
            eprintln!("{payload}");
            code
        }
    }
}

/// Dense-dimension limit, overridable through `CQA_MAX_DIM`.
fn max_dim() -> usize {
    std::env::var("CQA_MAX_DIM")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_DENSE_DIM)
}

// ---------------------------------------------------------------------------
// wire formats
// ---------------------------------------------------------------------------

/// Constraint list file: `{"format_version":1,"n":…,"constraints":[…]}`
/// (`n` optional where a flag supplies it).
#[derive(Serialize, Deserialize)]
struct ConstraintsFile {
    format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    constraints: Vec<Constraint>,
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    format_version: u32,
    closure: &'static str,
    witnesses: &'a [ClosureWitness],
    connected: bool,
    components: usize,
    max_term_support: usize,
}

#[derive(Serialize)]
struct SectorJson {
    format_version: u32,
    n: usize,
    count: usize,
    infeasible: bool,
    states: Vec<u64>,
}

#[derive(Serialize)]
struct ResourcesJson {
    format_version: u32,
    encoding: EncodingKind,
    n: usize,
    qubits: u64,
    edges: u64,
}

#[derive(Serialize)]
struct Gf2Json<'a> {
    format_version: u32,
    n_vars: usize,
    dependent: &'a [usize],
    exprs: &'a [Vec<usize>],
    negations: &'a [bool],
    independent: &'a [usize],
}

#[derive(Serialize)]
struct AnnealJson {
    format_version: u32,
    overlap: f64,
    max_leakage: f64,
    checkpoints: Vec<AnnealCheckpointJson>,
}

#[derive(Serialize)]
struct AnnealCheckpointJson {
    s: f64,
    energy: f64,
    leakage: f64,
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn load_hamiltonian(path: &Path) -> Result<Hamiltonian, CliError> {
    Hamiltonian::from_json_str(&read_file(path)?)
        .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn load_constraints(path: &Path, n_flag: Option<usize>) -> Result<(Vec<Constraint>, Option<usize>), CliError> {
    let file: ConstraintsFile = parse_json(path)?;
    if file.format_version != FORMAT_VERSION {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            message: format!("unsupported format_version {}", file.format_version),
        });
    }
    if let (Some(flag), Some(in_file)) = (n_flag, file.n) {
        if flag != in_file {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                message: format!("--n {flag} conflicts with n = {in_file} in the file"),
            });
        }
    }
    Ok((file.constraints, file.n.or(n_flag)))
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialization");
    s.push('\n');
    s
}

/// 17 significant digits: round-trip exact for f64.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn is_csv(out: Option<&Path>) -> bool {
    out.and_then(Path::extension).is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Driver { family, params, out } => cmd_driver(family, params, out.as_deref()),
        Command::Verify { driver, constraints, out } => {
            cmd_verify(driver, constraints, out.as_deref())
        }
        Command::Sector { constraints, n, out } => cmd_sector(constraints, *n, out.as_deref()),
        Command::Spectrum { hp, hd, grid, sector, k, out } => {
            cmd_spectrum(hp, hd, *grid, sector.as_deref(), *k, out.as_deref())
        }
        Command::Magcurve { n, bmax, points, out } => {
            cmd_magcurve(*n, *bmax, *points, out.as_deref())
        }
        Command::Anneal { hp, hd, total_time, sector, out } => {
            cmd_anneal(hp, hd, *total_time, sector.as_deref(), out.as_deref())
        }
        Command::Resources { encoding, n, out } => cmd_resources(encoding, *n, out.as_deref()),
        Command::Gf2 { parities, out } => cmd_gf2(parities, out.as_deref()),
    }
}

fn cmd_driver(family: &str, params: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let mut value: serde_json::Value = parse_json(params)?;
    let object = value.as_object_mut().ok_or_else(|| CliError::Parse {
        path: params.to_path_buf(),
        message: "parameter file must be a JSON object".into(),
    })?;
    if let Some(tag) = object.get("family").and_then(|v| v.as_str()) {
        if tag != family {
            return Err(CliError::Parse {
                path: params.to_path_buf(),
                message: format!("--family {family} conflicts with family = {tag} in the file"),
            });
        }
    }
    object.insert("family".into(), serde_json::Value::String(family.to_string()));
    let spec: DriverSpec = serde_json::from_value(value)
        .map_err(|e| CliError::Parse { path: params.to_path_buf(), message: e.to_string() })?;
    let hamiltonian = spec.build()?;
    write_output(out, &(hamiltonian.to_json_string() + "\n"))
}

fn cmd_verify(driver: &Path, constraints: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let h = load_hamiltonian(driver)?;
    let (cs, _) = load_constraints(constraints, None)?;
    let report = analyze_driver(&h, &cs)?;
    let json = VerifyJson {
        format_version: FORMAT_VERSION,
        closure: if report.closure.pass { "pass" } else { "fail" },
        witnesses: &report.closure.witnesses,
        connected: report.connected,
        components: report.components,
        max_term_support: report.max_term_support,
    };
    write_output(out, &to_pretty_json(&json))?;
    if !report.closure.pass {
        return Err(CliError::VerificationFailed(format!(
            "{} closure violations",
            report.closure.violations
        )));
    }
    if !report.connected {
        return Err(CliError::VerificationFailed(format!(
            "hop graph splits into {} components",
            report.components
        )));
    }
    Ok(())
}

fn cmd_sector(constraints: &Path, n: usize, out: Option<&Path>) -> Result<(), CliError> {
    let (cs, _) = load_constraints(constraints, Some(n))?;
    let sector = SectorBasis::from_constraints(&cs, n)?;
    let json = SectorJson {
        format_version: FORMAT_VERSION,
        n,
        count: sector.len(),
        infeasible: sector.is_empty(),
        states: sector.states().to_vec(),
    };
    write_output(out, &to_pretty_json(&json))
}

fn cmd_spectrum(
    hp: &Path,
    hd: &Path,
    grid: usize,
    sector: Option<&Path>,
    k: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if grid < 2 {
        return Err(CliError::Cqa(CqaError::InvalidSchedule("need at least 2 grid points".into())));
    }
    let hp = load_hamiltonian(hp)?;
    let hd = load_hamiltonian(hd)?;
    let sector_basis = match sector {
        Some(path) => {
            let (cs, _) = load_constraints(path, None)?;
            Some(SectorBasis::from_constraints(&cs, hp.n_sites())?)
        }
        None => None,
    };
    let s_grid: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let sweep =
        spectrum_sweep_with_limit(&hp, &hd, &s_grid, k, sector_basis.as_ref(), max_dim())?;
    let k_actual = sweep.energies[0].len();
    let mut csv = String::from("s");
    for i in 0..k_actual {
        csv.push_str(&format!(",E{i}"));
    }
    csv.push('\n');
    for (s, row) in sweep.s_grid.iter().zip(&sweep.energies) {
        csv.push_str(&fmt_float(*s));
        for e in row {
            csv.push(',');
            csv.push_str(&fmt_float(*e));
        }
        csv.push('\n');
    }
    write_output(out, &csv)
}

fn cmd_magcurve(n: usize, bmax: f64, points: usize, out: Option<&Path>) -> Result<(), CliError> {
    let grid = linear_grid(bmax, points);
    let curve = magnetization_curve_with_limit(n, &grid, max_dim())?;
    let mut csv = String::from("B_over_J,Mz,E0_density\n");
    for i in 0..curve.b_over_j.len() {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_float(curve.b_over_j[i]),
            curve.mz[i],
            fmt_float(curve.e0_density[i])
        ));
    }
    write_output(out, &csv)
}

fn cmd_anneal(
    hp: &Path,
    hd: &Path,
    total_time: f64,
    sector: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let hp = load_hamiltonian(hp)?;
    let hd = load_hamiltonian(hd)?;
    let sector_basis = match sector {
        Some(path) => {
            let (cs, _) = load_constraints(path, None)?;
            Some(SectorBasis::from_constraints(&cs, hd.n_sites())?)
        }
        None => None,
    };
    let psi0 = match &sector_basis {
        Some(sec) => prepare_initial(&hd, InitialState::SectorGround(sec))?,
        None => prepare_initial(&hd, InitialState::GlobalGround)?,
    };
    let sched = Schedule::linear(total_time)?;
    let result = evolve_with_limit(&hp, &hd, &psi0, &sched, max_dim())?;
    let leakage_trace = match &sector_basis {
        Some(sec) => result.leakage_trace(sec)?,
        None => vec![0.0; result.checkpoints.len()],
    };
    let max_leakage = leakage_trace.iter().cloned().fold(0.0, f64::max);

    if is_csv(out) {
        let mut csv = String::from("s,energy,leakage\n");
        for (cp, leak) in result.checkpoints.iter().zip(&leakage_trace) {
            csv.push_str(&format!(
                "{},{},{}\n",
                fmt_float(cp.s),
                fmt_float(cp.energy),
                fmt_float(*leak)
            ));
        }
        write_output(out, &csv)
    } else {
        let json = AnnealJson {
            format_version: FORMAT_VERSION,
            overlap: result.overlap,
            max_leakage,
            checkpoints: result
                .checkpoints
                .iter()
                .zip(&leakage_trace)
                .map(|(cp, leak)| AnnealCheckpointJson { s: cp.s, energy: cp.energy, leakage: *leak })
                .collect(),
        };
        write_output(out, &to_pretty_json(&json))
    }
}

fn cmd_resources(encoding: &str, n: usize, out: Option<&Path>) -> Result<(), CliError> {
    let kind: EncodingKind = encoding.parse()?;
    let counts = resource_counts(kind, n)?;
    let json = ResourcesJson {
        format_version: FORMAT_VERSION,
        encoding: kind,
        n,
        qubits: counts.qubits,
        edges: counts.edges,
    };
    write_output(out, &to_pretty_json(&json))
}

fn cmd_gf2(parities: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (cs, n_in_file) = load_constraints(parities, None)?;
    let n_vars = match n_in_file {
        Some(n) => n,
        None => cs.iter().map(Constraint::min_sites).max().unwrap_or(1),
    };
    let solution: Gf2Solution = gf2_solve(&cs, n_vars)?;
    let json = Gf2Json {
        format_version: FORMAT_VERSION,
        n_vars: solution.n_vars,
        dependent: &solution.dependent,
        exprs: &solution.exprs,
        negations: &solution.negations,
        independent: &solution.independent,
    };
    write_output(out, &to_pretty_json(&json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_round_trip_exact() {
        for x in [0.0, 0.5, 1.0 / 3.0, -2.0f64.sqrt(), 1e-17, 123456.789] {
            let s = fmt_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(x, back, "{s}");
        }
    }

    #[test]
    fn constraints_file_round_trip() {
        let file = ConstraintsFile {
            format_version: FORMAT_VERSION,
            n: Some(4),
            constraints: vec![Constraint::total_magnetization(4, 0).unwrap()],
        };
        let s = serde_json::to_string(&file).unwrap();
        let back: ConstraintsFile = serde_json::from_str(&s).unwrap();
        assert_eq!(back.n, Some(4));
        assert_eq!(back.constraints, file.constraints);
    }
}
