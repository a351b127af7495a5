//! Command line front end: system files, validation, analysis, extension,
//! simulation and the example library.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gphdae::daesim::{self, Scheme};
use gphdae::systemlib::{self, ExampleName, ExampleSpec};
use gphdae::{
    compose, DiracStructure, GphDaeSystem, LagrangianSubspace, Matrix, Tolerances, Vector,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const COMMANDS: [&str; 5] = ["validate", "analyze", "extend", "simulate", "example"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: parse error at line {line}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] gphdae::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axiom_abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subspace_angle_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn resolve(&self) -> gphdae::Result<Tolerances> {
        let d = Tolerances::default();
        Tolerances::new(
            self.rank_rel_tol.unwrap_or(d.rank_rel_tol),
            self.axiom_abs_tol.unwrap_or(d.axiom_abs_tol),
            self.subspace_angle_tol.unwrap_or(d.subspace_angle_tol),
        )
    }

    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// On-disk form of a system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(name: &str, rows: &[Vec<f64>], n: usize) -> gphdae::Result<Matrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(gphdae::Error::DimensionMismatch(format!(
            "{name} must be {n} x {n}"
        )));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl SystemFile {
    pub fn from_system(sys: &GphDaeSystem, tolerances: Option<ToleranceOverrides>) -> Self {
        SystemFile {
            n: sys.n(),
            k: to_rows(sys.dirac().k()),
            l: to_rows(sys.dirac().l()),
            p: to_rows(sys.lagrange().p()),
            s: to_rows(sys.lagrange().s()),
            labels: Some(sys.labels().to_vec()),
            tolerances: tolerances.filter(|t| !t.is_empty()),
        }
    }

    pub fn tolerances(&self) -> gphdae::Result<Tolerances> {
        self.tolerances.clone().unwrap_or_default().resolve()
    }

    /// Validates both structures and pairs them.
    pub fn to_system(&self) -> gphdae::Result<GphDaeSystem> {
        let tol = self.tolerances()?;
        let n = self.n;
        let dirac = DiracStructure::from_kernel(
            from_rows("K", &self.k, n)?,
            from_rows("L", &self.l, n)?,
            &tol,
        )?;
        let lagrange = LagrangianSubspace::from_pair(
            from_rows("P", &self.p, n)?,
            from_rows("S", &self.s, n)?,
            &tol,
        )?;
        let sys = compose(dirac, lagrange)?;
        match &self.labels {
            Some(labels) => sys.with_labels(labels.clone()),
            None => Ok(sys),
        }
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// JSON with one matrix row per line. Floats use the shortest decimal
    /// form that parses back to the same value.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"n\": {},", self.n);
        let mut fields: Vec<String> = Vec::new();
        for (name, m) in [
            ("K", &self.k),
            ("L", &self.l),
            ("P", &self.p),
            ("S", &self.s),
        ] {
            let rows: Vec<String> = m.iter().map(|r| format!("    {}", compact(r))).collect();
            if rows.is_empty() {
                fields.push(format!("  \"{name}\": []"));
            } else {
                fields.push(format!("  \"{name}\": [\n{}\n  ]", rows.join(",\n")));
            }
        }
        if let Some(labels) = &self.labels {
            fields.push(format!("  \"labels\": {}", compact(labels)));
        }
        if let Some(t) = &self.tolerances {
            fields.push(format!("  \"tolerances\": {}", compact(t)));
        }
        out.push_str(&fields.join(",\n"));
        out.push_str("\n}\n");
        out
    }
}

fn compact<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// A loaded system with the tolerances it was validated under.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub system: GphDaeSystem,
    pub tolerances: Tolerances,
    pub overrides: Option<ToleranceOverrides>,
}

pub fn load_system(path: &Path) -> CliResult<Loaded> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file = SystemFile::parse(&text, path)?;
    Ok(Loaded {
        system: file.to_system()?,
        tolerances: file.tolerances()?,
        overrides: file.tolerances,
    })
}

pub fn save_system(
    sys: &GphDaeSystem,
    overrides: Option<ToleranceOverrides>,
    path: &Path,
) -> CliResult<()> {
    let text = SystemFile::from_system(sys, overrides).to_json();
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "gphdae",
    version,
    about = "Generalized port-Hamiltonian DAE toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Dirac,
    Lagrange,
    Merged,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Midpoint,
    Euler,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check both structures of a system file
    Validate { file: PathBuf },
    /// Report constraints, conserved quantities and pencil properties
    Analyze { file: PathBuf },
    /// Write the multiplier extension of a system
    Extend {
        file: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Integrate the primal DAE and write a CSV trajectory
    Simulate {
        file: PathBuf,
        /// Comma-separated initial state; projected onto the consistent subspace
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value = "midpoint")]
        scheme: SchemeArg,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Write a system file from the example library
    Example {
        name: String,
        /// Physical constant as key=value; repeatable
        #[arg(long = "param", value_name = "KEY=VALUE", allow_hyphen_values = true)]
        params: Vec<String>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

fn regularity(regular: bool) -> &'static str {
    if regular {
        "regular"
    } else {
        "singular"
    }
}

/// Renders `c^T v` as e.g. `x_1 - 0.5 x_3`, scaled so the largest
/// coefficient is 1 and the first nonzero one positive.
pub fn linear_form(coeffs: &[f64], var: &str) -> String {
    let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return "0".into();
    }
    let sign = coeffs
        .iter()
        .find(|c| c.abs() > 1e-12 * max)
        .map_or(1.0, |c| c.signum());
    let mut out = String::new();
    for (i, &c) in coeffs.iter().enumerate() {
        let c = sign * c / max;
        if c.abs() <= 1e-12 {
            continue;
        }
        let mag = c.abs();
        let op = if out.is_empty() {
            if c < 0.0 {
                "-"
            } else {
                ""
            }
        } else if c < 0.0 {
            " - "
        } else {
            " + "
        };
        out.push_str(op);
        if (mag - 1.0).abs() > 1e-12 {
            let _ = write!(out, "{} ", format_coeff(mag));
        }
        let _ = write!(out, "{var}_{}", i + 1);
    }
    out
}

fn format_coeff(c: f64) -> String {
    let s = format!("{c:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn analyze_report(sys: &GphDaeSystem, tol: &Tolerances) -> CliResult<String> {
    let mut out = String::new();
    let efforts = sys.dirac().effort_space(tol)?;
    let states = sys.lagrange().state_space(tol)?;
    let dform = sys.dirac().to_constrained_form(tol)?;
    let lform = sys.lagrange().to_constrained_form(tol)?;
    let conserved = sys.dirac().conserved_space(tol)?;
    let pencil = sys.primal_pencil();
    let report = daesim::analyze_pencil(&pencil.e, &pencil.a, tol)?;

    let _ = writeln!(out, "n: {}", sys.n());
    let _ = writeln!(out, "Dirac structure: {}", regularity(efforts.regular));
    let _ = writeln!(out, "Lagrangian subspace: {}", regularity(states.regular));

    let mut section = |title: &str, basis: &Matrix, var: &str, suffix: &str| {
        let _ = writeln!(out, "{title}: {}", basis.ncols());
        for col in basis.column_iter() {
            let c: Vec<f64> = col.iter().copied().collect();
            let _ = writeln!(out, "  {}{suffix}", linear_form(&c, var));
        }
    };
    section("Dirac constraints", dform.g(), "e", " = 0");
    section("Lagrange constraints", lform.m(), "x", " = 0");
    section("Conserved quantities", conserved.basis(), "x", "");

    let _ = writeln!(out, "Pencil: {}", regularity(report.regular));
    let _ = writeln!(out, "Index estimate: {}", report.index_estimate);
    let _ = writeln!(
        out,
        "Consistent space dimension: {}",
        report.consistent_space.dim()
    );
    Ok(out)
}

fn parse_params(name: ExampleName, raw: &[String]) -> CliResult<ExampleSpec> {
    let mut spec = ExampleSpec::new(name);
    for item in raw {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--param expects KEY=VALUE, got '{item}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--param {key}: '{value}' is not a number")))?;
        spec = spec.with(key.trim(), value);
    }
    Ok(spec)
}

fn parse_vector(raw: &str) -> CliResult<Vector> {
    let values: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    values
        .map(Vector::from_vec)
        .map_err(|_| CliError::Usage(format!("--z0 expects comma-separated numbers, got '{raw}'")))
}

pub fn write_csv(traj: &gphdae::Trajectory, labels: &[String], path: &Path) -> CliResult<()> {
    let mut out = String::new();
    let _ = writeln!(out, "t,{},H,residual", labels.join(","));
    for k in 0..traj.len() {
        let _ = write!(out, "{}", traj.times[k]);
        for x in traj.states.row(k).iter() {
            let _ = write!(out, ",{x}");
        }
        let _ = writeln!(
            out,
            ",{},{}",
            traj.hamiltonian[k], traj.constraint_residual[k]
        );
    }
    fs::write(path, out).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn execute(cmd: Command, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Validate { file } => {
            let loaded = load_system(&file)?;
            let tol = &loaded.tolerances;
            let sys = &loaded.system;
            let _ = writeln!(out, "valid: n = {}", sys.n());
            let _ = writeln!(
                out,
                "Dirac structure: {}",
                regularity(sys.dirac().effort_space(tol)?.regular)
            );
            let _ = writeln!(
                out,
                "Lagrangian subspace: {}",
                regularity(sys.lagrange().state_space(tol)?.regular)
            );
        }
        Command::Analyze { file } => {
            let loaded = load_system(&file)?;
            let _ = write!(
                out,
                "{}",
                analyze_report(&loaded.system, &loaded.tolerances)?
            );
        }
        Command::Extend { file, mode, output } => {
            let loaded = load_system(&file)?;
            let tol = &loaded.tolerances;
            let ext = match mode {
                Mode::Dirac => loaded.system.extend_dirac_multipliers(tol)?,
                Mode::Lagrange => loaded.system.extend_lagrange_multipliers(tol)?,
                Mode::Merged => loaded.system.extend_merged(tol)?,
            };
            save_system(&ext, loaded.overrides, &output)?;
            let _ = writeln!(out, "wrote {} (n = {})", output.display(), ext.n());
        }
        Command::Simulate {
            file,
            z0,
            dt,
            steps,
            scheme,
            output,
        } => {
            let loaded = load_system(&file)?;
            let z0 = parse_vector(&z0)?;
            let scheme = match scheme {
                SchemeArg::Midpoint => Scheme::ImplicitMidpoint,
                SchemeArg::Euler => Scheme::ImplicitEuler,
            };
            let traj = loaded
                .system
                .simulate(&z0, dt, steps, scheme, &loaded.tolerances)?;
            write_csv(&traj, loaded.system.labels(), &output)?;
            let _ = writeln!(out, "wrote {} ({} samples)", output.display(), traj.len());
        }
        Command::Example {
            name,
            params,
            output,
        } => {
            let name: ExampleName = name.parse().map_err(|e| {
                let names: Vec<&str> = ExampleName::ALL.iter().map(|n| n.as_str()).collect();
                CliError::Usage(format!("{e}; available: {}", names.join(", ")))
            })?;
            let spec = parse_params(name, &params)?;
            let sys = systemlib::build(&spec, &Tolerances::default()).map_err(|e| match e {
                gphdae::Error::UnknownParam { .. } | gphdae::Error::MissingParam { .. } => {
                    CliError::Usage(e.to_string())
                }
                other => other.into(),
            })?;
            save_system(&sys, None, &output)?;
            let _ = writeln!(out, "wrote {} (n = {})", output.display(), sys.n());
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code: 0 success, 1 failure, 2 usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = e.exit_code();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    let _ = writeln!(err, "accepted commands: {}", COMMANDS.join(", "));
                }
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
