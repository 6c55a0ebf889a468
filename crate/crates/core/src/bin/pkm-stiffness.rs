use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{Vector3, Vector6};

use pkm_stiffness::model::{Model, ModelDocument, ParamsDoc};
use pkm_stiffness::orthoglide::{table_points, Architecture};
use pkm_stiffness::study::{self, GridSpec, ValidateOptions};
use pkm_stiffness::{Error, Wrench};

/// Stiffness of multi-chain parallel manipulators from virtual-joint models.
///
/// Exit codes: 0 success, 1 validation failures, 2 bad model, arguments or
/// output path, 3 unreachable pose, 4 numerical failure.
#[derive(Parser)]
#[command(name = "pkm-stiffness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Stiffness at one platform position.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Platform position "x,y,z" in mm (default origin).
        #[arg(long, allow_hyphen_values = true)]
        pose: Option<String>,
        /// External wrench "fx,fy,fz,mx,my,mz" in N and N·mm.
        #[arg(long, allow_hyphen_values = true)]
        load: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Include the full 6×6 matrix in CSV output.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stiffness indices over a grid of platform positions.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        /// "xmin:xmax:nx,ymin:ymax:ny,zmin:zmax:nz" in mm.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded checks: FD Jacobians, symmetry, definiteness, rank, oracle.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random postures.
        #[arg(long, default_value_t = 50)]
        postures: usize,
        #[arg(long, default_value_t = pkm_stiffness::jacobian::DEFAULT_FD_STEP)]
        fd_step: f64,
        /// Report the Jacobian error for FD steps 1e-4 … 1e-8.
        #[arg(long)]
        fd_sweep: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two models side by side with stiffness ratios (default: 3-PUU vs
    /// 3-PRPaR with default parameters at the table points).
    Compare {
        /// Give twice: first model, second model.
        #[arg(long, num_args = 1)]
        model: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::OutOfWorkspace { .. } => 3,
        Error::InconsistentPose { .. }
        | Error::LoadedInstability { .. }
        | Error::SingularStiffness { .. }
        | Error::Numerical(_) => 4,
        _ => 2,
    }
}

fn load_model(path: &Path) -> pkm_stiffness::Result<Model> {
    let doc = ModelDocument::read(path)?;
    doc.build(path.parent().unwrap_or_else(|| Path::new(".")))
}

fn parse_numbers(what: &str, s: &str, n: usize) -> pkm_stiffness::Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("{what} '{s}' is not a list of numbers")))?;
    if v.len() != n || !v.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} needs {n} finite numbers, got '{s}'")));
    }
    Ok(v)
}

/// Output file or stdout; opening the file up front so an unwritable path
/// fails before any computation.
fn open_out(path: &Option<PathBuf>) -> pkm_stiffness::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::Io(io::Error::new(e.kind(), format!("cannot write '{}': {e}", p.display())))
        })?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn run(cli: Cli) -> pkm_stiffness::Result<u8> {
    match cli.command {
        Command::Eval {
            model,
            pose,
            load,
            format,
            full,
            out,
        } => {
            let model = load_model(&model)?;
            let point = pose
                .map(|s| parse_numbers("pose", &s, 3).map(|v| Vector3::new(v[0], v[1], v[2])))
                .transpose()?;
            let load = load
                .map(|s| parse_numbers("load", &s, 6).map(|v| Wrench::from_vector(&Vector6::from_column_slice(&v))))
                .transpose()?;
            let mut w = open_out(&out)?;
            let report = study::evaluate_point(&model, point.as_ref(), load.as_ref())?;
            match format {
                Format::Json => writeln!(w, "{}", report.to_json())?,
                Format::Csv => study::write_eval_csv(&mut w, &report, full)?,
            }
            w.flush()?;
            Ok(0)
        }
        Command::Sweep {
            model,
            grid,
            format,
            full,
            out,
        } => {
            let model = load_model(&model)?;
            let grid: GridSpec = grid.parse()?;
            let mut w = open_out(&out)?;
            let rows = study::sweep(&model, &grid.points(), full)?;
            match format {
                Format::Csv => study::write_sweep_csv(&mut w, &rows, full)?,
                Format::Json => study::write_sweep_json(&mut w, &rows)?,
            }
            w.flush()?;
            Ok(0)
        }
        Command::Validate {
            model,
            seed,
            postures,
            fd_step,
            fd_sweep,
            format,
            out,
        } => {
            let model = load_model(&model)?;
            let mut w = open_out(&out)?;
            let report = study::validate(
                &model,
                &ValidateOptions {
                    seed,
                    postures,
                    fd_step,
                    fd_sweep,
                },
            )?;
            match format {
                ReportFormat::Text => write!(w, "{}", report.to_text())?,
                ReportFormat::Json => writeln!(w, "{}", serde_json::to_string_pretty(&report)?)?,
            }
            w.flush()?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Compare {
            model,
            grid,
            format,
            out,
        } => {
            let (a, b) = match model.as_slice() {
                [] => {
                    let build = |arch| ModelDocument::builder(arch, ParamsDoc::default()).build(Path::new("."));
                    (build(Architecture::Puu)?, build(Architecture::Prpar)?)
                }
                [a, b] => (load_model(a)?, load_model(b)?),
                _ => return Err(Error::InvalidArgument("compare takes --model twice or not at all".into())),
            };
            let points = match grid {
                Some(g) => g.parse::<GridSpec>()?.points(),
                None => table_points().to_vec(),
            };
            let mut w = open_out(&out)?;
            let rows = study::compare(&a, &b, &points)?;
            match format {
                Format::Csv => study::write_compare_csv(&mut w, &rows, [&a.label(), &b.label()])?,
                Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?,
            }
            w.flush()?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
