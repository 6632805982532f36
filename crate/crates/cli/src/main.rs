//! `simflow`: generate simplicial complexes, simulate simplex flows on them and
//! analyse their fixed points.

mod analyze;
mod simulate;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use simplex_flow::complex::{cycle_complex, cycle_with_all_triangles, torus_complex};
use simplex_flow::operators::{boundary_matrix, laplacian, weight_matrix, LaplacianPart};
use simplex_flow::{Error, SimplicialComplex};

#[derive(Parser, Debug)]
#[command(name = "simflow", version, about = "Simplicial oscillator flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one of the built-in complexes as JSON.
    Generate(GenerateArgs),
    /// Integrate the flow on one dimension of a complex and write the trajectory as CSV.
    Simulate(simulate::SimulateArgs),
    /// Spectra, homology and fixed points of a complex.
    Analyze(analyze::AnalyzeArgs),
    /// Write a boundary, weight or Laplacian matrix in Matrix Market format.
    ExportMatrix(ExportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GeneratorKind {
    Cycle,
    CycleTriangles,
    Torus,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    kind: GeneratorKind,
    /// Vertex count (cycle kinds) or columns (torus).
    #[arg(long)]
    n: usize,
    /// Neighbour range of the cycle.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Rows of the torus grid.
    #[arg(long)]
    m: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MatrixKind {
    Boundary,
    Weight,
    Laplacian,
}

#[derive(Args, Debug)]
struct ExportArgs {
    complex: PathBuf,
    #[arg(long, value_enum)]
    kind: MatrixKind,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value = "full")]
    part: LaplacianPart,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A numerical outcome that is not an input mistake, such as a flow with no
/// equilibrium.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<NumericalFailure>().is_some() {
        return 3;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::Divergence { .. }
            | Error::NumericalError(_)
            | Error::NoConvergence { .. }
            | Error::NoSolution { .. },
        ) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::ExportMatrix(args) => export_matrix(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

pub fn load_complex(path: &Path) -> Result<SimplicialComplex> {
    SimplicialComplex::load(path).with_context(|| format!("reading complex {}", path.display()))
}

/// Reads a JSON array of numbers.
pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    let v: Vec<f64> = serde_json::from_str(&text).map_err(Error::from)?;
    Ok(v)
}

/// Writes one line to stdout; a closed pipe is not an error.
pub fn emit(line: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{line}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Error::from(e).into()),
        _ => Ok(()),
    }
}

pub fn print_json(value: &impl serde::Serialize) -> Result<()> {
    emit(&serde_json::to_string(value)?)
}

fn generate(args: GenerateArgs) -> Result<()> {
    let x = match args.kind {
        GeneratorKind::Cycle => cycle_complex(args.n, args.k)?,
        GeneratorKind::CycleTriangles => cycle_with_all_triangles(args.n)?,
        GeneratorKind::Torus => {
            let m = args.m.ok_or_else(|| Error::InvalidParameter("torus needs --m".into()))?;
            torus_complex(m, args.n)?.into_complex()
        }
    };
    match &args.output {
        Some(path) => {
            x.save(path).with_context(|| format!("writing {}", path.display()))?;
            print_json(&json!({ "output": path, "counts": x.counts() }))
        }
        None => emit(&x.to_json()?),
    }
}

fn export_matrix(args: ExportArgs) -> Result<()> {
    let x = load_complex(&args.complex)?;
    let (rows, cols, entries): (usize, usize, Vec<(usize, usize, f64)>) = match args.kind {
        MatrixKind::Boundary => {
            let b = boundary_matrix(&x, args.dim)?;
            (b.nrows(), b.ncols(), b.triplets().collect())
        }
        MatrixKind::Weight => {
            let w = weight_matrix(&x, args.dim)?;
            let n = w.diagonal.len();
            (n, n, w.diagonal.iter().enumerate().map(|(i, v)| (i, i, *v)).collect())
        }
        MatrixKind::Laplacian => {
            let l = laplacian(&x, args.dim, args.part)?;
            (l.dim(), l.dim(), l.triplets())
        }
    };
    let sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{rows} {cols} {}", entries.len())?;
    for (r, c, v) in entries {
        writeln!(out, "{} {} {v:.16e}", r + 1, c + 1)?;
    }
    out.flush()?;
    Ok(())
}
