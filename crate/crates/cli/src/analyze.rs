use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use simplex_flow::analysis::{
    auto_twist_alpha, betti, find_fixed_point, homological_basis, solve_twist, StabilityReport, TwistPattern,
};
use simplex_flow::operators::{laplacian, LaplacianPart};
use simplex_flow::{Error, FlowConfig, Nonlinearity};

use crate::{load_complex, load_vector, print_json};

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    complex: PathBuf,
    #[arg(long)]
    dim: usize,
    #[command(subcommand)]
    what: Analysis,
}

#[derive(Subcommand, Debug)]
enum Analysis {
    /// Eigenvalues of the weighted Laplacian, ascending.
    Spectrum {
        #[arg(long, default_value = "full")]
        part: LaplacianPart,
    },
    Betti,
    /// Orthonormal basis of the homological states.
    HomologyBasis,
    /// Newton search for a fixed point followed by a stability report.
    FixedPoint {
        #[arg(long, default_value = "sin")]
        phi: String,
        /// `zero` or a JSON array file.
        #[arg(long, default_value = "zero")]
        omega: String,
        /// `random`, `zero` or a JSON array file.
        #[arg(long, default_value = "random")]
        x0: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Twisted fixed point of the sine edge flow.
    Twist {
        /// `auto` (2π over the vertex count) or a number.
        #[arg(long, default_value = "auto")]
        alpha: String,
        /// Vertex carrying the 2π defect; the last vertex by default.
        #[arg(long)]
        special: Option<usize>,
    },
}

#[derive(Serialize)]
struct TwistOutput {
    alpha: f64,
    special_index: usize,
    linear_residual: f64,
    #[serde(flatten)]
    report: StabilityReport,
}

fn vector_arg(source: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v = load_vector(Path::new(source)).with_context(|| format!("reading {what} from {source}"))?;
    if v.len() != n {
        return Err(Error::DimensionError { expected: n, actual: v.len() }.into());
    }
    Ok(v)
}

pub fn run(args: AnalyzeArgs) -> Result<()> {
    let x = load_complex(&args.complex)?;
    let d = args.dim;
    if d > x.max_dim() {
        return Err(Error::InvalidParameter(format!("--dim {d} exceeds the complex dimension {}", x.max_dim())).into());
    }
    match args.what {
        Analysis::Spectrum { part } => {
            let l = laplacian(&x, d, part)?;
            print_json(&json!({ "dim": d, "part": part.to_string(), "eigenvalues": l.eigenvalues() }))
        }
        Analysis::Betti => print_json(&json!({ "dim": d, "betti": betti(&x, d)? })),
        Analysis::HomologyBasis => {
            let basis = homological_basis(&x, d)?;
            print_json(&json!({ "dim": d, "threshold": basis.threshold, "vectors": basis.vectors }))
        }
        Analysis::FixedPoint { phi, omega, x0, seed } => {
            let n = x.count(d);
            let omega = match omega.as_str() {
                "zero" => vec![0.0; n],
                path => vector_arg(path, n, "omega")?,
            };
            let x0 = match x0.as_str() {
                "zero" => vec![0.0; n],
                "random" => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..n).map(|_| rng.gen_range(-0.5..=0.5)).collect()
                }
                path => vector_arg(path, n, "x0")?,
            };
            let cfg = FlowConfig::homogeneous(&x, d, Nonlinearity::by_name(&phi)?).with_omega(omega);
            print_json(&find_fixed_point(&x, &cfg, &x0)?)
        }
        Analysis::Twist { alpha, special } => {
            if d != 1 {
                return Err(Error::InvalidParameter("twist solutions live on edges; use --dim 1".into()).into());
            }
            let alpha = match alpha.as_str() {
                "auto" => auto_twist_alpha(&x),
                value => value.parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("--alpha expects 'auto' or a number, got '{value}'"))
                })?,
            };
            let mut pattern = TwistPattern::new(alpha);
            if let Some(s) = special {
                pattern = pattern.at(s);
            }
            let sol = solve_twist(&x, pattern)?;
            print_json(&TwistOutput {
                alpha,
                special_index: special.unwrap_or(x.count(0) - 1),
                linear_residual: sol.linear_residual,
                report: sol.report,
            })
        }
    }
}
