use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use simplex_flow::analysis::{homological_basis, HomologicalBasis};
use simplex_flow::dynamics::{IntegratorSettings, Method};
use simplex_flow::{Error, FlowConfig, Nonlinearity, SimplexFlow, Trajectory};

use crate::{load_complex, load_vector, print_json, NumericalFailure};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    complex: PathBuf,
    #[arg(long)]
    dim: usize,
    /// sin, identity or tanh.
    #[arg(long, default_value = "sin")]
    phi: String,
    /// `zero` or a JSON array file.
    #[arg(long, default_value = "zero")]
    omega: String,
    /// `random`, `homological+noise` or a JSON array file.
    #[arg(long, default_value = "random")]
    theta0: String,
    /// Amplitude of the uniform perturbation used by `homological+noise`.
    #[arg(long, default_value_t = 1e-2)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value = "rk4")]
    method: Method,
    /// Trajectory CSV; with several runs the run index is appended to the stem.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Independent runs, seeded `seed`, `seed + 1`, ...
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    run: usize,
    seed: u64,
    output: Option<PathBuf>,
    samples: usize,
    t_final: f64,
    energy_final: f64,
    residual: f64,
    distance_to_homological: f64,
    final_state: Vec<f64>,
}

enum InitialState {
    Random,
    HomologicalNoise,
    Given(Vec<f64>),
}

struct Setup {
    flow: SimplexFlow,
    basis: HomologicalBasis,
    init: InitialState,
    noise: f64,
}

impl Setup {
    fn initial_state(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.flow.dim();
        match &self.init {
            InitialState::Random => (0..n).map(|_| rng.gen_range(-0.5..=0.5)).collect(),
            InitialState::HomologicalNoise => {
                let coeffs: Vec<f64> = (0..self.basis.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let base = if coeffs.is_empty() { vec![0.0; n] } else { self.basis.combine(&coeffs) };
                base.into_iter().map(|v| v + self.noise * rng.gen_range(-1.0..=1.0)).collect()
            }
            InitialState::Given(v) => v.clone(),
        }
    }

    fn run(&self, run: usize, seed: u64, output: Option<PathBuf>) -> Result<RunSummary> {
        let theta0 = self.initial_state(seed);
        let traj = match self.flow.integrate(&theta0) {
            Ok(traj) => traj,
            Err(Error::Divergence { time, partial }) => {
                if let Some(path) = &output {
                    write_csv(&partial, path)?;
                }
                return Err(Error::Divergence { time, partial }.into());
            }
            Err(e) => return Err(e.into()),
        };
        if let Some(path) = &output {
            write_csv(&traj, path)?;
        }
        let final_state = traj.final_state().unwrap_or_default().to_vec();
        let residual = self.flow.rhs(&final_state)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(RunSummary {
            run,
            seed,
            output,
            samples: traj.len(),
            t_final: *traj.times.last().unwrap_or(&0.0),
            energy_final: *traj.energies.last().unwrap_or(&0.0),
            residual,
            distance_to_homological: self.basis.distance(&final_state),
            final_state,
        })
    }
}

fn write_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    traj.write_csv(BufWriter::new(file)).map_err(Error::from)?;
    Ok(())
}

fn run_output(base: &Option<PathBuf>, run: usize, runs: usize) -> Option<PathBuf> {
    let base = base.as_ref()?;
    if runs == 1 {
        return Some(base.clone());
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{run}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{run}"),
    };
    Some(base.with_file_name(name))
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let x = load_complex(&args.complex)?;
    if args.dim > x.max_dim() {
        return Err(Error::InvalidParameter(format!(
            "--dim {} exceeds the complex dimension {}",
            args.dim,
            x.max_dim()
        ))
        .into());
    }
    let n = x.count(args.dim);
    let phi = Nonlinearity::by_name(&args.phi)?;
    let omega = match args.omega.as_str() {
        "zero" => vec![0.0; n],
        path => load_vector(Path::new(path)).with_context(|| format!("reading omega from {path}"))?,
    };
    let init = match args.theta0.as_str() {
        "random" => InitialState::Random,
        "homological+noise" => InitialState::HomologicalNoise,
        path => {
            InitialState::Given(load_vector(Path::new(path)).with_context(|| format!("reading theta0 from {path}"))?)
        }
    };
    if let InitialState::Given(v) = &init {
        if v.len() != n {
            return Err(Error::DimensionError { expected: n, actual: v.len() }.into());
        }
    }
    if args.runs == 0 || args.jobs == 0 {
        return Err(Error::InvalidParameter("--runs and --jobs must be positive".into()).into());
    }
    let settings = IntegratorSettings { method: args.method, dt: args.dt, t_end: args.t_end, stride: args.stride };
    let cfg = FlowConfig::homogeneous(&x, args.dim, phi).with_omega(omega).with_integrator(settings);
    let flow = SimplexFlow::new(&x, cfg)?;
    let setup = Setup { flow, basis: homological_basis(&x, args.dim)?, init, noise: args.noise };

    let mut results: Vec<Option<Result<RunSummary>>> = (0..args.runs).map(|_| None).collect();
    let chunk = args.runs.div_ceil(args.jobs);
    std::thread::scope(|scope| {
        for (c, slots) in results.chunks_mut(chunk).enumerate() {
            let setup = &setup;
            let args = &args;
            scope.spawn(move || {
                for (k, slot) in slots.iter_mut().enumerate() {
                    let run = c * chunk + k;
                    let seed = args.seed.wrapping_add(run as u64);
                    *slot = Some(setup.run(run, seed, run_output(&args.output, run, args.runs)));
                }
            });
        }
    });

    let mut first_err = None;
    for result in results.into_iter().flatten() {
        match result {
            Ok(summary) => print_json(&summary)?,
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }

    // with a bounded φ, |ω_i| above the coupling range forces θ_i to drift forever
    if setup.flow.config().nonlinearity.is_bounded() {
        let bound = setup.flow.range_bound()?;
        let drifting: Vec<usize> = (0..n).filter(|&i| setup.flow.config().omega[i].abs() > bound[i]).collect();
        if !drifting.is_empty() {
            return Err(NumericalFailure(format!(
                "no equilibrium: forcing exceeds the coupling range in components {drifting:?}"
            ))
            .into());
        }
    }
    Ok(())
}
