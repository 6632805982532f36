//! The nonlinear `d`-simplex flow
//!
//! ```text
//! dθ/dt = ω − [ W_d⁻¹ B_{d+1} W_{d+1} φ(B_{d+1}ᵀ θ) + B_dᵀ W_{d-1}⁻¹ φ(B_d W_d θ) ]
//! ```
//!
//! with the up term absent at the top dimension and the down term absent at
//! `d = 0`.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::operators::{boundary_matrix, BoundaryOperator};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar coupling function `φ` with its derivative and the antiderivative
/// `F` normalised so that `F(0) = 0`.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    phi: ScalarFn,
    dphi: ScalarFn,
    antiderivative: ScalarFn,
    bound: Option<f64>,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity").field("name", &self.name).field("bound", &self.bound).finish()
    }
}

impl Nonlinearity {
    pub fn sine() -> Self {
        Self {
            name: "sin".into(),
            phi: Arc::new(f64::sin),
            dphi: Arc::new(f64::cos),
            antiderivative: Arc::new(|x: f64| 1.0 - x.cos()),
            bound: Some(1.0),
        }
    }

    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            phi: Arc::new(|x| x),
            dphi: Arc::new(|_| 1.0),
            antiderivative: Arc::new(|x| 0.5 * x * x),
            bound: None,
        }
    }

    pub fn tanh() -> Self {
        Self {
            name: "tanh".into(),
            phi: Arc::new(f64::tanh),
            dphi: Arc::new(|x: f64| 1.0 / x.cosh().powi(2)),
            // log cosh x, written to stay finite for large |x|
            antiderivative: Arc::new(|x: f64| {
                let a = x.abs();
                a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
            }),
            bound: Some(1.0),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sin" | "sine" => Ok(Self::sine()),
            "identity" | "id" | "linear" => Ok(Self::identity()),
            "tanh" => Ok(Self::tanh()),
            other => {
                Err(Error::InvalidParameter(format!("unknown nonlinearity '{other}' (expected sin, identity or tanh)")))
            }
        }
    }

    /// A user-supplied nonlinearity. `bound` is `sup |φ|` when finite.
    pub fn custom(
        name: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        antiderivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        bound: Option<f64>,
    ) -> Result<Self> {
        let nl = Self {
            name: name.into(),
            phi: Arc::new(phi),
            dphi: Arc::new(dphi),
            antiderivative: Arc::new(antiderivative),
            bound,
        };
        nl.check()?;
        Ok(nl)
    }

    /// Checks `φ(0) = 0`, `φ′(0) > 0`, `F(0) = 0` and `F′ = φ` by central
    /// differences on a few sample points.
    pub fn check(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::InvalidParameter(format!("nonlinearity '{}': {what}", self.name)));
        if self.eval(0.0) != 0.0 {
            return fail("phi(0) must be 0");
        }
        if self.derivative(0.0) <= 0.0 {
            return fail("phi'(0) must be positive");
        }
        if self.antiderivative(0.0).abs() > 1e-15 {
            return fail("antiderivative must vanish at 0");
        }
        let h = 1e-6;
        for x in [-2.5, -1.0, -0.3, 0.0, 0.4, 1.1, 3.0] {
            let fd = (self.antiderivative(x + h) - self.antiderivative(x - h)) / (2.0 * h);
            if (fd - self.eval(x)).abs() > 1e-6 * self.eval(x).abs().max(1.0) {
                return fail("antiderivative does not differentiate to phi");
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.dphi)(x)
    }

    pub fn antiderivative(&self, x: f64) -> f64 {
        (self.antiderivative)(x)
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn is_bounded(&self) -> bool {
        self.bound.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Euler,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "euler" => Ok(Self::Euler),
            other => Err(Error::InvalidParameter(format!("unknown integrator '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSettings {
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    /// Record every `stride`-th step (the first and last step are always kept).
    pub stride: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self { method: Method::Rk4, dt: 1e-2, t_end: 10.0, stride: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub d: usize,
    pub omega: Vec<f64>,
    pub nonlinearity: Nonlinearity,
    pub integrator: IntegratorSettings,
}

impl FlowConfig {
    /// Zero forcing on dimension `d` of `x`.
    pub fn homogeneous(x: &SimplicialComplex, d: usize, nonlinearity: Nonlinearity) -> Self {
        Self { d, omega: vec![0.0; x.count(d)], nonlinearity, integrator: IntegratorSettings::default() }
    }

    pub fn with_omega(mut self, omega: Vec<f64>) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_integrator(mut self, integrator: IntegratorSettings) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn is_homogeneous(&self) -> bool {
        self.omega.iter().all(|&w| w == 0.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    fn push(&mut self, t: f64, state: &[f64], energy: f64) {
        self.times.push(t);
        self.states.push(state.to_vec());
        self.energies.push(energy);
    }

    /// Writes `t,energy,x_0,...,x_{N-1}` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string(), "energy".to_string()];
        header.extend((0..n).map(|i| format!("x_{i}")));
        writeln!(out, "{}", header.join(","))?;
        for ((t, e), s) in self.times.iter().zip(&self.energies).zip(&self.states) {
            let mut row = format!("{t:.16e},{e:.16e}");
            for v in s {
                row.push_str(&format!(",{v:.16e}"));
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty trajectory CSV".into()))??;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "t" || cols[1] != "energy" {
            return Err(Error::Parse(format!("bad trajectory header '{header}'")));
        }
        for (i, c) in cols[2..].iter().enumerate() {
            if *c != format!("x_{i}") {
                return Err(Error::Parse(format!("bad trajectory column '{c}'")));
            }
        }
        let mut traj = Trajectory::default();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{v}'"))))
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != cols.len() {
                return Err(Error::Parse(format!("row has {} fields, header has {}", values.len(), cols.len())));
            }
            traj.push(values[0], &values[2..], values[1]);
        }
        Ok(traj)
    }
}

/// A boundary operator together with the weights of its "other" dimension.
#[derive(Clone, Debug)]
struct Coupling {
    boundary: BoundaryOperator,
    weights: Vec<f64>,
}

/// The flow on one dimension of a fixed complex, with operators assembled once.
#[derive(Clone, Debug)]
pub struct SimplexFlow {
    cfg: FlowConfig,
    weights: Vec<f64>,
    /// `B_{d+1}` and `W_{d+1}`
    up: Option<Coupling>,
    /// `B_d` and `W_{d-1}`
    down: Option<Coupling>,
}

impl SimplexFlow {
    pub fn new(x: &SimplicialComplex, cfg: FlowConfig) -> Result<Self> {
        let d = cfg.d;
        if d > x.max_dim() {
            return Err(Error::UndefinedOperator(format!("no {d}-simplices (top dimension {})", x.max_dim())));
        }
        if cfg.omega.len() != x.count(d) {
            return Err(Error::DimensionError { expected: x.count(d), actual: cfg.omega.len() });
        }
        if !cfg.integrator.dt.is_finite() || cfg.integrator.dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", cfg.integrator.dt)));
        }
        let up = (d < x.max_dim())
            .then(|| -> Result<Coupling> {
                Ok(Coupling { boundary: boundary_matrix(x, d + 1)?, weights: x.weights(d + 1).to_vec() })
            })
            .transpose()?;
        let down = (d > 0)
            .then(|| -> Result<Coupling> {
                Ok(Coupling { boundary: boundary_matrix(x, d)?, weights: x.weights(d - 1).to_vec() })
            })
            .transpose()?;
        Ok(Self { weights: x.weights(d).to_vec(), cfg, up, down })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionError { expected: self.dim(), actual: theta.len() })
        }
    }

    fn weighted(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().zip(&self.weights).map(|(t, w)| t * w).collect()
    }

    /// The bracketed coupling term; `rhs = ω − coupling`.
    pub fn coupling(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(theta)?;
        let phi = &self.cfg.nonlinearity;
        let mut out = vec![0.0; self.dim()];
        if let Some(up) = &self.up {
            let inner: Vec<f64> =
                up.boundary.apply_transpose(theta).into_iter().zip(&up.weights).map(|(v, w)| w * phi.eval(v)).collect();
            for ((o, v), w) in out.iter_mut().zip(up.boundary.apply(&inner)).zip(&self.weights) {
                *o += v / w;
            }
        }
        if let Some(down) = &self.down {
            let inner: Vec<f64> = down
                .boundary
                .apply(&self.weighted(theta))
                .into_iter()
                .zip(&down.weights)
                .map(|(v, w)| phi.eval(v) / w)
                .collect();
            for (o, v) in out.iter_mut().zip(down.boundary.apply_transpose(&inner)) {
                *o += v;
            }
        }
        Ok(out)
    }

    pub fn rhs(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let coupling = self.coupling(theta)?;
        Ok(self.cfg.omega.iter().zip(coupling).map(|(w, c)| w - c).collect())
    }

    /// Energy whose gradient, rescaled by `−W_d⁻¹`, is the flow:
    /// `−⟨ω, W θ⟩ + Σ w_{d+1} F(B_{d+1}ᵀθ) + Σ w_{d-1}⁻¹ F(B_d W θ)`.
    pub fn energy(&self, theta: &[f64]) -> Result<f64> {
        self.check_len(theta)?;
        let big_f = &self.cfg.nonlinearity;
        let mut e: f64 = -self.cfg.omega.iter().zip(self.weighted(theta)).map(|(o, v)| o * v).sum::<f64>();
        if let Some(up) = &self.up {
            e += up
                .boundary
                .apply_transpose(theta)
                .iter()
                .zip(&up.weights)
                .map(|(v, w)| w * big_f.antiderivative(*v))
                .sum::<f64>();
        }
        if let Some(down) = &self.down {
            e += down
                .boundary
                .apply(&self.weighted(theta))
                .iter()
                .zip(&down.weights)
                .map(|(v, w)| big_f.antiderivative(*v) / w)
                .sum::<f64>();
        }
        Ok(e)
    }

    /// Jacobian of `rhs` at `x`:
    /// `−[W⁻¹B₊W₊ diag(φ′(B₊ᵀx)) B₊ᵀ + B₋ᵀW₋⁻¹ diag(φ′(B₋Wx)) B₋W]`.
    pub fn linearize(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(x)?;
        let n = self.dim();
        let phi = &self.cfg.nonlinearity;
        let mut jac = DMatrix::zeros(n, n);
        if let Some(up) = &self.up {
            let args = up.boundary.apply_transpose(x);
            for (g, arg) in args.iter().enumerate() {
                let scale = up.weights[g] * phi.derivative(*arg);
                let col = up.boundary.column(g);
                for &(i, si) in col {
                    for &(j, sj) in col {
                        jac[(i, j)] -= f64::from(si * sj) * scale / self.weights[i];
                    }
                }
            }
        }
        if let Some(down) = &self.down {
            let args = down.boundary.apply(&self.weighted(x));
            let mut rows: Vec<Vec<(usize, i8)>> = vec![Vec::new(); down.boundary.nrows()];
            for c in 0..n {
                for &(r, s) in down.boundary.column(c) {
                    rows[r].push((c, s));
                }
            }
            for (f, row) in rows.iter().enumerate() {
                let scale = phi.derivative(args[f]) / down.weights[f];
                for &(i, si) in row {
                    for &(j, sj) in row {
                        jac[(i, j)] -= f64::from(si * sj) * scale * self.weights[j];
                    }
                }
            }
        }
        Ok(jac)
    }

    /// `W^{1/2} J W^{-1/2}`; symmetric, and similar to the Jacobian.
    pub fn symmetrized_linearization(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let mut jac = self.linearize(x)?;
        let n = self.dim();
        let sqrt_w: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        for c in 0..n {
            for r in 0..n {
                jac[(r, c)] *= sqrt_w[r] / sqrt_w[c];
            }
        }
        let t = jac.transpose();
        Ok((jac + t) * 0.5)
    }

    /// Componentwise bound on `|rhs(θ) − ω|` valid for every `θ`.
    pub fn range_bound(&self) -> Result<Vec<f64>> {
        let m = self
            .cfg
            .nonlinearity
            .bound()
            .ok_or_else(|| Error::UnboundedNonlinearity(self.cfg.nonlinearity.name().to_string()))?;
        let mut b = vec![0.0; self.dim()];
        if let Some(up) = &self.up {
            for (g, w_g) in up.weights.iter().enumerate() {
                for &(i, _) in up.boundary.column(g) {
                    b[i] += w_g * m / self.weights[i];
                }
            }
        }
        if let Some(down) = &self.down {
            for (i, bi) in b.iter_mut().enumerate() {
                for &(f, _) in down.boundary.column(i) {
                    *bi += m / down.weights[f];
                }
            }
        }
        Ok(b)
    }

    fn step(&self, theta: &[f64], dt: f64) -> Result<Vec<f64>> {
        let axpy = |a: &[f64], k: &[f64], h: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, y)| x + h * y).collect() };
        match self.cfg.integrator.method {
            Method::Euler => Ok(axpy(theta, &self.rhs(theta)?, dt)),
            Method::Rk4 => {
                let k1 = self.rhs(theta)?;
                let k2 = self.rhs(&axpy(theta, &k1, 0.5 * dt))?;
                let k3 = self.rhs(&axpy(theta, &k2, 0.5 * dt))?;
                let k4 = self.rhs(&axpy(theta, &k3, dt))?;
                Ok(theta
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect())
            }
        }
    }

    /// Fixed-step integration from `theta0` up to `t_end`.
    pub fn integrate(&self, theta0: &[f64]) -> Result<Trajectory> {
        self.check_len(theta0)?;
        let IntegratorSettings { dt, t_end, stride, .. } = self.cfg.integrator;
        let stride = stride.max(1);
        let steps = (t_end / dt).round().max(0.0) as usize;
        let mut traj = Trajectory::default();
        if theta0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: 0.0, partial: Box::new(traj) });
        }
        traj.push(0.0, theta0, self.energy(theta0)?);
        let mut theta = theta0.to_vec();
        for k in 1..=steps {
            let next = self.step(&theta, dt)?;
            let t = k as f64 * dt;
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { time: t, partial: Box::new(traj) });
            }
            theta = next;
            if k % stride == 0 || k == steps {
                traj.push(t, &theta, self.energy(&theta)?);
            }
        }
        Ok(traj)
    }
}

pub fn rhs(x: &SimplicialComplex, cfg: &FlowConfig, theta: &[f64]) -> Result<Vec<f64>> {
    SimplexFlow::new(x, cfg.clone())?.rhs(theta)
}

pub fn energy(x: &SimplicialComplex, cfg: &FlowConfig, theta: &[f64]) -> Result<f64> {
    SimplexFlow::new(x, cfg.clone())?.energy(theta)
}

pub fn integrate(x: &SimplicialComplex, cfg: &FlowConfig, theta0: &[f64]) -> Result<Trajectory> {
    SimplexFlow::new(x, cfg.clone())?.integrate(theta0)
}

pub fn range_bound(x: &SimplicialComplex, cfg: &FlowConfig) -> Result<Vec<f64>> {
    SimplexFlow::new(x, cfg.clone())?.range_bound()
}

/// Vertex flow evaluated pairwise as a network consensus model,
/// `ω_i + τ_i⁻¹ Σ_j γ_ij φ(θ_j − θ_i)`, straight from the edge list.
pub fn rhs_vertex_oracle(x: &SimplicialComplex, phi: &Nonlinearity, omega: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
    let n = x.count(0);
    for len in [omega.len(), theta.len()] {
        if len != n {
            return Err(Error::DimensionError { expected: n, actual: len });
        }
    }
    let position = |v: usize| x.index_of(&[v]).map(|r| r.index).expect("edge endpoint is a vertex");
    let tau = x.weights(0);
    let mut out = omega.to_vec();
    for (edge, &gamma) in x.simplices(1).iter().zip(x.weights(1)) {
        let (a, b) = (position(edge[0]), position(edge[1]));
        out[a] += gamma * phi.eval(theta[b] - theta[a]) / tau[a];
        out[b] += gamma * phi.eval(theta[a] - theta[b]) / tau[b];
    }
    Ok(out)
}
