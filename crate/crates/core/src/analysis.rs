//! Steady states of the simplex flow: linear stability, homological
//! solutions, Betti numbers and twist-like fixed points.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector, Dyn, Schur, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::SimplicialComplex;
use crate::dynamics::{FlowConfig, Nonlinearity, SimplexFlow};
use crate::error::{Error, Result};
use crate::operators::{boundary_matrix, BoundaryOperator};

/// Singular values below this fraction of the largest count as zero.
pub const NULLSPACE_RTOL: f64 = 1e-10;
/// Eigenvalues with `|λ| <` this are zero modes.
pub const ZERO_BAND: f64 = 1e-8;
/// `|rhs|∞` below this is a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Largest acceptable `|A x − b|∞` for the twist linear system.
pub const TWIST_TOL: f64 = 1e-8;

const SVD_EPS: [f64; 3] = [1e-14, 1e-15, f64::EPSILON];
const SVD_MAX_ITER: usize = 10_000;

type Svd = SVD<f64, Dyn, Dyn>;

/// Thin SVD checked by recomposition and orthogonality of `V`.
///
/// nalgebra's bidiagonal SVD occasionally returns a factorization that is off
/// by many orders of magnitude on rank-deficient input. Another convergence
/// tolerance or the transposed problem does not, so those are tried in turn.
fn svd(m: DMatrix<f64>) -> Result<Svd> {
    let (rows, cols) = m.shape();
    let accept = 1e-12 * m.amax().max(f64::MIN_POSITIVE) * rows.max(cols) as f64;
    let mut worst = 0.0f64;
    for eps in SVD_EPS {
        for transposed in [false, true] {
            let input = if transposed { m.transpose() } else { m.clone() };
            let Some(mut s) = SVD::try_new(input, true, true, eps, SVD_MAX_ITER) else { continue };
            if transposed {
                // Aᵀ = U Σ Vᵀ gives A = V Σ Uᵀ
                let (u, v_t) = (s.u.take(), s.v_t.take());
                s.u = v_t.map(|v| v.transpose());
                s.v_t = u.map(|u| u.transpose());
            }
            let v_t = s.v_t.as_ref().expect("requested right singular vectors");
            let orth = (v_t * v_t.transpose() - DMatrix::identity(v_t.nrows(), v_t.nrows())).amax();
            let recomposed = s.clone().recompose().map_err(|e| Error::NumericalError(e.to_string()))?;
            let err = (recomposed - &m).amax().max(orth * m.amax());
            if err <= accept {
                return Ok(s);
            }
            worst = worst.max(err);
        }
    }
    let fallback = jacobi_svd(&m);
    let err = (fallback.clone().recompose().map_err(|e| Error::NumericalError(e.to_string()))? - &m).amax();
    if err <= accept {
        return Ok(fallback);
    }
    Err(Error::NumericalError(format!("SVD inaccurate on a {rows}x{cols} matrix (error {:e})", worst.min(err))))
}

/// One-sided Jacobi SVD (Hestenes). Slow but unconditionally accurate.
fn jacobi_svd(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = m.shape();
    if rows < cols {
        let mut s = jacobi_svd(&m.transpose());
        let (u, v_t) = (s.u.take(), s.v_t.take());
        s.u = v_t.map(|v| v.transpose());
        s.v_t = u.map(|u| u.transpose());
        return s;
    }
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = c * x - s * y;
                        mat[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = DVector::from_iterator(cols, (0..cols).map(|j| a.column(j).norm()));
    for j in 0..cols {
        if sigma[j] > 0.0 {
            a.column_mut(j).unscale_mut(sigma[j]);
        }
    }
    SVD { u: Some(a), v_t: Some(v.transpose()), singular_values: sigma }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn linearize(x: &SimplicialComplex, cfg: &FlowConfig, state: &[f64]) -> Result<DMatrix<f64>> {
    SimplexFlow::new(x, cfg.clone())?.linearize(state)
}

/// All eigenvalues of a square matrix, sorted by real part then imaginary part.
pub fn spectrum(j: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !j.is_square() {
        return Err(Error::InvalidParameter(format!("spectrum of a {}x{} matrix", j.nrows(), j.ncols())));
    }
    if j.nrows() == 0 {
        return Ok(Vec::new());
    }
    let scale = j.amax();
    if scale == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); j.nrows()]);
    }
    // clustered eigenvalues can stall deflation at machine precision
    let scaled = j / scale;
    let schur = [1.0, 4.0, 64.0, 1024.0]
        .iter()
        .find_map(|k| Schur::try_new(scaled.clone(), k * f64::EPSILON, SVD_MAX_ITER))
        .ok_or_else(|| Error::NumericalError("Schur decomposition did not converge".into()))?;
    let mut eig: Vec<Complex64> = schur.complex_eigenvalues().iter().map(|l| l * scale).collect();
    sort_spectrum(&mut eig);
    Ok(eig)
}

fn sort_spectrum(eig: &mut [Complex64]) {
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Spectrum of the linearization at `state`, computed on its symmetrized
/// similarity transform so every eigenvalue comes out real.
pub fn linearization_spectrum(flow: &SimplexFlow, state: &[f64]) -> Result<Vec<Complex64>> {
    let sym = flow.symmetrized_linearization(state)?;
    let mut eig: Vec<Complex64> = if sym.nrows() == 0 {
        Vec::new()
    } else {
        sym.symmetric_eigenvalues().iter().map(|&re| Complex64::new(re, 0.0)).collect()
    };
    sort_spectrum(&mut eig);
    Ok(eig)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    StableModuloHomology,
    Marginal,
    Unstable,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::StableModuloHomology => "stable_modulo_homology",
            Self::Marginal => "marginal",
            Self::Unstable => "unstable",
        })
    }
}

fn is_zero_mode(l: &Complex64) -> bool {
    l.re.abs() < ZERO_BAND && l.im.abs() < ZERO_BAND
}

/// Stable modulo homology means exactly `h` zero modes and every other
/// eigenvalue strictly negative.
pub fn classify(eigenvalues: &[Complex64], homology_dim: usize) -> Classification {
    if eigenvalues.iter().any(|l| l.re > ZERO_BAND) {
        return Classification::Unstable;
    }
    let zeros = eigenvalues.iter().filter(|l| is_zero_mode(l)).count();
    let rest_negative = eigenvalues.iter().filter(|l| !is_zero_mode(l)).all(|l| l.re < -ZERO_BAND);
    if zeros == homology_dim && rest_negative {
        Classification::StableModuloHomology
    } else {
        Classification::Marginal
    }
}

/// Orthonormal basis of `ker B_{d+1}ᵀ ∩ ker B_d W_d`.
#[derive(Clone, Debug)]
pub struct HomologicalBasis {
    pub d: usize,
    pub vectors: Vec<Vec<f64>>,
    /// Absolute singular-value cutoff that was applied.
    pub threshold: f64,
}

impl HomologicalBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; theta.len()];
        for v in &self.vectors {
            let c: f64 = v.iter().zip(theta).map(|(a, b)| a * b).sum();
            for (o, vi) in out.iter_mut().zip(v) {
                *o += c * vi;
            }
        }
        out
    }

    /// Euclidean distance from `theta` to the homological subspace.
    pub fn distance(&self, theta: &[f64]) -> f64 {
        let p = self.project(theta);
        two_norm(&theta.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>())
    }

    /// `Σ cᵢ vᵢ`
    pub fn combine(&self, coefficients: &[f64]) -> Vec<f64> {
        let n = self.vectors.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (c, v) in coefficients.iter().zip(&self.vectors) {
            for (o, vi) in out.iter_mut().zip(v) {
                *o += c * vi;
            }
        }
        out
    }
}

fn stacked_constraints(x: &SimplicialComplex, d: usize) -> Result<DMatrix<f64>> {
    let n = x.count(d);
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();
    if d < x.max_dim() {
        blocks.push(boundary_matrix(x, d + 1)?.to_dense().transpose());
    }
    if d > 0 {
        let mut bw = boundary_matrix(x, d)?.to_dense();
        for (c, w) in x.weights(d).iter().enumerate() {
            bw.column_mut(c).scale_mut(*w);
        }
        blocks.push(bw);
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    // pad to at least n rows so the SVD returns a full right basis
    let mut stacked = DMatrix::zeros(rows.max(n), n);
    let mut r0 = 0;
    for b in blocks {
        stacked.view_mut((r0, 0), (b.nrows(), n)).copy_from(&b);
        r0 += b.nrows();
    }
    Ok(stacked)
}

pub fn homological_basis(x: &SimplicialComplex, d: usize) -> Result<HomologicalBasis> {
    homological_basis_with_tol(x, d, NULLSPACE_RTOL)
}

/// Right singular vectors of `[B_{d+1}ᵀ; B_d W_d]` whose singular value is
/// below `rtol · σ_max`.
pub fn homological_basis_with_tol(x: &SimplicialComplex, d: usize, rtol: f64) -> Result<HomologicalBasis> {
    if d > x.max_dim() {
        return Err(Error::UndefinedOperator(format!("no {d}-simplices (top dimension {})", x.max_dim())));
    }
    let n = x.count(d);
    let stacked = stacked_constraints(x, d)?;
    let decomposition = svd(stacked)?;
    let sigma_max = decomposition.singular_values.max();
    let threshold = rtol * sigma_max;
    let v_t = decomposition.v_t.expect("requested right singular vectors");
    let vectors = decomposition
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| v_t.row(i).iter().copied().collect::<Vec<f64>>())
        .collect::<Vec<_>>();
    debug_assert!(vectors.iter().all(|v| v.len() == n));
    Ok(HomologicalBasis { d, vectors, threshold })
}

/// Rank over the reals with the relative cutoff [`NULLSPACE_RTOL`].
pub fn numerical_rank(m: &DMatrix<f64>) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    let s = svd(m.clone())?.singular_values;
    let cutoff = NULLSPACE_RTOL * s.max();
    Ok(s.iter().filter(|&&v| v > cutoff && v > 0.0).count())
}

fn boundary_rank(b: &BoundaryOperator) -> Result<usize> {
    numerical_rank(&b.to_dense())
}

/// `dim ker B_d − rank B_{d+1}`.
pub fn betti(x: &SimplicialComplex, d: usize) -> Result<usize> {
    if d > x.max_dim() {
        return Err(Error::UndefinedOperator(format!("no {d}-simplices (top dimension {})", x.max_dim())));
    }
    let kernel = if d == 0 { x.count(0) } else { x.count(d) - boundary_rank(&boundary_matrix(x, d)?)? };
    let image = if d < x.max_dim() { boundary_rank(&boundary_matrix(x, d + 1)?)? } else { 0 };
    Ok(kernel - image)
}

mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `|rhs(x)|∞` at the reported point.
    pub residual: f64,
    #[serde(with = "complex_pairs")]
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    pub zero_modes: usize,
    pub homology_dim: usize,
    pub fixed_point: Vec<f64>,
}

/// Evaluates residual and linear stability of `flow` at `state`.
pub fn stability_report(flow: &SimplexFlow, state: &[f64], homology_dim: usize) -> Result<StabilityReport> {
    let residual = inf_norm(&flow.rhs(state)?);
    let eigenvalues = linearization_spectrum(flow, state)?;
    Ok(StabilityReport {
        residual,
        classification: classify(&eigenvalues, homology_dim),
        zero_modes: eigenvalues.iter().filter(|l| is_zero_mode(l)).count(),
        eigenvalues,
        homology_dim,
        fixed_point: state.to_vec(),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct FixedPointOptions {
    pub max_newton: usize,
    pub integrate_rounds: usize,
    pub max_halvings: usize,
    pub tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { max_newton: 200, integrate_rounds: 3, max_halvings: 20, tol: FIXED_POINT_TOL }
    }
}

/// Pseudo-inverse solve of `J δ = b` with the relative cutoff [`NULLSPACE_RTOL`].
fn pinv_solve(j: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let decomposition = svd(j)?;
    let cutoff = NULLSPACE_RTOL * decomposition.singular_values.max();
    let sol = decomposition
        .solve(&DVector::from_column_slice(b), cutoff.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::NumericalError(e.to_string()))?;
    Ok(sol.as_slice().to_vec())
}

pub fn find_fixed_point(x: &SimplicialComplex, cfg: &FlowConfig, x0: &[f64]) -> Result<StabilityReport> {
    find_fixed_point_with(x, cfg, x0, FixedPointOptions::default())
}

/// Damped Newton on `rhs(x) = 0`. When a Newton step cannot reduce the
/// residual after `max_halvings` halvings, the flow is integrated for
/// `cfg.integrator.t_end` and Newton restarts from there.
pub fn find_fixed_point_with(
    x: &SimplicialComplex,
    cfg: &FlowConfig,
    x0: &[f64],
    opts: FixedPointOptions,
) -> Result<StabilityReport> {
    let flow = SimplexFlow::new(x, cfg.clone())?;
    let h = homological_basis(x, cfg.d)?.dim();
    let mut state = x0.to_vec();
    let mut residual;
    let mut iterations = 0;
    let mut rounds = 0;

    loop {
        loop {
            let r = flow.rhs(&state)?;
            residual = inf_norm(&r);
            if residual < opts.tol {
                return stability_report(&flow, &state, h);
            }
            if iterations >= opts.max_newton {
                return Err(Error::NoConvergence { iterations, residual });
            }
            iterations += 1;

            let minus_r: Vec<f64> = r.iter().map(|v| -v).collect();
            let step = pinv_solve(flow.linearize(&state)?, &minus_r)?;
            let current = two_norm(&r);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let candidate: Vec<f64> = state.iter().zip(&step).map(|(s, d)| s + lambda * d).collect();
                if candidate.iter().all(|v| v.is_finite()) && two_norm(&flow.rhs(&candidate)?) < current {
                    accepted = Some(candidate);
                    break;
                }
                lambda *= 0.5;
            }
            match accepted {
                Some(next) => state = next,
                None => break,
            }
        }

        if rounds >= opts.integrate_rounds {
            return Err(Error::NoConvergence { iterations, residual });
        }
        rounds += 1;
        state = match flow.integrate(&state) {
            Ok(traj) => traj.final_state().map(<[f64]>::to_vec).unwrap_or(state),
            Err(Error::Divergence { .. }) => return Err(Error::NoConvergence { iterations, residual }),
            Err(e) => return Err(e),
        };
    }
}

/// Right-hand side pattern `(α, …, α, α − 2π, α, …)` for the twist system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistPattern {
    /// Vertex carrying the `α − 2π` entry; defaults to the last vertex.
    pub special_index: Option<usize>,
    pub alpha: f64,
}

impl TwistPattern {
    pub fn new(alpha: f64) -> Self {
        Self { special_index: None, alpha }
    }

    pub fn at(mut self, special_index: usize) -> Self {
        self.special_index = Some(special_index);
        self
    }
}

/// `2π / |X₀|`, the only `α` for which the twist pattern sums to zero on a
/// connected complex (2π/n on the n-cycle, 2π/(mn) on the torus).
pub fn auto_twist_alpha(x: &SimplicialComplex) -> f64 {
    2.0 * PI / x.count(0) as f64
}

#[derive(Clone, Debug)]
pub struct TwistSolution {
    pub state: Vec<f64>,
    /// `|A x − b|∞` of the stacked linear system.
    pub linear_residual: f64,
    pub report: StabilityReport,
}

/// Solves `B₁ W₁ x = b`, `B₂ᵀ x = 0` in least squares and, if consistent,
/// reports the stability of `x` as a fixed point of the sine edge flow.
pub fn solve_twist(x: &SimplicialComplex, pattern: TwistPattern) -> Result<TwistSolution> {
    if x.max_dim() < 1 {
        return Err(Error::UndefinedOperator("twist solutions need edges".into()));
    }
    let n0 = x.count(0);
    let n1 = x.count(1);
    let special = pattern.special_index.unwrap_or(n0 - 1);
    if special >= n0 {
        return Err(Error::InvalidParameter(format!("special index {special} out of range ({n0} vertices)")));
    }

    let mut b1w = boundary_matrix(x, 1)?.to_dense();
    for (c, w) in x.weights(1).iter().enumerate() {
        b1w.column_mut(c).scale_mut(*w);
    }
    let n2 = if x.max_dim() >= 2 { x.count(2) } else { 0 };
    let mut a = DMatrix::zeros(n0 + n2, n1);
    a.view_mut((0, 0), (n0, n1)).copy_from(&b1w);
    if n2 > 0 {
        a.view_mut((n0, 0), (n2, n1)).copy_from(&boundary_matrix(x, 2)?.to_dense().transpose());
    }
    let mut target = vec![0.0; n0 + n2];
    target[..n0].fill(pattern.alpha);
    target[special] -= 2.0 * PI;

    let state = pinv_solve(a.clone(), &target)?;
    let achieved = &a * DVector::from_column_slice(&state);
    let linear_residual = inf_norm(&achieved.iter().zip(&target).map(|(p, q)| p - q).collect::<Vec<_>>());
    if linear_residual.is_nan() || linear_residual >= TWIST_TOL {
        return Err(Error::NoSolution { residual: linear_residual });
    }

    let flow = SimplexFlow::new(x, FlowConfig::homogeneous(x, 1, Nonlinearity::sine()))?;
    let h = homological_basis(x, 1)?.dim();
    let report = stability_report(&flow, &state, h)?;
    Ok(TwistSolution { state, linear_residual, report })
}

/// Closed-form seed `ξ_{ij} = ½ (n − i − j)(i − j)` on the edges of
/// `cycle_with_all_triangles(n)`, in basis order.
///
/// `ξ` is a coboundary (`ξ_{ij} = ½ (f(i) − f(j))` with `f(i) = n i − i²`), so
/// `B₂ᵀ ξ = 0` on the full complex. On the sub-graph of consecutive edges
/// `(i, i+1)` plus `(0, n−1)`, `B₁ ξ = (n − 1, −1, …, −1)`; with every pair
/// present `B₁ ξ` is not a one-defect pattern, which is why
/// [`solve_twist`] solves the linear system instead.
pub fn xi_seed(n: usize) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need n >= 3, got n = {n}")));
    }
    let nf = n as f64;
    let mut xi = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (fi, fj) = (i as f64, j as f64);
            xi.push(0.5 * (nf - fi - fj) * (fi - fj));
        }
    }
    Ok(xi)
}
