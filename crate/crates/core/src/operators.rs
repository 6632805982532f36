//! Boundary, weight and Laplacian matrices in the canonical basis.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};

/// Laplacians on more simplices than this are stored sparse.
pub const DENSE_LIMIT: usize = 2000;

/// Signed incidence matrix `B_d : C_d -> C_{d-1}`, stored by column with
/// integer entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryOperator {
    pub d: usize,
    rows: usize,
    columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryOperator {
    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    /// Nonzeros of column `c` as `(row, sign)`, ascending by row.
    pub fn column(&self, c: usize) -> &[(usize, i8)] {
        &self.columns[c]
    }

    pub fn entry(&self, row: usize, col: usize) -> i8 {
        self.columns[col].iter().find(|(r, _)| *r == row).map_or(0, |&(_, s)| s)
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// `B x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols());
        let mut out = vec![0.0; self.rows];
        for (col, &xc) in self.columns.iter().zip(x) {
            for &(r, s) in col {
                out[r] += f64::from(s) * xc;
            }
        }
        out
    }

    /// `Bᵀ y`
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        self.columns.iter().map(|col| col.iter().map(|&(r, s)| f64::from(s) * y[r]).sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.ncols());
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, s) in col {
                m[(r, c)] = f64::from(s);
            }
        }
        m
    }

    /// Exact integer product `self · rhs`, returned as nonzero `(row, col, value)` triples.
    pub fn compose(&self, rhs: &BoundaryOperator) -> Vec<(usize, usize, i64)> {
        assert_eq!(self.ncols(), rhs.nrows(), "inner dimensions differ");
        let mut out = Vec::new();
        for (c, col) in rhs.columns.iter().enumerate() {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for &(k, s) in col {
                for &(r, t) in &self.columns[k] {
                    *acc.entry(r).or_insert(0) += i64::from(s) * i64::from(t);
                }
            }
            out.extend(acc.into_iter().filter(|(_, v)| *v != 0).map(|(r, v)| (r, c, v)));
        }
        out
    }

    /// Nonzero `(row, col, value)` triples in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.columns.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |&(r, s)| (r, c, f64::from(s))))
    }
}

/// Builds `B_d` for `1 <= d <= max_dim`.
pub fn boundary_matrix(x: &SimplicialComplex, d: usize) -> Result<BoundaryOperator> {
    if d == 0 || d > x.max_dim() {
        return Err(Error::UndefinedOperator(format!("boundary B_{d} needs 1 <= d <= {}", x.max_dim())));
    }
    let mut columns = Vec::with_capacity(x.count(d));
    for simplex in x.simplices(d) {
        let mut col = Vec::with_capacity(d + 1);
        for drop in 0..simplex.len() {
            let mut face = simplex.clone();
            face.remove(drop);
            let r = x.index_of(&face).ok_or_else(|| Error::InvalidSimplex {
                simplex: simplex.clone(),
                reason: format!("face {face:?} missing from the complex"),
            })?;
            col.push((r.index, if drop % 2 == 0 { 1 } else { -1 }));
        }
        col.sort_unstable();
        columns.push(col);
    }
    Ok(BoundaryOperator { d, rows: x.count(d - 1), columns })
}

/// Diagonal weight matrix `W_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightOperator {
    pub d: usize,
    pub diagonal: Vec<f64>,
}

impl WeightOperator {
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.diagonal))
    }
}

pub fn weight_matrix(x: &SimplicialComplex, d: usize) -> Result<WeightOperator> {
    if d > x.max_dim() {
        return Err(Error::UndefinedOperator(format!("weight matrix W_{d} needs d <= {}", x.max_dim())));
    }
    Ok(WeightOperator { d, diagonal: x.weights(d).to_vec() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianPart {
    Up,
    Down,
    Full,
}

impl std::str::FromStr for LaplacianPart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "up" => Ok(Self::Up),
            "down" => Ok(Self::Down),
            "full" => Ok(Self::Full),
            other => Err(Error::InvalidParameter(format!("unknown Laplacian part '{other}'"))),
        }
    }
}

impl fmt::Display for LaplacianPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Up => "up",
            Self::Down => "down",
            Self::Full => "full",
        })
    }
}

#[derive(Clone, Debug)]
pub enum LaplacianMatrix {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix<f64>),
}

/// Weighted combinatorial Laplacian
/// `W_d⁻¹ B_{d+1} W_{d+1} B_{d+1}ᵀ + B_dᵀ W_{d-1}⁻¹ B_d W_d`
/// or one of its two halves.
#[derive(Clone, Debug)]
pub struct LaplacianOperator {
    pub d: usize,
    pub part: LaplacianPart,
    pub matrix: LaplacianMatrix,
    weights: Vec<f64>,
}

impl LaplacianOperator {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.matrix, LaplacianMatrix::Sparse(_))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.matrix {
            LaplacianMatrix::Dense(m) => m.clone(),
            LaplacianMatrix::Sparse(m) => {
                let mut out = DMatrix::zeros(m.nrows(), m.ncols());
                for (r, c, v) in m.triplet_iter() {
                    out[(r, c)] += *v;
                }
                out
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        match &self.matrix {
            LaplacianMatrix::Dense(m) => (m * DVector::from_column_slice(x)).as_slice().to_vec(),
            LaplacianMatrix::Sparse(m) => {
                let mut out = vec![0.0; m.nrows()];
                for (r, c, v) in m.triplet_iter() {
                    out[r] += v * x[c];
                }
                out
            }
        }
    }

    /// `W^{1/2} L W^{-1/2}`, which is symmetric.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let sqrt_w: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let n = self.dim();
        let mut s = self.to_dense();
        for c in 0..n {
            for r in 0..n {
                s[(r, c)] *= sqrt_w[r] / sqrt_w[c];
            }
        }
        let st = s.transpose();
        (s + st) * 0.5
    }

    /// Real eigenvalues in ascending order, computed on the symmetrized form.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut eig: Vec<f64> = self.symmetrized().symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// Nonzero `(row, col, value)` triples in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match &self.matrix {
            LaplacianMatrix::Dense(m) => {
                let mut out = Vec::new();
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        if m[(r, c)] != 0.0 {
                            out.push((r, c, m[(r, c)]));
                        }
                    }
                }
                out
            }
            LaplacianMatrix::Sparse(m) => m.triplet_iter().map(|(r, c, v)| (r, c, *v)).collect(),
        }
    }
}

pub fn laplacian(x: &SimplicialComplex, d: usize, part: LaplacianPart) -> Result<LaplacianOperator> {
    if d > x.max_dim() {
        return Err(Error::UndefinedOperator(format!("Laplacian L_{d} needs d <= {}", x.max_dim())));
    }
    let n = x.count(d);
    let w = x.weights(d);
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();

    if part != LaplacianPart::Down && d < x.max_dim() {
        let up = boundary_matrix(x, d + 1)?;
        let w_up = x.weights(d + 1);
        for (g, col) in up.columns.iter().enumerate() {
            for &(i, si) in col {
                for &(j, sj) in col {
                    entries.push((i, j, f64::from(si * sj) * w_up[g] / w[i]));
                }
            }
        }
    }
    if part != LaplacianPart::Up && d > 0 {
        let down = boundary_matrix(x, d)?;
        let w_down = x.weights(d - 1);
        let mut rows: Vec<Vec<(usize, i8)>> = vec![Vec::new(); down.nrows()];
        for (c, col) in down.columns.iter().enumerate() {
            for &(r, s) in col {
                rows[r].push((c, s));
            }
        }
        for (f, row) in rows.iter().enumerate() {
            for &(i, si) in row {
                for &(j, sj) in row {
                    entries.push((i, j, f64::from(si * sj) * w[j] / w_down[f]));
                }
            }
        }
    }

    let matrix = if n <= DENSE_LIMIT {
        let mut m = DMatrix::zeros(n, n);
        for (i, j, v) in entries {
            m[(i, j)] += v;
        }
        LaplacianMatrix::Dense(m)
    } else {
        let mut coo = CooMatrix::new(n, n);
        for (i, j, v) in entries {
            coo.push(i, j, v);
        }
        LaplacianMatrix::Sparse(CsrMatrix::from(&coo))
    };
    Ok(LaplacianOperator { d, part, matrix, weights: w.to_vec() })
}
