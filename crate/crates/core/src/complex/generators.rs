use std::ops::Deref;

use super::{canonicalize, SimplexRef, SimplicialComplex};
use crate::error::{Error, Result};

/// Circulant graph on `n` vertices: `{i, j}` is an edge iff the circular
/// distance between `i` and `j` is at most `k`.
pub fn cycle_complex(n: usize, k: usize) -> Result<SimplicialComplex> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got n = {n}")));
    }
    if k < 1 || k >= n / 2 {
        return Err(Error::InvalidParameter(format!(
            "cycle coupling range must satisfy 1 <= k < floor(n/2), got n = {n}, k = {k}"
        )));
    }
    let edges: Vec<Vec<usize>> = (0..n).flat_map(|i| (1..=k).map(move |s| vec![i, (i + s) % n])).collect();
    SimplicialComplex::build(&edges, None)
}

/// All `C(n, 3)` triangles on `n` vertices, together with their faces (so
/// every pair of vertices is an edge).
pub fn cycle_with_all_triangles(n: usize) -> Result<SimplicialComplex> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need n >= 3, got n = {n}")));
    }
    let mut triangles = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                triangles.push(vec![i, j, k]);
            }
        }
    }
    SimplicialComplex::build(&triangles, None)
}

/// Basis index of a labelled oriented simplex plus the sign relating the
/// label's vertex order to the stored ascending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrientedRef {
    pub index: usize,
    pub sign: i8,
}

/// Triangulated `m x n` torus with label tables.
///
/// Vertex `(i, j)` has identifier `i * n + j`. Edge labels:
/// `h(i,j) = [(i,j),(i,j+1)]`, `v(i,j) = [(i,j),(i+1,j)]`,
/// `d(i,j) = [(i,j),(i+1,j+1)]`; triangle labels
/// `left(i,j) = [(i,j),(i+1,j),(i+1,j+1)]` and
/// `right(i,j) = [(i,j),(i,j+1),(i+1,j+1)]`, all indices taken mod `(m, n)`.
#[derive(Clone, Debug)]
pub struct TorusComplex {
    pub complex: SimplicialComplex,
    pub m: usize,
    pub n: usize,
    horizontal: Vec<OrientedRef>,
    vertical: Vec<OrientedRef>,
    diagonal: Vec<OrientedRef>,
    left: Vec<OrientedRef>,
    right: Vec<OrientedRef>,
}

impl Deref for TorusComplex {
    type Target = SimplicialComplex;

    fn deref(&self) -> &SimplicialComplex {
        &self.complex
    }
}

pub fn torus_complex(m: usize, n: usize) -> Result<TorusComplex> {
    if m < 3 || n < 3 {
        return Err(Error::InvalidParameter(format!("torus grid must be at least 3 x 3, got {m} x {n}")));
    }
    let vid = |i: usize, j: usize| (i % m) * n + (j % n);

    let mut edge_labels = Vec::with_capacity(3 * m * n);
    let mut tri_labels = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in 0..n {
            edge_labels.push([vid(i, j), vid(i, j + 1)]);
            edge_labels.push([vid(i, j), vid(i + 1, j)]);
            edge_labels.push([vid(i, j), vid(i + 1, j + 1)]);
            tri_labels.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
            tri_labels.push([vid(i, j), vid(i, j + 1), vid(i + 1, j + 1)]);
        }
    }
    let triangles: Vec<Vec<usize>> = tri_labels.iter().map(|t| t.to_vec()).collect();
    let complex = SimplicialComplex::build(&triangles, None)?;
    if complex.counts() != [m * n, 3 * m * n, 2 * m * n] {
        return Err(Error::InvalidParameter(format!(
            "{m} x {n} torus produced degenerate simplex counts {:?}",
            complex.counts()
        )));
    }

    let resolve = |tuple: &[usize]| -> OrientedRef {
        let (canon, sign) = canonicalize(tuple).expect("torus labels have distinct vertices");
        let SimplexRef { index, .. } = complex.index_of(&canon).expect("label present after closure");
        OrientedRef { index, sign }
    };
    let edges: Vec<OrientedRef> = edge_labels.iter().map(|e| resolve(e)).collect();
    let tris: Vec<OrientedRef> = tri_labels.iter().map(|t| resolve(t)).collect();

    Ok(TorusComplex {
        m,
        n,
        horizontal: edges.iter().copied().step_by(3).collect(),
        vertical: edges.iter().copied().skip(1).step_by(3).collect(),
        diagonal: edges.iter().copied().skip(2).step_by(3).collect(),
        left: tris.iter().copied().step_by(2).collect(),
        right: tris.iter().copied().skip(1).step_by(2).collect(),
        complex,
    })
}

impl TorusComplex {
    fn slot(&self, i: isize, j: isize) -> usize {
        let i = i.rem_euclid(self.m as isize) as usize;
        let j = j.rem_euclid(self.n as isize) as usize;
        i * self.n + j
    }

    /// Basis index of vertex `(i, j)` (indices wrap).
    pub fn vertex(&self, i: isize, j: isize) -> usize {
        self.slot(i, j)
    }

    pub fn edge_h(&self, i: isize, j: isize) -> OrientedRef {
        self.horizontal[self.slot(i, j)]
    }

    pub fn edge_v(&self, i: isize, j: isize) -> OrientedRef {
        self.vertical[self.slot(i, j)]
    }

    pub fn edge_d(&self, i: isize, j: isize) -> OrientedRef {
        self.diagonal[self.slot(i, j)]
    }

    pub fn tri_left(&self, i: isize, j: isize) -> OrientedRef {
        self.left[self.slot(i, j)]
    }

    pub fn tri_right(&self, i: isize, j: isize) -> OrientedRef {
        self.right[self.slot(i, j)]
    }

    pub fn into_complex(self) -> SimplicialComplex {
        self.complex
    }
}
