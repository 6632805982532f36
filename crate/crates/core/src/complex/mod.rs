//! Weighted oriented simplicial complexes.
//!
//! Every simplex is stored as a strictly ascending vertex tuple; that order is
//! its orientation. Within each dimension the simplices are kept in
//! lexicographic order, and that order is the basis order used by every matrix
//! built from the complex.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

mod generators;
mod io;

pub use generators::{cycle_complex, cycle_with_all_triangles, torus_complex, OrientedRef, TorusComplex};
pub use io::ComplexFile;

/// A simplex given by its vertex identifiers in ascending order.
pub type Simplex = Vec<usize>;

/// A simplex addressed by dimension and position in the basis of that dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexRef {
    pub dim: usize,
    pub index: usize,
}

impl SimplexRef {
    pub fn new(dim: usize, index: usize) -> Self {
        Self { dim, index }
    }
}

/// Sorts a vertex tuple into canonical ascending order and returns the sign of
/// the sorting permutation. Returns `None` if a vertex is repeated.
pub fn canonicalize(tuple: &[usize]) -> Option<(Simplex, i8)> {
    let mut sorted = tuple.to_vec();
    let mut sign = 1i8;
    // insertion sort so the transposition count gives the parity
    for i in 1..sorted.len() {
        let mut j = i;
        while j > 0 && sorted[j - 1] > sorted[j] {
            sorted.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sorted, sign))
}

#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<Simplex>>,
    weights: Vec<Vec<f64>>,
    lookup: Vec<HashMap<Simplex, usize>>,
}

impl SimplicialComplex {
    /// Builds the face closure of `simplex_list`.
    ///
    /// Input tuples may come in any vertex order; they are reduced to ascending
    /// order. Weights are keyed by vertex tuple (any order) and default to 1.
    pub fn build(simplex_list: &[Vec<usize>], weights: Option<&HashMap<Vec<usize>, f64>>) -> Result<Self> {
        if simplex_list.is_empty() {
            return Err(Error::InvalidParameter("empty simplex list".into()));
        }
        let mut by_dim: Vec<BTreeSet<Simplex>> = Vec::new();
        for tuple in simplex_list {
            if tuple.is_empty() {
                return Err(Error::InvalidSimplex { simplex: tuple.clone(), reason: "empty vertex tuple".into() });
            }
            let (canon, _) = canonicalize(tuple)
                .ok_or_else(|| Error::InvalidSimplex { simplex: tuple.clone(), reason: "repeated vertex".into() })?;
            insert_with_faces(&mut by_dim, canon);
        }

        let simplices: Vec<Vec<Simplex>> = by_dim.into_iter().map(|set| set.into_iter().collect()).collect();
        let lookup = build_lookup(&simplices);
        let mut weight_vecs: Vec<Vec<f64>> = simplices.iter().map(|level| vec![1.0; level.len()]).collect();

        if let Some(map) = weights {
            for (key, &w) in map {
                let (canon, _) = canonicalize(key)
                    .ok_or_else(|| Error::InvalidSimplex { simplex: key.clone(), reason: "repeated vertex".into() })?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::InvalidWeight { simplex: canon, weight: w });
                }
                let dim = canon.len() - 1;
                let idx =
                    lookup.get(dim).and_then(|m| m.get(&canon)).copied().ok_or_else(|| Error::InvalidSimplex {
                        simplex: canon.clone(),
                        reason: "weight given for a simplex not in the complex".into(),
                    })?;
                weight_vecs[dim][idx] = w;
            }
        }

        Ok(Self { simplices, weights: weight_vecs, lookup })
    }

    /// Assembles a complex from raw per-dimension lists without closing,
    /// sorting or checking anything. Use [`SimplicialComplex::validate`] to
    /// inspect the result.
    pub fn from_parts_unchecked(simplices: Vec<Vec<Simplex>>, weights: Vec<Vec<f64>>) -> Self {
        let lookup = build_lookup(&simplices);
        Self { simplices, weights, lookup }
    }

    /// Returns a copy with the weights of dimension `dim` replaced.
    pub fn with_weights(&self, dim: usize, weights: Vec<f64>) -> Result<Self> {
        let expected = self.count(dim);
        if dim > self.max_dim() || weights.len() != expected {
            return Err(Error::DimensionError { expected, actual: weights.len() });
        }
        if let Some((i, &w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidWeight { simplex: self.simplices[dim][i].clone(), weight: w });
        }
        let mut out = self.clone();
        out.weights[dim] = weights;
        Ok(out)
    }

    pub fn max_dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, Vec::len)
    }

    /// Simplex counts for dimensions `0..=max_dim`.
    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn simplices(&self, dim: usize) -> &[Simplex] {
        self.simplices.get(dim).map_or(&[], Vec::as_slice)
    }

    pub fn weights(&self, dim: usize) -> &[f64] {
        self.weights.get(dim).map_or(&[], Vec::as_slice)
    }

    /// Vertex identifiers in basis order.
    pub fn vertices(&self) -> Vec<usize> {
        self.simplices(0).iter().map(|s| s[0]).collect()
    }

    pub fn simplex(&self, r: SimplexRef) -> &[usize] {
        &self.simplices[r.dim][r.index]
    }

    pub fn weight(&self, r: SimplexRef) -> f64 {
        self.weights[r.dim][r.index]
    }

    /// Basis index of a canonical (ascending) vertex tuple.
    pub fn index_of(&self, simplex: &[usize]) -> Option<SimplexRef> {
        let dim = simplex.len().checked_sub(1)?;
        self.lookup.get(dim)?.get(simplex).map(|&index| SimplexRef { dim, index })
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(d, s)| if d % 2 == 0 { s.len() as i64 } else { -(s.len() as i64) })
            .sum()
    }

    fn check_ref(&self, f: SimplexRef) -> Result<()> {
        if f.index < self.count(f.dim) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "simplex reference {f:?} out of range ({} simplices in dimension {})",
                self.count(f.dim),
                f.dim
            )))
        }
    }

    /// All other `d`-simplices sharing a `(d+1)`-coface with `f`, in basis order.
    pub fn upper_adjacent(&self, f: SimplexRef) -> Result<Vec<SimplexRef>> {
        self.check_ref(f)?;
        let face = self.simplex(f);
        let mut out = BTreeSet::new();
        for coface in self.cofaces_of(face) {
            for drop in 0..coface.len() {
                let mut other = coface.clone();
                other.remove(drop);
                if let Some(r) = self.index_of(&other) {
                    if r != f {
                        out.insert(r);
                    }
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// All other `d`-simplices sharing a `(d-1)`-face with `f`, in basis order.
    pub fn lower_adjacent(&self, f: SimplexRef) -> Result<Vec<SimplexRef>> {
        self.check_ref(f)?;
        let mut out = BTreeSet::new();
        if f.dim == 0 {
            return Ok(Vec::new());
        }
        let simplex = self.simplex(f);
        for drop in 0..simplex.len() {
            let mut face = simplex.to_vec();
            face.remove(drop);
            for coface in self.cofaces_of(&face) {
                if let Some(r) = self.index_of(&coface) {
                    if r != f {
                        out.insert(r);
                    }
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// `(d+1)`-simplices of the complex that contain `face`.
    fn cofaces_of(&self, face: &[usize]) -> Vec<Simplex> {
        let dim = face.len();
        if dim >= self.simplices.len() {
            return Vec::new();
        }
        self.simplices(0)
            .iter()
            .map(|v| v[0])
            .filter(|v| face.binary_search(v).is_err())
            .filter_map(|v| {
                let mut candidate = face.to_vec();
                let pos = candidate.partition_point(|&x| x < v);
                candidate.insert(pos, v);
                self.lookup[dim].contains_key(&candidate).then_some(candidate)
            })
            .collect()
    }

    /// Lists every violated invariant. An empty report means the complex is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        if self.weights.len() != self.simplices.len() {
            report.push(Violation::WeightCount {
                dim: self.simplices.len().min(self.weights.len()),
                expected: self.simplices.len(),
                actual: self.weights.len(),
            });
        }
        for (dim, level) in self.simplices.iter().enumerate() {
            let mut seen = HashMap::new();
            for (i, s) in level.iter().enumerate() {
                if s.len() != dim + 1 {
                    report.push(Violation::WrongDimension { dim, simplex: s.clone() });
                }
                if s.windows(2).any(|w| w[0] >= w[1]) {
                    report.push(Violation::NotAscending { simplex: s.clone() });
                }
                if seen.insert(s.clone(), i).is_some() {
                    report.push(Violation::Duplicate { simplex: s.clone() });
                }
                if i > 0 && level[i - 1] >= *s {
                    report.push(Violation::OutOfOrder { dim, index: i });
                }
                if dim > 0 && s.len() == dim + 1 {
                    for drop in 0..s.len() {
                        let mut face = s.clone();
                        face.remove(drop);
                        if !self.lookup[dim - 1].contains_key(&face) {
                            report.push(Violation::MissingFace { simplex: s.clone(), face });
                        }
                    }
                }
            }
            match self.weights.get(dim) {
                Some(w) if w.len() != level.len() => {
                    report.push(Violation::WeightCount { dim, expected: level.len(), actual: w.len() })
                }
                Some(w) => {
                    for (s, &wt) in level.iter().zip(w) {
                        if !(wt > 0.0 && wt.is_finite()) {
                            report.push(Violation::NonPositiveWeight { simplex: s.clone(), weight: wt });
                        }
                    }
                }
                None => {}
            }
        }
        report
    }
}

fn insert_with_faces(by_dim: &mut Vec<BTreeSet<Simplex>>, simplex: Simplex) {
    let dim = simplex.len() - 1;
    if by_dim.len() <= dim {
        by_dim.resize_with(dim + 1, BTreeSet::new);
    }
    if !by_dim[dim].insert(simplex.clone()) || dim == 0 {
        return;
    }
    for drop in 0..simplex.len() {
        let mut face = simplex.clone();
        face.remove(drop);
        insert_with_faces(by_dim, face);
    }
}

fn build_lookup(simplices: &[Vec<Simplex>]) -> Vec<HashMap<Simplex, usize>> {
    simplices.iter().map(|level| level.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect()
}

/// One broken invariant found by [`SimplicialComplex::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    MissingFace { simplex: Simplex, face: Simplex },
    NonPositiveWeight { simplex: Simplex, weight: f64 },
    NotAscending { simplex: Simplex },
    WrongDimension { dim: usize, simplex: Simplex },
    Duplicate { simplex: Simplex },
    OutOfOrder { dim: usize, index: usize },
    WeightCount { dim: usize, expected: usize, actual: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingFace { simplex, face } => {
                write!(f, "closure: face {face:?} of {simplex:?} is missing")
            }
            Violation::NonPositiveWeight { simplex, weight } => {
                write!(f, "weight: {simplex:?} has non-positive weight {weight}")
            }
            Violation::NotAscending { simplex } => {
                write!(f, "orientation: {simplex:?} is not strictly ascending")
            }
            Violation::WrongDimension { dim, simplex } => {
                write!(f, "dimension: {simplex:?} stored among {dim}-simplices")
            }
            Violation::Duplicate { simplex } => write!(f, "duplicate: {simplex:?}"),
            Violation::OutOfOrder { dim, index } => {
                write!(f, "ordering: {dim}-simplex at index {index} breaks lexicographic order")
            }
            Violation::WeightCount { dim, expected, actual } => {
                write!(f, "weights: dimension {dim} has {actual} weights for {expected} simplices")
            }
        }
    }
}
