#![allow(dead_code)]

use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simplex_flow::SimplicialComplex;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Random closed complex with at most `max_simplices` simplices in total.
pub fn random_complex(rng: &mut impl Rng, max_simplices: usize) -> SimplicialComplex {
    loop {
        let n_vertices = rng.gen_range(3..=7);
        let n_gen = rng.gen_range(1..=5);
        let mut gens = Vec::new();
        for _ in 0..n_gen {
            let size = rng.gen_range(2..=4.min(n_vertices));
            let mut pool: Vec<usize> = (0..n_vertices).collect();
            let mut s = Vec::new();
            for _ in 0..size {
                s.push(pool.swap_remove(rng.gen_range(0..pool.len())));
            }
            gens.push(s);
        }
        let x = SimplicialComplex::build(&gens, None).unwrap();
        if x.counts().iter().sum::<usize>() <= max_simplices {
            return x;
        }
    }
}

/// Same complex with independent weights drawn from `[lo, hi)` on every simplex.
pub fn randomly_weighted(rng: &mut impl Rng, x: &SimplicialComplex, lo: f64, hi: f64) -> SimplicialComplex {
    let mut weights = HashMap::new();
    for d in 0..=x.max_dim() {
        for s in x.simplices(d) {
            weights.insert(s.clone(), rng.gen_range(lo..hi));
        }
    }
    let gens: Vec<Vec<usize>> = (0..=x.max_dim()).flat_map(|d| x.simplices(d).to_vec()).collect();
    SimplicialComplex::build(&gens, Some(&weights)).unwrap()
}

/// Lists of random vertex tuples (any order) over a small vertex set.
pub fn simplex_lists() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::btree_set(0usize..7, 1..=4), 1..6)
        .prop_map(|sets| sets.into_iter().map(|s| s.into_iter().rev().collect()).collect())
}

/// Central-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let plus = f(&probe);
            probe[i] = x[i] - h;
            let minus = f(&probe);
            probe[i] = x[i];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Jacobian, row-major, entry `[i][j] = ∂f_i/∂x_j`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let mut probe = x.to_vec();
    let n = x.len();
    let mut rows = vec![vec![0.0; n]; f(x).len()];
    for j in 0..n {
        probe[j] = x[j] + h;
        let plus = f(&probe);
        probe[j] = x[j] - h;
        let minus = f(&probe);
        probe[j] = x[j];
        for (i, row) in rows.iter_mut().enumerate() {
            row[j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    rows
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn rel_error(got: &[f64], want: &[f64]) -> f64 {
    let diff: Vec<f64> = got.iter().zip(want).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(want).max(1e-300)
}

/// Signed faces of an ascending tuple: `(face, (−1)^ℓ)` for each dropped position `ℓ`.
pub fn signed_faces(simplex: &[usize]) -> Vec<(Vec<usize>, f64)> {
    (0..simplex.len())
        .map(|l| {
            let mut face = simplex.to_vec();
            face.remove(l);
            (face, if l % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect()
}
