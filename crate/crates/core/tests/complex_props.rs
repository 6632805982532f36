mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use simplex_flow::complex::{cycle_complex, cycle_with_all_triangles, torus_complex, OrientedRef};
use simplex_flow::operators::boundary_matrix;
use simplex_flow::{SimplexRef, SimplicialComplex};

fn edge_vector(n_edges: usize, terms: &[(OrientedRef, f64)]) -> Vec<f64> {
    let mut v = vec![0.0; n_edges];
    for (e, c) in terms {
        v[e.index] += c * f64::from(e.sign);
    }
    v
}

#[test]
fn torus_vertex_degree_and_edge_cofaces() {
    for (m, n) in [(3, 3), (4, 6), (7, 5)] {
        let t = torus_complex(m, n).unwrap();
        let mut degree = vec![0; t.count(0)];
        for e in t.simplices(1) {
            degree[t.index_of(&[e[0]]).unwrap().index] += 1;
            degree[t.index_of(&[e[1]]).unwrap().index] += 1;
        }
        assert!(degree.iter().all(|&k| k == 6), "{m}x{n}: {degree:?}");

        let b2 = boundary_matrix(&t, 2).unwrap();
        let mut cofaces = vec![0; t.count(1)];
        for c in 0..b2.ncols() {
            for &(r, _) in b2.column(c) {
                cofaces[r] += 1;
            }
        }
        assert!(cofaces.iter().all(|&k| k == 2));
    }
}

#[test]
fn torus_boundary_relations() {
    let t = torus_complex(5, 4).unwrap();
    let b1 = boundary_matrix(&t, 1).unwrap();
    let b2 = boundary_matrix(&t, 2).unwrap();
    let n1 = t.count(1);
    let oriented_column = |r: OrientedRef| -> Vec<f64> {
        let mut v = vec![0.0; n1];
        for &(row, s) in b2.column(r.index) {
            v[row] = f64::from(s) * f64::from(r.sign);
        }
        v
    };
    for i in 0..5isize {
        for j in 0..4isize {
            // left triangle: the listed vertex order is the reverse orientation of
            // d(i,j) - v(i,j) - h(i+1,j)
            let left = edge_vector(n1, &[(t.edge_d(i, j), -1.0), (t.edge_v(i, j), 1.0), (t.edge_h(i + 1, j), 1.0)]);
            assert_eq!(oriented_column(t.tri_left(i, j)), left);

            let right = edge_vector(n1, &[(t.edge_h(i, j), 1.0), (t.edge_v(i, j + 1), 1.0), (t.edge_d(i, j), -1.0)]);
            assert_eq!(oriented_column(t.tri_right(i, j)), right);

            for (edge, head) in [
                (t.edge_h(i, j), t.vertex(i, j + 1)),
                (t.edge_v(i, j), t.vertex(i + 1, j)),
                (t.edge_d(i, j), t.vertex(i + 1, j + 1)),
            ] {
                let mut col = vec![0.0; t.count(0)];
                for &(row, s) in b1.column(edge.index) {
                    col[row] = f64::from(s) * f64::from(edge.sign);
                }
                let mut want = vec![0.0; t.count(0)];
                want[head] += 1.0;
                want[t.vertex(i, j)] -= 1.0;
                assert_eq!(col, want);
            }
        }
    }
}

#[test]
fn torus_triangle_neighbours() {
    let t = torus_complex(6, 5).unwrap();
    let r = |o: OrientedRef| SimplexRef::new(2, o.index);
    for i in 0..6isize {
        for j in 0..5isize {
            let right: BTreeSet<_> = t.lower_adjacent(r(t.tri_right(i, j))).unwrap().into_iter().collect();
            let want: BTreeSet<_> =
                [t.tri_left(i - 1, j), t.tri_left(i, j + 1), t.tri_left(i, j)].into_iter().map(r).collect();
            assert_eq!(right, want);

            let left: BTreeSet<_> = t.lower_adjacent(r(t.tri_left(i, j))).unwrap().into_iter().collect();
            let want: BTreeSet<_> =
                [t.tri_right(i, j), t.tri_right(i, j - 1), t.tri_right(i + 1, j)].into_iter().map(r).collect();
            assert_eq!(left, want);
        }
    }
}

#[test]
fn torus_diagonal_edge_upper_neighbours() {
    let t = torus_complex(5, 5).unwrap();
    let e = |o: OrientedRef| SimplexRef::new(1, o.index);
    for (i, j) in [(0, 0), (2, 3), (4, 4)] {
        let got: BTreeSet<_> = t.upper_adjacent(e(t.edge_d(i, j))).unwrap().into_iter().collect();
        let want: BTreeSet<_> =
            [t.edge_v(i, j), t.edge_h(i + 1, j), t.edge_h(i, j), t.edge_v(i, j + 1)].into_iter().map(e).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn generators_always_validate() {
    for n in 5..=12 {
        for k in 1..(n / 2) {
            let x = cycle_complex(n, k).unwrap();
            assert!(x.validate().is_empty());
            assert_eq!(x.count(1), n * k);
        }
        assert!(cycle_with_all_triangles(n).unwrap().validate().is_empty());
    }
    for (m, n) in [(3, 3), (3, 5), (5, 7), (10, 10)] {
        let t = torus_complex(m, n).unwrap();
        assert!(t.validate().is_empty());
        assert_eq!(t.counts(), vec![m * n, 3 * m * n, 2 * m * n]);
    }
}

proptest! {
    #[test]
    fn build_is_closed_and_canonical(list in common::simplex_lists()) {
        let x = SimplicialComplex::build(&list, None).unwrap();
        prop_assert!(x.validate().is_empty());
        for tuple in &list {
            let mut sorted = tuple.clone();
            sorted.sort_unstable();
            prop_assert!(x.index_of(&sorted).is_some());
        }
    }

    #[test]
    fn adjacency_is_symmetric(list in common::simplex_lists()) {
        let x = SimplicialComplex::build(&list, None).unwrap();
        for d in 0..=x.max_dim() {
            for i in 0..x.count(d) {
                let f = SimplexRef::new(d, i);
                for h in x.upper_adjacent(f).unwrap() {
                    prop_assert!(h != f);
                    prop_assert!(x.upper_adjacent(h).unwrap().contains(&f));
                }
                for h in x.lower_adjacent(f).unwrap() {
                    prop_assert!(h != f);
                    prop_assert!(x.lower_adjacent(h).unwrap().contains(&f));
                }
            }
        }
    }

    #[test]
    fn json_round_trip_is_lossless(list in common::simplex_lists(), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let base = SimplicialComplex::build(&list, None).unwrap();
        let x = common::randomly_weighted(&mut rng, &base, 0.01, 10.0);
        let back = SimplicialComplex::from_json(&x.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.counts(), x.counts());
        for d in 0..=x.max_dim() {
            prop_assert_eq!(back.simplices(d), x.simplices(d));
            prop_assert_eq!(back.weights(d), x.weights(d));
        }
    }
}
