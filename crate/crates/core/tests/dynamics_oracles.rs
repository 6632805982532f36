mod common;

use std::collections::HashMap;

use rand::Rng;
use simplex_flow::analysis::homological_basis;
use simplex_flow::complex::{cycle_complex, torus_complex};
use simplex_flow::dynamics::{rhs_vertex_oracle, IntegratorSettings};
use simplex_flow::{FlowConfig, Nonlinearity, SimplexFlow, SimplexRef, SimplicialComplex};

fn nonlinearities() -> [Nonlinearity; 3] {
    [Nonlinearity::sine(), Nonlinearity::identity(), Nonlinearity::tanh()]
}

/// Right-hand side summed simplex by simplex over cofaces and faces, without
/// any matrix assembly.
fn coordinate_rhs(x: &SimplicialComplex, d: usize, phi: &Nonlinearity, omega: &[f64], theta: &[f64]) -> Vec<f64> {
    let pos = |s: &[usize]| x.simplices(d).iter().position(|t| t == s).unwrap();
    let sign_in = |face: &[usize], simplex: &[usize]| -> Option<f64> {
        common::signed_faces(simplex).into_iter().find(|(f, _)| f == face).map(|(_, s)| s)
    };
    let w = x.weights(d);
    let mut out = omega.to_vec();
    for (i, f) in x.simplices(d).iter().enumerate() {
        if d < x.max_dim() {
            for (g, w_g) in x.simplices(d + 1).iter().zip(x.weights(d + 1)) {
                if let Some(s) = sign_in(f, g) {
                    let arg: f64 = common::signed_faces(g).iter().map(|(h, sh)| sh * theta[pos(h)]).sum();
                    out[i] -= s * w_g * phi.eval(arg) / w[i];
                }
            }
        }
        if d > 0 {
            for (face, s) in common::signed_faces(f) {
                let fi = x.simplices(d - 1).iter().position(|t| *t == face).unwrap();
                let arg: f64 = x
                    .simplices(d)
                    .iter()
                    .enumerate()
                    .filter_map(|(h, hs)| sign_in(&face, hs).map(|sh| sh * w[h] * theta[h]))
                    .sum();
                out[i] -= s * phi.eval(arg) / x.weights(d - 1)[fi];
            }
        }
    }
    out
}

#[test]
fn vertex_flow_matches_pairwise_model() {
    let mut rng = common::rng(1);
    let base = cycle_complex(7, 2).unwrap();
    let edge_w: HashMap<Vec<usize>, f64> =
        base.simplices(1).iter().map(|e| (e.clone(), rng.gen_range(0.1..3.0))).collect();
    let x = SimplicialComplex::build(base.simplices(1), Some(&edge_w)).unwrap();
    for phi in nonlinearities() {
        let omega = common::uniform_vec(&mut rng, 7, -1.0, 1.0);
        let flow = SimplexFlow::new(&x, FlowConfig::homogeneous(&x, 0, phi.clone()).with_omega(omega.clone())).unwrap();
        for _ in 0..100 {
            let theta = common::uniform_vec(&mut rng, 7, -4.0, 4.0);
            let oracle = rhs_vertex_oracle(&x, &phi, &omega, &theta).unwrap();
            assert!(common::max_abs_diff(&flow.rhs(&theta).unwrap(), &oracle) < 1e-12);
        }
    }
    // non-uniform vertex weights rescale time componentwise
    let weighted = common::randomly_weighted(&mut rng, &x, 0.5, 2.0);
    let flow = SimplexFlow::new(&weighted, FlowConfig::homogeneous(&weighted, 0, Nonlinearity::sine())).unwrap();
    let theta = common::uniform_vec(&mut rng, 7, -4.0, 4.0);
    let oracle = rhs_vertex_oracle(&weighted, &Nonlinearity::sine(), &[0.0; 7], &theta).unwrap();
    assert!(common::max_abs_diff(&flow.rhs(&theta).unwrap(), &oracle) < 1e-12);
}

#[test]
fn coordinate_form_matches_matrix_form() {
    let mut rng = common::rng(2);
    for trial in 0..40 {
        let base = common::random_complex(&mut rng, 30);
        let x = if trial % 2 == 0 { base } else { common::randomly_weighted(&mut rng, &base, 0.3, 3.0) };
        for d in 0..=x.max_dim() {
            for phi in nonlinearities() {
                let n = x.count(d);
                let omega = common::uniform_vec(&mut rng, n, -1.0, 1.0);
                let theta = common::uniform_vec(&mut rng, n, -2.0, 2.0);
                let cfg = FlowConfig::homogeneous(&x, d, phi.clone()).with_omega(omega.clone());
                let got = SimplexFlow::new(&x, cfg).unwrap().rhs(&theta).unwrap();
                let want = coordinate_rhs(&x, d, &phi, &omega, &theta);
                assert!(common::max_abs_diff(&got, &want) < 1e-12, "trial {trial}, d = {d}");
            }
        }
    }
}

#[test]
fn only_adjacent_simplices_couple() {
    let mut rng = common::rng(3);
    for _ in 0..30 {
        let x = common::random_complex(&mut rng, 30);
        for d in 0..=x.max_dim() {
            let n = x.count(d);
            let flow = SimplexFlow::new(&x, FlowConfig::homogeneous(&x, d, Nonlinearity::sine())).unwrap();
            let theta = common::uniform_vec(&mut rng, n, -2.0, 2.0);
            let base = flow.rhs(&theta).unwrap();
            for (f, &unperturbed) in base.iter().enumerate() {
                let fr = SimplexRef::new(d, f);
                let mut coupled = x.upper_adjacent(fr).unwrap();
                coupled.extend(x.lower_adjacent(fr).unwrap());
                coupled.push(fr);
                for h in (0..n).filter(|h| !coupled.contains(&SimplexRef::new(d, *h))) {
                    let mut probe = theta.clone();
                    probe[h] += 0.7;
                    assert_eq!(flow.rhs(&probe).unwrap()[f], unperturbed);
                }
            }
        }
    }
}

#[test]
fn graph_edge_flow_matches_per_edge_formula() {
    let mut rng = common::rng(4);
    for _ in 0..20 {
        let n = rng.gen_range(4..9);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push(vec![a, b]);
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        let x = common::randomly_weighted(&mut rng, &SimplicialComplex::build(&edges, None).unwrap(), 0.2, 4.0);
        let (tau, gamma) = (x.weights(0), x.weights(1));
        let vpos = |v: usize| x.index_of(&[v]).unwrap().index;
        let edge_list = x.simplices(1);
        for phi in nonlinearities() {
            let flow = SimplexFlow::new(&x, FlowConfig::homogeneous(&x, 1, phi.clone())).unwrap();
            for _ in 0..10 {
                let theta = common::uniform_vec(&mut rng, edge_list.len(), -2.0, 2.0);
                // net weighted flow into vertex v: Σ_{t(e')=v} γθ − Σ_{s(e')=v} γθ
                let net = |v: usize| -> f64 {
                    edge_list
                        .iter()
                        .enumerate()
                        .map(|(k, e)| {
                            let inflow = if e[1] == v { 1.0 } else { 0.0 };
                            let outflow = if e[0] == v { 1.0 } else { 0.0 };
                            (inflow - outflow) * gamma[k] * theta[k]
                        })
                        .sum()
                };
                let want: Vec<f64> = edge_list
                    .iter()
                    .map(|e| {
                        let (s, t) = (e[0], e[1]);
                        phi.eval(net(s)) / tau[vpos(s)] - phi.eval(net(t)) / tau[vpos(t)]
                    })
                    .collect();
                assert!(common::max_abs_diff(&flow.rhs(&theta).unwrap(), &want) < 1e-12);
            }
        }
    }
}

#[test]
fn flow_is_rescaled_gradient_of_energy() {
    let mut rng = common::rng(5);
    for trial in 0..30 {
        let base = common::random_complex(&mut rng, 30);
        let x = common::randomly_weighted(&mut rng, &base, 0.3, 3.0);
        for d in 0..=x.max_dim() {
            for phi in nonlinearities() {
                let n = x.count(d);
                let omega = if trial % 3 == 0 { vec![0.0; n] } else { common::uniform_vec(&mut rng, n, -1.0, 1.0) };
                let flow = SimplexFlow::new(&x, FlowConfig::homogeneous(&x, d, phi).with_omega(omega)).unwrap();
                let theta = common::uniform_vec(&mut rng, n, -1.0, 1.0);
                let grad = common::fd_gradient(|t| flow.energy(t).unwrap(), &theta, 1e-6);
                let predicted: Vec<f64> = grad.iter().zip(flow.weights()).map(|(g, w)| -g / w).collect();
                let rhs = flow.rhs(&theta).unwrap();
                assert!(common::rel_error(&predicted, &rhs) < 1e-6, "trial {trial}, d = {d}");
            }
        }
    }
}

#[test]
fn energy_vanishes_on_homological_states() {
    let t = torus_complex(4, 4).unwrap();
    let basis = homological_basis(&t, 1).unwrap();
    let flow = SimplexFlow::new(&t, FlowConfig::homogeneous(&t, 1, Nonlinearity::sine())).unwrap();
    let h = basis.combine(&[0.8, -1.3]);
    assert!(flow.energy(&h).unwrap().abs() < 1e-12);
    assert!(common::norm(&flow.rhs(&h).unwrap()) < 1e-12);
}

#[test]
fn homogeneous_energy_never_increases() {
    let mut rng = common::rng(6);
    for _ in 0..10 {
        let base = common::random_complex(&mut rng, 40);
        let x = common::randomly_weighted(&mut rng, &base, 0.5, 2.0);
        for d in 0..=x.max_dim() {
            for phi in nonlinearities() {
                let settings = IntegratorSettings { dt: 1e-2, t_end: 5.0, stride: 10, ..Default::default() };
                let flow = SimplexFlow::new(&x, FlowConfig::homogeneous(&x, d, phi).with_integrator(settings)).unwrap();
                let theta0 = common::uniform_vec(&mut rng, x.count(d), -2.0, 2.0);
                let traj = flow.integrate(&theta0).unwrap();
                for pair in traj.energies.windows(2) {
                    assert!(pair[1] - pair[0] < 1e-9, "{pair:?}");
                }
            }
        }
    }
}

#[test]
fn homological_initial_state_is_stationary() {
    let t = torus_complex(5, 5).unwrap();
    let basis = homological_basis(&t, 1).unwrap();
    let theta0 = basis.combine(&[1.5, -0.7]);
    let settings = IntegratorSettings { t_end: 5.0, stride: 50, ..Default::default() };
    let flow =
        SimplexFlow::new(&t, FlowConfig::homogeneous(&t, 1, Nonlinearity::sine()).with_integrator(settings)).unwrap();
    let traj = flow.integrate(&theta0).unwrap();
    for state in &traj.states {
        assert!(common::max_abs_diff(state, &theta0) < 1e-12);
    }
}

#[test]
fn range_bound_dominates_coupling() {
    let mut rng = common::rng(7);
    for _ in 0..10 {
        let base = common::random_complex(&mut rng, 40);
        let x = common::randomly_weighted(&mut rng, &base, 0.2, 4.0);
        for d in 0..=x.max_dim() {
            for phi in [Nonlinearity::sine(), Nonlinearity::tanh()] {
                let n = x.count(d);
                let omega = common::uniform_vec(&mut rng, n, -1.0, 1.0);
                let flow = SimplexFlow::new(&x, FlowConfig::homogeneous(&x, d, phi).with_omega(omega.clone())).unwrap();
                let bound = flow.range_bound().unwrap();
                for _ in 0..100 {
                    let theta = common::uniform_vec(&mut rng, n, -100.0, 100.0);
                    let rhs = flow.rhs(&theta).unwrap();
                    for i in 0..n {
                        assert!((rhs[i] - omega[i]).abs() <= bound[i] * (1.0 + 1e-12));
                    }
                }
            }
        }
    }
}
