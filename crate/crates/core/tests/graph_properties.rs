use nalgebra::DMatrix;
use nashseek::graph::{augmented_spectrum, laplacian_norm, lyapunov_pair};
use nashseek::DirectedGraph;
use proptest::prelude::*;

/// Random strongly connected digraph: a shuffled Hamiltonian cycle plus extra
/// edges with random positive weights.
fn strongly_connected() -> impl Strategy<Value = DirectedGraph<f64>> {
    (2usize..=6)
        .prop_flat_map(|n| {
            (
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                proptest::collection::vec(any::<bool>(), n * n),
                proptest::collection::vec(0.2f64..3.0, n * n),
            )
        })
        .prop_map(|(order, extra, w)| {
            let n = order.len();
            let mut rows = vec![vec![0.0; n]; n];
            for k in 0..n {
                let (listener, speaker) = (order[k], order[(k + 1) % n]);
                rows[listener][speaker] = w[listener * n + speaker];
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j && extra[i * n + j] {
                        rows[i][j] = w[i * n + j];
                    }
                }
            }
            DirectedGraph::from_rows(rows).unwrap()
        })
}

/// Weights are multiples of 1/8 so row sums are exact in binary.
fn arbitrary_graph() -> impl Strategy<Value = DirectedGraph<f64>> {
    (2usize..=6).prop_flat_map(|n| {
        proptest::collection::vec(prop_oneof![Just(0u32), 1u32..40], n * n).prop_map(move |w| {
            let w: Vec<f64> = w.into_iter().map(|k| k as f64 / 8.0).collect();
            let rows = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { w[i * n + j] }).collect())
                .collect();
            DirectedGraph::from_rows(rows).unwrap()
        })
    })
}

/// Independent solve of `AᵀP + PA = Q` through `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P) = vec(Q)`.
fn kronecker_solve(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let at = a.transpose();
    let eye = DMatrix::<f64>::identity(m, m);
    let k = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = nalgebra::DVector::from_column_slice(q.as_slice());
    let sol = k.lu().solve(&rhs).expect("Kronecker system nonsingular");
    DMatrix::from_column_slice(m, m, sol.as_slice())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lyapunov_pair_on_random_strongly_connected_digraphs(g in strongly_connected()) {
        prop_assert!(g.is_strongly_connected());
        for ev in augmented_spectrum(&g) {
            prop_assert!(ev.re > 0.0, "eigenvalue {ev} not in the open right half-plane");
        }
        let pair = lyapunov_pair(&g, None).unwrap();
        let a = g.augmented_matrix();
        let resid = (a.transpose() * &pair.p + &pair.p * &a - &pair.q).norm();
        prop_assert!(resid <= 1e-8 * pair.q.norm());
        prop_assert!(pair.p.clone().cholesky().is_some());
        if g.n() <= 4 {
            let oracle = kronecker_solve(&a, &pair.q);
            prop_assert!((&pair.p - &oracle).norm() <= 1e-8 * oracle.norm());
        }
    }

    #[test]
    fn laplacian_annihilates_ones(g in arbitrary_graph()) {
        let l = g.laplacian();
        for i in 0..g.n() {
            prop_assert_eq!(l.row(i).sum(), 0.0);
        }
    }

    #[test]
    fn sigma_norm_matches_svd(g in arbitrary_graph()) {
        let svd_max = g.laplacian().singular_values().max();
        prop_assert!((laplacian_norm(&g) - svd_max).abs() <= 1e-10 * svd_max.max(1.0));
    }
}

#[test]
fn b0_diagonal_is_stacked_adjacency_exhaustive() {
    for n in 2..=4usize {
        let off: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        for mask in 0u32..(1 << off.len()) {
            let edges: Vec<_> = off
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &e)| e)
                .collect();
            let g = DirectedGraph::<f64>::from_edges(n, &edges).unwrap();
            let b0 = g.b0_matrix();
            for i in 0..n {
                for j in 0..n {
                    let k = i * n + j;
                    assert_eq!(b0[(k, k)], g.weight(i, j));
                }
            }
            assert_eq!(b0.sum(), g.edge_count() as f64);
        }
    }
}

#[test]
fn bundled_topology_is_strongly_connected_with_stable_augmented_matrix() {
    let g = DirectedGraph::<f64>::from_edges(
        5,
        &[(0, 1), (0, 4), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2), (4, 3), (4, 0)],
    )
    .unwrap();
    assert!(g.is_strongly_connected());
    assert_eq!(g.augmented_matrix().nrows(), 25);
    let min_re = augmented_spectrum(&g)
        .iter()
        .map(|c| c.re)
        .fold(f64::INFINITY, f64::min);
    assert!(min_re > 0.0);
    let pair = lyapunov_pair(&g, None).unwrap();
    assert_eq!(pair.lambda_min_q(), 1.0);
}

#[test]
fn single_edge_is_not_strongly_connected() {
    let g = DirectedGraph::<f64>::from_edges(2, &[(0, 1)]).unwrap();
    assert!(!g.is_strongly_connected());
    assert!(lyapunov_pair(&g, None).is_err());
}
