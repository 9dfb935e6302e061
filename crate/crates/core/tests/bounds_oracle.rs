use nalgebra::{DMatrix, DVector};
use nashseek::bounds::{alpha_max, beta_min, compute_report, sigma_bound, BoundInputs};
use nashseek::scenario::load_scenario;
use nashseek::{Error, Scenario64};

fn spectrum() -> Scenario64 {
    load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/spectrum5.json")).unwrap()
}

fn kronecker_lyapunov(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let at = a.transpose();
    let eye = DMatrix::<f64>::identity(m, m);
    let k = eye.kronecker(&at) + at.kronecker(&eye);
    let q = DMatrix::<f64>::identity(m, m);
    let sol = k.lu().solve(&DVector::from_column_slice(q.as_slice())).unwrap();
    DMatrix::from_column_slice(m, m, sol.as_slice())
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

#[test]
fn bundled_report_is_finite_and_satisfies_identities() {
    let s = spectrum();
    let r = compute_report(&s.game, &s.graph, 0.14, 1.5, 10.0, None).unwrap();
    let json = serde_json::to_value(&r).unwrap();
    for (k, v) in json.as_object().unwrap() {
        if let Some(x) = v.as_f64() {
            assert!(x.is_finite(), "{k} = {x}");
        }
    }
    let lhs = (r.omega1 - r.theta_star) * (r.omega2 - r.theta_star);
    let rhs = r.phi1 * r.phi2;
    assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs());
    let k_v = r.theta_star.min(r.theta_star / r.lambda_max_p).min(10.0 / 2.0);
    assert_eq!(r.k_v, k_v);
    assert_eq!(r.lambda_min_q, 1.0);
    assert_eq!(r.q_choice, "identity");
}

#[test]
fn bundled_constants_match_independent_computation() {
    let s = spectrum();
    let r = compute_report(&s.game, &s.graph, 0.14, 1.5, 10.0, None).unwrap();
    let a = s.graph.augmented_matrix();
    let p = kronecker_lyapunov(&a);
    let n = 5.0f64;
    let c3 = n.sqrt() * spectral_norm(&p);
    let c4 = 2.0 * (2.0 * (n - 1.0)).sqrt() * spectral_norm(&(&p * &a));
    assert!((r.c3 - c3).abs() <= 1e-8 * c3);
    assert!((r.c4 - c4).abs() <= 1e-8 * c4);
    // l̄ = q_max √(n+3) for the spectrum Jacobian
    assert!((r.lbar - 1.5 * 8f64.sqrt()).abs() < 1e-12);
    let inputs = BoundInputs {
        mu: r.mu,
        lambda: 1.0,
        c1: r.c1,
        c2: r.c2,
        c3: r.c3,
        c4: r.c4,
    };
    assert_eq!(beta_min(&inputs), r.beta_min);
    let beta_lo = (4.0 * r.c2 * c3 + r.mu * c4) / r.mu;
    assert!((r.beta_min - beta_lo).abs() <= 1e-8 * beta_lo);
    // the configured β = 1.5 sits below β_min here, so no α is admissible
    assert!(matches!(alpha_max(&inputs, 1.5), Err(Error::InfeasibleBeta { .. })));
    assert!(!r.feasible);
    let a_hi = alpha_max(&inputs, 2.0 * r.beta_min).unwrap();
    assert!(a_hi > 0.0);
}

#[test]
fn sigma_bound_matches_svd_oracle() {
    let s = spectrum();
    let l = s.graph.laplacian();
    let norm = spectral_norm(&l);
    let want = 4.0 / (10.0 * norm * norm);
    assert!((sigma_bound(&s.graph) - want).abs() <= 1e-12 * want);
    assert!(want > 0.0);
}

#[test]
fn feasible_pair_exists_for_large_beta() {
    let s = spectrum();
    let base = compute_report(&s.game, &s.graph, 0.14, 1.5, 10.0, None).unwrap();
    let beta = 4.0 * base.beta_min;
    let probe = compute_report(&s.game, &s.graph, 0.01, beta, 10.0, None).unwrap();
    let alpha = 0.5 * probe.alpha_max;
    let r = compute_report(&s.game, &s.graph, alpha, beta, 10.0, None).unwrap();
    assert!(r.alpha_max > 0.0);
    assert!(r.feasible, "alpha {alpha} beta {beta} theta {}", r.theta_star);
    assert!(r.k_v > 0.0);
}
