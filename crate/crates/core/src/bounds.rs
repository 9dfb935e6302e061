//! Admissible step sizes and the exponential rate constant for a game on a
//! graph.
//!
//! With `μ`, `l̄` from the game and `(P, Q)` from the graph:
//!
//! ```text
//! C1 = l̄√n   C2 = l̄   C3 = √n‖P‖
//! C4 = 2√(2(n−1)) ‖P(L⊗I + B₀)‖   C5 = n√(2/(n−1)) ‖P(L⊗I + B₀)‖
//! β  > (4C2C3 + μC4) / (μλ)
//! α  < (2μβλ − 8C2C3 − 2μC4) / (8C1C2C3 + 4μC2C3 + βC1²λ − C1²C4)
//! σ  ≤ (n−1) / (2n‖L‖²)
//! ```
//!
//! where `λ = λ_min(Q)`. The rate is `k_v = min{Θ*, Θ*/λ_max(P), η/2}` with
//! `Θ*` the smaller root of `z² − (ω₁+ω₂)z + ω₁ω₂ − φ₁φ₂`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{estimate_constants, Game};
use crate::graph::{laplacian_norm, lyapunov_pair, operator_norm, DirectedGraph};
use crate::scalar::Scalar;

const CONSTANT_SAMPLES: usize = 10_000;

/// The scalars the step-size bounds are built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    pub mu: f64,
    pub lambda: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub mu: f64,
    pub lbar: f64,
    pub constants_exact: bool,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "C5")]
    pub c5: f64,
    pub norm_p: f64,
    pub norm_p_augmented: f64,
    pub norm_laplacian: f64,
    pub lambda_min_q: f64,
    pub lambda_max_p: f64,
    pub q_choice: String,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub theta_star: f64,
    pub k_v: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub sigma_max: f64,
    pub feasible: bool,
}

/// `(n−1) / (2n‖L‖²)`; `+∞` for an edgeless graph.
pub fn sigma_bound<T: Scalar>(graph: &DirectedGraph<T>) -> f64 {
    let n = graph.n() as f64;
    let norm = laplacian_norm(graph);
    if norm == 0.0 {
        return f64::INFINITY;
    }
    (n - 1.0) / (2.0 * n * norm * norm)
}

pub fn beta_min(b: &BoundInputs) -> f64 {
    (4.0 * b.c2 * b.c3 + b.mu * b.c4) / (b.mu * b.lambda)
}

/// Numerator and denominator of the `α` bound.
pub fn alpha_bound_parts(b: &BoundInputs, beta: f64) -> (f64, f64) {
    let num = 2.0 * b.mu * beta * b.lambda - 8.0 * b.c2 * b.c3 - 2.0 * b.mu * b.c4;
    let den = 8.0 * b.c1 * b.c2 * b.c3 + 4.0 * b.mu * b.c2 * b.c3 + beta * b.c1 * b.c1 * b.lambda
        - b.c1 * b.c1 * b.c4;
    (num, den)
}

pub fn alpha_max(b: &BoundInputs, beta: f64) -> Result<f64> {
    let (num, den) = alpha_bound_parts(b, beta);
    if !(num > 0.0) {
        return Err(Error::InfeasibleBeta { numerator: num });
    }
    Ok(num / den)
}

/// Smaller root of `z² − (ω₁+ω₂)z + ω₁ω₂ − φ₁φ₂`.
pub fn theta_star(omega1: f64, omega2: f64, phi1: f64, phi2: f64) -> f64 {
    (omega1 + omega2 - ((omega1 - omega2).powi(2) + 4.0 * phi1 * phi2).sqrt()) / 2.0
}

pub fn k_v(theta_star: f64, lambda_max_p: f64, eta: f64) -> f64 {
    theta_star.min(theta_star / lambda_max_p).min(eta / 2.0)
}

/// Full report. `q` defaults to the identity.
pub fn compute_report<T: Scalar, G: Game<T> + ?Sized>(
    game: &G,
    graph: &DirectedGraph<T>,
    alpha: f64,
    beta: f64,
    eta: f64,
    q: Option<&DMatrix<f64>>,
) -> Result<BoundsReport> {
    let n = graph.n();
    if game.n() != n {
        return Err(Error::ShapeMismatch(format!(
            "game has {} players, graph has {n}",
            game.n()
        )));
    }
    let constants = estimate_constants(game, &game.intervals(), CONSTANT_SAMPLES)?;
    let pair = lyapunov_pair(graph, q)?;
    let augmented = graph.to_f64().augmented_matrix();

    let nf = n as f64;
    let (mu, lbar) = (constants.mu, constants.lbar);
    let norm_p = operator_norm(&pair.p);
    let norm_pa = operator_norm(&(&pair.p * &augmented));
    let c1 = lbar * nf.sqrt();
    let c2 = lbar;
    let c3 = nf.sqrt() * norm_p;
    let c4 = 2.0 * (2.0 * (nf - 1.0)).sqrt() * norm_pa;
    let c5 = nf * (2.0 / (nf - 1.0)).sqrt() * norm_pa;
    let lambda = pair.lambda_min_q();
    let lambda_max_p = pair.lambda_max_p();

    let inputs = BoundInputs {
        mu,
        lambda,
        c1,
        c2,
        c3,
        c4,
    };
    let beta_lo = beta_min(&inputs);
    let (num, den) = alpha_bound_parts(&inputs, beta);
    let alpha_hi = num / den;

    let phi1 = 2.0 * alpha * c2;
    let phi2 = 2.0 * c3 * (2.0 + alpha * c1);
    let omega1 = 2.0 * (2.0 * alpha * mu - alpha * alpha * c1 * c1) / (2.0 + alpha * c1);
    let omega2 = beta * lambda - 2.0 * alpha * c2 * c3 - c4;
    let theta = theta_star(omega1, omega2, phi1, phi2);
    let feasible = num > 0.0 && alpha > 0.0 && alpha < alpha_hi && beta > beta_lo && theta > 0.0;

    Ok(BoundsReport {
        n,
        mu,
        lbar,
        constants_exact: constants.exact,
        c1,
        c2,
        c3,
        c4,
        c5,
        norm_p,
        norm_p_augmented: norm_pa,
        norm_laplacian: laplacian_norm(graph),
        lambda_min_q: lambda,
        lambda_max_p,
        q_choice: if q.is_some() { "custom" } else { "identity" }.into(),
        alpha,
        beta,
        eta,
        phi1,
        phi2,
        omega1,
        omega2,
        theta_star: theta,
        k_v: k_v(theta, lambda_max_p, eta),
        alpha_max: alpha_hi,
        beta_min: beta_lo,
        sigma_max: sigma_bound(graph),
        feasible,
    })
}
