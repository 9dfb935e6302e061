//! Event-triggering laws.
//!
//! All laws share the triggering function
//! `ρ_i = e_{x_i}² + ‖e_{y_i}‖² − σ_i ‖Σ_j a_ij Δ_ij‖²` and differ in the
//! threshold it must exceed:
//!
//! | law        | fires when                                  |
//! |------------|---------------------------------------------|
//! | continuous | always                                      |
//! | static     | `ρ_i > 0`                                   |
//! | dynamic    | `ρ_i > (δ_i/c_i)(ln κ − ln a)`              |
//! | stochastic | `ρ_i > (δ_i/c_i)(ln κ − ln ξ_i)`, `ξ_i ~ U(a, 1)` |
//!
//! The stochastic row is the log form of `ξ_i > κ exp(−c_i ρ_i / δ_i)`.
//! Static and dynamic are deterministic comparators built on the same `ρ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Continuous,
    #[serde(alias = "static_deterministic")]
    Static,
    #[serde(alias = "dynamic_deterministic")]
    Dynamic,
    Stochastic,
}

impl LawKind {
    pub const ALL: [LawKind; 4] = [
        LawKind::Continuous,
        LawKind::Static,
        LawKind::Dynamic,
        LawKind::Stochastic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LawKind::Continuous => "continuous",
            LawKind::Static => "static",
            LawKind::Dynamic => "dynamic",
            LawKind::Stochastic => "stochastic",
        }
    }

    pub fn is_random(self) -> bool {
        self == LawKind::Stochastic
    }
}

impl std::fmt::Display for LawKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "continuous" => Ok(LawKind::Continuous),
            "static" | "static_deterministic" => Ok(LawKind::Static),
            "dynamic" | "dynamic_deterministic" => Ok(LawKind::Dynamic),
            "stochastic" => Ok(LawKind::Stochastic),
            other => Err(Error::Validation(format!("unknown trigger law '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriggerParams<T> {
    pub kappa: T,
    pub a_floor: T,
    pub c: Vec<T>,
    pub sigma: Vec<T>,
    pub eta: T,
    pub delta0: Vec<T>,
}

impl<T: Scalar> TriggerParams<T> {
    pub fn new(kappa: T, a_floor: T, c: Vec<T>, sigma: Vec<T>, eta: T, delta0: Vec<T>) -> Result<Self> {
        let p = Self {
            kappa,
            a_floor,
            c,
            sigma,
            eta,
            delta0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        if !(self.kappa > T::one()) {
            return Err(Error::Validation(format!("kappa = {} must exceed 1", self.kappa)));
        }
        if !(self.a_floor > T::zero() && self.a_floor < T::one()) {
            return Err(Error::Validation(format!(
                "a_floor = {} must lie in (0, 1)",
                self.a_floor
            )));
        }
        if !(self.eta > T::zero()) {
            return Err(Error::Validation(format!("eta = {} must be positive", self.eta)));
        }
        for (name, v) in [("sigma", &self.sigma), ("delta0", &self.delta0)] {
            if v.len() != n {
                return Err(Error::Validation(format!(
                    "{name} has {} entries, expected {n}",
                    v.len()
                )));
            }
        }
        for (name, v) in [("c", &self.c), ("sigma", &self.sigma), ("delta0", &self.delta0)] {
            if let Some(i) = v.iter().position(|&e| !(e > T::zero() && e.is_finite())) {
                return Err(Error::Validation(format!("{name}[{i}] must be positive")));
            }
        }
        Ok(())
    }

    /// `σ_i = factor / d_i^in`.
    pub fn sigma_from_in_degree(graph: &DirectedGraph<T>, factor: T) -> Result<Vec<T>> {
        (0..graph.n())
            .map(|i| {
                let d = graph.in_degree(i);
                if d > T::zero() {
                    Ok(factor / d)
                } else {
                    Err(Error::Validation(format!(
                        "player {i} has no in-neighbours; sigma = factor/d_in is undefined"
                    )))
                }
            })
            .collect()
    }

    /// Closed-form `δ_i(t) = δ_i(0) e^{−ηt}`.
    pub fn delta_at(&self, i: usize, t: T) -> T {
        self.delta0[i] * (-self.eta * t).exp()
    }

    /// `(δ/c_i)(ln κ − ln ξ)`: the largest `ρ` that does not fire at this `ξ`.
    pub fn threshold(&self, i: usize, delta: T, xi: T) -> T {
        delta / self.c[i] * (self.kappa.ln() - xi.ln())
    }

    /// Maps a uniform draw `u ∈ [0, 1)` to `ξ = 1 − (1 − a)u ∈ (a, 1]`, so
    /// that firing on `ξ > v` is the same event as `u < (1 − v)/(1 − a)`.
    pub fn xi_from_uniform(&self, u: T) -> T {
        T::one() - (T::one() - self.a_floor) * u
    }
}

/// Event and consensus errors of one player at one evaluation instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerContext<T> {
    /// `e_{x_i}²`
    pub e_x_sq: T,
    /// `‖e_{y_i}‖²`
    pub e_y_sq: T,
    /// `‖Σ_j a_ij Δ_ij‖²`
    pub consensus_sq: T,
    pub delta: T,
    pub t: T,
}

pub fn rho<T: Scalar>(ctx: &TriggerContext<T>, sigma_i: T) -> T {
    ctx.e_x_sq + ctx.e_y_sq - sigma_i * ctx.consensus_sq
}

pub fn delta_at<T: Scalar>(params: &TriggerParams<T>, i: usize, t: T) -> T {
    params.delta_at(i, t)
}

/// Probability that the stochastic law fires for `ξ ~ U(a, 1)`, given
/// `ρ` and `δ`.
pub fn trigger_probability<T: Scalar>(params: &TriggerParams<T>, i: usize, rho_val: T, delta: T) -> T {
    if !(rho_val > T::zero()) {
        return T::zero();
    }
    let v = params.kappa * (-params.c[i] * rho_val / delta).exp();
    if v >= T::one() {
        T::zero()
    } else if v <= params.a_floor {
        T::one()
    } else {
        (T::one() - v) / (T::one() - params.a_floor)
    }
}

/// Decision of `law` for player `i`. `u` is a uniform draw on `[0, 1)`
/// supplied by the caller; only the stochastic law reads it.
pub fn decide<T: Scalar>(
    law: LawKind,
    params: &TriggerParams<T>,
    i: usize,
    ctx: &TriggerContext<T>,
    u: T,
) -> bool {
    match law {
        LawKind::Continuous => true,
        LawKind::Static => ctx.e_x_sq + ctx.e_y_sq > params.sigma[i] * ctx.consensus_sq,
        LawKind::Dynamic => decide_with_xi(params, i, ctx, params.a_floor),
        LawKind::Stochastic => decide_with_xi(params, i, ctx, params.xi_from_uniform(u)),
    }
}

/// Stochastic rule at a realized `ξ`; `ξ ≡ a` recovers the dynamic law.
pub fn decide_with_xi<T: Scalar>(params: &TriggerParams<T>, i: usize, ctx: &TriggerContext<T>, xi: T) -> bool {
    rho(ctx, params.sigma[i]) > params.threshold(i, ctx.delta, xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params() -> TriggerParams<f64> {
        TriggerParams::new(1.075, 0.05, vec![1.0], vec![0.2], 10.0, vec![1.0]).unwrap()
    }

    fn ctx(e_x_sq: f64, e_y_sq: f64, consensus_sq: f64, delta: f64) -> TriggerContext<f64> {
        TriggerContext {
            e_x_sq,
            e_y_sq,
            consensus_sq,
            delta,
            t: 0.0,
        }
    }

    #[test]
    fn rho_examples() {
        assert_abs_diff_eq!(rho(&ctx(0.0, 0.0, 4.0, 1.0), 0.2), -0.8);
        assert_abs_diff_eq!(rho(&ctx(1.0, 2.0, 0.0, 1.0), 0.2), 3.0);
    }

    #[test]
    fn delta_decay_closed_form() {
        let mut p = params();
        assert_eq!(p.delta_at(0, 0.0), 1.0);
        assert_abs_diff_eq!(p.delta_at(0, 0.1), (-1.0f64).exp(), epsilon = 1e-15);
        p.delta0[0] = 2.0;
        assert_abs_diff_eq!(p.delta_at(0, 0.2), 2.0 * (-2.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.delta_at(0, 0.2), 0.270671, epsilon = 1e-6);
    }

    #[test]
    fn probability_examples() {
        let p = params();
        assert_eq!(trigger_probability(&p, 0, 0.0, 1.0), 0.0);
        assert_eq!(trigger_probability(&p, 0, -3.0, 1.0), 0.0);
        // v = κ e^{−ρ} = 0.5 at ρ = ln(2κ)
        let rho_half = (2.0f64 * 1.075).ln();
        assert_abs_diff_eq!(trigger_probability(&p, 0, rho_half, 1.0), 0.5 / 0.95, epsilon = 1e-12);
        assert_eq!(trigger_probability(&p, 0, 1e6, 1.0), 1.0);
    }

    #[test]
    fn continuous_always_fires_and_stochastic_never_at_nonpositive_rho() {
        let p = params();
        let c = ctx(0.0, 0.0, 4.0, 1.0);
        assert!(decide(LawKind::Continuous, &p, 0, &c, 0.3));
        for k in 0..100 {
            let u = k as f64 / 100.0;
            assert!(!decide(LawKind::Stochastic, &p, 0, &c, u));
            assert!(!decide(LawKind::Stochastic, &p, 0, &ctx(0.0, 0.0, 0.0, 1.0), u));
        }
    }

    #[test]
    fn uniform_draw_consistent_with_probability() {
        let p = params();
        let c = ctx(0.3, 0.2, 0.1, 0.4);
        let prob = trigger_probability(&p, 0, rho(&c, 0.2), c.delta);
        // fires for u below the probability, not above (away from the boundary)
        assert!(decide(LawKind::Stochastic, &p, 0, &c, prob * 0.999));
        assert!(!decide(LawKind::Stochastic, &p, 0, &c, (prob * 1.001).min(0.999_999)));
    }

    #[test]
    fn underflowed_delta_reduces_to_static() {
        let p = params();
        assert!(decide(LawKind::Stochastic, &p, 0, &ctx(1e-30, 0.0, 0.0, 0.0), 0.5));
        assert!(!decide(LawKind::Stochastic, &p, 0, &ctx(0.0, 0.0, 0.0, 0.0), 0.5));
    }

    #[test]
    fn law_parsing() {
        assert_eq!("Stochastic".parse::<LawKind>().unwrap(), LawKind::Stochastic);
        assert!("adaptive".parse::<LawKind>().is_err());
        let law: LawKind = serde_json::from_str("\"dynamic\"").unwrap();
        assert_eq!(law, LawKind::Dynamic);
    }

    #[test]
    fn params_validation() {
        assert!(TriggerParams::new(1.0, 0.05, vec![1.0], vec![0.2], 10.0, vec![1.0]).is_err());
        assert!(TriggerParams::new(1.1, 1.0, vec![1.0], vec![0.2], 10.0, vec![1.0]).is_err());
        assert!(TriggerParams::new(1.1, 0.5, vec![1.0], vec![0.2, 0.1], 10.0, vec![1.0]).is_err());
        assert!(TriggerParams::new(1.1, 0.5, vec![1.0], vec![0.2], 0.0, vec![1.0]).is_err());
        assert!(TriggerParams::new(1.1, 0.5, vec![-1.0], vec![0.2], 1.0, vec![1.0]).is_err());
    }
}
