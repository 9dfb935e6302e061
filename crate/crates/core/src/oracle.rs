//! Centralized Nash-equilibrium computation, used as ground truth.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, GameConstants};
use crate::scalar::{max_abs_diff, Scalar};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;
pub const FALLBACK_STEP: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct NeSolution<T> {
    pub x_star: Vec<T>,
    pub residual: T,
    pub iterations: usize,
}

/// Step `0.9 · 2μ / l̄²` when constants are known, else `0.01`.
pub fn default_step(constants: Option<&GameConstants>) -> f64 {
    match constants {
        Some(c) if c.mu > 0.0 && c.lbar > 0.0 => 0.9 * 2.0 * c.mu / (c.lbar * c.lbar),
        _ => FALLBACK_STEP,
    }
}

/// `‖x − P_X(x − step·F(x))‖∞`, zero exactly at the equilibrium.
pub fn verify_ne<T: Scalar, G: Game<T> + ?Sized>(game: &G, x: &[T], step: T) -> Result<T> {
    Ok(max_abs_diff(x, &projected_step(game, x, step)?))
}

fn projected_step<T: Scalar, G: Game<T> + ?Sized>(game: &G, x: &[T], step: T) -> Result<Vec<T>> {
    let f = game.pseudo_gradient(x)?;
    Ok(x.iter()
        .zip(&f)
        .enumerate()
        .map(|(i, (&xi, &fi))| game.interval(i).project(xi - step * fi))
        .collect())
}

/// Projected pseudo-gradient iteration from the box midpoint until the
/// fixed-point residual drops to `tol`.
pub fn solve_ne<T: Scalar, G: Game<T> + ?Sized>(
    game: &G,
    step: T,
    tol: T,
    max_iter: usize,
) -> Result<NeSolution<T>> {
    if !(step > T::zero()) || !(tol > T::zero()) {
        return Err(Error::Validation("step and tol must be positive".into()));
    }
    let mut x: Vec<T> = game.intervals().iter().map(|iv| iv.midpoint()).collect();
    let mut residual = T::infinity();
    for iteration in 0..=max_iter {
        let next = projected_step(game, &x, step)?;
        residual = max_abs_diff(&x, &next);
        if residual <= tol {
            return Ok(NeSolution {
                x_star: x,
                residual,
                iterations: iteration,
            });
        }
        if !residual.is_finite() {
            break;
        }
        x = next;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: residual.as_f64(),
    })
}
