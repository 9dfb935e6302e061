//! Fixed-step simulation of the event-triggered NE-seeking dynamics.
//!
//! Per step, in order:
//! 1. every player evaluates its law on the current event errors
//!    `e_x = x̂_i − x_i`, `e_y = ŷ_i − y_i` and consensus error
//!    `Σ_j a_ij (ŷ_i − ŷ_j)`; players that fire copy `(x_i, y_i)` into
//!    their broadcast slots;
//! 2. derivatives are taken with the (possibly refreshed) broadcasts:
//!    `ẋ_i = P_{X_i}(x_i − α ∂f_i/∂x_i(y_i)) − x_i`,
//!    `ẏ_ij = −β [Σ_k a_ik (ŷ_ij − ŷ_kj) + a_ij (ŷ_ij − x̂_j)]`;
//! 3. forward Euler with `dt`, then `y_ii ← x_i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Game;
use crate::graph::DirectedGraph;
use crate::metrics::RunMetrics;
use crate::scalar::{max_abs_diff, sq_norm, Scalar};
use crate::trigger::{self, LawKind, TriggerContext, TriggerParams};

pub const DEFAULT_DT: f64 = 0.025;
pub const DIVERGENCE_LIMIT: f64 = 1e9;
pub const DEFAULT_FIT_WINDOW: (f64, f64) = (0.0, 10.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig<T> {
    pub alpha: T,
    pub beta: T,
    pub dt: T,
    pub horizon: T,
    pub seed: u64,
    pub law: LawKind,
    pub record_every: usize,
}

impl<T: Scalar> EngineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero()) || !(self.beta > T::zero()) {
            return Err(Error::Validation("alpha and beta must be positive".into()));
        }
        if !(self.dt > T::zero()) || !(self.horizon > T::zero()) {
            return Err(Error::Validation("dt and horizon must be positive".into()));
        }
        if self.dt > self.horizon {
            return Err(Error::Validation(format!(
                "dt = {} exceeds horizon = {}",
                self.dt, self.horizon
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Validation("record_every must be >= 1".into()));
        }
        Ok(())
    }

    /// `⌈horizon / dt⌉`, ignoring round-off just above an integer.
    pub fn steps(&self) -> usize {
        let ratio = (self.horizon / self.dt).as_f64();
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineState<T> {
    pub t: T,
    pub x: Vec<T>,
    /// Row-major `n × n`; row `i` is player `i`'s estimate vector.
    pub y: Vec<T>,
    pub x_hat: Vec<T>,
    pub y_hat: Vec<T>,
    pub delta: Vec<T>,
}

impl<T: Scalar> EngineState<T> {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn y_row(&self, i: usize) -> &[T] {
        let n = self.n();
        &self.y[i * n..(i + 1) * n]
    }

    pub fn y_hat_row(&self, i: usize) -> &[T] {
        let n = self.n();
        &self.y_hat[i * n..(i + 1) * n]
    }

    /// Event and consensus errors of player `i` against the current
    /// broadcasts.
    pub fn trigger_context(&self, graph: &DirectedGraph<T>, i: usize) -> TriggerContext<T> {
        let n = self.n();
        let e_x = self.x_hat[i] - self.x[i];
        let yh_i = self.y_hat_row(i);
        let e_y_sq = sq_norm(yh_i.iter().zip(self.y_row(i)).map(|(&a, &b)| a - b));
        let consensus_sq = sq_norm((0..n).map(|k| {
            (0..n).fold(T::zero(), |acc, j| {
                let a = graph.weight(i, j);
                if a == T::zero() {
                    acc
                } else {
                    acc + a * (yh_i[k] - self.y_hat[j * n + k])
                }
            })
        }));
        TriggerContext {
            e_x_sq: e_x * e_x,
            e_y_sq,
            consensus_sq,
            delta: self.delta[i],
            t: self.t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerEvent<T> {
    pub t: T,
    /// Index of the step in which the event fired (evaluated at `t`).
    pub step: usize,
    pub player: usize,
    pub rho: T,
    /// Realized `ξ` for the stochastic law; `None` for deterministic laws.
    pub xi: Option<T>,
}

/// What each player decided in the latest step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision<T> {
    pub fired: bool,
    pub ctx: TriggerContext<T>,
    pub rho: T,
    pub xi: Option<T>,
}

impl<T: Scalar> Decision<T> {
    /// The no-trigger inequality `ρ ≤ (δ/c)(ln κ − ln ξ)` for a silent
    /// player under a `ξ`-based law. `None` when it does not apply.
    pub fn no_trigger_holds(&self, params: &TriggerParams<T>, i: usize, law: LawKind) -> Option<bool> {
        if self.fired {
            return None;
        }
        let xi = match law {
            LawKind::Stochastic => self.xi?,
            LawKind::Dynamic => params.a_floor,
            _ => return None,
        };
        Some(self.rho <= params.threshold(i, self.ctx.delta, xi))
    }
}

pub struct Simulation<'a, T: Scalar, G: Game<T> + ?Sized> {
    game: &'a G,
    graph: &'a DirectedGraph<T>,
    params: &'a TriggerParams<T>,
    config: EngineConfig<T>,
    state: EngineState<T>,
    rngs: Vec<ChaCha8Rng>,
    step_index: usize,
    events: Vec<TriggerEvent<T>>,
    decisions: Vec<Decision<T>>,
    no_trigger_violations: usize,
}

impl<'a, T: Scalar, G: Game<T> + ?Sized> Simulation<'a, T, G> {
    /// Builds the state at `t = 0`. The diagonal of `y0` is overwritten
    /// with `x0` and the initial broadcasts equal the initial state.
    pub fn init(
        game: &'a G,
        graph: &'a DirectedGraph<T>,
        params: &'a TriggerParams<T>,
        config: EngineConfig<T>,
        x0: &[T],
        y0: &[Vec<T>],
    ) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        let n = game.n();
        if graph.n() != n || params.n() != n || x0.len() != n || y0.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "game has {n} players but graph/trigger/x0/y0 have {}/{}/{}/{}",
                graph.n(),
                params.n(),
                x0.len(),
                y0.len()
            )));
        }
        if let Some(i) = y0.iter().position(|row| row.len() != n) {
            return Err(Error::ShapeMismatch(format!("y0 row {i} must have {n} entries")));
        }
        for (i, &xi) in x0.iter().enumerate() {
            if !game.interval(i).contains(xi) {
                return Err(Error::InfeasibleStart {
                    player: i,
                    value: xi.as_f64(),
                });
            }
        }
        let mut y: Vec<T> = y0.iter().flatten().copied().collect();
        for i in 0..n {
            y[i * n + i] = x0[i];
        }
        let state = EngineState {
            t: T::zero(),
            x: x0.to_vec(),
            x_hat: x0.to_vec(),
            y_hat: y.clone(),
            y,
            delta: params.delta0.clone(),
        };
        let rngs = (0..n)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(i as u64);
                rng
            })
            .collect();
        Ok(Self {
            game,
            graph,
            params,
            config,
            state,
            rngs,
            step_index: 0,
            events: Vec::new(),
            decisions: Vec::new(),
            no_trigger_violations: 0,
        })
    }

    pub fn state(&self) -> &EngineState<T> {
        &self.state
    }

    pub fn config(&self) -> &EngineConfig<T> {
        &self.config
    }

    pub fn events(&self) -> &[TriggerEvent<T>] {
        &self.events
    }

    pub fn decisions(&self) -> &[Decision<T>] {
        &self.decisions
    }

    pub fn steps_taken(&self) -> usize {
        self.step_index
    }

    pub fn no_trigger_violations(&self) -> usize {
        self.no_trigger_violations
    }

    /// Advances one step of length `dt`.
    pub fn step(&mut self) -> Result<&[Decision<T>]> {
        let n = self.state.n();
        let law = self.config.law;
        let params = self.params;

        self.decisions.clear();
        for i in 0..n {
            let ctx = self.state.trigger_context(self.graph, i);
            let rho = trigger::rho(&ctx, params.sigma[i]);
            let (fired, xi) = if law.is_random() {
                let u = T::lit(self.rngs[i].random::<f64>());
                (
                    trigger::decide(law, params, i, &ctx, u),
                    Some(params.xi_from_uniform(u)),
                )
            } else {
                (trigger::decide(law, params, i, &ctx, T::zero()), None)
            };
            let decision = Decision { fired, ctx, rho, xi };
            if decision.no_trigger_holds(params, i, law) == Some(false) {
                self.no_trigger_violations += 1;
            }
            self.decisions.push(decision);
        }
        for (i, d) in self.decisions.iter().enumerate() {
            if d.fired {
                self.state.x_hat[i] = self.state.x[i];
                let (dst, src) = (&mut self.state.y_hat[i * n..(i + 1) * n], &self.state.y[i * n..(i + 1) * n]);
                dst.copy_from_slice(src);
                self.events.push(TriggerEvent {
                    t: self.state.t,
                    step: self.step_index,
                    player: i,
                    rho: d.rho,
                    xi: d.xi,
                });
            }
        }

        let dt = self.config.dt;
        let (alpha, beta) = (self.config.alpha, self.config.beta);
        let mut dx = vec![T::zero(); n];
        for (i, dxi) in dx.iter_mut().enumerate() {
            let grad = self.game.partial_gradient(i, self.state.y_row(i))?;
            let xi = self.state.x[i];
            *dxi = self.game.interval(i).project(xi - alpha * grad) - xi;
        }
        let mut dy = vec![T::zero(); n * n];
        let yh = &self.state.y_hat;
        for i in 0..n {
            for j in 0..n {
                let own = yh[i * n + j];
                let mut acc = T::zero();
                for k in 0..n {
                    let a = self.graph.weight(i, k);
                    if a != T::zero() {
                        acc += a * (own - yh[k * n + j]);
                    }
                }
                let a_ij = self.graph.weight(i, j);
                if a_ij != T::zero() {
                    acc += a_ij * (own - self.state.x_hat[j]);
                }
                dy[i * n + j] = -beta * acc;
            }
        }

        for (x, d) in self.state.x.iter_mut().zip(&dx) {
            *x += dt * *d;
        }
        for (y, d) in self.state.y.iter_mut().zip(&dy) {
            *y += dt * *d;
        }
        for i in 0..n {
            self.state.y[i * n + i] = self.state.x[i];
        }
        self.step_index += 1;
        self.state.t = T::from_usize(self.step_index).expect("step count fits the scalar") * dt;
        for i in 0..n {
            self.state.delta[i] = params.delta_at(i, self.state.t);
        }

        let magnitude = self
            .state
            .x
            .iter()
            .chain(&self.state.y)
            .fold(T::zero(), |m, v| if v.is_nan() { T::infinity() } else { m.max(v.abs()) });
        if magnitude.as_f64() > DIVERGENCE_LIMIT {
            return Err(Error::NumericalDivergence {
                t: self.state.t.as_f64(),
                magnitude: magnitude.as_f64(),
            });
        }
        Ok(&self.decisions)
    }
}

/// One recorded row of a trajectory. `triggered` are the decisions made in
/// the step that ended at `t` (all false for the initial row).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow<T> {
    pub t: T,
    pub x: Vec<T>,
    pub err_inf: T,
    pub gamma: T,
    pub triggered: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutput<T> {
    pub law: LawKind,
    pub seed: u64,
    pub dt: T,
    pub steps: usize,
    pub trajectory: Vec<TrajectoryRow<T>>,
    pub events: Vec<TriggerEvent<T>>,
    pub metrics: RunMetrics<T>,
    pub final_state: EngineState<T>,
    pub no_trigger_violations: usize,
}

/// Runs `⌈horizon/dt⌉` steps and measures against the reference
/// equilibrium `x_star`.
pub fn run<T: Scalar, G: Game<T> + ?Sized>(
    game: &G,
    graph: &DirectedGraph<T>,
    params: &TriggerParams<T>,
    config: &EngineConfig<T>,
    x0: &[T],
    y0: &[Vec<T>],
    x_star: &[T],
) -> Result<RunOutput<T>> {
    if !graph.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    if x_star.len() != game.n() {
        return Err(Error::ShapeMismatch("reference equilibrium length".into()));
    }
    let mut sim = Simulation::init(game, graph, params, config.clone(), x0, y0)?;
    let n = game.n();
    let steps = config.steps();
    let dt = config.dt;

    let mut times = Vec::with_capacity(steps + 1);
    let mut errors = Vec::with_capacity(steps + 1);
    times.push(T::zero());
    errors.push(max_abs_diff(x0, x_star));

    let mut trajectory = vec![TrajectoryRow {
        t: T::zero(),
        x: x0.to_vec(),
        err_inf: errors[0],
        gamma: T::zero(),
        triggered: vec![false; n],
    }];
    let mut fired_total = 0usize;
    for k in 1..=steps {
        let decisions = sim.step()?;
        let triggered: Vec<bool> = decisions.iter().map(|d| d.fired).collect();
        fired_total += triggered.iter().filter(|&&f| f).count();
        let t = sim.state().t;
        let err = max_abs_diff(&sim.state().x, x_star);
        times.push(t);
        errors.push(err);
        if k % config.record_every == 0 || k == steps {
            let gamma = T::from_usize(fired_total).unwrap() / T::from_usize(n * k).unwrap();
            trajectory.push(TrajectoryRow {
                t,
                x: sim.state().x.clone(),
                err_inf: err,
                gamma,
                triggered,
            });
        }
    }

    let events = sim.events().to_vec();
    let metrics = RunMetrics::from_run(&events, n, steps, times, errors, DEFAULT_FIT_WINDOW);
    Ok(RunOutput {
        law: config.law,
        seed: config.seed,
        dt,
        steps,
        trajectory,
        metrics,
        no_trigger_violations: sim.no_trigger_violations(),
        final_state: sim.state().clone(),
        events,
    })
}

impl<T: Scalar> RunOutput<T> {
    pub fn final_error(&self) -> T {
        *self.metrics.err_series.last().expect("error series never empty")
    }

    pub fn final_gamma(&self) -> T {
        *self.metrics.gamma_series.last().expect("gamma series never empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{ActionInterval, QuadraticGame};

    fn two_player() -> (QuadraticGame<f64>, DirectedGraph<f64>, TriggerParams<f64>) {
        let g = QuadraticGame::with_box(
            vec![2.0, 3.0],
            vec![vec![0.0, 0.5], vec![-0.5, 0.0]],
            vec![-1.0, 2.0],
            ActionInterval::new(-10.0, 10.0).unwrap(),
        )
        .unwrap();
        let graph = DirectedGraph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let params = TriggerParams::new(1.075, 0.05, vec![1.0; 2], vec![0.4; 2], 10.0, vec![1.0; 2]).unwrap();
        (g, graph, params)
    }

    fn config(law: LawKind) -> EngineConfig<f64> {
        EngineConfig {
            alpha: 0.3,
            beta: 1.5,
            dt: 0.025,
            horizon: 1.0,
            seed: 7,
            law,
            record_every: 1,
        }
    }

    #[test]
    fn steps_rounding() {
        let mut c = config(LawKind::Continuous);
        c.horizon = 20.0;
        assert_eq!(c.steps(), 800);
        c.horizon = 0.025;
        assert_eq!(c.steps(), 1);
        c.horizon = 0.03;
        assert_eq!(c.steps(), 2);
    }

    #[test]
    fn infeasible_start_rejected() {
        let (g, graph, params) = two_player();
        let res = Simulation::init(&g, &graph, &params, config(LawKind::Static), &[20.0, 0.0], &[vec![0.0; 2], vec![0.0; 2]]);
        assert!(matches!(res, Err(Error::InfeasibleStart { player: 0, .. })));
    }

    #[test]
    fn diagonal_of_estimates_tracks_actions() {
        let (g, graph, params) = two_player();
        let mut sim = Simulation::init(
            &g,
            &graph,
            &params,
            config(LawKind::Stochastic),
            &[1.0, -2.0],
            &[vec![9.0, 3.0], vec![4.0, 9.0]],
        )
        .unwrap();
        assert_eq!(sim.state().y, vec![1.0, 3.0, 4.0, -2.0]);
        for _ in 0..20 {
            sim.step().unwrap();
            let s = sim.state();
            assert_eq!(s.y[0], s.x[0]);
            assert_eq!(s.y[3], s.x[1]);
        }
    }

    #[test]
    fn continuous_law_keeps_broadcast_equal_to_state_at_evaluation() {
        let (g, graph, params) = two_player();
        let mut sim = Simulation::init(
            &g,
            &graph,
            &params,
            config(LawKind::Continuous),
            &[1.0, -2.0],
            &[vec![1.0, 3.0], vec![4.0, -2.0]],
        )
        .unwrap();
        for _ in 0..10 {
            let before = sim.state().clone();
            sim.step().unwrap();
            assert!(sim.decisions().iter().all(|d| d.fired));
            // after refresh, broadcasts are the pre-step state
            assert_eq!(sim.state().x_hat, before.x);
            assert_eq!(sim.state().y_hat, before.y);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let (g, graph, params) = two_player();
        let mut cfg = config(LawKind::Continuous);
        cfg.beta = 1e6;
        cfg.horizon = 10.0;
        let res = run(&g, &graph, &params, &cfg, &[1.0, -2.0], &[vec![1.0, 3.0], vec![4.0, -2.0]], &[0.0, 0.0]);
        assert!(matches!(res, Err(Error::NumericalDivergence { .. })));
    }
}
