//! JSON scenario files: graph, game, trigger law, step sizes and initial
//! state in one document.
//!
//! ```json
//! {
//!   "graph":   {"adjacency": [[0, 1], [1, 0]]},
//!   "game":    {"kind": "quadratic", "n": 2, ...},
//!   "trigger": {"law": "stochastic", "kappa": 1.075, "a_floor": 0.05,
//!               "eta": 10, "c": 1, "sigma_rule": "0.8/din"},
//!   "engine":  {"alpha": 0.14, "beta": 1.5, "horizon": 20},
//!   "x0": [1, 2],
//!   "y0": [[1, 0], [0, 2]]
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::sigma_bound;
use crate::engine::{self, EngineConfig, RunOutput, DEFAULT_DT};
use crate::error::{Error, Result};
use crate::game::{estimate_constants, Game, GameSpec, PerPlayer};
use crate::graph::DirectedGraph;
use crate::oracle::{self, default_step, NeSolution, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::scalar::Scalar;
use crate::trigger::{LawKind, TriggerParams};

const DEFAULT_SIGMA_RULE: &str = "0.8/din";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct TriggerSpec<T> {
    law: LawKind,
    kappa: T,
    a_floor: T,
    eta: T,
    #[serde(default)]
    c: Option<PerPlayer<T>>,
    #[serde(default)]
    sigma: Option<PerPlayer<T>>,
    #[serde(default)]
    sigma_rule: Option<String>,
    #[serde(default)]
    delta0: Option<PerPlayer<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
struct EngineSpec<T> {
    alpha: T,
    beta: T,
    #[serde(default)]
    dt: Option<T>,
    horizon: T,
    #[serde(default)]
    seed: u64,
    #[serde(default = "one_usize")]
    record_every: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound = "T: Scalar")]
struct ScenarioFile<T> {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    description: Option<String>,
    graph: DirectedGraph<T>,
    game: GameSpec<T>,
    trigger: TriggerSpec<T>,
    engine: EngineSpec<T>,
    x0: Vec<T>,
    #[serde(default)]
    y0: Option<Vec<Vec<T>>>,
    #[serde(default = "one_usize")]
    runs: usize,
    #[serde(default)]
    ne_override: Option<Vec<T>>,
}

fn one_usize() -> usize {
    1
}

/// A validated scenario with all defaults filled in.
#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub name: Option<String>,
    pub graph: DirectedGraph<T>,
    pub game: GameSpec<T>,
    pub trigger: TriggerParams<T>,
    /// `law` and `seed` here are the scenario defaults; callers override them
    /// per run.
    pub engine: EngineConfig<T>,
    pub x0: Vec<T>,
    pub y0: Vec<Vec<T>>,
    pub runs: usize,
    pub ne_override: Option<Vec<T>>,
    /// Advisory findings that do not stop loading.
    pub warnings: Vec<String>,
}

/// `"<factor>/din"` → `factor`.
fn parse_sigma_rule<T: Scalar>(rule: &str) -> Result<T> {
    let compact: String = rule.chars().filter(|c| !c.is_whitespace()).collect();
    let factor = compact
        .strip_suffix("/din")
        .and_then(|f| f.parse::<f64>().ok())
        .filter(|f| f.is_finite() && *f > 0.0)
        .ok_or_else(|| {
            Error::Validation(format!(
                "sigma_rule '{rule}' must look like '<positive factor>/din'"
            ))
        })?;
    Ok(T::lit(factor))
}

impl<T: Scalar> Scenario<T> {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ScenarioFile<T> = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse {
                path,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        Self::from_file(file)
    }

    fn from_file(f: ScenarioFile<T>) -> Result<Self> {
        let n = f.game.n();
        let mut warnings = Vec::new();
        if f.graph.n() != n {
            return Err(Error::Validation(format!(
                "graph has {} players but game has {n}",
                f.graph.n()
            )));
        }
        if !f.graph.is_strongly_connected() {
            return Err(Error::NotStronglyConnected);
        }

        let t = f.trigger;
        let sigma = match (t.sigma, t.sigma_rule) {
            (Some(_), Some(_)) => {
                return Err(Error::Validation(
                    "give either trigger.sigma or trigger.sigma_rule, not both".into(),
                ))
            }
            (Some(s), None) => s.resolve(n, "trigger.sigma")?,
            (None, rule) => {
                let factor = parse_sigma_rule(rule.as_deref().unwrap_or(DEFAULT_SIGMA_RULE))?;
                TriggerParams::sigma_from_in_degree(&f.graph, factor)?
            }
        };
        let bound = sigma_bound(&f.graph);
        if let Some(i) = sigma.iter().position(|s| s.as_f64() > bound) {
            warnings.push(format!(
                "sigma[{i}] = {} exceeds the advisory bound {bound:.6}",
                sigma[i]
            ));
        }
        let c = t
            .c
            .unwrap_or(PerPlayer::Uniform(T::one()))
            .resolve(n, "trigger.c")?;
        let delta0 = t
            .delta0
            .unwrap_or(PerPlayer::Uniform(T::one()))
            .resolve(n, "trigger.delta0")?;
        let trigger = TriggerParams::new(t.kappa, t.a_floor, c, sigma, t.eta, delta0)?;

        let e = f.engine;
        let engine = EngineConfig {
            alpha: e.alpha,
            beta: e.beta,
            dt: e.dt.unwrap_or(T::lit(DEFAULT_DT)),
            horizon: e.horizon,
            seed: e.seed,
            law: t.law,
            record_every: e.record_every,
        };
        engine.validate()?;

        if f.x0.len() != n {
            return Err(Error::Validation(format!(
                "x0 has {} entries, expected {n}",
                f.x0.len()
            )));
        }
        for (i, &xi) in f.x0.iter().enumerate() {
            if !f.game.interval(i).contains(xi) {
                return Err(Error::InfeasibleStart {
                    player: i,
                    value: xi.as_f64(),
                });
            }
        }
        let y0 = match f.y0 {
            Some(rows) => {
                if rows.len() != n {
                    return Err(Error::Validation(format!(
                        "y0 has {} rows, expected {n}",
                        rows.len()
                    )));
                }
                if let Some(i) = rows.iter().position(|r| r.len() != n) {
                    return Err(Error::Validation(format!("y0 row {i} must have {n} entries")));
                }
                rows
            }
            None => vec![f.x0.clone(); n],
        };
        if f.runs == 0 {
            return Err(Error::Validation("runs must be >= 1".into()));
        }
        if let Some(ne) = &f.ne_override {
            if ne.len() != n {
                return Err(Error::Validation(format!(
                    "ne_override has {} entries, expected {n}",
                    ne.len()
                )));
            }
        }

        Ok(Scenario {
            name: f.name,
            graph: f.graph,
            game: f.game,
            trigger,
            engine,
            x0: f.x0,
            y0,
            runs: f.runs,
            ne_override: f.ne_override,
            warnings,
        })
    }

    pub fn n(&self) -> usize {
        self.game.n()
    }

    /// Centralized equilibrium with the default step rule.
    pub fn solve_ne(&self) -> Result<NeSolution<T>> {
        let constants = estimate_constants(&self.game, &self.game.intervals(), 10_000).ok();
        let step = T::lit(default_step(constants.as_ref()));
        let scale = self
            .game
            .intervals()
            .iter()
            .fold(T::one(), |m, iv| m.max(iv.lo().abs()).max(iv.hi().abs()));
        let tol = T::lit(DEFAULT_TOL).max(T::epsilon() * T::lit(64.0) * scale);
        oracle::solve_ne(&self.game, step, tol, DEFAULT_MAX_ITER)
    }

    /// `ne_override` when given, otherwise the oracle's solution.
    pub fn reference_ne(&self) -> Result<Vec<T>> {
        match &self.ne_override {
            Some(x) => Ok(x.clone()),
            None => Ok(self.solve_ne()?.x_star),
        }
    }

    /// Engine settings for one run.
    pub fn engine_for(&self, law: LawKind, seed: u64) -> EngineConfig<T> {
        EngineConfig {
            law,
            seed,
            ..self.engine.clone()
        }
    }

    pub fn simulate(&self, law: LawKind, seed: u64, x_star: &[T]) -> Result<RunOutput<T>> {
        engine::run(
            &self.game,
            &self.graph,
            &self.trigger,
            &self.engine_for(law, seed),
            &self.x0,
            &self.y0,
            x_star,
        )
    }
}

pub fn load_scenario<T: Scalar>(path: impl AsRef<Path>) -> Result<Scenario<T>> {
    let text = std::fs::read_to_string(path)?;
    Scenario::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(x0: &str, trigger_extra: &str) -> String {
        format!(
            r#"{{
  "graph": {{"adjacency": [[0, 1], [1, 0]]}},
  "game": {{"kind": "quadratic", "n": 2, "diag_a": 2, "offset": [-1, -2],
            "intervals": [-5, 5]}},
  "trigger": {{"law": "stochastic", "kappa": 1.075, "a_floor": 0.05, "eta": 10{trigger_extra}}},
  "engine": {{"alpha": 0.1, "beta": 1.0, "horizon": 1}},
  "x0": {x0}
}}"#
        )
    }

    #[test]
    fn defaults_are_filled() {
        let s = Scenario::<f64>::from_json_str(&doc("[1, 2]", "")).unwrap();
        assert_eq!(s.engine.dt, DEFAULT_DT);
        assert_eq!(s.engine.record_every, 1);
        assert_eq!(s.engine.seed, 0);
        assert_eq!(s.runs, 1);
        assert_eq!(s.trigger.sigma, vec![0.8, 0.8]);
        assert_eq!(s.trigger.delta0, vec![1.0, 1.0]);
        assert_eq!(s.y0, vec![vec![1.0, 2.0]; 2]);
    }

    #[test]
    fn sigma_above_bound_warns() {
        let s = Scenario::<f64>::from_json_str(&doc("[1, 2]", r#", "sigma": 0.5"#)).unwrap();
        assert_eq!(s.warnings.len(), 1);
        let s = Scenario::<f64>::from_json_str(&doc("[1, 2]", r#", "sigma": 0.01"#)).unwrap();
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn wrong_x0_length_is_validation_error() {
        let err = Scenario::<f64>::from_json_str(&doc("[1, 2, 3]", "")).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err:?}");
    }

    #[test]
    fn sigma_and_rule_together_rejected() {
        let extra = r#", "sigma": 0.1, "sigma_rule": "0.8/din""#;
        assert!(Scenario::<f64>::from_json_str(&doc("[1, 2]", extra)).is_err());
    }

    #[test]
    fn parse_error_names_field_and_line() {
        let text = doc("[1, 2]", "").replace("\"kappa\": 1.075", "\"kappa\": \"big\"");
        match Scenario::<f64>::from_json_str(&text) {
            Err(Error::Parse { path, line, .. }) => {
                assert_eq!(path, "trigger.kappa");
                assert_eq!(line, 5);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn sigma_rule_parsing() {
        assert_eq!(parse_sigma_rule::<f64>("0.8/din").unwrap(), 0.8);
        assert_eq!(parse_sigma_rule::<f64>(" 2 / din ").unwrap(), 2.0);
        assert!(parse_sigma_rule::<f64>("0.8*din").is_err());
        assert!(parse_sigma_rule::<f64>("-1/din").is_err());
    }

    #[test]
    fn single_precision_loads() {
        let s = Scenario::<f32>::from_json_str(&doc("[1, 2]", "")).unwrap();
        let ne = s.solve_ne().unwrap();
        assert!((ne.x_star[0] - 0.5).abs() < 1e-4);
    }
}
