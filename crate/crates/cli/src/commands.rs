//! Subcommand implementations. Each returns its results so tests can check
//! them without parsing files.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use nashseek::bounds::compute_report;
use nashseek::metrics::aggregate;
use nashseek::scenario::load_scenario;
use nashseek::{BoundsReport, EnsembleMetrics, IntervalStats, LawKind, NeSolution, RunOutput64, Scenario64};
use rayon::prelude::*;
use serde::Serialize;

use crate::output;
use crate::plot::{Chart, Series};

/// Loads a scenario and applies a `dt` override.
pub fn load(path: &Path, dt: Option<f64>) -> Result<Scenario64> {
    let mut s: Scenario64 =
        load_scenario(path).with_context(|| format!("loading scenario {}", path.display()))?;
    if let Some(dt) = dt {
        s.engine.dt = dt;
        s.engine.validate()?;
    }
    Ok(s)
}

pub fn solve_ne(s: &Scenario64) -> Result<NeSolution<f64>> {
    Ok(s.solve_ne()?)
}

pub fn bounds(s: &Scenario64) -> Result<BoundsReport> {
    Ok(compute_report(
        &s.game,
        &s.graph,
        s.engine.alpha,
        s.engine.beta,
        s.trigger.eta,
        None,
    )?)
}

#[derive(Debug, Serialize)]
pub struct PlayerSummary {
    pub player: usize,
    pub count: usize,
    pub intervals: Option<IntervalStats<f64>>,
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary<'a> {
    pub law: LawKind,
    pub seed: u64,
    pub dt: f64,
    pub steps: usize,
    pub x_star: &'a [f64],
    pub final_x: &'a [f64],
    pub final_error: f64,
    pub final_gamma: f64,
    pub rate_fit: Option<f64>,
    pub no_trigger_violations: usize,
    pub players: Vec<PlayerSummary>,
    pub warnings: &'a [String],
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_svg(dir: &Path, name: &str, chart: &Chart) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, chart.to_svg()).with_context(|| format!("writing {}", path.display()))
}

/// One seeded run; writes `trajectory.csv`, `events.csv`, `metrics.json`,
/// `actions.svg`, `gamma.svg` and `error.svg` into `out`.
pub fn simulate(s: &Scenario64, law: LawKind, seed: u64, out: &Path) -> Result<RunOutput64> {
    let x_star = s.reference_ne()?;
    let run = s.simulate(law, seed, &x_star)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    output::write_trajectory(create(out, "trajectory.csv")?, &run.trajectory)?;
    output::write_events(create(out, "events.csv")?, &run.events)?;
    let summary = SimulateSummary {
        law,
        seed,
        dt: run.dt,
        steps: run.steps,
        x_star: &x_star,
        final_x: &run.final_state.x,
        final_error: run.final_error(),
        final_gamma: run.final_gamma(),
        rate_fit: run.metrics.rate_fit,
        no_trigger_violations: run.no_trigger_violations,
        players: (0..s.n())
            .map(|i| PlayerSummary {
                player: i + 1,
                count: run.metrics.trigger_counts[i],
                intervals: run.metrics.interval_stats(i),
            })
            .collect(),
        warnings: &s.warnings,
    };
    output::write_json(create(out, "metrics.json")?, &summary)?;

    let t_end = run.trajectory.last().map_or(0.0, |r| r.t);
    let mut actions = Chart::new(format!("Actions ({law}, seed {seed})"), "t (s)", "x_i");
    for i in 0..s.n() {
        actions.push(Series::new(
            format!("x_{}", i + 1),
            run.trajectory.iter().map(|r| (r.t, r.x[i])).collect(),
        ));
    }
    for (i, &xs) in x_star.iter().enumerate() {
        actions.push(Series::new(format!("x*_{}", i + 1), vec![(0.0, xs), (t_end, xs)]).dashed());
    }
    write_svg(out, "actions.svg", &actions)?;

    let mut gamma = Chart::new("Communication rate", "t (s)", "Gamma(t)");
    gamma.push(Series::new(law.name(), series(&run.metrics.times, &run.metrics.gamma_series)));
    write_svg(out, "gamma.svg", &gamma)?;

    let mut err = Chart::new("Distance to equilibrium", "t (s)", "max_i |x_i - x*_i|").log_y();
    err.push(Series::new(law.name(), series(&run.metrics.times, &run.metrics.err_series)));
    write_svg(out, "error.svg", &err)?;
    Ok(run)
}

fn series(t: &[f64], v: &[f64]) -> Vec<(f64, f64)> {
    t.iter().copied().zip(v.iter().copied()).collect()
}

/// Runs seeds `base_seed .. base_seed + runs` in parallel; results come
/// back in seed order.
pub fn ensemble(s: &Scenario64, law: LawKind, runs: usize, base_seed: u64, x_star: &[f64]) -> Result<Vec<RunOutput64>> {
    (0..runs as u64)
        .into_par_iter()
        .map(|k| Ok(s.simulate(law, base_seed + k, x_star)?))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct LawComparison {
    pub law: LawKind,
    pub final_mean_gamma: f64,
    pub mean_final_error: f64,
    pub max_final_error: f64,
    pub mean_interval: Option<f64>,
    pub no_trigger_violations: usize,
    #[serde(skip)]
    pub metrics: EnsembleMetrics<f64>,
    #[serde(skip)]
    pub runs: Vec<RunOutput64>,
}

/// Ensembles for each law. With `out`, writes `summary.csv`,
/// `compare.json`, `gamma.svg` and `error.svg`.
pub fn compare(
    s: &Scenario64,
    laws: &[LawKind],
    runs: usize,
    base_seed: u64,
    out: Option<&Path>,
) -> Result<Vec<LawComparison>> {
    anyhow::ensure!(runs >= 1, "runs must be >= 1");
    let x_star = s.reference_ne()?;
    let mut results = Vec::with_capacity(laws.len());
    for &law in laws {
        let outputs = ensemble(s, law, runs, base_seed, &x_star)?;
        let metrics: Vec<_> = outputs.iter().map(|o| o.metrics.clone()).collect();
        let e = aggregate(&metrics)?;
        let finals: Vec<f64> = outputs.iter().map(|o| o.final_error()).collect();
        results.push(LawComparison {
            law,
            final_mean_gamma: e.final_mean_gamma(),
            mean_final_error: finals.iter().sum::<f64>() / finals.len() as f64,
            max_final_error: finals.iter().copied().fold(0.0, f64::max),
            mean_interval: e.mean_interval(),
            no_trigger_violations: outputs.iter().map(|o| o.no_trigger_violations).sum(),
            metrics: e,
            runs: outputs,
        });
    }

    if let Some(out) = out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let table: Vec<_> = results.iter().map(|r| (r.law, r.metrics.clone())).collect();
        output::write_summary(create(out, "summary.csv")?, &table)?;
        output::write_json(create(out, "compare.json")?, &results)?;
        let mut gamma = Chart::new(format!("Mean communication rate ({runs} runs)"), "t (s)", "Gamma(t)");
        let mut err = Chart::new(format!("Mean distance to equilibrium ({runs} runs)"), "t (s)", "max_i |x_i - x*_i|").log_y();
        for r in &results {
            gamma.push(Series::new(r.law.name(), series(&r.metrics.times, &r.metrics.mean_gamma_series)));
            err.push(Series::new(r.law.name(), series(&r.metrics.times, &r.metrics.mean_err_series)));
        }
        write_svg(out, "gamma.svg", &gamma)?;
        write_svg(out, "error.svg", &err)?;
    }
    Ok(results)
}
