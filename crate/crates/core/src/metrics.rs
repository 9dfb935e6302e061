//! Communication-rate and convergence statistics.
//!
//! A trigger fired in step `s` counts as `γ_i = 1` over the whole step
//! `[t_s, t_{s+1})`, so `Γ(t_k)` is the number of (player, step) firings in
//! the first `k` steps divided by `n·k`. `Γ(0) = 0`.

use serde::Serialize;

use crate::engine::TriggerEvent;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalStats<T> {
    pub max: T,
    pub mean: T,
    pub min: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetrics<T> {
    /// `t_k = k·dt`, `k = 0..=steps`.
    pub times: Vec<T>,
    pub gamma_series: Vec<T>,
    pub trigger_counts: Vec<usize>,
    /// Per player, gaps between consecutive events in firing order.
    pub intervals: Vec<Vec<T>>,
    pub err_series: Vec<T>,
    /// Slope of `ln err` over the fit window; `None` if the window is
    /// degenerate (e.g. the error hit zero).
    pub rate_fit: Option<T>,
}

impl<T: Scalar> RunMetrics<T> {
    pub fn from_run(
        events: &[TriggerEvent<T>],
        n: usize,
        steps: usize,
        times: Vec<T>,
        err_series: Vec<T>,
        window: (f64, f64),
    ) -> Self {
        let mut trigger_counts = vec![0usize; n];
        for e in events {
            trigger_counts[e.player] += 1;
        }
        let rate = rate_fit(&times, &err_series, (T::lit(window.0), T::lit(window.1))).ok();
        Self {
            gamma_series: gamma_series(events, n, steps),
            intervals: intervals(events, n),
            trigger_counts,
            times,
            err_series,
            rate_fit: rate,
        }
    }

    pub fn n(&self) -> usize {
        self.trigger_counts.len()
    }

    pub fn interval_stats(&self, player: usize) -> Option<IntervalStats<T>> {
        stats_of(&self.intervals[player])
    }
}

/// `Γ(t_k)` for `k = 0..=steps`.
pub fn gamma_series<T: Scalar>(events: &[TriggerEvent<T>], n: usize, steps: usize) -> Vec<T> {
    let mut per_step = vec![0usize; steps];
    for e in events {
        if e.step < steps {
            per_step[e.step] += 1;
        }
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(T::zero());
    let mut cumulative = 0usize;
    for (k, c) in per_step.into_iter().enumerate() {
        cumulative += c;
        out.push(T::from_usize(cumulative).unwrap() / T::from_usize(n * (k + 1)).unwrap());
    }
    out
}

pub fn intervals<T: Scalar>(events: &[TriggerEvent<T>], n: usize) -> Vec<Vec<T>> {
    let mut last: Vec<Option<T>> = vec![None; n];
    let mut gaps = vec![Vec::new(); n];
    for e in events {
        if let Some(prev) = last[e.player] {
            gaps[e.player].push(e.t - prev);
        }
        last[e.player] = Some(e.t);
    }
    gaps
}

/// `(max, mean, min)` of the gaps between `player`'s events; `None` with
/// fewer than two events.
pub fn interval_stats<T: Scalar>(events: &[TriggerEvent<T>], player: usize) -> Option<IntervalStats<T>> {
    let times: Vec<T> = events.iter().filter(|e| e.player == player).map(|e| e.t).collect();
    let gaps: Vec<T> = times.windows(2).map(|w| w[1] - w[0]).collect();
    stats_of(&gaps)
}

fn stats_of<T: Scalar>(gaps: &[T]) -> Option<IntervalStats<T>> {
    if gaps.is_empty() {
        return None;
    }
    let sum = gaps.iter().fold(T::zero(), |a, &g| a + g);
    Some(IntervalStats {
        max: gaps.iter().copied().fold(T::neg_infinity(), T::max),
        mean: sum / T::from_usize(gaps.len()).unwrap(),
        min: gaps.iter().copied().fold(T::infinity(), T::min),
    })
}

/// Ordinary least-squares slope of `ln err` against `t` over samples with
/// `t` in the closed `window`.
pub fn rate_fit<T: Scalar>(times: &[T], errs: &[T], window: (T, T)) -> Result<T> {
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(errs)
        .filter(|(&t, _)| t >= window.0 && t <= window.1)
        .map(|(&t, &e)| (t.as_f64(), e.as_f64()))
        .collect();
    if points.len() < 3 {
        return Err(Error::DegenerateWindow(format!(
            "{} samples in window, need at least 3",
            points.len()
        )));
    }
    if let Some((t, e)) = points.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(Error::DegenerateWindow(format!("nonpositive error {e} at t = {t}")));
    }
    let m = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_l = points.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, e) in &points {
        sxy += (t - mean_t) * (e.ln() - mean_l);
        sxx += (t - mean_t) * (t - mean_t);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateWindow("all samples share one time".into()));
    }
    Ok(T::lit(sxy / sxx))
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleMetrics<T> {
    pub runs: usize,
    pub times: Vec<T>,
    pub mean_gamma_series: Vec<T>,
    pub min_gamma_series: Vec<T>,
    pub max_gamma_series: Vec<T>,
    pub mean_err_series: Vec<T>,
    pub mean_counts: Vec<f64>,
    /// Pooled over every run's gaps, per player.
    pub interval_stats: Vec<Option<IntervalStats<T>>>,
}

impl<T: Scalar> EnsembleMetrics<T> {
    pub fn final_mean_gamma(&self) -> T {
        *self.mean_gamma_series.last().expect("non-empty series")
    }

    /// Mean over players of the pooled mean interval (players without
    /// intervals are skipped).
    pub fn mean_interval(&self) -> Option<T> {
        let means: Vec<T> = self.interval_stats.iter().flatten().map(|s| s.mean).collect();
        if means.is_empty() {
            return None;
        }
        let sum = means.iter().fold(T::zero(), |a, &m| a + m);
        Some(sum / T::from_usize(means.len()).unwrap())
    }
}

pub fn aggregate<T: Scalar>(runs: &[RunMetrics<T>]) -> Result<EnsembleMetrics<T>> {
    let first = runs
        .first()
        .ok_or_else(|| Error::ShapeMismatch("cannot aggregate zero runs".into()))?;
    let (n, len) = (first.n(), first.gamma_series.len());
    if let Some(k) = runs
        .iter()
        .position(|r| r.n() != n || r.gamma_series.len() != len || r.err_series.len() != len)
    {
        return Err(Error::ShapeMismatch(format!(
            "run {k} differs in player count or series length from run 0"
        )));
    }
    let count = T::from_usize(runs.len()).unwrap();
    let mut mean_gamma = Vec::with_capacity(len);
    let mut min_gamma = Vec::with_capacity(len);
    let mut max_gamma = Vec::with_capacity(len);
    let mut mean_err = Vec::with_capacity(len);
    for k in 0..len {
        let gammas = || runs.iter().map(move |r| r.gamma_series[k]);
        mean_gamma.push(gammas().fold(T::zero(), |a, g| a + g) / count);
        min_gamma.push(gammas().fold(T::infinity(), T::min));
        max_gamma.push(gammas().fold(T::neg_infinity(), T::max));
        mean_err.push(runs.iter().map(|r| r.err_series[k]).fold(T::zero(), |a, e| a + e) / count);
    }
    let mean_counts = (0..n)
        .map(|i| runs.iter().map(|r| r.trigger_counts[i] as f64).sum::<f64>() / runs.len() as f64)
        .collect();
    let interval_stats = (0..n)
        .map(|i| {
            let pooled: Vec<T> = runs.iter().flat_map(|r| r.intervals[i].iter().copied()).collect();
            stats_of(&pooled)
        })
        .collect();
    Ok(EnsembleMetrics {
        runs: runs.len(),
        times: first.times.clone(),
        mean_gamma_series: mean_gamma,
        min_gamma_series: min_gamma,
        max_gamma_series: max_gamma,
        mean_err_series: mean_err,
        mean_counts,
        interval_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn event(t: f64, step: usize, player: usize) -> TriggerEvent<f64> {
        TriggerEvent {
            t,
            step,
            player,
            rho: 0.0,
            xi: None,
        }
    }

    #[test]
    fn gamma_of_every_step_firing_is_one() {
        let events: Vec<_> = (0..10).flat_map(|s| (0..3).map(move |p| event(s as f64 * 0.1, s, p))).collect();
        let g = gamma_series(&events, 3, 10);
        assert_eq!(g[0], 0.0);
        assert!(g[1..].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn gamma_without_events_is_zero() {
        let g = gamma_series::<f64>(&[], 4, 10);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gamma_single_trigger_in_ten_steps() {
        let g = gamma_series(&[event(0.3, 3, 0)], 1, 10);
        assert_abs_diff_eq!(g[10], 0.1);
        assert_eq!(g[3], 0.0);
        assert_abs_diff_eq!(g[4], 0.25);
    }

    #[test]
    fn interval_example() {
        let ev = [event(0.1, 1, 0), event(0.3, 3, 0), event(0.35, 3, 1), event(0.4, 4, 0)];
        let s = interval_stats(&ev, 0).unwrap();
        assert_abs_diff_eq!(s.max, 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.mean, 0.15, epsilon = 1e-12);
        assert_abs_diff_eq!(s.min, 0.1, epsilon = 1e-12);
        assert!(interval_stats(&ev, 1).is_none());
    }

    #[test]
    fn rate_fit_of_exponential_and_constant() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let decay: Vec<f64> = times.iter().map(|t| (-2.0 * t).exp()).collect();
        assert_abs_diff_eq!(rate_fit(&times, &decay, (0.0, 10.0)).unwrap(), -2.0, epsilon = 1e-6);
        let flat = vec![0.3; times.len()];
        assert_abs_diff_eq!(rate_fit(&times, &flat, (0.0, 10.0)).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rate_fit_degenerate_windows() {
        let times = [0.0, 1.0, 2.0, 3.0];
        assert!(rate_fit(&times, &[1.0, 0.5, 0.0, 0.1], (0.0, 3.0)).is_err());
        assert!(rate_fit(&times, &[1.0, 0.5, 0.2, 0.1], (0.0, 1.0)).is_err());
    }

    fn metrics_with_gamma(value: f64) -> RunMetrics<f64> {
        RunMetrics {
            times: vec![0.0, 0.1, 0.2],
            gamma_series: vec![0.0, value, value],
            trigger_counts: vec![1, 2],
            intervals: vec![vec![], vec![0.1]],
            err_series: vec![1.0, 0.5, 0.25],
            rate_fit: None,
        }
    }

    #[test]
    fn aggregate_means() {
        let single = aggregate(&[metrics_with_gamma(0.4)]).unwrap();
        assert_eq!(single.mean_gamma_series, vec![0.0, 0.4, 0.4]);
        assert_eq!(single.mean_counts, vec![1.0, 2.0]);
        let pair = aggregate(&[metrics_with_gamma(0.0), metrics_with_gamma(1.0)]).unwrap();
        assert_eq!(pair.mean_gamma_series[1..], [0.5, 0.5]);
        assert_eq!(pair.min_gamma_series[2], 0.0);
        assert_eq!(pair.max_gamma_series[2], 1.0);
        assert!(pair.interval_stats[0].is_none());
    }

    #[test]
    fn aggregate_rejects_mismatched_runs() {
        let mut other = metrics_with_gamma(0.1);
        other.gamma_series.push(0.1);
        assert!(matches!(
            aggregate(&[metrics_with_gamma(0.1), other]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(aggregate::<f64>(&[]).is_err());
    }
}
