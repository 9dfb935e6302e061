//! CSV and JSON emission. Players are numbered from 1 in every file.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces the in-memory values bit for bit.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use nashseek::engine::TrajectoryRow;
use nashseek::{EnsembleMetrics, LawKind, TriggerEvent};

pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x_{i}")));
    h.push("err_inf".into());
    h.push("gamma".into());
    h.extend((1..=n).map(|i| format!("trig_{i}")));
    h
}

pub fn write_trajectory<W: Write>(w: W, rows: &[TrajectoryRow<f64>]) -> Result<()> {
    let n = rows.first().map_or(0, |r| r.x.len());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(trajectory_header(n))?;
    for r in rows {
        let mut rec = Vec::with_capacity(2 * n + 3);
        rec.push(r.t.to_string());
        rec.extend(r.x.iter().map(f64::to_string));
        rec.push(r.err_inf.to_string());
        rec.push(r.gamma.to_string());
        rec.extend(r.triggered.iter().map(|&f| if f { "1" } else { "0" }.to_string()));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(r: R) -> Result<Vec<TrajectoryRow<f64>>> {
    let mut input = csv::Reader::from_reader(r);
    let width = input.headers()?.len();
    if width < 3 || (width - 3) % 2 != 0 {
        bail!("trajectory header has {width} columns");
    }
    let n = (width - 3) / 2;
    let mut rows = Vec::new();
    for rec in input.records() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec[k].parse().with_context(|| format!("column {k}: '{}'", &rec[k]))
        };
        let mut x = Vec::with_capacity(n);
        for k in 1..=n {
            x.push(num(k)?);
        }
        let triggered = (n + 3..2 * n + 3)
            .map(|k| match &rec[k] {
                "1" => Ok(true),
                "0" => Ok(false),
                other => bail!("trigger flag '{other}'"),
            })
            .collect::<Result<_>>()?;
        rows.push(TrajectoryRow {
            t: num(0)?,
            x,
            err_inf: num(n + 1)?,
            gamma: num(n + 2)?,
            triggered,
        });
    }
    Ok(rows)
}

pub fn write_events<W: Write>(w: W, events: &[TriggerEvent<f64>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "player", "rho", "xi"])?;
    for e in events {
        out.write_record([
            e.t.to_string(),
            (e.player + 1).to_string(),
            e.rho.to_string(),
            e.xi.map_or(String::new(), |v| v.to_string()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an event log. `step` is recovered from `t / dt`.
pub fn read_events<R: Read>(r: R, dt: f64) -> Result<Vec<TriggerEvent<f64>>> {
    let mut input = csv::Reader::from_reader(r);
    let mut events = Vec::new();
    for rec in input.records() {
        let rec = rec?;
        let t: f64 = rec[0].parse()?;
        let player: usize = rec[1].parse()?;
        if player == 0 {
            bail!("players are numbered from 1");
        }
        events.push(TriggerEvent {
            t,
            step: (t / dt).round() as usize,
            player: player - 1,
            rho: rec[2].parse()?,
            xi: if rec[3].is_empty() { None } else { Some(rec[3].parse()?) },
        });
    }
    Ok(events)
}

pub const SUMMARY_HEADER: [&str; 6] = [
    "player",
    "law",
    "count_mean",
    "max_interval",
    "mean_interval",
    "min_interval",
];

/// One row per (law, player); interval columns are empty when a player
/// fired fewer than twice in every run.
pub fn write_summary<W: Write>(w: W, laws: &[(LawKind, EnsembleMetrics<f64>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for (law, e) in laws {
        for (i, count) in e.mean_counts.iter().enumerate() {
            let stats = e.interval_stats[i];
            let cell = |f: fn(&nashseek::IntervalStats<f64>) -> f64| stats.as_ref().map_or(String::new(), |s| f(s).to_string());
            out.write_record([
                (i + 1).to_string(),
                law.name().to_string(),
                count.to_string(),
                cell(|s| s.max),
                cell(|s| s.mean),
                cell(|s| s.min),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: serde::Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}
