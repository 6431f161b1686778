//! CSV export of trajectories and the update log.

use std::io::{self, Write};

use crate::analysis::disagreement_trajectory;
use crate::engine::SimulationResult;

/// Formats `v` with 12 significant digits, trailing zeros trimmed.
pub fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// `time,agent,x,z`: one row per agent at every breakpoint of any agent.
pub fn write_trajectories<W: Write>(result: &SimulationResult, mut out: W) -> io::Result<()> {
    writeln!(out, "time,agent,x,z")?;
    let mut times: Vec<f64> = result
        .trajectories
        .iter()
        .flat_map(|t| t.breakpoints.iter().copied())
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let z: Vec<_> = (0..result.agent_count())
        .map(|i| disagreement_trajectory(result, i).z)
        .collect();
    for &t in &times {
        for (i, zi) in z.iter().enumerate() {
            let x = result.trajectories[i]
                .value_at(t)
                .map_err(io::Error::other)?;
            let zv = zi.value_at(t).map_err(io::Error::other)?;
            writeln!(out, "{},{},{},{}", sig12(t), i + 1, sig12(x), sig12(zv))?;
        }
    }
    Ok(())
}

/// `agent,k,time,z,control,duration`: one row per executed update.
pub fn write_events<W: Write>(result: &SimulationResult, mut out: W) -> io::Result<()> {
    writeln!(out, "agent,k,time,z,control,duration")?;
    for e in &result.events {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            e.agent + 1,
            e.k,
            sig12(e.time),
            sig12(e.z),
            sig12(e.plan.control),
            sig12(e.plan.duration)
        )?;
    }
    Ok(())
}
