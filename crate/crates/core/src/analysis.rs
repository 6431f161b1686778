//! Consensus-time measurement and executable invariant checks over a
//! finished [`SimulationResult`].

use std::fmt;

use crate::engine::{reconstruct_neighbor_state, SimulationResult};
use crate::protocol::t_star;
use crate::trajectory::PiecewiseLinear;

/// Absolute slack for every `|z| <= alpha` style comparison.
pub const BAND_TOL: f64 = 1e-9;

/// Exact local disagreement `z_i(t)` of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct DisagreementTrajectory {
    pub agent: usize,
    pub z: PiecewiseLinear,
}

/// Builds `z_i` on the merged breakpoints of `x_i` and all neighbors.
pub fn disagreement_trajectory(result: &SimulationResult, agent: usize) -> DisagreementTrajectory {
    let neighbors = result.graph.neighbors(agent);
    let own = &result.trajectories[agent];

    let mut times: Vec<f64> = own.breakpoints.clone();
    for &j in neighbors {
        times.extend_from_slice(&result.trajectories[j].breakpoints);
    }
    times.sort_by(f64::total_cmp);
    times.dedup();

    let eval = |t: f64| -> f64 {
        let xi = own.value_at(t).expect("breakpoint inside horizon");
        neighbors
            .iter()
            .map(|&j| {
                xi - result.trajectories[j]
                    .value_at(t)
                    .expect("breakpoint inside horizon")
            })
            .sum()
    };
    let degree = neighbors.len() as f64;
    let rate = |t: f64| -> f64 {
        degree * own.slope_at(t)
            - neighbors
                .iter()
                .map(|&j| result.trajectories[j].slope_at(t))
                .sum::<f64>()
    };

    let values: Vec<f64> = times.iter().map(|&t| eval(t)).collect();
    let slopes: Vec<f64> = times[..times.len() - 1].iter().map(|&t| rate(t)).collect();
    DisagreementTrajectory {
        agent,
        z: PiecewiseLinear {
            breakpoints: times,
            values,
            slopes,
        },
    }
}

/// Supremum of the times at which `|z| > bound`, or `None` if `|z|` never
/// exceeds it. Linear segments make `|z|` convex per segment, so the excess
/// set inside a segment touches one of its ends.
fn last_exceedance(z: &PiecewiseLinear, bound: f64) -> Option<f64> {
    let mut last = None;
    for k in 0..z.breakpoints.len().saturating_sub(1) {
        let (t0, t1) = (z.breakpoints[k], z.breakpoints[k + 1]);
        let (v0, v1) = (z.values[k], z.values[k + 1]);
        if v1.abs() > bound {
            last = Some(t1);
        } else if v0.abs() > bound {
            let target = if v0 > 0.0 { bound } else { -bound };
            let frac = (v0 - target) / (v0 - v1);
            last = Some(t0 + frac * (t1 - t0));
        }
    }
    if z.breakpoints.len() == 1 && z.values[0].abs() > bound {
        last = Some(z.breakpoints[0]);
    }
    last
}

/// First time at which `|z| <= bound`.
fn first_entry(z: &PiecewiseLinear, bound: f64) -> Option<f64> {
    if z.values[0].abs() <= bound {
        return Some(z.breakpoints[0]);
    }
    for k in 0..z.breakpoints.len() - 1 {
        let (v0, v1) = (z.values[k], z.values[k + 1]);
        if v1.abs() <= bound {
            let target = if v0 > 0.0 { bound } else { -bound };
            let frac = ((v0 - target) / (v0 - v1)).clamp(0.0, 1.0);
            return Some(z.breakpoints[k] + frac * (z.breakpoints[k + 1] - z.breakpoints[k]));
        }
        // A segment can also pass straight through the band.
        if v0.signum() != v1.signum() {
            let frac = (v0.abs() - bound) / (v0 - v1).abs();
            return Some(z.breakpoints[k] + frac * (z.breakpoints[k + 1] - z.breakpoints[k]));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusReport {
    /// `None` when some `|z_i|` is still outside the band at the horizon.
    pub consensus_time: Option<f64>,
    /// Per agent: the last time `z_i` entered the band (0 if never outside).
    pub last_entry: Vec<Option<f64>>,
    /// Guaranteed bound `2 gamma T*`.
    pub bound: f64,
    pub satisfied: bool,
}

/// Time after which every `|z_i|` stays within `alpha`.
pub fn consensus_time(result: &SimulationResult) -> ConsensusReport {
    let alpha = result.params.alpha();
    let limit = alpha + BAND_TOL;
    let mut last_entry = Vec::with_capacity(result.agent_count());
    for i in 0..result.agent_count() {
        let z = disagreement_trajectory(result, i).z;
        let entry = if z.values.last().is_some_and(|v| v.abs() > limit) {
            None
        } else {
            Some(last_exceedance(&z, limit).unwrap_or(0.0))
        };
        last_entry.push(entry);
    }
    let consensus_time = last_entry
        .iter()
        .try_fold(0.0f64, |acc, e| e.map(|t| acc.max(t)));
    let bound = 2.0 * result.params.gamma() * t_star(&result.x0, result.params.beta());
    let satisfied = consensus_time.is_some_and(|t| t <= bound + BAND_TOL);
    ConsensusReport {
        consensus_time,
        last_entry,
        bound,
        satisfied,
    }
}

impl fmt::Display for ConsensusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.satisfied { "pass" } else { "fail" };
        match self.consensus_time {
            Some(t) => write!(
                f,
                "check=consensus_bound status={status} detail=consensus_time={t:.6},bound={:.6}",
                self.bound
            ),
            None => write!(
                f,
                "check=consensus_bound status={status} detail=not_achieved,bound={:.6}",
                self.bound
            ),
        }
    }
}

/// Where and why a check failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    /// 0-based agent position.
    pub agent: usize,
    pub time: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub counterexample: Option<Counterexample>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "check={} status=pass detail=-", self.name),
            Some(c) => write!(
                f,
                "check={} status=fail detail=agent={},t={},{}",
                self.name,
                c.agent + 1,
                c.time,
                c.detail
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub checks: Vec<CheckOutcome>,
}

impl InvariantReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn outcome(name: &'static str, counterexample: Option<Counterexample>) -> CheckOutcome {
    CheckOutcome {
        name,
        counterexample,
    }
}

fn fail(agent: usize, time: f64, detail: String) -> Option<Counterexample> {
    Some(Counterexample {
        agent,
        time,
        detail,
    })
}

/// Runs every invariant check and reports the first counterexample of each.
pub fn check_invariants(result: &SimulationResult) -> InvariantReport {
    let z: Vec<PiecewiseLinear> = (0..result.agent_count())
        .map(|i| disagreement_trajectory(result, i).z)
        .collect();
    InvariantReport {
        checks: vec![
            outcome("slope_bound", check_slope_bound(result, &z)),
            outcome("continuity", check_continuity(result)),
            outcome("containment", check_containment(result)),
            outcome("absorption", check_absorption(result, &z)),
            outcome("neighbor_averaging", check_neighbor_averaging(result)),
            outcome("monotonicity", check_monotonicity(result, &z)),
            outcome("reconstruction", check_reconstruction(result)),
        ],
    }
}

fn check_slope_bound(result: &SimulationResult, z: &[PiecewiseLinear]) -> Option<Counterexample> {
    let b = result.params.effective_beta();
    for (i, tr) in result.trajectories.iter().enumerate() {
        for (k, s) in tr.slopes.iter().enumerate() {
            if s.abs() > b + 1e-12 {
                return fail(i, tr.breakpoints[k], format!("slope={s},bound={b}"));
            }
        }
    }
    for (i, zi) in z.iter().enumerate() {
        let bound = 2.0 * b * result.graph.degree(i) as f64;
        for (k, s) in zi.slopes.iter().enumerate() {
            if s.abs() > bound + BAND_TOL {
                return fail(i, zi.breakpoints[k], format!("z_slope={s},bound={bound}"));
            }
        }
    }
    None
}

fn check_continuity(result: &SimulationResult) -> Option<Counterexample> {
    for (i, tr) in result.trajectories.iter().enumerate() {
        if tr.breakpoints[0] != 0.0 || tr.end_time() != result.horizon {
            return fail(
                i,
                tr.breakpoints[0],
                "trajectory does not span [0, horizon]".into(),
            );
        }
        for k in 0..tr.breakpoints.len() - 1 {
            let dt = tr.breakpoints[k + 1] - tr.breakpoints[k];
            if dt <= 0.0 {
                return fail(i, tr.breakpoints[k], "breakpoints not increasing".into());
            }
            let predicted = tr.values[k] + tr.slopes[k] * dt;
            let scale = tr.values[k + 1].abs().max(1.0);
            if (predicted - tr.values[k + 1]).abs() > 1e-12 * scale {
                return fail(
                    i,
                    tr.breakpoints[k + 1],
                    format!("jump {} -> {}", predicted, tr.values[k + 1]),
                );
            }
        }
    }
    None
}

fn check_containment(result: &SimulationResult) -> Option<Counterexample> {
    let lo = result.x0.iter().copied().fold(f64::INFINITY, f64::min) - BAND_TOL;
    let hi = result.x0.iter().copied().fold(f64::NEG_INFINITY, f64::max) + BAND_TOL;
    for (i, tr) in result.trajectories.iter().enumerate() {
        for (t, v) in tr.breakpoints.iter().zip(&tr.values) {
            if *v < lo || *v > hi {
                return fail(i, *t, format!("x={v} outside [{lo},{hi}]"));
            }
        }
    }
    None
}

fn check_absorption(result: &SimulationResult, z: &[PiecewiseLinear]) -> Option<Counterexample> {
    let limit = result.params.alpha() + BAND_TOL;
    for (i, zi) in z.iter().enumerate() {
        let Some(entry) = first_entry(zi, limit) else {
            continue;
        };
        for (t, v) in zi.breakpoints.iter().zip(&zi.values) {
            if *t > entry && v.abs() > limit {
                return fail(i, *t, format!("z={v} left the band entered at t={entry}"));
            }
        }
    }
    None
}

fn check_neighbor_averaging(result: &SimulationResult) -> Option<Counterexample> {
    let alpha = result.params.alpha();
    for e in &result.events {
        if e.z.abs() > alpha {
            continue;
        }
        let next = e.time + e.plan.duration;
        if next > result.horizon {
            continue;
        }
        let neighbors = result.graph.neighbors(e.agent);
        let mean = neighbors
            .iter()
            .map(|&j| result.state_at(j, e.time).expect("event inside horizon"))
            .sum::<f64>()
            / neighbors.len() as f64;
        let landed = result.trajectories[e.agent]
            .value_at(next)
            .expect("inside horizon");
        if (landed - mean).abs() > BAND_TOL * mean.abs().max(1.0) {
            return fail(e.agent, next, format!("x={landed},neighbor_mean={mean}"));
        }
    }
    None
}

fn check_monotonicity(result: &SimulationResult, z: &[PiecewiseLinear]) -> Option<Counterexample> {
    let alpha = result.params.alpha();
    for e in &result.events {
        if e.z.abs() <= alpha {
            continue;
        }
        let zi = &z[e.agent];
        let end = (e.time + e.plan.duration).min(result.horizon);
        let direction = if e.z < 0.0 { 1.0 } else { -1.0 };
        let start = zi.segment_index(e.time);
        for k in start..zi.slopes.len() {
            if zi.breakpoints[k] >= end {
                break;
            }
            if direction * zi.slopes[k] < -BAND_TOL {
                return fail(
                    e.agent,
                    zi.breakpoints[k],
                    format!("z moving away from band (slope={})", zi.slopes[k]),
                );
            }
        }
    }
    None
}

fn check_reconstruction(result: &SimulationResult) -> Option<Counterexample> {
    for e in &result.events {
        for &j in result.graph.neighbors(e.agent) {
            let truth = result.state_at(j, e.time).expect("event inside horizon");
            let Some(seen) = reconstruct_neighbor_state(&result.broadcasts, j, e.time) else {
                return fail(
                    e.agent,
                    e.time,
                    format!("no broadcast from agent {}", j + 1),
                );
            };
            if (seen - truth).abs() > 1e-12 {
                return fail(
                    e.agent,
                    e.time,
                    format!("neighbor {} reconstructed {seen}, actual {truth}", j + 1),
                );
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{default_horizon, run};
    use crate::graph::Graph;
    use crate::protocol::ProtocolParams;

    fn fig6(gamma: f64) -> SimulationResult {
        let x0 = [7.0, 2.0, 4.0, 3.0, 1.0, 5.0];
        let p = ProtocolParams::new(0.6, 1.0, gamma).unwrap();
        run(&Graph::fig6(), &x0, p, default_horizon(&x0, &p)).unwrap()
    }

    #[test]
    fn disagreement_matches_definition() {
        let r = fig6(1.0);
        for i in 0..6 {
            let d = disagreement_trajectory(&r, i);
            for (t, v) in d.z.breakpoints.iter().zip(&d.z.values) {
                let xi = r.state_at(i, *t).unwrap();
                let direct: f64 = r
                    .graph
                    .neighbors(i)
                    .iter()
                    .map(|&j| xi - r.state_at(j, *t).unwrap())
                    .sum();
                assert!((direct - v).abs() < 1e-12);
            }
        }
        assert_eq!(disagreement_trajectory(&r, 2).z.values[0], 0.0);
    }

    #[test]
    fn two_agent_disagreement_slope() {
        let g = Graph::path(2).unwrap();
        let p = ProtocolParams::new(0.5, 1.0, 1.0).unwrap();
        let r = run(&g, &[0.0, 5.0], p, 5.0).unwrap();
        let d = disagreement_trajectory(&r, 0);
        assert_eq!(d.z.values[0], -5.0);
        assert_eq!(d.z.slopes[0], 2.0);
    }

    #[test]
    fn reference_consensus_time() {
        let report = consensus_time(&fig6(1.0));
        let t = report.consensus_time.unwrap();
        assert!((t - 2.26).abs() <= 0.01, "t={t}");
        assert!(report.satisfied);
        assert_eq!(report.bound, 6.0);
    }

    #[test]
    fn equal_states_reach_consensus_immediately() {
        let g = Graph::complete(4).unwrap();
        let p = ProtocolParams::new(0.1, 1.0, 1.0).unwrap();
        let r = run(&g, &[3.0; 4], p, 1.0).unwrap();
        let report = consensus_time(&r);
        assert_eq!(report.consensus_time, Some(0.0));
        assert!(report.satisfied);
        assert!(disagreement_trajectory(&r, 1)
            .z
            .values
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn short_horizon_reports_not_achieved() {
        let x0 = [7.0, 2.0, 4.0, 3.0, 1.0, 5.0];
        let p = ProtocolParams::new(0.6, 1.0, 1.0).unwrap();
        let r = run(&Graph::fig6(), &x0, p, 1.0).unwrap();
        let report = consensus_time(&r);
        assert_eq!(report.consensus_time, None);
        assert!(!report.satisfied);
        assert!(report.to_string().contains("status=fail"));
    }

    #[test]
    fn reference_runs_pass_all_invariants() {
        for gamma in [1.0, 5.0, 10.0] {
            let report = check_invariants(&fig6(gamma));
            assert!(report.all_passed(), "{report}");
            assert_eq!(report.checks.len(), 7);
        }
    }

    #[test]
    fn forged_control_is_caught() {
        let mut r = fig6(1.0);
        // Agent 1 sits at the maximum and is pushed further up.
        let tr = &mut r.trajectories[0];
        tr.slopes[0] = 3.0;
        let dt = tr.breakpoints[1] - tr.breakpoints[0];
        tr.values[1] = tr.values[0] + 3.0 * dt;
        let report = check_invariants(&r);
        assert!(!report.get("slope_bound").unwrap().passed());
        assert!(!report.get("containment").unwrap().passed());
        let line = report.get("containment").unwrap().to_string();
        assert!(line.starts_with("check=containment status=fail detail=agent=1"));
    }

    #[test]
    fn forged_broadcast_breaks_reconstruction() {
        let mut r = fig6(1.0);
        let mut log = crate::engine::BroadcastLog::new(6);
        for b in r.broadcasts.records() {
            let mut b = *b;
            if b.agent == 3 {
                b.state += 0.5;
            }
            log.push(b);
        }
        r.broadcasts = log;
        let report = check_invariants(&r);
        assert!(!report.get("reconstruction").unwrap().passed());
        assert!(report.get("absorption").unwrap().passed());
    }

    #[test]
    fn last_exceedance_interpolates() {
        let z = PiecewiseLinear {
            breakpoints: vec![0.0, 1.0, 2.0],
            values: vec![-3.0, -1.0, 0.0],
            slopes: vec![2.0, 1.0],
        };
        assert_eq!(last_exceedance(&z, 2.0), Some(0.5));
        assert_eq!(last_exceedance(&z, 5.0), None);
        assert_eq!(first_entry(&z, 2.0), Some(0.5));
        let cross = PiecewiseLinear {
            breakpoints: vec![0.0, 1.0],
            values: vec![-2.0, 2.0],
            slopes: vec![4.0],
        };
        assert_eq!(first_entry(&cross, 1.0), Some(0.25));
        assert_eq!(last_exceedance(&cross, 1.0), Some(1.0));
    }
}
