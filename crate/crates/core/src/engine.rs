//! Discrete-event execution of the self-triggered protocol.
//!
//! Every agent updates at `t = 0`. At each update the agent measures its
//! local disagreement, plans the next update with [`plan_update`], holds the
//! planned input until then and broadcasts `(state, input)` to its
//! neighbors. Between updates each state moves linearly, so the whole run is
//! represented exactly by piecewise-linear trajectories.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::protocol::{plan_update, t_star, ProtocolParams, UpdatePlan};
use crate::trajectory::PiecewiseLinear;

/// Relative slack used when comparing event times against a window end.
///
/// Event times are accumulated sums of planned durations, so an instant that
/// is mathematically equal to the window end can land a few ulps below it.
pub const WINDOW_TOL: f64 = 1e-9;

/// `t` lies strictly before `end`, treating times within [`WINDOW_TOL`]
/// (relative) of `end` as equal to it.
pub fn strictly_before(t: f64, end: f64) -> bool {
    t < end - WINDOW_TOL * end.abs().max(1.0)
}

/// What agent `agent` sent to its neighbors at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadcastRecord {
    pub agent: usize,
    pub time: f64,
    pub state: f64,
    pub control: f64,
}

/// Time-ordered broadcast history with a per-agent index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BroadcastLog {
    records: Vec<BroadcastRecord>,
    by_agent: Vec<Vec<usize>>,
}

impl BroadcastLog {
    pub fn new(agents: usize) -> Self {
        Self {
            records: Vec::new(),
            by_agent: vec![Vec::new(); agents],
        }
    }

    pub fn push(&mut self, record: BroadcastRecord) {
        if record.agent >= self.by_agent.len() {
            self.by_agent.resize(record.agent + 1, Vec::new());
        }
        self.by_agent[record.agent].push(self.records.len());
        self.records.push(record);
    }

    pub fn records(&self) -> &[BroadcastRecord] {
        &self.records
    }

    pub fn for_agent(&self, agent: usize) -> impl Iterator<Item = &BroadcastRecord> {
        self.by_agent
            .get(agent)
            .into_iter()
            .flatten()
            .map(|&k| &self.records[k])
    }

    /// Latest broadcast of `agent` at or before `t`.
    pub fn latest(&self, agent: usize, t: f64) -> Option<&BroadcastRecord> {
        let idx = self.by_agent.get(agent)?;
        let k = idx.partition_point(|&r| self.records[r].time <= t);
        k.checked_sub(1).map(|k| &self.records[idx[k]])
    }
}

/// State of `agent` at `t` as a neighbor would compute it: the last
/// broadcast state carried forward with the last broadcast input.
pub fn reconstruct_neighbor_state(log: &BroadcastLog, agent: usize, t: f64) -> Option<f64> {
    log.latest(agent, t)
        .map(|r| r.state + r.control * (t - r.time))
}

/// One executed update instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateEvent {
    pub time: f64,
    pub agent: usize,
    /// 1-based update count of this agent (`k` in `t^k_i`).
    pub k: usize,
    pub z: f64,
    pub plan: UpdatePlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub graph: Graph,
    pub x0: Vec<f64>,
    pub params: ProtocolParams,
    pub horizon: f64,
    pub trajectories: Vec<PiecewiseLinear>,
    pub events: Vec<UpdateEvent>,
    pub broadcasts: BroadcastLog,
}

/// Per-agent and aggregate update counts over `[0, window_end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunicationCost {
    pub per_agent: Vec<usize>,
    pub total: usize,
}

impl SimulationResult {
    pub fn agent_count(&self) -> usize {
        self.x0.len()
    }

    pub fn state_at(&self, agent: usize, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        self.trajectories[agent].value_at(t)
    }

    pub fn events_of(&self, agent: usize) -> impl Iterator<Item = &UpdateEvent> {
        self.events.iter().filter(move |e| e.agent == agent)
    }

    pub fn event_times(&self, agent: usize) -> Vec<f64> {
        self.events_of(agent).map(|e| e.time).collect()
    }

    /// Update instants per agent inside the half-open window
    /// `[0, window_end)`.
    pub fn communication_cost(&self, window_end: f64) -> CommunicationCost {
        let mut per_agent = vec![0; self.agent_count()];
        for e in &self.events {
            if strictly_before(e.time, window_end) {
                per_agent[e.agent] += 1;
            }
        }
        let total = per_agent.iter().sum();
        CommunicationCost { per_agent, total }
    }
}

/// `2 gamma T*(x0)`, the deadline the protocol guarantees. Falls back to one
/// second when all initial states coincide.
pub fn default_horizon(x0: &[f64], params: &ProtocolParams) -> f64 {
    let h = 2.0 * params.gamma() * t_star(x0, params.beta());
    if h > 0.0 {
        h
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    time: f64,
    agent: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    // Reversed so that `BinaryHeap` pops the earliest time, then the lowest
    // agent index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.agent.cmp(&self.agent))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Runs the protocol on `g` from `x0` until `horizon`.
///
/// Update instants at or after the horizon are not executed; every
/// trajectory is closed exactly at the horizon.
pub fn run(
    g: &Graph,
    x0: &[f64],
    params: ProtocolParams,
    horizon: f64,
) -> Result<SimulationResult> {
    let n = g.node_count();
    if x0.len() != n {
        return Err(Error::StateLength {
            expected: n,
            got: x0.len(),
        });
    }
    if let Some(i) = x0.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteState(i));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidHorizon(horizon));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }

    let mut trajectories: Vec<PiecewiseLinear> = x0
        .iter()
        .map(|&x| PiecewiseLinear::start(0.0, x, 0.0))
        .collect();
    let mut counts = vec![0usize; n];
    let mut events = Vec::new();
    let mut broadcasts = BroadcastLog::new(n);
    let mut queue: BinaryHeap<Pending> = (0..n).map(|agent| Pending { time: 0.0, agent }).collect();

    while let Some(Pending { time, agent }) = queue.pop() {
        if !strictly_before(time, horizon) {
            continue;
        }
        let xi = trajectories[agent].extrapolate(time);
        let z: f64 = g
            .neighbors(agent)
            .iter()
            .map(|&j| xi - trajectories[j].extrapolate(time))
            .sum();
        let plan = plan_update(z, g.degree(agent), &params);
        assert!(
            plan.duration > 0.0 && plan.duration.is_finite(),
            "update plan must make progress"
        );

        let traj = &mut trajectories[agent];
        let state = if counts[agent] == 0 {
            traj.slopes[0] = plan.control;
            traj.values[0]
        } else {
            traj.push(time, plan.control)
        };
        counts[agent] += 1;
        events.push(UpdateEvent {
            time,
            agent,
            k: counts[agent],
            z,
            plan,
        });
        broadcasts.push(BroadcastRecord {
            agent,
            time,
            state,
            control: plan.control,
        });
        queue.push(Pending {
            time: time + plan.duration,
            agent,
        });
    }

    for traj in &mut trajectories {
        traj.close(horizon);
    }

    Ok(SimulationResult {
        graph: g.clone(),
        x0: x0.to_vec(),
        params,
        horizon,
        trajectories,
        events,
        broadcasts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, beta: f64, gamma: f64) -> ProtocolParams {
        ProtocolParams::new(alpha, beta, gamma).unwrap()
    }

    fn fig6_run(gamma: f64) -> SimulationResult {
        let x0 = [7.0, 2.0, 4.0, 3.0, 1.0, 5.0];
        let p = params(0.6, 1.0, gamma);
        run(&Graph::fig6(), &x0, p, default_horizon(&x0, &p)).unwrap()
    }

    #[test]
    fn everyone_updates_at_zero() {
        let r = fig6_run(1.0);
        for i in 0..6 {
            let first = r.events_of(i).next().unwrap();
            assert_eq!(first.time, 0.0);
            assert_eq!(first.k, 1);
        }
    }

    #[test]
    fn agent_three_period() {
        let r = fig6_run(1.0);
        let times = r.event_times(2);
        assert_eq!(r.events_of(2).next().unwrap().z, 0.0);
        for (k, t) in times.iter().take(5).enumerate() {
            assert!((t - 0.2 * k as f64).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn reference_costs() {
        let r = fig6_run(1.0);
        let cost = r.communication_cost(6.0);
        assert_eq!(cost.per_agent, vec![8, 9, 30, 30, 9, 9]);
        assert_eq!(cost.total, 95);
        assert_eq!(r.communication_cost(0.0).total, 0);
        let first: Vec<f64> = r.event_times(0);
        assert!((first[1] - 1.8).abs() < 1e-12);
        assert_eq!(first.len(), 8);
        assert!(first[7] < 6.0);
    }

    #[test]
    fn consecutive_events_follow_plan() {
        let r = fig6_run(1.0);
        for i in 0..6 {
            let ev: Vec<_> = r.events_of(i).collect();
            for w in ev.windows(2) {
                assert!((w[1].time - w[0].time - w[0].plan.duration).abs() < 1e-12);
                assert_eq!(w[1].k, w[0].k + 1);
            }
        }
    }

    #[test]
    fn equal_states_stay_put() {
        let g = Graph::fig6();
        let x0 = [1.5; 6];
        let r = run(&g, &x0, params(0.6, 1.0, 2.0), 4.0).unwrap();
        for e in &r.events {
            assert_eq!(e.z, 0.0);
            assert_eq!(e.plan.control, 0.0);
            let period = 0.6 / (0.5 * g.degree(e.agent) as f64);
            assert!((e.plan.duration - period).abs() < 1e-12);
        }
        for i in 0..6 {
            assert_eq!(r.trajectories[i].min_max(), (1.5, 1.5));
        }
    }

    #[test]
    fn single_edge_first_plan() {
        let g = Graph::path(2).unwrap();
        let r = run(&g, &[0.0, 5.0], params(3.0, 1.0, 1.0), 5.0).unwrap();
        let first = r.events_of(0).next().unwrap();
        assert_eq!(first.z, -5.0);
        assert_eq!(first.plan.duration, 4.0);
        assert_eq!(first.plan.control, 1.0);
        assert_eq!(r.state_at(0, 0.0).unwrap(), 0.0);
        assert_eq!(r.state_at(0, 2.0).unwrap(), 2.0);
        assert!(r.state_at(0, 5.5).is_err());
        assert!(r.state_at(0, -1.0).is_err());
    }

    #[test]
    fn state_at_breakpoints_matches_stored_values() {
        let r = fig6_run(1.0);
        for tr in &r.trajectories {
            for (b, v) in tr.breakpoints.iter().zip(&tr.values) {
                assert_eq!(tr.value_at(*b).unwrap(), *v);
            }
        }
        assert_eq!(r.state_at(4, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn reconstruction_examples() {
        let mut log = BroadcastLog::new(2);
        log.push(BroadcastRecord {
            agent: 1,
            time: 0.0,
            state: 5.0,
            control: -1.0,
        });
        assert!((reconstruct_neighbor_state(&log, 1, 1.3).unwrap() - 3.7).abs() < 1e-15);
        assert_eq!(reconstruct_neighbor_state(&log, 1, 0.0), Some(5.0));
        assert_eq!(reconstruct_neighbor_state(&log, 0, 1.0), None);

        let mut log = BroadcastLog::new(1);
        log.push(BroadcastRecord {
            agent: 0,
            time: 0.0,
            state: 0.0,
            control: 1.0,
        });
        log.push(BroadcastRecord {
            agent: 0,
            time: 4.0,
            state: 4.0,
            control: 0.0,
        });
        assert_eq!(reconstruct_neighbor_state(&log, 0, 5.0), Some(4.0));
        assert_eq!(reconstruct_neighbor_state(&log, 0, 4.0), Some(4.0));
        assert_eq!(reconstruct_neighbor_state(&log, 0, 3.0), Some(3.0));
    }

    #[test]
    fn broadcasts_mirror_events() {
        let r = fig6_run(5.0);
        assert_eq!(r.broadcasts.records().len(), r.events.len());
        for (b, e) in r.broadcasts.records().iter().zip(&r.events) {
            assert_eq!(b.agent, e.agent);
            assert_eq!(b.time, e.time);
            assert_eq!(b.control, e.plan.control);
            assert_eq!(b.state, r.state_at(e.agent, e.time).unwrap());
        }
        for i in 0..6 {
            let times: Vec<f64> = r.broadcasts.for_agent(i).map(|b| b.time).collect();
            assert!(times.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Graph::fig6();
        let p = params(0.6, 1.0, 1.0);
        assert_eq!(
            run(&g, &[1.0; 5], p, 1.0),
            Err(Error::StateLength {
                expected: 6,
                got: 5
            })
        );
        let mut x = [0.0; 6];
        x[3] = f64::NAN;
        assert_eq!(run(&g, &x, p, 1.0), Err(Error::NonFiniteState(3)));
        assert_eq!(run(&g, &[0.0; 6], p, 0.0), Err(Error::InvalidHorizon(0.0)));
        let split = Graph::from_edges(4, &[(1, 2), (3, 4)]).unwrap();
        assert_eq!(run(&split, &[0.0; 4], p, 1.0), Err(Error::Disconnected));
    }

    #[test]
    fn deterministic() {
        assert_eq!(fig6_run(1.0), fig6_run(1.0));
    }

    #[test]
    fn window_edge_tolerance() {
        assert!(strictly_before(5.8, 6.0));
        assert!(!strictly_before(6.0, 6.0));
        assert!(!strictly_before(29.999999999999996, 30.0));
        assert!(!strictly_before(6.000000000000003, 6.0));
    }
}
