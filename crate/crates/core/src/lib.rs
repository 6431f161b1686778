//! Simulation and analysis of a self-triggered consensus protocol that
//! minimizes the number of communication instants.
//!
//! Agents are single integrators `x' = u` with `|u| <= beta` on a connected
//! undirected graph. Each agent decides, at its own update instants, both
//! its next input and when to talk to its neighbors again. The crate runs
//! that protocol exactly (all trajectories are piecewise linear) and turns
//! its guarantees into executable checks.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod export;
pub mod graph;
pub mod oracle;
pub mod protocol;
pub mod trajectory;
pub mod worstcase;

pub use analysis::{
    check_invariants, consensus_time, disagreement_trajectory, ConsensusReport,
    DisagreementTrajectory, InvariantReport,
};
pub use engine::{
    default_horizon, reconstruct_neighbor_state, run, BroadcastLog, BroadcastRecord,
    CommunicationCost, SimulationResult, UpdateEvent,
};
pub use error::{Error, Result};
pub use graph::Graph;
pub use oracle::adversarial_duration_oracle;
pub use protocol::{
    local_disagreement, plan_update, t_star, time_optimal_control, ProtocolParams, UpdatePlan,
};
pub use trajectory::PiecewiseLinear;
pub use worstcase::{build_instance, n_mu_r, verify_tightness, Tightness, WorstCaseInstance};
