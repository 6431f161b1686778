//! Hub-plus-clique instances whose consensus time approaches `2 T*`.
//!
//! Node 1 starts at 0 and sees `r` members of an `(n - 1)`-clique that all
//! start at 5, with `alpha = 3` and `beta = 1`. A large clique pins its
//! members near 5 almost immediately, so node 1 has to travel nearly the
//! full distance at unit speed before its own disagreement settles.
//! The sizing formulas below are tied to these constants.

use crate::analysis::consensus_time;
use crate::engine::run;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::protocol::{t_star, ProtocolParams};

pub const ALPHA: f64 = 3.0;
pub const BETA: f64 = 1.0;
pub const LOW: f64 = 0.0;
pub const HIGH: f64 = 5.0;

/// Clique size that keeps every clique member within `mu` of 5 after time
/// `mu`, for a hub of degree `r`.
///
/// `max{8, 1 + ceil(4/m), ceil(5/(mu - m)), ceil(1 + 16r/(5r+3)), 3r - 7} + 1`
/// with `m = mu / 2`.
pub fn n_mu_r(mu: f64, r: usize) -> usize {
    let half = mu / 2.0;
    let r_f = r as f64;
    let n_mu1 = 1 + (4.0 / half).ceil() as i64;
    let n_mu2 = (5.0 / (mu - half)).ceil() as i64;
    let n_r1 = (1.0 + 16.0 * r_f / (5.0 * r_f + 3.0)).ceil() as i64;
    let n_r2 = 3 * r as i64 - 7;
    let largest = [8, n_mu1, n_mu2, n_r1, n_r2].into_iter().max().unwrap_or(8);
    (largest + 1) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseInstance {
    pub epsilon: f64,
    /// Degree of node 1.
    pub r: usize,
    pub n: usize,
    pub graph: Graph,
    pub x0: Vec<f64>,
    pub params: ProtocolParams,
    /// `2 T* - epsilon`.
    pub expected_lower: f64,
    /// `2 T*`.
    pub expected_upper: f64,
}

/// Instance whose consensus time is guaranteed to lie in
/// `[2 T* - epsilon, 2 T*] = [5 - epsilon, 5]`.
pub fn build_instance(epsilon: f64) -> Result<WorstCaseInstance> {
    if !(epsilon > 0.0 && epsilon < HIGH) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let r =
        ((2.0 * ALPHA / epsilon).ceil() as usize).max((ALPHA / (HIGH - epsilon)).ceil() as usize);
    let n = n_mu_r(epsilon / 2.0, r);
    let graph = Graph::worst_case(n, r)?;
    let mut x0 = vec![HIGH; n];
    x0[0] = LOW;
    let params = ProtocolParams::new(ALPHA, BETA, 1.0)?;
    let two_t_star = 2.0 * t_star(&x0, BETA);
    Ok(WorstCaseInstance {
        epsilon,
        r,
        n,
        graph,
        x0,
        params,
        expected_lower: two_t_star - epsilon,
        expected_upper: two_t_star,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tightness {
    /// `None` if consensus was not reached by the horizon.
    pub measured: Option<f64>,
    pub within_bracket: bool,
}

/// Extra simulated time past `2 T*`, so consensus at the bound is visible.
pub const HORIZON_MARGIN: f64 = 1.0;

/// Simulates the instance and checks that its consensus time lies in
/// `[expected_lower, expected_upper + 1e-6]`.
pub fn verify_tightness(instance: &WorstCaseInstance) -> Result<Tightness> {
    let horizon = instance.expected_upper + HORIZON_MARGIN;
    let result = run(&instance.graph, &instance.x0, instance.params, horizon)?;
    let measured = consensus_time(&result).consensus_time;
    let within_bracket = measured
        .is_some_and(|t| t >= instance.expected_lower && t <= instance.expected_upper + 1e-6);
    Ok(Tightness {
        measured,
        within_bracket,
    })
}
