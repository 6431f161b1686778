//! Closed-form control laws: the self-triggered update rule, its
//! time-stretched variant, and the continuous-communication reference time.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Consensus bound `alpha`, input bound `beta` and time-stretch `gamma`.
///
/// The protocol runs with the reduced input bound `beta / gamma`;
/// `gamma = 1` is the unstretched protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl ProtocolParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be > 0 (got {alpha})"
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "beta must be > 0 (got {beta})"
            )));
        }
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "gamma must be >= 1 (got {gamma})"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Effective input bound `beta / gamma`.
    pub fn effective_beta(&self) -> f64 {
        self.beta / self.gamma
    }

    /// Same bounds with a different stretch factor.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, gamma)
    }
}

/// Next-update delay and the constant input held until then.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdatePlan {
    pub duration: f64,
    pub control: f64,
}

/// `z_i = sum over neighbors j of (x_i - x_j)`, for node position `i`.
pub fn local_disagreement(states: &[f64], g: &Graph, i: usize) -> f64 {
    let xi = states[i];
    g.neighbors(i).iter().map(|&j| xi - states[j]).sum()
}

/// Minimum consensus time with continuous communication:
/// `(max x0 - min x0) / (2 beta)`.
pub fn t_star(x0: &[f64], beta: f64) -> f64 {
    let (lo, hi) = x0
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if x0.is_empty() {
        return 0.0;
    }
    (hi - lo) / (2.0 * beta)
}

/// Bang-bang time-optimal input `-beta * sign(z)`, with `sign(0) = 0`.
pub fn time_optimal_control(z: f64, beta: f64) -> f64 {
    if z > 0.0 {
        -beta
    } else if z < 0.0 {
        beta
    } else {
        0.0
    }
}

/// Self-triggered update rule for an agent with `degree` neighbors that
/// currently sees local disagreement `z`.
///
/// Inside the band (`|z| <= alpha`) the agent steers proportionally so
/// that it lands on its neighbors' average after `alpha / (b n)`; outside,
/// it saturates toward the band and waits `(|z| + alpha) / (2 b n)`.
/// `b` is the effective bound `beta / gamma`.
pub fn plan_update(z: f64, degree: usize, params: &ProtocolParams) -> UpdatePlan {
    debug_assert!(degree >= 1);
    let alpha = params.alpha;
    let b = params.effective_beta();
    let n = degree as f64;
    if z.abs() <= alpha {
        UpdatePlan {
            duration: alpha / (b * n),
            control: -(z / alpha) * b,
        }
    } else {
        UpdatePlan {
            duration: (z.abs() + alpha) / (2.0 * b * n),
            control: time_optimal_control(z, b),
        }
    }
}
