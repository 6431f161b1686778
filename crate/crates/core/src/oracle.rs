//! Brute-force max-min search for the longest safe inter-update delay.
//!
//! An agent that updates now with disagreement `z0` must pick an input and a
//! next-update delay without knowing what its neighbors will do. The
//! neighbors only enter `z` through their aggregate input, which can be
//! anything in `[-n b, n b]` for `n` neighbors and effective bound `b`:
//!
//! ```text
//! z(t) = z0 + n * u_ego * t - integral of aggregate neighbor input
//! ```
//!
//! The oracle lets an adversary choose that aggregate as a piecewise-constant
//! signal (`pieces` equal sub-intervals, `grid` evenly spaced levels that
//! include both rails) and bisects on the delay. It never consults the
//! closed-form update rule, so it can be used to check it.

use crate::error::{Error, Result};
use crate::protocol::ProtocolParams;

/// Bisection stops once the bracket is this narrow.
pub const BISECTION_TOL: f64 = 1e-6;

/// Which constraint the delay must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Constraint {
    /// `|z(t)| <= alpha` throughout.
    Band,
    /// `z(t) <= alpha` throughout (agent starts below the band).
    Ceiling,
    /// `z(t) >= -alpha` throughout (agent starts above the band).
    Floor,
}

struct Game {
    z0: f64,
    degree: f64,
    alpha: f64,
    levels: Vec<f64>,
    pieces: usize,
    constraint: Constraint,
}

impl Game {
    fn violates(&self, z: f64) -> bool {
        match self.constraint {
            Constraint::Band => z.abs() > self.alpha,
            Constraint::Ceiling => z > self.alpha,
            Constraint::Floor => z < -self.alpha,
        }
    }

    /// True when no adversary sequence breaks the constraint over
    /// `[0, duration]` for the ego input `ego`.
    fn survives(&self, ego: f64, duration: f64) -> bool {
        if self.violates(self.z0) {
            return false;
        }
        let dt = duration / self.pieces as f64;
        self.survives_from(self.z0, ego, dt, self.pieces)
    }

    // z is linear on each piece, so checking piece ends is enough.
    fn survives_from(&self, z: f64, ego: f64, dt: f64, remaining: usize) -> bool {
        if remaining == 0 {
            return true;
        }
        self.levels.iter().all(|&aggregate| {
            let next = z + (self.degree * ego - aggregate) * dt;
            !self.violates(next) && self.survives_from(next, ego, dt, remaining - 1)
        })
    }

    /// Longest delay the ego input `ego` survives, to [`BISECTION_TOL`].
    fn longest_safe(&self, ego: f64) -> f64 {
        if !self.survives(ego, 0.0) {
            return 0.0;
        }
        let mut hi = 1.0;
        let mut grow = 0;
        while self.survives(ego, hi) {
            hi *= 2.0;
            grow += 1;
            if grow > 200 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if self.survives(ego, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn levels(bound: f64, grid: usize) -> Vec<f64> {
    (0..grid)
        .map(|k| -bound + 2.0 * bound * k as f64 / (grid - 1) as f64)
        .collect()
}

/// Max-min estimate of the safe inter-update delay for an agent with
/// `degree` neighbors and current disagreement `z0`.
///
/// Inside the band the ego input is searched over `grid` evenly spaced
/// constants in `[-b, b]`; outside it is pinned to the saturated input
/// pointing toward the band.
pub fn adversarial_duration_oracle(
    z0: f64,
    degree: usize,
    params: &ProtocolParams,
    pieces: usize,
    grid: usize,
) -> Result<f64> {
    if pieces < 1 || grid < 3 {
        return Err(Error::InvalidDiscretization { pieces, grid });
    }
    let alpha = params.alpha();
    let b = params.effective_beta();
    let n = degree as f64;
    let (constraint, egos) = if z0.abs() <= alpha {
        (Constraint::Band, levels(b, grid))
    } else if z0 < 0.0 {
        (Constraint::Ceiling, vec![b])
    } else {
        (Constraint::Floor, vec![-b])
    };
    let game = Game {
        z0,
        degree: n,
        alpha,
        levels: levels(n * b, grid),
        pieces,
        constraint,
    };
    Ok(egos
        .into_iter()
        .map(|ego| game.longest_safe(ego))
        .fold(0.0, f64::max))
}
