//! Exact piecewise-linear functions of time.

use crate::error::{Error, Result};

/// Continuous piecewise-linear function on `[breakpoints[0], breakpoints[last]]`.
///
/// Segment `k` covers `[breakpoints[k], breakpoints[k + 1])` with constant
/// slope `slopes[k]`. While a trajectory is still being built it may carry
/// one more slope than closed segments (the open last segment).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PiecewiseLinear {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl PiecewiseLinear {
    /// Starts an open trajectory at `(t0, x0)` moving with `slope`.
    pub fn start(t0: f64, x0: f64, slope: f64) -> Self {
        Self {
            breakpoints: vec![t0],
            values: vec![x0],
            slopes: vec![slope],
        }
    }

    /// Value at `t` obtained by extending the open last segment.
    pub fn extrapolate(&self, t: f64) -> f64 {
        let k = self.breakpoints.len() - 1;
        self.values[k] + self.slopes[k] * (t - self.breakpoints[k])
    }

    /// Closes the open segment at `t` and opens a new one with `slope`.
    /// Returns the value at `t`.
    pub fn push(&mut self, t: f64, slope: f64) -> f64 {
        let value = self.extrapolate(t);
        self.breakpoints.push(t);
        self.values.push(value);
        self.slopes.push(slope);
        value
    }

    /// Closes the open segment at `t` without starting another.
    pub fn close(&mut self, t: f64) {
        debug_assert_eq!(self.slopes.len(), self.breakpoints.len());
        let value = self.extrapolate(t);
        self.breakpoints.push(t);
        self.values.push(value);
    }

    pub fn start_time(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.breakpoints.last().expect("non-empty trajectory")
    }

    /// Number of closed segments.
    pub fn segment_count(&self) -> usize {
        self.breakpoints
            .len()
            .saturating_sub(1)
            .min(self.slopes.len())
    }

    /// Index of the segment whose half-open span contains `t`; the final
    /// breakpoint maps to the last segment.
    pub fn segment_index(&self, t: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        k.saturating_sub(1).min(self.slopes.len().saturating_sub(1))
    }

    /// Slope in effect just after `t`.
    pub fn slope_at(&self, t: f64) -> f64 {
        self.slopes[self.segment_index(t)]
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        let (start, end) = (self.start_time(), self.end_time());
        if !(t >= start && t <= end) {
            return Err(Error::TimeOutOfRange { t, horizon: end });
        }
        let k = self.breakpoints.partition_point(|&b| b <= t) - 1;
        if self.breakpoints[k] == t || k >= self.slopes.len() {
            return Ok(self.values[k]);
        }
        Ok(self.values[k] + self.slopes[k] * (t - self.breakpoints[k]))
    }

    /// Extremes over the whole trajectory; linear segments attain them at
    /// breakpoints.
    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}
