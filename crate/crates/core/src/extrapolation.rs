//! Step-count extrapolation of two finite-`M` estimates.
//!
//! A scheme with error `C/M` (or `C/M^2`) at step count `M` admits the
//! classic two-point limit estimate: combine the runs at `M1 < M2` so the
//! leading error term cancels. The formulas are applied unconditionally;
//! when the two estimates straddle the limit the accuracy of the result is
//! uncharacterized.

use crate::error::{Error, Result};

/// Two estimates of the same statistic at different step counts, produced by
/// the same scheme, model, order, and horizon.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct EstimatePair {
    pub steps1: usize,
    pub estimate1: f64,
    pub steps2: usize,
    pub estimate2: f64,
}

impl EstimatePair {
    pub fn new(steps1: usize, estimate1: f64, steps2: usize, estimate2: f64) -> Self {
        EstimatePair {
            steps1,
            estimate1,
            steps2,
            estimate2,
        }
    }
}

/// Cancels a pure `C/M` error term:
/// `m2 - M1 (m1 - m2) / (M2 - M1)`.
pub fn extrapolate1(pair: &EstimatePair) -> Result<f64> {
    if pair.steps1 == pair.steps2 {
        return Err(Error::EqualStepCounts);
    }
    let m1 = pair.steps1 as f64;
    let m2 = pair.steps2 as f64;
    Ok(pair.estimate2 - m1 * (pair.estimate1 - pair.estimate2) / (m2 - m1))
}

/// Cancels a pure `C/M^2` error term:
/// `m2 - M1^2 (m1 - m2) / (M2^2 - M1^2)`.
pub fn extrapolate2(pair: &EstimatePair) -> Result<f64> {
    if pair.steps1 == pair.steps2 {
        return Err(Error::EqualStepCounts);
    }
    let m1 = pair.steps1 as f64;
    let m2 = pair.steps2 as f64;
    Ok(pair.estimate2 - m1 * m1 * (pair.estimate1 - pair.estimate2) / (m2 * m2 - m1 * m1))
}
