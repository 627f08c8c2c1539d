//! Certainty intervals.
//!
//! A `Certainty` is a closed subinterval of [0, 1]. The lower bound measures
//! how strongly the evidence confirms a proposition, the upper bound how
//! strongly it fails to refute it. Total ignorance is `[0, 1]`, certain truth
//! is `[1, 1]`, and the gap between the bounds measures ignorance rather than
//! graded belief.

use crate::error::EngineError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certainty {
    lower: f64,
    upper: f64,
}

impl Certainty {
    pub const UNKNOWN: Certainty = Certainty { lower: 0.0, upper: 1.0 };
    pub const CERTAIN: Certainty = Certainty { lower: 1.0, upper: 1.0 };

    /// Build an interval, rejecting NaN, out-of-range bounds, and crossed bounds.
    pub fn new(lower: f64, upper: f64) -> Result<Certainty, EngineError> {
        if !(0.0..=1.0).contains(&lower) || !(0.0..=1.0).contains(&upper) {
            return Err(EngineError::MalformedCertainty(format!(
                "bounds [{lower}, {upper}] must lie in [0, 1]"
            )));
        }
        if lower > upper {
            return Err(EngineError::MalformedCertainty(format!(
                "lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(Certainty { lower, upper })
    }

    /// A bare degree confirms to `d` and says nothing about refutation.
    pub fn from_degree(d: f64) -> Result<Certainty, EngineError> {
        Certainty::new(d, 1.0)
    }

    /// A point interval `[d, d]`.
    pub fn point(d: f64) -> Result<Certainty, EngineError> {
        Certainty::new(d, d)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Width of the interval: 0 for precise belief, 1 for total ignorance.
    pub fn ignorance(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_certain(&self) -> bool {
        self.lower == 1.0 && self.upper == 1.0
    }

    pub fn is_vacuous(&self) -> bool {
        self.lower == 0.0 && self.upper == 1.0
    }
}

impl std::fmt::Display for Certainty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}
