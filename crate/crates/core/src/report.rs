/// Outcome of one inequality check: `lhs <= constant * rhs`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CheckReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; 0 when both vanish, infinite when only `rhs` does.
    pub ratio: f64,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(lhs: f64, rhs: f64, bound: f64) -> Self {
        let ratio = ratio(lhs, rhs);
        CheckReport { lhs, rhs, ratio, passed: ratio <= bound }
    }

    /// Report without a pass threshold (the witness is the output).
    pub fn witness(lhs: f64, rhs: f64) -> Self {
        let ratio = ratio(lhs, rhs);
        CheckReport { lhs, rhs, ratio, passed: ratio.is_finite() }
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
