//! Size-aware scaling of raw set-similarity scores.
//!
//! Raw totals grow with the number of documented codes, so a large pair
//! of barely-related patients can outscore a small pair of near-identical
//! ones. The scale term divides the raw score by the smaller set size
//! plus a logarithmic penalty on the size difference, rewarding both
//! high per-code similarity and balanced set sizes.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaleError {
    #[error("set size must be at least 1")]
    ZeroSetSize,
}

/// Base of the logarithm in the size-difference penalty.
///
/// Unlike the logs inside the concept measures (where the base cancels
/// out of every rank-based result), this one changes scaled values and
/// correlations, so it is explicit configuration rather than a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LogBase {
    #[default]
    E,
    Two,
    Ten,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown log base {0:?} (expected `e`, `2`, or `10`)")]
pub struct ParseLogBaseError(pub String);

impl LogBase {
    pub fn name(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
        }
    }

    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
            LogBase::Ten => x.log10(),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LogBase {
    type Err = ParseLogBaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            "10" => Ok(LogBase::Ten),
            other => Err(ParseLogBaseError(other.to_owned())),
        }
    }
}

/// A raw score together with its size-scaled form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledScore {
    pub raw: f64,
    pub scaled: f64,
    pub size_a: usize,
    pub size_b: usize,
}

/// Divide `raw` by `min(size_a, size_b) + log(1 + |size_a − size_b|)`.
pub fn apply_scale(
    raw: f64,
    size_a: usize,
    size_b: usize,
    base: LogBase,
) -> Result<ScaledScore, ScaleError> {
    if size_a == 0 || size_b == 0 {
        return Err(ScaleError::ZeroSetSize);
    }
    let min = size_a.min(size_b) as f64;
    let diff = size_a.abs_diff(size_b) as f64;
    let scaled = raw / (min + base.log(1.0 + diff));
    Ok(ScaledScore { raw, scaled, size_a, size_b })
}
