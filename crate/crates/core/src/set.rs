//! Set-level similarity: aggregating concept scores or raw code sets
//! into one number per pair of patients.
//!
//! Three measures consume a matrix of concept-level scores (mean,
//! optimal bipartite matching, hierarchical closest-counterpart
//! distance); four are plain intersection coefficients over the code
//! strings themselves.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::assignment::{assignment_optimum, kahan_sum, OptimizeMode};
use crate::concept::Direction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetSimError {
    /// A score matrix with zero rows or zero columns.
    #[error("empty matrix")]
    EmptyMatrix,
    /// NaN or infinite weight in an assignment matrix.
    #[error("non-finite weight {value} at ({row}, {col})")]
    NonFiniteWeight { row: usize, col: usize, value: f64 },
    /// Hierarchical aggregation expects normalized distances.
    #[error("distance {value} at ({row}, {col}) outside [0, 1]")]
    OutOfRangeDistance { row: usize, col: usize, value: f64 },
    /// Coefficient measures are undefined for empty code sets.
    #[error("empty code set")]
    EmptySet,
}

/// The seven set-level measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetSimMeasure {
    MeanCs,
    BipartiteMatching,
    HierarchicalDistance,
    Overlap,
    Cosine,
    Dice,
    Jaccard,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown set measure {0:?} (expected one of `meancs`, `mbm`, `hierdist`, `overlap`, `cosine`, `dice`, `jaccard`)")]
pub struct ParseSetSimError(pub String);

impl SetSimMeasure {
    pub const ALL: [SetSimMeasure; 7] = [
        SetSimMeasure::MeanCs,
        SetSimMeasure::BipartiteMatching,
        SetSimMeasure::HierarchicalDistance,
        SetSimMeasure::Overlap,
        SetSimMeasure::Cosine,
        SetSimMeasure::Dice,
        SetSimMeasure::Jaccard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SetSimMeasure::MeanCs => "meancs",
            SetSimMeasure::BipartiteMatching => "mbm",
            SetSimMeasure::HierarchicalDistance => "hierdist",
            SetSimMeasure::Overlap => "overlap",
            SetSimMeasure::Cosine => "cosine",
            SetSimMeasure::Dice => "dice",
            SetSimMeasure::Jaccard => "jaccard",
        }
    }

    /// Semantic measures consume concept-level scores; the coefficient
    /// measures compare the code strings directly.
    pub fn semantic(self) -> bool {
        matches!(
            self,
            SetSimMeasure::MeanCs
                | SetSimMeasure::BipartiteMatching
                | SetSimMeasure::HierarchicalDistance
        )
    }
}

impl fmt::Display for SetSimMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SetSimMeasure {
    type Err = ParseSetSimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "meancs" => Ok(SetSimMeasure::MeanCs),
            "mbm" => Ok(SetSimMeasure::BipartiteMatching),
            "hierdist" => Ok(SetSimMeasure::HierarchicalDistance),
            "overlap" => Ok(SetSimMeasure::Overlap),
            "cosine" => Ok(SetSimMeasure::Cosine),
            "dice" => Ok(SetSimMeasure::Dice),
            "jaccard" => Ok(SetSimMeasure::Jaccard),
            other => Err(ParseSetSimError(other.to_owned())),
        }
    }
}

/// Unscaled set similarity plus the set sizes the scale term will need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetScore {
    pub raw: f64,
    pub size_a: usize,
    pub size_b: usize,
}

fn matrix_dims(csm: &[Vec<f64>]) -> Result<(usize, usize), SetSimError> {
    let m = csm.len();
    let n = csm.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(SetSimError::EmptyMatrix);
    }
    assert!(csm.iter().all(|row| row.len() == n), "ragged score matrix");
    Ok((m, n))
}

/// Mean-style aggregation: half the grand sum over the combined set size.
///
/// The constant is part of the measure's published definition, which is
/// why identical singleton sets score 0.25 rather than 1 — the formula
/// itself is the object under study, so it is not "repaired" here.
pub fn setsim_mean_cs(csm: &[Vec<f64>]) -> Result<SetScore, SetSimError> {
    let (m, n) = matrix_dims(csm)?;
    let total = kahan_sum(csm.iter().flatten().copied());
    Ok(SetScore {
        raw: 0.5 * total / (m + n) as f64,
        size_a: m,
        size_b: n,
    })
}

/// Optimal bipartite matching total: maximized for similarity scores,
/// minimized for distance scores.
pub fn setsim_bipartite(
    csm: &[Vec<f64>],
    direction: Direction,
) -> Result<SetScore, SetSimError> {
    let (m, n) = matrix_dims(csm)?;
    let mode = match direction {
        Direction::Similarity => OptimizeMode::Maximize,
        Direction::Distance => OptimizeMode::Minimize,
    };
    Ok(SetScore {
        raw: assignment_optimum(csm, mode)?,
        size_a: m,
        size_b: n,
    })
}

/// Map a batch of similarity scores onto normalized distances in [0, 1]:
/// the batch maximum becomes distance 0, the minimum distance 1. A
/// constant batch maps to all-zero distances.
pub fn to_distance(values: &[f64]) -> Vec<f64> {
    let Some(&first) = values.first() else {
        return Vec::new();
    };
    let (min, max) = values.iter().fold((first, first), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if max == min {
        return vec![0.0; values.len()];
    }
    let span = max - min;
    values.iter().map(|&v| 1.0 - (v - min) / span).collect()
}

/// Normalize a batch of distance scores onto [0, 1] without flipping
/// orientation; the batch minimum becomes 0, the maximum 1. A constant
/// batch maps to all zeros.
pub fn normalize_distance(values: &[f64]) -> Vec<f64> {
    let Some(&first) = values.first() else {
        return Vec::new();
    };
    let (min, max) = values.iter().fold((first, first), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if max == min {
        return vec![0.0; values.len()];
    }
    let span = max - min;
    values.iter().map(|&v| (v - min) / span).collect()
}

/// Symmetric closest-counterpart aggregation over a normalized distance
/// matrix: average the per-row and per-column minima, then report the
/// complement so the result lives on the similarity scale.
pub fn setsim_hierarchical(distances: &[Vec<f64>]) -> Result<SetScore, SetSimError> {
    let (m, n) = matrix_dims(distances)?;
    for (i, row) in distances.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&d) {
                return Err(SetSimError::OutOfRangeDistance { row: i, col: j, value: d });
            }
        }
    }
    let row_mins = (0..m).map(|i| distances[i].iter().copied().fold(f64::INFINITY, f64::min));
    let col_mins = (0..n).map(|j| {
        (0..m)
            .map(|i| distances[i][j])
            .fold(f64::INFINITY, f64::min)
    });
    let hd = kahan_sum(row_mins.chain(col_mins)) / (m + n) as f64;
    Ok(SetScore {
        raw: 1.0 - hd,
        size_a: m,
        size_b: n,
    })
}

/// Exact-intersection coefficient over two code sets. Inputs are
/// de-duplicated; `kind` must be one of the four non-semantic measures.
pub fn setsim_coefficient<S: AsRef<str>>(
    kind: SetSimMeasure,
    a: &[S],
    b: &[S],
) -> Result<SetScore, SetSimError> {
    assert!(!kind.semantic(), "coefficient measure expected, got {kind}");
    let set_a: HashSet<&str> = a.iter().map(AsRef::as_ref).collect();
    let set_b: HashSet<&str> = b.iter().map(AsRef::as_ref).collect();
    if set_a.is_empty() || set_b.is_empty() {
        return Err(SetSimError::EmptySet);
    }
    let na = set_a.len() as f64;
    let nb = set_b.len() as f64;
    let inter = set_a.intersection(&set_b).count() as f64;
    let raw = match kind {
        SetSimMeasure::Overlap => inter / na.min(nb),
        SetSimMeasure::Cosine => inter / (na * nb).sqrt(),
        SetSimMeasure::Dice => 2.0 * inter / (na + nb),
        SetSimMeasure::Jaccard => inter / (na + nb - inter),
        _ => unreachable!(),
    };
    Ok(SetScore {
        raw,
        size_a: set_a.len(),
        size_b: set_b.len(),
    })
}
