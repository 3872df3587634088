//! Benchmark harness: enumerate algorithm combinations, compute pairwise
//! patient similarity matrices, and correlate them against an expert
//! ground truth.

mod engine;
mod ingest;
mod report;

pub use engine::{
    compute_matrix, run_benchmark, set_pair_score, BenchConfig, BenchRun, ComboResult,
    CsSource, NormalizePolicy, ParseNormalizeError,
};
pub use ingest::{
    cohort_csv, load_cohort, load_truth, GroundTruthMatrix, PatientSet,
    ParseUnknownCodePolicyError, UnknownCodePolicy,
};
pub use report::{
    format_value, matrix_csv, ranking_csv, run_manifest, write_outputs, RunInputs,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::assignment::kahan_sum;
use crate::concept::CsMeasure;
use crate::ic::IcMeasure;
use crate::scale::ScaleError;
use crate::set::{SetSimError, SetSimMeasure};
use crate::taxonomy::TaxonomyError;

/// Everything that can go wrong while ingesting benchmark inputs or
/// running the pipeline.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    SetSim(#[from] SetSimError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error("duplicate pseudonym {pseudonym:?}")]
    DuplicatePseudonym { pseudonym: String },
    #[error("patient {pseudonym:?} has an empty code list")]
    EmptyCodeList { pseudonym: String },
    #[error("pseudonym {pseudonym:?} missing from the ground truth")]
    MissingPseudonym { pseudonym: String },
    #[error("ground truth is asymmetric at ({a}, {b}): {lhs} vs {rhs}")]
    AsymmetricTruth { a: String, b: String, lhs: f64, rhs: f64 },
    #[error("ground truth score {value} for ({a}, {b}) outside [0, 10]")]
    OutOfRangeScore { a: String, b: String, value: f64 },
    #[error("matrix dimension mismatch: {expected} vs {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("constant input vector: correlation undefined")]
    ZeroVariance,
    #[error("correlation needs at least 3 patients, got {n}")]
    TooFewPatients { n: usize },
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("unknown combo id {0:?}")]
    UnknownCombo(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One fully specified similarity pipeline: which information-content
/// measure feeds which concept measure, how concept scores aggregate to
/// a set score, and whether the size scale term is applied.
///
/// The four coefficient set measures compare code sets directly and
/// carry no IC or concept measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlgorithmCombo {
    pub ic: Option<IcMeasure>,
    pub cs: Option<CsMeasure>,
    pub set: SetSimMeasure,
    pub scaled: bool,
}

impl AlgorithmCombo {
    pub fn semantic(ic: IcMeasure, cs: CsMeasure, set: SetSimMeasure, scaled: bool) -> Self {
        assert!(set.semantic(), "{set} does not consume concept scores");
        Self { ic: Some(ic), cs: Some(cs), set, scaled }
    }

    pub fn coefficient(set: SetSimMeasure, scaled: bool) -> Self {
        assert!(!set.semantic(), "{set} requires ic and cs measures");
        Self { ic: None, cs: None, set, scaled }
    }

    /// Canonical identifier, e.g. `ic=level,cs=nguyen,set=meancs,unscaled`
    /// or `set=dice,scaled`.
    pub fn id(&self) -> String {
        let scaled = if self.scaled { "scaled" } else { "unscaled" };
        match (self.ic, self.cs) {
            (Some(ic), Some(cs)) => {
                format!("ic={},cs={},set={},{}", ic.name(), cs.name(), self.set.name(), scaled)
            }
            _ => format!("set={},{}", self.set.name(), scaled),
        }
    }
}

impl fmt::Display for AlgorithmCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for AlgorithmCombo {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || BenchError::UnknownCombo(s.to_owned());
        let mut ic: Option<IcMeasure> = None;
        let mut cs: Option<CsMeasure> = None;
        let mut set: Option<SetSimMeasure> = None;
        let mut scaled: Option<bool> = None;
        for field in s.split(',') {
            match field.split_once('=') {
                Some(("ic", v)) if ic.is_none() => ic = Some(v.parse().map_err(|_| err())?),
                Some(("cs", v)) if cs.is_none() => cs = Some(v.parse().map_err(|_| err())?),
                Some(("set", v)) if set.is_none() => set = Some(v.parse().map_err(|_| err())?),
                None if scaled.is_none() && field == "scaled" => scaled = Some(true),
                None if scaled.is_none() && field == "unscaled" => scaled = Some(false),
                _ => return Err(err()),
            }
        }
        let (set, scaled) = match (set, scaled) {
            (Some(set), Some(scaled)) => (set, scaled),
            _ => return Err(err()),
        };
        let combo = match (ic, cs, set.semantic()) {
            (Some(ic), Some(cs), true) => AlgorithmCombo::semantic(ic, cs, set, scaled),
            (None, None, false) => AlgorithmCombo::coefficient(set, scaled),
            _ => return Err(err()),
        };
        Ok(combo)
    }
}

/// All benchmark combinations in canonical order: information content
/// varies slowest, then concept measure, then set measure, with the
/// unscaled variant always directly before its scaled twin; the four
/// coefficient measures close the list.
pub fn enumerate_combos() -> Vec<AlgorithmCombo> {
    let mut combos = Vec::with_capacity(80);
    for ic in IcMeasure::ALL {
        for cs in CsMeasure::ALL {
            for set in [
                SetSimMeasure::MeanCs,
                SetSimMeasure::BipartiteMatching,
                SetSimMeasure::HierarchicalDistance,
            ] {
                for scaled in [false, true] {
                    combos.push(AlgorithmCombo::semantic(ic, cs, set, scaled));
                }
            }
        }
    }
    for set in [
        SetSimMeasure::Overlap,
        SetSimMeasure::Cosine,
        SetSimMeasure::Dice,
        SetSimMeasure::Jaccard,
    ] {
        for scaled in [false, true] {
            combos.push(AlgorithmCombo::coefficient(set, scaled));
        }
    }
    combos
}

/// Which combinations a benchmark run evaluates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComboFilter {
    All,
    /// Exactly one combination, given by its canonical id.
    Exact(Box<AlgorithmCombo>),
    /// Every combination whose id contains the pattern.
    Substring(String),
}

impl ComboFilter {
    pub fn parse(s: &str) -> Self {
        if s == "all" {
            ComboFilter::All
        } else if let Ok(combo) = s.parse::<AlgorithmCombo>() {
            ComboFilter::Exact(Box::new(combo))
        } else {
            ComboFilter::Substring(s.to_owned())
        }
    }

    pub fn matches(&self, combo: &AlgorithmCombo) -> bool {
        match self {
            ComboFilter::All => true,
            ComboFilter::Exact(c) => combo == c.as_ref(),
            ComboFilter::Substring(pat) => combo.id().contains(pat.as_str()),
        }
    }
}

/// Symmetric pairwise patient similarity, row-major over a fixed
/// pseudonym order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pseudonyms: Vec<String>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub(crate) fn new(pseudonyms: Vec<String>, values: Vec<f64>) -> Self {
        assert_eq!(pseudonyms.len() * pseudonyms.len(), values.len());
        Self { pseudonyms, values }
    }

    pub fn pseudonyms(&self) -> &[String] {
        &self.pseudonyms
    }

    pub fn len(&self) -> usize {
        self.pseudonyms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pseudonyms.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.pseudonyms.len() + j]
    }

    /// Map every entry, keeping the pseudonym order.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            pseudonyms: self.pseudonyms.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Largest absolute difference between mirrored entries.
    pub fn asymmetry(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn has_nan(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }
}

fn triangle<'m>(
    n: usize,
    include_diagonal: bool,
    get: impl Fn(usize, usize) -> f64 + Copy + 'm,
) -> impl Iterator<Item = f64> + 'm {
    (0..n).flat_map(move |i| {
        let start = if include_diagonal { i } else { i + 1 };
        (start..n).map(move |j| get(i, j))
    })
}

/// Pearson correlation between a computed similarity matrix and the
/// ground truth, taken over the upper triangle (the diagonal is excluded
/// unless requested: self-pairs are definitionally maximal in an expert
/// matrix and would inflate the coefficient).
pub fn pearson(
    m: &SimilarityMatrix,
    t: &GroundTruthMatrix,
    include_diagonal: bool,
) -> Result<f64, BenchError> {
    if m.pseudonyms() != t.pseudonyms() {
        return Err(BenchError::DimensionMismatch {
            expected: t.pseudonyms().len(),
            actual: m.pseudonyms().len(),
        });
    }
    let n = m.len();
    if n < 3 {
        return Err(BenchError::TooFewPatients { n });
    }
    let xs: Vec<f64> = triangle(n, include_diagonal, |i, j| m.get(i, j)).collect();
    let ys: Vec<f64> = triangle(n, include_diagonal, |i, j| t.get(i, j)).collect();
    pearson_vectors(&xs, &ys)
}

fn constant(values: &[f64]) -> bool {
    values
        .windows(2)
        .all(|w| w[0].to_bits() == w[1].to_bits())
}

pub(crate) fn pearson_vectors(xs: &[f64], ys: &[f64]) -> Result<f64, BenchError> {
    assert_eq!(xs.len(), ys.len());
    // Bitwise constancy rather than a variance ≈ 0 test: genuinely
    // constant vectors must be reported as such, while merely similar
    // values still carry rank information.
    if constant(xs) || constant(ys) {
        return Err(BenchError::ZeroVariance);
    }
    let n = xs.len() as f64;
    let mean_x = kahan_sum(xs.iter().copied()) / n;
    let mean_y = kahan_sum(ys.iter().copied()) / n;
    let cov = kahan_sum(xs.iter().zip(ys).map(|(&x, &y)| (x - mean_x) * (y - mean_y)));
    let var_x = kahan_sum(xs.iter().map(|&x| (x - mean_x) * (x - mean_x)));
    let var_y = kahan_sum(ys.iter().map(|&y| (y - mean_y) * (y - mean_y)));
    if var_x <= 0.0 || var_y <= 0.0 {
        return Err(BenchError::ZeroVariance);
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eighty_combos_forty_unscaled() {
        let combos = enumerate_combos();
        assert_eq!(combos.len(), 80);
        assert_eq!(combos.iter().filter(|c| !c.scaled).count(), 40);
        assert_eq!(combos[0].id(), "ic=level,cs=nguyen,set=meancs,unscaled");
        assert_eq!(combos[1].id(), "ic=level,cs=nguyen,set=meancs,scaled");
        assert_eq!(combos[79].id(), "set=jaccard,scaled");
        // Ids are unique.
        let mut ids: Vec<String> = combos.iter().map(AlgorithmCombo::id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 80);
    }

    #[test]
    fn combo_ids_round_trip() {
        for combo in enumerate_combos() {
            let parsed: AlgorithmCombo = combo.id().parse().unwrap();
            assert_eq!(parsed, combo);
        }
    }

    #[test]
    fn bad_combo_ids_are_rejected() {
        for bad in [
            "",
            "all",
            "set=dice",
            "ic=level,set=meancs,unscaled",
            "ic=level,cs=nguyen,set=dice,unscaled",
            "set=meancs,unscaled",
            "ic=level,cs=nguyen,set=meancs,unscaled,scaled",
            "ic=bogus,cs=nguyen,set=meancs,unscaled",
        ] {
            assert!(bad.parse::<AlgorithmCombo>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn filter_modes() {
        let combos = enumerate_combos();
        assert_eq!(combos.iter().filter(|c| ComboFilter::All.matches(c)).count(), 80);
        let exact = ComboFilter::parse("set=dice,unscaled");
        assert_eq!(combos.iter().filter(|c| exact.matches(c)).count(), 1);
        let sub = ComboFilter::parse("set=mbm");
        assert_eq!(combos.iter().filter(|c| sub.matches(c)).count(), 24);
        let scaled = ComboFilter::parse("unscaled");
        assert_eq!(combos.iter().filter(|c| scaled.matches(c)).count(), 40);
    }

    fn sim(pseudonyms: &[&str], rows: &[&[f64]]) -> SimilarityMatrix {
        let values = rows.iter().flat_map(|r| r.iter().copied()).collect();
        SimilarityMatrix::new(pseudonyms.iter().map(|s| s.to_string()).collect(), values)
    }

    fn truth(pseudonyms: &[&str], rows: &[&[f64]]) -> GroundTruthMatrix {
        let values: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        GroundTruthMatrix::from_values(
            pseudonyms.iter().map(|s| s.to_string()).collect(),
            &values,
        )
        .unwrap()
    }

    #[test]
    fn pearson_self_is_one() {
        let names = ["P1", "P2", "P3"];
        let rows: &[&[f64]] = &[
            &[1.0, 0.2, 0.7],
            &[0.2, 1.0, 0.4],
            &[0.7, 0.4, 1.0],
        ];
        let m = sim(&names, rows);
        let t = truth(&names, &[&[10.0, 2.0, 7.0], &[2.0, 10.0, 4.0], &[7.0, 4.0, 10.0]]);
        // Truth here is 10× the matrix, a positive affine map.
        assert!((pearson(&m, &t, false).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&m, &t, true).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_negation_is_minus_one() {
        let names = ["P1", "P2", "P3"];
        let m = sim(&names, &[&[1.0, 0.2, 0.7], &[0.2, 1.0, 0.4], &[0.7, 0.4, 1.0]]);
        let t = truth(&names, &[&[0.0, 8.0, 3.0], &[8.0, 0.0, 6.0], &[3.0, 6.0, 0.0]]);
        // Truth = 10 − 10·m on the off-diagonal: a negative affine map.
        assert!((pearson(&m, &t, false).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_rejects_constant_vectors() {
        let names = ["P1", "P2", "P3"];
        let m = sim(&names, &[&[1.0, 0.5, 0.5], &[0.5, 1.0, 0.5], &[0.5, 0.5, 1.0]]);
        let t = truth(&names, &[&[10.0, 2.0, 7.0], &[2.0, 10.0, 4.0], &[7.0, 4.0, 10.0]]);
        assert!(matches!(pearson(&m, &t, false), Err(BenchError::ZeroVariance)));
        // With the diagonal included the matrix vector is no longer constant.
        assert!(pearson(&m, &t, true).is_ok());
    }

    #[test]
    fn pearson_needs_three_patients() {
        let names = ["P1", "P2"];
        let m = sim(&names, &[&[1.0, 0.5], &[0.5, 1.0]]);
        let t = truth(&names, &[&[10.0, 5.0], &[5.0, 10.0]]);
        assert!(matches!(
            pearson(&m, &t, false),
            Err(BenchError::TooFewPatients { n: 2 })
        ));
    }

    #[test]
    fn pearson_checks_pseudonym_alignment() {
        let m = sim(&["P1", "P2", "P3"], &[&[1.0, 0.2, 0.7], &[0.2, 1.0, 0.4], &[0.7, 0.4, 1.0]]);
        let t = truth(
            &["P1", "P3", "P2"],
            &[&[10.0, 2.0, 7.0], &[2.0, 10.0, 4.0], &[7.0, 4.0, 10.0]],
        );
        assert!(matches!(
            pearson(&m, &t, false),
            Err(BenchError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matrix_asymmetry_and_nan_probes() {
        let m = sim(&["P1", "P2"], &[&[1.0, 0.5], &[0.25, 1.0]]);
        assert_eq!(m.asymmetry(), 0.25);
        assert!(!m.has_nan());
        let m = sim(&["P1", "P2"], &[&[1.0, f64::NAN], &[0.25, 1.0]]);
        assert!(m.has_nan());
    }
}
