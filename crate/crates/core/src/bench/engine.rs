//! The benchmark computation pipeline.
//!
//! A run resolves the cohort against the taxonomy once, computes every
//! needed concept-score matrix over the universe of codes the cohort
//! actually uses, and then evaluates each requested combination over all
//! patient pairs (including self-pairs). Work is parallelized over pairs
//! and matrix rows, but every write lands at a precomputed index, so the
//! output is bitwise identical for any parallelism degree.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::bench::{
    enumerate_combos, pearson, AlgorithmCombo, BenchError, ComboFilter, GroundTruthMatrix,
    PatientSet, SimilarityMatrix,
};
use crate::concept::{cs_by_id, CsMeasure, Direction, LiVariant};
use crate::ic::{IcMeasure, IcTable};
use crate::scale::{apply_scale, LogBase, ScaledScore};
use crate::set::{
    normalize_distance, setsim_bipartite, setsim_coefficient, setsim_hierarchical,
    setsim_mean_cs, to_distance, SetScore, SetSimError, SetSimMeasure,
};
use crate::taxonomy::Taxonomy;

/// How concept scores are brought onto the distance scale the
/// hierarchical measure needs.
///
/// `Run` rescales against the minimum and maximum of all concept scores
/// computed for the current run (the only option with measures whose
/// range is unbounded). `None` skips rescaling and requires the raw
/// scores to already live in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizePolicy {
    #[default]
    Run,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown normalization policy {0:?} (expected `run` or `none`)")]
pub struct ParseNormalizeError(pub String);

impl NormalizePolicy {
    pub fn name(self) -> &'static str {
        match self {
            NormalizePolicy::Run => "run",
            NormalizePolicy::None => "none",
        }
    }
}

impl fmt::Display for NormalizePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormalizePolicy {
    type Err = ParseNormalizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "run" => Ok(NormalizePolicy::Run),
            "none" => Ok(NormalizePolicy::None),
            other => Err(ParseNormalizeError(other.to_owned())),
        }
    }
}

/// Where concept scores come from. `Constant` replaces the whole concept
/// stage with a fixed value — a test hook that makes worked examples with
/// hand-picked per-pair scores exactly reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CsSource {
    Real,
    Constant(f64),
}

/// Knobs shared by every computation in one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub li_variant: LiVariant,
    pub scale_base: LogBase,
    pub normalize: NormalizePolicy,
    pub include_diagonal: bool,
    /// Worker threads; 0 picks the environment default.
    pub parallelism: usize,
    pub cs_source: CsSource,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            li_variant: LiVariant::default(),
            scale_base: LogBase::default(),
            normalize: NormalizePolicy::default(),
            include_diagonal: false,
            parallelism: 0,
            cs_source: CsSource::Real,
        }
    }
}

/// Concept scores over the run's code universe, plus their normalized
/// distance form.
struct CsBundle {
    values: Vec<f64>,
    dists: Vec<f64>,
}

struct Prepared<'a> {
    tax: &'a Taxonomy,
    cohort: &'a [PatientSet],
    cfg: &'a BenchConfig,
    /// Sorted taxonomy node ids of every code any patient carries.
    universe: Vec<usize>,
    /// Per patient: positions into `universe`.
    members: Vec<Vec<usize>>,
    /// Upper-triangle patient pairs including the diagonal.
    pairs: Vec<(usize, usize)>,
}

impl<'a> Prepared<'a> {
    fn new(
        tax: &'a Taxonomy,
        cohort: &'a [PatientSet],
        cfg: &'a BenchConfig,
    ) -> Result<Self, BenchError> {
        let mut ids: BTreeSet<usize> = BTreeSet::new();
        for p in cohort {
            for c in p.codes() {
                ids.insert(tax.id_of(c.as_str())?);
            }
        }
        let universe: Vec<usize> = ids.into_iter().collect();
        let members: Vec<Vec<usize>> = cohort
            .iter()
            .map(|p| {
                p.codes()
                    .iter()
                    .map(|c| {
                        let id = tax.id_of(c.as_str()).expect("validated above");
                        universe.binary_search(&id).expect("member of universe")
                    })
                    .collect()
            })
            .collect();
        let n = cohort.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .collect();
        Ok(Self { tax, cohort, cfg, universe, members, pairs })
    }

    fn bundle(&self, ic: Option<IcMeasure>, cs: CsMeasure) -> Result<CsBundle, BenchError> {
        let u = self.universe.len();
        let values: Vec<f64> = match self.cfg.cs_source {
            CsSource::Constant(v) => vec![v; u * u],
            CsSource::Real => {
                let table = IcTable::compute(self.tax, ic.unwrap_or(IcMeasure::Level));
                let rows: Vec<Vec<f64>> = (0..u)
                    .into_par_iter()
                    .map(|r| {
                        (0..u)
                            .map(|c| {
                                cs_by_id(
                                    self.tax,
                                    &table,
                                    cs,
                                    self.cfg.li_variant,
                                    self.universe[r],
                                    self.universe[c],
                                )
                            })
                            .collect()
                    })
                    .collect();
                rows.concat()
            }
        };
        let dists = match (self.cfg.normalize, cs.direction()) {
            (NormalizePolicy::Run, Direction::Similarity) => to_distance(&values),
            (NormalizePolicy::Run, Direction::Distance) => normalize_distance(&values),
            (NormalizePolicy::None, dir) => {
                let mut out = Vec::with_capacity(values.len());
                for (idx, &v) in values.iter().enumerate() {
                    let d = match dir {
                        Direction::Similarity => 1.0 - v,
                        Direction::Distance => v,
                    };
                    if !(0.0..=1.0).contains(&d) {
                        return Err(SetSimError::OutOfRangeDistance {
                            row: idx / u,
                            col: idx % u,
                            value: d,
                        }
                        .into());
                    }
                    out.push(d);
                }
                out
            }
        };
        Ok(CsBundle { values, dists })
    }

    /// Raw (unscaled) set scores for every patient pair under one
    /// (concept measure, set measure) choice; pair order matches
    /// `self.pairs`.
    fn triple_scores(
        &self,
        bundle: Option<&CsBundle>,
        cs: Option<CsMeasure>,
        set: SetSimMeasure,
    ) -> Result<Vec<SetScore>, BenchError> {
        let u = self.universe.len();
        self.pairs
            .par_iter()
            .map(|&(i, j)| -> Result<SetScore, BenchError> {
                if !set.semantic() {
                    return Ok(setsim_coefficient(
                        set,
                        self.cohort[i].codes(),
                        self.cohort[j].codes(),
                    )?);
                }
                let bundle = bundle.expect("semantic set measure needs concept scores");
                let source = match set {
                    SetSimMeasure::HierarchicalDistance => &bundle.dists,
                    _ => &bundle.values,
                };
                let rows = &self.members[i];
                let cols = &self.members[j];
                let sub: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|&r| cols.iter().map(|&c| source[r * u + c]).collect())
                    .collect();
                let score = match set {
                    SetSimMeasure::MeanCs => setsim_mean_cs(&sub)?,
                    SetSimMeasure::BipartiteMatching => {
                        let dir = cs.map_or(Direction::Similarity, CsMeasure::direction);
                        setsim_bipartite(&sub, dir)?
                    }
                    SetSimMeasure::HierarchicalDistance => setsim_hierarchical(&sub)?,
                    _ => unreachable!("coefficient measures handled above"),
                };
                Ok(score)
            })
            .collect()
    }

    fn matrix_from_pair_values(&self, values: &[f64]) -> SimilarityMatrix {
        let n = self.cohort.len();
        let mut m = vec![0.0; n * n];
        for (&(i, j), &v) in self.pairs.iter().zip(values) {
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
        let pseudonyms = self.cohort.iter().map(|p| p.pseudonym().to_owned()).collect();
        SimilarityMatrix::new(pseudonyms, m)
    }
}

/// One evaluated combination: its matrix and, when a ground truth was
/// supplied and the correlation is defined, the Pearson coefficient.
#[derive(Debug, Clone)]
pub struct ComboResult {
    pub combo: AlgorithmCombo,
    pub matrix: SimilarityMatrix,
    pub r: Option<f64>,
}

/// Results in canonical combination order.
#[derive(Debug, Clone)]
pub struct BenchRun {
    pub results: Vec<ComboResult>,
}

impl BenchRun {
    /// Indices into `results`, best correlation first; undefined
    /// correlations sort last; ties keep canonical order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.results.len()).collect();
        idx.sort_by(|&a, &b| {
            use std::cmp::Ordering;
            match (self.results[a].r, self.results[b].r) {
                (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(Ordering::Equal),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            }
        });
        idx
    }

    pub fn find(&self, id: &str) -> Option<&ComboResult> {
        self.results.iter().find(|r| r.combo.id() == id)
    }
}

fn run_inner(
    tax: &Taxonomy,
    cohort: &[PatientSet],
    truth: Option<&GroundTruthMatrix>,
    filter: &ComboFilter,
    cfg: &BenchConfig,
) -> Result<BenchRun, BenchError> {
    let prep = Prepared::new(tax, cohort, cfg)?;
    let combos: Vec<AlgorithmCombo> = enumerate_combos()
        .into_iter()
        .filter(|c| filter.matches(c))
        .collect();

    let mut bundles: HashMap<(Option<IcMeasure>, CsMeasure), CsBundle> = HashMap::new();
    for combo in &combos {
        if let Some(cs) = combo.cs {
            let key = (combo.ic.filter(|_| cs.uses_ic()), cs);
            if !bundles.contains_key(&key) {
                let b = prep.bundle(key.0, cs)?;
                bundles.insert(key, b);
            }
        }
    }

    // Scaled and unscaled variants share the same raw scores, as do the
    // two IC choices under concept measures that never read IC.
    type TripleKey = (Option<IcMeasure>, Option<CsMeasure>, SetSimMeasure);
    let mut raw_cache: HashMap<TripleKey, Vec<SetScore>> = HashMap::new();
    let mut results = Vec::with_capacity(combos.len());
    for combo in combos {
        let ic_key = match combo.cs {
            Some(cs) if cs.uses_ic() => combo.ic,
            _ => None,
        };
        let triple = (ic_key, combo.cs, combo.set);
        if !raw_cache.contains_key(&triple) {
            let bundle = combo.cs.map(|cs| &bundles[&(ic_key, cs)]);
            let scores = prep.triple_scores(bundle, combo.cs, combo.set)?;
            raw_cache.insert(triple, scores);
        }
        let scores = &raw_cache[&triple];
        let values: Vec<f64> = if combo.scaled {
            scores
                .iter()
                .map(|s| {
                    apply_scale(s.raw, s.size_a, s.size_b, cfg.scale_base).map(|x| x.scaled)
                })
                .collect::<Result<_, _>>()?
        } else {
            scores.iter().map(|s| s.raw).collect()
        };
        let matrix = prep.matrix_from_pair_values(&values);
        let r = match truth {
            Some(t) => match pearson(&matrix, t, cfg.include_diagonal) {
                Ok(r) => Some(r),
                Err(BenchError::ZeroVariance) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        results.push(ComboResult { combo, matrix, r });
    }
    Ok(BenchRun { results })
}

/// Evaluate every combination the filter admits.
pub fn run_benchmark(
    tax: &Taxonomy,
    cohort: &[PatientSet],
    truth: Option<&GroundTruthMatrix>,
    filter: &ComboFilter,
    cfg: &BenchConfig,
) -> Result<BenchRun, BenchError> {
    if cfg.parallelism == 0 {
        run_inner(tax, cohort, truth, filter, cfg)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallelism)
            .build()
            .map_err(|e| BenchError::Internal(e.to_string()))?;
        pool.install(|| run_inner(tax, cohort, truth, filter, cfg))
    }
}

/// Pairwise patient matrix for a single combination.
pub fn compute_matrix(
    tax: &Taxonomy,
    cohort: &[PatientSet],
    combo: &AlgorithmCombo,
    cfg: &BenchConfig,
) -> Result<SimilarityMatrix, BenchError> {
    let filter = ComboFilter::Exact(Box::new(*combo));
    let run = run_benchmark(tax, cohort, None, &filter, cfg)?;
    Ok(run
        .results
        .into_iter()
        .next()
        .expect("exact filter always matches one combo")
        .matrix)
}

/// Raw and scaled score for one explicit pair of code sets.
pub fn set_pair_score(
    tax: &Taxonomy,
    combo: &AlgorithmCombo,
    a: &PatientSet,
    b: &PatientSet,
    cfg: &BenchConfig,
) -> Result<ScaledScore, BenchError> {
    let cohort = [a.clone(), b.clone()];
    let prep = Prepared::new(tax, &cohort, cfg)?;
    let bundle = match combo.cs {
        Some(cs) => Some(prep.bundle(combo.ic.filter(|_| cs.uses_ic()), cs)?),
        None => None,
    };
    let scores = prep.triple_scores(bundle.as_ref(), combo.cs, combo.set)?;
    // Pair order is (0,0), (0,1), (1,1).
    let s = scores[1];
    Ok(apply_scale(s.raw, s.size_a, s.size_b, cfg.scale_base)?)
}
