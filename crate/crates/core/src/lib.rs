//! Taxonomy-based semantic similarity between sets of diagnosis codes,
//! plus a benchmark harness ranking algorithm combinations against an
//! expert ground truth.
//!
//! The pipeline has four stages, each swappable:
//!
//! 1. a rooted-tree [`taxonomy::Taxonomy`] of concept codes,
//! 2. an information-content measure ([`ic::IcMeasure`]) scoring the
//!    specificity of single concepts,
//! 3. a concept-similarity measure ([`concept::CsMeasure`]) scoring
//!    pairs of concepts,
//! 4. a set-similarity measure ([`set::SetSimMeasure`]) aggregating
//!    concept scores (or raw code overlap) over two patients' code sets,
//!    optionally adjusted by the size-aware scale term ([`scale`]).
//!
//! The [`bench`] module enumerates all 80 measure combinations, computes
//! pairwise patient matrices, and correlates each against a 0-10 expert
//! matrix. [`synth`] generates seeded stand-in data shaped like the
//! cohort the pipeline was designed for.

pub mod assignment;
pub mod bench;
pub mod concept;
pub mod ic;
pub mod scale;
pub mod set;
pub mod synth;
pub mod taxonomy;

pub use assignment::{assignment_optimum, OptimizeMode};
pub use bench::{
    cohort_csv, compute_matrix, enumerate_combos, load_cohort, load_truth, pearson,
    run_benchmark, set_pair_score, write_outputs, AlgorithmCombo, BenchConfig, BenchError,
    BenchRun, ComboFilter, ComboResult, CsSource, GroundTruthMatrix, NormalizePolicy,
    PatientSet, RunInputs, SimilarityMatrix, UnknownCodePolicy,
};
pub use concept::{cs, cs_matrix, CsMeasure, CsValue, Direction, LiVariant};
pub use ic::{ic, IcMeasure, IcTable};
pub use scale::{apply_scale, LogBase, ScaleError, ScaledScore};
pub use set::{
    normalize_distance, setsim_bipartite, setsim_coefficient, setsim_hierarchical,
    setsim_mean_cs, to_distance, SetScore, SetSimError, SetSimMeasure,
};
pub use taxonomy::{ConceptCode, Taxonomy, TaxonomyError};
