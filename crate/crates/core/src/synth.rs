//! Deterministic synthetic taxonomies, cohorts, and ground truths.
//!
//! Real diagnosis data cannot ship with the repository, so benchmarks
//! and tests run against generated stand-ins whose shape mimics the
//! documented cohort statistics: set sizes with mean around 35, standard
//! deviation around 24, clipped to 1..=94. Everything is seeded, so any
//! run can be reproduced exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::bench::{GroundTruthMatrix, PatientSet, SimilarityMatrix};
use crate::taxonomy::{ConceptCode, Taxonomy};

/// Random recursive tree: node `i` attaches to a uniformly chosen
/// earlier node, which yields logarithmic depth — a few levels for a
/// few hundred nodes, the same ballpark as a diagnosis classification.
pub fn random_taxonomy(nodes: usize, seed: u64) -> Taxonomy {
    assert!(nodes >= 1, "a taxonomy needs at least a root");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from("root,\n");
    for i in 1..nodes {
        let parent = if i == 1 { 0 } else { rng.random_range(0..i) };
        if parent == 0 {
            text.push_str(&format!("N{i:04},root\n"));
        } else {
            text.push_str(&format!("N{i:04},N{parent:04}\n"));
        }
    }
    Taxonomy::parse_edge_list(&text).expect("generated edge list is a valid tree")
}

/// Draw a cohort of `patients` code sets from `tax`. Set sizes follow a
/// gamma distribution matched to mean 35 and standard deviation 24,
/// clipped to `1..=94` (and to the taxonomy size).
pub fn synth_cohort(tax: &Taxonomy, patients: usize, seed: u64) -> Vec<PatientSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codes: Vec<&ConceptCode> = tax.codes().collect();
    let max_size = codes.len().min(94);
    // mean = shape·scale, variance = shape·scale²; solving for
    // mean 35 / sd 24 gives shape ≈ 2.1267, scale ≈ 16.457.
    let sizes = Gamma::<f64>::new(2.1267, 16.457).expect("valid gamma parameters");
    (0..patients)
        .map(|i| {
            let drawn = sizes.sample(&mut rng).round() as i64;
            let size = drawn.clamp(1, max_size as i64) as usize;
            let picked = rand::seq::index::sample(&mut rng, codes.len(), size);
            let set: Vec<ConceptCode> = picked.iter().map(|k| codes[k].clone()).collect();
            PatientSet::new(&format!("P{:03}", i + 1), set).expect("non-empty generated set")
        })
        .collect()
}

/// Project a similarity matrix affinely onto the 0-10 expert scale:
/// the smallest entry maps to 0, the largest to 10. A constant matrix
/// maps to all fives. The result is a valid ground truth that correlates
/// perfectly with the source matrix.
pub fn truth_from_matrix(m: &SimilarityMatrix) -> GroundTruthMatrix {
    let n = m.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            lo = lo.min(m.get(i, j));
            hi = hi.max(m.get(i, j));
        }
    }
    let map = |v: f64| {
        if hi == lo {
            5.0
        } else {
            (10.0 * (v - lo) / (hi - lo)).clamp(0.0, 10.0)
        }
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| map(m.get(i, j))).collect())
        .collect();
    GroundTruthMatrix::from_values(m.pseudonyms().to_vec(), &rows)
        .expect("affine image of a symmetric matrix is a valid truth")
}
