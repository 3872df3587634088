//! Set-similarity stage properties: the bipartite matcher against a
//! brute-force oracle, coefficient orderings, aggregation symmetries,
//! and the size-scale term.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taxosim_core::assignment::{assignment_optimum, OptimizeMode};
use taxosim_core::concept::Direction;
use taxosim_core::scale::{apply_scale, LogBase};
use taxosim_core::set::{
    normalize_distance, setsim_bipartite, setsim_coefficient, setsim_hierarchical,
    setsim_mean_cs, to_distance, SetSimMeasure,
};

/// Exhaustive optimum over all maximal matchings of an m×n weight matrix.
fn brute_force(w: &[Vec<f64>], mode: OptimizeMode) -> f64 {
    let m = w.len();
    let n = w[0].len();
    let totals: Vec<f64> = if m <= n {
        (0..n)
            .permutations(m)
            .map(|p| p.iter().enumerate().map(|(i, &j)| w[i][j]).sum())
            .collect()
    } else {
        (0..m)
            .permutations(n)
            .map(|p| p.iter().enumerate().map(|(j, &i)| w[i][j]).sum())
            .collect()
    };
    totals
        .into_iter()
        .reduce(|a, b| match mode {
            OptimizeMode::Maximize => a.max(b),
            OptimizeMode::Minimize => a.min(b),
        })
        .unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, integer: bool) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if integer {
                        rng.random_range(0..=9) as f64
                    } else {
                        rng.random_range(0.0..10.0)
                    }
                })
                .collect()
        })
        .collect()
}

#[test]
fn matcher_agrees_with_brute_force_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..600 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=6);
        let integer = case % 2 == 0;
        let w = random_matrix(&mut rng, m, n, integer);
        for mode in [OptimizeMode::Maximize, OptimizeMode::Minimize] {
            let got = assignment_optimum(&w, mode).unwrap();
            let want = brute_force(&w, mode);
            if integer {
                assert_eq!(got, want, "case {case} {mode:?} {m}x{n}: {w:?}");
            } else {
                assert!(
                    (got - want).abs() <= 1e-9,
                    "case {case} {mode:?} {m}x{n}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn matcher_is_invariant_under_row_and_column_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for _ in 0..200 {
        let m = rng.random_range(1..=6);
        let n = rng.random_range(1..=6);
        let w = random_matrix(&mut rng, m, n, false);
        let mut rows: Vec<usize> = (0..m).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        for i in (1..m).rev() {
            rows.swap(i, rng.random_range(0..=i));
        }
        for j in (1..n).rev() {
            cols.swap(j, rng.random_range(0..=j));
        }
        let shuffled: Vec<Vec<f64>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| w[i][j]).collect())
            .collect();
        for mode in [OptimizeMode::Maximize, OptimizeMode::Minimize] {
            let a = assignment_optimum(&w, mode).unwrap();
            let b = assignment_optimum(&shuffled, mode).unwrap();
            assert!((a - b).abs() <= 1e-9, "{mode:?}: {a} vs {b}");
        }
    }
}

#[test]
fn matcher_transpose_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(121);
    for _ in 0..200 {
        let m = rng.random_range(1..=5);
        let n = rng.random_range(1..=5);
        let w = random_matrix(&mut rng, m, n, false);
        let t: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| w[i][j]).collect()).collect();
        for dir in [Direction::Similarity, Direction::Distance] {
            let a = setsim_bipartite(&w, dir).unwrap();
            let b = setsim_bipartite(&t, dir).unwrap();
            assert!((a.raw - b.raw).abs() <= 1e-9);
            assert_eq!((a.size_a, a.size_b), (b.size_b, b.size_a));
        }
    }
}

#[test]
fn mean_aggregation_transpose_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(131);
    for _ in 0..300 {
        let m = rng.random_range(1..=8);
        let n = rng.random_range(1..=8);
        let w = random_matrix(&mut rng, m, n, false);
        let t: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| w[i][j]).collect()).collect();
        let a = setsim_mean_cs(&w).unwrap();
        let b = setsim_mean_cs(&t).unwrap();
        assert!((a.raw - b.raw).abs() <= 1e-12, "{} vs {}", a.raw, b.raw);
    }
}

#[test]
fn closest_counterpart_transpose_symmetry_and_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(141);
    for _ in 0..300 {
        let m = rng.random_range(1..=8);
        let n = rng.random_range(1..=8);
        let w: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(0.0..=1.0)).collect())
            .collect();
        let t: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| w[i][j]).collect()).collect();
        let a = setsim_hierarchical(&w).unwrap();
        let b = setsim_hierarchical(&t).unwrap();
        assert!((a.raw - b.raw).abs() <= 1e-12);
        assert!((0.0..=1.0).contains(&a.raw));
        // The top score is reached exactly when every row and column
        // holds a zero distance.
        let perfect = (0..m).all(|i| w[i].iter().any(|&d| d == 0.0))
            && (0..n).all(|j| (0..m).any(|i| w[i][j] == 0.0));
        assert_eq!(a.raw == 1.0, perfect);
    }
}

#[test]
fn closest_counterpart_perfect_score_with_planted_zeros() {
    let mut rng = ChaCha8Rng::seed_from_u64(151);
    for _ in 0..100 {
        let m = rng.random_range(1..=7);
        let n = rng.random_range(1..=7);
        let mut w: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(0.1..=1.0)).collect())
            .collect();
        for i in 0..m {
            w[i][i % n] = 0.0;
        }
        for j in 0..n {
            w[j % m][j] = 0.0;
        }
        assert_eq!(setsim_hierarchical(&w).unwrap().raw, 1.0);
    }
}

#[test]
fn similarity_to_distance_conversion_bounds_and_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(161);
    for _ in 0..200 {
        let len = rng.random_range(2..=40);
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let dist = to_distance(&values);
        assert_eq!(dist.len(), values.len());
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (i, &d) in dist.iter().enumerate() {
            assert!((0.0..=1.0).contains(&d));
            if values[i] == max {
                assert_eq!(d, 0.0);
            }
            if values[i] == min && max != min {
                assert_eq!(d, 1.0);
            }
        }
        // Higher similarity never maps to a larger distance.
        for i in 0..len {
            for j in 0..len {
                if values[i] < values[j] {
                    assert!(dist[i] >= dist[j]);
                }
            }
        }
    }
}

#[test]
fn distance_normalization_keeps_orientation() {
    let mut rng = ChaCha8Rng::seed_from_u64(171);
    for _ in 0..200 {
        let len = rng.random_range(2..=40);
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..8.0)).collect();
        let out = normalize_distance(&values);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (i, &d) in out.iter().enumerate() {
            assert!((0.0..=1.0).contains(&d));
            if values[i] == min {
                assert_eq!(d, 0.0);
            }
            if values[i] == max && max != min {
                assert_eq!(d, 1.0);
            }
        }
        for i in 0..len {
            for j in 0..len {
                if values[i] < values[j] {
                    assert!(out[i] <= out[j]);
                }
            }
        }
    }
}

#[test]
fn coefficient_chain_is_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(181);
    let universe: Vec<String> = (0..50).map(|i| format!("c{i:02}")).collect();
    let subset = |rng: &mut ChaCha8Rng| -> Vec<String> {
        let size = rng.random_range(1..=universe.len());
        rand::seq::index::sample(rng, universe.len(), size)
            .iter()
            .map(|i| universe[i].clone())
            .collect()
    };
    for _ in 0..1000 {
        let a = subset(&mut rng);
        let b = subset(&mut rng);
        let score = |kind| setsim_coefficient(kind, &a, &b).unwrap().raw;
        let jaccard = score(SetSimMeasure::Jaccard);
        let dice = score(SetSimMeasure::Dice);
        let cosine = score(SetSimMeasure::Cosine);
        let overlap = score(SetSimMeasure::Overlap);
        assert!(jaccard <= dice + 1e-12);
        assert!(dice <= cosine + 1e-12);
        assert!(cosine <= overlap + 1e-12);
        for v in [jaccard, dice, cosine, overlap] {
            assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
        // All four agree on the extremes.
        if jaccard == 1.0 {
            assert_eq!(overlap, 1.0);
        }
        if overlap == 0.0 {
            assert_eq!(jaccard, 0.0);
        }
    }
}

#[test]
fn scale_term_penalizes_size_disparity_monotonically() {
    let mut prev = f64::INFINITY;
    for diff in 0..30 {
        let s = apply_scale(1.0, 10, 10 + diff, LogBase::E).unwrap().scaled;
        assert!(s < prev, "diff {diff}: {s} !< {prev}");
        assert!(s <= 1.0 / 10.0 + 1e-15);
        prev = s;
    }
}

#[test]
fn scale_term_preserves_score_order_at_fixed_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(191);
    for _ in 0..500 {
        let a = rng.random_range(0.0..10.0);
        let b = rng.random_range(0.0..10.0);
        let sa = rng.random_range(1..=94);
        let sb = rng.random_range(1..=94);
        let base = [LogBase::E, LogBase::Two, LogBase::Ten][rng.random_range(0..3)];
        let scaled_a = apply_scale(a, sa, sb, base).unwrap().scaled;
        let scaled_b = apply_scale(b, sa, sb, base).unwrap().scaled;
        assert_eq!(a < b, scaled_a < scaled_b);
        assert_eq!(a == b, scaled_a == scaled_b);
    }
}

#[test]
fn scale_bases_order_the_penalty() {
    // For the same size gap, a smaller base grows the log faster and so
    // shrinks the score more.
    for (min, diff) in [(5usize, 3usize), (10, 20), (40, 54)] {
        let two = apply_scale(2.0, min, min + diff, LogBase::Two).unwrap().scaled;
        let e = apply_scale(2.0, min, min + diff, LogBase::E).unwrap().scaled;
        let ten = apply_scale(2.0, min, min + diff, LogBase::Ten).unwrap().scaled;
        assert!(two < e && e < ten, "min {min} diff {diff}");
    }
}
