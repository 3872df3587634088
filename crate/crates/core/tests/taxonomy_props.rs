//! Structural properties of the taxonomy on seeded random trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taxosim_core::synth::random_taxonomy;
use taxosim_core::taxonomy::Taxonomy;

fn codes_of(tax: &Taxonomy) -> Vec<String> {
    tax.codes().map(|c| c.as_str().to_owned()).collect()
}

#[test]
fn path_lengths_form_a_tree_metric() {
    let tax = random_taxonomy(300, 11);
    let codes = codes_of(&tax);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let a = &codes[rng.random_range(0..codes.len())];
        let b = &codes[rng.random_range(0..codes.len())];
        let c = &codes[rng.random_range(0..codes.len())];
        let ab = tax.shortest_path_len(a, b).unwrap();
        let ba = tax.shortest_path_len(b, a).unwrap();
        let bc = tax.shortest_path_len(b, c).unwrap();
        let ac = tax.shortest_path_len(a, c).unwrap();
        assert_eq!(ab, ba, "symmetry {a} {b}");
        assert_eq!(tax.shortest_path_len(a, a).unwrap(), 0, "identity {a}");
        assert!(ab + bc >= ac, "triangle {a} {b} {c}: {ab} + {bc} < {ac}");
        // Distance to the root is exactly the depth.
        assert_eq!(
            tax.shortest_path_len(a, tax.root().as_str()).unwrap(),
            tax.depth(a).unwrap()
        );
    }
}

#[test]
fn lca_depth_is_bounded_by_both_arguments() {
    let tax = random_taxonomy(250, 21);
    let codes = codes_of(&tax);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..1000 {
        let a = &codes[rng.random_range(0..codes.len())];
        let b = &codes[rng.random_range(0..codes.len())];
        let l = tax.lca(a, b).unwrap().as_str().to_owned();
        let d_l = tax.depth(&l).unwrap();
        assert!(d_l <= tax.depth(a).unwrap().min(tax.depth(b).unwrap()));
        assert_eq!(tax.lca(b, a).unwrap().as_str(), l, "lca commutes");
        assert_eq!(tax.lca(a, a).unwrap().as_str(), a, "lca identity");
        // The ancestor is on the path: d(a,b) = d(a,l) + d(l,b).
        let via = tax.shortest_path_len(a, &l).unwrap() + tax.shortest_path_len(&l, b).unwrap();
        assert_eq!(tax.shortest_path_len(a, b).unwrap(), via);
    }
}

#[test]
fn subsumer_count_is_depth_plus_one_everywhere() {
    let tax = random_taxonomy(200, 31);
    for code in codes_of(&tax) {
        assert_eq!(
            tax.subsumer_count(&code).unwrap(),
            tax.depth(&code).unwrap() + 1
        );
    }
}

#[test]
fn leaf_counts_add_up() {
    let tax = random_taxonomy(200, 41);
    assert_eq!(
        tax.leaf_count_under(tax.root().as_str()).unwrap(),
        tax.total_leaves()
    );
    // Recover the parent set from the serialized edge list; leaves are the
    // nodes that never appear as a parent.
    let mut parents = std::collections::HashSet::new();
    for line in tax.to_edge_list().lines() {
        let (_, parent) = line.split_once(',').unwrap();
        if !parent.is_empty() {
            parents.insert(parent.to_owned());
        }
    }
    let leaves: Vec<String> = codes_of(&tax)
        .into_iter()
        .filter(|c| !parents.contains(c))
        .collect();
    assert_eq!(leaves.len() as u64, tax.total_leaves());
    for leaf in &leaves {
        assert_eq!(tax.leaf_count_under(leaf).unwrap(), 1);
    }
}

#[test]
fn random_trees_round_trip_through_both_formats() {
    for seed in 0..10 {
        let tax = random_taxonomy(150, seed);
        let via_edges = Taxonomy::parse_edge_list(&tax.to_edge_list()).unwrap();
        assert_eq!(tax, via_edges, "edge list, seed {seed}");
        let via_json = Taxonomy::from_json(&tax.to_json()).unwrap();
        assert_eq!(tax, via_json, "json, seed {seed}");
    }
}

#[test]
fn parse_is_order_insensitive() {
    let tax = random_taxonomy(100, 51);
    let text = tax.to_edge_list();
    let mut lines: Vec<&str> = text.trim_end().split('\n').collect();
    // Deterministic shuffle via seeded index swaps.
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for i in (1..lines.len()).rev() {
        let j = rng.random_range(0..=i);
        lines.swap(i, j);
    }
    let shuffled = lines.join("\n");
    assert_eq!(tax, Taxonomy::parse_edge_list(&shuffled).unwrap());
}
