//! Structural properties checked against independent oracles: BFS
//! distances, Catalan counts, rotation invariants, the far-node counting
//! bound, round-robin window entropies and the static-tree cost bounds.

use abl_core::builders::{mehlhorn_build, optimal_static, FrequencyTable};
use abl_core::cost::{block_entropy, bounds, empirical_entropy};
use abl_core::adversary::round_robin;
use abl_core::tree::{catalan, enumerate_all_bsts, Key, Tree};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

/// Unweighted shortest-path distances from `src` by BFS over the tree's
/// undirected adjacency; independent of the LCA path used by `distance`.
fn bfs_distances(tree: &Tree, src: Key) -> Vec<u32> {
    let n = tree.n() as usize;
    let mut adj = vec![Vec::new(); n + 1];
    for k in 1..=tree.n() {
        if let Some(p) = tree.parent(k) {
            adj[k as usize].push(p);
            adj[p as usize].push(k);
        }
    }
    let mut dist = vec![u32::MAX; n + 1];
    let mut queue = std::collections::VecDeque::new();
    dist[src as usize] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u as usize] {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

#[test]
fn lca_distance_agrees_with_bfs() {
    for n in 1..=8u32 {
        for tree in enumerate_all_bsts(n).unwrap() {
            for u in 1..=n {
                let bfs = bfs_distances(&tree, u);
                for v in 1..=n {
                    assert_eq!(tree.distance(u, v).unwrap(), bfs[v as usize], "n={n} u={u} v={v}");
                }
            }
        }
    }
}

#[test]
fn enumeration_yields_catalan_many_distinct_codes() {
    for n in 1..=10u32 {
        let trees = enumerate_all_bsts(n).unwrap();
        assert_eq!(trees.len() as u64, catalan(n), "count for n={n}");
        let codes: HashSet<String> = trees.iter().map(|t| t.to_code().to_string()).collect();
        assert_eq!(codes.len(), trees.len(), "distinct serializations for n={n}");
    }
}

#[test]
fn round_robin_window_entropies() {
    // Any contiguous block of the round-robin sequence has entropy
    // exactly log2(x) when x <= n, and at least log2(n)/2 when x > n.
    for n in 3..=8u32 {
        let max_x = 4 * n as usize;
        let seq = round_robin(n, max_x + n as usize).unwrap();
        for x in 1..=max_x {
            for start in 0..n as usize {
                let h = block_entropy(n, &seq.items[start..start + x]).unwrap();
                if x <= n as usize {
                    assert!((h - (x as f64).log2()).abs() < 1e-12, "n={n} x={x} start={start}");
                } else {
                    assert!(h >= (n as f64).log2() / 2.0, "n={n} x={x} start={start}: H={h}");
                }
            }
        }
    }
}

fn random_table<R: Rng>(n: u32, rng: &mut R) -> FrequencyTable {
    loop {
        let counts: Vec<u64> = (0..n).map(|_| rng.gen_range(0..=20)).collect();
        if counts.iter().sum::<u64>() > 0 {
            return FrequencyTable::from_counts(counts);
        }
    }
}

#[test]
fn static_bounds_hold_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB57);
    for n in [4u32, 8, 16, 64] {
        for _ in 0..200 {
            let table = random_table(n, &mut rng);
            let t = table.total();
            let h = table.entropy().unwrap();

            let built = mehlhorn_build(&table).unwrap();
            let built_cost = table.weighted_depth(&built);
            assert!(
                built_cost as f64 <= bounds::mehlhorn_upper(t, h),
                "upper bound violated: n={n} table={table} cost={built_cost}"
            );

            // The entropy lower bound is stated for comparison counts
            // (edge depth + 1 per access).
            let (_, opt_cost) = optimal_static(&table).unwrap();
            assert!(
                (opt_cost + t) as f64 >= bounds::mehlhorn_lower(t, h),
                "lower bound violated: n={n} table={table} cost={opt_cost}"
            );
            assert!(opt_cost <= built_cost);
        }
    }
}

#[test]
fn far_node_count_bound_on_all_small_trees() {
    // In any BST, at most 2 sqrt(n) - 2 keys above x sit within distance
    // log2(n)/2 of x.
    for n in 1..=8u32 {
        let threshold = (n as f64).log2() / 2.0;
        let cap = 2.0 * (n as f64).sqrt() - 2.0;
        for tree in enumerate_all_bsts(n).unwrap() {
            for x in 1..=n {
                let close = (x + 1..=n)
                    .filter(|&y| tree.distance(x, y).unwrap() as f64 <= threshold)
                    .count();
                assert!(close as f64 <= cap, "n={n} x={x} tree={:?}", tree.to_code());
            }
        }
    }
}

proptest! {
    #[test]
    fn tree_code_round_trips(order in proptest::collection::vec(0u32..1000, 1..40)) {
        // Turn an arbitrary vector into a permutation-esque insertion order.
        let n = order.len() as u32;
        let mut keys: Vec<Key> = (1..=n).collect();
        // Deterministic shuffle driven by the input values.
        for (i, v) in order.iter().enumerate() {
            let j = (*v as usize) % (i + 1);
            keys.swap(i, j);
        }
        let tree = Tree::from_insertion_order(&keys).unwrap();
        let code = tree.to_code();
        let parsed = Tree::from_code(&code).unwrap();
        prop_assert_eq!(parsed, tree);
    }

    #[test]
    fn rotation_preserves_inorder(order in proptest::collection::vec(0u32..1000, 2..30), child_pick in 0u32..1000) {
        let n = order.len() as u32;
        let mut keys: Vec<Key> = (1..=n).collect();
        for (i, v) in order.iter().enumerate() {
            let j = (*v as usize) % (i + 1);
            keys.swap(i, j);
        }
        let tree = Tree::from_insertion_order(&keys).unwrap();
        // Pick any non-root key.
        let mut candidates: Vec<Key> = (1..=n).filter(|&k| tree.parent(k).is_some()).collect();
        candidates.sort_unstable();
        let child = candidates[(child_pick as usize) % candidates.len()];
        let rotated = tree.rotate(child).unwrap();
        prop_assert!(rotated.check_invariants().is_ok());
        prop_assert_eq!(rotated.in_order(), tree.in_order());
        // Depth of the lifted child drops by exactly one.
        prop_assert_eq!(rotated.depth(child).unwrap() + 1, tree.depth(child).unwrap());
        // Rotating back restores the tree.
        let parent = tree.parent(child).unwrap();
        prop_assert_eq!(rotated.rotate(parent).unwrap(), tree);
    }

    #[test]
    fn entropy_is_bounded_by_log_support(counts in proptest::collection::vec(0u64..50, 1..20)) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let h = empirical_entropy(&counts).unwrap();
        let support = counts.iter().filter(|&&c| c > 0).count() as f64;
        prop_assert!(h >= -1e-12);
        prop_assert!(h <= support.log2() + 1e-12);
    }
}
