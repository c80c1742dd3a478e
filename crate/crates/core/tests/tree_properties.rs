use proptest::prelude::*;
use treelocate_core::prelude::*;

fn all_sequences(n: usize) -> Vec<Vec<NodeId>> {
    let len = n - 2;
    (0..n.pow(len as u32))
        .map(|mut code| {
            (0..len)
                .map(|_| {
                    let d = code % n;
                    code /= n;
                    d
                })
                .collect()
        })
        .collect()
}

#[test]
fn prufer_bijection_is_exhaustive_up_to_six_nodes() {
    for n in 3..=6 {
        let seqs = all_sequences(n);
        assert_eq!(seqs.len(), n.pow(n as u32 - 2));
        let mut trees = std::collections::BTreeSet::new();
        for seq in seqs {
            let tree = Tree::from_prufer(&seq).unwrap();
            assert_eq!(tree.to_prufer(), seq);
            for v in 0..n {
                assert_eq!(tree.degree(v), 1 + seq.iter().filter(|&&x| x == v).count());
            }
            let rebuilt = Tree::from_prufer(&tree.to_prufer()).unwrap();
            assert_eq!(rebuilt, tree);
            trees.insert(tree.edges().to_vec());
        }
        assert_eq!(trees.len(), n.pow(n as u32 - 2));
    }
}

fn tree_strategy() -> impl Strategy<Value = Tree> {
    (2usize..40).prop_flat_map(|n| {
        proptest::collection::vec(0..n, n.saturating_sub(2))
            .prop_map(|code| Tree::from_prufer(&code).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn path_is_symmetric_and_additive(tree in tree_strategy(), a in 0usize..1000, b in 0usize..1000, c in 0usize..1000) {
        let n = tree.n();
        let (u, v, w) = (a % n, b % n, c % n);
        let mut forward = tree.path(u, v).unwrap();
        let backward = tree.path(v, u).unwrap();
        forward.reverse();
        prop_assert_eq!(&forward, &backward);
        let d = |x, y| tree.distance(x, y).unwrap();
        prop_assert_eq!(d(u, v), backward.len());
        prop_assert!(d(u, v) <= d(u, w) + d(w, v));
        // Equality exactly when w lies on the path.
        let on_path = w == u || tree.path(u, v).unwrap().iter().any(|&e| {
            let (x, y) = tree.edge(e);
            x == w || y == w
        });
        prop_assert_eq!(on_path, d(u, v) == d(u, w) + d(w, v));
    }

    #[test]
    fn diameter_bounds(tree in tree_strategy()) {
        let n = tree.n();
        let diam = tree.diameter();
        prop_assert!(diam < n);
        let is_path = (0..n).all(|v| tree.degree(v) <= 2);
        prop_assert_eq!(is_path, diam == n - 1);
        let brute = (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).map(|(u, v)| tree.distance(u, v).unwrap()).max();
        prop_assert_eq!(Some(diam), brute);
    }

    #[test]
    fn edge_list_round_trip(tree in tree_strategy()) {
        let text: String = tree.edges().iter().map(|(u, v)| format!("{u} {v}\n")).collect();
        prop_assert_eq!(Tree::from_edge_list(&text).unwrap(), tree);
    }
}

#[test]
fn random_trees_are_roughly_uniform() {
    // 16 labeled trees on 4 nodes; each should appear about 1/16 of the time.
    let draws = 32_000;
    let mut counts = std::collections::BTreeMap::new();
    for i in 0..draws {
        let t = random_tree_prufer(4, &mut trial_rng(99, i)).unwrap();
        *counts.entry(t.edges().to_vec()).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 16);
    let expected = draws as f64 / 16.0;
    let sd = (expected * (15.0 / 16.0)).sqrt();
    for &c in counts.values() {
        assert!((c as f64 - expected).abs() < 5.0 * sd, "{c} vs {expected}");
    }
}
