use proptest::prelude::*;
use scottlab::corpus;
use scottlab::trees::{
    self, brute_force_embed, embed, embed_with_budget, embedding_sequences, validate_sequences, witness_tree, EmbeddingViolation,
    SearchBudget, TreeEmbedding, WellFoundedTree, Width,
};

#[test]
fn canonical_rank_law() {
    for m in 0..=12 {
        assert_eq!(trees::canonical(m).unwrap().rank(), m + 1);
    }
}

#[test]
fn canonical_size_is_power_of_two() {
    for m in 0..=10 {
        assert_eq!(trees::canonical(m).unwrap().len(), 1 << m);
    }
}

#[test]
fn witness_lower_bound_small() {
    let budget = SearchBudget::default();
    for w in 1..=3 {
        for beta in 0..=2 {
            let t = witness_tree(Width::new(w).unwrap(), beta).unwrap();
            for alpha in 0..w * beta {
                let dst = trees::canonical(alpha).unwrap();
                assert!(brute_force_embed(&t, &dst, budget).unwrap().is_none(), "w={w} beta={beta} alpha={alpha}");
            }
            let dst = trees::canonical(w * beta).unwrap();
            let e = brute_force_embed(&t, &dst, budget).unwrap().expect("fits at w*beta");
            assert!(e.validate(false).is_ok());
        }
    }
}

#[test]
fn brute_force_agrees_with_constructive_embedding() {
    let mut r = corpus::rng(11);
    for _ in 0..40 {
        let t = corpus::random_tree(&mut r, 10, 2);
        let beta = t.rank() - 1;
        let dst = trees::canonical(2 * beta).unwrap();
        assert!(brute_force_embed(&t, &dst, SearchBudget::default()).unwrap().is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedding_is_strong(seed in any::<u64>(), w in 2usize..=3) {
        // the target has 2^(w*beta) nodes, so keep w*beta <= 18
        let t = corpus::random_tree_of_rank(&mut corpus::rng(seed), 30, w, 18 / w + 1);
        let e = embed_with_budget(&t, Width::new(w).unwrap(), 1 << 18).unwrap();
        prop_assert_eq!(e.target().rank(), w * (t.rank() - 1) + 1);
        prop_assert!(e.validate(true).is_ok());
    }

    #[test]
    fn tree_json_round_trips(seed in any::<u64>()) {
        let t = corpus::random_tree(&mut corpus::rng(seed), 20, 3);
        prop_assert_eq!(WellFoundedTree::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn embedding_json_round_trips(seed in any::<u64>()) {
        let t = corpus::random_tree(&mut corpus::rng(seed), 12, 2);
        let e = embed(&t, Width::new(2).unwrap()).unwrap();
        let back = TreeEmbedding::from_json(&e.to_json(), e.source().clone(), e.target().clone()).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn rank_is_one_plus_root_rank(seed in any::<u64>()) {
        let t = corpus::random_tree(&mut corpus::rng(seed), 25, 3);
        let ranks = t.node_ranks();
        prop_assert_eq!(t.rank(), ranks[t.root()] + 1);
        for v in 0..t.len() {
            let expect = t.children(v).iter().map(|&c| ranks[c] + 1).max().unwrap_or(0);
            prop_assert_eq!(ranks[v], expect);
        }
    }
}

#[test]
fn sequence_check_agrees_with_materialized_check() {
    let mut r = corpus::rng(21);
    for _ in 0..60 {
        let t = corpus::random_tree_of_rank(&mut r, 14, 2, 6);
        let e = embed(&t, Width::new(2).unwrap()).unwrap();
        let canon = trees::CanonicalTree::new(2 * (t.rank() - 1)).unwrap();
        let seqs: Vec<Vec<usize>> = e.map().iter().map(|&d| canon.sequence(d).to_vec()).collect();
        assert_eq!(seqs, embedding_sequences(&t, 2, &t.node_ranks()));
        for strong in [false, true] {
            assert_eq!(validate_sequences(&t, canon.index(), &seqs, strong), e.validate(strong));
        }
    }
}

#[test]
fn sequence_check_rejects_bad_maps() {
    let t = WellFoundedTree::from_parents(vec![None, Some(0), Some(1)]).unwrap();
    let ok = vec![vec![], vec![1], vec![1, 0]];
    assert!(validate_sequences(&t, 2, &ok, true).is_ok());
    // skips a level: order embedding, but not strong
    let gap = vec![vec![], vec![2], vec![2, 1, 0]];
    assert!(validate_sequences(&t, 3, &gap, false).is_ok());
    assert_eq!(validate_sequences(&t, 3, &gap, true), Err(EmbeddingViolation::NotInitialSegmentClosed { node: 2 }));
    let flat = vec![vec![], vec![1], vec![0]];
    assert_eq!(validate_sequences(&t, 2, &flat, false), Err(EmbeddingViolation::NotOrderPreserving { lower: 1, upper: 2 }));
    assert!(validate_sequences(&t, 1, &ok, false).is_err());
}

#[test]
fn tall_trees_embed_symbolically() {
    let path = WellFoundedTree::from_parents((0..30usize).map(|v| v.checked_sub(1)).collect()).unwrap();
    let seqs = embedding_sequences(&path, 3, &path.node_ranks());
    assert!(validate_sequences(&path, 3 * 29, &seqs, true).is_ok());
}
