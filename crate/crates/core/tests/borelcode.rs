use proptest::prelude::*;
use scottlab::borelcode::{code_from_expr, expr_from_code, pad_to_canonical, strategy_enum_solve, BorelCode, PointSpace, SetExpr};
use scottlab::corpus;
use scottlab::trees;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn code_from_expr_preserves_set_and_level(seed in any::<u64>(), points in 1usize..=8) {
        let e = corpus::random_expr(&mut corpus::rng(seed), points, 4, 4);
        let c = code_from_expr(&e, &PointSpace::numbered(points).unwrap()).unwrap();
        prop_assert_eq!(c.coded_set(), e.eval());
        prop_assert!(c.tree().rank() <= e.classify().pi + 1);
    }

    #[test]
    fn expr_from_code_preserves_set_and_level(seed in any::<u64>(), points in 1usize..=8) {
        let c = corpus::random_code(&mut corpus::rng(seed), 10, points);
        let e = expr_from_code(&c);
        prop_assert_eq!(e.eval(), c.coded_set());
        prop_assert!(e.classify().pi < c.tree().rank());
    }

    #[test]
    fn coded_set_agrees_with_strategy_oracle(seed in any::<u64>(), points in 1usize..=4) {
        let c = corpus::random_code(&mut corpus::rng(seed), 10, points);
        let set = c.coded_set();
        for x in 0..points {
            prop_assert_eq!(strategy_enum_solve(&c, x).unwrap(), set.contains(x));
        }
    }

    #[test]
    fn padding_preserves_coded_set(seed in any::<u64>(), points in 1usize..=4) {
        let c = corpus::random_code(&mut corpus::rng(seed), 10, points);
        let w = c.tree().max_branching().max(1);
        let m = w * (c.tree().rank() - 1);
        let p = pad_to_canonical(&c, m, None).unwrap();
        prop_assert_eq!(p.tree(), &trees::canonical(m).unwrap());
        prop_assert_eq!(p.coded_set(), c.coded_set());
    }

    #[test]
    fn padding_into_a_larger_canonical_tree(seed in any::<u64>()) {
        let c = corpus::random_code(&mut corpus::rng(seed), 8, 3);
        let w = c.tree().max_branching().max(1);
        let m = w * (c.tree().rank() - 1) + 1;
        prop_assert_eq!(pad_to_canonical(&c, m, None).unwrap().coded_set(), c.coded_set());
    }

    #[test]
    fn code_json_round_trips(seed in any::<u64>()) {
        let c = corpus::random_code(&mut corpus::rng(seed), 10, 4);
        prop_assert_eq!(BorelCode::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn expr_json_round_trips(seed in any::<u64>()) {
        let sp = PointSpace::numbered(5).unwrap();
        let e = corpus::random_expr(&mut corpus::rng(seed), 5, 3, 3);
        prop_assert_eq!(SetExpr::from_json_value(&e.to_json_value(&sp), &sp).unwrap(), e);
    }
}

#[test]
fn padding_rejects_a_small_index_without_embedding() {
    let c = corpus::random_code(&mut corpus::rng(2), 10, 2);
    let t = c.tree();
    if t.rank() > 1 {
        let m = t.max_branching() * (t.rank() - 1) - 1;
        assert!(pad_to_canonical(&c, m, None).is_err());
    }
}
