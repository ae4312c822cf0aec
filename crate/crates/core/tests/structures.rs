use proptest::prelude::*;
use scottlab::corpus;
use scottlab::structures::{decode_pair, generate, is_partial_iso, isomorphic, pair_structure, FiniteStructure, GeneratorKind, PartialMap, Signature};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn iso_by_enumeration(m: &FiniteStructure, n: &FiniteStructure) -> bool {
    m.universe() == n.universe() && permutations(m.universe()).iter().any(|p| m.relabel(p).unwrap() == *n)
}

fn random_structure(seed: u64, n: usize, density: f64) -> FiniteStructure {
    let sig = Signature::new(vec![("P".into(), 1), ("E".into(), 2)]).unwrap();
    generate(&GeneratorKind::Random { seed, signature: sig, n, density }).unwrap()
}

fn random_perm(seed: u64, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut corpus::rng(seed));
    p
}

#[test]
fn pmodel_isomorphism_by_counting() {
    for n in 1..=5 {
        for p in 0..=n {
            for q in 0..=n {
                let a = generate(&GeneratorKind::PModel { n, p }).unwrap();
                let b = generate(&GeneratorKind::PModel { n, p: q }).unwrap();
                assert_eq!(isomorphic(&a, &b).unwrap().is_some(), p == q);
                assert_eq!(iso_by_enumeration(&a, &b), p == q);
            }
        }
    }
}

#[test]
fn isomorphism_is_an_equivalence_on_the_corpus() {
    let c = corpus::structure_corpus();
    let pairs = corpus::corpus_pairs(&c);
    let iso = |i: usize, j: usize| isomorphic(&c[i], &c[j]).unwrap();
    for &(i, j) in &pairs {
        if let Some(f) = iso(i, j) {
            assert_eq!(c[i].relabel(&f).unwrap(), c[j]);
            let mut inv = vec![0; f.len()];
            for (x, &y) in f.iter().enumerate() {
                inv[y] = x;
            }
            assert_eq!(c[j].relabel(&inv).unwrap(), c[i]);
            assert!(iso(j, i).is_some());
        } else {
            assert!(iso(j, i).is_none());
        }
    }
    for i in 0..c.len() {
        assert!(iso(i, i).is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn isomorphic_matches_enumeration(s1 in any::<u64>(), s2 in any::<u64>(), n in 1usize..=5, relabel in any::<bool>()) {
        let m = random_structure(s1, n, 0.4);
        let other = if relabel { m.relabel(&random_perm(s2, n)).unwrap() } else { random_structure(s2, n, 0.4) };
        let fast = isomorphic(&m, &other).unwrap();
        prop_assert_eq!(fast.is_some(), iso_by_enumeration(&m, &other));
        if relabel {
            prop_assert!(fast.is_some());
        }
    }

    #[test]
    fn isomorphism_composes(s in any::<u64>(), p1 in any::<u64>(), p2 in any::<u64>(), n in 1usize..=6) {
        let a = random_structure(s, n, 0.3);
        let b = a.relabel(&random_perm(p1, n)).unwrap();
        let c = b.relabel(&random_perm(p2, n)).unwrap();
        let f = isomorphic(&a, &b).unwrap().unwrap();
        let g = isomorphic(&b, &c).unwrap().unwrap();
        let h: Vec<usize> = f.iter().map(|&y| g[y]).collect();
        prop_assert_eq!(a.relabel(&h).unwrap(), c);
    }

    #[test]
    fn partial_iso_inverse_and_restriction(s1 in any::<u64>(), s2 in any::<u64>(), n in 1usize..=4, mask in any::<u16>(), keep in any::<u16>()) {
        let m = random_structure(s1, n, 0.5);
        let other = random_structure(s2, n, 0.5);
        let perm = random_perm(s1 ^ s2, n);
        let f = PartialMap::from_pairs((0..n).filter(|x| mask >> x & 1 == 1).map(|x| (x, perm[x]))).unwrap();
        let ok = is_partial_iso(&m, &other, &f).unwrap();
        prop_assert_eq!(ok, is_partial_iso(&other, &m, &f.inverse().unwrap()).unwrap());
        if ok {
            let g = f.restrict(|x| keep >> x & 1 == 1);
            prop_assert!(is_partial_iso(&m, &other, &g).unwrap());
        }
    }

    #[test]
    fn pair_structure_round_trip_and_invariance(s1 in any::<u64>(), s2 in any::<u64>(), p in any::<u64>(), n in 1usize..=3) {
        let m = random_structure(s1, n, 0.5);
        let other = random_structure(s2, n, 0.5);
        let a = pair_structure(&m, &other).unwrap();
        prop_assert_eq!(decode_pair(&a).unwrap(), (m.clone(), other.clone()));
        let e = a.signature().position("E").unwrap();
        for t in a.tuples(e) {
            prop_assert_eq!(t[0] % 2, t[1] % 2);
        }
        let m2 = m.relabel(&random_perm(p, n)).unwrap();
        let o2 = other.relabel(&random_perm(p.wrapping_add(1), n)).unwrap();
        let b = pair_structure(&m2, &o2).unwrap();
        prop_assert!(isomorphic(&a, &b).unwrap().is_some());
    }

    #[test]
    fn structure_json_round_trips(s in any::<u64>(), n in 1usize..=5) {
        let m = random_structure(s, n, 0.3);
        let text = m.to_json();
        let back = FiniteStructure::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back, m);
    }
}
