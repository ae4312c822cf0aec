//! Seeded generators for the small inputs the property suites run on.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::borelcode::{BorelCode, PointSet, PointSpace, SetExpr};
use crate::efgame::EfConfig;
use crate::structures::{generate, FiniteStructure, GeneratorKind, Signature};
use crate::trees::WellFoundedTree;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random tree with `1..=max_size` nodes and branching at most
/// `max_branching`. Each new node hangs under a uniformly chosen node that
/// still has room.
pub fn random_tree<R: Rng>(rng: &mut R, max_size: usize, max_branching: usize) -> WellFoundedTree {
    let size = rng.gen_range(1..=max_size.max(1));
    let mut parents = vec![None];
    let mut kids = vec![0usize];
    for v in 1..size {
        let open: Vec<usize> = (0..v).filter(|&u| kids[u] < max_branching).collect();
        let Some(&p) = open.choose(rng) else { break };
        parents.push(Some(p));
        kids[p] += 1;
        kids.push(0);
    }
    WellFoundedTree::from_parents(parents).expect("parents precede children")
}

/// A random tree whose rank is at most `max_rank`.
pub fn random_tree_of_rank<R: Rng>(rng: &mut R, max_size: usize, max_branching: usize, max_rank: usize) -> WellFoundedTree {
    loop {
        let t = random_tree(rng, max_size, max_branching);
        if t.rank() <= max_rank {
            return t;
        }
    }
}

/// A random subset of the nodes closed under predecessors, as a subtree with
/// its inclusion map.
pub fn random_initial_segment<R: Rng>(rng: &mut R, t: &WellFoundedTree) -> (WellFoundedTree, Vec<usize>) {
    let mut keep = vec![false; t.len()];
    for v in t.preorder() {
        keep[v] = match t.parent(v) {
            None => true,
            Some(p) => keep[p] && rng.gen_bool(0.6),
        };
    }
    t.restrict(&keep).expect("closed under predecessors")
}

pub fn random_set<R: Rng>(rng: &mut R, n: usize) -> PointSet {
    PointSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.5)))
}

pub fn random_code<R: Rng>(rng: &mut R, max_size: usize, points: usize) -> BorelCode {
    let t = random_tree(rng, max_size, 3);
    let labels = t.leaves().map(|v| (v, random_set(rng, points))).collect();
    BorelCode::new(t, PointSpace::numbered(points).expect("non-empty"), labels).expect("every leaf labelled")
}

pub fn random_expr<R: Rng>(rng: &mut R, points: usize, depth: usize, fan_out: usize) -> SetExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return SetExpr::Base(random_set(rng, points));
    }
    let args = (0..rng.gen_range(1..=fan_out))
        .map(|_| random_expr(rng, points, depth - 1, fan_out))
        .collect();
    if rng.gen_bool(0.5) {
        SetExpr::Union(args)
    } else {
        SetExpr::Intersect(args)
    }
}

/// Hand-picked trees of rank at most 3.
pub fn small_trees() -> Vec<WellFoundedTree> {
    let t = |p: Vec<Option<usize>>| WellFoundedTree::from_parents(p).expect("valid tree");
    vec![
        WellFoundedTree::singleton(),
        t(vec![None, Some(0)]),
        t(vec![None, Some(0), Some(0)]),
        t(vec![None, Some(0), Some(1)]),
        t(vec![None, Some(0), Some(0), Some(2)]),
        t(vec![None, Some(0), Some(1), Some(1)]),
    ]
}

fn unary(n: usize, mask: u32) -> FiniteStructure {
    FiniteStructure::new(
        Signature::unary("P"),
        n,
        vec![(0..n).filter(|x| mask >> x & 1 == 1).map(|x| vec![x]).collect()],
    )
    .expect("in range")
}

fn digraph(n: usize, mask: u32) -> FiniteStructure {
    FiniteStructure::new(
        Signature::binary("E"),
        n,
        vec![(0..n * n).filter(|i| mask >> i & 1 == 1).map(|i| vec![i / n, i % n]).collect()],
    )
    .expect("in range")
}

/// Structures on at most three elements: every unary structure, every
/// digraph on one or two elements, and a fixed sample of twelve three-element
/// digraphs.
pub fn structure_corpus() -> Vec<FiniteStructure> {
    let mut out = Vec::new();
    for n in 1..=3 {
        out.extend((0..1u32 << n).map(|m| unary(n, m)));
    }
    for n in 1..=2 {
        out.extend((0..1u32 << (n * n)).map(|m| digraph(n, m)));
    }
    let mut r = rng(3);
    for _ in 0..12 {
        let kind = GeneratorKind::Random {
            seed: r.gen(),
            signature: Signature::binary("E"),
            n: 3,
            density: 0.4,
        };
        out.push(generate(&kind).expect("valid parameters"));
    }
    out
}

/// Ordered pairs of corpus members sharing signature and universe.
pub fn corpus_pairs(corpus: &[FiniteStructure]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, m) in corpus.iter().enumerate() {
        for (j, n) in corpus.iter().enumerate() {
            if m.signature() == n.signature() && m.universe() == n.universe() {
                out.push((i, j));
            }
        }
    }
    out
}

/// Every game configuration from [`small_trees`] with both caps at most 2
/// that is valid for a universe of `n` elements.
pub fn small_configs(n: usize) -> Vec<EfConfig> {
    let mut out = Vec::new();
    for t in small_trees() {
        for (b, d) in EfConfig::valid_caps(n, 2) {
            out.push(EfConfig::new(t.clone(), b, d).expect("b <= d"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = random_tree(&mut rng(5), 30, 3);
        let b = random_tree(&mut rng(5), 30, 3);
        assert_eq!(a, b);
        assert!(a.max_branching() <= 3 && a.len() <= 30);
        assert_eq!(structure_corpus(), structure_corpus());
    }

    #[test]
    fn initial_segments_are_closed() {
        let mut r = rng(8);
        for _ in 0..50 {
            let t = random_tree(&mut r, 12, 3);
            let (s, inc) = random_initial_segment(&mut r, &t);
            assert_eq!(inc[s.root()], t.root());
            for v in 0..s.len() {
                if let Some(p) = s.parent(v) {
                    assert_eq!(t.parent(inc[v]), Some(inc[p]));
                }
            }
        }
    }

    #[test]
    fn corpus_sizes() {
        let c = structure_corpus();
        assert_eq!(c.len(), 14 + 2 + 16 + 12);
        assert!(small_trees().iter().all(|t| t.rank() <= 3));
        assert_eq!(small_configs(3).len(), 6);
    }
}
