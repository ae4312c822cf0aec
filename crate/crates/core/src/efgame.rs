//! Ehrenfeucht-Fraisse games with set moves along a well-founded tree.
//!
//! Player I starts at the root of the tree. Each round I moves to a child
//! `p` of the current node and enlarges the constraint set to some `C`, and II
//! extends its partial map to some `f` with `C` inside `dom(f) ∩ ran(f)`. Both
//! are cumulative and capped: `|C| <= b`, `|dom(f)| <= d`. When I reaches a
//! leaf, II wins iff `f` is a partial isomorphism. If II has no legal
//! extension, I wins.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::structures::{self, decode_pair, pair_structure, FiniteStructure, PartialMap};
use crate::trees::{self, WellFoundedTree};

/// Default bound on distinct positions memoized by [`ef_winner`].
pub const DEFAULT_POSITION_BUDGET: u64 = 2_000_000;

/// Largest universe [`ef_winner`] handles (maps are packed four bits per
/// element).
pub const MAX_SOLVER_UNIVERSE: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    I,
    II,
}

impl Player {
    pub fn as_str(self) -> &'static str {
        match self {
            Player::I => "I",
            Player::II => "II",
        }
    }

    fn from_ii(ii_wins: bool) -> Self {
        if ii_wins {
            Player::II
        } else {
            Player::I
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A game tree with caps `b` on constraint sets and `d` on map domains.
///
/// Against structures with `n` elements the caps must satisfy
/// `1 <= b <= d <= n` and `d >= min(2b, n)`. The last condition keeps
/// isomorphic structures II-wins: II must cover a demanded set both as
/// domain and as range, which can take `2b` points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfConfig {
    pub tree: WellFoundedTree,
    pub cap_c: usize,
    pub cap_f: usize,
}

impl EfConfig {
    pub fn new(tree: WellFoundedTree, cap_c: usize, cap_f: usize) -> Result<Self> {
        if cap_c == 0 {
            return Err(Error::Precondition("cap-c must be positive".into()));
        }
        if cap_c > cap_f {
            return Err(Error::Precondition(format!(
                "cap-c {cap_c} exceeds cap-f {cap_f}: II could never cover a maximal demand"
            )));
        }
        Ok(EfConfig { tree, cap_c, cap_f })
    }

    pub fn alpha(alpha: usize, cap_c: usize, cap_f: usize) -> Result<Self> {
        Self::new(trees::canonical(alpha)?, cap_c, cap_f)
    }

    /// Checks the caps against a universe size.
    pub fn check_universe(&self, n: usize) -> Result<()> {
        if self.cap_f > n {
            return Err(Error::Precondition(format!("cap-f {} exceeds universe size {n}", self.cap_f)));
        }
        if self.cap_f < (2 * self.cap_c).min(n) {
            return Err(Error::Precondition(format!(
                "cap-f {} is below min(2 * cap-c, universe) = {}",
                self.cap_f,
                (2 * self.cap_c).min(n)
            )));
        }
        Ok(())
    }

    pub fn is_valid_for(&self, n: usize) -> bool {
        self.check_universe(n).is_ok()
    }

    /// All cap pairs valid for universe `n` with both caps at most `max_cap`.
    pub fn valid_caps(n: usize, max_cap: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for b in 1..=max_cap.min(n) {
            for d in b..=max_cap.min(n) {
                if d >= (2 * b).min(n) {
                    out.push((b, d));
                }
            }
        }
        out
    }
}

fn check_pair(m: &FiniteStructure, n: &FiniteStructure, cfg: &EfConfig) -> Result<()> {
    if m.signature() != n.signature() {
        return Err(Error::Precondition("structures have different signatures".into()));
    }
    if m.universe() != n.universe() {
        return Err(Error::Precondition(format!(
            "universe sizes differ: {} and {}",
            m.universe(),
            n.universe()
        )));
    }
    cfg.check_universe(m.universe())
}

/// A position of a play: the last node I moved to (the root before the
/// first move), the cumulative demand, II's map so far, and who moves next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfPosition {
    pub node: usize,
    pub constraint: BTreeSet<usize>,
    pub map: PartialMap,
    pub to_move: Player,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EfOutcome {
    pub winner: Player,
    pub positions_explored: u64,
}

/// Interns cone shapes so that nodes with isomorphic cones share memo
/// entries. Returns, per shape, its distinct child shapes, and the root's
/// shape.
pub(crate) fn shape_dag(t: &WellFoundedTree) -> (Vec<Vec<u32>>, u32) {
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut kids_of: Vec<Vec<u32>> = Vec::new();
    let mut shape = vec![0u32; t.len()];
    for v in t.preorder().into_iter().rev() {
        let mut key: Vec<u32> = t.children(v).iter().map(|&c| shape[c]).collect();
        key.sort_unstable();
        let next = ids.len() as u32;
        let id = *ids.entry(key.clone()).or_insert_with(|| {
            key.dedup();
            kids_of.push(key);
            next
        });
        shape[v] = id;
    }
    (kids_of, shape[t.root()])
}

/// Subsets of `0..k` containing `base`, of size at most `cap`, in increasing
/// mask order.
pub(crate) fn supersets(base: u16, k: usize, cap: usize) -> impl Iterator<Item = u16> {
    let free = !base & ((1u32 << k) - 1) as u16;
    let room = cap.saturating_sub(base.count_ones() as usize);
    let mut sub: u16 = 0;
    let mut done = false;
    std::iter::from_fn(move || loop {
        if done {
            return None;
        }
        let cur = sub;
        // next submask of `free` in increasing order
        sub = sub.wrapping_sub(free) & free;
        if sub == 0 {
            done = true;
        }
        if (cur.count_ones() as usize) <= room {
            return Some(base | cur);
        }
    })
}

struct Solver<'a> {
    m: &'a FiniteStructure,
    n: &'a FiniteStructure,
    k: usize,
    b: usize,
    d: usize,
    shapes: Vec<Vec<u32>>,
    memo: HashMap<(u32, u16, u64), bool>,
    explored: u64,
    budget: u64,
}

pub(crate) fn pack(map: &[Option<usize>]) -> u64 {
    map.iter()
        .enumerate()
        .fold(0u64, |acc, (x, y)| acc | y.map_or(0, |y| (y as u64 + 1) << (4 * x)))
}

pub(crate) fn unpack(f: u64, k: usize) -> Vec<Option<usize>> {
    (0..k)
        .map(|x| match (f >> (4 * x)) & 0xf {
            0 => None,
            y => Some(y as usize - 1),
        })
        .collect()
}

impl Solver<'_> {
    /// II wins from a position where I is to move at a node of this shape.
    /// `f` is always a partial isomorphism here.
    fn ii_wins(&mut self, shape: u32, c: u16, f: u64) -> Result<bool> {
        if self.shapes[shape as usize].is_empty() {
            return Ok(true);
        }
        if let Some(&w) = self.memo.get(&(shape, c, f)) {
            return Ok(w);
        }
        self.explored += 1;
        if self.explored > self.budget {
            return Err(Error::budget("game position", self.explored as u128, self.budget as u128));
        }
        let mut result = true;
        'children: for i in 0..self.shapes[shape as usize].len() {
            let child = self.shapes[shape as usize][i];
            let last_round = self.shapes[child as usize].is_empty();
            let full = self.b.min(self.k);
            for c2 in supersets(c, self.k, self.b) {
                // at the last round a larger demand is never worse for I
                if last_round && (c2.count_ones() as usize) < full {
                    continue;
                }
                if !self.ii_responds(child, c2, f)? {
                    result = false;
                    break 'children;
                }
            }
        }
        self.memo.insert((shape, c, f), result);
        Ok(result)
    }

    fn ii_responds(&mut self, shape: u32, c: u16, f: u64) -> Result<bool> {
        let dense = unpack(f, self.k);
        let mut ran = 0u16;
        for y in dense.iter().flatten() {
            ran |= 1 << y;
        }
        let need_dom: Vec<usize> = (0..self.k).filter(|&x| c >> x & 1 == 1 && dense[x].is_none()).collect();
        let mut map = dense;
        self.extend_dom(shape, c, &need_dom, 0, &mut map, ran)
    }

    // Only pairs needed for the demand are added: dropping any other pair
    // from a response leaves a legal response that is at least as good for II.
    fn extend_dom(
        &mut self,
        shape: u32,
        c: u16,
        need: &[usize],
        i: usize,
        map: &mut Vec<Option<usize>>,
        ran: u16,
    ) -> Result<bool> {
        if i == need.len() {
            let need_ran: Vec<usize> = (0..self.k).filter(|&y| c >> y & 1 == 1 && ran >> y & 1 == 0).collect();
            return self.extend_ran(shape, c, &need_ran, 0, map);
        }
        let x = need[i];
        for y in 0..self.k {
            if ran >> y & 1 == 1 {
                continue;
            }
            map[x] = Some(y);
            if self.fits(map) && structures::partial_iso_dense(self.m, self.n, map) {
                let won = self.extend_dom(shape, c, need, i + 1, map, ran | 1 << y)?;
                if won {
                    map[x] = None;
                    return Ok(true);
                }
            }
            map[x] = None;
        }
        Ok(false)
    }

    fn extend_ran(
        &mut self,
        shape: u32,
        c: u16,
        need: &[usize],
        i: usize,
        map: &mut Vec<Option<usize>>,
    ) -> Result<bool> {
        if i == need.len() {
            return self.ii_wins(shape, c, pack(map));
        }
        let y = need[i];
        for x in 0..self.k {
            if map[x].is_some() {
                continue;
            }
            map[x] = Some(y);
            if self.fits(map) && structures::partial_iso_dense(self.m, self.n, map) {
                let won = self.extend_ran(shape, c, need, i + 1, map)?;
                if won {
                    map[x] = None;
                    return Ok(true);
                }
            }
            map[x] = None;
        }
        Ok(false)
    }

    fn fits(&self, map: &[Option<usize>]) -> bool {
        map.iter().filter(|y| y.is_some()).count() <= self.d
    }
}

/// Solves the game by memoized backward induction.
pub fn ef_winner(m: &FiniteStructure, n: &FiniteStructure, cfg: &EfConfig) -> Result<Player> {
    ef_solve(m, n, cfg, DEFAULT_POSITION_BUDGET).map(|o| o.winner)
}

/// [`ef_winner`] with an explicit position budget, also reporting how many
/// positions were memoized.
pub fn ef_solve(m: &FiniteStructure, n: &FiniteStructure, cfg: &EfConfig, budget: u64) -> Result<EfOutcome> {
    check_pair(m, n, cfg)?;
    let k = m.universe();
    if k > MAX_SOLVER_UNIVERSE {
        return Err(Error::budget("solver universe", k as u128, MAX_SOLVER_UNIVERSE as u128));
    }
    let (shapes, root) = shape_dag(&cfg.tree);
    let mut s = Solver {
        m,
        n,
        k,
        b: cfg.cap_c,
        d: cfg.cap_f,
        shapes,
        memo: HashMap::new(),
        explored: 0,
        budget,
    };
    let ii = s.ii_wins(root, 0, 0)?;
    Ok(EfOutcome {
        winner: Player::from_ii(ii),
        positions_explored: s.explored,
    })
}

/// The game along the canonical tree of index `alpha`.
pub fn ef_alpha(m: &FiniteStructure, n: &FiniteStructure, alpha: usize, cap_c: usize, cap_f: usize) -> Result<Player> {
    ef_winner(m, n, &EfConfig::alpha(alpha, cap_c, cap_f)?)
}

/// Oracle budget for [`ef_winner_brute`].
pub const BRUTE_MAX_UNIVERSE: usize = 4;
pub const BRUTE_MAX_RANK: usize = 3;
pub const BRUTE_MAX_CAP: usize = 2;

/// Exhaustive and-or search over complete play histories: I tries every
/// child and every admissible constraint set, II every partial function
/// (isomorphism or not) meeting the caps. No memoization and no pruning,
/// with its own partial-isomorphism test.
pub fn ef_winner_brute(m: &FiniteStructure, n: &FiniteStructure, cfg: &EfConfig) -> Result<Player> {
    check_pair(m, n, cfg)?;
    let k = m.universe();
    let rank = cfg.tree.rank();
    if k > BRUTE_MAX_UNIVERSE {
        return Err(Error::budget("oracle universe", k as u128, BRUTE_MAX_UNIVERSE as u128));
    }
    if rank > BRUTE_MAX_RANK {
        return Err(Error::budget("oracle tree rank", rank as u128, BRUTE_MAX_RANK as u128));
    }
    if cfg.cap_f > BRUTE_MAX_CAP {
        return Err(Error::budget("oracle cap", cfg.cap_f as u128, BRUTE_MAX_CAP as u128));
    }
    let all_maps = all_partial_functions(k);
    let brute = Brute { m, n, cfg, k, all_maps };
    Ok(Player::from_ii(brute.ii_wins(cfg.tree.root(), &BTreeSet::new(), &BTreeMap::new())))
}

struct Brute<'a> {
    m: &'a FiniteStructure,
    n: &'a FiniteStructure,
    cfg: &'a EfConfig,
    k: usize,
    all_maps: Vec<BTreeMap<usize, usize>>,
}

impl Brute<'_> {
    fn ii_wins(&self, node: usize, c: &BTreeSet<usize>, f: &BTreeMap<usize, usize>) -> bool {
        let t = &self.cfg.tree;
        if t.is_leaf(node) {
            return naive_partial_iso(self.m, self.n, f);
        }
        t.children(node).iter().all(|&child| {
            self.demands(c).iter().all(|c2| {
                self.all_maps.iter().any(|g| {
                    g.len() <= self.cfg.cap_f
                        && f.iter().all(|(x, y)| g.get(x) == Some(y))
                        && c2.iter().all(|z| g.contains_key(z) && g.values().any(|v| v == z))
                        && self.ii_wins(child, c2, g)
                })
            })
        })
    }

    fn demands(&self, c: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
        let mut out = vec![c.clone()];
        for z in 0..self.k {
            if c.contains(&z) {
                continue;
            }
            let grown: Vec<BTreeSet<usize>> = out
                .iter()
                .filter(|s| s.len() < self.cfg.cap_c)
                .map(|s| {
                    let mut s = s.clone();
                    s.insert(z);
                    s
                })
                .collect();
            out.extend(grown);
        }
        out
    }
}

fn all_partial_functions(k: usize) -> Vec<BTreeMap<usize, usize>> {
    let mut out = vec![BTreeMap::new()];
    for x in 0..k {
        let mut next = Vec::with_capacity(out.len() * (k + 1));
        for g in &out {
            next.push(g.clone());
            for y in 0..k {
                let mut h = g.clone();
                h.insert(x, y);
                next.push(h);
            }
        }
        out = next;
    }
    out
}

fn naive_partial_iso(m: &FiniteStructure, n: &FiniteStructure, f: &BTreeMap<usize, usize>) -> bool {
    let ran: BTreeSet<usize> = f.values().copied().collect();
    if ran.len() != f.len() {
        return false;
    }
    let dom: Vec<usize> = f.keys().copied().collect();
    let sig = m.signature();
    for r in 0..sig.len() {
        let left: BTreeSet<Vec<usize>> = m.tuples(r).map(<[usize]>::to_vec).collect();
        let right: BTreeSet<Vec<usize>> = n.tuples(r).map(<[usize]>::to_vec).collect();
        let arity = sig.arity(r);
        let mut idx = vec![0usize; arity];
        if dom.is_empty() {
            continue;
        }
        loop {
            let t: Vec<usize> = idx.iter().map(|&i| dom[i]).collect();
            let image: Vec<usize> = t.iter().map(|x| f[x]).collect();
            if left.contains(&t) != right.contains(&image) {
                return false;
            }
            let mut j = 0;
            while j < arity {
                idx[j] += 1;
                if idx[j] < dom.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == arity {
                break;
            }
        }
    }
    true
}

/// Caps for the game on pair structures: the demand cap stays, the map cap
/// doubles, since a combined map is the union of one map per half.
pub fn pair_config(cfg: &EfConfig) -> Result<EfConfig> {
    EfConfig::new(cfg.tree.clone(), cfg.cap_c, 2 * cfg.cap_f)
}

/// Both caps doubled.
pub fn doubled_config(cfg: &EfConfig) -> Result<EfConfig> {
    EfConfig::new(cfg.tree.clone(), 2 * cfg.cap_c, 2 * cfg.cap_f)
}

/// Outcome of the strategy-combination check on one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Combination {
    /// II wins both the game on `(m, m)` and on `(m, n)`.
    pub premise: bool,
    /// Winner on the pair structures, when the premise holds.
    pub combined: Option<Player>,
}

/// If II wins on `(m, m)` and on `(m, n)`, solves the game on
/// `(pair(m, m), pair(m, n))` with the caps from `lift`.
pub fn combination_check(
    m: &FiniteStructure,
    n: &FiniteStructure,
    cfg: &EfConfig,
    lift: impl Fn(&EfConfig) -> Result<EfConfig>,
) -> Result<Combination> {
    let premise = ef_winner(m, m, cfg)? == Player::II && ef_winner(m, n, cfg)? == Player::II;
    if !premise {
        return Ok(Combination {
            premise,
            combined: None,
        });
    }
    let a = pair_structure(m, m)?;
    let b = pair_structure(m, n)?;
    debug_assert_eq!(decode_pair(&b)?, (m.clone(), n.clone()));
    Ok(Combination {
        premise,
        combined: Some(ef_winner(&a, &b, &lift(cfg)?)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{generate, GeneratorKind, Signature};

    fn pmodel(n: usize, p: usize) -> FiniteStructure {
        generate(&GeneratorKind::PModel { n, p }).unwrap()
    }

    #[test]
    fn config_validation() {
        let t = trees::canonical(1).unwrap();
        assert!(EfConfig::new(t.clone(), 0, 1).is_err());
        assert!(EfConfig::new(t.clone(), 2, 1).is_err());
        let cfg = EfConfig::new(t.clone(), 1, 1).unwrap();
        assert!(cfg.is_valid_for(1) && !cfg.is_valid_for(2));
        assert!(!EfConfig::new(t.clone(), 2, 3).unwrap().is_valid_for(2));
        assert_eq!(EfConfig::valid_caps(3, 2), vec![(1, 2)]);
        assert_eq!(EfConfig::valid_caps(2, 2), vec![(1, 2), (2, 2)]);
        assert_eq!(EfConfig::valid_caps(4, 4), vec![(1, 2), (1, 3), (1, 4), (2, 4), (3, 4), (4, 4)]);
    }

    #[test]
    fn tight_caps_break_isomorphism_soundness() {
        // With d < 2b, II cannot cover a demanded point as domain and range
        // at once unless it fixes it; fixing 0 fails against the swap.
        let m = FiniteStructure::new(Signature::unary("P"), 2, vec![vec![vec![0]]]).unwrap();
        let n = FiniteStructure::new(Signature::unary("P"), 2, vec![vec![vec![1]]]).unwrap();
        assert!(structures::isomorphic(&m, &n).unwrap().is_some());
        let cfg = EfConfig::new(trees::canonical(1).unwrap(), 1, 1).unwrap();
        assert!(cfg.check_universe(2).is_err());
        let with_room = EfConfig::new(trees::canonical(1).unwrap(), 1, 2).unwrap();
        assert_eq!(ef_winner(&m, &n, &with_room).unwrap(), Player::II);
    }

    #[test]
    fn supersets_respect_cap() {
        let all: Vec<u16> = supersets(0b001, 3, 2).collect();
        assert_eq!(all, vec![0b001, 0b011, 0b101]);
        assert_eq!(supersets(0, 2, 2).count(), 4);
        assert_eq!(supersets(0b11, 2, 2).collect::<Vec<_>>(), vec![0b11]);
    }

    #[test]
    fn shapes_merge_isomorphic_cones() {
        let (shapes, root) = shape_dag(&trees::canonical(4).unwrap());
        assert_eq!(shapes.len(), 5);
        assert_eq!(shapes[root as usize].len(), 4);
    }

    #[test]
    fn rank_one_tree_is_ii_win() {
        let cfg = EfConfig::alpha(0, 1, 2).unwrap();
        let o = ef_solve(&pmodel(3, 0), &pmodel(3, 3), &cfg, 10).unwrap();
        assert_eq!(o.winner, Player::II);
        assert_eq!(ef_winner_brute(&pmodel(3, 0), &pmodel(3, 3), &cfg).unwrap(), Player::II);
    }

    #[test]
    fn full_caps_one_round_separates_pmodels() {
        let cfg = EfConfig::alpha(1, 4, 4).unwrap();
        assert_eq!(ef_winner(&pmodel(4, 1), &pmodel(4, 2), &cfg).unwrap(), Player::I);
        assert_eq!(ef_winner(&pmodel(4, 2), &pmodel(4, 2), &cfg).unwrap(), Player::II);
    }

    #[test]
    fn budget_is_reported() {
        let cfg = EfConfig::alpha(2, 2, 4).unwrap();
        let full = ef_solve(&pmodel(4, 2), &pmodel(4, 2), &cfg, u64::MAX).unwrap();
        assert!(full.positions_explored > 1);
        let e = ef_solve(&pmodel(4, 2), &pmodel(4, 2), &cfg, 1).unwrap_err();
        assert!(e.is_resource());
        let oracle = EfConfig::alpha(3, 1, 2).unwrap();
        assert!(ef_winner_brute(&pmodel(3, 1), &pmodel(3, 2), &oracle).unwrap_err().is_resource());
    }

    #[test]
    fn mismatched_structures_are_rejected() {
        let cfg = EfConfig::alpha(1, 1, 2).unwrap();
        assert!(ef_winner(&pmodel(2, 1), &pmodel(3, 1), &cfg).is_err());
        let g = FiniteStructure::new(Signature::binary("E"), 2, vec![vec![]]).unwrap();
        assert!(ef_winner(&pmodel(2, 1), &g, &cfg).is_err());
    }

    #[test]
    fn solver_matches_oracle_on_small_pmodels() {
        for t in [trees::canonical(1).unwrap(), trees::canonical(2).unwrap()] {
            for (b, d) in EfConfig::valid_caps(3, 2) {
                let cfg = EfConfig::new(t.clone(), b, d).unwrap();
                for p in 0..=3 {
                    for q in 0..=3 {
                        let (m, n) = (pmodel(3, p), pmodel(3, q));
                        assert_eq!(
                            ef_winner(&m, &n, &cfg).unwrap(),
                            ef_winner_brute(&m, &n, &cfg).unwrap(),
                            "p={p} q={q} caps=({b},{d}) rank={}",
                            t.rank()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn naive_check_agrees_with_fast_check() {
        let m = pmodel(3, 1);
        let n = pmodel(3, 2);
        for g in all_partial_functions(3) {
            let pm = PartialMap::from_pairs(g.clone()).unwrap();
            assert_eq!(naive_partial_iso(&m, &n, &g), structures::is_partial_iso(&m, &n, &pm).unwrap());
        }
        assert_eq!(all_partial_functions(3).len(), 64);
    }
}
