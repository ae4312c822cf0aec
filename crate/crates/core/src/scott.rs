//! Scott heights of finite classes, run trees of EF games and the Borel code
//! they carry for the isomorphism relation.

use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Value};

use crate::borelcode::{expr_from_code, BorelCode, PointSet, PointSpace};
use crate::efgame::{self, pack, supersets, unpack, EfConfig, EfPosition, Player, DEFAULT_POSITION_BUDGET};
use crate::error::{Error, Result};
use crate::structures::{self, isomorphic, FiniteStructure, PartialMap};
use crate::trees::{self, WellFoundedTree};

/// Default bound on run-tree nodes.
pub const DEFAULT_RUN_BUDGET: u64 = 2_000_000;

/// Default search bound for Scott heights on a universe of `n` elements.
///
/// Full caps settle every pair within one round, and small caps often never
/// settle at all; two extra levels past the universe size leave room for the
/// cases in between without making the search expensive.
pub fn default_max_height(universe: usize) -> usize {
    universe + 2
}

/// A finite list of named structures plus the game caps. Membership is up to
/// isomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureClass {
    members: Vec<(String, FiniteStructure)>,
    cap_c: usize,
    cap_f: usize,
}

impl StructureClass {
    pub fn new(members: Vec<(String, FiniteStructure)>, cap_c: usize, cap_f: usize) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::Precondition("a class needs at least one member".into()));
        };
        for (name, s) in &members {
            if s.signature() != first.signature() || s.universe() != first.universe() {
                return Err(Error::Precondition(format!(
                    "member {name:?} differs from the first member in signature or universe"
                )));
            }
            if name.contains('|') {
                return Err(Error::Precondition(format!("member name {name:?} contains '|'")));
            }
        }
        let mut names: Vec<&str> = members.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("member names must be distinct".into()));
        }
        EfConfig::new(WellFoundedTree::singleton(), cap_c, cap_f)?.check_universe(first.universe())?;
        Ok(StructureClass {
            members,
            cap_c,
            cap_f,
        })
    }

    /// Members named `m0`, `m1`, ...
    pub fn unnamed(members: Vec<FiniteStructure>, cap_c: usize, cap_f: usize) -> Result<Self> {
        Self::new(
            members.into_iter().enumerate().map(|(i, s)| (format!("m{i}"), s)).collect(),
            cap_c,
            cap_f,
        )
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize) -> &FiniteStructure {
        &self.members[i].1
    }

    pub fn name(&self, i: usize) -> &str {
        &self.members[i].0
    }

    pub fn universe(&self) -> usize {
        self.members[0].1.universe()
    }

    pub fn caps(&self) -> (usize, usize) {
        (self.cap_c, self.cap_f)
    }

    pub fn config(&self, tree: WellFoundedTree) -> Result<EfConfig> {
        EfConfig::new(tree, self.cap_c, self.cap_f)
    }

    /// `iso[i][j]` iff members `i` and `j` are isomorphic.
    pub fn iso_relation(&self) -> Result<Vec<Vec<bool>>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Ok(i == j || isomorphic(self.member(i), self.member(j))?.is_some()))
                    .collect()
            })
            .collect()
    }

    /// The point space of ordered pairs of members, row-major.
    pub fn pair_space(&self) -> PointSpace {
        let labels = (0..self.len())
            .flat_map(|i| (0..self.len()).map(move |j| (i, j)))
            .map(|(i, j)| format!("{}|{}", self.name(i), self.name(j)))
            .collect();
        PointSpace::new(labels).expect("member names are distinct and '|'-free")
    }
}

fn map_pairs<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Least `alpha <= max` at which I wins the game on `T_alpha`, if any. II
/// winning on `T_alpha` implies II winning on every smaller index, so the
/// first I-win settles every larger index too.
fn separation_index(
    m: &FiniteStructure,
    n: &FiniteStructure,
    caps: (usize, usize),
    max: usize,
    budget: u64,
) -> Result<Option<usize>> {
    for alpha in 0..=max {
        let cfg = EfConfig::alpha(alpha, caps.0, caps.1)?;
        if efgame::ef_solve(m, n, &cfg, budget)?.winner == Player::I {
            return Ok(Some(alpha));
        }
    }
    Ok(None)
}

/// Scott heights per member: the least `alpha <= max_height` such that II
/// winning on `T_alpha` against a member forces isomorphism; `None` when no
/// such `alpha` exists up to the bound.
pub fn member_heights(cls: &StructureClass, max_height: usize, budget: u64) -> Result<Vec<Option<usize>>> {
    let iso = cls.iso_relation()?;
    let n = cls.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .filter(|&(i, j)| !iso[i][j])
        .collect();
    let caps = cls.caps();
    let found = map_pairs(pairs.clone(), |(i, j)| {
        separation_index(cls.member(i), cls.member(j), caps, max_height, budget)
    });
    let mut heights = vec![Some(0); n];
    for ((i, j), sep) in pairs.into_iter().zip(found) {
        let sep = sep?;
        for v in [i, j] {
            heights[v] = match (heights[v], sep) {
                (Some(h), Some(s)) => Some(h.max(s)),
                _ => None,
            };
        }
    }
    Ok(heights)
}

/// The Scott height of one member, or of the class (the largest member
/// height) when `member` is `None`.
pub fn scott_height(cls: &StructureClass, member: Option<usize>, max_height: usize) -> Result<Option<usize>> {
    scott_height_with_budget(cls, member, max_height, DEFAULT_POSITION_BUDGET)
}

pub fn scott_height_with_budget(
    cls: &StructureClass,
    member: Option<usize>,
    max_height: usize,
    budget: u64,
) -> Result<Option<usize>> {
    if let Some(i) = member {
        if i >= cls.len() {
            return Err(Error::Precondition(format!("no member {i}")));
        }
    }
    let heights = member_heights(cls, max_height, budget)?;
    Ok(match member {
        Some(i) => heights[i],
        None => heights.into_iter().try_fold(0, |acc, h| h.map(|h| acc.max(h))),
    })
}

/// The tree of all legal partial plays of the game over `cfg`, nodes numbered
/// in preorder with moves in sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTree {
    tree: WellFoundedTree,
    universe: usize,
    // (game node, demand, packed map) per run-tree node
    states: Vec<(u32, u16, u64)>,
}

impl RunTree {
    pub fn tree(&self) -> &WellFoundedTree {
        &self.tree
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// The position reached by a run. Even depth: I to move; odd depth: II.
    pub fn position(&self, v: usize) -> EfPosition {
        let (node, c, f) = self.states[v];
        EfPosition {
            node: node as usize,
            constraint: (0..self.universe).filter(|&x| c >> x & 1 == 1).collect(),
            map: PartialMap::from_pairs(
                unpack(f, self.universe)
                    .into_iter()
                    .enumerate()
                    .filter_map(|(x, y)| y.map(|y| (x, y))),
            )
            .expect("packed maps are functional"),
            to_move: if self.tree.depth(v).is_multiple_of(2) { Player::I } else { Player::II },
        }
    }

    /// True for a run ending with I's move because II has no legal reply.
    pub fn is_stuck(&self, v: usize) -> bool {
        self.tree.is_leaf(v) && self.tree.depth(v) % 2 == 1
    }

    fn packed_map(&self, v: usize) -> u64 {
        self.states[v].2
    }
}

struct RunBuilder<'a> {
    game: &'a WellFoundedTree,
    k: usize,
    b: usize,
    d: usize,
    count_memo: HashMap<(usize, u16, u64), u128>,
}

impl RunBuilder<'_> {
    fn i_moves(&self, node: usize, c: u16) -> Vec<(usize, u16)> {
        let mut out = Vec::new();
        for &child in self.game.children(node) {
            out.extend(supersets(c, self.k, self.b).map(|c2| (child, c2)));
        }
        out
    }

    /// Every partial function extending `f` with domain at most `d` whose
    /// domain and range both contain `c`, in lexicographic order of the
    /// dense form (undefined before 0 before 1 ...).
    fn ii_moves(&self, c: u16, f: u64) -> Vec<u64> {
        let base = unpack(f, self.k);
        let used = base.iter().filter(|y| y.is_some()).count();
        let mut out = Vec::new();
        let mut cur = base.clone();
        self.extend(&base, 0, used, c, &mut cur, &mut out);
        out
    }

    fn extend(&self, base: &[Option<usize>], x: usize, used: usize, c: u16, cur: &mut Vec<Option<usize>>, out: &mut Vec<u64>) {
        if x == self.k {
            let mut dom = 0u16;
            let mut ran = 0u16;
            for (x, y) in cur.iter().enumerate() {
                if let Some(y) = y {
                    dom |= 1 << x;
                    ran |= 1 << y;
                }
            }
            if c & dom == c && c & ran == c {
                out.push(pack(cur));
            }
            return;
        }
        if base[x].is_some() {
            return self.extend(base, x + 1, used, c, cur, out);
        }
        cur[x] = None;
        self.extend(base, x + 1, used, c, cur, out);
        if used < self.d {
            for y in 0..self.k {
                cur[x] = Some(y);
                self.extend(base, x + 1, used + 1, c, cur, out);
            }
            cur[x] = None;
        }
    }

    /// Size of the run subtree below an I-to-move position.
    fn count(&mut self, node: usize, c: u16, f: u64) -> u128 {
        if let Some(&n) = self.count_memo.get(&(node, c, f)) {
            return n;
        }
        let mut total = 1u128;
        for (child, c2) in self.i_moves(node, c) {
            total += 1;
            for g in self.ii_moves(c2, f) {
                total += self.count(child, c2, g);
            }
        }
        self.count_memo.insert((node, c, f), total);
        total
    }

    fn build(&self, node: usize, c: u16, f: u64, up: Option<usize>, parents: &mut Vec<Option<usize>>, states: &mut Vec<(u32, u16, u64)>) {
        let me = parents.len();
        parents.push(up);
        states.push((node as u32, c, f));
        for (child, c2) in self.i_moves(node, c) {
            let mid = parents.len();
            parents.push(Some(me));
            states.push((child as u32, c2, f));
            for g in self.ii_moves(c2, f) {
                self.build(child, c2, g, Some(mid), parents, states);
            }
        }
    }
}

/// Number of nodes [`run_tree`] would build.
pub fn run_tree_size(cfg: &EfConfig, universe: usize) -> Result<u128> {
    check_run_config(cfg, universe)?;
    let mut b = run_builder(cfg, universe);
    Ok(b.count(cfg.tree.root(), 0, 0))
}

fn check_run_config(cfg: &EfConfig, universe: usize) -> Result<()> {
    cfg.check_universe(universe)?;
    if universe > efgame::MAX_SOLVER_UNIVERSE {
        return Err(Error::budget("run tree universe", universe as u128, efgame::MAX_SOLVER_UNIVERSE as u128));
    }
    Ok(())
}

fn run_builder(cfg: &EfConfig, universe: usize) -> RunBuilder<'_> {
    RunBuilder {
        game: &cfg.tree,
        k: universe,
        b: cfg.cap_c,
        d: cfg.cap_f,
        count_memo: HashMap::new(),
    }
}

pub fn run_tree(cfg: &EfConfig, universe: usize) -> Result<RunTree> {
    run_tree_with_budget(cfg, universe, DEFAULT_RUN_BUDGET)
}

/// Materializes every legal run. The size is counted first and the build
/// refused, with the count, if it exceeds `budget`.
pub fn run_tree_with_budget(cfg: &EfConfig, universe: usize, budget: u64) -> Result<RunTree> {
    check_run_config(cfg, universe)?;
    let mut b = run_builder(cfg, universe);
    let size = b.count(cfg.tree.root(), 0, 0);
    if size > budget as u128 {
        return Err(Error::budget("run tree node", size, budget as u128));
    }
    let mut parents = Vec::with_capacity(size as usize);
    let mut states = Vec::with_capacity(size as usize);
    b.build(cfg.tree.root(), 0, 0, None, &mut parents, &mut states);
    Ok(RunTree {
        tree: WellFoundedTree::from_parents(parents)?,
        universe,
        states,
    })
}

/// The code on the run tree over the pairs of class members: a complete run
/// is labelled with the pairs for which its final map is a partial
/// isomorphism, and a run where II is stuck with the empty set.
pub fn run_tree_code(cls: &StructureClass, runs: &RunTree) -> Result<BorelCode> {
    if runs.universe != cls.universe() {
        return Err(Error::Precondition("run tree and class have different universes".into()));
    }
    let space = cls.pair_space();
    let n = cls.len();
    let mut cache: HashMap<u64, PointSet> = HashMap::new();
    let mut labels = BTreeMap::new();
    for v in runs.tree().leaves() {
        let set = if runs.is_stuck(v) {
            space.empty_set()
        } else {
            let f = runs.packed_map(v);
            cache
                .entry(f)
                .or_insert_with(|| {
                    let dense = unpack(f, runs.universe);
                    let mut s = space.empty_set();
                    for i in 0..n {
                        for j in 0..n {
                            if structures::partial_iso_dense(cls.member(i), cls.member(j), &dense) {
                                s.insert(i * n + j);
                            }
                        }
                    }
                    s
                })
                .clone()
        };
        labels.insert(v, set);
    }
    BorelCode::new(runs.tree().clone(), space, labels)
}

/// Summary of the run-tree pipeline on a class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link2Report {
    pub scott_height: usize,
    pub run_tree_rank: usize,
    pub rank_identity_holds: bool,
    pub code_decides_iso: bool,
    pub borel_rank_upper_bound: usize,
    /// Pi level of the expression read back from the run-tree code.
    pub code_pi_level: usize,
}

impl Link2Report {
    pub fn to_json_value(&self) -> Value {
        json!({
            "scottHeight": self.scott_height,
            "runTreeRank": self.run_tree_rank,
            "rankIdentityHolds": self.rank_identity_holds,
            "codeDecidesIso": self.code_decides_iso,
            "borelRankUpperBound": self.borel_rank_upper_bound,
        })
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    /// The code's level is at most `2S`, and `S <= max(level, 1)`.
    pub fn proxy_inequalities_hold(&self) -> bool {
        self.code_pi_level <= 2 * self.scott_height && self.scott_height <= self.code_pi_level.max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link2Budget {
    pub positions: u64,
    pub run_nodes: u64,
}

impl Default for Link2Budget {
    fn default() -> Self {
        Link2Budget {
            positions: DEFAULT_POSITION_BUDGET,
            run_nodes: DEFAULT_RUN_BUDGET,
        }
    }
}

/// Computes the class Scott height `S`, builds the run tree over `T_S` and
/// checks that its code carves out exactly the isomorphism relation.
pub fn verify_link2(cls: &StructureClass, max_height: usize) -> Result<Link2Report> {
    verify_link2_with_budget(cls, max_height, Link2Budget::default())
}

pub fn verify_link2_with_budget(cls: &StructureClass, max_height: usize, budget: Link2Budget) -> Result<Link2Report> {
    let s = scott_height_with_budget(cls, None, max_height, budget.positions)?.ok_or_else(|| {
        Error::Precondition(format!("class Scott height exceeds the search bound {max_height}"))
    })?;
    let cfg = cls.config(trees::canonical(s)?)?;
    let runs = run_tree_with_budget(&cfg, cls.universe(), budget.run_nodes)?;
    let code = run_tree_code(cls, &runs)?;
    let iso = cls.iso_relation()?;
    let coded = code.coded_set();
    let n = cls.len();
    let decides = (0..n).all(|i| (0..n).all(|j| coded.contains(i * n + j) == iso[i][j]));
    let rank = runs.tree().rank();
    Ok(Link2Report {
        scott_height: s,
        run_tree_rank: rank,
        rank_identity_holds: rank == 2 * s + 1,
        code_decides_iso: decides,
        borel_rank_upper_bound: 2 * s,
        code_pi_level: expr_from_code(&code).classify().pi,
    })
}

/// Three-element tournaments, cyclic and transitive. At caps `(2, 3)` II
/// survives one round between them but not two, giving Scott height 2.
pub fn tournament_class() -> Result<StructureClass> {
    let sig = structures::Signature::binary("E");
    let cyclic = FiniteStructure::new(sig.clone(), 3, vec![vec![vec![0, 1], vec![1, 2], vec![2, 0]]])?;
    let transitive = FiniteStructure::new(sig, 3, vec![vec![vec![0, 1], vec![0, 2], vec![1, 2]]])?;
    let relabelled = cyclic.relabel(&[1, 0, 2])?;
    StructureClass::new(
        vec![
            ("cyclic".into(), cyclic),
            ("transitive".into(), transitive),
            ("cyclic-relabelled".into(), relabelled),
        ],
        2,
        3,
    )
}
