//! Finite well-founded trees: ranks, the canonical trees of strictly
//! decreasing sequences, rank-driven embeddings into them, the witness family
//! showing those embeddings are tight, and an exact embedding search used as
//! an oracle.
//!
//! Node identifiers are dense: a tree with `n` nodes uses `0..n`. Children are
//! always listed in increasing identifier order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Default cap on the number of nodes any construction may materialize.
pub const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WellFoundedTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    root: usize,
}

impl WellFoundedTree {
    /// Builds a tree from a parent table (`None` marks the root).
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::MalformedTree("tree has no nodes".into()));
        }
        let mut root = None;
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            match *p {
                None => {
                    if let Some(r) = root {
                        return Err(Error::MalformedTree(format!(
                            "multiple roots: {r} and {v}"
                        )));
                    }
                    root = Some(v);
                }
                Some(p) if p >= n => {
                    return Err(Error::MalformedTree(format!(
                        "node {v} has unknown parent {p}"
                    )));
                }
                Some(p) => children[p].push(v),
            }
        }
        let root = root.ok_or_else(|| Error::MalformedTree("no root (cycle)".into()))?;

        // Every node must be reachable from the root; nodes on a parent cycle
        // never are.
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut stack = vec![root];
        let mut seen = 1;
        while let Some(v) = stack.pop() {
            for &c in &children[v] {
                depth[c] = depth[v] + 1;
                seen += 1;
                stack.push(c);
            }
        }
        if seen != n {
            let stray = depth.iter().position(|&d| d == usize::MAX).unwrap_or(0);
            return Err(Error::MalformedTree(format!(
                "node {stray} does not reach the root (parent cycle)"
            )));
        }
        Ok(WellFoundedTree {
            parent,
            children,
            depth,
            root,
        })
    }

    pub fn singleton() -> Self {
        Self::from_parents(vec![None]).expect("singleton tree is valid")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&v| self.is_leaf(v))
    }

    /// Number of strict predecessors of `v`.
    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn max_branching(&self) -> usize {
        self.children.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `a < b` in the tree order, i.e. `a` is a proper ancestor of `b`.
    pub fn is_below(&self, a: usize, b: usize) -> bool {
        if self.depth[a] >= self.depth[b] {
            return false;
        }
        let mut v = b;
        while self.depth[v] > self.depth[a] {
            v = self.parent[v].expect("non-root has a parent");
        }
        v == a
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        a == b || self.is_below(a, b) || self.is_below(b, a)
    }

    /// Nodes in depth-first preorder, children visited in identifier order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    /// Per-node ranks: leaves have rank 0, an inner node one more than the
    /// largest rank among its children.
    pub fn node_ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.len()];
        for v in self.preorder().into_iter().rev() {
            rank[v] = self.children[v]
                .iter()
                .map(|&c| rank[c] + 1)
                .max()
                .unwrap_or(0);
        }
        rank
    }

    /// Rank of the tree: the root's node rank plus one.
    pub fn rank(&self) -> usize {
        self.node_ranks()[self.root] + 1
    }

    /// The cone above `v` as a tree of its own, with nodes renumbered in
    /// preorder. Returns the subtree and the map from new to old identifiers.
    pub fn cone(&self, v: usize) -> (WellFoundedTree, Vec<usize>) {
        let mut old = Vec::new();
        let mut parent = Vec::new();
        let mut stack = vec![(v, None)];
        while let Some((u, p)) = stack.pop() {
            let id = old.len();
            old.push(u);
            parent.push(p);
            for &c in self.children[u].iter().rev() {
                stack.push((c, Some(id)));
            }
        }
        let t = WellFoundedTree::from_parents(parent).expect("cone of a valid tree");
        (t, old)
    }

    /// Restriction to a set of nodes closed under initial segments. Nodes are
    /// renumbered in increasing order of their old identifiers; returns the
    /// subtree and the map from new to old identifiers.
    pub fn restrict(&self, keep: &[bool]) -> Result<(WellFoundedTree, Vec<usize>)> {
        if keep.len() != self.len() || !keep[self.root] {
            return Err(Error::Precondition(
                "restriction must keep the root".into(),
            ));
        }
        let old: Vec<usize> = (0..self.len()).filter(|&v| keep[v]).collect();
        let mut new_id = vec![usize::MAX; self.len()];
        for (i, &v) in old.iter().enumerate() {
            new_id[v] = i;
        }
        let mut parent = Vec::with_capacity(old.len());
        for &v in &old {
            match self.parent[v] {
                None => parent.push(None),
                Some(p) if keep[p] => parent.push(Some(new_id[p])),
                Some(p) => {
                    return Err(Error::Precondition(format!(
                        "kept node {v} has dropped parent {p}"
                    )))
                }
            }
        }
        Ok((WellFoundedTree::from_parents(parent)?, old))
    }

    pub fn to_json_value(&self) -> Value {
        let nodes: Vec<NodeJson> = self
            .parent
            .iter()
            .enumerate()
            .map(|(id, &parent)| NodeJson { id, parent })
            .collect();
        serde_json::to_value(TreeJson { nodes }).expect("tree json")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json_value(v: Value) -> Result<Self> {
        let parsed: TreeJson = serde_json::from_value(v)?;
        let n = parsed.nodes.len();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        for node in parsed.nodes {
            if node.id >= n {
                return Err(Error::MalformedTree(format!(
                    "node ids must be 0..{n}, found {}",
                    node.id
                )));
            }
            if std::mem::replace(&mut seen[node.id], true) {
                return Err(Error::MalformedTree(format!("duplicate node id {}", node.id)));
            }
            parent[node.id] = node.parent;
        }
        Self::from_parents(parent)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_value(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    id: usize,
    parent: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeJson {
    nodes: Vec<NodeJson>,
}

/// Bound on branching. A tree of rank `beta + 1` with this branching embeds
/// into the canonical tree of index `width * beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Width(usize);

impl Width {
    pub fn new(w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::Precondition("width must be at least 1".into()));
        }
        Ok(Width(w))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// The tree of strictly decreasing sequences over `{0, .., m-1}` ordered by
/// end-extension. Identifiers follow lexicographic order of the sequences,
/// which is the depth-first preorder visiting smaller appended values first.
#[derive(Debug, Clone)]
pub struct CanonicalTree {
    m: usize,
    tree: WellFoundedTree,
    seqs: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl CanonicalTree {
    pub fn new(m: usize) -> Result<Self> {
        Self::with_budget(m, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(m: usize, budget: usize) -> Result<Self> {
        let size = 1u128.checked_shl(m as u32).filter(|_| m < 127).unwrap_or(u128::MAX);
        if size > budget as u128 {
            return Err(Error::budget("node", size, budget as u128));
        }
        let mut seqs = Vec::with_capacity(size as usize);
        let mut parent = Vec::with_capacity(size as usize);
        fn visit(
            seq: &mut Vec<usize>,
            bound: usize,
            up: Option<usize>,
            seqs: &mut Vec<Vec<usize>>,
            parent: &mut Vec<Option<usize>>,
        ) {
            let id = seqs.len();
            seqs.push(seq.clone());
            parent.push(up);
            for k in 0..bound {
                seq.push(k);
                visit(seq, k, Some(id), seqs, parent);
                seq.pop();
            }
        }
        visit(&mut Vec::new(), m, None, &mut seqs, &mut parent);
        let index = seqs.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(CanonicalTree {
            m,
            tree: WellFoundedTree::from_parents(parent)?,
            seqs,
            index,
        })
    }

    pub fn index(&self) -> usize {
        self.m
    }

    pub fn tree(&self) -> &WellFoundedTree {
        &self.tree
    }

    pub fn into_tree(self) -> WellFoundedTree {
        self.tree
    }

    pub fn sequence(&self, id: usize) -> &[usize] {
        &self.seqs[id]
    }

    pub fn node(&self, seq: &[usize]) -> Option<usize> {
        self.index.get(seq).copied()
    }
}

/// `T_m`, the canonical tree of strictly decreasing sequences below `m`.
pub fn canonical(m: usize) -> Result<WellFoundedTree> {
    Ok(CanonicalTree::new(m)?.into_tree())
}

/// An injective map between trees, checked against the order-embedding
/// conditions by [`TreeEmbedding::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEmbedding {
    source: WellFoundedTree,
    target: WellFoundedTree,
    map: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingViolation {
    /// Two source nodes share an image.
    NotInjective { first: usize, second: usize },
    /// `lower < upper` in the source but the images are not so ordered.
    NotOrderPreserving { lower: usize, upper: usize },
    /// The images are ordered but `first` and `second` are not.
    NotOrderReflecting { first: usize, second: usize },
    /// Strong form only: the image of `node` does not sit directly above the
    /// image of its parent (or, for the root, is not the target root).
    NotInitialSegmentClosed { node: usize },
}

impl std::fmt::Display for EmbeddingViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            EmbeddingViolation::NotInjective { first, second } => {
                write!(f, "nodes {first} and {second} have the same image")
            }
            EmbeddingViolation::NotOrderPreserving { lower, upper } => {
                write!(f, "{lower} < {upper} is not preserved")
            }
            EmbeddingViolation::NotOrderReflecting { first, second } => {
                write!(f, "images of incomparable nodes {first} and {second} are comparable")
            }
            EmbeddingViolation::NotInitialSegmentClosed { node } => {
                write!(f, "image is not closed under initial segments at node {node}")
            }
        }
    }
}

impl TreeEmbedding {
    pub fn new(source: WellFoundedTree, target: WellFoundedTree, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::MalformedEmbedding(format!(
                "map covers {} of {} source nodes",
                map.len(),
                source.len()
            )));
        }
        if let Some((v, &img)) = map.iter().enumerate().find(|(_, &img)| img >= target.len()) {
            return Err(Error::MalformedEmbedding(format!(
                "node {v} maps to unknown target node {img}"
            )));
        }
        Ok(TreeEmbedding { source, target, map })
    }

    pub fn source(&self) -> &WellFoundedTree {
        &self.source
    }

    pub fn target(&self) -> &WellFoundedTree {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn image(&self, v: usize) -> usize {
        self.map[v]
    }

    /// Checks injectivity and `p < q <=> map(p) < map(q)`. With `strong`, also
    /// checks that the root goes to the root and immediate successors go to
    /// immediate successors, which makes the image closed under initial
    /// segments.
    pub fn validate(&self, strong: bool) -> std::result::Result<(), EmbeddingViolation> {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for (v, &img) in self.map.iter().enumerate() {
            if let Some(&u) = seen.get(&img) {
                return Err(EmbeddingViolation::NotInjective { first: u, second: v });
            }
            seen.insert(img, v);
        }
        let n = self.source.len();
        for p in 0..n {
            for q in 0..n {
                if p == q {
                    continue;
                }
                let src = self.source.is_below(p, q);
                let dst = self.target.is_below(self.map[p], self.map[q]);
                if src && !dst {
                    return Err(EmbeddingViolation::NotOrderPreserving { lower: p, upper: q });
                }
                if dst && !src {
                    return Err(EmbeddingViolation::NotOrderReflecting { first: p, second: q });
                }
            }
        }
        if strong {
            let root = self.source.root();
            if self.map[root] != self.target.root() {
                return Err(EmbeddingViolation::NotInitialSegmentClosed { node: root });
            }
            for v in 0..n {
                if let Some(p) = self.source.parent(v) {
                    if self.target.parent(self.map[v]) != Some(self.map[p]) {
                        return Err(EmbeddingViolation::NotInitialSegmentClosed { node: v });
                    }
                }
            }
        }
        Ok(())
    }

    /// `{"map":{"srcId":dstId,...}}`
    pub fn to_json_value(&self) -> Value {
        let map: serde_json::Map<String, Value> = self
            .map
            .iter()
            .enumerate()
            .map(|(s, &d)| (s.to_string(), Value::from(d)))
            .collect();
        serde_json::json!({ "map": map })
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    /// Reads the map part of an embedding; the trees are supplied separately.
    pub fn from_json(
        text: &str,
        source: WellFoundedTree,
        target: WellFoundedTree,
    ) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct EmbeddingJson {
            map: HashMap<String, usize>,
        }
        let parsed: EmbeddingJson = serde_json::from_str(text)?;
        let mut map = vec![None; source.len()];
        for (k, d) in parsed.map {
            let s: usize = k
                .parse()
                .map_err(|_| Error::MalformedEmbedding(format!("bad source id {k:?}")))?;
            if s >= source.len() {
                return Err(Error::MalformedEmbedding(format!("unknown source node {s}")));
            }
            map[s] = Some(d);
        }
        let map = map
            .into_iter()
            .enumerate()
            .map(|(v, d)| {
                d.ok_or_else(|| Error::MalformedEmbedding(format!("source node {v} is unmapped")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, map)
    }
}

/// Embeds `t` into `T_{w*beta}` where `rank(t) = beta + 1`.
///
/// The `i`-th child `c` of a node is sent to the parent's image extended by
/// `w * rank(c) + i`, so the cone above `c` lands in a copy of
/// `T_{w * rank(c)}`. The image is closed under initial segments.
pub fn embed(t: &WellFoundedTree, width: Width) -> Result<TreeEmbedding> {
    embed_with_budget(t, width, DEFAULT_NODE_BUDGET)
}

pub fn embed_with_budget(t: &WellFoundedTree, width: Width, budget: usize) -> Result<TreeEmbedding> {
    let w = width.get();
    if let Some(v) = (0..t.len()).find(|&v| t.children(v).len() > w) {
        return Err(Error::Precondition(format!(
            "branching exceeds width: node {v} has {} children, width is {w}",
            t.children(v).len()
        )));
    }
    let ranks = t.node_ranks();
    let beta = ranks[t.root()];
    let target = CanonicalTree::with_budget(w * beta, budget)?;
    let seqs = embedding_sequences(t, w, &ranks);
    let map = seqs
        .iter()
        .map(|s| target.node(s).expect("embedding sequence is strictly decreasing"))
        .collect();
    TreeEmbedding::new(t.clone(), target.into_tree(), map)
}

/// The sequences assigned by [`embed`], indexed by source node.
pub fn embedding_sequences(t: &WellFoundedTree, w: usize, ranks: &[usize]) -> Vec<Vec<usize>> {
    let mut seqs = vec![Vec::new(); t.len()];
    for v in t.preorder() {
        for (i, &c) in t.children(v).iter().enumerate() {
            let mut s = seqs[v].clone();
            s.push(w * ranks[c] + i);
            seqs[c] = s;
        }
    }
    seqs
}

fn is_prefix(a: &[usize], b: &[usize]) -> bool {
    a.len() < b.len() && b[..a.len()] == *a
}

/// [`TreeEmbedding::validate`] for a map given as sequences into `T_m`,
/// without building `T_m`. Sequences that are not strictly decreasing or
/// use entries `>= m` are not nodes of `T_m` and are reported as
/// `NotInitialSegmentClosed`.
pub fn validate_sequences(
    source: &WellFoundedTree,
    m: usize,
    seqs: &[Vec<usize>],
    strong: bool,
) -> std::result::Result<(), EmbeddingViolation> {
    let n = source.len();
    assert_eq!(seqs.len(), n, "one sequence per source node");
    for (v, s) in seqs.iter().enumerate() {
        if s.iter().any(|&x| x >= m) || s.windows(2).any(|w| w[0] <= w[1]) {
            return Err(EmbeddingViolation::NotInitialSegmentClosed { node: v });
        }
    }
    let mut seen: HashMap<&[usize], usize> = HashMap::new();
    for (v, s) in seqs.iter().enumerate() {
        if let Some(&u) = seen.get(s.as_slice()) {
            return Err(EmbeddingViolation::NotInjective { first: u, second: v });
        }
        seen.insert(s, v);
    }
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            let src = source.is_below(p, q);
            let dst = is_prefix(&seqs[p], &seqs[q]);
            if src && !dst {
                return Err(EmbeddingViolation::NotOrderPreserving { lower: p, upper: q });
            }
            if dst && !src {
                return Err(EmbeddingViolation::NotOrderReflecting { first: p, second: q });
            }
        }
    }
    if strong {
        let root = source.root();
        if !seqs[root].is_empty() {
            return Err(EmbeddingViolation::NotInitialSegmentClosed { node: root });
        }
        for v in 0..n {
            if let Some(p) = source.parent(v) {
                if seqs[v].len() != seqs[p].len() + 1 || !is_prefix(&seqs[p], &seqs[v]) {
                    return Err(EmbeddingViolation::NotInitialSegmentClosed { node: v });
                }
            }
        }
    }
    Ok(())
}

/// Size limits for [`brute_force_embed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_source: usize,
    pub max_target: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_source: 64,
            max_target: 1024,
        }
    }
}

/// Exact search for an order embedding of `src` into `dst` (injective,
/// `p < q <=> f(p) < f(q)`), by backtracking over placements of each node's
/// children on pairwise incomparable nodes above its image. Results of the
/// subproblem "cone above source node q fits with q placed at y" are memoized
/// per source shape. Deterministic: candidates are tried in target preorder.
pub fn brute_force_embed(
    src: &WellFoundedTree,
    dst: &WellFoundedTree,
    budget: SearchBudget,
) -> Result<Option<TreeEmbedding>> {
    if src.len() > budget.max_source {
        return Err(Error::budget("embedding search source", src.len() as u128, budget.max_source as u128));
    }
    if dst.len() > budget.max_target {
        return Err(Error::budget("embedding search target", dst.len() as u128, budget.max_target as u128));
    }
    let mut search = EmbedSearch::new(src, dst);
    let order = dst.preorder();
    for &y in &order {
        if search.fits(src.root(), y) {
            let mut map = vec![usize::MAX; src.len()];
            search.assign(src.root(), y, &mut map);
            return TreeEmbedding::new(src.clone(), dst.clone(), map).map(Some);
        }
    }
    Ok(None)
}

struct EmbedSearch<'a> {
    src: &'a WellFoundedTree,
    dst: &'a WellFoundedTree,
    src_height: Vec<usize>,
    dst_height: Vec<usize>,
    shape: Vec<usize>,
    above: Vec<Vec<usize>>,
    memo: HashMap<(usize, usize), Option<Vec<usize>>>,
}

impl<'a> EmbedSearch<'a> {
    fn new(src: &'a WellFoundedTree, dst: &'a WellFoundedTree) -> Self {
        // Isomorphism classes of source cones, so that repeated copies share
        // memo entries.
        let mut shape = vec![0; src.len()];
        let mut classes: HashMap<Vec<usize>, usize> = HashMap::new();
        for v in src.preorder().into_iter().rev() {
            let mut key: Vec<usize> = src.children(v).iter().map(|&c| shape[c]).collect();
            key.sort_unstable();
            let next = classes.len();
            shape[v] = *classes.entry(key).or_insert(next);
        }
        let order = dst.preorder();
        let mut above = vec![Vec::new(); dst.len()];
        for &z in &order {
            let mut a = dst.parent(z);
            while let Some(y) = a {
                above[y].push(z);
                a = dst.parent(y);
            }
        }
        EmbedSearch {
            src,
            dst,
            src_height: src.node_ranks(),
            dst_height: dst.node_ranks(),
            shape,
            above,
            memo: HashMap::new(),
        }
    }

    fn fits(&mut self, q: usize, y: usize) -> bool {
        self.placement(q, y).is_some()
    }

    /// Children ordered by shape, so that nodes of equal shape agree on the
    /// meaning of a memoized placement.
    fn sorted_children(&self, q: usize) -> Vec<usize> {
        let mut kids = self.src.children(q).to_vec();
        kids.sort_by_key(|&c| (self.shape[c], c));
        kids
    }

    /// Images for the children of `q`, in [`Self::sorted_children`] order,
    /// when `q` sits at `y`.
    fn placement(&mut self, q: usize, y: usize) -> Option<Vec<usize>> {
        if self.src_height[q] > self.dst_height[y] {
            return None;
        }
        let key = (self.shape[q], y);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let kids = self.sorted_children(q);
        let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(kids.len());
        for &c in &kids {
            let above = self.above[y].clone();
            let ok: Vec<usize> = above.into_iter().filter(|&z| self.fits(c, z)).collect();
            candidates.push(ok);
        }
        // Most constrained child first.
        let mut order: Vec<usize> = (0..kids.len()).collect();
        order.sort_by_key(|&i| (candidates[i].len(), i));
        let mut chosen = vec![usize::MAX; kids.len()];
        let result = if self.choose(&order, 0, &candidates, &mut chosen) {
            Some(chosen)
        } else {
            None
        };
        self.memo.insert(key, result.clone());
        result
    }

    fn choose(
        &self,
        order: &[usize],
        k: usize,
        candidates: &[Vec<usize>],
        chosen: &mut [usize],
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let i = order[k];
        for &z in &candidates[i] {
            let clash = order[..k]
                .iter()
                .any(|&j| self.dst.comparable(chosen[j], z));
            if clash {
                continue;
            }
            chosen[i] = z;
            if self.choose(order, k + 1, candidates, chosen) {
                return true;
            }
        }
        false
    }

    fn assign(&mut self, q: usize, y: usize, map: &mut [usize]) {
        map[q] = y;
        let images = self.placement(q, y).expect("assign follows a successful fit");
        let kids = self.sorted_children(q);
        for (c, z) in kids.into_iter().zip(images) {
            self.assign(c, z, map);
        }
    }
}

/// A root with `w` leaves for `beta = 1`; for `beta = gamma + 1`, `w` copies of
/// the `gamma` witness under a fresh root. `beta = 0` gives a single node.
/// Rank is `beta + 1`. Nodes are numbered in preorder.
pub fn witness_tree(width: Width, beta: usize) -> Result<WellFoundedTree> {
    witness_tree_with_budget(width, beta, DEFAULT_NODE_BUDGET)
}

pub fn witness_tree_with_budget(width: Width, beta: usize, budget: usize) -> Result<WellFoundedTree> {
    let w = width.get() as u128;
    let mut size: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 0..=beta {
        size = size.saturating_add(layer);
        layer = layer.saturating_mul(w);
    }
    if size > budget as u128 {
        return Err(Error::budget("node", size, budget as u128));
    }
    let mut parent = Vec::with_capacity(size as usize);
    fn grow(level: usize, w: usize, up: Option<usize>, parent: &mut Vec<Option<usize>>) {
        let id = parent.len();
        parent.push(up);
        if level > 0 {
            for _ in 0..w {
                grow(level - 1, w, Some(id), parent);
            }
        }
    }
    grow(beta, width.get(), None, &mut parent);
    WellFoundedTree::from_parents(parent)
}
