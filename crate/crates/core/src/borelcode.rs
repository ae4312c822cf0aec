//! Borel codes over a finite point space.
//!
//! A code is a well-founded tree whose leaves are labelled by subsets of the
//! space. Player I moves first from the root and the players alternate picking
//! an immediate successor of the previous node; II wins at a leaf `p` exactly
//! when the point lies in the label of `p`. The coded set collects the points
//! for which II has a winning strategy, so nodes at even depth act as
//! intersections and nodes at odd depth as unions.
//!
//! A finite space is discrete, so every subset is clopen and the semantic
//! Borel hierarchy collapses. What this module tracks is the structural
//! bookkeeping: code rank against the syntactic level of an equivalent
//! intersection/union expression, in both directions, plus re-coding on a
//! canonical tree.

use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::trees::{self, CanonicalTree, TreeEmbedding, WellFoundedTree, Width, DEFAULT_NODE_BUDGET};

/// Default bound on the arity of unions and intersections.
pub const DEFAULT_FAN_OUT: usize = 8;

/// Default tree-size bound for [`strategy_enum_solve`].
pub const DEFAULT_ORACLE_NODES: usize = 12;

/// An ordered list of distinct point labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSpace {
    points: Vec<String>,
    index: HashMap<String, usize>,
}

impl PointSpace {
    pub fn new(points: Vec<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::MalformedCode("point space is empty".into()));
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(Error::MalformedCode(format!("duplicate point {p:?}")));
            }
        }
        Ok(PointSpace { points, index })
    }

    /// Points labelled `0`, `1`, ... `n-1`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.points
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn empty_set(&self) -> PointSet {
        PointSet::empty(self.len())
    }

    pub fn full_set(&self) -> PointSet {
        PointSet::full(self.len())
    }

    /// Parses a JSON array of point labels.
    pub fn set_from_json(&self, v: &Value) -> Result<PointSet> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::MalformedCode(format!("expected a list of points, got {v}")))?;
        let mut set = self.empty_set();
        for item in arr {
            let label = item
                .as_str()
                .ok_or_else(|| Error::MalformedCode(format!("point labels are strings, got {item}")))?;
            let i = self
                .position(label)
                .ok_or_else(|| Error::MalformedCode(format!("unknown point {label:?}")))?;
            set.insert(i);
        }
        Ok(set)
    }

    /// Labels of the set's points, sorted.
    pub fn set_to_json(&self, s: &PointSet) -> Value {
        let mut labels: Vec<&str> = s.iter().map(|i| self.label(i)).collect();
        labels.sort_unstable();
        json!(labels)
    }
}

/// A subset of a point space, by point index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet(FixedBitSet);

impl PointSet {
    pub fn empty(n: usize) -> Self {
        PointSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        PointSet(b)
    }

    pub fn from_indices(n: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in items {
            s.insert(i);
        }
        s
    }

    /// Size of the ambient space.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, i: usize) {
        self.0.insert(i);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn union_with(&mut self, other: &PointSet) {
        self.0.union_with(&other.0);
    }

    pub fn intersect_with(&mut self, other: &PointSet) {
        self.0.intersect_with(&other.0);
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

/// Which player picks the successor of a node at the given depth.
fn intersection_node(depth: usize) -> bool {
    depth.is_multiple_of(2)
}

/// A tree plus a labelling of its leaves by subsets of a point space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorelCode {
    tree: WellFoundedTree,
    space: PointSpace,
    labels: Vec<Option<PointSet>>,
}

impl BorelCode {
    pub fn new(tree: WellFoundedTree, space: PointSpace, labels: BTreeMap<usize, PointSet>) -> Result<Self> {
        let mut slots = vec![None; tree.len()];
        for (v, set) in labels {
            if v >= tree.len() {
                return Err(Error::MalformedCode(format!("label for unknown node {v}")));
            }
            if !tree.is_leaf(v) {
                return Err(Error::MalformedCode(format!("inner node {v} carries a label")));
            }
            if set.universe() != space.len() {
                return Err(Error::MalformedCode(format!(
                    "label of node {v} lives in a space of {} points, expected {}",
                    set.universe(),
                    space.len()
                )));
            }
            slots[v] = Some(set);
        }
        if let Some(v) = tree.leaves().find(|&v| slots[v].is_none()) {
            return Err(Error::MalformedCode(format!("leaf {v} is unlabelled")));
        }
        Ok(BorelCode {
            tree,
            space,
            labels: slots,
        })
    }

    pub fn tree(&self) -> &WellFoundedTree {
        &self.tree
    }

    pub fn space(&self) -> &PointSpace {
        &self.space
    }

    pub fn label(&self, leaf: usize) -> Option<&PointSet> {
        self.labels[leaf].as_ref()
    }

    fn leaf_label(&self, leaf: usize) -> &PointSet {
        self.labels[leaf].as_ref().expect("leaves are labelled")
    }

    /// The coded set, by backward induction over the tree.
    pub fn coded_set(&self) -> PointSet {
        let n = self.space.len();
        let mut value: Vec<Option<PointSet>> = vec![None; self.tree.len()];
        for v in self.tree.preorder().into_iter().rev() {
            let kids = self.tree.children(v);
            let set = if kids.is_empty() {
                self.leaf_label(v).clone()
            } else if intersection_node(self.tree.depth(v)) {
                let mut acc = PointSet::full(n);
                for &c in kids {
                    acc.intersect_with(value[c].as_ref().expect("child evaluated first"));
                }
                acc
            } else {
                let mut acc = PointSet::empty(n);
                for &c in kids {
                    acc.union_with(value[c].as_ref().expect("child evaluated first"));
                }
                acc
            };
            value[v] = Some(set);
        }
        value[self.tree.root()].take().expect("root evaluated")
    }

    pub fn contains(&self, point: usize) -> bool {
        self.coded_set().contains(point)
    }

    pub fn to_json_value(&self) -> Value {
        let labels: serde_json::Map<String, Value> = self
            .tree
            .leaves()
            .map(|v| (v.to_string(), self.space.set_to_json(self.leaf_label(v))))
            .collect();
        json!({
            "tree": self.tree.to_json_value(),
            "space": self.space.labels(),
            "labels": labels,
        })
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::MalformedCode("code must be a JSON object".into()))?;
        if let Some(k) = obj.keys().find(|k| !["tree", "space", "labels"].contains(&k.as_str())) {
            return Err(Error::MalformedCode(format!("unknown field {k:?}")));
        }
        let field = |name: &str| {
            obj.get(name)
                .ok_or_else(|| Error::MalformedCode(format!("missing field {name:?}")))
        };
        let tree = WellFoundedTree::from_json_value(field("tree")?.clone())?;
        let points: Vec<String> = serde_json::from_value(field("space")?.clone())?;
        let space = PointSpace::new(points)?;
        let raw = field("labels")?
            .as_object()
            .ok_or_else(|| Error::MalformedCode("labels must be an object".into()))?;
        let mut labels = BTreeMap::new();
        for (k, set) in raw {
            let v: usize = k
                .parse()
                .map_err(|_| Error::MalformedCode(format!("bad leaf id {k:?}")))?;
            labels.insert(v, space.set_from_json(set)?);
        }
        Self::new(tree, space, labels)
    }
}

/// Decides whether II wins `G(code, x)` by enumerating every II strategy (a
/// choice of successor at each inner node of odd depth) and checking it
/// against all of I's plays. Independent of [`BorelCode::coded_set`].
pub fn strategy_enum_solve(code: &BorelCode, x: usize) -> Result<bool> {
    strategy_enum_solve_with_budget(code, x, DEFAULT_ORACLE_NODES)
}

pub fn strategy_enum_solve_with_budget(code: &BorelCode, x: usize, max_nodes: usize) -> Result<bool> {
    let t = code.tree();
    if t.len() > max_nodes {
        return Err(Error::budget("strategy oracle node", t.len() as u128, max_nodes as u128));
    }
    if x >= code.space().len() {
        return Err(Error::Precondition(format!("point {x} is outside the space")));
    }
    let choice_nodes: Vec<usize> = (0..t.len())
        .filter(|&v| !t.is_leaf(v) && !intersection_node(t.depth(v)))
        .collect();
    let radix: Vec<usize> = choice_nodes.iter().map(|&v| t.children(v).len()).collect();
    let mut digits = vec![0usize; choice_nodes.len()];
    let mut pick = vec![usize::MAX; t.len()];
    loop {
        for (k, &v) in choice_nodes.iter().enumerate() {
            pick[v] = t.children(v)[digits[k]];
        }
        if strategy_wins(code, x, &pick) {
            return Ok(true);
        }
        // advance the mixed-radix counter
        let mut k = 0;
        loop {
            if k == digits.len() {
                return Ok(false);
            }
            digits[k] += 1;
            if digits[k] < radix[k] {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

fn strategy_wins(code: &BorelCode, x: usize, pick: &[usize]) -> bool {
    let t = code.tree();
    let mut stack = vec![t.root()];
    while let Some(v) = stack.pop() {
        if t.is_leaf(v) {
            if !code.leaf_label(v).contains(x) {
                return false;
            }
        } else if intersection_node(t.depth(v)) {
            stack.extend_from_slice(t.children(v));
        } else {
            stack.push(pick[v]);
        }
    }
    true
}

/// Complement-free set expressions over base subsets of a space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    Base(PointSet),
    Union(Vec<SetExpr>),
    Intersect(Vec<SetExpr>),
}

/// Least syntactic levels: the expression is `Sigma^0_sigma` and `Pi^0_pi`.
/// Base sets sit at `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HierarchyLevel {
    pub sigma: usize,
    pub pi: usize,
}

impl SetExpr {
    /// Checks non-empty argument lists, the fan-out bound and that all base
    /// sets live in a space of `universe` points.
    pub fn validate(&self, universe: usize, fan_out: usize) -> Result<()> {
        match self {
            SetExpr::Base(s) if s.universe() != universe => Err(Error::MalformedExpr(format!(
                "base set over {} points, expected {universe}",
                s.universe()
            ))),
            SetExpr::Base(_) => Ok(()),
            SetExpr::Union(args) | SetExpr::Intersect(args) => {
                if args.is_empty() {
                    return Err(Error::MalformedExpr("empty argument list".into()));
                }
                if args.len() > fan_out {
                    return Err(Error::MalformedExpr(format!(
                        "{} arguments exceed fan-out {fan_out}",
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| a.validate(universe, fan_out))
            }
        }
    }

    pub fn universe(&self) -> usize {
        match self {
            SetExpr::Base(s) => s.universe(),
            SetExpr::Union(args) | SetExpr::Intersect(args) => args[0].universe(),
        }
    }

    pub fn eval(&self) -> PointSet {
        match self {
            SetExpr::Base(s) => s.clone(),
            SetExpr::Union(args) => {
                let mut acc = PointSet::empty(self.universe());
                for a in args {
                    acc.union_with(&a.eval());
                }
                acc
            }
            SetExpr::Intersect(args) => {
                let mut acc = PointSet::full(self.universe());
                for a in args {
                    acc.intersect_with(&a.eval());
                }
                acc
            }
        }
    }

    /// A union is `Sigma_a` when every argument is `Pi_b` for some `1 <= b < a`
    /// or is itself `Sigma_a`; base sets are `Pi_1`. Dually for intersections.
    /// Being `Pi_b` makes an expression `Sigma_{b+1}` and vice versa.
    pub fn classify(&self) -> HierarchyLevel {
        match self {
            SetExpr::Base(_) => HierarchyLevel { sigma: 0, pi: 0 },
            SetExpr::Union(args) => {
                let sigma = args
                    .iter()
                    .map(|a| {
                        let l = a.classify();
                        l.sigma.max(1).min(l.pi.max(1) + 1)
                    })
                    .max()
                    .unwrap_or(1)
                    .max(1);
                HierarchyLevel { sigma, pi: sigma + 1 }
            }
            SetExpr::Intersect(args) => {
                let pi = args
                    .iter()
                    .map(|a| {
                        let l = a.classify();
                        l.pi.max(1).min(l.sigma.max(1) + 1)
                    })
                    .max()
                    .unwrap_or(1)
                    .max(1);
                HierarchyLevel { sigma: pi + 1, pi }
            }
        }
    }

    pub fn to_json_value(&self, space: &PointSpace) -> Value {
        match self {
            SetExpr::Base(s) => json!({"op": "base", "set": space.set_to_json(s)}),
            SetExpr::Union(args) => json!({
                "op": "union",
                "args": args.iter().map(|a| a.to_json_value(space)).collect::<Vec<_>>(),
            }),
            SetExpr::Intersect(args) => json!({
                "op": "intersect",
                "args": args.iter().map(|a| a.to_json_value(space)).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json_value(v: &Value, space: &PointSpace) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::MalformedExpr(format!("expected an object, got {v}")))?;
        let op = obj
            .get("op")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::MalformedExpr("missing \"op\"".into()))?;
        let allowed: &[&str] = if op == "base" { &["op", "set"] } else { &["op", "args"] };
        if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::MalformedExpr(format!("unexpected field {k:?} for op {op:?}")));
        }
        match op {
            "base" => {
                let set = obj
                    .get("set")
                    .ok_or_else(|| Error::MalformedExpr("base without \"set\"".into()))?;
                space
                    .set_from_json(set)
                    .map(SetExpr::Base)
                    .map_err(|e| Error::MalformedExpr(e.to_string()))
            }
            "union" | "intersect" => {
                let args = obj
                    .get("args")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::MalformedExpr(format!("{op} without \"args\" list")))?
                    .iter()
                    .map(|a| Self::from_json_value(a, space))
                    .collect::<Result<Vec<_>>>()?;
                if args.is_empty() {
                    return Err(Error::MalformedExpr(format!("{op} with no arguments")));
                }
                Ok(if op == "union" {
                    SetExpr::Union(args)
                } else {
                    SetExpr::Intersect(args)
                })
            }
            other => Err(Error::MalformedExpr(format!("unknown op {other:?}"))),
        }
    }

    /// All point labels mentioned anywhere in an expression JSON, sorted.
    pub fn labels_in_json(v: &Value) -> Vec<String> {
        fn walk(v: &Value, out: &mut Vec<String>) {
            if let Some(set) = v.get("set").and_then(Value::as_array) {
                out.extend(set.iter().filter_map(|p| p.as_str().map(str::to_owned)));
            }
            if let Some(args) = v.get("args").and_then(Value::as_array) {
                for a in args {
                    walk(a, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(v, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

fn flatten_intersect(args: &[SetExpr]) -> Vec<&SetExpr> {
    let mut out = Vec::new();
    for a in args {
        match a {
            SetExpr::Intersect(inner) => out.extend(flatten_intersect(inner)),
            other => out.push(other),
        }
    }
    out
}

fn flatten_union(args: &[SetExpr]) -> Vec<&SetExpr> {
    let mut out = Vec::new();
    for a in args {
        match a {
            SetExpr::Union(inner) => out.extend(flatten_union(inner)),
            other => out.push(other),
        }
    }
    out
}

struct CodeBuilder {
    parent: Vec<Option<usize>>,
    labels: BTreeMap<usize, PointSet>,
}

impl CodeBuilder {
    fn node(&mut self, up: Option<usize>) -> usize {
        self.parent.push(up);
        self.parent.len() - 1
    }

    /// A subtree whose root is an intersection node coding `e`.
    fn intersection(&mut self, e: &SetExpr, up: Option<usize>) {
        let r = self.node(up);
        match e {
            SetExpr::Base(s) => {
                self.labels.insert(r, s.clone());
            }
            SetExpr::Intersect(args) => {
                for a in flatten_intersect(args) {
                    self.union(a, r);
                }
            }
            SetExpr::Union(_) => self.union(e, r),
        }
    }

    /// A subtree whose root is a union node coding `e`; a base set becomes a
    /// labelled leaf directly.
    fn union(&mut self, e: &SetExpr, up: usize) {
        let p = self.node(Some(up));
        match e {
            SetExpr::Base(s) => {
                self.labels.insert(p, s.clone());
            }
            SetExpr::Union(args) => {
                for a in flatten_union(args) {
                    self.intersection(a, Some(p));
                }
            }
            SetExpr::Intersect(_) => self.intersection(e, Some(p)),
        }
    }
}

/// Builds a code for `e` whose rank is at most `pi + 1`. A base set is a
/// single labelled root; an intersection hangs each conjunct under the root,
/// with base conjuncts as labelled leaves and union conjuncts getting one
/// grandchild subcode per disjunct.
pub fn code_from_expr(e: &SetExpr, space: &PointSpace) -> Result<BorelCode> {
    e.validate(space.len(), usize::MAX)?;
    let mut b = CodeBuilder {
        parent: Vec::new(),
        labels: BTreeMap::new(),
    };
    b.intersection(e, None);
    BorelCode::new(WellFoundedTree::from_parents(b.parent)?, space.clone(), b.labels)
}

/// Reads a code back as an intersection over the root's children of unions
/// over the grandchildren's subcodes. The result has `pi <= rank - 1`.
pub fn expr_from_code(code: &BorelCode) -> SetExpr {
    fn at(code: &BorelCode, v: usize) -> SetExpr {
        let t = code.tree();
        if t.is_leaf(v) {
            return SetExpr::Base(code.leaf_label(v).clone());
        }
        SetExpr::Intersect(
            t.children(v)
                .iter()
                .map(|&c| {
                    if t.is_leaf(c) {
                        SetExpr::Base(code.leaf_label(c).clone())
                    } else {
                        SetExpr::Union(t.children(c).iter().map(|&g| at(code, g)).collect())
                    }
                })
                .collect(),
        )
    }
    at(code, code.tree().root())
}

/// Re-codes `code` on the canonical tree `T_m`.
///
/// With no embedding given, the tree is placed by [`trees::embed`] at width
/// equal to its largest branching, which needs `m >= width * (rank - 1)`. A
/// supplied embedding must be strong and target `T_m`. Each leaf `p` of `T_m`
/// is labelled from the largest embedded node `p'` below or at it: the
/// original label when `p'` is an embedded leaf, otherwise the empty set if
/// `p'` has an odd number of predecessors and the whole space if even.
pub fn pad_to_canonical(code: &BorelCode, m: usize, embedding: Option<&TreeEmbedding>) -> Result<BorelCode> {
    pad_to_canonical_with_budget(code, m, embedding, DEFAULT_NODE_BUDGET)
}

pub fn pad_to_canonical_with_budget(
    code: &BorelCode,
    m: usize,
    embedding: Option<&TreeEmbedding>,
    budget: usize,
) -> Result<BorelCode> {
    let canon = CanonicalTree::with_budget(m, budget)?;
    let src = code.tree();
    let image: Vec<usize> = match embedding {
        Some(e) => {
            if e.source() != src || e.target() != canon.tree() {
                return Err(Error::Precondition(format!(
                    "embedding must map the code's tree into the canonical tree of index {m}"
                )));
            }
            e.validate(true)
                .map_err(|v| Error::Precondition(format!("embedding is not strong: {v}")))?;
            e.map().to_vec()
        }
        None => {
            let w = src.max_branching().max(1);
            let ranks = src.node_ranks();
            let beta = ranks[src.root()];
            if w * beta > m {
                return Err(Error::Precondition(format!(
                    "no strong embedding available: tree of rank {} and branching {w} needs index >= {}, got {m}",
                    beta + 1,
                    w * beta
                )));
            }
            trees::embedding_sequences(src, w, &ranks)
                .iter()
                .map(|s| canon.node(s).expect("sequence below w*beta lies in T_m"))
                .collect()
        }
    };
    let t = canon.tree();
    let mut preimage = vec![None; t.len()];
    for (v, &img) in image.iter().enumerate() {
        preimage[img] = Some(v);
    }
    let n = code.space().len();
    let mut labels = BTreeMap::new();
    for p in t.leaves() {
        let mut q = p;
        let anchor = loop {
            if let Some(v) = preimage[q] {
                break v;
            }
            q = t.parent(q).expect("the root is always embedded");
        };
        let set = if src.is_leaf(anchor) {
            code.leaf_label(anchor).clone()
        } else if t.depth(q) % 2 == 1 {
            PointSet::empty(n)
        } else {
            PointSet::full(n)
        };
        labels.insert(p, set);
    }
    BorelCode::new(t.clone(), code.space().clone(), labels)
}

/// Convenience wrapper used by the CLI: pads to `T_{w*beta}` for the given
/// width.
pub fn pad_with_width(code: &BorelCode, width: Width) -> Result<BorelCode> {
    let beta = code.tree().rank() - 1;
    let e = trees::embed(code.tree(), width)?;
    pad_to_canonical(code, width.get() * beta, Some(&e))
}
