//! Finite relational structures over the universe `{0, ..., n-1}`.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Default universe bound for [`isomorphic`].
pub const DEFAULT_ISO_UNIVERSE: usize = 8;

/// Largest `n^arity` for which a relation is stored densely.
const MAX_DENSE: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: Vec<(String, usize)>,
}

impl Signature {
    pub fn new(relations: Vec<(String, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (name, arity) in &relations {
            if !seen.insert(name.as_str()) {
                return Err(Error::MalformedStructure(format!("duplicate relation {name:?}")));
            }
            if *arity == 0 {
                return Err(Error::MalformedStructure(format!("relation {name:?} has arity 0")));
            }
        }
        Ok(Signature { relations })
    }

    pub fn unary(name: &str) -> Self {
        Signature {
            relations: vec![(name.to_owned(), 1)],
        }
    }

    pub fn binary(name: &str) -> Self {
        Signature {
            relations: vec![(name.to_owned(), 2)],
        }
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn name(&self, r: usize) -> &str {
        &self.relations[r].0
    }

    pub fn arity(&self, r: usize) -> usize {
        self.relations[r].1
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|(n, _)| n == name)
    }

    fn to_json_value(&self) -> Value {
        Value::Array(
            self.relations
                .iter()
                .map(|(name, arity)| json!({"name": name, "arity": arity}))
                .collect(),
        )
    }

    fn from_json_value(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::MalformedStructure("signature must be a list".into()))?;
        let mut rels = Vec::with_capacity(arr.len());
        for (i, item) in arr.iter().enumerate() {
            let name = item
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::MalformedStructure(format!("signature entry {i}: missing name")))?;
            let arity = item
                .get("arity")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::MalformedStructure(format!("signature entry {i}: missing arity")))?;
            rels.push((name.to_owned(), arity as usize));
        }
        Self::new(rels)
    }
}

#[derive(Debug, Clone)]
struct Relation {
    tuples: BTreeSet<Vec<usize>>,
    dense: FixedBitSet,
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.tuples == other.tuples
    }
}

impl Eq for Relation {}

fn encode(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * n + x)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    signature: Signature,
    universe: usize,
    relations: Vec<Relation>,
}

impl FiniteStructure {
    /// `tuples[r]` interprets the `r`-th relation of the signature.
    pub fn new(signature: Signature, universe: usize, tuples: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if universe == 0 {
            return Err(Error::MalformedStructure("universe must be non-empty".into()));
        }
        if tuples.len() != signature.len() {
            return Err(Error::MalformedStructure(format!(
                "{} relations interpreted, signature has {}",
                tuples.len(),
                signature.len()
            )));
        }
        let mut relations = Vec::with_capacity(tuples.len());
        for (r, list) in tuples.into_iter().enumerate() {
            let arity = signature.arity(r);
            let cells = (universe as u128).pow(arity as u32);
            if cells > MAX_DENSE as u128 {
                return Err(Error::MalformedStructure(format!(
                    "relation {:?}: {universe}^{arity} tuples is too many",
                    signature.name(r)
                )));
            }
            let mut dense = FixedBitSet::with_capacity(cells as usize);
            let mut set = BTreeSet::new();
            for t in list {
                if t.len() != arity {
                    return Err(Error::MalformedStructure(format!(
                        "relation {:?}: tuple {t:?} has length {}, arity is {arity}",
                        signature.name(r),
                        t.len()
                    )));
                }
                if t.iter().any(|&x| x >= universe) {
                    return Err(Error::MalformedStructure(format!(
                        "relation {:?}: tuple {t:?}: element out of range",
                        signature.name(r)
                    )));
                }
                dense.insert(encode(&t, universe));
                set.insert(t);
            }
            relations.push(Relation { tuples: set, dense });
        }
        Ok(FiniteStructure {
            signature,
            universe,
            relations,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn tuples(&self, r: usize) -> impl Iterator<Item = &[usize]> + '_ {
        self.relations[r].tuples.iter().map(Vec::as_slice)
    }

    pub fn holds(&self, r: usize, tuple: &[usize]) -> bool {
        self.relations[r].dense.contains(encode(tuple, self.universe))
    }

    /// The image of the structure under a permutation of its universe.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        check_bijection(perm, self.universe)?;
        let tuples = self
            .relations
            .iter()
            .map(|rel| {
                rel.tuples
                    .iter()
                    .map(|t| t.iter().map(|&x| perm[x]).collect())
                    .collect()
            })
            .collect();
        Self::new(self.signature.clone(), self.universe, tuples)
    }

    pub fn to_json_value(&self) -> Value {
        let relations: serde_json::Map<String, Value> = self
            .relations
            .iter()
            .enumerate()
            .map(|(r, rel)| (self.signature.name(r).to_owned(), json!(rel.tuples)))
            .collect();
        json!({
            "signature": self.signature.to_json_value(),
            "universe": self.universe,
            "relations": relations,
        })
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::MalformedStructure("structure must be a JSON object".into()))?;
        if let Some(k) = obj
            .keys()
            .find(|k| !["signature", "universe", "relations"].contains(&k.as_str()))
        {
            return Err(Error::MalformedStructure(format!("unknown field {k:?}")));
        }
        let signature = Signature::from_json_value(
            obj.get("signature")
                .ok_or_else(|| Error::MalformedStructure("missing signature".into()))?,
        )?;
        let universe = obj
            .get("universe")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::MalformedStructure("missing or non-integer universe".into()))?
            as usize;
        let empty = serde_json::Map::new();
        let rels = match obj.get("relations") {
            None => &empty,
            Some(r) => r
                .as_object()
                .ok_or_else(|| Error::MalformedStructure("relations must be an object".into()))?,
        };
        if let Some(k) = rels.keys().find(|k| signature.position(k).is_none()) {
            return Err(Error::MalformedStructure(format!("relation {k:?} is not in the signature")));
        }
        let mut tuples = Vec::with_capacity(signature.len());
        for (name, _) in signature.relations() {
            let list = match rels.get(name) {
                None => Vec::new(),
                Some(l) => {
                    let arr = l.as_array().ok_or_else(|| {
                        Error::MalformedStructure(format!("relation {name:?}: expected a list of tuples"))
                    })?;
                    arr.iter()
                        .enumerate()
                        .map(|(i, t)| {
                            serde_json::from_value::<Vec<usize>>(t.clone()).map_err(|_| {
                                Error::MalformedStructure(format!(
                                    "relation {name:?}: tuple {i} is not a list of naturals"
                                ))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?
                }
            };
            tuples.push(list);
        }
        Self::new(signature, universe, tuples)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_json_value(&v)
    }
}

fn check_bijection(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Precondition(format!("permutation of length {} on {n} points", perm.len())));
    }
    for &y in perm {
        if y >= n || std::mem::replace(&mut seen[y], true) {
            return Err(Error::Precondition(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

fn same_shape(m: &FiniteStructure, n: &FiniteStructure) -> Result<()> {
    if m.signature != n.signature {
        return Err(Error::Precondition("structures have different signatures".into()));
    }
    Ok(())
}

/// A finite partial function between universes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialMap {
    pairs: BTreeMap<usize, usize>,
}

impl PartialMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (x, y) in pairs {
            if let Some(old) = map.insert(x, y) {
                if old != y {
                    return Err(Error::Precondition(format!("{x} is mapped to both {old} and {y}")));
                }
            }
        }
        Ok(PartialMap { pairs: map })
    }

    pub fn identity(n: usize) -> Self {
        PartialMap {
            pairs: (0..n).map(|x| (x, x)).collect(),
        }
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.pairs.get(&x).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|(&x, &y)| (x, y))
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.keys().copied()
    }

    pub fn range(&self) -> BTreeSet<usize> {
        self.pairs.values().copied().collect()
    }

    pub fn is_injective(&self) -> bool {
        self.range().len() == self.pairs.len()
    }

    /// The inverse relation; only a function when the map is injective.
    pub fn inverse(&self) -> Result<Self> {
        Self::from_pairs(self.iter().map(|(x, y)| (y, x)))
    }

    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        PartialMap {
            pairs: self.iter().filter(|&(x, _)| keep(x)).collect(),
        }
    }

    pub fn insert(&mut self, x: usize, y: usize) -> Option<usize> {
        self.pairs.insert(x, y)
    }

    /// Dense form indexed by source element.
    pub fn to_slice(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (x, y) in self.iter() {
            if x < n {
                out[x] = Some(y);
            }
        }
        out
    }
}

/// True iff `f` is injective and, for every relation, a tuple over `dom(f)`
/// holds in `m` exactly when its image holds in `n`.
pub fn is_partial_iso(m: &FiniteStructure, n: &FiniteStructure, f: &PartialMap) -> Result<bool> {
    same_shape(m, n)?;
    if f.iter().any(|(x, y)| x >= m.universe || y >= n.universe) {
        return Ok(false);
    }
    Ok(partial_iso_dense(m, n, &f.to_slice(m.universe)))
}

/// [`is_partial_iso`] on a dense map; signatures are assumed equal and
/// values in range.
pub(crate) fn partial_iso_dense(m: &FiniteStructure, n: &FiniteStructure, f: &[Option<usize>]) -> bool {
    let mut inv = vec![None; n.universe];
    for (x, y) in f.iter().enumerate() {
        if let Some(y) = *y {
            if inv[y].replace(x).is_some() {
                return false;
            }
        }
    }
    let mut buf = Vec::new();
    for r in 0..m.relations.len() {
        for t in &m.relations[r].tuples {
            buf.clear();
            buf.extend(t.iter().map_while(|&x| f[x]));
            if buf.len() == t.len() && !n.holds(r, &buf) {
                return false;
            }
        }
        for t in &n.relations[r].tuples {
            buf.clear();
            buf.extend(t.iter().map_while(|&y| inv[y]));
            if buf.len() == t.len() && !m.holds(r, &buf) {
                return false;
            }
        }
    }
    true
}

/// Per-element counts of tuple occurrences by relation and position, plus
/// diagonal membership. Preserved by isomorphisms.
fn invariants(s: &FiniteStructure) -> Vec<Vec<usize>> {
    let width: usize = s.signature.relations().iter().map(|(_, a)| a + 1).sum();
    let mut inv = vec![vec![0; width]; s.universe];
    let mut off = 0;
    for (r, rel) in s.relations.iter().enumerate() {
        let arity = s.signature.arity(r);
        for t in &rel.tuples {
            for (i, &x) in t.iter().enumerate() {
                inv[x][off + i] += 1;
            }
            if t.iter().all(|&x| x == t[0]) {
                inv[t[0]][off + arity] += 1;
            }
        }
        off += arity + 1;
    }
    inv
}

/// Finds an isomorphism by backtracking with invariant pruning; the result
/// maps each element of `m` to its image in `n`.
pub fn isomorphic(m: &FiniteStructure, n: &FiniteStructure) -> Result<Option<Vec<usize>>> {
    isomorphic_with_budget(m, n, DEFAULT_ISO_UNIVERSE)
}

pub fn isomorphic_with_budget(
    m: &FiniteStructure,
    n: &FiniteStructure,
    max_universe: usize,
) -> Result<Option<Vec<usize>>> {
    same_shape(m, n)?;
    if m.universe > max_universe || n.universe > max_universe {
        return Err(Error::budget(
            "isomorphism universe",
            m.universe.max(n.universe) as u128,
            max_universe as u128,
        ));
    }
    if m.universe != n.universe
        || m.relations
            .iter()
            .zip(&n.relations)
            .any(|(a, b)| a.tuples.len() != b.tuples.len())
    {
        return Ok(None);
    }
    let (im, in_) = (invariants(m), invariants(n));
    let mut sorted_m = im.clone();
    let mut sorted_n = in_.clone();
    sorted_m.sort();
    sorted_n.sort();
    if sorted_m != sorted_n {
        return Ok(None);
    }
    let k = m.universe;
    let mut f = vec![None; k];
    let mut used = vec![false; k];
    if extend_iso(m, n, &im, &in_, 0, &mut f, &mut used) {
        Ok(Some(f.into_iter().map(|y| y.expect("total")).collect()))
    } else {
        Ok(None)
    }
}

fn extend_iso(
    m: &FiniteStructure,
    n: &FiniteStructure,
    im: &[Vec<usize>],
    in_: &[Vec<usize>],
    x: usize,
    f: &mut [Option<usize>],
    used: &mut [bool],
) -> bool {
    if x == f.len() {
        return true;
    }
    for y in 0..n.universe {
        if used[y] || im[x] != in_[y] {
            continue;
        }
        f[x] = Some(y);
        used[y] = true;
        if partial_iso_dense(m, n, f) && extend_iso(m, n, im, in_, x + 1, f, used) {
            return true;
        }
        used[y] = false;
        f[x] = None;
    }
    false
}

/// Parameters for [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// Unary `P` holding of the first `p` of `n` elements.
    PModel { n: usize, p: usize },
    /// Equivalence relations `E0, ..., E{levels-1}`, each `E{g+1}` class
    /// splitting into `branching` classes of `E{g}`, with `E0` classes of size
    /// `leaf_size`. A finite stand-in for a theory asking for infinitely many
    /// infinite classes at each level.
    NestedEq {
        levels: usize,
        branching: usize,
        leaf_size: usize,
    },
    /// Every tuple present independently with probability `density`.
    Random {
        seed: u64,
        signature: Signature,
        n: usize,
        density: f64,
    },
}

pub fn generate(kind: &GeneratorKind) -> Result<FiniteStructure> {
    match kind {
        &GeneratorKind::PModel { n, p } => {
            if p > n {
                return Err(Error::Precondition(format!("pmodel needs p <= n, got p={p}, n={n}")));
            }
            FiniteStructure::new(Signature::unary("P"), n, vec![(0..p).map(|x| vec![x]).collect()])
        }
        &GeneratorKind::NestedEq {
            levels,
            branching,
            leaf_size,
        } => {
            if levels == 0 || branching == 0 || leaf_size == 0 {
                return Err(Error::Precondition("nestedEq parameters must be positive".into()));
            }
            let size = (branching as u128)
                .checked_pow(levels as u32)
                .and_then(|b| b.checked_mul(leaf_size as u128))
                .filter(|&s| s <= 4096)
                .ok_or_else(|| Error::Precondition("nestedEq universe is too large".into()))?
                as usize;
            let sig = Signature::new((0..levels).map(|g| (format!("E{g}"), 2)).collect())?;
            let mut tuples = Vec::with_capacity(levels);
            let mut class = leaf_size;
            for _ in 0..levels {
                let mut rel = Vec::new();
                for x in 0..size {
                    for y in 0..size {
                        if x / class == y / class {
                            rel.push(vec![x, y]);
                        }
                    }
                }
                tuples.push(rel);
                class *= branching;
            }
            FiniteStructure::new(sig, size, tuples)
        }
        GeneratorKind::Random {
            seed,
            signature,
            n,
            density,
        } => {
            if !(0.0..=1.0).contains(density) {
                return Err(Error::Precondition(format!("density {density} is outside [0, 1]")));
            }
            if *n == 0 {
                return Err(Error::Precondition("random structure needs a non-empty universe".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut tuples = Vec::with_capacity(signature.len());
            for r in 0..signature.len() {
                let mut rel = Vec::new();
                for_each_tuple(*n, signature.arity(r), |t| {
                    if rng.gen_bool(*density) {
                        rel.push(t.to_vec());
                    }
                });
                tuples.push(rel);
            }
            FiniteStructure::new(signature.clone(), *n, tuples)
        }
    }
}

/// Calls `f` on every tuple in `{0..n}^arity` in lexicographic order.
pub fn for_each_tuple(n: usize, arity: usize, mut f: impl FnMut(&[usize])) {
    let mut t = vec![0; arity];
    loop {
        f(&t);
        let mut i = arity;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
        }
    }
}

fn tag_name(sig: &Signature) -> String {
    let mut name = String::from("P");
    while sig.position(&name).is_some() {
        name.push('\'');
    }
    name
}

/// Tagged disjoint union: `m` on the even elements via `x -> 2x`, `n` on the
/// odd ones via `x -> 2x+1`, and a fresh unary predicate (appended last to the
/// signature, named `P` plus enough primes to be new) holding of the evens.
pub fn pair_structure(m: &FiniteStructure, n: &FiniteStructure) -> Result<FiniteStructure> {
    same_shape(m, n)?;
    if m.universe != n.universe {
        return Err(Error::Precondition(format!(
            "pair structure needs equal universes, got {} and {}",
            m.universe, n.universe
        )));
    }
    let k = m.universe;
    let mut rels = m.signature.relations.clone();
    rels.push((tag_name(&m.signature), 1));
    let sig = Signature::new(rels)?;
    let mut tuples = Vec::with_capacity(sig.len());
    for r in 0..m.relations.len() {
        let mut rel: Vec<Vec<usize>> = m.tuples(r).map(|t| t.iter().map(|&x| 2 * x).collect()).collect();
        rel.extend(n.tuples(r).map(|t| t.iter().map(|&x| 2 * x + 1).collect()));
        tuples.push(rel);
    }
    tuples.push((0..k).map(|x| vec![2 * x]).collect());
    FiniteStructure::new(sig, 2 * k, tuples)
}

/// Inverts [`pair_structure`]: the last relation is read as the tag, and the
/// tagged and untagged parts are pulled back along their order-preserving
/// enumerations. Tuples mixing the two parts are dropped. The tag must hold of
/// exactly half the universe.
pub fn decode_pair(a: &FiniteStructure) -> Result<(FiniteStructure, FiniteStructure)> {
    let sig = a.signature.relations();
    let Some((_, 1)) = sig.last() else {
        return Err(Error::Precondition("last relation is not a unary tag".into()));
    };
    let tag = sig.len() - 1;
    let inside: Vec<usize> = (0..a.universe).filter(|&x| a.holds(tag, &[x])).collect();
    let outside: Vec<usize> = (0..a.universe).filter(|&x| !a.holds(tag, &[x])).collect();
    if inside.len() != outside.len() {
        return Err(Error::Precondition(format!(
            "unbalanced tag: {} tagged and {} untagged elements",
            inside.len(),
            outside.len()
        )));
    }
    let base = Signature::new(sig[..tag].to_vec())?;
    let pull = |part: &[usize]| {
        let mut pos = vec![None; a.universe];
        for (i, &x) in part.iter().enumerate() {
            pos[x] = Some(i);
        }
        let tuples = (0..tag)
            .map(|r| {
                a.tuples(r)
                    .filter_map(|t| t.iter().map(|&x| pos[x]).collect::<Option<Vec<_>>>())
                    .collect()
            })
            .collect();
        FiniteStructure::new(base.clone(), part.len(), tuples)
    };
    Ok((pull(&inside)?, pull(&outside)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmodel(n: usize, p: usize) -> FiniteStructure {
        generate(&GeneratorKind::PModel { n, p }).unwrap()
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> FiniteStructure {
        FiniteStructure::new(
            Signature::binary("E"),
            n,
            vec![edges.iter().map(|&(x, y)| vec![x, y]).collect()],
        )
        .unwrap()
    }

    #[test]
    fn parse_example() {
        let text = r#"{"signature":[{"name":"P","arity":1}],"universe":4,"relations":{"P":[[0]]}}"#;
        let s = FiniteStructure::from_json(text).unwrap();
        assert_eq!(s, pmodel(4, 1));
        assert_eq!(
            s.to_json(),
            r#"{"relations":{"P":[[0]]},"signature":[{"arity":1,"name":"P"}],"universe":4}"#
        );
        assert_eq!(FiniteStructure::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn parse_errors_name_the_culprit() {
        let bad = r#"{"signature":[{"name":"P","arity":1}],"universe":4,"relations":{"P":[[4]]}}"#;
        let e = FiniteStructure::from_json(bad).unwrap_err().to_string();
        assert!(e.contains("element out of range") && e.contains("\"P\""), "{e}");
        let bad = r#"{"signature":[{"name":"E","arity":2}],"universe":2,"relations":{"E":[[0]]}}"#;
        assert!(FiniteStructure::from_json(bad).unwrap_err().to_string().contains("arity"));
        let bad = r#"{"signature":[{"name":"E","arity":2}],"universe":2,"relations":{"F":[]}}"#;
        assert!(FiniteStructure::from_json(bad).is_err());
        assert!(FiniteStructure::from_json("[1").is_err());
    }

    #[test]
    fn serialization_sorts_tuples() {
        let g = graph(3, &[(2, 0), (0, 1), (1, 2), (0, 1)]);
        assert!(g.to_json().contains(r#""E":[[0,1],[1,2],[2,0]]"#));
    }

    #[test]
    fn partial_iso_examples() {
        let (m, n) = (pmodel(3, 1), pmodel(3, 2));
        assert!(is_partial_iso(&m, &n, &PartialMap::new()).unwrap());
        assert!(is_partial_iso(&m, &m, &PartialMap::identity(3)).unwrap());
        let f = PartialMap::from_pairs([(0, 2)]).unwrap();
        assert!(!is_partial_iso(&m, &n, &f).unwrap());
        let f = PartialMap::from_pairs([(0, 0), (1, 0)]).unwrap();
        assert!(!is_partial_iso(&m, &m, &f).unwrap());
        let g = graph(2, &[(0, 1)]);
        assert!(is_partial_iso(&m, &g, &PartialMap::new()).is_err());
    }

    #[test]
    fn isomorphism_examples() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let h = g.relabel(&[3, 1, 0, 2]).unwrap();
        let iso = isomorphic(&g, &h).unwrap().expect("relabelled copy");
        assert_eq!(g.relabel(&iso).unwrap(), h);
        assert!(isomorphic(&g, &graph(4, &[(0, 1), (1, 2), (3, 2)])).unwrap().is_none());
        for p in 0..=4 {
            for q in 0..=4 {
                let r = isomorphic(&pmodel(4, p), &pmodel(4, q)).unwrap();
                assert_eq!(r.is_some(), p == q);
            }
        }
        assert!(isomorphic(&pmodel(9, 1), &pmodel(9, 1)).unwrap_err().is_resource());
        assert!(isomorphic_with_budget(&pmodel(9, 1), &pmodel(9, 1), 9).unwrap().is_some());
    }

    #[test]
    fn generators() {
        assert_eq!(pmodel(4, 1).tuples(0).collect::<Vec<_>>(), vec![&[0][..]]);
        assert!(generate(&GeneratorKind::PModel { n: 2, p: 3 }).is_err());
        let e = generate(&GeneratorKind::NestedEq {
            levels: 1,
            branching: 2,
            leaf_size: 2,
        })
        .unwrap();
        assert_eq!(e.universe(), 4);
        assert_eq!(e.signature().name(0), "E0");
        assert!(e.holds(0, &[0, 1]) && e.holds(0, &[3, 2]) && !e.holds(0, &[1, 2]));
        let e = generate(&GeneratorKind::NestedEq {
            levels: 2,
            branching: 3,
            leaf_size: 1,
        })
        .unwrap();
        assert_eq!(e.universe(), 9);
        assert!(e.holds(1, &[0, 2]) && !e.holds(1, &[2, 3]) && !e.holds(0, &[0, 1]));
        let kind = GeneratorKind::Random {
            seed: 1,
            signature: Signature::binary("E"),
            n: 5,
            density: 0.4,
        };
        assert_eq!(generate(&kind).unwrap(), generate(&kind).unwrap());
    }

    #[test]
    fn pair_structure_round_trip() {
        let m = graph(3, &[(0, 1), (1, 1)]);
        let n = graph(3, &[(2, 0)]);
        let a = pair_structure(&m, &n).unwrap();
        assert_eq!(a.universe(), 6);
        assert_eq!(a.signature().name(1), "P");
        assert_eq!(a.tuples(0).count(), 3);
        for t in a.tuples(0) {
            assert!(t.iter().all(|x| x % 2 == t[0] % 2), "mixed tuple {t:?}");
        }
        assert_eq!(decode_pair(&a).unwrap(), (m.clone(), n));
        assert_eq!(decode_pair(&pair_structure(&m, &m).unwrap()).unwrap(), (m.clone(), m));

        // a tag named P is already taken
        let p = pmodel(2, 1);
        let a = pair_structure(&p, &p).unwrap();
        assert_eq!(a.signature().name(1), "P'");
        let unbalanced = FiniteStructure::new(a.signature().clone(), 4, vec![vec![], vec![vec![0]]]).unwrap();
        assert!(decode_pair(&unbalanced).unwrap_err().to_string().contains("unbalanced"));
    }

    #[test]
    fn tuple_enumeration_order() {
        let mut seen = Vec::new();
        for_each_tuple(2, 2, |t| seen.push(t.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
