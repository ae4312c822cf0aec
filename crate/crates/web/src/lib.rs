//! wasm-bindgen entry points for the browser demo in `www/`. Each takes
//! plain strings and numbers and returns a JSON string, or an error message.

use serde_json::json;
use wasm_bindgen::prelude::*;

use scottlab::corpus;
use scottlab::efgame::{self, EfConfig};
use scottlab::scott::{self, StructureClass};
use scottlab::structures::{generate, GeneratorKind};
use scottlab::trees::{self, WellFoundedTree};

/// Positions the page lets a single game explore before giving up.
const GAME_BUDGET: u64 = 500_000;

fn msg<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// A seeded random tree, as tree JSON.
#[wasm_bindgen]
pub fn random_tree(seed: u32, max_size: usize, max_branching: usize) -> String {
    corpus::random_tree(&mut corpus::rng(u64::from(seed)), max_size.clamp(1, 200), max_branching.max(1)).to_json()
}

/// Embeds a tree into the canonical tree of index `width * (rank - 1)`.
/// Returns the sequence assigned to each node; the canonical tree itself is
/// never built, so tall trees are fine.
#[wasm_bindgen]
pub fn embed_tree(tree_json: &str, width: usize) -> Result<String, String> {
    let t = WellFoundedTree::from_json(tree_json).map_err(msg)?;
    if width == 0 || t.max_branching() > width {
        return Err(format!("branching {} exceeds width {width}", t.max_branching()));
    }
    let ranks = t.node_ranks();
    let m = width * ranks[t.root()];
    let seqs = trees::embedding_sequences(&t, width, &ranks);
    let strong = trees::validate_sequences(&t, m, &seqs, true).is_ok();
    Ok(json!({
        "rank": t.rank(),
        "targetIndex": m,
        "parents": t.parents(),
        "nodeRanks": ranks,
        "sequences": seqs,
        "strong": strong,
    })
    .to_string())
}

/// Plays the game of index `alpha` between the `p`- and `q`-point models
/// on `n` elements.
#[wasm_bindgen]
pub fn ef_pmodels(n: usize, p: usize, q: usize, alpha: usize, cap_c: usize, cap_f: usize) -> Result<String, String> {
    let m = generate(&GeneratorKind::PModel { n, p }).map_err(msg)?;
    let k = generate(&GeneratorKind::PModel { n, p: q }).map_err(msg)?;
    let cfg = EfConfig::new(trees::canonical(alpha).map_err(msg)?, cap_c, cap_f).map_err(msg)?;
    let o = efgame::ef_solve(&m, &k, &cfg, GAME_BUDGET).map_err(msg)?;
    Ok(json!({"winner": o.winner.as_str(), "positionsExplored": o.positions_explored}).to_string())
}

/// Scott heights of a built-in class: `"pmodel"` (every point model on `n`
/// elements) or `"tournament"` (three-element tournaments, `n` ignored).
#[wasm_bindgen]
pub fn scott_heights(family: &str, n: usize, cap_c: usize, cap_f: usize) -> Result<String, String> {
    let cls = match family {
        "pmodel" => {
            let members = (0..=n)
                .map(|p| generate(&GeneratorKind::PModel { n, p }).map(|s| (format!("p={p}"), s)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(msg)?;
            StructureClass::new(members, cap_c, cap_f).map_err(msg)?
        }
        "tournament" => {
            let t = scott::tournament_class().map_err(msg)?;
            let members = (0..t.len()).map(|i| (t.name(i).to_owned(), t.member(i).clone())).collect();
            StructureClass::new(members, cap_c, cap_f).map_err(msg)?
        }
        other => return Err(format!("unknown family {other:?}")),
    };
    let max = scott::default_max_height(cls.universe());
    let heights = scott::member_heights(&cls, max, GAME_BUDGET).map_err(msg)?;
    let class = heights.iter().try_fold(0, |acc, h| h.map(|h| acc.max(h)));
    let members: Vec<_> = (0..cls.len()).map(|i| json!({"name": cls.name(i), "height": heights[i]})).collect();
    Ok(json!({"members": members, "scottHeight": class, "maxHeight": max}).to_string())
}
