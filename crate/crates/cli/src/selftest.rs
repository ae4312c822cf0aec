//! Small oracle-agreement suites behind `scottlab selftest`.

use serde_json::{json, Map, Value};

use scottlab::borelcode::{self, DEFAULT_ORACLE_NODES};
use scottlab::corpus;
use scottlab::efgame;
use scottlab::trees::{self, SearchBudget, Width};
use scottlab::Result;

type Suite<'a> = Box<dyn Fn() -> Result<Tally> + 'a>;

#[derive(Default)]
struct Tally {
    checked: usize,
    mismatches: usize,
}

impl Tally {
    fn record(&mut self, agree: bool) {
        self.checked += 1;
        if !agree {
            self.mismatches += 1;
        }
    }

    fn to_json(&self) -> Value {
        json!({"checked": self.checked, "mismatches": self.mismatches})
    }
}

fn embeddings(seed: u64) -> Result<Tally> {
    let mut r = corpus::rng(seed);
    let mut t = Tally::default();
    for _ in 0..40 {
        let src = corpus::random_tree_of_rank(&mut r, 7, 2, 4);
        let w = src.max_branching().max(1);
        let e = trees::embed(&src, Width::new(w)?)?;
        let target = trees::canonical(w * (src.rank() - 1))?;
        let found = trees::brute_force_embed(&src, &target, SearchBudget::default())?;
        t.record(e.validate(true).is_ok() && found.is_some());
    }
    Ok(t)
}

fn codes(seed: u64) -> Result<Tally> {
    let mut r = corpus::rng(seed.wrapping_add(1));
    let mut t = Tally::default();
    for _ in 0..40 {
        let c = corpus::random_code(&mut r, DEFAULT_ORACLE_NODES, 3);
        let set = c.coded_set();
        for x in 0..3 {
            t.record(borelcode::strategy_enum_solve(&c, x)? == set.contains(x));
        }
    }
    Ok(t)
}

fn expressions(seed: u64) -> Result<Tally> {
    let mut r = corpus::rng(seed.wrapping_add(2));
    let mut t = Tally::default();
    for _ in 0..40 {
        let e = corpus::random_expr(&mut r, 4, 3, 3);
        let space = scottlab::borelcode::PointSpace::numbered(4)?;
        let c = borelcode::code_from_expr(&e, &space)?;
        t.record(c.coded_set() == e.eval());
    }
    Ok(t)
}

fn games() -> Result<Tally> {
    let all = corpus::structure_corpus();
    let mut t = Tally::default();
    for (i, j) in corpus::corpus_pairs(&all) {
        let (m, n) = (&all[i], &all[j]);
        if m.universe() > 2 {
            continue;
        }
        for cfg in corpus::small_configs(m.universe()) {
            t.record(efgame::ef_winner(m, n, &cfg)? == efgame::ef_winner_brute(m, n, &cfg)?);
        }
    }
    Ok(t)
}

/// Runs every suite. The report's `ok` is true when nothing disagreed and no
/// suite failed to run.
pub fn run(seed: u64) -> Value {
    let suites: [(&str, Suite); 4] = [
        ("embeddings", Box::new(move || embeddings(seed))),
        ("codes", Box::new(move || codes(seed))),
        ("expressions", Box::new(move || expressions(seed))),
        ("games", Box::new(games)),
    ];
    let mut ok = true;
    let mut out = Map::new();
    for (name, suite) in suites {
        let v = match suite() {
            Ok(t) => {
                ok &= t.mismatches == 0;
                t.to_json()
            }
            Err(e) => {
                ok = false;
                json!({"error": e.to_string()})
            }
        };
        out.insert(name.to_owned(), v);
    }
    json!({"ok": ok, "seed": seed, "suites": out})
}
