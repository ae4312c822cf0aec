//! The `scottlab` command line. Every subcommand reads JSON files, writes
//! one line of JSON with sorted keys to stdout and diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 domain or precondition error, 2 usage error,
//! 3 budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use scottlab::borelcode::{self, BorelCode, PointSpace, SetExpr};
use scottlab::efgame::{self, EfConfig};
use scottlab::scott::{self, Link2Budget, StructureClass};
use scottlab::structures::{self, FiniteStructure, GeneratorKind, Signature};
use scottlab::trees::{self, CanonicalTree, TreeEmbedding, WellFoundedTree, Width, DEFAULT_NODE_BUDGET};
use scottlab::Error;

mod selftest;

pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scottlab", version, about = "Well-founded trees, Borel codes and EF games at finite scale")]
struct Cli {
    /// Largest tree to materialize.
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
    /// Largest number of game positions (or run-tree nodes) to explore.
    #[arg(long, global = true, default_value_t = efgame::DEFAULT_POSITION_BUDGET)]
    position_budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank of a tree.
    TreeRank(Input),
    /// The canonical tree of strictly decreasing sequences below m.
    TreeCanonical {
        #[arg(long)]
        m: usize,
    },
    /// Strong embedding of a tree into the canonical tree of index width * (rank - 1).
    TreeEmbed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        width: usize,
    },
    /// The tree needing index width * beta.
    TreeWitness {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        beta: usize,
    },
    /// Coded set of a Borel code.
    CodeSolve {
        #[arg(long)]
        input: PathBuf,
        /// Decide membership by enumerating strategies instead.
        #[arg(long)]
        oracle: bool,
    },
    /// Code for an expression.
    CodeFromExpr {
        #[arg(long)]
        input: PathBuf,
        /// JSON list of point labels; defaults to the labels the expression mentions.
        #[arg(long)]
        space: Option<PathBuf>,
    },
    /// Expression for a code, with its hierarchy level.
    ExprFromCode(Input),
    /// Re-code on a canonical tree.
    CodePad {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m: usize,
        /// Strong embedding of the code's tree into the canonical tree.
        #[arg(long)]
        embedding: Option<PathBuf>,
    },
    /// Generate a structure.
    StructGen(GenArgs),
    /// Decide isomorphism.
    StructIso {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Solve a set-move EF game.
    Ef {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[command(flatten)]
        tree: TreeChoice,
        #[arg(long)]
        cap_c: Option<usize>,
        #[arg(long)]
        cap_f: Option<usize>,
    },
    /// Scott height of a class of structures.
    Scott {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        max_height: Option<usize>,
        /// Report one member (file stem) instead of the class.
        #[arg(long)]
        member: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run-tree code for the isomorphism relation on a class.
    Link2 {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        max_height: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Oracle agreement checks at small sizes.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct Input {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct TreeChoice {
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<usize>,
}

#[derive(Debug, Args)]
struct ClassArgs {
    /// Directory of structure files; members are named by file stem.
    #[arg(long)]
    class: PathBuf,
    #[arg(long)]
    cap_c: Option<usize>,
    #[arg(long)]
    cap_f: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Pmodel,
    NestedEq,
    Random,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    branching: Option<usize>,
    #[arg(long)]
    leaf_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relations as NAME:ARITY, comma separated.
    #[arg(long)]
    signature: Option<String>,
    #[arg(long)]
    density: Option<f64>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli) {
        Ok(v) => {
            let _ = writeln!(out, "{v}");
            0
        }
        Err(Failure::Selftest(v)) => {
            let _ = writeln!(out, "{v}");
            let _ = writeln!(err, "selftest: mismatches found");
            EXIT_DOMAIN
        }
        Err(Failure::Core(e)) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_resource() {
                EXIT_RESOURCE
            } else {
                EXIT_DOMAIN
            }
        }
        Err(Failure::Io(path, e)) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            EXIT_DOMAIN
        }
    }
}

enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Selftest(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = std::result::Result<Value, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn read_tree(path: &Path) -> std::result::Result<WellFoundedTree, Failure> {
    Ok(WellFoundedTree::from_json(&read(path)?)?)
}

fn read_structure(path: &Path) -> std::result::Result<FiniteStructure, Failure> {
    Ok(FiniteStructure::from_json(&read(path)?)?)
}

fn read_code(path: &Path) -> std::result::Result<BorelCode, Failure> {
    Ok(BorelCode::from_json(&read(path)?)?)
}

fn precondition(msg: impl Into<String>) -> Failure {
    Failure::Core(Error::Precondition(msg.into()))
}

fn read_class(args: &ClassArgs) -> std::result::Result<StructureClass, Failure> {
    let entries = fs::read_dir(&args.class).map_err(|e| Failure::Io(args.class.clone(), e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut members = Vec::with_capacity(files.len());
    for f in files {
        let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        members.push((name, read_structure(&f)?));
    }
    let universe = members.first().map_or(0, |(_, s)| s.universe());
    let cap_c = args.cap_c.unwrap_or(universe);
    let cap_f = args.cap_f.unwrap_or(universe);
    Ok(StructureClass::new(members, cap_c, cap_f)?)
}

fn set_jobs(jobs: Option<usize>) -> std::result::Result<(), Failure> {
    if let Some(k) = jobs {
        if k == 0 {
            return Err(precondition("--jobs must be positive"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    Ok(())
}

fn execute(cli: Cli) -> Outcome {
    let budget = cli.node_budget;
    let positions = cli.position_budget;
    match cli.command {
        Command::TreeRank(Input { input }) => Ok(json!({"rank": read_tree(&input)?.rank()})),
        Command::TreeCanonical { m } => Ok(CanonicalTree::with_budget(m, budget)?.tree().to_json_value()),
        Command::TreeEmbed { input, width } => {
            let t = read_tree(&input)?;
            let e = trees::embed_with_budget(&t, Width::new(width)?, budget)?;
            Ok(json!({
                "embedding": e.to_json_value(),
                "targetIndex": width * (t.rank() - 1),
            }))
        }
        Command::TreeWitness { width, beta } => {
            Ok(trees::witness_tree_with_budget(Width::new(width)?, beta, budget)?.to_json_value())
        }
        Command::CodeSolve { input, oracle } => {
            let c = read_code(&input)?;
            let set = if oracle {
                let mut s = c.space().empty_set();
                for x in 0..c.space().len() {
                    if borelcode::strategy_enum_solve(&c, x)? {
                        s.insert(x);
                    }
                }
                s
            } else {
                c.coded_set()
            };
            Ok(json!({"codedSet": c.space().set_to_json(&set)}))
        }
        Command::CodeFromExpr { input, space } => {
            let raw: Value = serde_json::from_str(&read(&input)?).map_err(Error::from)?;
            let labels: Vec<String> = match space {
                Some(p) => serde_json::from_str(&read(&p)?).map_err(Error::from)?,
                None => SetExpr::labels_in_json(&raw),
            };
            if labels.is_empty() {
                return Err(precondition("the expression mentions no points; pass --space"));
            }
            let sp = PointSpace::new(labels)?;
            let e = SetExpr::from_json_value(&raw, &sp)?;
            e.validate(sp.len(), borelcode::DEFAULT_FAN_OUT)?;
            Ok(borelcode::code_from_expr(&e, &sp)?.to_json_value())
        }
        Command::ExprFromCode(Input { input }) => {
            let c = read_code(&input)?;
            let e = borelcode::expr_from_code(&c);
            let level = e.classify();
            Ok(json!({
                "expr": e.to_json_value(c.space()),
                "piLevel": level.pi,
                "sigmaLevel": level.sigma,
            }))
        }
        Command::CodePad { input, m, embedding } => {
            let c = read_code(&input)?;
            let e = match embedding {
                Some(p) => {
                    let target = CanonicalTree::with_budget(m, budget)?.into_tree();
                    Some(TreeEmbedding::from_json(&read(&p)?, c.tree().clone(), target)?)
                }
                None => None,
            };
            Ok(borelcode::pad_to_canonical_with_budget(&c, m, e.as_ref(), budget)?.to_json_value())
        }
        Command::StructGen(g) => Ok(structures::generate(&generator(&g)?)?.to_json_value()),
        Command::StructIso { left, right } => {
            let (m, n) = (read_structure(&left)?, read_structure(&right)?);
            let f = structures::isomorphic(&m, &n)?;
            Ok(json!({"isomorphic": f.is_some(), "bijection": f}))
        }
        Command::Ef {
            left,
            right,
            tree,
            cap_c,
            cap_f,
        } => {
            let (m, n) = (read_structure(&left)?, read_structure(&right)?);
            let t = match (tree.tree, tree.alpha) {
                (Some(p), _) => read_tree(&p)?,
                (None, Some(a)) => CanonicalTree::with_budget(a, budget)?.into_tree(),
                (None, None) => unreachable!("clap requires one of --tree, --alpha"),
            };
            let k = m.universe();
            let cfg = EfConfig::new(t, cap_c.unwrap_or(k), cap_f.unwrap_or(k))?;
            let o = efgame::ef_solve(&m, &n, &cfg, positions)?;
            Ok(json!({"winner": o.winner.as_str(), "positionsExplored": o.positions_explored}))
        }
        Command::Scott {
            class,
            max_height,
            member,
            jobs,
        } => {
            set_jobs(jobs)?;
            let cls = read_class(&class)?;
            let h = max_height.unwrap_or_else(|| scott::default_max_height(cls.universe()));
            let heights = scott::member_heights(&cls, h, positions)?;
            let (b, d) = cls.caps();
            let members: serde_json::Map<String, Value> =
                (0..cls.len()).map(|i| (cls.name(i).to_owned(), json!(heights[i]))).collect();
            let result = match member {
                Some(name) => {
                    let i = (0..cls.len())
                        .find(|&i| cls.name(i) == name)
                        .ok_or_else(|| precondition(format!("no member named {name:?}")))?;
                    heights[i]
                }
                None => heights.iter().try_fold(0, |acc, h| h.map(|h| acc.max(h))),
            };
            Ok(json!({
                "scottHeight": result,
                "members": members,
                "capC": b,
                "capF": d,
                "maxHeight": h,
            }))
        }
        Command::Link2 { class, max_height, jobs } => {
            set_jobs(jobs)?;
            let cls = read_class(&class)?;
            let h = max_height.unwrap_or_else(|| scott::default_max_height(cls.universe()));
            let r = scott::verify_link2_with_budget(
                &cls,
                h,
                Link2Budget {
                    positions,
                    run_nodes: positions,
                },
            )?;
            Ok(r.to_json_value())
        }
        Command::Selftest { seed } => {
            let report = selftest::run(seed);
            if report["ok"] == json!(true) {
                Ok(report)
            } else {
                Err(Failure::Selftest(report))
            }
        }
    }
}

fn need<T>(v: Option<T>, flag: &str, kind: &str) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| precondition(format!("--kind {kind} needs --{flag}")))
}

fn generator(g: &GenArgs) -> std::result::Result<GeneratorKind, Failure> {
    Ok(match g.kind {
        Kind::Pmodel => GeneratorKind::PModel {
            n: need(g.n, "n", "pmodel")?,
            p: need(g.p, "p", "pmodel")?,
        },
        Kind::NestedEq => GeneratorKind::NestedEq {
            levels: need(g.levels, "levels", "nested-eq")?,
            branching: need(g.branching, "branching", "nested-eq")?,
            leaf_size: need(g.leaf_size, "leaf-size", "nested-eq")?,
        },
        Kind::Random => {
            let text = need(g.signature.as_deref(), "signature", "random")?;
            let mut rels = Vec::new();
            for part in text.split(',') {
                let (name, arity) = part
                    .split_once(':')
                    .ok_or_else(|| precondition(format!("signature entry {part:?} is not NAME:ARITY")))?;
                let arity: usize = arity
                    .parse()
                    .map_err(|_| precondition(format!("bad arity in {part:?}")))?;
                rels.push((name.to_owned(), arity));
            }
            GeneratorKind::Random {
                seed: need(g.seed, "seed", "random")?,
                signature: Signature::new(rels)?,
                n: need(g.n, "n", "random")?,
                density: g.density.unwrap_or(0.5),
            }
        }
    })
}
