//! Command-line front end: generate instances, embed trees, verify stored
//! embeddings and run seeded experiment grids.
//!
//! Exit codes: 0 for a verified result, 1 for usage or format errors, 2
//! when an embedding failed after all retries or does not verify.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oriented_embed::digraph::{gen_semidegree_digraph, gen_semidegree_digraph_with_density};
use oriented_embed::embed::{
    build_absorber, complete_absorption, embed_almost_spanning, embed_spanning, embed_stars, StarTask,
};
use oriented_embed::oracle::{parse_experiments_seeded, run_trials, summarize, verify_embedding, CSV_HEADER};
use oriented_embed::tree::{decompose_lenient, gen_random_tree, TreeFamily};
use oriented_embed::{Digraph, Embedding, Error, OrientedTree, ParamSchedule, VertexSet};

#[derive(Parser)]
#[command(
    name = "oriented-embed",
    version,
    about = "Embed oriented trees into digraphs of high minimum semidegree"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a host digraph or a tree in the text format.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Embed a tree into a digraph and write the embedding as JSON.
    Embed(EmbedArgs),
    /// Check a stored embedding against its digraph and tree.
    Verify {
        digraph: PathBuf,
        tree: PathBuf,
        embedding: PathBuf,
    },
    /// Run the experiment grid of a config file and write CSV.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Worker threads; results do not depend on it.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Record wall-clock milliseconds (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// A random digraph with δ⁰ ≥ ⌈(1/2+α)n⌉.
    Digraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        /// Edge probability before repair; default min(1, 1/2 + 2α).
        #[arg(long)]
        density: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// A random oriented tree from a family.
    Tree {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "uniform")]
        family: String,
        #[arg(long, default_value_t = 3)]
        max_semidegree: usize,
        /// Designated vertex `t`, stored in the header.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PhaseSel {
    /// The structural decomposition only (JSON dump, no host needed).
    Decompose,
    /// Core plus hanging trees of the decomposition, into the whole host.
    Stars,
    /// Absorber for the whole tree, completed onto a random superset of A.
    Absorber,
    /// Almost-spanning pipeline; needs |T| ≤ (1-ε)n.
    Almost,
    /// Full spanning pipeline; needs |T| = n.
    Spanning,
}

#[derive(Args)]
struct EmbedArgs {
    digraph: PathBuf,
    tree: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Shorthand for `--phase almost`.
    #[arg(long)]
    almost: bool,
    /// ε for the almost-spanning pipeline.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum)]
    phase: Option<PhaseSel>,
    /// α of the schedule; default from the host's minimum semidegree.
    #[arg(long)]
    alpha: Option<f64>,
    /// Schedule override `key=value`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Tree vertex `t` (default: the file's `t`, else 0).
    #[arg(long)]
    t: Option<usize>,
    /// Host vertex for `t` (default: random).
    #[arg(long)]
    v: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A failure with its exit code.
enum Failure {
    Usage(String),
    Embedding(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1, not clap's default 2, which is reserved for
    // embedding failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    let result = match cli.command {
        Command::Gen { kind } => gen(kind),
        Command::Embed(args) => embed(args),
        Command::Verify {
            digraph,
            tree,
            embedding,
        } => verify(&digraph, &tree, &embedding),
        Command::Experiment {
            config,
            seed,
            jobs,
            timings,
            output,
        } => experiment(&config, seed, jobs, timings, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Embedding(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn gen(kind: GenKind) -> Result<(), Failure> {
    match kind {
        GenKind::Digraph {
            n,
            alpha,
            density,
            seed,
            output,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = match density {
                Some(p) => gen_semidegree_digraph_with_density(n, alpha, p, &mut rng)?,
                None => gen_semidegree_digraph(n, alpha, &mut rng)?,
            };
            write_out(output.as_deref(), &d.to_text())?;
            eprintln!(
                "digraph n={n} edges={} min_semidegree={}",
                d.edge_count(),
                d.min_semidegree()
            );
        }
        GenKind::Tree {
            n,
            family,
            max_semidegree,
            t,
            seed,
            output,
        } => {
            let family: TreeFamily = family.parse()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut tree = gen_random_tree(n, max_semidegree, family, &mut rng)?;
            if let Some(t) = t {
                tree = tree.with_t(t)?;
            }
            write_out(output.as_deref(), &tree.to_text())?;
            let (out, inn) = tree.max_semidegree();
            eprintln!("tree n={n} max_out={out} max_in={inn}");
        }
    }
    Ok(())
}

/// The largest α the host's minimum semidegree certifies, capped below 1/2.
fn certified_alpha(d: &Digraph) -> f64 {
    let n = d.n().max(1) as f64;
    (d.min_semidegree() as f64 / n - 0.5).clamp(0.01, 0.49)
}

fn embed(args: EmbedArgs) -> Result<(), Failure> {
    let d = Digraph::from_text(&read(&args.digraph)?)?;
    let tree = OrientedTree::from_text(&read(&args.tree)?)?;
    let phase = match (args.phase, args.almost) {
        (Some(p), false) => p,
        (None, true) | (Some(PhaseSel::Almost), true) => PhaseSel::Almost,
        (None, false) => PhaseSel::Spanning,
        (Some(_), true) => return Err(Failure::Usage("--almost conflicts with --phase".into())),
    };
    let mut params = ParamSchedule::with_alpha(args.alpha.unwrap_or_else(|| certified_alpha(&d)));
    if let Some(eps) = args.eps {
        params.eps = eps;
    }
    for kv in &args.params {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--param expects KEY=VALUE, got `{kv}`")))?;
        params.set(k.trim(), v.trim())?;
    }
    params.validate()?;
    for w in params.warnings() {
        eprintln!("warning: {w}");
    }
    let n = d.n();
    match phase {
        PhaseSel::Spanning if tree.n() != n => {
            return Err(Failure::Usage(format!(
                "spanning embedding needs |T| = n (tree has {}, digraph {n}); use --almost --eps E for smaller trees",
                tree.n()
            )))
        }
        _ if tree.n() > n => {
            return Err(Failure::Usage(format!(
                "tree has {} vertices but the digraph only {n}",
                tree.n()
            )));
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let t = args.t.unwrap_or_else(|| tree.t_or_default());
    if t >= tree.n() {
        return Err(Failure::Usage(format!("t = {t} is not a tree vertex")));
    }
    let v = match args.v {
        Some(v) if v < n => v,
        Some(v) => return Err(Failure::Usage(format!("v = {v} is not a host vertex"))),
        None => rng.gen_range(0..n),
    };
    let failed =
        |e: Error| Failure::Embedding(serde_json::json!({ "error": e.to_string(), "cause": e.cause() }).to_string());
    let text = match phase {
        PhaseSel::Decompose => {
            let dec = decompose_lenient(&tree, t, &params)?;
            serde_json::to_string_pretty(&dec).map_err(|e| Failure::Usage(e.to_string()))?
        }
        PhaseSel::Stars => {
            let dec = decompose_lenient(&tree, t, &params)?;
            let core = dec.t0();
            let task = StarTask {
                tree: &tree,
                t,
                core: &core,
                stars: &dec.stars,
            };
            let (emb, _) = embed_stars(&d, &task, &d.vertices(), v, &params, &mut rng).map_err(failed)?;
            check_partial(&d, &tree, &emb, &dec.t1())?;
            emb.to_json()
        }
        PhaseSel::Absorber => {
            let state = build_absorber(&d, &tree, t, &params, &mut rng).map_err(failed)?;
            let outside: Vec<usize> = (0..n).filter(|&x| !state.a.contains(x)).collect();
            let extra: VertexSet = rand::seq::index::sample(&mut rng, outside.len(), state.missing())
                .into_iter()
                .map(|i| outside[i])
                .collect();
            let emb = complete_absorption(&d, &state, &state.a.union(&extra)).map_err(failed)?;
            check_total(&d, &tree, &emb)?;
            emb.to_json()
        }
        PhaseSel::Almost => {
            let emb = embed_almost_spanning(&d, &tree, t, v, &params, &mut rng).map_err(|e| match e {
                Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
                e => failed(e),
            })?;
            check_total(&d, &tree, &emb)?;
            emb.to_json()
        }
        PhaseSel::Spanning => {
            let emb = embed_spanning(&d, &tree, &params, &mut rng).map_err(|e| match e {
                Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
                e => failed(e),
            })?;
            check_total(&d, &tree, &emb)?;
            emb.to_json()
        }
    };
    write_out(args.output.as_deref(), &(text + "\n"))
}

fn check_total(d: &Digraph, tree: &OrientedTree, emb: &Embedding) -> Result<(), Failure> {
    if verify_embedding(d, tree, emb) {
        Ok(())
    } else {
        Err(Failure::Embedding("embedding fails verification".into()))
    }
}

/// The phase maps exactly `part` and respects every edge inside it.
fn check_partial(d: &Digraph, tree: &OrientedTree, emb: &Embedding, part: &VertexSet) -> Result<(), Failure> {
    let mapped = (0..tree.n()).all(|u| emb.get(u).is_some() == part.contains(u));
    if mapped && emb.respects_edges(d, tree) {
        Ok(())
    } else {
        Err(Failure::Embedding("phase output fails verification".into()))
    }
}

fn verify(digraph: &Path, tree: &Path, embedding: &Path) -> Result<(), Failure> {
    let d = Digraph::from_text(&read(digraph)?)?;
    let tree = OrientedTree::from_text(&read(tree)?)?;
    let emb = Embedding::from_json(&read(embedding)?)?;
    if verify_embedding(&d, &tree, &emb) {
        println!("verified");
        Ok(())
    } else {
        println!("invalid");
        Err(Failure::Embedding("embedding does not verify".into()))
    }
}

fn experiment(config: &Path, seed: u64, jobs: usize, timings: bool, output: Option<&Path>) -> Result<(), Failure> {
    let configs = parse_experiments_seeded(&read(config)?, seed)?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Usage(e.to_string());
    csv.write_record(CSV_HEADER).map_err(io)?;
    for mut cfg in configs {
        if jobs > 0 {
            cfg.jobs = jobs;
        }
        cfg.timings |= timings;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let reports = run_trials(&cfg, &mut rng)?;
        for r in &reports {
            csv.write_record(r.csv_row()).map_err(io)?;
        }
        for s in summarize(&reports) {
            let row = s.csv_row();
            eprintln!(
                "[{}] {} n={} alpha={} {}: {}/{} ({:.1}%)",
                cfg.name,
                s.target,
                s.n,
                s.alpha,
                row[3],
                s.successes,
                s.trials,
                100.0 * s.rate()
            );
            csv.write_record(&row).map_err(io)?;
        }
    }
    let bytes = csv.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    write_out(output, &String::from_utf8(bytes).expect("csv is utf-8"))
}
