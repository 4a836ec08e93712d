use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use biwalk::constraints::{mine_constraints, ConstraintSet};
use biwalk::corpus::{build_hybrid, merge_balanced, merge_shuffle, BalanceSpec, TaggedCorpus};
use biwalk::embed::{build_vocab, train, EncodedCorpus, Hyperparams, Matrix, WordVectors};
use biwalk::eval::{build_crosslingual, score_pairs, MonoDataset, OovPolicy, Scorer, SimilarityDataset};
use biwalk::kb::{KnowledgeGraph, Lexicon};
use biwalk::mapping::{fit_orthogonal, preprocess, LinearMap, MappingProblem};
use biwalk::pipeline::{eval_mapped, run_pipeline, PipelineConfig};
use biwalk::walker::{walks, WalkConfig, WalkMode};
use biwalk::{Error, Result};

#[derive(Parser)]
#[command(name = "biwalk", version, about = "Bilingual word embeddings from wordnet walks and text")]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with random walks over a wordnet.
    Walk(WalkArgs),
    /// Concatenate and shuffle corpora.
    Merge(MergeArgs),
    /// Mix natural and synthetic text to target shares.
    Hybrid(HybridArgs),
    /// Mine synonym and translation constraints from a lexicon.
    Constraints(ConstraintArgs),
    /// Train skipgram embeddings, optionally with constraints.
    Train(TrainArgs),
    /// Fit an orthogonal map between two monolingual models.
    Map(MapArgs),
    /// Score a similarity dataset with Spearman correlation.
    Eval(EvalArgs),
    /// Build a cross-lingual dataset from two translated monolingual ones.
    Crossling(CrosslingArgs),
    /// Run a whole experiment from a TOML config.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct KbArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    /// Comma-separated languages to load; inferred from the lexicon if omitted.
    #[arg(long, value_delimiter = ',')]
    langs: Vec<String>,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    contexts: usize,
    /// Stop at the first context boundary past this many tokens instead.
    #[arg(long)]
    target_tokens: Option<u64>,
    /// `bi` or `mono:LANG`.
    #[arg(long, default_value = "bi")]
    mode: WalkMode,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, env = "BIWALK_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also write a token-level trace (context, position, concept, lang, token).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct MergeArgs {
    /// Natural corpus as `LANG=FILE`; repeatable.
    #[arg(long = "natural", value_parser = lang_path)]
    naturals: Vec<(String, PathBuf)>,
    /// Synthetic corpus; attributed through `--trace` when given.
    #[arg(long)]
    synthetic: Vec<PathBuf>,
    #[arg(long)]
    trace: Vec<PathBuf>,
    /// Truncate every input to the size of the smallest first.
    #[arg(long)]
    balanced: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HybridArgs {
    /// Natural corpus as `LANG=FILE`; one or two.
    #[arg(long = "natural", value_parser = lang_path, required = true)]
    naturals: Vec<(String, PathBuf)>,
    #[arg(long)]
    synthetic: PathBuf,
    /// Trace written by `walk --trace`, used to attribute synthetic tokens.
    #[arg(long)]
    trace: PathBuf,
    /// Share of the first `--natural` language.
    #[arg(long, default_value_t = 0.5)]
    lang_share: f64,
    /// Share of natural text.
    #[arg(long, default_value_t = 0.5)]
    source_share: f64,
    /// Total tokens; the largest feasible total if omitted.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Accounting matrix TSV; printed to stdout if omitted.
    #[arg(long)]
    accounting: Option<PathBuf>,
}

#[derive(Args)]
struct ConstraintArgs {
    #[command(flatten)]
    kb: KbArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    bilingual_only: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// TOML file with hyperparameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    neg: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "BIWALK_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// W+C vectors.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    out_w: Option<PathBuf>,
    #[arg(long)]
    out_c: Option<PathBuf>,
    /// Training summary as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    tgt: PathBuf,
    /// Constraint TSV; its bilingual pairs form the dictionary.
    #[arg(long)]
    dict: PathBuf,
    #[arg(long)]
    src_lang: String,
    #[arg(long)]
    tgt_lang: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Joint model (W+C vectors).
    #[arg(long, required_unless_present = "map")]
    model: Option<PathBuf>,
    #[arg(long, requires_all = ["src", "tgt", "src_lang"])]
    map: Option<PathBuf>,
    #[arg(long)]
    src: Option<PathBuf>,
    #[arg(long)]
    tgt: Option<PathBuf>,
    /// Dataset language looked up in `--src` and mapped.
    #[arg(long)]
    src_lang: Option<String>,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "exclude")]
    oov: OovPolicy,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CrosslingArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    lang_a: String,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    lang_b: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "BIWALK_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn lang_path(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((l, p)) if !l.is_empty() && !p.is_empty() => Ok((l.to_owned(), PathBuf::from(p))),
        _ => Err(format!("expected LANG=FILE, got {s:?}")),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, w: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut out = create(path)?;
    w(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

fn load_kb(kb: &KbArgs, mode: Option<&WalkMode>) -> Result<(KnowledgeGraph, Lexicon)> {
    let graph = KnowledgeGraph::load(&kb.graph)?;
    let langs = if !kb.langs.is_empty() {
        kb.langs.clone()
    } else if let Some(WalkMode::Monolingual(l)) = mode {
        vec![l.clone()]
    } else {
        let found = Lexicon::languages_in(&kb.lexicon)?;
        if found.len() > 2 {
            return Err(Error::Config(format!(
                "lexicon has languages {found:?}; pick two with --langs"
            )));
        }
        found
    };
    let refs: Vec<&str> = langs.iter().map(String::as_str).collect();
    let lex = Lexicon::load(&kb.lexicon, &graph, &refs)?;
    Ok((graph, lex))
}

fn set_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::debug!("thread pool already configured: {e}");
        }
    }
}

fn cmd_walk(a: WalkArgs) -> Result<()> {
    set_threads(a.threads);
    let (graph, lex) = load_kb(&a.kb, Some(&a.mode))?;
    let cfg = WalkConfig {
        alpha: a.alpha,
        contexts: a.contexts,
        target_tokens: a.target_tokens,
        seed: a.seed,
        mode: a.mode,
    };
    let sc = walks(&graph, &lex, &cfg)?;
    finish(&a.out, |w| sc.write_text(&lex, w))?;
    if let Some(t) = &a.trace {
        finish(t, |w| sc.write_trace(&graph, &lex, w))?;
    }
    let per_lang: Vec<String> = lex
        .languages()
        .iter()
        .zip(&sc.token_counts)
        .map(|(l, n)| format!("{l}={n}"))
        .collect();
    eprintln!(
        "{} contexts, {} tokens ({})",
        sc.contexts.len(),
        sc.token_total(),
        per_lang.join(" ")
    );
    Ok(())
}

fn load_synthetics(files: &[PathBuf], traces: &[PathBuf]) -> Result<Vec<TaggedCorpus>> {
    if !traces.is_empty() && traces.len() != files.len() {
        return Err(Error::Config("give one --trace per --synthetic or none".into()));
    }
    files
        .iter()
        .enumerate()
        .map(|(i, f)| TaggedCorpus::load_synthetic(f, traces.get(i).map(PathBuf::as_path), None))
        .collect()
}

fn cmd_merge(a: MergeArgs) -> Result<()> {
    let mut corpora = a
        .naturals
        .iter()
        .map(|(l, p)| TaggedCorpus::load_natural(p, l))
        .collect::<Result<Vec<_>>>()?;
    corpora.extend(load_synthetics(&a.synthetic, &a.trace)?);
    let merged = if a.balanced {
        merge_balanced(&corpora, a.seed)?
    } else {
        merge_shuffle(&corpora, a.seed)?
    };
    finish(&a.out, |w| merged.write_text(w))?;
    eprintln!("{} contexts, {} tokens", merged.len(), merged.total_tokens());
    Ok(())
}

fn cmd_hybrid(a: HybridArgs) -> Result<()> {
    let naturals = a
        .naturals
        .iter()
        .map(|(l, p)| TaggedCorpus::load_natural(p, l))
        .collect::<Result<Vec<_>>>()?;
    let synthetic = TaggedCorpus::load_synthetic(&a.synthetic, Some(&a.trace), None)?;
    let language_shares = match a.naturals.as_slice() {
        [(l, _)] => vec![(l.clone(), 1.0)],
        [(l1, _), (l2, _)] => vec![(l1.clone(), a.lang_share), (l2.clone(), 1.0 - a.lang_share)],
        _ => return Err(Error::Config("give one or two --natural corpora".into())),
    };
    let spec = BalanceSpec {
        total_tokens: a.budget,
        language_shares,
        natural_share: a.source_share,
        tolerance: a.tolerance,
    };
    let (hybrid, acc) = build_hybrid(&naturals, &synthetic, &spec, a.seed)?;
    finish(&a.out, |w| hybrid.write_text(w))?;
    match &a.accounting {
        Some(p) => finish(p, |w| acc.write_tsv(w))?,
        None => acc
            .write_tsv(std::io::stdout().lock())
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

fn cmd_constraints(a: ConstraintArgs) -> Result<()> {
    let (_, lex) = load_kb(&a.kb, None)?;
    let mut cs = mine_constraints(&lex);
    if a.bilingual_only {
        cs = cs.bilingual_only();
    }
    finish(&a.out, |w| cs.write_tsv(w))?;
    eprintln!("{} constraints", cs.len());
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut h = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            toml::from_str::<Hyperparams>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => Hyperparams::default(),
    };
    macro_rules! set {
        ($($field:ident <- $flag:expr),* $(,)?) => {
            $(if let Some(v) = $flag { h.$field = v; })*
        };
    }
    set!(dim <- a.dim, window <- a.window, negative <- a.neg, lambda <- a.lambda, lr <- a.lr,
         epochs <- a.epochs, min_count <- a.min_count, subsample <- a.subsample, seed <- a.seed,
         threads <- a.threads);
    let constraints = a.constraints.as_ref().map(ConstraintSet::load).transpose()?;

    let text = std::fs::read_to_string(&a.corpus).map_err(|e| Error::io(&a.corpus, e))?;
    let lines = text.lines().filter(|l| !l.trim().is_empty());
    let vocab = build_vocab(lines.clone(), h.min_count)?;
    let corpus = EncodedCorpus::encode(lines, &vocab);
    let (model, report) = train(&corpus, &vocab, constraints.as_ref(), &h)?;

    model.vectors(Matrix::Sum).save(&a.out)?;
    if let Some(p) = &a.out_w {
        model.vectors(Matrix::W).save(p)?;
    }
    if let Some(p) = &a.out_c {
        model.vectors(Matrix::C).save(p)?;
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &a.report {
        Some(p) => std::fs::write(p, json + "\n").map_err(|e| Error::io(p, e))?,
        None => eprintln!("{json}"),
    }
    Ok(())
}

fn cmd_map(a: MapArgs) -> Result<()> {
    let src = preprocess(&WordVectors::load(&a.src)?);
    let tgt = preprocess(&WordVectors::load(&a.tgt)?);
    let dict = ConstraintSet::load(&a.dict)?.translation_dictionary(&a.src_lang, &a.tgt_lang)?;
    let problem = MappingProblem::new(&src, &tgt, &dict)?;
    let map = fit_orthogonal(&problem)?;
    map.save(&a.out)?;
    eprintln!(
        "{} dictionary pairs used, {} dropped; orthogonality error {:.2e}",
        problem.used_pairs,
        problem.dropped_pairs,
        map.orthogonality_error()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let dataset = SimilarityDataset::load(&a.dataset)?;
    let report = match &a.map {
        Some(m) => {
            let map = LinearMap::load(m)?;
            let src = WordVectors::load(a.src.as_ref().expect("required by clap"))?;
            let tgt = WordVectors::load(a.tgt.as_ref().expect("required by clap"))?;
            let lang = a.src_lang.as_deref().expect("required by clap");
            eval_mapped(&map, &src, &tgt, lang, &dataset, a.oov)?
        }
        None => {
            let wv = WordVectors::load(a.model.as_ref().expect("required by clap"))?;
            score_pairs(&Scorer::Joint(&wv), &dataset, a.oov)?
        }
    };
    if let Some(p) = &a.report {
        std::fs::write(p, report.to_json() + "\n").map_err(|e| Error::io(p, e))?;
    }
    println!(
        "spearman\t{:.4}\tcoverage\t{}/{}",
        report.spearman, report.covered_pairs, report.total_pairs
    );
    Ok(())
}

fn cmd_crossling(a: CrosslingArgs) -> Result<()> {
    let da = MonoDataset::load(&a.a)?;
    let db = MonoDataset::load(&a.b)?;
    let (ds, skipped) = build_crosslingual(&da, &a.lang_a, &db, &a.lang_b);
    finish(&a.out, |w| ds.write_tsv(w))?;
    eprintln!("{} pairs, {skipped} unaligned ids skipped", ds.pairs.len());
    Ok(())
}

fn cmd_pipeline(a: PipelineArgs) -> Result<()> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.threads {
        cfg.train.threads = t;
        set_threads(Some(t));
    }
    if let Some(d) = a.out_dir {
        cfg.out_dir = d;
    }
    let outcome = run_pipeline(&cfg)?;
    if let Some(r) = &outcome.report {
        println!(
            "{}\tspearman\t{:.4}\tcoverage\t{}/{}",
            outcome.manifest.variant, r.spearman, r.covered_pairs, r.total_pairs
        );
    }
    eprintln!("manifest written to {}", cfg.out_dir.join("manifest.json").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Walk(a) => cmd_walk(a),
        Command::Merge(a) => cmd_merge(a),
        Command::Hybrid(a) => cmd_hybrid(a),
        Command::Constraints(a) => cmd_constraints(a),
        Command::Train(a) => cmd_train(a),
        Command::Map(a) => cmd_map(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Crossling(a) => cmd_crossling(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
