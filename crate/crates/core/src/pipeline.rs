//! End-to-end experiments: build a corpus, train, optionally map, evaluate.
//!
//! A run is described by one TOML file ([`PipelineConfig`]). Every stage
//! draws its seed from the top-level seed, and a `manifest.json` listing
//! inputs, seeds, token accounting and output hashes is written to the
//! output directory, also when a stage fails.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constraints::{mine_constraints, ConstraintSet};
use crate::corpus::{build_hybrid, merge_balanced, Accounting, BalanceSpec, TaggedCorpus};
use crate::embed::{train_lines, Hyperparams, Matrix, TrainReport, WordVectors};
use crate::error::{Error, Result};
use crate::eval::{build_crosslingual, score_pairs, EvalReport, MonoDataset, OovPolicy, Scorer, SimilarityDataset};
use crate::kb::{KnowledgeGraph, Lexicon};
use crate::mapping::{fit_orthogonal, preprocess, LinearMap, MappingProblem};
use crate::rng;
use crate::walker::{bi_walks, mono_walks, WalkConfig, WalkMode};

/// How the bilingual space is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Two monolingual models joined by an orthogonal map.
    Map,
    /// One model trained on bilingual text.
    Joint,
    /// As `Joint`, plus the constraint regularizer.
    Jointc,
}

/// Where the training text comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusKind {
    Txt,
    Kb,
    Hyb,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Map => "map",
            Method::Joint => "joint",
            Method::Jointc => "jointc",
        })
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusKind::Txt => "txt",
            CorpusKind::Kb => "kb",
            CorpusKind::Hyb => "hyb",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "map" => Ok(Method::Map),
            "joint" => Ok(Method::Joint),
            "jointc" => Ok(Method::Jointc),
            _ => Err(Error::Config(format!("unknown method {s:?} (map|joint|jointc)"))),
        }
    }
}

impl FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "txt" => Ok(CorpusKind::Txt),
            "kb" => Ok(CorpusKind::Kb),
            "hyb" => Ok(CorpusKind::Hyb),
            _ => Err(Error::Config(format!("unknown corpus kind {s:?} (txt|kb|hyb)"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub graph: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    /// One pre-tokenized natural corpus per language.
    pub natural: BTreeMap<String, PathBuf>,
    /// Constraint TSV for `jointc`; mined from the lexicon when absent.
    pub constraints: Option<PathBuf>,
    /// Constraint TSV whose bilingual pairs form the mapping dictionary;
    /// mined from the lexicon when absent.
    pub dictionary: Option<PathBuf>,
    /// Cross-lingual similarity dataset.
    pub dataset: Option<PathBuf>,
    /// Two translations of one monolingual dataset, keyed by language,
    /// combined into a cross-lingual dataset.
    pub mono_datasets: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkSection {
    pub alpha: f64,
    pub contexts: usize,
    pub target_tokens: Option<u64>,
}

impl Default for WalkSection {
    fn default() -> Self {
        WalkSection {
            alpha: 0.85,
            contexts: 100_000,
            target_tokens: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceSection {
    /// Token budget of each hybrid corpus; `None` uses the largest feasible.
    pub total_tokens: Option<u64>,
    /// Share of the first language in a bilingual hybrid.
    pub language_share: f64,
    pub natural_share: f64,
    pub tolerance: f64,
}

impl Default for BalanceSection {
    fn default() -> Self {
        BalanceSection {
            total_tokens: None,
            language_share: 0.5,
            natural_share: 0.5,
            tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub oov: OovPolicy,
}

/// One experiment. Relative paths are resolved against the config file's
/// directory by [`PipelineConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub method: Method,
    pub corpus: CorpusKind,
    /// Exactly two language codes.
    pub languages: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Language mapped into the other one's space (`map` only). Defaults to
    /// the language with fewer lexicalized concepts.
    #[serde(default)]
    pub map_source: Option<String>,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub walk: WalkSection,
    #[serde(default)]
    pub balance: BalanceSection,
    /// Its `seed` is ignored; training seeds derive from `seed`.
    #[serde(default)]
    pub train: Hyperparams,
    #[serde(default)]
    pub eval: EvalSection,
}

fn default_seed() -> u64 {
    1
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    /// Make every relative path relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        let i = &mut self.inputs;
        for p in [&mut i.graph, &mut i.lexicon, &mut i.constraints, &mut i.dictionary, &mut i.dataset]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        i.natural.values_mut().for_each(fix);
        i.mono_datasets.values_mut().for_each(fix);
    }

    pub fn variant(&self) -> String {
        format!("{}_{}", self.method, self.corpus)
    }

    /// Checks that need no I/O beyond path existence.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.languages.len() != 2 || self.languages[0] == self.languages[1] {
            return bad(format!("need exactly two distinct languages, got {:?}", self.languages));
        }
        let inp = &self.inputs;
        let has_kb = inp.graph.is_some() && inp.lexicon.is_some();
        if matches!(self.corpus, CorpusKind::Kb | CorpusKind::Hyb) && !has_kb {
            return bad(format!("corpus `{}` needs inputs.graph and inputs.lexicon", self.corpus));
        }
        if matches!(self.corpus, CorpusKind::Txt | CorpusKind::Hyb) {
            for l in &self.languages {
                if !inp.natural.contains_key(l) {
                    return bad(format!("corpus `{}` needs a natural corpus for {l}", self.corpus));
                }
            }
        }
        if let Some(l) = inp.natural.keys().find(|l| !self.languages.contains(l)) {
            return bad(format!("natural corpus given for {l}, which is not a pipeline language"));
        }
        match self.method {
            Method::Jointc => {
                if inp.constraints.is_none() && inp.lexicon.is_none() {
                    return bad("method `jointc` needs inputs.constraints or inputs.lexicon".into());
                }
                if self.train.lambda <= 0.0 {
                    return bad("method `jointc` needs train.lambda > 0".into());
                }
            }
            Method::Map => {
                if inp.dictionary.is_none() && inp.lexicon.is_none() {
                    return bad("method `map` needs inputs.dictionary or inputs.lexicon".into());
                }
                if let Some(s) = &self.map_source {
                    if !self.languages.contains(s) {
                        return bad(format!("map_source {s} is not a pipeline language"));
                    }
                }
            }
            Method::Joint => {}
        }
        if !inp.mono_datasets.is_empty() {
            if inp.dataset.is_some() {
                return bad("give either inputs.dataset or inputs.mono_datasets, not both".into());
            }
            if self.languages.iter().any(|l| !inp.mono_datasets.contains_key(l)) || inp.mono_datasets.len() != 2 {
                return bad("inputs.mono_datasets needs exactly one file per pipeline language".into());
            }
        }
        if !(0.0..=1.0).contains(&self.balance.language_share) {
            return bad("balance.language_share must be in [0,1]".into());
        }
        self.walk_config(WalkMode::Bilingual, 0).validate()?;
        let mut hyper = self.train.clone();
        hyper.lambda = hyper.lambda.max(0.0);
        hyper.validate()?;
        for p in self.input_paths().into_iter().map(|(_, p)| p) {
            if !p.exists() {
                return bad(format!("input {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    fn input_paths(&self) -> Vec<(String, &Path)> {
        let i = &self.inputs;
        let mut out: Vec<(String, &Path)> = [
            ("graph", &i.graph),
            ("lexicon", &i.lexicon),
            ("constraints", &i.constraints),
            ("dictionary", &i.dictionary),
            ("dataset", &i.dataset),
        ]
        .into_iter()
        .filter_map(|(role, p)| Some((role.to_owned(), p.as_deref()?)))
        .collect();
        for (l, p) in &i.natural {
            out.push((format!("natural.{l}"), p));
        }
        for (l, p) in &i.mono_datasets {
            out.push((format!("mono_dataset.{l}"), p));
        }
        out
    }

    fn walk_config(&self, mode: WalkMode, seed: u64) -> WalkConfig {
        WalkConfig {
            alpha: self.walk.alpha,
            contexts: self.walk.contexts,
            target_tokens: self.walk.target_tokens,
            seed,
            mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputRecord {
    pub role: String,
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    /// Set when the run failed after this file was written.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AccountingRow {
    pub corpus: String,
    pub lang: String,
    pub natural: u64,
    pub synthetic: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub variant: String,
    pub seed: u64,
    pub status: String,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    pub config: PipelineConfig,
    pub inputs: Vec<FileRecord>,
    pub seeds: BTreeMap<String, u64>,
    pub accounting: Vec<AccountingRow>,
    pub training: BTreeMap<String, TrainReport>,
    pub outputs: Vec<OutputRecord>,
}

impl Manifest {
    pub fn output(&self, role: &str) -> Option<&OutputRecord> {
        self.outputs.iter().find(|o| o.role == role)
    }
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub manifest: Manifest,
    pub report: Option<EvalReport>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    manifest: Manifest,
}

fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    log::info!("stage {name}");
    f().map_err(|e| Error::Stage {
        stage: name.to_owned(),
        source: Box::new(e),
    })
}

impl Run<'_> {
    fn seed(&mut self, name: &str) -> u64 {
        let s = rng::derive(self.cfg.seed, name);
        self.manifest.seeds.insert(name.to_owned(), s);
        s
    }

    fn write(&mut self, role: &str, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<PathBuf> {
        let path = self.cfg.out_dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        f(&mut out)?;
        out.flush().map_err(|e| Error::io(&path, e))?;
        drop(out);
        self.manifest.outputs.push(OutputRecord {
            role: role.to_owned(),
            path: name.to_owned(),
            sha256: sha256_file(&path)?,
            partial: false,
        });
        Ok(path)
    }

    fn write_corpus(&mut self, role: &str, name: &str, c: &TaggedCorpus) -> Result<()> {
        self.write(role, name, |w| c.write_text(w).map_err(|e| Error::io(name, e)))?;
        Ok(())
    }

    fn account(&mut self, corpus: &str, acc: &Accounting) {
        for (i, l) in acc.languages.iter().enumerate() {
            self.manifest.accounting.push(AccountingRow {
                corpus: corpus.to_owned(),
                lang: l.clone(),
                natural: acc.natural[i],
                synthetic: acc.synthetic[i],
            });
        }
    }

    fn account_plain(&mut self, corpus: &str, c: &TaggedCorpus, synthetic: bool) -> Result<()> {
        for (l, n) in c.count_tokens()? {
            let (natural, synthetic) = if synthetic { (0, n) } else { (n, 0) };
            self.manifest.accounting.push(AccountingRow {
                corpus: corpus.to_owned(),
                lang: l,
                natural,
                synthetic,
            });
        }
        Ok(())
    }
}

struct Loaded {
    graph: Option<KnowledgeGraph>,
    lexicon: Option<Lexicon>,
    naturals: BTreeMap<String, TaggedCorpus>,
}

/// Validate, run every stage, and write the manifest. On a stage failure
/// the manifest records the stage and error, flags the outputs written so
/// far as partial, and the error is returned.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let inputs = cfg
        .input_paths()
        .into_iter()
        .map(|(role, p)| {
            Ok(FileRecord {
                role,
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut run = Run {
        cfg,
        manifest: Manifest {
            variant: cfg.variant(),
            seed: cfg.seed,
            status: "running".into(),
            failed_stage: None,
            error: None,
            config: cfg.clone(),
            inputs,
            seeds: BTreeMap::new(),
            accounting: Vec::new(),
            training: BTreeMap::new(),
            outputs: Vec::new(),
        },
    };
    let result = run_stages(&mut run);
    match &result {
        Ok(_) => run.manifest.status = "ok".into(),
        Err(e) => {
            run.manifest.status = "failed".into();
            if let Error::Stage { stage, source } = e {
                run.manifest.failed_stage = Some(stage.clone());
                run.manifest.error = Some(source.to_string());
            } else {
                run.manifest.error = Some(e.to_string());
            }
            for o in &mut run.manifest.outputs {
                o.partial = true;
            }
        }
    }
    let path = cfg.out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&run.manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    let report = result?;
    Ok(PipelineOutcome {
        manifest: run.manifest,
        report,
    })
}

fn run_stages(run: &mut Run<'_>) -> Result<Option<EvalReport>> {
    let cfg = run.cfg;
    let langs = &cfg.languages;
    let loaded = stage("load", || {
        let graph = cfg.inputs.graph.as_ref().map(KnowledgeGraph::load).transpose()?;
        let lexicon = match (&graph, &cfg.inputs.lexicon) {
            (Some(g), Some(p)) => Some(Lexicon::load(p, g, &[langs[0].as_str(), langs[1].as_str()])?),
            _ => None,
        };
        let naturals = cfg
            .inputs
            .natural
            .iter()
            .map(|(l, p)| Ok((l.clone(), TaggedCorpus::load_natural(p, l)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Loaded {
            graph,
            lexicon,
            naturals,
        })
    })?;

    let dataset = stage("dataset", || load_dataset(run))?;

    let report = match cfg.method {
        Method::Joint | Method::Jointc => {
            let corpus = stage("corpus", || joint_corpus(run, &loaded))?;
            let constraints = if cfg.method == Method::Jointc {
                Some(stage("constraints", || joint_constraints(run, &loaded))?)
            } else {
                None
            };
            let vectors = stage("train", || {
                let mut hyper = cfg.train.clone();
                hyper.seed = run.seed("train");
                if constraints.is_none() {
                    hyper.lambda = 0.0;
                }
                let lines = corpus.contexts.iter().map(|c| c.text.as_str());
                let (model, report) = train_lines(lines, constraints.as_ref(), &hyper)?;
                run.manifest.training.insert("joint".into(), report);
                let vectors = model.vectors(Matrix::Sum);
                run.write("model", "model.vec", |w| vectors.write(w))?;
                Ok(vectors)
            })?;
            match &dataset {
                Some(ds) => Some(stage("eval", || {
                    let report = score_pairs(&Scorer::Joint(&vectors), ds, cfg.eval.oov)?;
                    write_report(run, &report)?;
                    Ok(report)
                })?),
                None => None,
            }
        }
        Method::Map => {
            let corpora = stage("corpus", || map_corpora(run, &loaded))?;
            let vectors = stage("train", || {
                let mut out = BTreeMap::new();
                for (l, corpus) in &corpora {
                    let mut hyper = cfg.train.clone();
                    hyper.seed = run.seed(&format!("train.{l}"));
                    hyper.lambda = 0.0;
                    let lines = corpus.contexts.iter().map(|c| c.text.as_str());
                    let (model, report) = train_lines(lines, None, &hyper)?;
                    run.manifest.training.insert(l.clone(), report);
                    let v = model.vectors(Matrix::Sum);
                    run.write(&format!("model.{l}"), &format!("model.{l}.vec"), |w| v.write(w))?;
                    out.insert(l.clone(), v);
                }
                Ok(out)
            })?;
            let (src_lang, tgt_lang) = map_direction(cfg, loaded.lexicon.as_ref());
            let (map, src, tgt) = stage("map", || {
                let cs = match &cfg.inputs.dictionary {
                    Some(p) => ConstraintSet::load(p)?,
                    None => mine_constraints(loaded.lexicon.as_ref().expect("validated")),
                };
                let dict = cs.translation_dictionary(&src_lang, &tgt_lang)?;
                let src = preprocess(&vectors[&src_lang]);
                let tgt = preprocess(&vectors[&tgt_lang]);
                let problem = MappingProblem::new(&src, &tgt, &dict)?;
                log::info!(
                    "mapping {src_lang} -> {tgt_lang} on {} pairs ({} dropped)",
                    problem.used_pairs,
                    problem.dropped_pairs
                );
                let map = fit_orthogonal(&problem)?;
                let path = run.cfg.out_dir.join("map.txt");
                map.save(&path)?;
                run.manifest.outputs.push(OutputRecord {
                    role: "map".into(),
                    path: "map.txt".into(),
                    sha256: sha256_file(&path)?,
                    partial: false,
                });
                Ok((map, src, tgt))
            })?;
            match &dataset {
                Some(ds) => Some(stage("eval", || {
                    let scorer = Scorer::Mapped {
                        map: &map,
                        source: &src,
                        target: &tgt,
                        source_lang: &src_lang,
                    };
                    let report = score_pairs(&scorer, ds, cfg.eval.oov)?;
                    write_report(run, &report)?;
                    Ok(report)
                })?),
                None => None,
            }
        }
    };
    Ok(report)
}

fn write_report(run: &mut Run<'_>, report: &EvalReport) -> Result<()> {
    run.write("report", "report.json", |w| {
        writeln!(w, "{}", report.to_json()).map_err(|e| Error::io("report.json", e))
    })?;
    Ok(())
}

fn load_dataset(run: &mut Run<'_>) -> Result<Option<SimilarityDataset>> {
    let cfg = run.cfg;
    if let Some(p) = &cfg.inputs.dataset {
        return SimilarityDataset::load(p).map(Some);
    }
    if cfg.inputs.mono_datasets.is_empty() {
        return Ok(None);
    }
    let (a, b) = (&cfg.languages[0], &cfg.languages[1]);
    let da = MonoDataset::load(&cfg.inputs.mono_datasets[a])?;
    let db = MonoDataset::load(&cfg.inputs.mono_datasets[b])?;
    let (ds, skipped) = build_crosslingual(&da, a, &db, b);
    if skipped > 0 {
        log::warn!("{skipped} unaligned dataset ids skipped");
    }
    run.write("dataset", "dataset.tsv", |w| {
        ds.write_tsv(w).map_err(|e| Error::io("dataset.tsv", e))
    })?;
    Ok(Some(ds))
}

fn kb(loaded: &Loaded) -> (&KnowledgeGraph, &Lexicon) {
    (
        loaded.graph.as_ref().expect("validated"),
        loaded.lexicon.as_ref().expect("validated"),
    )
}

fn joint_corpus(run: &mut Run<'_>, loaded: &Loaded) -> Result<TaggedCorpus> {
    let cfg = run.cfg;
    let corpus = match cfg.corpus {
        CorpusKind::Txt => {
            let naturals: Vec<TaggedCorpus> = cfg.languages.iter().map(|l| loaded.naturals[l].clone()).collect();
            let merged = merge_balanced(&naturals, run.seed("merge"))?;
            run.account_plain("joint", &merged, false)?;
            merged
        }
        CorpusKind::Kb => {
            let (g, lex) = kb(loaded);
            let seed = run.seed("walk");
            let sc = bi_walks(g, lex, &cfg.walk_config(WalkMode::Bilingual, seed))?;
            let c = TaggedCorpus::from_synthetic(&sc, lex);
            run.account_plain("joint", &c, true)?;
            c
        }
        CorpusKind::Hyb => {
            let (g, lex) = kb(loaded);
            let seed = run.seed("walk");
            let sc = bi_walks(g, lex, &cfg.walk_config(WalkMode::Bilingual, seed))?;
            let syn = TaggedCorpus::from_synthetic(&sc, lex);
            let naturals: Vec<TaggedCorpus> = cfg.languages.iter().map(|l| loaded.naturals[l].clone()).collect();
            let b = &cfg.balance;
            let spec = BalanceSpec {
                total_tokens: b.total_tokens,
                language_shares: vec![
                    (cfg.languages[0].clone(), b.language_share),
                    (cfg.languages[1].clone(), 1.0 - b.language_share),
                ],
                natural_share: b.natural_share,
                tolerance: b.tolerance,
            };
            let (c, acc) = build_hybrid(&naturals, &syn, &spec, run.seed("hybrid"))?;
            run.write("accounting", "accounting.tsv", |w| {
                acc.write_tsv(w).map_err(|e| Error::io("accounting.tsv", e))
            })?;
            run.account("joint", &acc);
            c
        }
    };
    run.write_corpus("corpus", "corpus.txt", &corpus)?;
    Ok(corpus)
}

fn joint_constraints(run: &mut Run<'_>, loaded: &Loaded) -> Result<ConstraintSet> {
    match &run.cfg.inputs.constraints {
        Some(p) => ConstraintSet::load(p),
        None => {
            let cs = mine_constraints(loaded.lexicon.as_ref().expect("validated"));
            run.write("constraints", "constraints.tsv", |w| {
                cs.write_tsv(w).map_err(|e| Error::io("constraints.tsv", e))
            })?;
            Ok(cs)
        }
    }
}

fn map_corpora(run: &mut Run<'_>, loaded: &Loaded) -> Result<BTreeMap<String, TaggedCorpus>> {
    let cfg = run.cfg;
    let mut out = BTreeMap::new();
    for l in &cfg.languages {
        let name = format!("mono.{l}");
        let corpus = match cfg.corpus {
            CorpusKind::Txt => {
                let c = loaded.naturals[l].clone();
                run.account_plain(&name, &c, false)?;
                c
            }
            CorpusKind::Kb | CorpusKind::Hyb => {
                let (g, lex) = kb(loaded);
                let seed = run.seed(&format!("walk.{l}"));
                let sc = mono_walks(g, lex, &cfg.walk_config(WalkMode::Monolingual(l.clone()), seed))?;
                let syn = TaggedCorpus::from_synthetic(&sc, lex);
                if cfg.corpus == CorpusKind::Kb {
                    run.account_plain(&name, &syn, true)?;
                    syn
                } else {
                    let b = &cfg.balance;
                    let spec = BalanceSpec {
                        total_tokens: b.total_tokens,
                        language_shares: vec![(l.clone(), 1.0)],
                        natural_share: b.natural_share,
                        tolerance: b.tolerance,
                    };
                    let seed = run.seed(&format!("hybrid.{l}"));
                    let (c, acc) = build_hybrid(&[loaded.naturals[l].clone()], &syn, &spec, seed)?;
                    run.write(&format!("accounting.{l}"), &format!("accounting.{l}.tsv"), |w| {
                        acc.write_tsv(w).map_err(|e| Error::io("accounting.tsv", e))
                    })?;
                    run.account(&name, &acc);
                    c
                }
            }
        };
        if cfg.corpus != CorpusKind::Txt {
            run.write_corpus(&format!("corpus.{l}"), &format!("corpus.{l}.txt"), &corpus)?;
        }
        out.insert(l.clone(), corpus);
    }
    Ok(out)
}

/// `(source, target)` for the mapping baseline.
pub fn map_direction(cfg: &PipelineConfig, lexicon: Option<&Lexicon>) -> (String, String) {
    let (a, b) = (&cfg.languages[0], &cfg.languages[1]);
    let source = match (&cfg.map_source, lexicon) {
        (Some(s), _) => s.clone(),
        (None, Some(lex)) => {
            let n = |l: &str| lex.language_index(l).map_or(0, |i| lex.lexicalized_count(i));
            if n(a) < n(b) {
                a.clone()
            } else {
                b.clone()
            }
        }
        (None, None) => b.clone(),
    };
    let target = if &source == a { b.clone() } else { a.clone() };
    (source, target)
}

/// Score a dataset through a fitted map between two raw vector sets.
pub fn eval_mapped(
    map: &LinearMap,
    source: &WordVectors,
    target: &WordVectors,
    source_lang: &str,
    dataset: &SimilarityDataset,
    oov: OovPolicy,
) -> Result<EvalReport> {
    let (src, tgt) = (preprocess(source), preprocess(target));
    let scorer = Scorer::Mapped {
        map,
        source: &src,
        target: &tgt,
        source_lang,
    };
    score_pairs(&scorer, dataset, oov)
}
