//! Synthetic corpora from damped random walks over the concept graph.
//!
//! A walk starts at a uniformly chosen concept. At every step it tries to emit
//! one lexicalization of the current concept, moves to a uniformly chosen
//! neighbor, and then continues with probability `alpha`. Each halted walk
//! with at least one emitted token becomes one context.
//!
//! In bilingual mode the emission language is a fair coin per step and
//! nothing is emitted when the chosen language does not lexicalize the
//! concept. Monolingual mode skips unlexicalized concepts the same way. A
//! concept without neighbors halts the walk right after its emission attempt.
//!
//! Contexts are generated in fixed-size blocks; block `b` always draws from
//! stream `b` of the seed, so output is identical for any thread count.

use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kb::{KnowledgeGraph, Lexicon};
use crate::rng;

/// Contexts per RNG block.
pub const BLOCK_CONTEXTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkMode {
    Monolingual(String),
    Bilingual,
}

impl std::str::FromStr for WalkMode {
    type Err = Error;

    /// `bi` or `mono:<lang>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "bi" {
            return Ok(WalkMode::Bilingual);
        }
        match s.strip_prefix("mono:") {
            Some(l) if !l.is_empty() => Ok(WalkMode::Monolingual(l.to_owned())),
            _ => Err(Error::Config(format!("walk mode must be `bi` or `mono:<lang>`, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WalkConfig {
    /// Continuation probability per step.
    pub alpha: f64,
    /// Number of non-empty contexts to produce.
    pub contexts: usize,
    /// When set, generation stops at the first context boundary where the
    /// token count reaches this budget; `contexts` is then ignored.
    pub target_tokens: Option<u64>,
    pub seed: u64,
    pub mode: WalkMode,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            alpha: 0.85,
            contexts: 1,
            target_tokens: None,
            seed: 0,
            mode: WalkMode::Bilingual,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        match self.target_tokens {
            Some(0) => Err(Error::Config("target token budget must be positive".into())),
            None if self.contexts == 0 => Err(Error::Config("contexts must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

/// One emitted token with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Emission {
    pub concept: u32,
    pub lang: u8,
    pub word: u32,
}

/// One step of a walk: the visited concept and what, if anything, it emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub concept: u32,
    pub emission: Option<Emission>,
}

/// Full record of one walk, including walks that emitted nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkRecord {
    pub steps: Vec<Step>,
}

impl WalkRecord {
    pub fn emissions(&self) -> impl Iterator<Item = Emission> + '_ {
        self.steps.iter().filter_map(|s| s.emission)
    }

    pub fn is_empty_context(&self) -> bool {
        self.steps.iter().all(|s| s.emission.is_none())
    }
}

/// Walk output: contexts of annotated tokens plus per-language tallies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub contexts: Vec<Vec<Emission>>,
    /// Indexed like the lexicon's languages.
    pub token_counts: Vec<u64>,
}

impl SyntheticCorpus {
    pub fn token_total(&self) -> u64 {
        self.token_counts.iter().sum()
    }

    pub fn tokens<'a>(&'a self, lex: &'a Lexicon, ctx: usize) -> impl Iterator<Item = &'a str> + 'a {
        self.contexts[ctx].iter().map(|e| lex.word(e.word))
    }

    /// One context per line, tokens separated by single spaces.
    pub fn write_text<W: Write>(&self, lex: &Lexicon, mut out: W) -> std::io::Result<()> {
        let mut line = String::new();
        for ctx in &self.contexts {
            line.clear();
            for (i, e) in ctx.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                line.push_str(lex.word(e.word));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// `context_index<TAB>position<TAB>concept<TAB>lang<TAB>token` per token.
    pub fn write_trace<W: Write>(&self, graph: &KnowledgeGraph, lex: &Lexicon, mut out: W) -> std::io::Result<()> {
        for (ci, ctx) in self.contexts.iter().enumerate() {
            for (pos, e) in ctx.iter().enumerate() {
                writeln!(
                    out,
                    "{ci}\t{pos}\t{}\t{}\t{}",
                    graph.concept(e.concept as usize),
                    lex.languages()[e.lang as usize],
                    lex.word(e.word)
                )?;
            }
        }
        Ok(())
    }
}

/// Annotated token of a walk trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracedToken {
    pub concept: String,
    pub lang: String,
    pub token: String,
}

#[derive(Clone, Copy)]
enum Emit {
    Mono(u8),
    Bi,
}

struct Walker<'a> {
    graph: &'a KnowledgeGraph,
    lex: &'a Lexicon,
    alpha: f64,
    emit: Emit,
}

impl<'a> Walker<'a> {
    fn new(graph: &'a KnowledgeGraph, lex: &'a Lexicon, cfg: &WalkConfig) -> Result<Self> {
        cfg.validate()?;
        if lex.concept_count() != graph.len() {
            return Err(Error::Config("lexicon was built for a different graph".into()));
        }
        let emit = match &cfg.mode {
            WalkMode::Monolingual(l) => {
                let li = lex
                    .language_index(l)
                    .ok_or_else(|| Error::Config(format!("language {l} is not in the lexicon")))?;
                if lex.lexicalized_count(li) == 0 {
                    return Err(Error::Config(format!("no concept is lexicalized in {l}")));
                }
                Emit::Mono(li as u8)
            }
            WalkMode::Bilingual => {
                if lex.languages().len() != 2 {
                    return Err(Error::Config("bilingual walks need a two-language lexicon".into()));
                }
                if lex.lexicalized_count(0) + lex.lexicalized_count(1) == 0 {
                    return Err(Error::Config("no concept is lexicalized in either language".into()));
                }
                Emit::Bi
            }
        };
        Ok(Walker {
            graph,
            lex,
            alpha: cfg.alpha,
            emit,
        })
    }

    /// Run one walk, appending its steps to `steps`.
    fn walk(&self, rng: &mut rng::Rng, steps: &mut Vec<Step>) {
        let mut c = rng.random_range(0..self.graph.len());
        loop {
            let lang = match self.emit {
                Emit::Mono(l) => l,
                Emit::Bi => rng.random_range(0..2u8),
            };
            let words = self.lex.lexicalizations(c, lang as usize);
            let emission = if words.is_empty() {
                None
            } else {
                Some(Emission {
                    concept: c as u32,
                    lang,
                    word: words[rng.random_range(0..words.len())],
                })
            };
            steps.push(Step {
                concept: c as u32,
                emission,
            });
            let ns = self.graph.neighbors(c);
            if ns.is_empty() {
                break;
            }
            c = ns[rng.random_range(0..ns.len())] as usize;
            if rng.random::<f64>() > self.alpha {
                break;
            }
        }
    }

    /// Walks of block `b` until `want` non-empty contexts. `visit` sees every
    /// walk, empty ones included.
    fn block(&self, seed: u64, b: usize, want: usize, mut visit: impl FnMut(&[Step])) {
        let mut rng = rng::stream(seed, b as u64);
        let mut steps = Vec::new();
        let mut got = 0;
        while got < want {
            steps.clear();
            self.walk(&mut rng, &mut steps);
            if steps.iter().any(|s| s.emission.is_some()) {
                got += 1;
            }
            visit(&steps);
        }
    }

    fn block_contexts(&self, seed: u64, b: usize, want: usize) -> Vec<Vec<Emission>> {
        let mut out = Vec::with_capacity(want);
        self.block(seed, b, want, |steps| {
            let ctx: Vec<Emission> = steps.iter().filter_map(|s| s.emission).collect();
            if !ctx.is_empty() {
                out.push(ctx);
            }
        });
        out
    }

    fn corpus(&self, cfg: &WalkConfig) -> SyntheticCorpus {
        let contexts = match cfg.target_tokens {
            None => {
                let blocks = cfg.contexts.div_ceil(BLOCK_CONTEXTS);
                let per_block: Vec<Vec<Vec<Emission>>> = (0..blocks)
                    .into_par_iter()
                    .map(|b| {
                        let want = BLOCK_CONTEXTS.min(cfg.contexts - b * BLOCK_CONTEXTS);
                        self.block_contexts(cfg.seed, b, want)
                    })
                    .collect();
                per_block.into_iter().flatten().collect()
            }
            Some(target) => self.contexts_for_budget(cfg.seed, target),
        };
        let mut token_counts = vec![0u64; self.lex.languages().len()];
        for e in contexts.iter().flatten() {
            token_counts[e.lang as usize] += 1;
        }
        SyntheticCorpus {
            contexts,
            token_counts,
        }
    }

    fn contexts_for_budget(&self, seed: u64, target: u64) -> Vec<Vec<Emission>> {
        let batch = rayon::current_num_threads().max(1) * 2;
        let mut out = Vec::new();
        let mut tokens = 0u64;
        let mut next = 0usize;
        loop {
            let blocks: Vec<Vec<Vec<Emission>>> = (next..next + batch)
                .into_par_iter()
                .map(|b| self.block_contexts(seed, b, BLOCK_CONTEXTS))
                .collect();
            next += batch;
            for ctx in blocks.into_iter().flatten() {
                tokens += ctx.len() as u64;
                out.push(ctx);
                if tokens >= target {
                    return out;
                }
            }
        }
    }
}

/// Monolingual synthetic corpus (mode must be `Monolingual`).
pub fn mono_walks(graph: &KnowledgeGraph, lex: &Lexicon, cfg: &WalkConfig) -> Result<SyntheticCorpus> {
    if !matches!(cfg.mode, WalkMode::Monolingual(_)) {
        return Err(Error::Config("mono_walks needs a monolingual walk mode".into()));
    }
    Ok(Walker::new(graph, lex, cfg)?.corpus(cfg))
}

/// Bilingual synthetic corpus (mode must be `Bilingual`).
pub fn bi_walks(graph: &KnowledgeGraph, lex: &Lexicon, cfg: &WalkConfig) -> Result<SyntheticCorpus> {
    if cfg.mode != WalkMode::Bilingual {
        return Err(Error::Config("bi_walks needs the bilingual walk mode".into()));
    }
    Ok(Walker::new(graph, lex, cfg)?.corpus(cfg))
}

/// Either walk flavour, dispatched on `cfg.mode`.
pub fn walks(graph: &KnowledgeGraph, lex: &Lexicon, cfg: &WalkConfig) -> Result<SyntheticCorpus> {
    Ok(Walker::new(graph, lex, cfg)?.corpus(cfg))
}

/// Every walk taken while producing `cfg.contexts` contexts, including the
/// discarded empty ones. Same random stream as [`walks`].
pub fn walk_records(graph: &KnowledgeGraph, lex: &Lexicon, cfg: &WalkConfig) -> Result<Vec<WalkRecord>> {
    let walker = Walker::new(graph, lex, cfg)?;
    if cfg.target_tokens.is_some() {
        return Err(Error::Config("walk records are only produced for a context count".into()));
    }
    let blocks = cfg.contexts.div_ceil(BLOCK_CONTEXTS);
    let mut out = Vec::new();
    for b in 0..blocks {
        let want = BLOCK_CONTEXTS.min(cfg.contexts - b * BLOCK_CONTEXTS);
        walker.block(cfg.seed, b, want, |steps| {
            out.push(WalkRecord {
                steps: steps.to_vec(),
            })
        });
    }
    Ok(out)
}

/// Per-context `(concept, language, token)` annotations.
pub fn walk_trace(graph: &KnowledgeGraph, lex: &Lexicon, cfg: &WalkConfig) -> Result<Vec<Vec<TracedToken>>> {
    let corpus = walks(graph, lex, cfg)?;
    Ok(corpus
        .contexts
        .iter()
        .map(|ctx| {
            ctx.iter()
                .map(|e| TracedToken {
                    concept: graph.concept(e.concept as usize).to_string(),
                    lang: lex.languages()[e.lang as usize].clone(),
                    token: lex.word(e.word).to_owned(),
                })
                .collect()
        })
        .collect())
}
