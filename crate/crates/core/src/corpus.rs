//! Corpus accounting, truncation, shuffling and hybrid balancing.
//!
//! Every corpus is a list of lines (contexts or sentences) with per-line,
//! per-language token counts. Natural text is attributed to its declared
//! language; bilingual synthetic text is attributed through the walk trace.
//! All balancing works on whole lines.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kb::Lexicon;
use crate::rng;
use crate::walker::SyntheticCorpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Natural,
    Synthetic,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub text: String,
    /// Token counts, indexed like the owning corpus's `languages`. Empty when
    /// the corpus is unattributed.
    pub counts: Vec<u32>,
}

impl Context {
    pub fn tokens(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedCorpus {
    pub source: Source,
    /// Empty for an unattributed corpus.
    pub languages: Vec<String>,
    pub contexts: Vec<Context>,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if !line.trim().is_empty() {
            out.push(line.to_owned());
        }
    }
    Ok(out)
}

impl TaggedCorpus {
    /// Single-language corpus from lines; blank lines are dropped.
    pub fn from_lines<I, S>(source: Source, lang: &str, lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let contexts = lines
            .into_iter()
            .map(Into::into)
            .filter(|l: &String| !l.trim().is_empty())
            .map(|text| {
                let n = text.split_whitespace().count() as u32;
                Context { text, counts: vec![n] }
            })
            .collect();
        TaggedCorpus {
            source,
            languages: vec![lang.to_owned()],
            contexts,
        }
    }

    /// Pre-tokenized natural text in one language.
    pub fn load_natural(path: impl AsRef<Path>, lang: &str) -> Result<Self> {
        Ok(Self::from_lines(Source::Natural, lang, read_lines(path.as_ref())?))
    }

    /// Synthetic corpus file. Attribution comes from the trace file when
    /// given, else from `lang`; with neither the corpus stays unattributed
    /// and [`TaggedCorpus::count_tokens`] fails.
    pub fn load_synthetic(path: impl AsRef<Path>, trace: Option<&Path>, lang: Option<&str>) -> Result<Self> {
        let path = path.as_ref();
        let lines = read_lines(path)?;
        match (trace, lang) {
            (Some(trace), _) => Self::attribute_from_trace(lines, trace),
            (None, Some(l)) => Ok(Self::from_lines(Source::Synthetic, l, lines)),
            (None, None) => Ok(TaggedCorpus {
                source: Source::Synthetic,
                languages: Vec::new(),
                contexts: lines
                    .into_iter()
                    .map(|text| Context { text, counts: Vec::new() })
                    .collect(),
            }),
        }
    }

    fn attribute_from_trace(lines: Vec<String>, trace: &Path) -> Result<Self> {
        let file = File::open(trace).map_err(|e| Error::io(trace, e))?;
        let mut languages: Vec<String> = Vec::new();
        let mut counts: Vec<Vec<u32>> = vec![Vec::new(); lines.len()];
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(trace, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(Error::parse(trace, n + 1, "expected 5 trace fields"));
            }
            let ci: usize = f[0]
                .parse()
                .map_err(|_| Error::parse(trace, n + 1, "bad context index"))?;
            if ci >= lines.len() {
                return Err(Error::Attribution(format!(
                    "trace line {} refers to context {ci}, corpus has {}",
                    n + 1,
                    lines.len()
                )));
            }
            let li = match languages.iter().position(|l| l == f[3]) {
                Some(i) => i,
                None => {
                    languages.push(f[3].to_owned());
                    languages.len() - 1
                }
            };
            let row = &mut counts[ci];
            if row.len() <= li {
                row.resize(li + 1, 0);
            }
            row[li] += 1;
        }
        let contexts = lines
            .into_iter()
            .zip(counts)
            .enumerate()
            .map(|(i, (text, mut c))| {
                c.resize(languages.len(), 0);
                let traced: u32 = c.iter().sum();
                if traced as usize != text.split_whitespace().count() {
                    return Err(Error::Attribution(format!(
                        "context {i} has {} tokens but {traced} trace rows",
                        text.split_whitespace().count()
                    )));
                }
                Ok(Context { text, counts: c })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TaggedCorpus {
            source: Source::Synthetic,
            languages,
            contexts,
        }
        .sorted_languages())
    }

    /// Reorder languages lexicographically, permuting every count row.
    fn sorted_languages(mut self) -> Self {
        let mut order: Vec<usize> = (0..self.languages.len()).collect();
        order.sort_by(|&a, &b| self.languages[a].cmp(&self.languages[b]));
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return self;
        }
        self.languages = order.iter().map(|&o| self.languages[o].clone()).collect();
        for ctx in &mut self.contexts {
            ctx.counts = order.iter().map(|&o| ctx.counts[o]).collect();
        }
        self
    }

    /// Attributed corpus from walk output.
    pub fn from_synthetic(sc: &SyntheticCorpus, lex: &Lexicon) -> Self {
        let nl = lex.languages().len();
        let contexts = sc
            .contexts
            .iter()
            .map(|ctx| {
                let mut counts = vec![0u32; nl];
                let mut text = String::new();
                for (i, e) in ctx.iter().enumerate() {
                    if i > 0 {
                        text.push(' ');
                    }
                    text.push_str(lex.word(e.word));
                    counts[e.lang as usize] += 1;
                }
                Context { text, counts }
            })
            .collect();
        TaggedCorpus {
            source: Source::Synthetic,
            languages: lex.languages().to_vec(),
            contexts,
        }
        .sorted_languages()
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    /// Whitespace token total, attribution not required.
    pub fn total_tokens(&self) -> u64 {
        self.contexts.iter().map(|c| c.tokens() as u64).sum()
    }

    /// Per-language token tally.
    pub fn count_tokens(&self) -> Result<BTreeMap<String, u64>> {
        if self.languages.is_empty() {
            if self.total_tokens() == 0 {
                return Ok(BTreeMap::new());
            }
            return Err(Error::Attribution(
                "corpus has no language attribution (a bilingual synthetic corpus needs its trace)".into(),
            ));
        }
        let mut out: BTreeMap<String, u64> = self.languages.iter().map(|l| (l.clone(), 0)).collect();
        for c in &self.contexts {
            for (l, &n) in self.languages.iter().zip(&c.counts) {
                *out.get_mut(l).unwrap() += u64::from(n);
            }
        }
        Ok(out)
    }

    /// Whole lines taken in a seeded random order, skipping any line that
    /// would overshoot `budget`. Selected lines keep their original order.
    pub fn truncate_to_budget(&self, budget: u64, seed: u64) -> Result<TaggedCorpus> {
        let total = self.total_tokens();
        if budget > total {
            return Err(Error::Budget(format!(
                "budget {budget} exceeds the corpus size of {total} tokens"
            )));
        }
        let mut order: Vec<usize> = (0..self.contexts.len()).collect();
        order.shuffle(&mut rng::stream(seed, 0));
        let mut keep = Vec::new();
        let mut used = 0u64;
        for i in order {
            let n = self.contexts[i].tokens() as u64;
            if used + n > budget {
                continue;
            }
            used += n;
            keep.push(i);
        }
        keep.sort_unstable();
        Ok(TaggedCorpus {
            source: self.source,
            languages: self.languages.clone(),
            contexts: keep.into_iter().map(|i| self.contexts[i].clone()).collect(),
        })
    }

    /// One line per context.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for c in &self.contexts {
            out.write_all(c.text.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// SHA-256 over the sorted lines; equal for any permutation.
    pub fn multiset_digest(&self) -> String {
        multiset_digest(self.contexts.iter().map(|c| c.text.as_str()))
    }
}

pub fn multiset_digest<'a>(lines: impl IntoIterator<Item = &'a str>) -> String {
    let mut v: Vec<&str> = lines.into_iter().collect();
    v.sort_unstable();
    let mut h = Sha256::new();
    for l in v {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Concatenate and Fisher-Yates shuffle. Languages are unioned in order of
/// first appearance. The source is kept when all inputs share it.
pub fn merge_shuffle(corpora: &[TaggedCorpus], seed: u64) -> Result<TaggedCorpus> {
    let first = corpora
        .first()
        .ok_or_else(|| Error::Config("merge needs at least one corpus".into()))?;
    let attributed = corpora.iter().all(|c| !c.languages.is_empty());
    let mut languages: Vec<String> = Vec::new();
    if attributed {
        for c in corpora {
            for l in &c.languages {
                if !languages.contains(l) {
                    languages.push(l.clone());
                }
            }
        }
    }
    let mut contexts = Vec::with_capacity(corpora.iter().map(|c| c.len()).sum());
    for c in corpora {
        let remap: Vec<usize> = c
            .languages
            .iter()
            .map(|l| languages.iter().position(|m| m == l).unwrap_or(0))
            .collect();
        for ctx in &c.contexts {
            let counts = if attributed {
                let mut counts = vec![0u32; languages.len()];
                for (i, &n) in ctx.counts.iter().enumerate() {
                    counts[remap[i]] += n;
                }
                counts
            } else {
                Vec::new()
            };
            contexts.push(Context {
                text: ctx.text.clone(),
                counts,
            });
        }
    }
    contexts.shuffle(&mut rng::stream(seed, 0));
    let source = if corpora.iter().all(|c| c.source == first.source) {
        first.source
    } else {
        Source::Hybrid
    };
    Ok(TaggedCorpus {
        source,
        languages,
        contexts,
    })
}

/// Truncate every corpus to the token count of the smallest one, then
/// merge and shuffle.
pub fn merge_balanced(corpora: &[TaggedCorpus], seed: u64) -> Result<TaggedCorpus> {
    let budget = corpora
        .iter()
        .map(TaggedCorpus::total_tokens)
        .min()
        .ok_or_else(|| Error::Config("merge needs at least one corpus".into()))?;
    let truncated = corpora
        .iter()
        .enumerate()
        .map(|(i, c)| c.truncate_to_budget(budget, rng::derive(seed, &format!("balance{i}"))))
        .collect::<Result<Vec<_>>>()?;
    merge_shuffle(&truncated, seed)
}

/// Target token shares for a hybrid corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceSpec {
    /// Total budget; `None` picks the largest feasible total.
    pub total_tokens: Option<u64>,
    /// Share per language; must sum to 1.
    pub language_shares: Vec<(String, f64)>,
    /// Natural-text share; synthetic gets the rest.
    pub natural_share: f64,
    pub tolerance: f64,
}

impl BalanceSpec {
    /// Two languages at 50% each, natural/synthetic at 50% each, 1% slack.
    pub fn symmetric(lang_a: &str, lang_b: &str) -> Self {
        BalanceSpec {
            total_tokens: None,
            language_shares: vec![(lang_a.to_owned(), 0.5), (lang_b.to_owned(), 0.5)],
            natural_share: 0.5,
            tolerance: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.language_shares.iter().map(|(_, s)| s).sum();
        if self.language_shares.is_empty()
            || self.language_shares.iter().any(|(_, s)| !(0.0..=1.0).contains(s))
            || (sum - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(format!(
                "language shares must be in [0,1] and sum to 1, got {:?}",
                self.language_shares
            )));
        }
        if !(0.0..=1.0).contains(&self.natural_share) {
            return Err(Error::Config(format!(
                "natural share must be in [0,1], got {}",
                self.natural_share
            )));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::Config("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Tokens per language (rows) and source (columns).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Accounting {
    pub languages: Vec<String>,
    pub natural: Vec<u64>,
    pub synthetic: Vec<u64>,
}

impl Accounting {
    pub fn total(&self) -> u64 {
        self.natural.iter().sum::<u64>() + self.synthetic.iter().sum::<u64>()
    }

    pub fn row(&self, i: usize) -> u64 {
        self.natural[i] + self.synthetic[i]
    }

    pub fn cell(&self, lang: &str, natural: bool) -> Option<u64> {
        let i = self.languages.iter().position(|l| l == lang)?;
        Some(if natural { self.natural[i] } else { self.synthetic[i] })
    }

    /// Header `lang<TAB>natural<TAB>synthetic`, one row per language.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "lang\tnatural\tsynthetic")?;
        for (i, l) in self.languages.iter().enumerate() {
            writeln!(out, "{l}\t{}\t{}", self.natural[i], self.synthetic[i])?;
        }
        Ok(())
    }
}

fn language_counts(c: &TaggedCorpus) -> Result<HashMap<String, u64>> {
    Ok(c.count_tokens()?.into_iter().collect())
}

enum Shortfall {
    Natural(Error),
    Other(Error),
}

type Plan = (TaggedCorpus, HashMap<String, u64>, Vec<TaggedCorpus>);

/// Truncate the synthetic corpus to its share of `total`, then cut each
/// natural corpus to its language's remainder.
fn plan_hybrid(
    total: u64,
    spec: &BalanceSpec,
    synthetic: &TaggedCorpus,
    syn_total: u64,
    natural_by_lang: &HashMap<&str, &TaggedCorpus>,
    seed: u64,
) -> Result<Plan, Shortfall> {
    let syn_share = 1.0 - spec.natural_share;
    let tol_tokens = spec.tolerance * total as f64;

    // synthetic column
    let syn_budget = (syn_share * total as f64).round() as u64;
    let syn_part = if syn_budget == 0 {
        TaggedCorpus {
            source: Source::Synthetic,
            languages: synthetic.languages.clone(),
            contexts: Vec::new(),
        }
    } else {
        if syn_budget > syn_total {
            return Err(Shortfall::Other(Error::Budget(format!(
                "cell (*, synthetic) needs {syn_budget} tokens, only {syn_total} available"
            ))));
        }
        synthetic
            .truncate_to_budget(syn_budget, rng::derive(seed, "hybrid-synthetic"))
            .map_err(Shortfall::Other)?
    };
    let syn_used = language_counts(&syn_part).map_err(Shortfall::Other)?;

    // natural cells fill each language's remainder
    let mut parts = Vec::new();
    for &(ref l, share) in &spec.language_shares {
        let used = *syn_used.get(l).unwrap_or(&0) as f64;
        let want = share * total as f64 - used;
        if want < -tol_tokens {
            return Err(Shortfall::Other(Error::Budget(format!(
                "cell ({l}, synthetic) already holds {used} tokens, more than the {} allotted to {l}",
                share * total as f64
            ))));
        }
        let want = want.max(0.0).round() as u64;
        if want == 0 {
            continue;
        }
        let avail = natural_by_lang.get(l.as_str()).map_or(0, |c| c.total_tokens());
        // a short synthetic draw can leave a little more for natural text
        // than exists; the accounting check below bounds the damage
        let want = if want > avail && (want - avail) as f64 <= tol_tokens {
            avail
        } else {
            want
        };
        if want > avail {
            return Err(Shortfall::Natural(Error::Budget(format!(
                "cell ({l}, natural) needs {want} tokens, only {avail} available"
            ))));
        }
        let nat = natural_by_lang[l.as_str()];
        parts.push(
            nat.truncate_to_budget(want, rng::derive(seed, &format!("hybrid-natural-{l}")))
                .map_err(Shortfall::Other)?,
        );
    }

    Ok((syn_part, syn_used, parts))
}

/// Mix natural corpora (one language each) with a synthetic corpus so that
/// language and source shares meet `spec`, then shuffle.
///
/// The synthetic corpus is truncated first; its language split is whatever
/// the walks produced, and each natural corpus is cut to fill its
/// language's remaining share.
pub fn build_hybrid(
    naturals: &[TaggedCorpus],
    synthetic: &TaggedCorpus,
    spec: &BalanceSpec,
    seed: u64,
) -> Result<(TaggedCorpus, Accounting)> {
    spec.validate()?;
    let langs: Vec<&str> = spec.language_shares.iter().map(|(l, _)| l.as_str()).collect();
    let mut natural_by_lang: HashMap<&str, &TaggedCorpus> = HashMap::new();
    for n in naturals {
        if n.languages.len() != 1 {
            return Err(Error::Attribution("each natural corpus must be in exactly one language".into()));
        }
        if !langs.contains(&n.languages[0].as_str()) {
            return Err(Error::Config(format!(
                "natural corpus language {} has no share in the balance spec",
                n.languages[0]
            )));
        }
        if natural_by_lang.insert(n.languages[0].as_str(), n).is_some() {
            return Err(Error::Config(format!("two natural corpora for {}", n.languages[0])));
        }
    }
    let syn_counts = language_counts(synthetic)?;
    if let Some(extra) = syn_counts.iter().find(|(l, &n)| n > 0 && !langs.contains(&l.as_str())) {
        return Err(Error::Config(format!(
            "synthetic corpus has {} tokens in {}, which has no share in the balance spec",
            extra.1, extra.0
        )));
    }
    let syn_total = synthetic.total_tokens();
    let syn_share = 1.0 - spec.natural_share;
    let nat_avail = |l: &str| natural_by_lang.get(l).map_or(0, |c| c.total_tokens());
    let syn_frac = |l: &str| {
        if syn_total == 0 {
            0.0
        } else {
            *syn_counts.get(l).unwrap_or(&0) as f64 / syn_total as f64
        }
    };

    let auto = spec.total_tokens.is_none();
    let mut total = match spec.total_tokens {
        Some(t) => t,
        None => {
            let mut bound = f64::INFINITY;
            if syn_share > 0.0 {
                bound = bound.min(syn_total as f64 / syn_share);
            }
            for &(ref l, share) in &spec.language_shares {
                let coef = share - syn_share * syn_frac(l);
                if coef > 1e-12 {
                    bound = bound.min(nat_avail(l) as f64 / coef);
                }
            }
            if !bound.is_finite() {
                return Err(Error::Budget("no source material to balance".into()));
            }
            (bound * (1.0 - spec.tolerance / 2.0)).floor() as u64
        }
    };

    // the synthetic draw's language mix varies a little around the full
    // corpus's, so an automatic total may need to shrink to fit
    let mut attempts = 0;
    let (total, syn_part, syn_used, mut parts) = loop {
        match plan_hybrid(total, spec, synthetic, syn_total, &natural_by_lang, seed) {
            Ok((syn_part, syn_used, parts)) => break (total, syn_part, syn_used, parts),
            Err(Shortfall::Natural(e)) if auto && attempts < 50 && total > 1 => {
                log::debug!("hybrid total {total} infeasible ({e}), shrinking");
                attempts += 1;
                total = (total as f64 * 0.98).floor() as u64;
            }
            Err(Shortfall::Natural(e) | Shortfall::Other(e)) => return Err(e),
        }
    };
    let mut accounting = Accounting {
        languages: langs.iter().map(|l| (*l).to_owned()).collect(),
        natural: vec![0; langs.len()],
        synthetic: vec![0; langs.len()],
    };
    for p in &parts {
        let i = langs.iter().position(|l| *l == p.languages[0]).unwrap();
        accounting.natural[i] = p.total_tokens();
    }
    for (i, l) in langs.iter().enumerate() {
        accounting.synthetic[i] = *syn_used.get(*l).unwrap_or(&0);
    }
    check_accounting(&accounting, spec, total)?;

    parts.push(syn_part);
    let mut merged = merge_shuffle(&parts, rng::derive(seed, "hybrid-shuffle"))?;
    merged.source = Source::Hybrid;
    Ok((merged, accounting))
}

fn check_accounting(acc: &Accounting, spec: &BalanceSpec, total: u64) -> Result<()> {
    let slack = spec.tolerance * total as f64;
    for (i, (l, share)) in spec.language_shares.iter().enumerate() {
        let got = acc.row(i) as f64;
        let want = share * total as f64;
        if (got - want).abs() > slack {
            return Err(Error::Budget(format!(
                "language {l} got {got} tokens, wanted {want} ± {slack}"
            )));
        }
    }
    let nat: u64 = acc.natural.iter().sum();
    let syn: u64 = acc.synthetic.iter().sum();
    for (name, got, share) in [
        ("natural", nat, spec.natural_share),
        ("synthetic", syn, 1.0 - spec.natural_share),
    ] {
        let want = share * total as f64;
        if (got as f64 - want).abs() > slack {
            return Err(Error::Budget(format!(
                "source {name} got {got} tokens, wanted {want} ± {slack}"
            )));
        }
    }
    Ok(())
}
