//! Word-similarity evaluation with Spearman's rho.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::embed::WordVectors;
use crate::error::{Error, Result};
use crate::mapping::{self, LinearMap, Preprocessed};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimPair {
    pub word1: String,
    pub lang1: String,
    pub word2: String,
    pub lang2: String,
    pub gold: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityDataset {
    pub pairs: Vec<SimPair>,
}

fn split_fields<'a>(path: &Path, n: usize, line: &'a str, want: usize) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != want {
        return Err(Error::parse(path, n, format!("expected {want} tab-separated fields, got {}", f.len())));
    }
    Ok(f)
}

fn parse_score(path: &Path, n: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, n, format!("bad score {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, n, "score is not finite"));
    }
    Ok(v)
}

fn data_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push((i + 1, line.to_owned()));
    }
    Ok(out)
}

impl SimilarityDataset {
    /// `word1<TAB>lang1<TAB>word2<TAB>lang2<TAB>score`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut pairs = Vec::new();
        for (n, line) in data_lines(path)? {
            let f = split_fields(path, n, &line, 5)?;
            pairs.push(SimPair {
                word1: f[0].to_owned(),
                lang1: f[1].to_owned(),
                word2: f[2].to_owned(),
                lang2: f[3].to_owned(),
                gold: parse_score(path, n, f[4])?,
            });
        }
        Ok(SimilarityDataset { pairs })
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in &self.pairs {
            writeln!(out, "{}\t{}\t{}\t{}\t{}", p.word1, p.lang1, p.word2, p.lang2, p.gold)?;
        }
        Ok(())
    }
}

/// Monolingual dataset row: `id<TAB>word1<TAB>word2<TAB>score`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoPair {
    pub id: String,
    pub word1: String,
    pub word2: String,
    pub gold: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonoDataset {
    pub pairs: Vec<MonoPair>,
}

impl MonoDataset {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut pairs = Vec::new();
        for (n, line) in data_lines(path)? {
            let f = split_fields(path, n, &line, 4)?;
            pairs.push(MonoPair {
                id: f[0].to_owned(),
                word1: f[1].to_owned(),
                word2: f[2].to_owned(),
                gold: parse_score(path, n, f[3])?,
            });
        }
        Ok(MonoDataset { pairs })
    }
}

/// Combine two translations of one monolingual dataset into a cross-lingual
/// one. Each aligned pair `(w1, w2)` yields `(w1_A, w2_B)` and `(w1_B, w2_A)`
/// scored with the mean of both gold scores; repeated surface pairs are
/// merged keeping the mean of their scores. Returns the dataset and the
/// number of unaligned ids skipped.
pub fn build_crosslingual(
    a: &MonoDataset,
    lang_a: &str,
    b: &MonoDataset,
    lang_b: &str,
) -> (SimilarityDataset, usize) {
    let b_by_id: HashMap<&str, &MonoPair> = b.pairs.iter().map(|p| (p.id.as_str(), p)).collect();
    let a_ids: std::collections::HashSet<&str> = a.pairs.iter().map(|p| p.id.as_str()).collect();
    let mut skipped = b.pairs.iter().filter(|p| !a_ids.contains(p.id.as_str())).count();

    type Key = ((String, String), (String, String));
    let mut order: Vec<(Key, SimPair)> = Vec::new();
    let mut slot: HashMap<Key, (usize, f64, usize)> = HashMap::new();
    let mut emit = |w1: &str, l1: &str, w2: &str, l2: &str, gold: f64| {
        let x = (l1.to_owned(), w1.to_owned());
        let y = (l2.to_owned(), w2.to_owned());
        let key = if x <= y { (x, y) } else { (y, x) };
        match slot.get_mut(&key) {
            Some((_, sum, n)) => {
                *sum += gold;
                *n += 1;
            }
            None => {
                slot.insert(key.clone(), (order.len(), gold, 1));
                order.push((
                    key,
                    SimPair {
                        word1: w1.to_owned(),
                        lang1: l1.to_owned(),
                        word2: w2.to_owned(),
                        lang2: l2.to_owned(),
                        gold,
                    },
                ));
            }
        }
    };
    for pa in &a.pairs {
        let Some(pb) = b_by_id.get(pa.id.as_str()) else {
            skipped += 1;
            continue;
        };
        let gold = (pa.gold + pb.gold) / 2.0;
        emit(&pa.word1, lang_a, &pb.word2, lang_b, gold);
        emit(&pb.word1, lang_b, &pa.word2, lang_a, gold);
    }
    if skipped > 0 {
        log::warn!("{skipped} dataset ids could not be aligned");
    }
    let pairs = order
        .into_iter()
        .map(|(key, mut p)| {
            let (_, sum, n) = slot[&key];
            p.gold = sum / n as f64;
            p
        })
        .collect();
    (SimilarityDataset { pairs }, skipped)
}

/// `u·v / (‖u‖‖v‖)` in f64.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Validation(format!("dimension mismatch {} vs {}", u.len(), v.len())));
    }
    let (mut uv, mut uu, mut vv) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in u.iter().zip(v) {
        let (a, b) = (f64::from(*a), f64::from(*b));
        uv += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::Numeric("cosine of a zero vector is undefined".into()));
    }
    Ok(uv / (uu.sqrt() * vv.sqrt()))
}

/// Ranks starting at 1; ties share their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        // positions i..=j share rank ((i+1) + (j+1)) / 2
        let r = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average-tie ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Eval("correlation needs at least two pairs".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite score".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    // ranks are multiples of 1/2, so the centered sums below are exact
    let mean = (x.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Eval("correlation is undefined for a constant vector".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// How a pair's predicted similarity is computed.
pub enum Scorer<'a> {
    /// Cosine of `W+C` vectors in one shared space; languages are ignored.
    Joint(&'a WordVectors),
    /// Words in `source_lang` are looked up in `source` and mapped; all
    /// others are looked up in `target`.
    Mapped {
        map: &'a LinearMap,
        source: &'a Preprocessed,
        target: &'a Preprocessed,
        source_lang: &'a str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OovPolicy {
    /// Leave pairs with an unknown word out of the correlation.
    #[default]
    Exclude,
    /// Score them with the midpoint of the covered predictions' range.
    Midpoint,
}

fn lookup_candidates(word: &str) -> Vec<String> {
    let mut c = vec![word.to_owned()];
    let lower = word.to_lowercase();
    if lower != word {
        c.push(lower.clone());
    }
    let joined = lower.split_whitespace().collect::<Vec<_>>().join("_");
    if !c.contains(&joined) {
        c.push(joined);
    }
    c
}

impl std::str::FromStr for OovPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exclude" => Ok(OovPolicy::Exclude),
            "midpoint" => Ok(OovPolicy::Midpoint),
            _ => Err(Error::Config(format!("unknown OOV policy {s:?} (exclude|midpoint)"))),
        }
    }
}

impl Scorer<'_> {
    fn joint_vec<'v>(wv: &'v WordVectors, word: &str) -> Option<&'v [f32]> {
        lookup_candidates(word).iter().find_map(|w| wv.get(w))
    }

    fn mapped_vec(&self, word: &str, lang: &str) -> Option<DVector<f64>> {
        let Scorer::Mapped {
            map,
            source,
            target,
            source_lang,
        } = self
        else {
            return None;
        };
        if lang == *source_lang {
            let x = lookup_candidates(word).iter().find_map(|w| source.get(w))?;
            Some(map.apply(&x))
        } else {
            lookup_candidates(word).iter().find_map(|w| target.get(w))
        }
    }

    /// `None` when a word is unknown or its vector is zero.
    pub fn score(&self, p: &SimPair) -> Option<f64> {
        match self {
            Scorer::Joint(wv) => {
                let a = Self::joint_vec(wv, &p.word1)?;
                let b = Self::joint_vec(wv, &p.word2)?;
                cosine(a, b).ok()
            }
            Scorer::Mapped { .. } => {
                let a = self.mapped_vec(&p.word1, &p.lang1)?;
                let b = self.mapped_vec(&p.word2, &p.lang2)?;
                mapping::cosine(&a, &b).ok()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairScore {
    #[serde(flatten)]
    pub pair: SimPair,
    pub predicted: Option<f64>,
    pub oov: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub spearman: f64,
    pub total_pairs: usize,
    pub covered_pairs: usize,
    pub oov_pairs: usize,
    pub pairs: Vec<PairScore>,
}

impl EvalReport {
    pub fn coverage(&self) -> f64 {
        self.covered_pairs as f64 / self.total_pairs.max(1) as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn score_pairs(scorer: &Scorer<'_>, dataset: &SimilarityDataset, policy: OovPolicy) -> Result<EvalReport> {
    let mut rows: Vec<PairScore> = dataset
        .pairs
        .iter()
        .map(|p| {
            let predicted = scorer.score(p);
            PairScore {
                pair: p.clone(),
                oov: predicted.is_none(),
                predicted,
            }
        })
        .collect();
    let covered = rows.iter().filter(|r| !r.oov).count();
    if covered == 0 {
        return Err(Error::Eval("every pair has an out-of-vocabulary word".into()));
    }
    let (gold, pred): (Vec<f64>, Vec<f64>) = match policy {
        OovPolicy::Exclude => rows
            .iter()
            .filter_map(|r| r.predicted.map(|s| (r.pair.gold, s)))
            .unzip(),
        OovPolicy::Midpoint => {
            let (lo, hi) = rows
                .iter()
                .filter_map(|r| r.predicted)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
            let mid = (lo + hi) / 2.0;
            for r in rows.iter_mut().filter(|r| r.oov) {
                r.predicted = Some(mid);
            }
            rows.iter().map(|r| (r.pair.gold, r.predicted.unwrap())).unzip()
        }
    };
    let rho = spearman(&gold, &pred)?;
    Ok(EvalReport {
        spearman: rho,
        total_pairs: rows.len(),
        covered_pairs: covered,
        oov_pairs: rows.len() - covered,
        pairs: rows,
    })
}
