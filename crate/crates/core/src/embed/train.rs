//! The training loop.
//!
//! Workers share `W` and `C` as relaxed atomics and update rows without
//! locking; concurrent writes to one row may interleave or be lost, which
//! SGD tolerates. With one worker the run is fully deterministic.

use std::sync::atomic::{AtomicU32, AtomicU64, Ordering::Relaxed};

use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::Serialize;

use super::{EmbeddingModel, EncodedCorpus, Hyperparams, Vocabulary};
use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::rng;

/// Floor of the linear learning-rate decay, relative to the initial rate.
const LR_FLOOR: f64 = 1e-4;
const PROGRESS_BATCH: u64 = 10_000;

#[derive(Clone, Copy)]
enum Mat {
    W,
    C,
}

/// Row access shared by the in-memory model and the lock-free training
/// store.
trait Params {
    fn dim(&self) -> usize;
    fn load(&self, m: Mat, row: u32, out: &mut [f32]);
    /// `row += a * x`
    fn axpy(&mut self, m: Mat, row: u32, a: f32, x: &[f32]);
}

impl Params for EmbeddingModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn load(&self, m: Mat, row: u32, out: &mut [f32]) {
        out.copy_from_slice(match m {
            Mat::W => self.w_row(row),
            Mat::C => self.c_row(row),
        });
    }

    fn axpy(&mut self, m: Mat, row: u32, a: f32, x: &[f32]) {
        let r = match m {
            Mat::W => self.w_row_mut(row),
            Mat::C => self.c_row_mut(row),
        };
        for (y, v) in r.iter_mut().zip(x) {
            *y += a * v;
        }
    }
}

struct Shared {
    dim: usize,
    w: Vec<AtomicU32>,
    c: Vec<AtomicU32>,
}

impl Shared {
    fn from_model(m: &EmbeddingModel) -> Self {
        let atom = |v: &[f32]| v.iter().map(|x| AtomicU32::new(x.to_bits())).collect();
        Shared {
            dim: m.dim,
            w: atom(&m.w),
            c: atom(&m.c),
        }
    }

    fn store_into(&self, m: &mut EmbeddingModel) {
        for (dst, src) in m.w.iter_mut().zip(&self.w) {
            *dst = f32::from_bits(src.load(Relaxed));
        }
        for (dst, src) in m.c.iter_mut().zip(&self.c) {
            *dst = f32::from_bits(src.load(Relaxed));
        }
    }

    fn slice(&self, m: Mat, row: u32) -> &[AtomicU32] {
        let s = row as usize * self.dim;
        match m {
            Mat::W => &self.w[s..s + self.dim],
            Mat::C => &self.c[s..s + self.dim],
        }
    }
}

struct SharedView<'a>(&'a Shared);

impl Params for SharedView<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn load(&self, m: Mat, row: u32, out: &mut [f32]) {
        for (o, a) in out.iter_mut().zip(self.0.slice(m, row)) {
            *o = f32::from_bits(a.load(Relaxed));
        }
    }

    fn axpy(&mut self, m: Mat, row: u32, a: f32, x: &[f32]) {
        for (cell, v) in self.0.slice(m, row).iter().zip(x) {
            let cur = f32::from_bits(cell.load(Relaxed));
            cell.store((cur + a * v).to_bits(), Relaxed);
        }
    }
}

#[derive(Default)]
struct Scratch {
    w: Vec<f32>,
    rows: Vec<f32>,
    targets: Vec<(u32, f32)>,
    grads: Vec<f32>,
    delta: Vec<f32>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            w: vec![0.0; dim],
            delta: vec![0.0; dim],
            ..Default::default()
        }
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One ascent step on the pair objective. All gradients are taken at the
/// pre-step parameters. A negative equal to the context is skipped.
fn skipgram_update<P: Params>(p: &mut P, s: &mut Scratch, center: u32, context: u32, negatives: &[u32], lr: f32) {
    let dim = p.dim();
    p.load(Mat::W, center, &mut s.w);
    s.targets.clear();
    s.targets.push((context, 1.0));
    s.targets
        .extend(negatives.iter().filter(|&&n| n != context).map(|&n| (n, 0.0)));
    s.rows.resize(s.targets.len() * dim, 0.0);
    s.grads.clear();
    for (k, &(row, label)) in s.targets.iter().enumerate() {
        let c = &mut s.rows[k * dim..(k + 1) * dim];
        p.load(Mat::C, row, c);
        s.grads.push(lr * (label - sigmoid(dot(c, &s.w))));
    }
    s.delta.iter_mut().for_each(|x| *x = 0.0);
    for (k, &g) in s.grads.iter().enumerate() {
        let c = &s.rows[k * dim..(k + 1) * dim];
        for (d, x) in s.delta.iter_mut().zip(c) {
            *d += g * x;
        }
    }
    for (k, &(row, _)) in s.targets.iter().enumerate() {
        p.axpy(Mat::C, row, s.grads[k], &s.w);
    }
    p.axpy(Mat::W, center, 1.0, &s.delta);
}

/// `w += step * Σ (n - w)`, with `step = lr * 2λ`; optionally the mirror
/// move on each neighbor.
fn constraint_update<P: Params>(p: &mut P, s: &mut Scratch, center: u32, neighbors: &[u32], step: f32, symmetric: bool) {
    if neighbors.is_empty() || step == 0.0 {
        return;
    }
    let dim = p.dim();
    p.load(Mat::W, center, &mut s.w);
    s.rows.resize(neighbors.len() * dim, 0.0);
    s.delta.iter_mut().for_each(|x| *x = 0.0);
    for (k, &n) in neighbors.iter().enumerate() {
        let r = &mut s.rows[k * dim..(k + 1) * dim];
        p.load(Mat::W, n, r);
        for ((d, a), b) in s.delta.iter_mut().zip(&s.w).zip(r.iter()) {
            *d += b - a;
        }
    }
    p.axpy(Mat::W, center, step, &s.delta);
    if symmetric {
        for (k, &n) in neighbors.iter().enumerate() {
            let r = &s.rows[k * dim..(k + 1) * dim];
            let diff: Vec<f32> = s.w.iter().zip(r).map(|(a, b)| a - b).collect();
            p.axpy(Mat::W, n, step, &diff);
        }
    }
}

/// Gradient-ascent step on the skipgram pair objective for `W[center]`,
/// `C[context]` and `C[negatives]`.
pub fn sgd_step(model: &mut EmbeddingModel, center: u32, context: u32, negatives: &[u32], lr: f64) {
    let mut s = Scratch::new(model.dim);
    skipgram_update(model, &mut s, center, context, negatives, lr as f32);
}

/// `W[center] += lr * 2λ * Σ (W[n] - W[center])`. Moves neighbors as well
/// when the model's hyperparameters ask for symmetric constraints.
pub fn constraint_step(model: &mut EmbeddingModel, center: u32, neighbors: &[u32], lambda: f64, lr: f64) {
    let mut s = Scratch::new(model.dim);
    let symmetric = model.hyper.symmetric_constraints;
    constraint_update(model, &mut s, center, neighbors, (lr * 2.0 * lambda) as f32, symmetric);
}

/// Noise distribution `P(w) ∝ count(w)^power`.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    alias: WeightedAliasIndex<f64>,
    probs: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary, power: f64) -> Result<Self> {
        let weights: Vec<f64> = (0..vocab.len() as u32)
            .map(|i| (vocab.count(i) as f64).powf(power))
            .collect();
        let z: f64 = weights.iter().sum();
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Numeric("noise distribution has no mass".into()));
        }
        let probs = weights.iter().map(|w| w / z).collect();
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::Numeric(format!("noise distribution: {e}")))?;
        Ok(NegativeSampler { alias, probs })
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.alias.sample(rng) as u32
    }

    pub fn probability(&self, ix: u32) -> f64 {
        self.probs[ix as usize]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainReport {
    pub vocab_size: usize,
    pub corpus_tokens: u64,
    pub oov_tokens: u64,
    pub center_updates: u64,
    /// Constraint pairs with both words in the vocabulary.
    pub matched_constraints: usize,
    pub unmatched_constraints: usize,
    pub constrained_words: usize,
}

/// Neighbor lists per vocabulary index; returns (lists, matched, unmatched).
fn resolve_constraints(cs: &ConstraintSet, vocab: &Vocabulary) -> (Vec<Vec<u32>>, usize, usize) {
    let mut lists = vec![Vec::new(); vocab.len()];
    let (mut matched, mut unmatched) = (0, 0);
    for p in cs.iter() {
        match (vocab.get(&p.word_a), vocab.get(&p.word_b)) {
            (Some(a), Some(b)) => {
                matched += 1;
                // same surface form in both languages shares one row
                if a != b {
                    lists[a as usize].push(b);
                    lists[b as usize].push(a);
                }
            }
            _ => unmatched += 1,
        }
    }
    for l in &mut lists {
        l.sort_unstable();
        l.dedup();
    }
    (lists, matched, unmatched)
}

struct Job<'a> {
    corpus: &'a EncodedCorpus,
    vocab: &'a Vocabulary,
    hyper: &'a Hyperparams,
    sampler: &'a NegativeSampler,
    neighbors: Option<&'a [Vec<u32>]>,
    progress: &'a AtomicU64,
    planned: u64,
    total_words: u64,
}

impl Job<'_> {
    fn lr(&self, done: u64) -> f32 {
        let frac = 1.0 - done as f64 / (self.planned as f64 + 1.0);
        (self.hyper.lr * frac.max(LR_FLOOR)) as f32
    }

    fn keep_prob(&self, w: u32) -> f64 {
        let t = self.hyper.subsample * self.total_words as f64;
        let f = self.vocab.count(w) as f64;
        ((f / t).sqrt() + 1.0) * t / f
    }

    fn run<P: Params>(&self, p: &mut P, worker: usize, sentences: std::ops::Range<usize>) -> u64 {
        let h = self.hyper;
        let mut rng = rng::stream(rng::derive(h.seed, "train"), worker as u64);
        let mut s = Scratch::new(h.dim);
        let mut negs = Vec::with_capacity(h.negative);
        let mut kept = Vec::new();
        let mut picked = Vec::with_capacity(h.neighbor_cap);
        let mut pending = 0u64;
        let mut updates = 0u64;
        let step_scale = 2.0 * h.lambda;
        for _ in 0..h.epochs {
            for si in sentences.clone() {
                let sent = self.corpus.sentence(si);
                kept.clear();
                if h.subsample > 0.0 {
                    for &w in sent {
                        if rng.random::<f64>() < self.keep_prob(w) {
                            kept.push(w);
                        }
                    }
                } else {
                    kept.extend_from_slice(sent);
                }
                let lr = self.lr(self.progress.load(Relaxed) + pending);
                for i in 0..kept.len() {
                    let center = kept[i];
                    let b = if h.dynamic_window {
                        rng.random_range(1..=h.window)
                    } else {
                        h.window
                    };
                    let lo = i.saturating_sub(b);
                    let hi = (i + b).min(kept.len() - 1);
                    for j in lo..=hi {
                        if j == i {
                            continue;
                        }
                        negs.clear();
                        negs.extend((0..h.negative).map(|_| self.sampler.sample(&mut rng)));
                        skipgram_update(p, &mut s, center, kept[j], &negs, lr);
                    }
                    if let Some(nb) = self.neighbors {
                        let list = &nb[center as usize];
                        if !list.is_empty() {
                            let chosen: &[u32] = if list.len() <= h.neighbor_cap {
                                list
                            } else {
                                picked.clear();
                                picked.extend(
                                    rand::seq::index::sample(&mut rng, list.len(), h.neighbor_cap)
                                        .iter()
                                        .map(|k| list[k]),
                                );
                                &picked
                            };
                            constraint_update(p, &mut s, center, chosen, lr * step_scale as f32, h.symmetric_constraints);
                        }
                    }
                    updates += 1;
                }
                pending += sent.len() as u64;
                if pending >= PROGRESS_BATCH {
                    self.progress.fetch_add(pending, Relaxed);
                    pending = 0;
                }
            }
        }
        self.progress.fetch_add(pending, Relaxed);
        updates
    }
}

/// Contiguous sentence ranges holding roughly equal token counts.
fn shards(corpus: &EncodedCorpus, n: usize) -> Vec<std::ops::Range<usize>> {
    let total = corpus.tokens.len();
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    for k in 1..=n {
        let goal = total * k / n;
        let mut end = start;
        while end < corpus.sentences() && (k == n || corpus.offsets[end + 1] <= goal) {
            end += 1;
        }
        out.push(start..end);
        start = end;
    }
    out
}

/// Train on an encoded corpus. Constraints are applied only when
/// `hyper.lambda > 0`; pairs with a word outside `vocab` are counted and
/// skipped.
pub fn train(
    corpus: &EncodedCorpus,
    vocab: &Vocabulary,
    constraints: Option<&ConstraintSet>,
    hyper: &Hyperparams,
) -> Result<(EmbeddingModel, TrainReport)> {
    hyper.validate()?;
    if corpus.tokens.is_empty() {
        return Err(Error::Config("cannot train on an empty corpus".into()));
    }
    let sampler = NegativeSampler::new(vocab, hyper.noise_power)?;

    let mut model = EmbeddingModel::zeros(vocab.clone(), hyper.clone());
    let mut init = rng::stream(rng::derive(hyper.seed, "init"), 0);
    let half = 0.5 / hyper.dim as f32;
    for x in model.w.iter_mut() {
        *x = init.random_range(-half..half);
    }

    let mut report = TrainReport {
        vocab_size: vocab.len(),
        corpus_tokens: corpus.tokens.len() as u64,
        oov_tokens: corpus.oov_tokens,
        ..Default::default()
    };
    let resolved = match constraints {
        Some(cs) if hyper.lambda > 0.0 => {
            let (lists, matched, unmatched) = resolve_constraints(cs, vocab);
            report.matched_constraints = matched;
            report.unmatched_constraints = unmatched;
            report.constrained_words = lists.iter().filter(|l| !l.is_empty()).count();
            Some(lists)
        }
        _ => None,
    };

    let progress = AtomicU64::new(0);
    let job = Job {
        corpus,
        vocab,
        hyper,
        sampler: &sampler,
        neighbors: resolved.as_deref(),
        progress: &progress,
        planned: hyper.epochs as u64 * corpus.tokens.len() as u64,
        total_words: corpus.tokens.len() as u64,
    };
    let shared = Shared::from_model(&model);
    let parts = shards(corpus, hyper.threads);
    let updates: u64 = std::thread::scope(|scope| {
        let handles: Vec<_> = parts
            .into_iter()
            .enumerate()
            .map(|(worker, range)| {
                let job = &job;
                let shared = &shared;
                scope.spawn(move || job.run(&mut SharedView(shared), worker, range))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training worker panicked")).sum()
    });
    shared.store_into(&mut model);
    report.center_updates = updates;

    if !model.is_finite() {
        return Err(Error::Numeric("training produced non-finite parameters".into()));
    }
    log::info!(
        "trained {} words x {} dims on {} tokens ({} center updates)",
        vocab.len(),
        hyper.dim,
        corpus.tokens.len(),
        updates
    );
    Ok((model, report))
}

/// Build the vocabulary (with `hyper.min_count`), encode and train.
pub fn train_lines<I, S>(
    lines: I,
    constraints: Option<&ConstraintSet>,
    hyper: &Hyperparams,
) -> Result<(EmbeddingModel, TrainReport)>
where
    I: IntoIterator<Item = S> + Clone,
    S: AsRef<str>,
{
    let vocab = super::build_vocab(lines.clone(), hyper.min_count)?;
    let corpus = EncodedCorpus::encode(lines, &vocab);
    train(&corpus, &vocab, constraints, hyper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{build_vocab, pair_gradient, pair_loss, Matrix};

    fn model_with(words: &[&str], dim: usize, seed: u64) -> EmbeddingModel {
        let vocab = build_vocab([words.join(" ")], 1).unwrap();
        let hyper = Hyperparams {
            dim,
            symmetric_constraints: false,
            ..Hyperparams::default()
        };
        let mut m = EmbeddingModel::zeros(vocab, hyper);
        let mut r = rng::stream(seed, 0);
        for x in m.w.iter_mut().chain(m.c.iter_mut()) {
            *x = r.random_range(-0.5..0.5);
        }
        m
    }

    fn as_f64(v: &[f32]) -> Vec<f64> {
        v.iter().map(|&x| x as f64).collect()
    }

    fn loss_of(m: &EmbeddingModel, center: u32, ctx: u32, negs: &[u32]) -> f64 {
        let w = as_f64(m.w_row(center));
        let c = as_f64(m.c_row(ctx));
        let ns: Vec<Vec<f64>> = negs.iter().map(|&n| as_f64(m.c_row(n))).collect();
        let refs: Vec<&[f64]> = ns.iter().map(|v| v.as_slice()).collect();
        pair_loss(&w, &c, &refs)
    }

    #[test]
    fn zero_lr_is_noop() {
        let mut m = model_with(&["a", "b", "c", "d"], 6, 1);
        let before = m.clone();
        sgd_step(&mut m, 0, 1, &[2, 3], 0.0);
        assert_eq!(m, before);
    }

    #[test]
    fn small_step_increases_pair_objective() {
        for seed in 0..20 {
            let mut m = model_with(&["a", "b", "c", "d"], 8, seed);
            let before = loss_of(&m, 0, 1, &[2, 3]);
            sgd_step(&mut m, 0, 1, &[2, 3], 1e-3);
            assert!(loss_of(&m, 0, 1, &[2, 3]) >= before);
        }
    }

    #[test]
    fn step_applies_the_analytic_gradient() {
        let mut m = model_with(&["a", "b", "c", "d"], 8, 4);
        let before = m.clone();
        let lr = 1e-3;
        let g = {
            let w = as_f64(before.w_row(0));
            let c = as_f64(before.c_row(1));
            let n2 = as_f64(before.c_row(2));
            let n3 = as_f64(before.c_row(3));
            pair_gradient(&w, &c, &[&n2, &n3])
        };
        sgd_step(&mut m, 0, 1, &[2, 3], lr);
        let check = |after: &[f32], before: &[f32], grad: &[f64]| {
            for ((a, b), g) in after.iter().zip(before).zip(grad) {
                let moved = (*a as f64 - *b as f64) / lr;
                assert!((moved - g).abs() < 1e-3 * (1.0 + g.abs()), "{moved} vs {g}");
            }
        };
        check(m.w_row(0), before.w_row(0), &g.w);
        check(m.c_row(1), before.c_row(1), &g.c);
        check(m.c_row(2), before.c_row(2), &g.negatives[0]);
        check(m.c_row(3), before.c_row(3), &g.negatives[1]);
    }

    #[test]
    fn constraint_step_examples() {
        let mut m = model_with(&["a", "b", "c"], 4, 2);
        let before = m.clone();
        constraint_step(&mut m, 0, &[], 0.01, 0.025);
        assert_eq!(m, before);

        // lr * 2λ = 0.5 moves halfway
        constraint_step(&mut m, 0, &[1], 0.25, 1.0);
        for ((a, w0), n) in m.w_row(0).iter().zip(before.w_row(0)).zip(before.w_row(1)) {
            assert!((a - (w0 + n) / 2.0).abs() < 1e-6);
        }
        assert_eq!(m.w_row(1), before.w_row(1));
        assert_eq!(m.c, before.c);
    }

    #[test]
    fn repeated_constraint_steps_contract() {
        let mut m = model_with(&["a", "b"], 5, 3);
        let dist = |m: &EmbeddingModel| {
            m.w_row(0)
                .iter()
                .zip(m.w_row(1))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f32>()
        };
        let mut last = dist(&m);
        for _ in 0..200 {
            constraint_step(&mut m, 0, &[1], 0.01, 0.025);
            let d = dist(&m);
            assert!(d < last);
            last = d;
        }
    }

    #[test]
    fn symmetric_option_moves_neighbor() {
        let mut m = model_with(&["a", "b"], 3, 5);
        m.hyper.symmetric_constraints = true;
        let before = m.clone();
        constraint_step(&mut m, 0, &[1], 0.25, 1.0);
        assert_ne!(m.w_row(1), before.w_row(1));
        for (x, y) in m.w_row(0).iter().zip(m.w_row(1)) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn negative_sampler_follows_smoothed_unigram() {
        let counts: Vec<(String, u64)> = (1..=10).map(|k| (format!("w{k}"), k * 10)).collect();
        let vocab = Vocabulary::from_counts(counts, 1).unwrap();
        let sampler = NegativeSampler::new(&vocab, 0.75).unwrap();
        let z: f64 = (1..=10).map(|k| ((k * 10) as f64).powf(0.75)).sum();
        let mut hits = [0u64; 10];
        let mut r = rng::stream(99, 0);
        let draws = 1_000_000;
        for _ in 0..draws {
            hits[sampler.sample(&mut r) as usize] += 1;
        }
        for i in 0..10u32 {
            let k = vocab.count(i);
            let p = (k as f64).powf(0.75) / z;
            assert!((sampler.probability(i) - p).abs() < 1e-12);
            let emp = hits[i as usize] as f64 / draws as f64;
            assert!((emp - p).abs() / p < 0.01, "word {k}: {emp} vs {p}");
        }
    }

    fn toy_lines() -> Vec<String> {
        let mut v = Vec::new();
        for i in 0..300 {
            v.push(format!("a b c a b c {}", ["d", "e"][i % 2]));
        }
        v
    }

    fn tiny_hyper() -> Hyperparams {
        Hyperparams {
            dim: 10,
            window: 2,
            epochs: 2,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn single_worker_is_deterministic() {
        let lines = toy_lines();
        let (a, _) = train_lines(&lines, None, &tiny_hyper()).unwrap();
        let (b, _) = train_lines(&lines, None, &tiny_hyper()).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite());
    }

    #[test]
    fn zero_lambda_ignores_constraints() {
        let lines = toy_lines();
        let cs = ConstraintSet::from_pairs(
            &["en".into(), "es".into()],
            [crate::constraints::ConstraintPair::new("a", "en", "d", "es").unwrap()],
        );
        let h = Hyperparams {
            lambda: 0.0,
            ..tiny_hyper()
        };
        let (a, _) = train_lines(&lines, Some(&cs), &h).unwrap();
        let (b, _) = train_lines(&lines, None, &h).unwrap();
        let mut fa = Vec::new();
        let mut fb = Vec::new();
        a.vectors(Matrix::W).write(&mut fa).unwrap();
        b.vectors(Matrix::W).write(&mut fb).unwrap();
        assert_eq!(fa, fb);
        assert_eq!(a, b);
    }

    #[test]
    fn unmatched_constraints_are_counted() {
        let lines = toy_lines();
        let cs = ConstraintSet::from_pairs(
            &["en".into(), "es".into()],
            [
                crate::constraints::ConstraintPair::new("a", "en", "d", "es").unwrap(),
                crate::constraints::ConstraintPair::new("a", "en", "zzz", "es").unwrap(),
            ],
        );
        let (_, rep) = train_lines(&lines, Some(&cs), &tiny_hyper()).unwrap();
        assert_eq!((rep.matched_constraints, rep.unmatched_constraints), (1, 1));
        assert_eq!(rep.constrained_words, 2);
    }

    #[test]
    fn empty_corpus_is_error() {
        let vocab = build_vocab(["a"], 1).unwrap();
        let empty = EncodedCorpus::encode(Vec::<String>::new(), &vocab);
        assert!(train(&empty, &vocab, None, &tiny_hyper()).is_err());
    }

    #[test]
    fn parallel_training_stays_finite() {
        let lines = toy_lines();
        let h = Hyperparams {
            threads: 4,
            ..tiny_hyper()
        };
        let (m, rep) = train_lines(&lines, None, &h).unwrap();
        assert!(m.is_finite());
        assert_eq!(rep.center_updates, 2 * 300 * 7);
    }

    #[test]
    fn shards_cover_everything() {
        let vocab = build_vocab(["a b c"], 1).unwrap();
        let lines: Vec<String> = (0..17).map(|i| vec!["a"; i % 5 + 1].join(" ")).collect();
        let e = EncodedCorpus::encode(&lines, &vocab);
        for n in 1..6 {
            let s = shards(&e, n);
            assert_eq!(s.len(), n);
            assert_eq!(s[0].start, 0);
            assert_eq!(s.last().unwrap().end, e.sentences());
            for w in s.windows(2) {
                assert_eq!(w[0].end, w[1].start);
            }
        }
    }

    #[test]
    fn subsampling_drops_frequent_words() {
        let lines = toy_lines();
        let h = Hyperparams {
            subsample: 1e-3,
            ..tiny_hyper()
        };
        let (m, rep) = train_lines(&lines, None, &h).unwrap();
        assert!(m.is_finite());
        assert!(rep.center_updates < 2 * 300 * 7);
    }
}
