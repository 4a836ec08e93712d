use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Hyperparams, Vocabulary};
use crate::error::{Error, Result};

/// Which matrix to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matrix {
    W,
    C,
    /// `W + C`, the representation used for similarity.
    Sum,
}

/// Trained target and context matrices over one vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    pub dim: usize,
    /// Row-major `|V| x dim`.
    pub w: Vec<f32>,
    pub c: Vec<f32>,
    pub hyper: Hyperparams,
}

impl EmbeddingModel {
    /// Zero-filled model, mainly for tests.
    pub fn zeros(vocab: Vocabulary, hyper: Hyperparams) -> Self {
        let n = vocab.len() * hyper.dim;
        EmbeddingModel {
            dim: hyper.dim,
            w: vec![0.0; n],
            c: vec![0.0; n],
            vocab,
            hyper,
        }
    }

    pub fn w_row(&self, ix: u32) -> &[f32] {
        let s = ix as usize * self.dim;
        &self.w[s..s + self.dim]
    }

    pub fn c_row(&self, ix: u32) -> &[f32] {
        let s = ix as usize * self.dim;
        &self.c[s..s + self.dim]
    }

    pub fn w_row_mut(&mut self, ix: u32) -> &mut [f32] {
        let s = ix as usize * self.dim;
        &mut self.w[s..s + self.dim]
    }

    pub fn c_row_mut(&mut self, ix: u32) -> &mut [f32] {
        let s = ix as usize * self.dim;
        &mut self.c[s..s + self.dim]
    }

    /// `W[word] + C[word]`.
    pub fn word_vector(&self, word: &str) -> Result<Vec<f32>> {
        let ix = self.vocab.get(word).ok_or_else(|| Error::lookup("word", word))?;
        Ok(self.w_row(ix).iter().zip(self.c_row(ix)).map(|(a, b)| a + b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.c).all(|x| x.is_finite())
    }

    pub fn vectors(&self, which: Matrix) -> WordVectors {
        let data = match which {
            Matrix::W => self.w.clone(),
            Matrix::C => self.c.clone(),
            Matrix::Sum => self.w.iter().zip(&self.c).map(|(a, b)| a + b).collect(),
        };
        WordVectors::new(
            self.vocab.iter().map(|(w, _)| w.to_owned()).collect(),
            self.dim,
            data,
        )
        .expect("model rows are consistent")
    }
}

/// Word-to-vector table in the word2vec text layout.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f32>,
}

impl WordVectors {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != words.len() * dim {
            return Err(Error::Validation(format!(
                "{} words x {dim} dims does not match {} values",
                words.len(),
                data.len()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate word {w}")));
            }
        }
        Ok(WordVectors {
            words,
            index,
            dim,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index_of(word).map(|i| self.row(i))
    }

    /// Copy with every entry multiplied by `k`.
    pub fn scaled(&self, k: f32) -> WordVectors {
        WordVectors {
            data: self.data.iter().map(|x| x * k).collect(),
            ..self.clone()
        }
    }

    /// Header `"|V| D"`, then `word v1 .. vD` per line.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        if self.words.is_empty() {
            return Err(Error::Validation("refusing to save an empty vocabulary".into()));
        }
        let io = |e| Error::io("<model>", e);
        writeln!(out, "{} {}", self.words.len(), self.dim).map_err(io)?;
        let mut line = String::new();
        for (i, w) in self.words.iter().enumerate() {
            line.clear();
            line.push_str(w);
            for x in self.row(i) {
                line.push(' ');
                // shortest representation that parses back to the same f32
                line.push_str(&x.to_string());
            }
            line.push('\n');
            out.write_all(line.as_bytes()).map_err(io)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write(&mut out).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = match lines.next() {
            Some(l) => l.map_err(|e| Error::io(path, e))?,
            None => return Err(Error::parse(path, 1, "missing header")),
        };
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (n, dim) = match parts.as_slice() {
            [n, d] => (
                n.parse::<usize>().map_err(|_| Error::parse(path, 1, "bad vocabulary size"))?,
                d.parse::<usize>().map_err(|_| Error::parse(path, 1, "bad dimension"))?,
            ),
            _ => return Err(Error::parse(path, 1, "header must be `|V| D`")),
        };
        let mut words = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * dim);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            if words.len() == n {
                return Err(Error::parse(path, lineno, format!("more rows than the {n} in the header")));
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap();
            let before = data.len();
            for f in fields {
                data.push(
                    f.parse::<f32>()
                        .map_err(|_| Error::parse(path, lineno, format!("bad number {f:?}")))?,
                );
            }
            if data.len() - before != dim {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected {dim} values, got {}", data.len() - before),
                ));
            }
            words.push(word.to_owned());
        }
        if words.len() != n {
            return Err(Error::parse(
                path,
                words.len() + 2,
                format!("header announces {n} rows, file has {}", words.len()),
            ));
        }
        WordVectors::new(words, dim, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::build_vocab;
    use rand::{Rng, SeedableRng};

    fn small_model() -> EmbeddingModel {
        let vocab = build_vocab(["x y"], 1).unwrap();
        let hyper = Hyperparams {
            dim: 2,
            ..Hyperparams::default()
        };
        let mut m = EmbeddingModel::zeros(vocab, hyper);
        let x = m.vocab.get("x").unwrap();
        m.w_row_mut(x).copy_from_slice(&[1.0, 2.0]);
        m
    }

    #[test]
    fn word_vector_adds_rows() {
        let mut m = small_model();
        assert_eq!(m.word_vector("x").unwrap(), vec![1.0, 2.0]);
        let x = m.vocab.get("x").unwrap();
        m.c_row_mut(x).copy_from_slice(&[3.0, 4.0]);
        assert_eq!(m.word_vector("x").unwrap(), vec![4.0, 6.0]);
        assert!(matches!(m.word_vector("zzz"), Err(Error::Lookup { .. })));
    }

    #[test]
    fn saved_sum_vector_round_trips() {
        let mut m = small_model();
        let x = m.vocab.get("x").unwrap();
        m.c_row_mut(x).copy_from_slice(&[0.1, -0.3]);
        let f = tempfile::NamedTempFile::new().unwrap();
        m.vectors(Matrix::Sum).save(f.path()).unwrap();
        let back = WordVectors::load(f.path()).unwrap();
        let v = m.word_vector("x").unwrap();
        for (a, b) in back.get("x").unwrap().iter().zip(&v) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn small_round_trip_is_exact() {
        let wv = WordVectors::new(vec!["a".into(), "b".into()], 3, vec![0.5, -1.25, 3.0, 1e-7, 2.5e8, -0.0]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        wv.save(f.path()).unwrap();
        assert_eq!(WordVectors::load(f.path()).unwrap(), wv);
    }

    #[test]
    fn large_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let dim = 8;
        let words: Vec<String> = (0..1000).map(|i| format!("w{i}")).collect();
        let data: Vec<f32> = (0..1000 * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        let wv = WordVectors::new(words, dim, data).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        wv.save(f.path()).unwrap();
        let back = WordVectors::load(f.path()).unwrap();
        let max = (0..wv.len())
            .flat_map(|i| wv.row(i).iter().zip(back.row(i)).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>())
            .fold(0.0f32, f32::max);
        assert!(max < 1e-6);
    }

    #[test]
    fn empty_vocab_rejected() {
        let wv = WordVectors::new(Vec::new(), 3, Vec::new()).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        assert!(matches!(wv.save(f.path()), Err(Error::Validation(_))));
    }

    #[test]
    fn header_mismatch_is_parse_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "3 2\na 1 2\nb 3 4").unwrap();
        assert!(matches!(WordVectors::load(f.path()), Err(Error::Parse { .. })));
        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "1 2\na 1 2 3").unwrap();
        assert!(matches!(WordVectors::load(g.path()), Err(Error::Parse { .. })));
    }
}
