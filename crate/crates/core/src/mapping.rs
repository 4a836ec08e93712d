//! Orthogonal map between two independently trained spaces.
//!
//! Both spaces are length-normalized, mean-centered per dimension and
//! normalized again; the map is then the orthogonal `M` minimizing
//! `Σ ‖M x_i − y_i‖²` over dictionary pairs, i.e. `M = U Vᵀ` for the SVD
//! `U Σ Vᵀ` of `Σ y_i x_iᵀ`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::embed::WordVectors;
use crate::error::{Error, Result};

/// Singular values below this (relative to the largest, or absolutely when
/// all are tiny) count as zero.
const RANK_EPS: f64 = 1e-12;

/// Normalized and centered copy of a vector space.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    words: Vec<String>,
    index: HashMap<String, usize>,
    /// `|V| x D`, one unit (or zero) row per word.
    pub rows: DMatrix<f64>,
    /// Column means after the first normalization.
    pub mean: DVector<f64>,
    /// Words left as zero vectors.
    pub degenerate: Vec<String>,
}

impl Preprocessed {
    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn get(&self, word: &str) -> Option<DVector<f64>> {
        self.index
            .get(word)
            .map(|&i| self.rows.row(i).transpose().into_owned())
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

fn normalize_rows(m: &mut DMatrix<f64>, flagged: &mut [bool]) {
    for (i, flag) in flagged.iter_mut().enumerate() {
        let n = m.row(i).norm();
        if n <= RANK_EPS {
            m.row_mut(i).fill(0.0);
            *flag = true;
        } else {
            m.row_mut(i).scale_mut(1.0 / n);
        }
    }
}

/// Unit length, center each dimension, unit length again. Rows that are (or
/// become) zero stay zero and are listed in `degenerate`.
pub fn preprocess(vectors: &WordVectors) -> Preprocessed {
    let n = vectors.len();
    let d = vectors.dim();
    let mut rows = DMatrix::<f64>::from_fn(n, d, |i, j| f64::from(vectors.row(i)[j]));
    let mut flagged = vec![false; n];
    normalize_rows(&mut rows, &mut flagged);

    let live = flagged.iter().filter(|f| !**f).count();
    let mut mean = DVector::<f64>::zeros(d);
    if live > 0 {
        for (i, f) in flagged.iter().enumerate() {
            if !f {
                mean += rows.row(i).transpose();
            }
        }
        mean /= live as f64;
        for (i, f) in flagged.iter().enumerate() {
            if !f {
                let centered = rows.row(i) - mean.transpose();
                rows.set_row(i, &centered);
            }
        }
    }
    normalize_rows(&mut rows, &mut flagged);

    let words = vectors.words().to_vec();
    let degenerate = words
        .iter()
        .zip(&flagged)
        .filter(|(_, f)| **f)
        .map(|(w, _)| w.clone())
        .collect();
    let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    Preprocessed {
        words,
        index,
        rows,
        mean,
        degenerate,
    }
}

/// Paired rows from a bilingual dictionary.
#[derive(Debug, Clone)]
pub struct MappingProblem {
    /// `n x D` source rows.
    pub source: DMatrix<f64>,
    /// `n x D` target rows.
    pub target: DMatrix<f64>,
    pub used_pairs: usize,
    /// Pairs with an out-of-vocabulary side.
    pub dropped_pairs: usize,
}

impl MappingProblem {
    pub fn new(source: &Preprocessed, target: &Preprocessed, dictionary: &[(String, String)]) -> Result<Self> {
        if source.dim() != target.dim() {
            return Err(Error::Validation(format!(
                "source has {} dims, target {}",
                source.dim(),
                target.dim()
            )));
        }
        let pairs: Vec<(DVector<f64>, DVector<f64>)> = dictionary
            .iter()
            .filter_map(|(s, t)| Some((source.get(s)?, target.get(t)?)))
            .collect();
        let d = source.dim();
        let n = pairs.len();
        let src = DMatrix::from_fn(n, d, |i, j| pairs[i].0[j]);
        let tgt = DMatrix::from_fn(n, d, |i, j| pairs[i].1[j]);
        if n < d {
            log::warn!("only {n} usable dictionary pairs for a {d}-dimensional map");
        }
        Ok(MappingProblem {
            source: src,
            target: tgt,
            used_pairs: n,
            dropped_pairs: dictionary.len() - n,
        })
    }
}

/// Orthogonal `D x D` map applied as `y = M x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    pub matrix: DMatrix<f64>,
}

impl LinearMap {
    pub fn identity(d: usize) -> Self {
        LinearMap {
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// `‖MᵀM − I‖_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim();
        (self.matrix.transpose() * &self.matrix - DMatrix::<f64>::identity(d, d)).norm()
    }

    /// `Σ ‖M x_i − y_i‖²` over the problem's rows.
    pub fn objective(&self, p: &MappingProblem) -> f64 {
        (&p.source * self.matrix.transpose() - &p.target).norm_squared()
    }

    /// One row of D reals per line.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for i in 0..self.dim() {
            let row: Vec<String> = self.matrix.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", row.join(" ")).map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|f| f.parse::<f64>().map_err(|_| Error::parse(path, n + 1, format!("bad number {f:?}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::parse(path, 1, "map file must hold a square matrix"));
        }
        Ok(LinearMap {
            matrix: DMatrix::from_fn(d, d, |i, j| rows[i][j]),
        })
    }
}

/// Closed-form orthogonal Procrustes solution.
pub fn fit_orthogonal(p: &MappingProblem) -> Result<LinearMap> {
    if p.used_pairs == 0 {
        return Err(Error::Numeric("no usable dictionary pairs".into()));
    }
    // Σ y_i x_iᵀ
    let cross = p.target.transpose() * &p.source;
    let svd = cross.svd(true, true);
    let largest = svd.singular_values.max();
    if largest.is_nan() || largest <= RANK_EPS {
        return Err(Error::Numeric("cross-covariance has rank 0".into()));
    }
    let u = svd.u.ok_or_else(|| Error::Numeric("SVD did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numeric("SVD did not return Vᵀ".into()))?;
    Ok(LinearMap { matrix: u * v_t })
}

pub fn cosine(u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Numeric("cosine of a zero vector".into()));
    }
    Ok(u.dot(v) / (nu * nv))
}

/// `cos(M x_source, y_target)`.
pub fn cross_similarity(
    map: &LinearMap,
    source: &Preprocessed,
    target: &Preprocessed,
    source_word: &str,
    target_word: &str,
) -> Result<f64> {
    let x = source.get(source_word).ok_or_else(|| Error::lookup("source word", source_word))?;
    let y = target.get(target_word).ok_or_else(|| Error::lookup("target word", target_word))?;
    cosine(&map.apply(&x), &y)
}
