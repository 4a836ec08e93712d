//! Per-pair skipgram objective and the constraint penalty, with analytic
//! gradients. Both are maximized.

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln σ(x)` without overflow for large `|x|`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ln σ(cᵀw) + Σₙ ln σ(−cₙᵀw)`.
pub fn pair_loss(w: &[f64], c: &[f64], negatives: &[&[f64]]) -> f64 {
    log_sigmoid(dot(c, w)) + negatives.iter().map(|n| log_sigmoid(-dot(n, w))).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub w: Vec<f64>,
    pub c: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Gradient of [`pair_loss`] with respect to the center, the context and
/// each negative.
pub fn pair_gradient(w: &[f64], c: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let gpos = 1.0 - sigmoid(dot(c, w));
    let mut gw: Vec<f64> = c.iter().map(|x| gpos * x).collect();
    let gc: Vec<f64> = w.iter().map(|x| gpos * x).collect();
    let mut gn = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g = -sigmoid(dot(n, w));
        for (acc, x) in gw.iter_mut().zip(n.iter()) {
            *acc += g * x;
        }
        gn.push(w.iter().map(|x| g * x).collect());
    }
    PairGradient {
        w: gw,
        c: gc,
        negatives: gn,
    }
}

/// `−λ Σ ‖w − n‖²` over all constrained neighbors.
pub fn constraint_penalty(w: &[f64], neighbors: &[&[f64]], lambda: f64) -> f64 {
    let sq: f64 = neighbors
        .iter()
        .map(|n| w.iter().zip(n.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();
    -lambda * sq
}

/// Gradient of [`constraint_penalty`] with respect to `w`:
/// `2λ Σ (n − w)`.
pub fn constraint_gradient(w: &[f64], neighbors: &[&[f64]], lambda: f64) -> Vec<f64> {
    let mut g = vec![0.0; w.len()];
    for n in neighbors {
        for ((acc, a), b) in g.iter_mut().zip(w).zip(n.iter()) {
            *acc += 2.0 * lambda * (b - a);
        }
    }
    g
}
