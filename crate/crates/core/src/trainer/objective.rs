//! The joint SGNS loss and its analytic gradient in `f64`.
//!
//! For a positive pair `(w, c)` in slot `t` with negatives `n_1..n_k` and
//! `u = main[w] + delta_t[w]`:
//!
//! ```text
//! loss = -ln σ(u·C[c]) - Σ_k ln σ(-u·C[n_k])
//! ```
//!
//! Because `u` is a sum, `∂loss/∂main[w] = ∂loss/∂delta_t[w] = ∂loss/∂u`.

/// `ln σ(x)` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Loss of one scored (word, context) term and the coefficient `label − σ(score)`.
///
/// `∂loss/∂score = −coefficient`, so a descent step adds `lr · coefficient ·` the
/// other factor of the dot product.
#[inline]
pub fn pair_term(score: f64, positive: bool) -> (f64, f64) {
    if positive {
        (-log_sigmoid(score), 1.0 - sigmoid(score))
    } else {
        (-log_sigmoid(-score), -sigmoid(score))
    }
}

/// Dense `f64` copy of every trainable parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub dim: usize,
    pub main: Vec<f64>,
    pub deltas: Vec<Vec<f64>>,
    pub context: Vec<f64>,
}

impl Params {
    pub fn zeros_like(other: &Params) -> Params {
        Params {
            dim: other.dim,
            main: vec![0.0; other.main.len()],
            deltas: other.deltas.iter().map(|d| vec![0.0; d.len()]).collect(),
            context: vec![0.0; other.context.len()],
        }
    }

    /// Visits every scalar parameter mutably, in a fixed order.
    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        self.main.iter_mut().for_each(&mut f);
        self.deltas.iter_mut().flatten().for_each(&mut f);
        self.context.iter_mut().for_each(&mut f);
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.main.clone();
        self.deltas.iter().for_each(|d| out.extend_from_slice(d));
        out.extend_from_slice(&self.context);
        out
    }

    fn word_vector(&self, word: usize, slot: usize) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|j| self.main[word * d + j] + self.deltas[slot][word * d + j])
            .collect()
    }
}

/// One positive pair with its sampled negatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub word: usize,
    pub slot: usize,
    pub context: usize,
    pub negatives: Vec<usize>,
}

impl Example {
    fn terms(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        std::iter::once((self.context, true)).chain(self.negatives.iter().map(|&n| (n, false)))
    }
}

pub fn batch_loss(params: &Params, batch: &[Example]) -> f64 {
    let d = params.dim;
    batch
        .iter()
        .map(|ex| {
            let u = params.word_vector(ex.word, ex.slot);
            ex.terms()
                .map(|(c, positive)| {
                    let score: f64 = (0..d).map(|j| u[j] * params.context[c * d + j]).sum();
                    pair_term(score, positive).0
                })
                .sum::<f64>()
        })
        .sum()
}

/// Total loss and its gradient with respect to every parameter.
pub fn batch_gradient(params: &Params, batch: &[Example]) -> (f64, Params) {
    let d = params.dim;
    let mut grad = Params::zeros_like(params);
    let mut loss = 0.0;
    for ex in batch {
        let u = params.word_vector(ex.word, ex.slot);
        let mut grad_u = vec![0.0; d];
        for (c, positive) in ex.terms() {
            let ctx = &params.context[c * d..(c + 1) * d];
            let score: f64 = u.iter().zip(ctx).map(|(a, b)| a * b).sum();
            let (l, coeff) = pair_term(score, positive);
            loss += l;
            for j in 0..d {
                grad_u[j] -= coeff * ctx[j];
                grad.context[c * d + j] -= coeff * u[j];
            }
        }
        let row = ex.word * d..(ex.word + 1) * d;
        for (g, du) in grad.main[row.clone()].iter_mut().zip(&grad_u) {
            *g += du;
        }
        for (g, du) in grad.deltas[ex.slot][row].iter_mut().zip(&grad_u) {
            *g += du;
        }
    }
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_sigmoid(800.0).abs() < 1e-300);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
        assert!((sigmoid(-800.0)).abs() < 1e-300);
    }

    #[test]
    fn pair_term_derivative_matches_difference() {
        for &(s, pos) in &[(0.3, true), (-1.2, true), (0.7, false), (-2.5, false)] {
            let h = 1e-6;
            let fd = (pair_term(s + h, pos).0 - pair_term(s - h, pos).0) / (2.0 * h);
            assert!((fd + pair_term(s, pos).1).abs() < 1e-8);
        }
    }
}
