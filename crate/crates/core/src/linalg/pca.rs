use super::{symmetric_eigen, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PcaResult {
    pub mean: Vec<f64>,
    /// `q × p`, rows are orthonormal principal axes.
    pub components: Matrix,
    /// Eigenvalues of the covariance matrix for the returned components.
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Sum of all `p` covariance eigenvalues.
    pub total_variance: f64,
    /// `n × q` coordinates of the centered input rows.
    pub projections: Matrix,
    /// Input had (numerically) zero variance; components are an arbitrary basis.
    pub degenerate: bool,
}

impl PcaResult {
    pub fn num_components(&self) -> usize {
        self.components.rows()
    }

    /// Negates component `k` together with its projection column.
    pub fn flip_component(&mut self, k: usize) {
        for v in self.components.row_mut(k) {
            *v = -*v;
        }
        for i in 0..self.projections.rows() {
            self.projections[(i, k)] = -self.projections[(i, k)];
        }
    }

    /// Maps projections back into input space (centered).
    pub fn reconstruct_centered(&self) -> Matrix {
        self.projections
            .matmul(&self.components)
            .expect("projection and component shapes agree")
    }
}

/// Principal component analysis with mean centering and an `n − 1` covariance divisor.
///
/// Each returned axis has its largest-magnitude entry positive.
pub fn pca(x: &Matrix, q: usize) -> Result<PcaResult> {
    let (n, p) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::InvalidPca(format!("need at least 2 rows, got {n}")));
    }
    if q == 0 || q > (n - 1).min(p) {
        return Err(Error::InvalidPca(format!(
            "q = {q} outside [1, min(n-1, p)] = [1, {}]",
            (n - 1).min(p)
        )));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("PCA input".into()));
    }

    let mut mean = vec![0.0; p];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut centered = x.clone();
    for i in 0..n {
        for (v, m) in centered.row_mut(i).iter_mut().zip(&mean) {
            *v -= m;
        }
    }

    let mut cov = Matrix::zeros(p, p);
    for i in 0..n {
        let row = centered.row(i);
        for a in 0..p {
            for b in a..p {
                cov[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            cov[(a, b)] /= (n - 1) as f64;
            cov[(b, a)] = cov[(a, b)];
        }
    }

    let eig = symmetric_eigen(&cov)?;
    let total_variance: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    let scale = 1.0 + mean.iter().map(|m| m * m).sum::<f64>() / p as f64;
    let degenerate = total_variance <= 1e-24 * scale;

    let mut components = Matrix::zeros(q, p);
    let mut explained_variance = Vec::with_capacity(q);
    let mut explained_variance_ratio = Vec::with_capacity(q);
    for k in 0..q {
        if degenerate {
            components[(k, k)] = 1.0;
            explained_variance.push(0.0);
            explained_variance_ratio.push(0.0);
            continue;
        }
        let column: Vec<f64> = (0..p).map(|r| eig.vectors[(r, k)]).collect();
        let pivot = column
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > column[best].abs() { i } else { best });
        let sign = if column[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (dst, v) in components.row_mut(k).iter_mut().zip(&column) {
            *dst = sign * v;
        }
        let lambda = eig.values[k].max(0.0);
        explained_variance.push(lambda);
        explained_variance_ratio.push(lambda / total_variance);
    }

    let projections = centered.matmul(&components.transpose())?;
    Ok(PcaResult {
        mean,
        components,
        explained_variance,
        explained_variance_ratio,
        total_variance: if degenerate { 0.0 } else { total_variance },
        projections,
        degenerate,
    })
}
