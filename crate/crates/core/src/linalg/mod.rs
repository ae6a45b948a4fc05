//! Dense kernels for the analyses: cosine similarity, symmetric
//! eigendecomposition by cyclic Jacobi rotations, and PCA.

mod jacobi;
mod matrix;
mod pca;

pub use jacobi::{symmetric_eigen, SymmetricEigen, JACOBI_TOLERANCE};
pub use matrix::Matrix;
pub use pca::{pca, PcaResult};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity, clamped into `[-1, 1]`. Zero-norm input is an error.
pub fn cossim(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "cossim of {}- and {}-vectors",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 || !na.is_finite() || !nb.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cossim_examples() {
        assert_eq!(cossim(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        // 24 / 25
        assert!((cossim(&[3.0, 4.0], &[4.0, 3.0]).unwrap() - 0.96).abs() < 1e-15);
        assert!(matches!(cossim(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroNorm)));
        assert!(cossim(&[1.0], &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn self_similarity_is_one(v in prop::collection::vec(-10.0f64..10.0, 1..16)) {
            prop_assume!(norm(&v) > 1e-6);
            prop_assert!((cossim(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn cosine_is_bounded(
            a in prop::collection::vec(-10.0f64..10.0, 4),
            b in prop::collection::vec(-10.0f64..10.0, 4),
        ) {
            prop_assume!(norm(&a) > 1e-6 && norm(&b) > 1e-6);
            let c = cossim(&a, &b).unwrap();
            prop_assert!((-1.0..=1.0).contains(&c));
        }
    }
}
