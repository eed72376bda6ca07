//! Unit-norm state vectors.

use num_complex::Complex64;

use super::QlaError;
use crate::tol;

/// A normalized pure state. Construction rejects vectors whose squared
/// norm strays from 1 by more than [`tol::STRUCTURAL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: Vec<Complex64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, QlaError> {
        if amplitudes.is_empty() {
            return Err(QlaError::ZeroDimension);
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let deviation = (norm_sq - 1.0).abs();
        if deviation > tol::STRUCTURAL {
            return Err(QlaError::NotNormalized { deviation });
        }
        Ok(Self { amplitudes })
    }

    /// Convenience constructor from real amplitudes, normalizing the input.
    /// Handy for the standard test states like (1, 1, 1)/sqrt(3).
    pub fn from_reals(values: &[f64]) -> Result<Self, QlaError> {
        let norm: f64 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QlaError::NotNormalized { deviation: 1.0 });
        }
        Self::new(
            values
                .iter()
                .map(|v| Complex64::new(v / norm, 0.0))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Result<Complex64, QlaError> {
        if self.dim() != other.dim() {
            return Err(QlaError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Standard basis vector `|index>`.
    pub fn basis_vector(dim: usize, index: usize) -> Result<Self, QlaError> {
        if dim == 0 {
            return Err(QlaError::ZeroDimension);
        }
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_normalized_input() {
        let err = Ket::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(err, QlaError::NotNormalized { .. }));
    }

    #[test]
    fn norm_tolerance_is_respected() {
        // Deviation 1e-12 in the squared norm is well inside tolerance.
        let a = (0.5_f64 + 5e-13).sqrt();
        let b = (0.5_f64).sqrt();
        assert!(Ket::new(vec![c(a, 0.0), c(b, 0.0)]).is_ok());
    }

    #[test]
    fn inner_product_conjugates_the_left_argument() {
        let s = 1.0 / 2.0_f64.sqrt();
        let y_plus = Ket::new(vec![c(s, 0.0), c(0.0, s)]).unwrap();
        let z_plus = Ket::basis_vector(2, 0).unwrap();
        // <y+|z+> = conj(1/sqrt 2) * 1 = 1/sqrt 2.
        let ip = y_plus.inner(&z_plus).unwrap();
        assert!((ip - c(s, 0.0)).norm() < 1e-15);
    }
}
