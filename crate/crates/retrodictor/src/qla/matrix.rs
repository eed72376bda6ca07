//! Dense square complex matrices with row-major storage.

// Index loops mirror the subscript arithmetic throughout this module.
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use super::QlaError;

/// A dim x dim complex matrix. The workhorse carrier for every operator in
/// the crate; dimensions stay small (tens at most), so all operations are
/// plain loops.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Fails unless the entry count
    /// is exactly `dim * dim`.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, QlaError> {
        if dim == 0 {
            return Err(QlaError::ZeroDimension);
        }
        if entries.len() != dim * dim {
            return Err(QlaError::NotSquare {
                dim,
                len: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Result<Self, QlaError> {
        if u.len() != v.len() {
            return Err(QlaError::DimensionMismatch {
                left: u.len(),
                right: v.len(),
            });
        }
        let dim = u.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.entries[i * dim + j] = u[i] * v[j].conj();
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    fn check_dim(&self, other: &Self) -> Result<(), QlaError> {
        if self.dim != other.dim {
            return Err(QlaError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, QlaError> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, QlaError> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, QlaError> {
        self.check_dim(other)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.entries[i * d + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += aik * other.entries[k * d + j];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    /// Largest entry modulus, the max-norm used by all structural checks.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Matrix-vector product `M v`.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>, QlaError> {
        if v.len() != self.dim {
            return Err(QlaError::DimensionMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for i in 0..d {
            for j in 0..d {
                out[i] += self.entries[i * d + j] * v[j];
            }
        }
        Ok(out)
    }

    /// Sesquilinear form `<v|M|v>`.
    pub fn expectation(&self, v: &[Complex64]) -> Result<Complex64, QlaError> {
        let mv = self.apply(v)?;
        Ok(v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum())
    }

    /// Max-norm distance from the conjugate transpose.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.sub(&self.adjoint())
            .expect("same dimension")
            .max_norm()
    }

    /// Max-norm distance of `M*M` from `M`.
    pub fn idempotency_deviation(&self) -> f64 {
        let squared = self.multiply(self).expect("same dimension");
        squared.sub(self).expect("same dimension").max_norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_self_adjoint() {
        let id = ComplexMatrix::identity(2);
        assert_eq!(id.adjoint(), id);
    }

    #[test]
    fn trace_of_identity_is_dimension() {
        let tr = ComplexMatrix::identity(3).trace();
        assert_abs_diff_eq!(tr.re, 3.0);
        assert_abs_diff_eq!(tr.im, 0.0);
    }

    #[test]
    fn multiply_rejects_mismatched_dims() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert_eq!(
            a.multiply(&b),
            Err(QlaError::DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn non_square_entry_count_is_rejected() {
        let err = ComplexMatrix::new(2, vec![c(1.0, 0.0); 3]).unwrap_err();
        assert_eq!(err, QlaError::NotSquare { dim: 2, len: 3 });
    }

    #[test]
    fn adjoint_conjugates_off_diagonal() {
        let m = ComplexMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let a = m.adjoint();
        assert_eq!(a.at(1, 0), c(0.0, -1.0));
        assert_eq!(a.at(0, 1), c(2.0, 0.0));
    }

    #[test]
    fn expectation_matches_hand_computation() {
        // <v|M|v> with M = [[1, i], [-i, 2]] and v = (1, 1)/sqrt(2).
        let m = ComplexMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)])
            .unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        let v = vec![c(s, 0.0), c(s, 0.0)];
        let e = m.expectation(&v).unwrap();
        assert_abs_diff_eq!(e.re, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-12);
    }
}
