//! Density operators, projectors, and projective decompositions.

use num_complex::Complex64;

use super::{hermitian_eigenvalues, ComplexMatrix, Ket, QlaError};
use crate::tol;

/// A preparation state: Hermitian, positive semidefinite, unit trace.
/// Positivity is checked at construction through the Jacobi spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QlaError> {
        let herm = matrix.hermiticity_deviation();
        if herm > tol::STRUCTURAL {
            return Err(QlaError::NotHermitian { deviation: herm });
        }
        let trace = matrix.trace();
        let trace_dev = (trace - Complex64::new(1.0, 0.0)).norm();
        if trace_dev > tol::STRUCTURAL {
            return Err(QlaError::NonUnitTrace {
                deviation: trace_dev,
            });
        }
        let evals = hermitian_eigenvalues(&matrix);
        if let Some(&lowest) = evals.first() {
            if lowest < -tol::PSD_FLOOR {
                return Err(QlaError::NotPositiveSemidefinite { eigenvalue: lowest });
            }
        }
        Ok(Self { matrix })
    }

    /// Pure state `|v><v|`.
    pub fn from_ket(v: &Ket) -> Self {
        let matrix = ComplexMatrix::outer(v.amplitudes(), v.amplitudes()).expect("same length");
        Self::new(matrix).expect("outer product of a unit ket is a valid state")
    }

    /// The state `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self, QlaError> {
        if dim == 0 {
            return Err(QlaError::ZeroDimension);
        }
        let matrix = ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
        Self::new(matrix)
    }

    /// Convex mixture of weighted states. Weights must be a probability
    /// vector over the same dimension.
    pub fn mixture(parts: &[(f64, DensityOperator)]) -> Result<Self, QlaError> {
        let dim = parts
            .first()
            .map(|(_, rho)| rho.dim())
            .ok_or(QlaError::ZeroDimension)?;
        let mut acc = ComplexMatrix::zeros(dim);
        for (w, rho) in parts {
            acc = acc.add(&rho.matrix.scale(Complex64::new(*w, 0.0)))?;
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Born weight `<v|rho|v>`, real by Hermiticity.
    pub fn born_weight(&self, v: &Ket) -> Result<f64, QlaError> {
        Ok(self.matrix.expectation(v.amplitudes())?.re)
    }
}

/// An event: Hermitian idempotent operator with its (integer) rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QlaError> {
        let herm = matrix.hermiticity_deviation();
        if herm > tol::STRUCTURAL {
            return Err(QlaError::NotHermitian { deviation: herm });
        }
        let idem = matrix.idempotency_deviation();
        if idem > tol::STRUCTURAL {
            return Err(QlaError::NotIdempotent { deviation: idem });
        }
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > tol::ACCUMULATED || rank < 0.0 {
            return Err(QlaError::NonIntegerRank { trace });
        }
        Ok(Self {
            matrix,
            rank: rank as usize,
        })
    }

    /// Rank-1 event `|v><v|`.
    pub fn from_ket(v: &Ket) -> Self {
        let matrix = ComplexMatrix::outer(v.amplitudes(), v.amplitudes()).expect("same length");
        Self::new(matrix).expect("outer product of a unit ket is a valid projector")
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            rank: dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Sum with an orthogonal projector; the result is validated again.
    pub fn add(&self, other: &Projector) -> Result<Projector, QlaError> {
        Projector::new(self.matrix.add(&other.matrix)?)
    }

    /// Complement `I - P`.
    pub fn complement(&self) -> Projector {
        let matrix = ComplexMatrix::identity(self.dim())
            .sub(&self.matrix)
            .expect("same dimension");
        Projector::new(matrix).expect("complement of a projector is a projector")
    }

    /// The defining ket of a rank-1 projector, with canonical phase: the
    /// largest-modulus component is made real positive. Returns `None` for
    /// any other rank.
    pub fn to_ket(&self) -> Option<Ket> {
        if self.rank != 1 {
            return None;
        }
        let d = self.dim();
        // Diagonal entries of |v><v| are |v_i|^2; pick the largest column.
        let mut best = 0;
        for i in 1..d {
            if self.matrix.at(i, i).re > self.matrix.at(best, best).re {
                best = i;
            }
        }
        let col: Vec<Complex64> = (0..d).map(|i| self.matrix.at(i, best)).collect();
        let norm: f64 = col.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let amplitudes = col.iter().map(|a| a / norm).collect();
        Some(Ket::new(amplitudes).expect("normalized column of a rank-1 projector"))
    }
}

/// A complete set of mutually orthogonal, labeled events (a PVM). A fine
/// decomposition has every block of rank 1; a coarse one groups outcomes,
/// for example `{P, I - P}` for "p or not p".
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveDecomposition {
    dim: usize,
    blocks: Vec<(String, Projector)>,
}

impl ProjectiveDecomposition {
    pub fn new(blocks: Vec<(String, Projector)>) -> Result<Self, QlaError> {
        let dim = match blocks.first() {
            Some((_, p)) => p.dim(),
            None => return Err(QlaError::EmptyDecomposition),
        };
        for (label, p) in &blocks {
            if p.dim() != dim {
                return Err(QlaError::DimensionMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
            if blocks.iter().filter(|(l, _)| l == label).count() > 1 {
                return Err(QlaError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        for i in 0..blocks.len() {
            for j in (i + 1)..blocks.len() {
                let product = blocks[i].1.matrix().multiply(blocks[j].1.matrix())?;
                let deviation = product.max_norm();
                if deviation > tol::STRUCTURAL {
                    return Err(QlaError::BlocksNotOrthogonal {
                        first: blocks[i].0.clone(),
                        second: blocks[j].0.clone(),
                        deviation,
                    });
                }
            }
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for (_, p) in &blocks {
            sum = sum.add(p.matrix())?;
        }
        let deviation = sum.sub(&ComplexMatrix::identity(dim))?.max_norm();
        if deviation > tol::STRUCTURAL {
            return Err(QlaError::Incomplete { deviation });
        }
        Ok(Self { dim, blocks })
    }

    /// Fine decomposition from pairwise-orthogonal kets, one rank-1 block
    /// per ket, labeled "1", "2", ... in input order.
    pub fn from_kets(kets: &[Ket]) -> Result<Self, QlaError> {
        let labeled = kets
            .iter()
            .enumerate()
            .map(|(i, k)| ((i + 1).to_string(), k.clone()))
            .collect();
        Self::from_labeled_kets(labeled)
    }

    pub fn from_labeled_kets(kets: Vec<(String, Ket)>) -> Result<Self, QlaError> {
        let dim = match kets.first() {
            Some((_, k)) => k.dim(),
            None => return Err(QlaError::EmptyDecomposition),
        };
        if kets.len() != dim {
            return Err(QlaError::WrongKetCount {
                expected: dim,
                got: kets.len(),
            });
        }
        for i in 0..kets.len() {
            for j in (i + 1)..kets.len() {
                let overlap = kets[i].1.inner(&kets[j].1)?.norm();
                if overlap > tol::STRUCTURAL {
                    return Err(QlaError::KetsNotOrthogonal {
                        first: i,
                        second: j,
                        overlap,
                    });
                }
            }
        }
        let blocks = kets
            .into_iter()
            .map(|(label, k)| (label, Projector::from_ket(&k)))
            .collect();
        Self::new(blocks)
    }

    /// The single-block decomposition `{I}`: observing it reveals nothing.
    pub fn trivial(dim: usize, label: impl Into<String>) -> Result<Self, QlaError> {
        Self::new(vec![(label.into(), Projector::identity(dim))])
    }

    /// The two-block decomposition `{Q, I - Q}` completing a single ket to
    /// a full observation; the complement is labeled with a negation mark.
    pub fn completion(q: &Ket, label: &str) -> Result<Self, QlaError> {
        let block = Projector::from_ket(q);
        let rest = block.complement();
        if rest.rank() == 0 {
            // Dimension 1: the complement block is empty and dropped.
            return Self::new(vec![(label.to_string(), block)]);
        }
        Self::new(vec![
            (label.to_string(), block),
            (format!("¬{label}"), rest),
        ])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[(String, Projector)] {
        &self.blocks
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.blocks.iter().map(|(l, _)| l.as_str())
    }

    pub fn block(&self, label: &str) -> Option<&Projector> {
        self.blocks.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }

    /// True when every block has rank 1.
    pub fn is_fine(&self) -> bool {
        self.blocks.iter().all(|(_, p)| p.rank() == 1)
    }

    /// Merges blocks according to a partition of the labels. Each group
    /// becomes one block whose projector is the sum of the grouped ones and
    /// whose label joins the member labels with a disjunction mark.
    pub fn coarsen(&self, groups: &[Vec<String>]) -> Result<Self, QlaError> {
        let mut seen: Vec<&str> = Vec::new();
        for group in groups {
            for label in group {
                if self.block(label).is_none() {
                    return Err(QlaError::UnknownLabel {
                        label: label.clone(),
                    });
                }
                if seen.contains(&label.as_str()) {
                    return Err(QlaError::GroupOverlap {
                        label: label.clone(),
                    });
                }
                seen.push(label);
            }
        }
        for (label, _) in &self.blocks {
            if !seen.contains(&label.as_str()) {
                return Err(QlaError::GroupMissing {
                    label: label.clone(),
                });
            }
        }
        let mut blocks = Vec::with_capacity(groups.len());
        for group in groups {
            let mut acc = Projector::zero(self.dim);
            for label in group {
                acc = acc.add(self.block(label).expect("validated above"))?;
            }
            blocks.push((group.join("∨"), acc));
        }
        Self::new(blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn y_basis() -> Vec<Ket> {
        let s = 1.0 / 2.0_f64.sqrt();
        vec![
            Ket::new(vec![c(s, 0.0), c(0.0, s)]).unwrap(),
            Ket::new(vec![c(s, 0.0), c(0.0, -s)]).unwrap(),
        ]
    }

    #[test]
    fn projector_from_basis_ket() {
        let v = Ket::basis_vector(2, 0).unwrap();
        let p = Projector::from_ket(&v);
        assert_eq!(p.rank(), 1);
        assert_abs_diff_eq!(p.matrix().at(0, 0).re, 1.0);
        assert_abs_diff_eq!(p.matrix().at(1, 1).re, 0.0);
    }

    #[test]
    fn projector_from_superposition_ket() {
        let v = Ket::from_reals(&[1.0, 1.0]).unwrap();
        let p = Projector::from_ket(&v);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(p.matrix().at(i, j).re, 0.5, epsilon = 1e-15);
                assert_abs_diff_eq!(p.matrix().at(i, j).im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn projector_from_complex_ket_matches_hand_outer_product() {
        // (1, i)/sqrt(2) gives [[1/2, -i/2], [i/2, 1/2]].
        let s = 1.0 / 2.0_f64.sqrt();
        let v = Ket::new(vec![c(s, 0.0), c(0.0, s)]).unwrap();
        let p = Projector::from_ket(&v);
        assert_abs_diff_eq!(p.matrix().at(0, 1).im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.matrix().at(1, 0).im, 0.5, epsilon = 1e-15);
        assert!(p.matrix().idempotency_deviation() < 1e-14);
    }

    #[test]
    fn projector_multiplication_is_idempotent() {
        let v = Ket::from_reals(&[3.0, 4.0]).unwrap();
        let p = Projector::from_ket(&v);
        let squared = p.matrix().multiply(p.matrix()).unwrap();
        assert!(squared.sub(p.matrix()).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn rank_one_extraction_round_trips() {
        let v = Ket::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let p = Projector::from_ket(&v);
        let w = p.to_ket().unwrap();
        let rebuilt = Projector::from_ket(&w);
        assert!(rebuilt.matrix().sub(p.matrix()).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn standard_basis_is_a_valid_pvm() {
        let kets: Vec<Ket> = (0..3).map(|i| Ket::basis_vector(3, i).unwrap()).collect();
        let pvm = ProjectiveDecomposition::from_kets(&kets).unwrap();
        assert_eq!(pvm.len(), 3);
        assert!(pvm.is_fine());
    }

    #[test]
    fn y_basis_is_a_valid_pvm() {
        let pvm = ProjectiveDecomposition::from_kets(&y_basis()).unwrap();
        assert!(pvm.is_fine());
    }

    #[test]
    fn duplicate_kets_fail_orthogonality_naming_the_pair() {
        let v = Ket::basis_vector(2, 0).unwrap();
        let err = ProjectiveDecomposition::from_kets(&[v.clone(), v]).unwrap_err();
        assert!(matches!(
            err,
            QlaError::KetsNotOrthogonal {
                first: 0,
                second: 1,
                ..
            }
        ));
    }

    #[test]
    fn wrong_ket_count_is_a_completeness_error() {
        let v = Ket::basis_vector(3, 0).unwrap();
        let err = ProjectiveDecomposition::from_kets(&[v]).unwrap_err();
        assert_eq!(
            err,
            QlaError::WrongKetCount {
                expected: 3,
                got: 1
            }
        );
    }

    #[test]
    fn coarsen_merges_ranks() {
        let kets: Vec<Ket> = (0..3).map(|i| Ket::basis_vector(3, i).unwrap()).collect();
        let pvm = ProjectiveDecomposition::from_kets(&kets).unwrap();
        let coarse = pvm
            .coarsen(&[vec!["1".into()], vec!["2".into(), "3".into()]])
            .unwrap();
        assert_eq!(coarse.len(), 2);
        assert_eq!(coarse.block("1").unwrap().rank(), 1);
        assert_eq!(coarse.block("2∨3").unwrap().rank(), 2);
    }

    #[test]
    fn coarsen_with_singletons_is_identity() {
        let pvm = ProjectiveDecomposition::from_kets(&y_basis()).unwrap();
        let same = pvm.coarsen(&[vec!["1".into()], vec!["2".into()]]).unwrap();
        assert_eq!(same, pvm);
    }

    #[test]
    fn coarsen_everything_yields_the_identity_block() {
        let pvm = ProjectiveDecomposition::from_kets(&y_basis()).unwrap();
        let all = pvm.coarsen(&[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all.block("1∨2").unwrap().rank(), 2);
    }

    #[test]
    fn coarsen_rejects_non_partitions() {
        let pvm = ProjectiveDecomposition::from_kets(&y_basis()).unwrap();
        let overlap = pvm.coarsen(&[vec!["1".into()], vec!["1".into(), "2".into()]]);
        assert!(matches!(overlap, Err(QlaError::GroupOverlap { .. })));
        let missing = pvm.coarsen(&[vec!["1".into()]]);
        assert!(matches!(missing, Err(QlaError::GroupMissing { .. })));
    }

    #[test]
    fn density_operator_rejects_negative_eigenvalues() {
        // diag(1.5, -0.5) has unit trace but is not positive.
        let m = ComplexMatrix::new(2, vec![c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)])
            .unwrap();
        let err = DensityOperator::new(m).unwrap_err();
        assert!(matches!(err, QlaError::NotPositiveSemidefinite { .. }));
    }

    #[test]
    fn density_operator_rejects_non_unit_trace() {
        let m = ComplexMatrix::identity(2);
        let err = DensityOperator::new(m).unwrap_err();
        assert!(matches!(err, QlaError::NonUnitTrace { .. }));
    }

    #[test]
    fn completion_covers_the_space() {
        let q = Ket::from_reals(&[1.0, 1.0, -1.0]).unwrap();
        let pvm = ProjectiveDecomposition::completion(&q, "q").unwrap();
        assert_eq!(pvm.len(), 2);
        assert_eq!(pvm.block("q").unwrap().rank(), 1);
        assert_eq!(pvm.block("¬q").unwrap().rank(), 2);
    }
}
