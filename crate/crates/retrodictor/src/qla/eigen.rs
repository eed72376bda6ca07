//! Eigenvalues of Hermitian matrices via cyclic Jacobi sweeps.
//!
//! Only the spectrum is needed (for positive-semidefiniteness checks), and
//! only at tiny dimension, so the classic two-sided Jacobi iteration is
//! plenty. Not exposed outside the crate.

use num_complex::Complex64;

use super::ComplexMatrix;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix, ascending. The input is assumed
/// Hermitian within validation tolerance; the strictly-lower triangle is
/// ignored in favor of the conjugate of the upper one.
pub(crate) fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.dim();
    let mut a = m.clone();
    // Symmetrize so that rounding in the input cannot bias the sweeps.
    for i in 0..d {
        a.set(i, i, Complex64::new(a.at(i, i).re, 0.0));
        for j in (i + 1)..d {
            let avg = 0.5 * (a.at(i, j) + a.at(j, i).conj());
            a.set(i, j, avg);
            a.set(j, i, avg.conj());
        }
    }

    let scale = a.max_norm().max(1.0);
    let stop = 1e-14 * scale;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0_f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a.at(p, q).norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, p, q);
            }
        }
    }

    let mut evals: Vec<f64> = (0..d).map(|i| a.at(i, i).re).collect();
    evals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    evals
}

/// One Jacobi rotation zeroing the (p, q) entry: a phase transformation
/// makes the pivot real, then the standard symmetric Schur rotation is
/// applied. `a` is replaced by `U* a U` with `U` unitary.
fn rotate(a: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.at(p, q);
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;

    let app = a.at(p, p).re;
    let aqq = a.at(q, q).re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U differs from the identity only in the (p, q) block:
    //   U[p][p] = c*phase   U[p][q] = s*phase
    //   U[q][p] = -s        U[q][q] = c
    let upp = phase * c;
    let upq = phase * s;
    let uqp = Complex64::new(-s, 0.0);
    let uqq = Complex64::new(c, 0.0);

    let d = a.dim();
    // Columns: B = A U.
    for k in 0..d {
        let akp = a.at(k, p);
        let akq = a.at(k, q);
        a.set(k, p, akp * upp + akq * uqp);
        a.set(k, q, akp * upq + akq * uqq);
    }
    // Rows: A' = U* B.
    for k in 0..d {
        let apk = a.at(p, k);
        let aqk = a.at(q, k);
        a.set(p, k, upp.conj() * apk + uqp.conj() * aqk);
        a.set(q, k, upq.conj() * apk + uqq.conj() * aqk);
    }
    // The pivot is zero in exact arithmetic; make it exactly so.
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_matrix_spectrum_is_its_diagonal() {
        let m = ComplexMatrix::new(
            3,
            vec![
                c(3.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(2.0, 0.0),
            ],
        )
        .unwrap();
        let evals = hermitian_eigenvalues(&m);
        assert_eq!(evals.len(), 3);
        assert_abs_diff_eq!(evals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(evals[1], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(evals[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn real_symmetric_two_by_two() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let m = ComplexMatrix::new(2, vec![c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)])
            .unwrap();
        let evals = hermitian_eigenvalues(&m);
        assert_abs_diff_eq!(evals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(evals[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn complex_hermitian_pauli_y() {
        // [[0, -i], [i, 0]] has eigenvalues -1 and 1.
        let m = ComplexMatrix::new(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
            .unwrap();
        let evals = hermitian_eigenvalues(&m);
        assert_abs_diff_eq!(evals[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(evals[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn moments_match_trace_identities() {
        // For Hermitian A: sum(evals) = tr A and sum(evals^2) = tr A^2.
        let m = ComplexMatrix::new(
            3,
            vec![
                c(1.0, 0.0),
                c(0.5, 0.25),
                c(0.0, -1.0),
                c(0.5, -0.25),
                c(-2.0, 0.0),
                c(0.75, 0.5),
                c(0.0, 1.0),
                c(0.75, -0.5),
                c(0.5, 0.0),
            ],
        )
        .unwrap();
        let evals = hermitian_eigenvalues(&m);
        let sum: f64 = evals.iter().sum();
        let sum_sq: f64 = evals.iter().map(|x| x * x).sum();
        let tr = m.trace().re;
        let tr_sq = m.multiply(&m).unwrap().trace().re;
        assert_abs_diff_eq!(sum, tr, epsilon = 1e-10);
        assert_abs_diff_eq!(sum_sq, tr_sq, epsilon = 1e-10);
    }
}
