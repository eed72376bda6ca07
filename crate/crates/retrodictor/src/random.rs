//! Seeded random instances for the property suites and the `oracle-check`
//! command. Everything is driven by a caller-supplied RNG so that runs are
//! reproducible from a seed.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::qla::{DensityOperator, Ket, ProjectiveDecomposition};

fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Haar-ish random unit ket: complex Gaussian components, normalized.
pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Ket {
    loop {
        let v = gaussian_vector(rng, dim);
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return Ket::new(v.into_iter().map(|a| a / norm).collect())
                .expect("normalized Gaussian vector");
        }
    }
}

/// Random fine decomposition: modified Gram-Schmidt over a random complex
/// matrix, with a second orthogonalization pass to push the overlaps down
/// to machine precision. Labels are "1" through "dim".
pub fn random_fine_pvm<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ProjectiveDecomposition {
    'restart: loop {
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut v = gaussian_vector(rng, dim);
            for _pass in 0..2 {
                for b in &basis {
                    let overlap: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= overlap * bi;
                    }
                }
            }
            let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                // Degenerate draw; start the whole basis over.
                continue 'restart;
            }
            basis.push(v.into_iter().map(|a| a / norm).collect());
        }
        let kets: Vec<Ket> = basis
            .into_iter()
            .map(|v| Ket::new(v).expect("orthonormalized vector"))
            .collect();
        return ProjectiveDecomposition::from_kets(&kets)
            .expect("Gram-Schmidt output is orthonormal");
    }
}

pub fn random_pure_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    DensityOperator::from_ket(&random_ket(rng, dim))
}

/// Random mixed state: a convex mixture of `dim` random pure states with
/// uniform-simplex weights.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let mut weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        weights = vec![1.0 / dim as f64; dim];
    } else {
        for w in &mut weights {
            *w /= total;
        }
    }
    let parts: Vec<(f64, DensityOperator)> = weights
        .into_iter()
        .map(|w| (w, random_pure_density(rng, dim)))
        .collect();
    DensityOperator::mixture(&parts).expect("convex mixture of valid states")
}

/// Random partition of the labels into at least `min_groups` groups, in
/// first-appearance order. With `min_groups` = 1 the partition may be the
/// trivial single group.
pub fn random_partition<R: Rng + ?Sized>(
    rng: &mut R,
    labels: &[String],
    min_groups: usize,
) -> Vec<Vec<String>> {
    let n = labels.len();
    let min_groups = min_groups.clamp(1, n);
    loop {
        let group_count = rng.gen_range(min_groups..=n);
        let mut groups: Vec<Vec<String>> = vec![Vec::new(); group_count];
        for label in labels {
            let g = rng.gen_range(0..group_count);
            groups[g].push(label.clone());
        }
        groups.retain(|g| !g.is_empty());
        if groups.len() >= min_groups {
            return groups;
        }
    }
}
