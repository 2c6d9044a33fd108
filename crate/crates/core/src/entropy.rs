//! Entropies in bits.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state::DensityOperator;
use crate::C64;

/// Eigenvalues below this are treated as an upstream bug rather than noise.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(matrix: &DMatrix<C64>) -> Vec<f64> {
    if matrix.nrows() == 0 {
        return Vec::new();
    }
    let mut eigs: Vec<f64> = matrix.clone().symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.total_cmp(a));
    eigs
}

/// Clip small negative eigenvalues to zero and rescale to unit sum.
pub(crate) fn clip_spectrum(mut eigs: Vec<f64>) -> Result<Vec<f64>> {
    for e in eigs.iter_mut() {
        if *e < EIGENVALUE_FLOOR {
            return Err(Error::NegativeEigenvalue(*e));
        }
        if *e < 0.0 {
            *e = 0.0;
        }
    }
    let total: f64 = eigs.iter().sum();
    if total > 0.0 {
        eigs.iter_mut().for_each(|e| *e /= total);
    }
    Ok(eigs)
}

fn plogp_sum(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    h.max(0.0)
}

/// Entropy of a spectrum, after clipping.
pub fn spectrum_entropy(eigs: &[f64]) -> Result<f64> {
    let p = clip_spectrum(eigs.to_vec())?;
    Ok(plogp_sum(&p))
}

/// `-Tr ρ lg ρ`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    spectrum_entropy(&rho.eigenvalues())
}

/// Shannon entropy of a probability vector. Entries down to `-1e-12` are
/// clipped; the sum must be within `1e-9` of one and is renormalized.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::Empty("probability vector"));
    }
    let mut q = Vec::with_capacity(p.len());
    for &x in p {
        if !x.is_finite() {
            return Err(Error::InvalidProbabilities(format!("non-finite entry {x}")));
        }
        if x < -1e-12 {
            return Err(Error::InvalidProbabilities(format!("negative entry {x}")));
        }
        q.push(x.max(0.0));
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("entries sum to {total}")));
    }
    q.iter_mut().for_each(|x| *x /= total);
    Ok(plogp_sum(&q))
}

/// Binary entropy `h(p)`; no validation.
pub(crate) fn binary_entropy(p: f64) -> f64 {
    plogp_sum(&[p, 1.0 - p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Independent evaluation of -Σ p lg p for (2/3, 1/3):
    // lg 3 - 2/3 = 1.584962500721156 - 0.666666666666667.
    const H_TWO_THIRDS: f64 = 0.918_295_834_054_489_6;

    #[test]
    fn shannon_known_values() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(shannon_entropy(&[0.5, 0.5]).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(shannon_entropy(&[2.0 / 3.0, 1.0 / 3.0]).unwrap(), H_TWO_THIRDS, epsilon = 1e-14);
        assert_abs_diff_eq!(3f64.log2() - 2.0 / 3.0, H_TWO_THIRDS, epsilon = 1e-14);
    }

    #[test]
    fn shannon_rejects_bad_vectors() {
        assert!(shannon_entropy(&[1.1, -0.1]).is_err());
        assert!(shannon_entropy(&[0.5, 0.6]).is_err());
        assert!(shannon_entropy(&[]).is_err());
        // tiny negatives are noise
        assert_abs_diff_eq!(shannon_entropy(&[1.0 + 1e-13, -1e-13]).unwrap(), 0.0, epsilon = 1e-11);
    }

    #[test]
    fn von_neumann_known_values() {
        let half = DensityOperator::from_matrix(
            vec![2],
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0)])),
        )
        .unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&half).unwrap(), 1.0, epsilon = 1e-14);

        let third = DensityOperator::from_matrix(
            vec![2],
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(2.0 / 3.0, 0.0),
                C64::new(1.0 / 3.0, 0.0),
            ])),
        )
        .unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&third).unwrap(), H_TWO_THIRDS, epsilon = 1e-13);

        // |+><+| is pure even though it is not diagonal
        let plus = DensityOperator::from_matrix(vec![2], DMatrix::from_element(2, 2, C64::new(0.5, 0.0))).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&plus).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn clipping_threshold() {
        assert!(spectrum_entropy(&[1.0 + 5e-11, -5e-11]).is_ok());
        assert_eq!(spectrum_entropy(&[1.0 + 1e-9, -1e-9]), Err(Error::NegativeEigenvalue(-1e-9)));
    }
}
