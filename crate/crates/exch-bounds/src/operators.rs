//! The matrix machinery behind the exchangeable bounds: the suffix-mean
//! operator `B_n`, the suffix-contrast operator `A_n`, the centering
//! projection, the pseudoinverse of the Gram matrix `A_n' A_n`, and the two
//! permutation-average identities
//!
//! ```text
//! (1/n!) sum_P P' (A_n' A_n)^+ P = ((n - H_n)/(n - 1)) Pperp
//! (1/n!) sum_P P' B_n P         = I - (1/(1 + eps_n)) Pperp
//! ```
//!
//! Operators are applied through O(n) suffix scans; dense matrices are
//! materialized on demand up to [`DENSE_CAP`].

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::{epsilon, harmonic};

/// Largest `n` for which dense `n x n` matrices are materialized.
pub const DENSE_CAP: usize = 2048;

/// Largest `n` accepted by the exhaustive permutation-average routines
/// (`8! = 40320` matrices).
pub const ENUMERATION_CAP: usize = 8;

/// Relative eigenvalue cutoff used by [`pseudo_inverse_gram`].
pub const PINV_CUTOFF: f64 = 1e-10;

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::Domain(format!(
            "dense materialization capped at n = {DENSE_CAP}, got {n}"
        )));
    }
    Ok(())
}

/// `B_n`: row `i` (1-based) averages the suffix `x_i, ..., x_n`, so
/// `(B_n x)_i` is the running suffix mean.
#[derive(Debug, Clone)]
pub struct SuffixMeanOperator {
    n: usize,
}

impl SuffixMeanOperator {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("suffix-mean operator needs n >= 1".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Applies `B_n` in O(n) via a reverse running sum.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        let mut out = vec![0.0; self.n];
        let mut sum = 0.0;
        for i in (0..self.n).rev() {
            sum += x[i];
            out[i] = sum / (self.n - i) as f64;
        }
        out
    }

    /// Dense `B_n`; rows are `(0, ..., 0, 1/(n+1-i), ..., 1/(n+1-i))`.
    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        check_dense(self.n)?;
        let n = self.n;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            if j >= i {
                1.0 / (n - i) as f64
            } else {
                0.0
            }
        }))
    }
}

/// `A_n`: row `i` (1-based, `i <= n-1`) is `(0, ..., 0, 1, -1/(n-i), ..., -1/(n-i))`
/// and the last row is zero, so `(A_n w)_i = w_i - mean(w_{i+1}, ..., w_n)`.
#[derive(Debug, Clone)]
pub struct ContrastOperator {
    n: usize,
}

impl ContrastOperator {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("contrast operator needs n >= 2".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Applies `A_n` in O(n) via a reverse running sum.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.n, "dimension mismatch");
        let n = self.n;
        let mut out = vec![0.0; n];
        let mut suffix_sum = 0.0;
        for i in (0..n - 1).rev() {
            suffix_sum += w[i + 1];
            out[i] = w[i] - suffix_sum / (n - 1 - i) as f64;
        }
        out
    }

    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        check_dense(self.n)?;
        let n = self.n;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            if i == n - 1 {
                0.0
            } else if j == i {
                1.0
            } else if j > i {
                -1.0 / (n - 1 - i) as f64
            } else {
                0.0
            }
        }))
    }

    /// Gram matrix `A_n' A_n`.
    pub fn gram(&self) -> Result<DMatrix<f64>> {
        let a = self.matrix()?;
        Ok(a.transpose() * a)
    }
}

/// Projection onto the subspace orthogonal to the all-ones vector:
/// `x -> x - mean(x) 1`.
#[derive(Debug, Clone)]
pub struct CenteringProjection {
    n: usize,
}

impl CenteringProjection {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("centering projection needs n >= 1".into()));
        }
        Ok(Self { n })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        let mean = x.iter().sum::<f64>() / self.n as f64;
        x.iter().map(|v| v - mean).collect()
    }

    /// Dense `I - (1/n) J`.
    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        check_dense(self.n)?;
        let n = self.n;
        let inv = 1.0 / n as f64;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0 - inv
            } else {
                -inv
            }
        }))
    }
}

/// Moore-Penrose pseudoinverse of `A_n' A_n` via symmetric
/// eigendecomposition, zeroing eigenvalues below `PINV_CUTOFF` times the
/// largest one.
///
/// The Gram matrix has exactly one zero eigenvalue (eigenvector the all-ones
/// vector); the reconstruction is rejected if the numerical rank is not
/// `n - 1`.
pub fn pseudo_inverse_gram(n: usize) -> Result<DMatrix<f64>> {
    let gram = ContrastOperator::new(n)?.gram()?;
    let eig = gram.symmetric_eigen();
    let max_abs = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let cutoff = PINV_CUTOFF * max_abs;
    let rank = eig.eigenvalues.iter().filter(|&&v| v.abs() > cutoff).count();
    if rank != n - 1 {
        return Err(Error::Domain(format!(
            "gram matrix of order {n} has numerical rank {rank}, expected {}",
            n - 1
        )));
    }
    let inv_vals = DVector::from_iterator(
        n,
        eig.eigenvalues
            .iter()
            .map(|&v| if v.abs() > cutoff { 1.0 / v } else { 0.0 }),
    );
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&inv_vals) * v.transpose())
}

/// Closed form of `(1/n!) sum_P P' (A_n' A_n)^+ P`, namely
/// `((n - H_n)/(n - 1)) Pperp = (1/(1 + eps_n)) Pperp`.
pub fn perm_average_gram_pinv(n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::Domain("permutation average needs n >= 2".into()));
    }
    let scale = (n as f64 - harmonic(n as u64)?) / (n as f64 - 1.0);
    Ok(CenteringProjection::new(n)?.matrix()? * scale)
}

/// Closed form of `(1/n!) sum_P P' B_n P`, namely
/// `(1/(1 + eps_n)) P_1 + (eps_n/(1 + eps_n)) I` with `P_1 = (1/n) J`.
pub fn perm_average_suffix_mean(n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::Domain("permutation average needs n >= 2".into()));
    }
    let eps = epsilon(n as u64)?;
    let ones_coeff = 1.0 / (1.0 + eps) / n as f64;
    let diag_coeff = eps / (1.0 + eps);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        ones_coeff + if i == j { diag_coeff } else { 0.0 }
    }))
}

fn check_enumeration(n: usize) -> Result<()> {
    if !(2..=ENUMERATION_CAP).contains(&n) {
        return Err(Error::Domain(format!(
            "exhaustive permutation average supports 2 <= n <= {ENUMERATION_CAP}, got {n}"
        )));
    }
    Ok(())
}

/// Averages `P' M P` over all `n!` permutation matrices by enumeration.
fn perm_average_enumerated(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut acc = DMatrix::zeros(n, n);
    let mut count = 0u64;
    for perm in (0..n).permutations(n) {
        for i in 0..n {
            for j in 0..n {
                acc[(i, j)] += m[(perm[i], perm[j])];
            }
        }
        count += 1;
    }
    acc / count as f64
}

/// Left-hand side of the Gram-pseudoinverse identity by full enumeration
/// (`n <= 8`); used to verify [`perm_average_gram_pinv`].
pub fn perm_average_gram_pinv_enumerated(n: usize) -> Result<DMatrix<f64>> {
    check_enumeration(n)?;
    Ok(perm_average_enumerated(&pseudo_inverse_gram(n)?))
}

/// Left-hand side of the suffix-mean identity by full enumeration
/// (`n <= 8`); used to verify [`perm_average_suffix_mean`].
pub fn perm_average_suffix_mean_enumerated(n: usize) -> Result<DMatrix<f64>> {
    check_enumeration(n)?;
    Ok(perm_average_enumerated(&SuffixMeanOperator::new(n)?.matrix()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn suffix_mean_rows() {
        let b = SuffixMeanOperator::new(3).unwrap().matrix().unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[
                1.0 / 3.0,
                1.0 / 3.0,
                1.0 / 3.0,
                0.0,
                0.5,
                0.5,
                0.0,
                0.0,
                1.0,
            ],
        );
        assert_abs_diff_eq!(max_abs_diff(&b, &expected), 0.0, epsilon = 1e-15);

        let b1 = SuffixMeanOperator::new(1).unwrap().matrix().unwrap();
        assert_eq!(b1, DMatrix::identity(1, 1));
        assert!(SuffixMeanOperator::new(0).is_err());
    }

    #[test]
    fn suffix_mean_apply_matches_direct_averaging() {
        let op = SuffixMeanOperator::new(3).unwrap();
        assert_eq!(op.apply(&[1.0, 0.0, -1.0]), vec![0.0, -0.5, -1.0]);

        let op = SuffixMeanOperator::new(6).unwrap();
        let x = [0.3, -0.9, 0.1, 0.7, -0.2, 0.5];
        let out = op.apply(&x);
        for i in 0..6 {
            let direct = x[i..].iter().sum::<f64>() / (6 - i) as f64;
            assert_abs_diff_eq!(out[i], direct, epsilon = 1e-14);
        }
        // Row sums 1: applying to the ones vector returns ones.
        let ones = op.apply(&[1.0; 6]);
        for v in ones {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn contrast_rows_and_apply() {
        let a = ContrastOperator::new(3).unwrap().matrix().unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, -0.5, -0.5, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(max_abs_diff(&a, &expected), 0.0, epsilon = 1e-15);

        // Row sums zero: A_5 applied to the ones vector vanishes.
        let op = ContrastOperator::new(5).unwrap();
        for v in op.apply(&[1.0; 5]) {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        }

        let op = ContrastOperator::new(3).unwrap();
        assert_eq!(op.apply(&[2.0, 1.0, 0.0]), vec![1.5, 1.0, 0.0]);
        assert!(ContrastOperator::new(1).is_err());
    }

    #[test]
    fn contrast_apply_matches_matrix() {
        let op = ContrastOperator::new(7).unwrap();
        let m = op.matrix().unwrap();
        let w = [0.2, -1.3, 0.8, 0.0, 2.0, -0.4, 1.1];
        let via_matrix = &m * DVector::from_row_slice(&w);
        let via_scan = op.apply(&w);
        for i in 0..7 {
            assert_abs_diff_eq!(via_scan[i], via_matrix[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn centering_projection_idempotent_and_annihilates_ones() {
        for n in [1usize, 2, 5, 17] {
            let p = CenteringProjection::new(n).unwrap();
            let m = p.matrix().unwrap();
            assert!(max_abs_diff(&(&m * &m), &m) <= 1e-12);
            let ones = DVector::from_element(n, 1.0);
            assert!((&m * ones).amax() <= 1e-12);
        }
    }

    #[test]
    fn contrast_factors_centering_projection() {
        for n in 2..=20usize {
            let a = ContrastOperator::new(n).unwrap().matrix().unwrap();
            let b = SuffixMeanOperator::new(n).unwrap().matrix().unwrap();
            let p = CenteringProjection::new(n).unwrap().matrix().unwrap();
            let lhs = a.transpose() * (DMatrix::identity(n, n) - b);
            assert!(
                max_abs_diff(&lhs, &p) <= 1e-12,
                "identity fails at n = {n}"
            );
        }
    }

    #[test]
    fn gram_pseudoinverse_axioms() {
        // Annihilates the ones vector.
        let pinv = pseudo_inverse_gram(4).unwrap();
        assert!((pinv * DVector::from_element(4, 1.0)).amax() <= 1e-12);

        // G G^+ G = G.
        let gram = ContrastOperator::new(5).unwrap().gram().unwrap();
        let pinv = pseudo_inverse_gram(5).unwrap();
        assert!(max_abs_diff(&(&gram * &pinv * &gram), &gram) <= 1e-10);

        // n = 2: rank-1 pseudoinverse by hand.
        let pinv = pseudo_inverse_gram(2).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25]);
        assert!(max_abs_diff(&pinv, &expected) <= 1e-12);
    }

    #[test]
    fn gram_pinv_average_closed_form() {
        // n = 3 scalar: (3 - 11/6)/2 = 7/12 = 1/(1 + eps_3).
        let avg = perm_average_gram_pinv(3).unwrap();
        let p = CenteringProjection::new(3).unwrap().matrix().unwrap();
        let scale = avg[(0, 0)] / p[(0, 0)];
        assert_abs_diff_eq!(scale, 7.0 / 12.0, epsilon = 1e-14);
        assert_abs_diff_eq!(scale, 1.0 / (1.0 + epsilon(3).unwrap()), epsilon = 1e-14);

        for n in 2..=6 {
            let closed = perm_average_gram_pinv(n).unwrap();
            let enumerated = perm_average_gram_pinv_enumerated(n).unwrap();
            assert!(
                max_abs_diff(&closed, &enumerated) <= 1e-12,
                "gram-pinv average mismatch at n = {n}"
            );
            assert!((closed * DVector::from_element(n, 1.0)).amax() <= 1e-12);
        }
        assert!(perm_average_gram_pinv_enumerated(9).is_err());
    }

    #[test]
    fn suffix_mean_average_closed_form() {
        // n = 3 diagonal: (1/3 + 1/2 + 1)/3 = 11/18.
        let avg = perm_average_suffix_mean(3).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(avg[(i, i)], 11.0 / 18.0, epsilon = 1e-14);
        }

        // n = 2: (1/2) P_1 + (1/2) I since eps_2 = 1.
        let avg = perm_average_suffix_mean(2).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.75, 0.25, 0.25, 0.75]);
        assert!(max_abs_diff(&avg, &expected) <= 1e-14);

        for n in 2..=6 {
            let closed = perm_average_suffix_mean(n).unwrap();
            let enumerated = perm_average_suffix_mean_enumerated(n).unwrap();
            assert!(
                max_abs_diff(&closed, &enumerated) <= 1e-12,
                "suffix-mean average mismatch at n = {n}"
            );
            // Row sums stay 1 under permutation averaging.
            for i in 0..n {
                let row_sum: f64 = (0..n).map(|j| closed[(i, j)]).sum();
                assert_abs_diff_eq!(row_sum, 1.0, epsilon = 1e-12);
            }
        }
        assert!(perm_average_suffix_mean_enumerated(9).is_err());
    }
}
