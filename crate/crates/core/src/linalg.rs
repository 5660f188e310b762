//! Small dense linear algebra kit.
//!
//! The matrices in this pipeline are tiny (regression designs of at most a
//! handful of columns, damped normal matrices of a few hundred rows), so a
//! compact row-major implementation beats pulling in a full linear-algebra
//! stack. Least squares goes through Householder QR; the damped Gauss-Newton
//! systems go through Cholesky.

use crate::scalar::{c, Real};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<F> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<F>,
}

impl<F: Real> Mat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    /// Builds a matrix from row slices; all rows must share one length.
    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let mut acc = F::zero();
                for (a, b) in row.iter().zip(v) {
                    acc = acc + *a * *b;
                }
                acc
            })
            .collect()
    }
}

/// Why a factorization could not be completed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("rank-deficient system (relative pivot below {0})")]
    RankDeficient(&'static str),
    #[error("matrix not positive definite")]
    NotPositiveDefinite,
}

/// Least-squares solution of `X b = y` with QR diagnostics attached.
#[derive(Debug, Clone)]
pub struct LstsqFit<F> {
    /// Solution vector, length = `X.cols`.
    pub beta: Vec<F>,
    /// Diagonal of `(X'X)^-1`, used for coefficient standard errors.
    pub xtx_inv_diag: Vec<F>,
}

/// Relative tolerance on the QR diagonal used to declare rank deficiency.
pub const RANK_TOL: f64 = 1e-10;

/// Solves the overdetermined system `X b = y` by Householder QR.
///
/// Returns `RankDeficient` when the smallest `|R_kk|` falls below
/// [`RANK_TOL`] times the largest, the same relative cutoff the spec of the
/// regression module applies to singular values (the R diagonal is a faithful
/// proxy at these sizes).
pub fn lstsq_qr<F: Real>(x: &Mat<F>, y: &[F]) -> Result<LstsqFit<F>, LinalgError> {
    let n = x.rows;
    let p = x.cols;
    assert_eq!(y.len(), n, "rhs length mismatch");
    assert!(n >= p, "underdetermined system");

    // Work on copies; reflectors are applied to qty in lockstep.
    let mut a = x.clone();
    let mut qty = y.to_vec();

    for k in 0..p {
        // Householder vector for column k, rows k..n.
        let mut norm = F::zero();
        for i in k..n {
            norm = norm + a.get(i, k) * a.get(i, k);
        }
        let norm = norm.sqrt();
        if norm == F::zero() {
            return Err(LinalgError::RankDeficient("zero column"));
        }
        let alpha = if a.get(k, k) >= F::zero() { -norm } else { norm };
        let mut v = vec![F::zero(); n - k];
        v[0] = a.get(k, k) - alpha;
        for i in k + 1..n {
            v[i - k] = a.get(i, k);
        }
        let mut vtv = F::zero();
        for vi in &v {
            vtv = vtv + *vi * *vi;
        }
        if vtv > F::zero() {
            // Apply H = I - 2 v v'/v'v to remaining columns and to qty.
            for j in k..p {
                let mut dot = F::zero();
                for i in k..n {
                    dot = dot + v[i - k] * a.get(i, j);
                }
                let s = c::<F>(2.0) * dot / vtv;
                for i in k..n {
                    let val = a.get(i, j) - s * v[i - k];
                    a.set(i, j, val);
                }
            }
            let mut dot = F::zero();
            for i in k..n {
                dot = dot + v[i - k] * qty[i];
            }
            let s = c::<F>(2.0) * dot / vtv;
            for i in k..n {
                qty[i] = qty[i] - s * v[i - k];
            }
        }
        a.set(k, k, alpha);
    }

    // Rank check on the R diagonal.
    let mut dmax = F::zero();
    let mut dmin = F::infinity();
    for k in 0..p {
        let d = a.get(k, k).abs();
        if d > dmax {
            dmax = d;
        }
        if d < dmin {
            dmin = d;
        }
    }
    if dmin <= c::<F>(RANK_TOL) * dmax {
        return Err(LinalgError::RankDeficient("qr diagonal"));
    }

    // Back-substitution: R beta = (Q'y)[0..p].
    let mut beta = vec![F::zero(); p];
    for k in (0..p).rev() {
        let mut acc = qty[k];
        for j in k + 1..p {
            acc = acc - a.get(k, j) * beta[j];
        }
        beta[k] = acc / a.get(k, k);
    }

    // R^-1, then diag((X'X)^-1) = rows of R^-1 dotted with themselves.
    let mut rinv = Mat::zeros(p, p);
    for j in (0..p).rev() {
        rinv.set(j, j, F::one() / a.get(j, j));
        for i in (0..j).rev() {
            let mut acc = F::zero();
            for k in i + 1..=j {
                acc = acc - a.get(i, k) * rinv.get(k, j);
            }
            rinv.set(i, j, acc / a.get(i, i));
        }
    }
    let xtx_inv_diag = (0..p)
        .map(|i| {
            let mut acc = F::zero();
            for j in i..p {
                acc = acc + rinv.get(i, j) * rinv.get(i, j);
            }
            acc
        })
        .collect();

    Ok(LstsqFit { beta, xtx_inv_diag })
}

/// Solves the symmetric positive-definite system `A x = b` by Cholesky,
/// consuming `a` as workspace. `a` must be square and symmetric.
pub fn cholesky_solve<F: Real>(mut a: Mat<F>, b: &[F]) -> Result<Vec<F>, LinalgError> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    assert_eq!(b.len(), n);

    // In-place lower Cholesky factor.
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d = d - a.get(j, k) * a.get(j, k);
        }
        if d <= F::zero() || !d.is_finite() {
            return Err(LinalgError::NotPositiveDefinite);
        }
        let d = d.sqrt();
        a.set(j, j, d);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s = s - a.get(i, k) * a.get(j, k);
            }
            a.set(i, j, s / d);
        }
    }

    // Forward then backward substitution.
    let mut x = b.to_vec();
    for i in 0..n {
        let mut acc = x[i];
        for k in 0..i {
            acc = acc - a.get(i, k) * x[k];
        }
        x[i] = acc / a.get(i, i);
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for k in i + 1..n {
            acc = acc - a.get(k, i) * x[k];
        }
        x[i] = acc / a.get(i, i);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_solves_exact_line() {
        // y = 1 + 2x through three points.
        let x: Mat<f64> = Mat::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]);
        let y = [1.0, 3.0, 5.0];
        let fit = lstsq_qr(&x, &y).unwrap();
        assert!((fit.beta[0] - 1.0).abs() < 1e-12);
        assert!((fit.beta[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn qr_detects_duplicate_column() {
        let x = Mat::from_rows(&[vec![1.0, 2.0, 4.0], vec![1.0, 3.0, 6.0], vec![1.0, 5.0, 10.0]]);
        let y = [1.0, 2.0, 3.0];
        assert!(matches!(lstsq_qr(&x, &y), Err(LinalgError::RankDeficient(_))));
    }

    #[test]
    fn xtx_inv_diag_matches_direct_inverse() {
        // 3x2 design; compare against hand-inverted X'X.
        let x: Mat<f64> = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 4.0]]);
        let y = [0.0, 0.0, 0.0];
        let fit = lstsq_qr(&x, &y).unwrap();
        // X'X = [[3, 7], [7, 21]]; det = 14; inv diag = [21/14, 3/14].
        assert!((fit.xtx_inv_diag[0] - 21.0 / 14.0).abs() < 1e-12);
        assert!((fit.xtx_inv_diag[1] - 3.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a: Mat<f64> = Mat::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]);
        let x = cholesky_solve(a, &[8.0, 7.0]).unwrap();
        // Solution of [[4,2],[2,3]] x = [8,7] is [1.25, 1.5].
        assert!((x[0] - 1.25).abs() < 1e-12);
        assert!((x[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(cholesky_solve(a, &[1.0, 1.0]), Err(LinalgError::NotPositiveDefinite)));
    }
}
