//! Small dense linear algebra used by the potential analysis and the
//! tridiagonal factorization used by the implicit radial stepper.

use crate::scalar::Real;

/// Solves `a x = b` for a row-major `n x n` matrix by Gaussian elimination
/// with partial pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve<T: Real>(a: &[T], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tiny = scale * T::epsilon() * T::lit(16.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col]
                    .abs()
                    .partial_cmp(&m[j * n + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if !(m[piv * n + col].abs() > tiny) {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        for row in col + 1..n {
            let f = m[row * n + col] / m[col * n + col];
            for k in col..n {
                let v = m[col * n + k];
                m[row * n + k] = m[row * n + k] - f * v;
            }
            let xc = x[col];
            x[row] = x[row] - f * xc;
        }
    }
    for row in (0..n).rev() {
        let mut s = x[row];
        for k in row + 1..n {
            s = s - m[row * n + k] * x[k];
        }
        x[row] = s / m[row * n + row];
    }
    Some(x)
}

/// Eigenvalues of a symmetric row-major matrix (cyclic Jacobi), sorted ascending.
pub fn symmetric_eigenvalues<T: Real>(a: &[T], n: usize) -> Vec<T> {
    symmetric_eigen(a, n).0
}

/// Eigenvalues (ascending) and the matching unit eigenvectors (column `k` of
/// the returned row-major matrix belongs to eigenvalue `k`).
pub fn symmetric_eigen<T: Real>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    for _sweep in 0..64 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        let diag: T = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[i * n + i]
            .partial_cmp(&m[j * n + j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + col] = v[k * n + src];
        }
    }
    (values, vectors)
}

/// LU factors of a tridiagonal matrix (Thomas algorithm without pivoting).
///
/// The matrix has sub-diagonal `lower[k]` (row `k`, column `k-1`), diagonal
/// `diag[k]` and super-diagonal `upper[k]` (row `k`, column `k+1`).
#[derive(Debug, Clone)]
pub struct Tridiagonal<T> {
    lower: Vec<T>,
    upper_mod: Vec<T>,
    denom: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn factor(lower: &[T], diag: &[T], upper: &[T]) -> Self {
        let n = diag.len();
        let mut upper_mod = vec![T::zero(); n];
        let mut denom = vec![T::zero(); n];
        denom[0] = diag[0];
        if n > 1 {
            upper_mod[0] = upper[0] / denom[0];
        }
        for k in 1..n {
            denom[k] = diag[k] - lower[k] * upper_mod[k - 1];
            if k + 1 < n {
                upper_mod[k] = upper[k] / denom[k];
            }
        }
        Self {
            lower: lower.to_vec(),
            upper_mod,
            denom,
        }
    }

    /// Solves in place: `rhs` is overwritten with the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = rhs.len();
        rhs[0] = rhs[0] / self.denom[0];
        for k in 1..n {
            rhs[k] = (rhs[k] - self.lower[k] * rhs[k - 1]) / self.denom[k];
        }
        for k in (0..n - 1).rev() {
            rhs[k] = rhs[k] - self.upper_mod[k] * rhs[k + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a: [f64; 4] = [2.0, 1.0, 1.0, 3.0];
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!(solve(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn jacobi_matches_closed_form_2x2() {
        let a: [f64; 4] = [2.0, 1.0, 1.0, 2.0];
        let (vals, vecs) = symmetric_eigen(&a, 2);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        // A v = lambda v for each column
        for k in 0..2 {
            for i in 0..2 {
                let av = a[i * 2] * vecs[k] + a[i * 2 + 1] * vecs[2 + k];
                assert!((av - vals[k] * vecs[i * 2 + k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn jacobi_3x3_trace_and_order() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0];
        let vals = symmetric_eigenvalues(&a, 3);
        assert!(vals[0] <= vals[1] && vals[1] <= vals[2]);
        assert!((vals.iter().sum::<f64>() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn thomas_matches_dense() {
        let lower: [f64; 4] = [0.0, -1.0, -1.0, -1.0];
        let diag = [4.0, 4.0, 4.0, 4.0];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let mut dense = vec![0.0; 16];
        for k in 0..4 {
            dense[k * 4 + k] = diag[k];
            if k > 0 {
                dense[k * 4 + k - 1] = lower[k];
            }
            if k < 3 {
                dense[k * 4 + k + 1] = upper[k];
            }
        }
        let b = [1.0, 2.0, 3.0, 4.0];
        let expected = solve(&dense, &b).unwrap();
        let lu = Tridiagonal::factor(&lower, &diag, &upper);
        let mut x = b;
        lu.solve_in_place(&mut x);
        for k in 0..4 {
            assert!((x[k] - expected[k]).abs() < 1e-14);
        }
    }
}
