//! Tiny dense kernels for the fixed-size systems that show up in the spectral
//! maximizations (at most 3 unknowns plus a handful of multipliers).

use crate::scalar::Real;

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
///
/// `a` is row-major `n x n`. Returns `None` when a pivot falls below
/// `tol * max|a_ij|`.
pub(crate) fn solve_dense<T: Real>(a: &mut [T], b: &mut [T], n: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    let tol = T::lit(1e-13) * scale;
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[piv * n + col].abs() {
                piv = row;
            }
        }
        if a[piv * n + col].abs() <= tol {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] = a[row * n + k] - f * v;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s = s - a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Some(())
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// returned together with the eigenvector columns (`vecs[k]` pairs with
/// `vals[k]`, unsorted).
pub(crate) fn jacobi_eigen<T: Real, const N: usize>(mut a: [[T; N]; N]) -> ([T; N], [[T; N]; N]) {
    let mut v = [[T::zero(); N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let norm: T = a.iter().flat_map(|r| r.iter()).map(|x| *x * *x).sum::<T>().sqrt();
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..N {
            for j in i + 1..N {
                off = off + a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= T::eps() * T::lit(1e-2) * norm || off == T::zero() {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut vals = [T::zero(); N];
    let mut vecs = [[T::zero(); N]; N];
    for k in 0..N {
        vals[k] = a[k][k];
        for i in 0..N {
            vecs[k][i] = v[i][k];
        }
    }
    (vals, vecs)
}
