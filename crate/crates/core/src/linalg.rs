//! Small dense linear algebra on fixed-size real matrices.

use crate::scalar::Real;

/// Eigen-decomposition of the symmetric matrix `[[a, b], [b, c]]`.
///
/// Returns eigenvalues in ascending order with unit eigenvectors.
pub(crate) fn sym2_eig<T: Real>(a: T, b: T, c: T) -> ([T; 2], [[T; 2]; 2]) {
    let (vals, vecs) = jacobi_eigen([[a, b], [b, c]]);
    (vals, [[vecs[0][0], vecs[1][0]], [vecs[0][1], vecs[1][1]]])
}

/// Cyclic Jacobi eigen-decomposition of a symmetric `N×N` matrix.
///
/// Eigenvalues ascending; column `j` of the returned matrix is the unit
/// eigenvector of eigenvalue `j`.
pub(crate) fn jacobi_eigen<T: Real, const N: usize>(mut a: [[T; N]; N]) -> ([T; N], [[T; N]; N]) {
    let mut v = [[T::zero(); N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _sweep in 0..64 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..N {
            diag = diag + a[i][i] * a[i][i];
            for j in 0..N {
                if i != j {
                    off = off + a[i][j] * a[i][j];
                }
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q] == T::zero() {
                    continue;
                }
                let two = T::lit(2.0);
                let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
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
    let mut idx: [usize; N] = [0; N];
    for (i, x) in idx.iter_mut().enumerate() {
        *x = i;
    }
    idx.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut vals = [T::zero(); N];
    let mut vecs = [[T::zero(); N]; N];
    for (new, &old) in idx.iter().enumerate() {
        vals[new] = a[old][old];
        for k in 0..N {
            vecs[k][new] = v[k][old];
        }
    }
    (vals, vecs)
}

pub(crate) fn dot<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

pub(crate) fn norm<T: Real, const N: usize>(a: &[T; N]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn cross<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit vectors completing `r` to an orthonormal basis of R³.
pub(crate) fn complete_basis<T: Real>(r: &[T; 3]) -> ([T; 3], [T; 3]) {
    let mut axis = 0;
    for i in 1..3 {
        if r[i].abs() < r[axis].abs() {
            axis = i;
        }
    }
    let mut e = [T::zero(); 3];
    e[axis] = T::one();
    let k1 = cross(r, &e);
    let n1 = norm(&k1);
    let k1 = [k1[0] / n1, k1[1] / n1, k1[2] / n1];
    let k2 = cross(r, &k1);
    let n2 = norm(&k2);
    (k1, [k2[0] / n2, k2[1] / n2, k2[2] / n2])
}

/// Solves `A x = b` for `N ≤ 3` by Gaussian elimination with partial pivoting.
pub(crate) fn solve<T: Real, const N: usize>(mut a: [[T; N]; N], mut b: [T; N]) -> Option<[T; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[piv][col] == T::zero() || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..N {
            let f = a[r][col] / a[col][col];
            for c in col..N {
                a[r][c] = a[r][c] - f * a[col][c];
            }
            b[r] = b[r] - f * b[col];
        }
    }
    let mut x = [T::zero(); N];
    for r in (0..N).rev() {
        let mut s = b[r];
        for c in (r + 1)..N {
            s = s - a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}
