//! Dense linear algebra helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::scalar::Scalar;

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized first,
/// so small asymmetries from floating-point accumulation are tolerated.
pub fn hermitian_eigen<T: Scalar>(m: &DMatrix<T>) -> (DVector<f64>, DMatrix<T>) {
    let sym = hermitian_part(m);
    let eig = sym.symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// `(M + M^H) / 2`.
pub fn hermitian_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::from_real(0.5);
    (m + m.adjoint()) * half
}

/// Largest entrywise `|M - M^H|`, relative to the largest entry of `M`.
pub fn relative_asymmetry<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    max_abs(&(m - m.adjoint())) / scale
}

pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.modulus()))
}

/// Moore-Penrose pseudoinverse of a Hermitian matrix through its
/// eigendecomposition. Eigenvalues with magnitude below
/// `n * eps * max|lambda|` are treated as zero. Returns the pseudoinverse and
/// the numeric rank.
pub fn pinv_hermitian<T: Scalar>(m: &DMatrix<T>) -> (DMatrix<T>, usize) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "pinv_hermitian needs a square matrix");
    let (vals, vecs) = hermitian_eigen(m);
    let lambda_max = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let cutoff = n as f64 * f64::EPSILON * lambda_max;
    let mut out = DMatrix::<T>::zeros(n, n);
    let mut rank = 0;
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda.abs() <= cutoff || lambda == 0.0 {
            continue;
        }
        rank += 1;
        let v = vecs.column(k);
        out += (&v * v.adjoint()) * T::from_real(1.0 / lambda);
    }
    (out, rank)
}

/// Moore-Penrose pseudoinverse of an arbitrary matrix through the SVD, with
/// the cutoff `max(rows, cols) * eps * sigma_max`.
pub fn pinv<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = rows.max(cols) as f64 * f64::EPSILON * sigma_max;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut out = DMatrix::<T>::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let uk = u.column(k);
        let vk = v_t.row(k);
        // V diag(1/s) U^H, built from outer products.
        out += (vk.adjoint() * uk.adjoint()) * T::from_real(1.0 / s);
    }
    out
}

pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> DVector<f64> {
    m.clone().svd(false, false).singular_values
}

/// Numeric rank with the same cutoff as [`pinv`].
pub fn numeric_rank<T: Scalar>(m: &DMatrix<T>) -> usize {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0;
    }
    let sv = singular_values(m);
    let sigma_max = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = rows.max(cols) as f64 * f64::EPSILON * sigma_max;
    sv.iter().filter(|&&s| s > cutoff && s > 0.0).count()
}

/// Ratio of largest to smallest singular value.
pub fn condition_number<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let sv = singular_values(m);
    let max = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    let min = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    max / min
}

/// Haar-distributed orthogonal (real) or unitary (complex) matrix: QR of a
/// Gaussian matrix with the diagonal of R normalized to be positive real.
pub fn haar_unitary<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    let g = DMatrix::<T>::from_fn(n, n, |_, _| T::standard_normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let modulus = d.modulus();
        if modulus > 0.0 {
            let phase = d.unscale(modulus);
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Euclidean norm of a vector over either field.
pub fn norm<T: Scalar>(v: &DVector<T>) -> f64 {
    v.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
}

/// Unit-norm copy of `v`, or `None` when `v` is (numerically) zero.
pub fn normalized<T: Scalar>(v: &DVector<T>) -> Option<DVector<T>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        None
    } else {
        Some(v.unscale(n))
    }
}

/// `sum_j a_j conj(b_j)`.
pub fn inner<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y.conjugate())
}

/// Angle in radians between the lines spanned by `a` and `b`, insensitive to
/// a unit-modulus factor. Computed from the residual after optimal phase
/// alignment, which stays accurate for tiny angles.
pub fn line_angle<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> f64 {
    let (Some(a), Some(b)) = (normalized(a), normalized(b)) else {
        return std::f64::consts::FRAC_PI_2;
    };
    let z = inner(&a, &b);
    let m = z.modulus();
    let phase = if m > 0.0 { z.unscale(m) } else { T::one() };
    let diff = &a - &b * phase;
    let chord = norm(&diff).min(2.0);
    2.0 * (chord / 2.0).asin()
}
