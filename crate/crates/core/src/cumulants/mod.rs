//! Fourth-order cumulant functionals of the observed signal.
//!
//! For a direction `u` the contrast is `f(u) = kappa4(<X, u>)`, with
//! `<x, u> = sum_j x_j conj(u_j)`. Gaussian noise contributes nothing to any
//! fourth cumulant, so for `X = A S + eta` both `f` and its derivatives only
//! see the mixing matrix and the source cumulants. Two oracles evaluate these
//! functionals: [`EmpiricalOracle`] from centered samples and
//! [`AnalyticOracle`] from a known mixing matrix and source cumulants.

mod analytic;
pub(crate) mod empirical;
mod metric;
pub(crate) mod moments;

use nalgebra::{Complex, DMatrix, DVector};

pub use analytic::AnalyticOracle;
pub use empirical::{gaussian_null_variance, EmpiricalOracle};
pub use metric::{build_c, PseudoMetric};

use crate::error::{Error, Result};
use crate::scalar::{FieldKind, Scalar};

/// `N x n` batch of observations, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T: Scalar> {
    data: DMatrix<T>,
    centered: bool,
}

impl<T: Scalar> SampleSet<T> {
    /// Wraps raw observations without centering them.
    pub fn new(data: DMatrix<T>) -> Result<Self> {
        if data.nrows() < 2 {
            return Err(Error::InsufficientData(format!(
                "need at least 2 samples, got {}",
                data.nrows()
            )));
        }
        if data.ncols() < 1 {
            return Err(Error::InsufficientData("need at least one channel".into()));
        }
        Ok(Self { data, centered: false })
    }

    pub fn data(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn field(&self) -> FieldKind {
        T::FIELD
    }

    /// Per-column sample means.
    pub fn column_means(&self) -> DVector<T> {
        DVector::from_iterator(
            self.dim(),
            self.data.column_iter().map(|c| moments::mean_of(c.as_slice(), |x| x)),
        )
    }

    pub(crate) fn columns(&self) -> moments::Columns<'_, T> {
        moments::Columns {
            data: self.data.as_slice(),
            rows: self.data.nrows(),
            cols: self.data.ncols(),
        }
    }
}

/// Subtracts the sample mean from every column.
pub fn center<T: Scalar>(raw: DMatrix<T>) -> Result<SampleSet<T>> {
    let mut set = SampleSet::new(raw)?;
    // The second pass removes the rounding residue left by a large offset.
    for _ in 0..2 {
        let means = set.column_means();
        for (mut col, mean) in set.data.column_iter_mut().zip(means.iter()) {
            for x in col.iter_mut() {
                *x -= *mean;
            }
        }
    }
    set.centered = true;
    Ok(set)
}

/// Fourth cumulant `m4 - 3 m2^2` of centered real samples.
pub fn kappa4(samples: &[f64]) -> Result<f64> {
    require_len(samples.len())?;
    let m2 = moments::mean_of(samples, |x| x * x);
    let m4 = moments::mean_of(samples, |x| {
        let s = x * x;
        s * s
    });
    Ok(m4 - 3.0 * m2 * m2)
}

/// Conjugation-scheme fourth cumulant
/// `E[X^2 conj(X)^2] - 2 E[X conj(X)]^2 - E[X^2] E[conj(X)^2]` of centered
/// complex samples. The value is real in exact arithmetic; an imaginary
/// residue above `1e-10 (1 + |Re|)` is reported as an error.
pub fn kappa4_star(samples: &[Complex<f64>]) -> Result<f64> {
    require_len(samples.len())?;
    let m22 = moments::mean_of(samples, |x| x * x * (x.conj() * x.conj()));
    let m11 = moments::mean_of(samples, |x| x * x.conj());
    let m20 = moments::mean_of(samples, |x| x * x);
    let m02 = moments::mean_of(samples, |x| x.conj() * x.conj());
    let value = m22 - m11 * m11 * 2.0 - m20 * m02;
    if value.im.abs() > 1e-10 * (1.0 + value.re.abs()) {
        return Err(Error::NumericalConsistency(format!(
            "kappa4* has imaginary residue {:e} (real part {:e})",
            value.im, value.re
        )));
    }
    Ok(value.re)
}

/// Complex fourth cumulant `E[X^4] - 3 E[X^2]^2` (no conjugation).
pub fn kappa4_complex(samples: &[Complex<f64>]) -> Result<Complex<f64>> {
    require_len(samples.len())?;
    let m2 = moments::mean_of(samples, |x| x * x);
    let m4 = moments::mean_of(samples, |x| {
        let s = x * x;
        s * s
    });
    Ok(m4 - m2 * m2 * 3.0)
}

fn require_len(len: usize) -> Result<()> {
    if len < 4 {
        return Err(Error::InsufficientData(format!(
            "fourth cumulant needs at least 4 samples, got {len}"
        )));
    }
    Ok(())
}

/// Evaluator of the fourth-cumulant contrast and its derivatives.
///
/// `hess_fstar` returns the real Hessian of `f` for real data (scale 12) and
/// the complex Hessian `d/du d/dconj(u)` of `f*(u) = kappa4*(<X, u>)` for
/// complex data (scale 4); see [`Scalar::HESS_SCALE`].
pub trait CumulantOracle<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    /// `f(u) = kappa4(<X, u>)`.
    fn f(&self, u: &DVector<T>) -> Result<T>;

    /// `f*(u) = kappa4*(<X, u>)`; equals `f` for real data.
    fn f_star(&self, u: &DVector<T>) -> Result<f64>;

    /// Gradient of `f` with respect to the real parts of `u`.
    fn grad_f(&self, u: &DVector<T>) -> Result<DVector<T>>;

    fn hess_fstar(&self, u: &DVector<T>) -> Result<DMatrix<T>>;

    /// `sum_k H(e_k)` over the standard basis.
    fn basis_hessian_sum(&self) -> Result<DMatrix<T>> {
        let n = self.dim();
        let mut total = DMatrix::<T>::zeros(n, n);
        for k in 0..n {
            let mut e = DVector::<T>::zeros(n);
            e[k] = T::one();
            total += self.hess_fstar(&e)?;
        }
        Ok(total)
    }

    /// Significance (z-score) of the fourth cumulant of `<X, w>` against the
    /// Gaussian null, when the oracle is subject to sampling error. Analytic
    /// oracles return `None`.
    fn kurtosis_zscore(&self, _w: &DVector<T>) -> Option<f64> {
        None
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
