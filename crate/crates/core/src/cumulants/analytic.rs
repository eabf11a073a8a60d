use nalgebra::{DMatrix, DVector};

use super::{check_dim, CumulantOracle};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Cumulant functionals of a known model `X = A S + eta`, where `S` has
/// independent unit-variance coordinates and `eta` is Gaussian.
///
/// Only `A` and the source cumulants enter; the noise covariance is not an
/// input because Gaussian noise has vanishing fourth cumulants.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticOracle<T: Scalar> {
    mixing: DMatrix<T>,
    kappa4: Vec<T>,
    kappa4_star: Vec<f64>,
}

impl<T: Scalar> AnalyticOracle<T> {
    /// `kappa4[k]` is `kappa4(S_k)` (complex in general), `kappa4_star[k]` is
    /// `kappa4*(S_k)`. For real sources both coincide.
    pub fn new(mixing: DMatrix<T>, kappa4: Vec<T>, kappa4_star: Vec<f64>) -> Result<Self> {
        let m = mixing.ncols();
        if kappa4.len() != m || kappa4_star.len() != m {
            return Err(Error::InvalidInput(format!(
                "{m} columns but {} kappa4 and {} kappa4* values",
                kappa4.len(),
                kappa4_star.len()
            )));
        }
        Ok(Self {
            mixing,
            kappa4,
            kappa4_star,
        })
    }

    /// Oracle for real-valued sources, whose two cumulants coincide.
    pub fn with_real_sources(mixing: DMatrix<T>, kappa4: &[f64]) -> Result<Self> {
        Self::new(
            mixing,
            kappa4.iter().map(|&k| T::from_real(k)).collect(),
            kappa4.to_vec(),
        )
    }

    pub fn mixing(&self) -> &DMatrix<T> {
        &self.mixing
    }

    pub fn kappa4(&self) -> &[T] {
        &self.kappa4
    }

    pub fn kappa4_star(&self) -> &[f64] {
        &self.kappa4_star
    }

    /// `<A_k, u>` for every column.
    fn coefficients(&self, u: &DVector<T>) -> Result<DVector<T>> {
        check_dim(self.mixing.nrows(), u.len())?;
        Ok(self.mixing.transpose() * u.map(|x| x.conjugate()))
    }
}

impl<T: Scalar> CumulantOracle<T> for AnalyticOracle<T> {
    fn dim(&self) -> usize {
        self.mixing.nrows()
    }

    fn f(&self, u: &DVector<T>) -> Result<T> {
        let alpha = self.coefficients(u)?;
        Ok(alpha
            .iter()
            .zip(&self.kappa4)
            .fold(T::zero(), |acc, (&a, &k)| acc + a * a * a * a * k))
    }

    fn f_star(&self, u: &DVector<T>) -> Result<f64> {
        let alpha = self.coefficients(u)?;
        Ok(alpha
            .iter()
            .zip(&self.kappa4_star)
            .map(|(a, k)| a.modulus_squared().powi(2) * k)
            .sum())
    }

    fn grad_f(&self, u: &DVector<T>) -> Result<DVector<T>> {
        let alpha = self.coefficients(u)?;
        let weights = DVector::from_iterator(
            alpha.len(),
            alpha
                .iter()
                .zip(&self.kappa4)
                .map(|(&a, &k)| a * a * a * k * T::from_real(4.0)),
        );
        Ok(&self.mixing * weights)
    }

    fn hess_fstar(&self, u: &DVector<T>) -> Result<DMatrix<T>> {
        let alpha = self.coefficients(u)?;
        let d = DVector::from_iterator(
            alpha.len(),
            alpha
                .iter()
                .zip(&self.kappa4_star)
                .map(|(a, &k)| T::from_real(T::HESS_SCALE * a.modulus_squared() * k)),
        );
        let conj_a = self.mixing.map(|x| x.conjugate());
        Ok(&conj_a * DMatrix::from_diagonal(&d) * self.mixing.transpose())
    }

    fn basis_hessian_sum(&self) -> Result<DMatrix<T>> {
        // sum_k |<A_j, e_k>|^2 = ||A_j||^2
        let d = DVector::from_iterator(
            self.mixing.ncols(),
            self.mixing
                .column_iter()
                .zip(&self.kappa4_star)
                .map(|(col, &k)| T::from_real(T::HESS_SCALE * col.norm_squared() * k)),
        );
        let conj_a = self.mixing.map(|x| x.conjugate());
        Ok(&conj_a * DMatrix::from_diagonal(&d) * self.mixing.transpose())
    }
}
