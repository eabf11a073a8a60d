use nalgebra::{DMatrix, DVector};

use super::CumulantOracle;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// The indefinite "inner product" `<u, v>_C = u^T C^+ conj(v)` with
/// `C = conj(A) D A^T`. Columns of `A` are orthogonal under it even though
/// `D` may carry entries of both signs.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoMetric<T: Scalar> {
    c: DMatrix<T>,
    c_pinv: DMatrix<T>,
    rank: usize,
}

impl<T: Scalar> PseudoMetric<T> {
    /// Builds the metric from a Hermitian matrix `C`; the pseudoinverse comes
    /// from its eigendecomposition since `C` is typically indefinite.
    pub fn from_matrix(c: DMatrix<T>) -> Result<Self> {
        if c.nrows() != c.ncols() {
            return Err(Error::InvalidInput(format!(
                "pseudo-metric matrix must be square, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        if c.iter().any(|x| !x.modulus().is_finite()) {
            return Err(Error::InvalidInput("pseudo-metric matrix has non-finite entries".into()));
        }
        let c = linalg::hermitian_part(&c);
        let (c_pinv, rank) = linalg::pinv_hermitian(&c);
        Ok(Self { c, c_pinv, rank })
    }

    pub fn c(&self) -> &DMatrix<T> {
        &self.c
    }

    pub fn c_pinv(&self) -> &DMatrix<T> {
        &self.c_pinv
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    /// `u^T C^+ conj(v)`.
    pub fn inner(&self, u: &DVector<T>, v: &DVector<T>) -> T {
        let cv = &self.c_pinv * v.map(|x| x.conjugate());
        u.iter().zip(cv.iter()).fold(T::zero(), |a, (&x, &y)| a + x * y)
    }

    /// Eigenvalues of `C`, ascending order not guaranteed.
    pub fn eigenvalues(&self) -> DVector<f64> {
        linalg::hermitian_eigen(&self.c).0
    }

    /// Errors when fewer than `m` directions survive the rank cutoff.
    pub fn ensure_rank(&self, m: usize) -> Result<()> {
        if self.rank < m {
            return Err(Error::RankDeficient {
                rank: self.rank,
                required: m,
            });
        }
        Ok(())
    }
}

/// `C = (1 / s) sum_k H(e_k)`, with `s = 12` (real Hessian of `f`) or `s = 4`
/// (complex Hessian of `f*`). Structurally `C = conj(A) D A^T` with
/// `d_kk = ||A_k||^2 kappa4*(S_k)`, so every source contributes regardless of
/// how the basis vectors align with `A`.
pub fn build_c<T: Scalar, O: CumulantOracle<T> + ?Sized>(oracle: &O) -> Result<PseudoMetric<T>> {
    let sum = oracle.basis_hessian_sum()?;
    PseudoMetric::from_matrix(sum.unscale(T::HESS_SCALE))
}
