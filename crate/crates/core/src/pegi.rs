//! Pseudo-Euclidean gradient iteration.
//!
//! With `C = conj(A) D A^T` the update `u <- grad f(conj(C^+) u)` acts on the
//! coordinates of `u` in the (unknown) basis of columns of `A` as a cubic
//! power iteration, so it converges cubically to a single column up to a
//! unit-modulus factor. Full recovery deflates previously found columns with
//! the running pseudoinverse estimate before every update.

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cumulants::{CumulantOracle, PseudoMetric};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{FieldKind, Scalar};

/// Gradient norms below this are treated as a degenerate direction.
pub const DEGENERATE_GRADIENT: f64 = 1e-12;
/// Smallest admissible `|(C^+ conj(a))^T a|` when recovering a row of `A^+`.
pub const ROW_DENOMINATOR_FLOOR: f64 = 1e-10;
/// An iterate this close (in `|cos|`) to a recovered column ends the run.
/// Under sampling error deflation is only approximate, and a run that lands
/// on an old column keeps hopping between old columns until `max_iters`.
pub const REVISIT_COS: f64 = 0.995;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationConfig {
    /// Convergence threshold on consecutive unit iterates.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Fresh random starts allowed per column.
    pub max_restarts: usize,
    pub rng_seed: u64,
    /// Minimum z-score of the fourth cumulant along a recovered source for
    /// oracles with sampling error; weaker columns are indistinguishable from
    /// Gaussian noise and are rejected.
    pub min_kurtosis_z: f64,
}

impl IterationConfig {
    /// Defaults for exact (analytic) oracles.
    pub fn analytic(rng_seed: u64) -> Self {
        Self {
            epsilon: 1e-9,
            max_iters: 100,
            max_restarts: 10,
            rng_seed,
            min_kurtosis_z: 0.0,
        }
    }

    /// Defaults for oracles estimated from samples.
    pub fn empirical(rng_seed: u64) -> Self {
        Self {
            epsilon: 1e-6,
            max_iters: 100,
            max_restarts: 10,
            rng_seed,
            min_kurtosis_z: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        if self.max_restarts < 1 {
            return Err(Error::InvalidInput("max_restarts must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self::empirical(0)
    }
}

/// Recovered mixing columns and the running estimate of their pseudoinverse.
///
/// Each row comes from [`recover_row_pinv`]. Under sampling error those rows
/// are only approximately biorthogonal to the columns, so the running
/// estimate is kept as `(R A_hat)^-1 R`, where `R` holds the raw rows. This
/// equals `R` when the cumulants are exact and makes `u - A_hat B_hat u`
/// remove every recovered column exactly otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingEstimate<T: Scalar> {
    /// `n x m`; the first `columns_found` columns are unit vectors.
    pub a_hat: DMatrix<T>,
    /// `m x n`; row `j` pairs with column `j` of `a_hat`.
    pub b_hat: DMatrix<T>,
    pub columns_found: usize,
    /// Iterations used by the accepted run of each found column.
    pub iterations: Vec<usize>,
    /// Random starts consumed by each found column (1 = first start).
    pub starts: Vec<usize>,
    raw_rows: DMatrix<T>,
}

impl<T: Scalar> MixingEstimate<T> {
    pub fn empty(n: usize, m: usize) -> Self {
        Self {
            a_hat: DMatrix::zeros(n, m),
            b_hat: DMatrix::zeros(m, n),
            columns_found: 0,
            iterations: Vec::new(),
            starts: Vec::new(),
            raw_rows: DMatrix::zeros(m, n),
        }
    }

    /// The found columns only (`n x columns_found`).
    pub fn found_columns(&self) -> DMatrix<T> {
        self.a_hat.columns(0, self.columns_found).into_owned()
    }

    /// The rows paired with found columns (`columns_found x n`).
    pub fn found_rows(&self) -> DMatrix<T> {
        self.b_hat.rows(0, self.columns_found).into_owned()
    }

    /// Rows as returned by [`recover_row_pinv`], before biorthogonalization.
    pub fn raw_rows(&self) -> DMatrix<T> {
        self.raw_rows.rows(0, self.columns_found).into_owned()
    }

    /// Running estimate after adding `column` and `row`, without storing it.
    fn extended_rows(&self, column: &DVector<T>, row: &RowDVector<T>) -> Result<DMatrix<T>> {
        let r = self.columns_found;
        let n = self.a_hat.nrows();
        let mut cols = DMatrix::zeros(n, r + 1);
        cols.columns_mut(0, r).copy_from(&self.a_hat.columns(0, r));
        cols.set_column(r, column);
        let mut raw = DMatrix::zeros(r + 1, n);
        raw.rows_mut(0, r).copy_from(&self.raw_rows.rows(0, r));
        raw.set_row(r, row);
        let gram = &raw * &cols;
        let cond = linalg::condition_number(&gram);
        if !(cond < 1e10) {
            return Err(Error::IllConditionedRow { denominator: 1.0 / cond });
        }
        let inv = gram.try_inverse().ok_or(Error::IllConditionedRow { denominator: 0.0 })?;
        Ok(inv * raw)
    }

    fn push(&mut self, column: &DVector<T>, row: &RowDVector<T>, rows: DMatrix<T>, iterations: usize, starts: usize) {
        let j = self.columns_found;
        self.a_hat.set_column(j, column);
        self.raw_rows.set_row(j, row);
        self.b_hat.rows_mut(0, j + 1).copy_from(&rows);
        self.columns_found += 1;
        self.iterations.push(iterations);
        self.starts.push(starts);
    }
}

/// Iterates and residuals of a single-column run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace<T: Scalar> {
    pub iterates: Vec<DVector<T>>,
    /// Phase-minimized distance between consecutive iterates.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl<T: Scalar> ConvergenceTrace<T> {
    fn new() -> Self {
        Self {
            iterates: Vec::new(),
            residuals: Vec::new(),
            converged: false,
        }
    }
}

/// Error from [`pegi_full`]; partial results are kept when some columns
/// were recovered before a failure.
#[derive(Debug)]
pub enum RecoveryError<T: Scalar> {
    Partial {
        estimate: MixingEstimate<T>,
        requested: usize,
        cause: Error,
    },
    Failed(Error),
}

impl<T: Scalar> RecoveryError<T> {
    pub fn columns_found(&self) -> usize {
        match self {
            RecoveryError::Partial { estimate, .. } => estimate.columns_found,
            RecoveryError::Failed(_) => 0,
        }
    }
}

impl<T: Scalar> std::fmt::Display for RecoveryError<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RecoveryError::Partial {
                estimate,
                requested,
                cause,
            } => write!(
                f,
                "recovered {} of {} columns: {}",
                estimate.columns_found, requested, cause
            ),
            RecoveryError::Failed(e) => e.fmt(f),
        }
    }
}

impl<T: Scalar> std::error::Error for RecoveryError<T> {}

impl<T: Scalar> From<RecoveryError<T>> for Error {
    fn from(e: RecoveryError<T>) -> Self {
        match e {
            RecoveryError::Partial {
                estimate,
                requested,
                cause,
            } => Error::PartialRecovery {
                found: estimate.columns_found,
                requested,
                reason: cause.to_string(),
            },
            RecoveryError::Failed(e) => e,
        }
    }
}

/// One gradient-iteration step in the pseudo-Euclidean space:
/// `grad f(conj(C^+) u) / ||grad f(conj(C^+) u)||`.
pub fn pegi_update<T: Scalar, O: CumulantOracle<T> + ?Sized>(
    u: &DVector<T>,
    metric: &PseudoMetric<T>,
    oracle: &O,
) -> Result<DVector<T>> {
    let pulled = match T::FIELD {
        FieldKind::Real => metric.c_pinv() * u,
        FieldKind::Complex => metric.c_pinv().map(|x| x.conjugate()) * u,
    };
    let g = oracle.grad_f(&pulled)?;
    let norm = linalg::norm(&g);
    if !(norm >= DEGENERATE_GRADIENT) {
        return Err(Error::DegenerateDirection { norm });
    }
    Ok(g.unscale(norm))
}

/// Unit-modulus factor `c` minimizing `||u - c v||`: the sign of `<u, v>` for
/// real vectors, `exp(i atan2(Im <u, v>, Re <u, v>))` for complex ones.
pub fn optimal_phase<T: Scalar>(u: &DVector<T>, v: &DVector<T>) -> T {
    let z = linalg::inner(u, v);
    match T::FIELD {
        FieldKind::Real => {
            if z.re() < 0.0 {
                -T::one()
            } else {
                T::one()
            }
        }
        FieldKind::Complex => {
            let theta = z.im().atan2(z.re());
            T::from_parts(theta.cos(), theta.sin())
        }
    }
}

/// Convergence up to sign (real) or unit-modulus factor (complex).
/// Returns `(residual < epsilon, residual)`.
pub fn converged_up_to_phase<T: Scalar>(u_new: &DVector<T>, u_old: &DVector<T>, epsilon: f64) -> (bool, f64) {
    let residual = match T::FIELD {
        FieldKind::Real => {
            let minus = linalg::norm(&(u_new - u_old));
            let plus = linalg::norm(&(u_new + u_old));
            minus.min(plus)
        }
        FieldKind::Complex => {
            let c = optimal_phase(u_new, u_old);
            linalg::norm(&(u_new - u_old * c))
        }
    };
    (residual < epsilon, residual)
}

/// Least-squares slope of `log r_{k+1}` against `log r_k` over the steps that
/// land inside the ball, `start > r_{k+1} > floor`. The step entering the ball
/// is kept so that runs hitting the rounding floor in two steps still give a
/// fit. The slope is the empirical order of convergence; `None` with fewer
/// than two pairs.
pub fn convergence_order(residuals: &[f64], start: f64, floor: f64) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = residuals
        .windows(2)
        .filter(|w| w[1] < start && w[1] > floor)
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let k = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Single-column recovery: iterate [`pegi_update`] from `u0` until two
/// consecutive iterates agree up to phase.
pub fn recover_column<T: Scalar, O: CumulantOracle<T> + ?Sized>(
    u0: &DVector<T>,
    metric: &PseudoMetric<T>,
    oracle: &O,
    cfg: &IterationConfig,
) -> Result<(DVector<T>, ConvergenceTrace<T>)> {
    cfg.validate()?;
    let mut trace = ConvergenceTrace::new();
    let mut prev = linalg::normalized(u0).ok_or(Error::DegenerateDirection { norm: 0.0 })?;
    for _ in 0..cfg.max_iters {
        let next = pegi_update(&prev, metric, oracle)?;
        let (done, residual) = converged_up_to_phase(&next, &prev, cfg.epsilon);
        trace.iterates.push(next.clone());
        trace.residuals.push(residual);
        if done {
            trace.converged = true;
            return Ok((next, trace));
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iters,
        residual: trace.residuals.last().copied().unwrap_or(f64::NAN),
        residuals: trace.residuals,
    })
}

/// Row of `A^+` paired with the recovered column `a`:
/// `(C^+ conj(a))^T / ((C^+ conj(a))^T a)`, so that `row * a = 1`.
pub fn recover_row_pinv<T: Scalar>(metric: &PseudoMetric<T>, a_col: &DVector<T>) -> Result<RowDVector<T>> {
    let v = metric.c_pinv() * a_col.map(|x| x.conjugate());
    let denom = v.iter().zip(a_col.iter()).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    if !(denom.modulus() > ROW_DENOMINATOR_FLOOR) {
        return Err(Error::IllConditionedRow {
            denominator: denom.modulus(),
        });
    }
    Ok(v.transpose() / denom)
}

/// `u - A_hat B_hat u` over the columns found so far.
pub fn deflate<T: Scalar>(u: &DVector<T>, est: &MixingEstimate<T>) -> DVector<T> {
    let r = est.columns_found;
    if r == 0 {
        return u.clone();
    }
    let a = est.a_hat.columns(0, r);
    let b = est.b_hat.rows(0, r);
    u - a * (b * u)
}

fn random_unit<T: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> DVector<T> {
    loop {
        let v = DVector::from_fn(n, |_, _| T::standard_normal(rng));
        if let Some(u) = linalg::normalized(&v) {
            return u;
        }
    }
}

fn revisited_column<T: Scalar>(u: &DVector<T>, est: &MixingEstimate<T>) -> Option<usize> {
    (0..est.columns_found).find(|&j| {
        let col = est.a_hat.column(j).into_owned();
        linalg::inner(u, &col).modulus() >= REVISIT_COS
    })
}

/// One deflated run towards a new column. Returns the column and the number
/// of iterations used.
fn deflated_run<T: Scalar, O: CumulantOracle<T> + ?Sized>(
    start: DVector<T>,
    metric: &PseudoMetric<T>,
    oracle: &O,
    est: &MixingEstimate<T>,
    cfg: &IterationConfig,
) -> Result<(DVector<T>, usize)> {
    let mut prev = start;
    let mut residuals = Vec::new();
    for iter in 1..=cfg.max_iters {
        let deflated = deflate(&prev, est);
        let norm = linalg::norm(&deflated);
        if !(norm >= DEGENERATE_GRADIENT) {
            return Err(Error::DegenerateDirection { norm });
        }
        let next = pegi_update(&deflated.unscale(norm), metric, oracle)?;
        if let Some(j) = revisited_column(&next, est) {
            return Err(Error::NumericalConsistency(format!(
                "iteration returned to recovered column {j}"
            )));
        }
        let (done, residual) = converged_up_to_phase(&next, &prev, cfg.epsilon);
        residuals.push(residual);
        if done {
            return Ok((next, iter));
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iters,
        residual: residuals.last().copied().unwrap_or(f64::NAN),
        residuals,
    })
}

/// Full recovery of `m` columns with per-iteration deflation against the
/// columns already found. Output columns are in discovery order.
pub fn pegi_full<T: Scalar, O: CumulantOracle<T> + ?Sized>(
    metric: &PseudoMetric<T>,
    oracle: &O,
    m: usize,
    cfg: &IterationConfig,
) -> std::result::Result<MixingEstimate<T>, RecoveryError<T>> {
    cfg.validate().map_err(RecoveryError::Failed)?;
    let n = oracle.dim();
    if metric.dim() != n {
        return Err(RecoveryError::Failed(Error::DimensionMismatch {
            expected: n,
            got: metric.dim(),
        }));
    }
    if m == 0 || m > n {
        return Err(RecoveryError::Failed(Error::InvalidInput(format!(
            "number of components must satisfy 1 <= m <= n = {n}, got {m}"
        ))));
    }
    metric.ensure_rank(m).map_err(RecoveryError::Failed)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut est = MixingEstimate::empty(n, m);
    for _ in 0..m {
        let mut last_error = None;
        let mut accepted = None;
        for start in 1..=cfg.max_restarts {
            let u0 = random_unit(n, &mut rng);
            let attempt = deflated_run(u0, metric, oracle, &est, cfg).and_then(|(col, iters)| {
                let row = recover_row_pinv(metric, &col)?;
                if let Some(z) = oracle.kurtosis_zscore(&row.transpose().map(|x| x.conjugate())) {
                    if z < cfg.min_kurtosis_z {
                        return Err(Error::NumericalConsistency(format!(
                            "recovered direction is indistinguishable from Gaussian (z = {z:.2})"
                        )));
                    }
                }
                let rows = est.extended_rows(&col, &row)?;
                Ok((col, row, rows, iters))
            });
            match attempt {
                Ok(found) => {
                    accepted = Some((found, start));
                    break;
                }
                Err(e) => last_error = Some(e),
            }
        }
        match accepted {
            Some(((col, row, rows, iters), start)) => est.push(&col, &row, rows, iters, start),
            None => {
                return Err(RecoveryError::Partial {
                    estimate: est,
                    requested: m,
                    cause: last_error.expect("at least one start"),
                })
            }
        }
    }
    Ok(est)
}
