//! Demixing matrices and their evaluation.
//!
//! Given any matrix whose columns are the mixing directions up to scale,
//! `B = A_hat^H cov(X)^+` maximizes the SINR of every source at once. The
//! remaining functions score demixers against a known model and align
//! estimated columns with the truth.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, RowDVector};

use crate::cumulants::{empirical::outer_moment, SampleSet};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use crate::simulate::GroundTruthModel;

/// dB values are clamped to `+-DB_CAP` so reports stay finite.
pub const DB_CAP: f64 = 300.0;
/// Largest relative asymmetry accepted for a covariance matrix.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;
/// Multiple of `n * eps` below which an SINR denominator counts as zero.
pub const ROUNDING_SLACK: f64 = 16.0;
/// Greedy matches with some `|cos|` below this fall back to exhaustive search.
pub const MATCH_FALLBACK_COS: f64 = 0.9;
/// Largest number of columns for which the exhaustive fallback runs.
pub const MATCH_FALLBACK_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    SinrOpt,
    APinv,
    Custom,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::SinrOpt => "sinr_opt",
            Provenance::APinv => "pinv",
            Provenance::Custom => "custom",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinr_opt" => Ok(Provenance::SinrOpt),
            "pinv" | "a_pinv" => Ok(Provenance::APinv),
            "custom" => Ok(Provenance::Custom),
            other => Err(Error::InvalidInput(format!("unknown demixing mode '{other}'"))),
        }
    }
}

/// An `m x n` demixing matrix; `S_hat = B X`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemixMatrix<T: Scalar> {
    b: DMatrix<T>,
    provenance: Provenance,
}

impl<T: Scalar> DemixMatrix<T> {
    pub fn new(b: DMatrix<T>, provenance: Provenance) -> Result<Self> {
        if b.iter().any(|x| !x.modulus().is_finite()) {
            return Err(Error::InvalidInput("demixing matrix has non-finite entries".into()));
        }
        Ok(Self { b, provenance })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn row(&self, k: usize) -> RowDVector<T> {
        self.b.row(k).into_owned()
    }

    /// Source estimates for samples stored one per row (`N x n` in,
    /// `N x m` out).
    pub fn apply(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        if x.ncols() != self.b.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.b.ncols(),
                got: x.ncols(),
            });
        }
        Ok(x * self.b.transpose())
    }
}

/// `(1/N) sum x x^H` of centered samples.
pub fn sample_cov<T: Scalar>(samples: &SampleSet<T>) -> Result<DMatrix<T>> {
    if !samples.is_centered() {
        return Err(Error::Precondition("sample covariance needs centered samples".into()));
    }
    Ok(linalg::hermitian_part(&outer_moment(samples)))
}

/// `B = A_hat^H cov_x^+`, optimal for every source whatever the column
/// scaling of `A_hat`.
pub fn sinr_optimal_demix<T: Scalar>(a_hat: &DMatrix<T>, cov_x: &DMatrix<T>) -> Result<DemixMatrix<T>> {
    let n = a_hat.nrows();
    if cov_x.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cov_x.nrows(),
        });
    }
    let asym = linalg::relative_asymmetry(cov_x);
    if !(asym <= HERMITIAN_TOLERANCE) {
        return Err(Error::InvalidInput(format!(
            "covariance is not Hermitian (relative asymmetry {asym:.3e})"
        )));
    }
    let (pinv, _) = linalg::pinv_hermitian(&linalg::hermitian_part(cov_x));
    DemixMatrix::new(a_hat.adjoint() * pinv, Provenance::SinrOpt)
}

/// `B = A_hat^+`.
pub fn pinv_demix<T: Scalar>(a_hat: &DMatrix<T>) -> Result<DemixMatrix<T>> {
    DemixMatrix::new(linalg::pinv(a_hat), Provenance::APinv)
}

/// `|b A_k|^2 / (||b A||^2 - |b A_k|^2 + b sigma b^H)` for unit-variance
/// sources. Infinite when only the target survives (up to rounding in
/// `b A`), 0 when it does not.
pub fn sinr_with<T: Scalar>(b: &RowDVector<T>, a: &DMatrix<T>, sigma: &DMatrix<T>, k: usize) -> Result<f64> {
    if k >= a.ncols() {
        return Err(Error::InvalidInput(format!(
            "source index {k} out of range for {} sources",
            a.ncols()
        )));
    }
    if b.len() != a.nrows() || sigma.shape() != (a.nrows(), a.nrows()) {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let gains = b * a;
    let signal = gains[k].modulus_squared();
    let interference: f64 = gains
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, g)| g.modulus_squared())
        .sum();
    let noise = (b * sigma * b.adjoint())[(0, 0)].re().max(0.0);
    let denom = interference + noise;
    // Residue at the rounding level of `b A` is not interference: without it
    // exact demixers of noise-free models would score arbitrary large values.
    let rounding = ROUNDING_SLACK * a.nrows() as f64 * f64::EPSILON;
    let floor = rounding * rounding * b.norm_squared() * a.norm_squared();
    Ok(if signal == 0.0 {
        0.0
    } else if denom <= floor {
        f64::INFINITY
    } else {
        signal / denom
    })
}

/// Analytic SINR of source `k` in `model` for the demixing row `b`.
pub fn sinr_k<T: Scalar>(b: &RowDVector<T>, model: &GroundTruthModel<T>, k: usize) -> Result<f64> {
    sinr_with(b, model.mixing(), model.noise_cov(), k)
}

fn check_paired<T: Scalar>(b: &RowDVector<T>, s: &DMatrix<T>, x: &DMatrix<T>, k: usize) -> Result<()> {
    if s.nrows() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: s.nrows(),
            got: x.nrows(),
        });
    }
    if b.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            got: b.len(),
        });
    }
    if k >= s.ncols() {
        return Err(Error::InvalidInput(format!(
            "source index {k} out of range for {} sources",
            s.ncols()
        )));
    }
    if s.nrows() == 0 {
        return Err(Error::InsufficientData("no paired samples".into()));
    }
    Ok(())
}

/// Sample mean of `|s_k - b x|^2` over paired draws (`s`: `N x m`,
/// `x`: `N x n`).
pub fn mse_k<T: Scalar>(b: &RowDVector<T>, s: &DMatrix<T>, x: &DMatrix<T>, k: usize) -> Result<f64> {
    check_paired(b, s, x, k)?;
    let est = x * b.transpose();
    let err = s.column(k) - est;
    Ok(err.norm_squared() / s.nrows() as f64)
}

/// Pearson correlation `E[s_k conj(s_hat)] / (sd(s_k) sd(s_hat))` with
/// `s_hat = b x`; 0 when either side has no variance.
pub fn correlation_k<T: Scalar>(b: &RowDVector<T>, s: &DMatrix<T>, x: &DMatrix<T>, k: usize) -> Result<T> {
    check_paired(b, s, x, k)?;
    let n = s.nrows() as f64;
    let centered = |v: DVector<T>| {
        let mean = v.sum().unscale(n);
        v.map(|e| e - mean)
    };
    let target = centered(s.column(k).into_owned());
    let est = centered(x * b.transpose());
    let (sd_t, sd_e) = (target.norm(), est.norm());
    if sd_t == 0.0 || sd_e == 0.0 {
        return Ok(T::zero());
    }
    Ok(linalg::inner(&target, &est).unscale(sd_t * sd_e))
}

/// Alignment of estimated columns with true ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMatch<T: Scalar> {
    /// `permutation[j]` is the true column matched to estimated column `j`.
    pub permutation: Vec<usize>,
    /// `phases[j] * a_hat_j` points along its true column.
    pub phases: Vec<T>,
    /// Angle in degrees between the lines of matched columns.
    pub angles_deg: Vec<f64>,
}

impl<T: Scalar> ColumnMatch<T> {
    pub fn max_angle_deg(&self) -> f64 {
        self.angles_deg.iter().fold(0.0, |a: f64, &b| a.max(b))
    }

    /// `inverse()[k]` is the estimated column matched to true column `k`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.permutation.len()];
        for (j, &k) in self.permutation.iter().enumerate() {
            inv[k] = j;
        }
        inv
    }
}

/// Greedy maximum-`|cos|` matching with an exhaustive fallback for small
/// problems whose greedy pairs are not clearly aligned.
pub fn match_columns<T: Scalar>(a_hat: &DMatrix<T>, a_true: &DMatrix<T>) -> Result<ColumnMatch<T>> {
    if a_hat.shape() != a_true.shape() {
        return Err(Error::Evaluation(format!(
            "cannot match {}x{} estimate against {}x{} truth",
            a_hat.nrows(),
            a_hat.ncols(),
            a_true.nrows(),
            a_true.ncols()
        )));
    }
    let m = a_hat.ncols();
    for (name, mat) in [("estimate", a_hat), ("truth", a_true)] {
        let rank = linalg::numeric_rank(mat);
        if rank < m {
            return Err(Error::Evaluation(format!("{name} has rank {rank} < {m} columns")));
        }
    }
    let hats: Vec<DVector<T>> = a_hat.column_iter().map(|c| c.into_owned()).collect();
    let truths: Vec<DVector<T>> = a_true.column_iter().map(|c| c.into_owned()).collect();
    let cos = DMatrix::from_fn(m, m, |j, k| {
        linalg::inner(&hats[j], &truths[k]).modulus() / (linalg::norm(&hats[j]) * linalg::norm(&truths[k]))
    });
    let mut permutation = greedy_assignment(&cos);
    let weakest = (0..m).map(|j| cos[(j, permutation[j])]).fold(f64::INFINITY, f64::min);
    if weakest < MATCH_FALLBACK_COS && m <= MATCH_FALLBACK_MAX {
        permutation = exhaustive_assignment(&cos);
    }
    let mut phases = Vec::with_capacity(m);
    let mut angles_deg = Vec::with_capacity(m);
    for (j, &k) in permutation.iter().enumerate() {
        let z = linalg::inner(&hats[j], &truths[k]);
        let modulus = z.modulus();
        phases.push(if modulus > 0.0 {
            z.conjugate().unscale(modulus)
        } else {
            T::one()
        });
        angles_deg.push(linalg::line_angle(&hats[j], &truths[k]).to_degrees());
    }
    Ok(ColumnMatch {
        permutation,
        phases,
        angles_deg,
    })
}

/// Repeatedly pairs the largest remaining score.
pub fn greedy_assignment(score: &DMatrix<f64>) -> Vec<usize> {
    let m = score.nrows();
    let mut assigned = vec![usize::MAX; m];
    let mut used = vec![false; m];
    for _ in 0..m {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for j in (0..m).filter(|&j| assigned[j] == usize::MAX) {
            for k in (0..m).filter(|&k| !used[k]) {
                if score[(j, k)] > best.0 {
                    best = (score[(j, k)], j, k);
                }
            }
        }
        assigned[best.1] = best.2;
        used[best.2] = true;
    }
    assigned
}

/// Permutation maximizing the total score, by enumeration.
pub fn exhaustive_assignment(score: &DMatrix<f64>) -> Vec<usize> {
    let m = score.nrows();
    (0..m)
        .permutations(m)
        .map(|p| {
            let total: f64 = p.iter().enumerate().map(|(j, &k)| score[(j, k)]).sum();
            (total, p)
        })
        .fold((f64::NEG_INFINITY, Vec::new()), |best, cand| if cand.0 > best.0 { cand } else { best })
        .1
}

/// `10 log10(x)` clamped to `[-DB_CAP, DB_CAP]`.
pub fn to_db(linear: f64) -> f64 {
    if linear.is_nan() {
        return f64::NAN;
    }
    (10.0 * linear.log10()).clamp(-DB_CAP, DB_CAP)
}

/// Optimal minus achieved SINR in dB; 0 when both are infinite.
pub fn loss_db(optimal: f64, achieved: f64) -> f64 {
    if optimal == f64::INFINITY && achieved == f64::INFINITY {
        return 0.0;
    }
    to_db(optimal) - to_db(achieved)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinrBasis {
    /// Computed from the known mixing matrix and noise covariance.
    Analytic,
    /// Estimated from paired latent and observed samples.
    Empirical,
}

impl SinrBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            SinrBasis::Analytic => "analytic",
            SinrBasis::Empirical => "empirical",
        }
    }
}

/// Per-source evaluation of a demixer, indexed by true source.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport<T: Scalar> {
    pub per_source_sinr: Vec<f64>,
    pub per_source_sinr_db: Vec<f64>,
    pub optimal_sinr: Vec<f64>,
    pub sinr_loss_db: Vec<f64>,
    /// `permutation[j]` is the source recovered by demixer row `j`.
    pub permutation: Vec<usize>,
    pub phases: Vec<T>,
    pub mean_sinr_db: f64,
    pub mean_sinr_loss_db: f64,
    pub basis: SinrBasis,
}

/// Optimal SINR of every source, using the model's own covariance.
pub fn optimal_sinr<T: Scalar>(model: &GroundTruthModel<T>) -> Result<Vec<f64>> {
    let b = sinr_optimal_demix(model.mixing(), &model.covariance())?;
    (0..model.n_sources()).map(|k| sinr_k(&b.row(k), model, k)).collect()
}

/// Losses against the optimum for achieved per-source SINR values.
pub fn sinr_loss<T: Scalar>(
    achieved: &[f64],
    model: &GroundTruthModel<T>,
    permutation: Vec<usize>,
    phases: Vec<T>,
) -> Result<SinrReport<T>> {
    let m = model.n_sources();
    if achieved.len() != m || permutation.len() != m || phases.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: achieved.len(),
        });
    }
    let optimal = optimal_sinr(model)?;
    let per_source_sinr_db: Vec<f64> = achieved.iter().map(|&s| to_db(s)).collect();
    let sinr_loss_db: Vec<f64> = optimal.iter().zip(achieved).map(|(&o, &a)| loss_db(o, a)).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(SinrReport {
        per_source_sinr: achieved.to_vec(),
        mean_sinr_db: mean(&per_source_sinr_db),
        mean_sinr_loss_db: mean(&sinr_loss_db),
        per_source_sinr_db,
        optimal_sinr: optimal,
        sinr_loss_db,
        permutation,
        phases,
        basis: SinrBasis::Analytic,
    })
}

/// Scores a demixer against the model. Rows are assigned to sources by
/// matching `a_hat` against the true mixing matrix when given, otherwise
/// row `k` is taken to target source `k`.
pub fn evaluate_demixer<T: Scalar>(
    demix: &DemixMatrix<T>,
    a_hat: Option<&DMatrix<T>>,
    model: &GroundTruthModel<T>,
) -> Result<SinrReport<T>> {
    let m = model.n_sources();
    if demix.matrix().nrows() != m {
        return Err(Error::Evaluation(format!(
            "demixer has {} rows for {m} sources",
            demix.matrix().nrows()
        )));
    }
    let (permutation, phases) = match a_hat {
        Some(a_hat) => {
            let found = match_columns(a_hat, model.mixing())?;
            (found.permutation, found.phases)
        }
        None => ((0..m).collect(), vec![T::one(); m]),
    };
    let mut achieved = vec![0.0; m];
    for (j, &k) in permutation.iter().enumerate() {
        achieved[k] = sinr_k(&demix.row(j), model, k)?;
    }
    sinr_loss(&achieved, model, permutation, phases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::center;
    use crate::simulate::{draw_batch, finite_kurtosis_panel};
    use nalgebra::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iso_model(sigma2: f64) -> GroundTruthModel<f64> {
        GroundTruthModel::new(
            DMatrix::identity(2, 2),
            finite_kurtosis_panel(2),
            DMatrix::identity(2, 2).scale(sigma2),
            sigma2,
        )
        .unwrap()
    }

    #[test]
    fn optimal_demixer_for_isotropic_noise() {
        let cov = DMatrix::identity(2, 2).scale(1.25);
        let b = sinr_optimal_demix(&DMatrix::<f64>::identity(2, 2), &cov).unwrap();
        assert!((b.matrix() - DMatrix::identity(2, 2).scale(0.8)).norm() < 1e-14);
        assert_eq!(b.provenance(), Provenance::SinrOpt);
    }

    #[test]
    fn non_hermitian_covariance_is_rejected() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            sinr_optimal_demix(&DMatrix::<f64>::identity(2, 2), &cov),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn sinr_examples() {
        let model = iso_model(0.25);
        let e1 = RowDVector::from_vec(vec![1.0, 0.0]);
        assert!((sinr_k(&e1, &model, 0).unwrap() - 4.0).abs() < 1e-12);
        let b = sinr_optimal_demix(model.mixing(), &model.covariance()).unwrap();
        assert!((sinr_k(&b.row(0), &model, 0).unwrap() - 4.0).abs() < 1e-12);
        assert!(sinr_k(&e1, &model, 2).is_err());
        assert_eq!(sinr_k(&RowDVector::zeros(2), &model, 0).unwrap(), 0.0);
        assert_eq!(sinr_k(&e1, &iso_model(0.0), 0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn exact_inverse_of_noise_free_model_scores_infinity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = GroundTruthModel::<f64>::random(6, finite_kurtosis_panel(6), 3.0, 0.0, &mut rng).unwrap();
        let b = pinv_demix(model.mixing()).unwrap();
        for k in 0..6 {
            assert_eq!(sinr_k(&b.row(k), &model, k).unwrap(), f64::INFINITY);
            let mut off = b.row(k);
            off[0] += 1e-9;
            assert!(sinr_k(&off, &model, k).unwrap().is_finite());
        }
    }

    #[test]
    fn sinr_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = GroundTruthModel::<f64>::random(4, finite_kurtosis_panel(4), 3.0, 0.3, &mut rng).unwrap();
        let b = RowDVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0));
        let base = sinr_k(&b, &model, 1).unwrap();
        let scaled = sinr_k(&(&b * -2.0), &model, 1).unwrap();
        assert_eq!(base, scaled);
    }

    #[test]
    fn db_helpers() {
        assert_eq!(loss_db(4.0, 4.0), 0.0);
        assert!((loss_db(4.0, 2.0) - 10.0 * 2f64.log10()).abs() < 1e-12);
        assert_eq!(loss_db(f64::INFINITY, f64::INFINITY), 0.0);
        assert_eq!(to_db(f64::INFINITY), DB_CAP);
        assert_eq!(to_db(0.0), -DB_CAP);
    }

    #[test]
    fn match_recovers_swap_and_sign() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.1, 1.0, 0.3, 0.0, 0.4, 1.0]);
        let mut hat = a.clone();
        hat.swap_columns(0, 2);
        hat.column_mut(1).neg_mut();
        let found = match_columns(&hat, &a).unwrap();
        assert_eq!(found.permutation, vec![2, 1, 0]);
        assert_eq!(found.phases, vec![1.0, -1.0, 1.0]);
        assert!(found.max_angle_deg() < 1e-6);
        assert_eq!(found.inverse(), vec![2, 1, 0]);

        let same = match_columns(&a, &a).unwrap();
        assert_eq!(same.permutation, vec![0, 1, 2]);
        assert_eq!(same.phases, vec![1.0; 3]);
    }

    #[test]
    fn match_phases_align_complex_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = linalg::haar_unitary::<Complex<f64>, _>(3, &mut rng);
        let rot = [0.3, -2.0, 1.1].map(|t| Complex::from_polar(1.0, t));
        let hat = DMatrix::from_fn(3, 3, |i, j| a[(i, j)] * rot[j]);
        let found = match_columns(&hat, &a).unwrap();
        for j in 0..3 {
            let aligned = hat.column(j) * found.phases[j];
            assert!((aligned - a.column(j)).norm() < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_match_is_an_error() {
        let a = DMatrix::<f64>::identity(2, 2);
        let hat = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(match_columns(&hat, &a), Err(Error::Evaluation(_))));
    }

    #[test]
    fn exhaustive_assignment_beats_greedy_trap() {
        let score = DMatrix::from_row_slice(2, 2, &[0.9, 0.85, 0.8, 0.1]);
        assert_eq!(greedy_assignment(&score), vec![0, 1]);
        assert_eq!(exhaustive_assignment(&score), vec![1, 0]);
    }

    #[test]
    fn sample_covariance_examples() {
        let zeros = SampleSet::new(DMatrix::<f64>::zeros(5, 2)).unwrap();
        assert!(sample_cov(&zeros).is_err());
        assert_eq!(sample_cov(&center(DMatrix::<f64>::zeros(5, 2)).unwrap()).unwrap().norm(), 0.0);

        let x = DMatrix::from_row_slice(2, 2, &[Complex::new(1.0, 1.0), Complex::new(0.0, 2.0), Complex::new(-1.0, -1.0), Complex::new(0.0, -2.0)]);
        let cov = sample_cov(&center(x).unwrap()).unwrap();
        // E[x x^H] with x = (1+i, 2i)
        assert!((cov[(0, 0)] - Complex::new(2.0, 0.0)).norm() < 1e-15);
        assert!((cov[(0, 1)] - Complex::new(2.0, -2.0)).norm() < 1e-15);
        assert!((cov[(1, 0)] - Complex::new(2.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn paired_metrics_on_identity_model() {
        let model = GroundTruthModel::<f64>::new(
            DMatrix::identity(2, 2),
            finite_kurtosis_panel(2),
            DMatrix::zeros(2, 2),
            0.0,
        )
        .unwrap();
        let batch = draw_batch(&model, 20_000, 3).unwrap();
        let e1 = RowDVector::from_vec(vec![1.0, 0.0]);
        let e2 = RowDVector::from_vec(vec![0.0, 1.0]);
        assert!(mse_k(&e1, &batch.s, &batch.x, 0).unwrap() < 1e-20);
        assert!((mse_k(&RowDVector::zeros(2), &batch.s, &batch.x, 0).unwrap() - 1.0).abs() < 0.05);
        assert!((correlation_k(&e1, &batch.s, &batch.x, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!(correlation_k(&e2, &batch.s, &batch.x, 0).unwrap().abs() < 0.05);
        assert_eq!(correlation_k(&RowDVector::zeros(2), &batch.s, &batch.x, 0).unwrap(), 0.0);
        assert!(mse_k(&e1, &batch.s, &batch.x.rows(0, 10).into_owned(), 0).is_err());
    }

    #[test]
    fn evaluation_of_the_optimal_demixer_has_no_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = GroundTruthModel::<f64>::random(5, finite_kurtosis_panel(5), 3.0, 0.67, &mut rng).unwrap();
        let b = sinr_optimal_demix(model.mixing(), &model.covariance()).unwrap();
        let report = evaluate_demixer(&b, Some(model.mixing()), &model).unwrap();
        assert!(report.sinr_loss_db.iter().all(|l| l.abs() < 1e-9));
        let pinv = pinv_demix(model.mixing()).unwrap();
        let report = evaluate_demixer(&pinv, None, &model).unwrap();
        assert!(report.mean_sinr_loss_db > 0.0);
        assert!(report.sinr_loss_db.iter().all(|&l| l >= -1e-9));
    }
}
