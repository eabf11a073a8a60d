//! Ground-truth models and sample batches for the noisy ICA model
//! `X = A S + eta`.
//!
//! Mixing matrices come from a reverse SVD with Haar factors, noise is
//! Gaussian with the malaligned covariance `p (10 I - A A^H)`, and sources
//! are drawn from a fixed panel of standardized non-Gaussian families.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StudentT};

use crate::cumulants::AnalyticOracle;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Scale of the identity in the noise covariance `p (10 I - A A^H)`.
pub const NOISE_CEILING: f64 = 10.0;
/// Tolerance on the smallest eigenvalue of a noise covariance.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceFamily {
    Laplace,
    Bernoulli(f64),
    StudentT(u32),
    Exponential,
    Uniform,
}

/// A standardized (zero-mean, unit-variance) source distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    family: SourceFamily,
}

impl SourceSpec {
    pub fn new(family: SourceFamily) -> Result<Self> {
        match family {
            SourceFamily::Bernoulli(p) if !(p > 0.0 && p < 1.0) => Err(Error::InvalidInput(format!(
                "bernoulli parameter must lie in (0, 1), got {p}"
            ))),
            SourceFamily::StudentT(dof) if dof <= 2 => Err(Error::InvalidInput(format!(
                "student t needs more than 2 degrees of freedom for a finite variance, got {dof}"
            ))),
            _ => Ok(Self { family }),
        }
    }

    pub fn laplace() -> Self {
        Self { family: SourceFamily::Laplace }
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(SourceFamily::Bernoulli(p))
    }

    pub fn student_t(dof: u32) -> Result<Self> {
        Self::new(SourceFamily::StudentT(dof))
    }

    pub fn exponential() -> Self {
        Self { family: SourceFamily::Exponential }
    }

    pub fn uniform() -> Self {
        Self { family: SourceFamily::Uniform }
    }

    pub fn family(&self) -> SourceFamily {
        self.family
    }

    /// Sources are always centered and scaled to unit variance.
    pub fn standardized(&self) -> bool {
        true
    }

    /// Fourth cumulant of the standardized distribution, absent when the
    /// fourth moment is infinite.
    pub fn kappa4_closed_form(&self) -> Option<f64> {
        match self.family {
            SourceFamily::Laplace => Some(3.0),
            SourceFamily::Bernoulli(p) => {
                let pq = p * (1.0 - p);
                Some((1.0 - 6.0 * pq) / pq)
            }
            SourceFamily::StudentT(dof) if dof > 4 => Some(6.0 / (dof as f64 - 4.0)),
            SourceFamily::StudentT(_) => None,
            SourceFamily::Exponential => Some(6.0),
            SourceFamily::Uniform => Some(-1.2),
        }
    }

    /// Appends `count` i.i.d. draws to `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, count: usize, rng: &mut R, out: &mut Vec<f64>) {
        out.reserve(count);
        match self.family {
            SourceFamily::Laplace => {
                let b = std::f64::consts::FRAC_1_SQRT_2;
                out.extend((0..count).map(|_| {
                    let e: f64 = Exp1.sample(rng);
                    if rng.gen::<bool>() {
                        b * e
                    } else {
                        -b * e
                    }
                }));
            }
            SourceFamily::Bernoulli(p) => {
                let sd = (p * (1.0 - p)).sqrt();
                let (hi, lo) = ((1.0 - p) / sd, -p / sd);
                out.extend((0..count).map(|_| if rng.gen::<f64>() < p { hi } else { lo }));
            }
            SourceFamily::StudentT(dof) => {
                let nu = dof as f64;
                let dist = StudentT::new(nu).expect("validated degrees of freedom");
                let scale = ((nu - 2.0) / nu).sqrt();
                out.extend((0..count).map(|_| scale * dist.sample(rng)));
            }
            SourceFamily::Exponential => {
                out.extend((0..count).map(|_| {
                    let e: f64 = Exp1.sample(rng);
                    e - 1.0
                }));
            }
            SourceFamily::Uniform => {
                let h = 3f64.sqrt();
                out.extend((0..count).map(|_| rng.gen_range(-h..h)));
            }
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            SourceFamily::Laplace => write!(f, "laplace"),
            SourceFamily::Bernoulli(p) => write!(f, "bernoulli({p})"),
            SourceFamily::StudentT(dof) => write!(f, "t({dof})"),
            SourceFamily::Exponential => write!(f, "exponential"),
            SourceFamily::Uniform => write!(f, "uniform"),
        }
    }
}

impl FromStr for SourceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let arg = |name: &str| -> Option<&str> {
            s.strip_prefix(name)
                .and_then(|rest| rest.strip_prefix('('))
                .and_then(|rest| rest.strip_suffix(')'))
        };
        let bad = || Error::InvalidInput(format!("unknown source spec '{s}'"));
        match s.as_str() {
            "laplace" => return Ok(Self::laplace()),
            "exponential" => return Ok(Self::exponential()),
            "uniform" => return Ok(Self::uniform()),
            _ => {}
        }
        if let Some(p) = arg("bernoulli") {
            return Self::bernoulli(p.trim().parse().map_err(|_| bad())?);
        }
        if let Some(d) = arg("t").or_else(|| arg("student_t")) {
            return Self::student_t(d.trim().parse().map_err(|_| bad())?);
        }
        Err(bad())
    }
}

/// `count` i.i.d. draws of a source.
pub fn sample_source<R: Rng + ?Sized>(spec: &SourceSpec, count: usize, rng: &mut R) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let mut out = Vec::new();
    spec.sample_into(count, rng, &mut out);
    Ok(out)
}

fn benchmark_families() -> [SourceSpec; 7] {
    [
        SourceSpec::laplace(),
        SourceSpec { family: SourceFamily::Bernoulli(0.05) },
        SourceSpec { family: SourceFamily::Bernoulli(0.5) },
        SourceSpec { family: SourceFamily::StudentT(3) },
        SourceSpec { family: SourceFamily::StudentT(5) },
        SourceSpec::exponential(),
        SourceSpec::uniform(),
    ]
}

/// The seven-family panel, cycled (or truncated) to `n_dims` entries.
pub fn default_source_panel(n_dims: usize) -> Vec<SourceSpec> {
    benchmark_families().into_iter().cycle().take(n_dims).collect()
}

/// The panel without `t(3)`, so every source has a closed-form cumulant.
pub fn finite_kurtosis_panel(n_dims: usize) -> Vec<SourceSpec> {
    benchmark_families()
        .into_iter()
        .filter(|s| s.kappa4_closed_form().is_some())
        .cycle()
        .take(n_dims)
        .collect()
}

/// `A = U diag(s) V^H` with Haar `U`, `V`, smallest singular value 1,
/// largest `cond`, and the rest i.i.d. uniform in between. With `m = 1` the
/// only singular value is 1.
pub fn random_mixing<T: Scalar, R: Rng + ?Sized>(n: usize, m: usize, cond: f64, rng: &mut R) -> Result<DMatrix<T>> {
    if m < 1 || n < m {
        return Err(Error::InvalidInput(format!(
            "mixing shape needs n >= m >= 1, got n = {n}, m = {m}"
        )));
    }
    if !(cond >= 1.0 && cond.is_finite()) {
        return Err(Error::InvalidInput(format!("condition number must be >= 1, got {cond}")));
    }
    let u = linalg::haar_unitary::<T, R>(n, rng);
    let v = linalg::haar_unitary::<T, R>(m, rng);
    let mut sv = vec![1.0; m];
    if m >= 2 {
        sv[m - 1] = cond;
        for s in sv.iter_mut().take(m - 1).skip(1) {
            *s = if cond > 1.0 { rng.gen_range(1.0..cond) } else { 1.0 };
        }
    }
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(m, sv.iter().map(|&s| T::from_real(s))));
    Ok(u.columns(0, m) * lambda * v.adjoint())
}

/// `p (10 I - A A^H)`, checked to be positive semidefinite.
pub fn noise_cov<T: Scalar>(a: &DMatrix<T>, p: f64) -> Result<DMatrix<T>> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("noise power must be finite and >= 0, got {p}")));
    }
    let n = a.nrows();
    let base = DMatrix::<T>::identity(n, n).scale(NOISE_CEILING) - a * a.adjoint();
    let base = linalg::hermitian_part(&base);
    let min_eig = linalg::hermitian_eigen(&base).0.min();
    if min_eig < -PSD_TOLERANCE {
        return Err(Error::ModelConstruction(format!(
            "10 I - A A^H is not positive semidefinite (min eigenvalue {min_eig:.3e}); the largest singular value of A must not exceed sqrt(10)"
        )));
    }
    Ok(base.scale(p))
}

/// Known model `X = A S + eta` with unit-variance independent sources and
/// Gaussian noise of covariance `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthModel<T: Scalar> {
    a: DMatrix<T>,
    sources: Vec<SourceSpec>,
    sigma: DMatrix<T>,
    noise_power: f64,
    /// `F` with `F F^H = sigma`.
    noise_factor: DMatrix<T>,
}

impl<T: Scalar> GroundTruthModel<T> {
    pub fn new(a: DMatrix<T>, sources: Vec<SourceSpec>, sigma: DMatrix<T>, noise_power: f64) -> Result<Self> {
        let (n, m) = a.shape();
        if sources.len() != m {
            return Err(Error::ModelConstruction(format!(
                "{m} mixing columns but {} sources",
                sources.len()
            )));
        }
        if sigma.shape() != (n, n) {
            return Err(Error::ModelConstruction(format!(
                "noise covariance must be {n}x{n}, got {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if a.iter().chain(sigma.iter()).any(|x| !x.modulus().is_finite()) {
            return Err(Error::ModelConstruction("model has non-finite entries".into()));
        }
        let scale = linalg::max_abs(&sigma).max(1.0);
        if linalg::relative_asymmetry(&sigma) > 1e-10 {
            return Err(Error::ModelConstruction("noise covariance is not Hermitian".into()));
        }
        let sigma = linalg::hermitian_part(&sigma);
        let (eig, vecs) = linalg::hermitian_eigen(&sigma);
        if eig.min() < -PSD_TOLERANCE * scale {
            return Err(Error::ModelConstruction(format!(
                "noise covariance has negative eigenvalue {:.3e}",
                eig.min()
            )));
        }
        let roots = DVector::from_iterator(n, eig.iter().map(|&l| T::from_real(l.max(0.0).sqrt())));
        let noise_factor = vecs * DMatrix::from_diagonal(&roots);
        Ok(Self {
            a,
            sources,
            sigma,
            noise_power,
            noise_factor,
        })
    }

    /// Random model: `A` from [`random_mixing`], `sigma = p (10 I - A A^H)`.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        sources: Vec<SourceSpec>,
        cond: f64,
        noise_power: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let a = random_mixing::<T, R>(n, sources.len(), cond, rng)?;
        let sigma = noise_cov(&a, noise_power)?;
        Self::new(a, sources, sigma, noise_power)
    }

    pub fn mixing(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn sources(&self) -> &[SourceSpec] {
        &self.sources
    }

    pub fn noise_cov(&self) -> &DMatrix<T> {
        &self.sigma
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_sources(&self) -> usize {
        self.a.ncols()
    }

    /// `cov(X) = A A^H + sigma`.
    pub fn covariance(&self) -> DMatrix<T> {
        linalg::hermitian_part(&(&self.a * self.a.adjoint() + &self.sigma))
    }

    /// Exact cumulant oracle; fails when a source lacks a finite fourth moment.
    pub fn analytic_oracle(&self) -> Result<AnalyticOracle<T>> {
        let kappas = self
            .sources
            .iter()
            .map(|s| {
                s.kappa4_closed_form().ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "source {s} has no finite fourth moment; use the empirical oracle"
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        AnalyticOracle::with_real_sources(self.a.clone(), &kappas)
    }
}

/// Observed samples with the latent sources that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawBatch<T: Scalar> {
    /// `N x n`
    pub x: DMatrix<T>,
    /// `N x m`
    pub s: DMatrix<T>,
    pub seed: u64,
}

/// Draws `count` samples of the model from a generator seeded with `seed`.
/// Sources are drawn column by column, then the noise.
pub fn draw_batch<T: Scalar>(model: &GroundTruthModel<T>, count: usize, seed: u64) -> Result<DrawBatch<T>> {
    if count == 0 {
        return Err(Error::InvalidInput("batch size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = model.n_sources();
    let n = model.dim();
    let mut raw = Vec::with_capacity(count * m);
    for spec in &model.sources {
        spec.sample_into(count, &mut rng, &mut raw);
    }
    let s = DMatrix::from_iterator(count, m, raw.into_iter().map(T::from_real));
    let mut x = &s * model.a.transpose();
    if model.sigma.iter().any(|v| *v != T::zero()) {
        let z = DMatrix::from_iterator(count, n, (0..count * n).map(|_| T::standard_normal(&mut rng)));
        x += z * model.noise_factor.transpose();
    }
    Ok(DrawBatch { x, s, seed })
}

/// Deterministic child seed for a labelled sub-stream, e.g.
/// `derive_seed(master, &[trial, purpose])`.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix(master), |acc, &l| splitmix(acc ^ splitmix(l.wrapping_add(0x632b_e59b_d9b4_e019))))
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
