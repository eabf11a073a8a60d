//! Scalar fields supported by the estimators: `f64` and `Complex<f64>`.

use nalgebra::{ComplexField, Complex};
use rand::Rng;
use rand_distr::StandardNormal;

/// Which scalar field a sample set or model lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Real,
    Complex,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Real => "real",
            FieldKind::Complex => "complex",
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "real" => Ok(FieldKind::Real),
            "complex" => Ok(FieldKind::Complex),
            other => Err(format!("unknown field `{other}` (expected real or complex)")),
        }
    }
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A scalar usable for observations, mixing matrices and demixers.
///
/// Inner products follow `<x, u> = sum_j x_j conj(u_j)`, so every formula is
/// written once and specializes to the real case where `conj` is the identity.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const FIELD: FieldKind;

    /// Scale of the Hessian operator relative to the pseudo-metric:
    /// `C = (1/HESS_SCALE) * sum_k H(e_k)`. 12 for the real Hessian of `f`,
    /// 4 for the complex Hessian of `f*`.
    const HESS_SCALE: f64;

    /// Standard normal draw; complex draws are circular with `E|z|^2 = 1`.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn from_parts(re: f64, im: f64) -> Self;

    fn re(self) -> f64;

    fn im(self) -> f64;
}

impl Scalar for f64 {
    const FIELD: FieldKind = FieldKind::Real;
    const HESS_SCALE: f64 = 12.0;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    fn re(self) -> f64 {
        self
    }

    fn im(self) -> f64 {
        0.0
    }
}

impl Scalar for Complex<f64> {
    const FIELD: FieldKind = FieldKind::Complex;
    const HESS_SCALE: f64 = 4.0;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    fn from_parts(re: f64, im: f64) -> Self {
        Complex::new(re, im)
    }

    fn re(self) -> f64 {
        self.re
    }

    fn im(self) -> f64 {
        self.im
    }
}
