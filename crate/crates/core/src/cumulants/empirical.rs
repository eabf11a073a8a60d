use nalgebra::{DMatrix, DVector};

use super::moments::{add_vecs, dot, expand_upper, reduce_rows};
use super::{check_dim, CumulantOracle, SampleSet};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Plug-in estimator of the cumulant functionals from centered samples.
///
/// Every evaluation is a single pass over the data: the gradient and Hessian
/// are the exact derivatives of the sample-moment version of `f`, so no
/// fourth-order tensor is ever materialized.
#[derive(Debug, Clone)]
pub struct EmpiricalOracle<T: Scalar> {
    samples: SampleSet<T>,
    /// `E[conj(x) x^T]`
    second_moment: DMatrix<T>,
}

impl<T: Scalar> EmpiricalOracle<T> {
    pub fn new(samples: SampleSet<T>) -> Result<Self> {
        if !samples.is_centered() {
            return Err(Error::Precondition(
                "empirical cumulants need centered samples".into(),
            ));
        }
        if samples.len() < 4 {
            return Err(Error::InsufficientData(format!(
                "fourth cumulants need at least 4 samples, got {}",
                samples.len()
            )));
        }
        let second_moment = gram(&samples, None, true);
        Ok(Self {
            samples,
            second_moment,
        })
    }

    pub fn samples(&self) -> &SampleSet<T> {
        &self.samples
    }

    pub fn into_samples(self) -> SampleSet<T> {
        self.samples
    }

    fn n_samples(&self) -> f64 {
        self.samples.len() as f64
    }

    /// Sums of `y^2`, `y^4`, `|y|^2`, `|y|^4` for `y = <x, u>`.
    fn scalar_moments(&self, u: &DVector<T>) -> Result<[T; 4]> {
        check_dim(self.dim(), u.len())?;
        let cols = self.samples.columns();
        let w: Vec<T> = u.iter().map(|x| x.conjugate()).collect();
        let sums = reduce_rows(
            cols.rows,
            |r| {
                let mut y = Vec::new();
                cols.project(&w, r, &mut y);
                let mut acc = [T::zero(); 4];
                for &v in &y {
                    let v2 = v * v;
                    let a2 = v.modulus_squared();
                    acc[0] += v2;
                    acc[1] += v2 * v2;
                    acc[2] += T::from_real(a2);
                    acc[3] += T::from_real(a2 * a2);
                }
                acc.to_vec()
            },
            add_vecs,
        )
        .expect("non-empty sample set");
        let n = self.n_samples();
        Ok([
            sums[0].unscale(n),
            sums[1].unscale(n),
            sums[2].unscale(n),
            sums[3].unscale(n),
        ])
    }
}

/// `E[w conj(x) x^T]` (or `E[w x x^T]` when `conj_left` is false).
/// `(1/N) sum_t x_t x_t^H` over the rows of the sample matrix.
pub(crate) fn outer_moment<T: Scalar>(samples: &SampleSet<T>) -> DMatrix<T> {
    gram(samples, None, true).transpose()
}

fn gram<T: Scalar>(samples: &SampleSet<T>, row_weight: Option<&(dyn Fn(&[T], usize) -> f64 + Sync)>, conj_left: bool) -> DMatrix<T> {
    let cols = samples.columns();
    let n = cols.cols;
    let upper = reduce_rows(
        cols.rows,
        |r| match row_weight {
            Some(wf) => {
                let weights: Vec<f64> = r.clone().map(|t| wf(cols.data, t)).collect();
                cols.weighted_gram_upper(Some(&weights), conj_left, r)
            }
            None => cols.weighted_gram_upper(None, conj_left, r),
        },
        add_vecs,
    )
    .expect("non-empty sample set");
    expand_upper(n, &upper, conj_left).unscale(samples.len() as f64)
}

impl<T: Scalar> CumulantOracle<T> for EmpiricalOracle<T> {
    fn dim(&self) -> usize {
        self.samples.dim()
    }

    fn f(&self, u: &DVector<T>) -> Result<T> {
        let [m2, m4, _, _] = self.scalar_moments(u)?;
        Ok(m4 - m2 * m2 * T::from_real(3.0))
    }

    fn f_star(&self, u: &DVector<T>) -> Result<f64> {
        let [c, _, a2, a4] = self.scalar_moments(u)?;
        Ok(a4.re() - 2.0 * a2.re() * a2.re() - c.modulus_squared())
    }

    fn grad_f(&self, u: &DVector<T>) -> Result<DVector<T>> {
        check_dim(self.dim(), u.len())?;
        let cols = self.samples.columns();
        let n = cols.cols;
        let w: Vec<T> = u.iter().map(|x| x.conjugate()).collect();
        // Layout: [sum y^2, sum y^3 x (n), sum y x (n)]
        let sums = reduce_rows(
            cols.rows,
            |r| {
                let mut y = Vec::new();
                cols.project(&w, r.clone(), &mut y);
                let y2_sum = dot(&y, &y);
                let y3: Vec<T> = y.iter().map(|&v| v * v * v).collect();
                let mut out = Vec::with_capacity(1 + 2 * n);
                out.push(y2_sum);
                out.extend(cols.weighted_col_sums2(&y3, &y, r));
                out
            },
            add_vecs,
        )
        .expect("non-empty sample set");
        let inv_n = 1.0 / self.n_samples();
        let m2 = sums[0].scale(inv_n);
        Ok(DVector::from_fn(n, |j, _| {
            let y3x = sums[1 + j].scale(inv_n);
            let yx = sums[1 + n + j].scale(inv_n);
            y3x.scale(4.0) - m2 * yx * T::from_real(12.0)
        }))
    }

    fn hess_fstar(&self, u: &DVector<T>) -> Result<DMatrix<T>> {
        check_dim(self.dim(), u.len())?;
        let cols = self.samples.columns();
        let n = cols.cols;
        let w: Vec<T> = u.iter().map(|x| x.conjugate()).collect();
        // Layout: [sum |y|^2, sum y x (n), sum conj(y) x (n), gram upper]
        let sums = reduce_rows(
            cols.rows,
            |r| {
                let mut y = Vec::new();
                cols.project(&w, r.clone(), &mut y);
                let abs2: Vec<f64> = y.iter().map(|v| v.modulus_squared()).collect();
                let y_conj: Vec<T> = y.iter().map(|v| v.conjugate()).collect();
                let mut out = Vec::with_capacity(1 + 2 * n + n * (n + 1) / 2);
                out.push(T::from_real(abs2.iter().sum()));
                out.extend(cols.weighted_col_sums2(&y, &y_conj, r.clone()));
                out.extend(cols.weighted_gram_upper(Some(&abs2), true, r));
                out
            },
            add_vecs,
        )
        .expect("non-empty sample set");
        let inv_n = 1.0 / self.n_samples();
        let m2 = sums[0].scale(inv_n);
        // p_k = E[y x_k], q_k = E[y conj(x_k)] = conj(E[conj(y) x_k])
        let p = DVector::from_fn(n, |k, _| sums[1 + k].scale(inv_n));
        let q = DVector::from_fn(n, |k, _| sums[1 + n + k].scale(inv_n).conjugate());
        let weighted = expand_upper(n, &sums[1 + 2 * n..], true).scale(inv_n);
        let core = weighted - &self.second_moment * m2 - &q * q.adjoint() - p.map(|x| x.conjugate()) * p.transpose();
        Ok(core.scale(T::HESS_SCALE))
    }

    /// One pass: `sum_k G(e_k) = E[|x|^2 conj(x) x^T] - tr(M) M - M M - conj(Q) Q`
    /// with `M = E[conj(x) x^T]` and `Q = E[x x^T]`.
    fn basis_hessian_sum(&self) -> Result<DMatrix<T>> {
        let n = self.dim();
        let row_norm = |data: &[T], t: usize| -> f64 {
            let rows = self.samples.len();
            (0..n).map(|j| data[j * rows + t].modulus_squared()).sum()
        };
        let weighted = gram(&self.samples, Some(&row_norm), true);
        let m = &self.second_moment;
        let trace = m.trace();
        let pseudo = if T::FIELD == crate::scalar::FieldKind::Real {
            m.clone()
        } else {
            gram(&self.samples, None, false)
        };
        let core = weighted - m * trace - m * m - pseudo.map(|x| x.conjugate()) * &pseudo;
        Ok(core.scale(T::HESS_SCALE))
    }

    /// z-score of the fourth cumulant of `y = <x, w>` against a Gaussian with
    /// the same second-order statistics. The null variance is used rather
    /// than the sample variance of the influence function, which is
    /// dominated by a few extreme draws for heavy-tailed sources.
    fn kurtosis_zscore(&self, w: &DVector<T>) -> Option<f64> {
        let [c, _, a2, a4] = self.scalar_moments(w).ok()?;
        let m2 = a2.re();
        let kappa = a4.re() - 2.0 * m2 * m2 - c.modulus_squared();
        let se = (gaussian_null_variance(m2, c.modulus()) / self.n_samples()).sqrt();
        if !(se > 0.0) {
            return Some(if kappa == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Some(kappa.abs() / se)
    }
}

/// Asymptotic variance (times `N`) of the plug-in `kappa4*` estimator of a
/// Gaussian `y` with `E|y|^2 = s` and `|E y^2| = c`.
///
/// After a phase rotation `y = a + ib` with independent `a`, `b` of variances
/// `l1 = (s + c)/2` and `l2 = (s - c)/2`, the influence function is
/// `(A + B)^2 - (6 l1 + 2 l2) A - (2 l1 + 6 l2) B` with `A = a^2`, `B = b^2`,
/// whose moments are `E A^p = (2p - 1)!! l1^p`.
pub fn gaussian_null_variance(s: f64, c: f64) -> f64 {
    const DOUBLE_FACTORIAL: [f64; 5] = [1.0, 1.0, 3.0, 15.0, 105.0];
    let l1 = 0.5 * (s + c);
    let l2 = (0.5 * (s - c)).max(0.0);
    let terms = [
        (1.0, 2, 0),
        (1.0, 0, 2),
        (2.0, 1, 1),
        (-(6.0 * l1 + 2.0 * l2), 1, 0),
        (-(2.0 * l1 + 6.0 * l2), 0, 1),
    ];
    let moment = |pa: usize, pb: usize| {
        DOUBLE_FACTORIAL[pa] * l1.powi(pa as i32) * DOUBLE_FACTORIAL[pb] * l2.powi(pb as i32)
    };
    let mean: f64 = terms.iter().map(|&(k, pa, pb)| k * moment(pa, pb)).sum();
    let second: f64 = terms
        .iter()
        .flat_map(|&(k1, a1, b1)| terms.iter().map(move |&(k2, a2, b2)| k1 * k2 * moment(a1 + a2, b1 + b2)))
        .sum();
    (second - mean * mean).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::center;
    use nalgebra::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn skewed_real(n_rows: usize, dim: usize, seed: u64) -> EmpiricalOracle<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DMatrix::from_fn(n_rows, dim, |_, j| {
            let v: f64 = rng.gen();
            v.powi(j as i32 + 1) + 0.3 * rng.gen::<f64>()
        });
        EmpiricalOracle::new(center(raw).unwrap()).unwrap()
    }

    fn skewed_complex(n_rows: usize, dim: usize, seed: u64) -> EmpiricalOracle<Complex<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DMatrix::from_fn(n_rows, dim, |_, j| {
            let v: f64 = rng.gen();
            Complex::new(v.powi(j as i32 + 1), rng.gen::<f64>().powi(2) * 0.5 + 0.2 * v)
        });
        EmpiricalOracle::new(center(raw).unwrap()).unwrap()
    }

    #[test]
    fn rejects_uncentered_samples() {
        let raw = DMatrix::from_element(10, 2, 1.0);
        let err = EmpiricalOracle::new(SampleSet::new(raw).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn f_matches_kappa4_of_projection() {
        let oracle = skewed_real(5000, 3, 1);
        let u = DVector::from_vec(vec![0.3, -0.5, 0.81]);
        let proj: Vec<f64> = (oracle.samples().data() * &u).iter().copied().collect();
        let direct = crate::cumulants::kappa4(&proj).unwrap();
        let via_oracle = oracle.f(&u).unwrap();
        assert!((direct - via_oracle).abs() < 1e-12 * (1.0 + direct.abs()));
        assert!((oracle.f_star(&u).unwrap() - via_oracle).abs() < 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn fused_basis_sum_matches_per_direction_hessians() {
        let oracle = skewed_real(3000, 4, 2);
        let n = 4;
        let mut slow = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut e = DVector::zeros(n);
            e[k] = 1.0;
            slow += oracle.hess_fstar(&e).unwrap();
        }
        let fast = oracle.basis_hessian_sum().unwrap();
        assert!((fast - &slow).norm() < 1e-10 * slow.norm());

        let oracle = skewed_complex(3000, 3, 3);
        let mut slow = DMatrix::zeros(3, 3);
        for k in 0..3 {
            let mut e = DVector::zeros(3);
            e[k] = Complex::new(1.0, 0.0);
            slow += oracle.hess_fstar(&e).unwrap();
        }
        let fast = oracle.basis_hessian_sum().unwrap();
        assert!((fast - &slow).norm() < 1e-10 * slow.norm());
    }

    #[test]
    fn complex_gradient_matches_real_part_finite_differences() {
        let oracle = skewed_complex(4000, 3, 4);
        let u = DVector::from_vec(vec![
            Complex::new(0.4, 0.1),
            Complex::new(-0.3, 0.6),
            Complex::new(0.2, -0.58),
        ]);
        let g = oracle.grad_f(&u).unwrap();
        let h = 1e-5;
        for j in 0..3 {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[j] += Complex::new(h, 0.0);
            dn[j] -= Complex::new(h, 0.0);
            let fd = (oracle.f(&up).unwrap() - oracle.f(&dn).unwrap()) / (2.0 * h);
            assert!((fd - g[j]).norm() < 1e-6 * (1.0 + g.norm()), "coord {j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn complex_hessian_matches_wirtinger_finite_differences() {
        // H_kj = d/du_k d/dconj(u_j) f*, with
        // d/du = (d/dx - i d/dy) / 2 and d/dconj(u) = (d/dx + i d/dy) / 2.
        let oracle = skewed_complex(4000, 2, 5);
        let u = DVector::from_vec(vec![Complex::new(0.5, -0.2), Complex::new(0.1, 0.83)]);
        let h_an = oracle.hess_fstar(&u).unwrap();
        let step = 1e-4;
        let f = |v: &DVector<Complex<f64>>| oracle.f_star(v).unwrap();
        let shift = |v: &DVector<Complex<f64>>, idx: usize, d: Complex<f64>| {
            let mut w = v.clone();
            w[idx] += d;
            w
        };
        // second derivative d^2 f / (da db) for real directions a, b
        let mixed = |k: usize, dk: Complex<f64>, j: usize, dj: Complex<f64>| {
            let pp = f(&shift(&shift(&u, k, dk * step), j, dj * step));
            let pm = f(&shift(&shift(&u, k, dk * step), j, -dj * step));
            let mp = f(&shift(&shift(&u, k, -dk * step), j, dj * step));
            let mm = f(&shift(&shift(&u, k, -dk * step), j, -dj * step));
            (pp - pm - mp + mm) / (4.0 * step * step)
        };
        let one = Complex::new(1.0, 0.0);
        let i = Complex::new(0.0, 1.0);
        for k in 0..2 {
            for j in 0..2 {
                let xx = mixed(k, one, j, one);
                let yy = mixed(k, i, j, i);
                let xy = mixed(k, one, j, i);
                let yx = mixed(k, i, j, one);
                let wirtinger = Complex::new(xx + yy, xy - yx) / 4.0;
                assert!((wirtinger - h_an[(k, j)]).norm() < 1e-5 * (1.0 + h_an.norm()), "({k},{j})");
            }
        }
    }

    #[test]
    fn gaussian_zscore_is_small_and_skewed_zscore_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let raw = DMatrix::from_fn(20_000, 2, |_, _| f64::standard_normal(&mut rng));
        let oracle = EmpiricalOracle::new(center(raw).unwrap()).unwrap();
        let z = oracle.kurtosis_zscore(&DVector::from_vec(vec![0.6, 0.8])).unwrap();
        assert!(z < 5.0, "{z}");
        let raw = DMatrix::from_fn(20_000, 1, |_, _| rng.gen_range(-1.0..1.0f64));
        let oracle = EmpiricalOracle::new(center(raw).unwrap()).unwrap();
        let z = oracle.kurtosis_zscore(&DVector::from_vec(vec![1.0])).unwrap();
        assert!(z > 20.0, "{z}");
    }

    #[test]
    fn null_variance_closed_forms() {
        // real Gaussian: 24 s^4; circular complex Gaussian: 4 s^4
        assert!((gaussian_null_variance(2.0, 2.0) - 24.0 * 16.0).abs() < 1e-9);
        assert!((gaussian_null_variance(2.0, 0.0) - 4.0 * 16.0).abs() < 1e-9);
    }

    #[test]
    fn null_variance_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (l1, l2): (f64, f64) = (1.3, 0.4);
        let (s, c) = (l1 + l2, l1 - l2);
        let reps = 400;
        let n = 2000;
        let mut estimates = Vec::with_capacity(reps);
        for _ in 0..reps {
            let y: Vec<Complex<f64>> = (0..n)
                .map(|_| {
                    Complex::new(
                        l1.sqrt() * f64::standard_normal(&mut rng),
                        l2.sqrt() * f64::standard_normal(&mut rng),
                    ) * Complex::from_polar(1.0, 0.7)
                })
                .collect();
            estimates.push(crate::cumulants::kappa4_star(&y).unwrap());
        }
        let mean = estimates.iter().sum::<f64>() / reps as f64;
        let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let predicted = gaussian_null_variance(s, c) / n as f64;
        assert!((var / predicted - 1.0).abs() < 0.2, "{var} vs {predicted}");
    }
}
