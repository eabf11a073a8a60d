//! Chunked, deterministic reductions over the rows of a sample matrix.
//!
//! Rows are split into fixed-size chunks. Each chunk is summed directly and
//! the chunk partials are combined with a pairwise tree, so the result does
//! not depend on thread scheduling and rounding error grows like
//! `CHUNK + log(N / CHUNK)` rather than `N`.

use std::ops::Range;

use rayon::prelude::*;

use crate::scalar::Scalar;

pub(crate) const CHUNK: usize = 2048;

/// Maps every row chunk to a partial and merges the partials pairwise.
pub(crate) fn reduce_rows<A, M, G>(rows: usize, map: M, merge: G) -> Option<A>
where
    A: Send,
    M: Fn(Range<usize>) -> A + Sync,
    G: Fn(A, A) -> A,
{
    let chunks = rows.div_ceil(CHUNK);
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| map(c * CHUNK..((c + 1) * CHUNK).min(rows)))
        .collect();
    pairwise(partials, &merge)
}

fn pairwise<A, G: Fn(A, A) -> A>(mut v: Vec<A>, merge: &G) -> Option<A> {
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(merge(a, b)),
                None => next.push(a),
            }
        }
        v = next;
    }
    v.pop()
}

/// Pairwise sum of a slice.
#[cfg(test)]
pub(crate) fn sum<T: Scalar>(values: &[T]) -> T {
    reduce_rows(
        values.len(),
        |r| values[r].iter().fold(T::zero(), |a, &b| a + b),
        |a, b| a + b,
    )
    .unwrap_or_else(T::zero)
}

/// Pairwise mean of `g(x)` over a slice.
pub(crate) fn mean_of<T: Scalar, U: Scalar, F: Fn(T) -> U + Sync>(values: &[T], g: F) -> U {
    let total = reduce_rows(
        values.len(),
        |r| values[r].iter().fold(U::zero(), |a, &b| a + g(b)),
        |a, b| a + b,
    )
    .unwrap_or_else(U::zero);
    total.unscale(values.len() as f64)
}

/// Elementwise vector sum used to merge vector-valued partials.
pub(crate) fn add_vecs<T: Scalar>(mut a: Vec<T>, b: Vec<T>) -> Vec<T> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Column-major view of an `rows x cols` sample matrix.
#[derive(Clone, Copy)]
pub(crate) struct Columns<'a, T> {
    pub data: &'a [T],
    pub rows: usize,
    pub cols: usize,
}

impl<'a, T: Scalar> Columns<'a, T> {
    pub fn col(&self, j: usize) -> &'a [T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `out[t] = sum_j w[j] * x[t, j]` for rows `r`.
    pub fn project(&self, w: &[T], r: Range<usize>, out: &mut Vec<T>) {
        out.clear();
        out.resize(r.len(), T::zero());
        for (j, &wj) in w.iter().enumerate() {
            let col = &self.col(j)[r.clone()];
            for (o, &x) in out.iter_mut().zip(col) {
                *o += wj * x;
            }
        }
    }

    /// Two weighted column sums in a single sweep over the columns; the
    /// first `cols` entries use `w1`, the next `cols` use `w2`.
    pub fn weighted_col_sums2(&self, w1: &[T], w2: &[T], r: Range<usize>) -> Vec<T> {
        let mut first = Vec::with_capacity(2 * self.cols);
        let mut second = Vec::with_capacity(self.cols);
        for j in 0..self.cols {
            let (a, b) = dot2(w1, w2, &self.col(j)[r.clone()]);
            first.push(a);
            second.push(b);
        }
        first.extend(second);
        first
    }

    /// Upper triangle (column-major, `k <= j`) of
    /// `sum_t weights[t] * conj(x[t, k]) * x[t, j]` over rows `r`, or of
    /// `sum_t weights[t] * x[t, k] * x[t, j]` when `conj_left` is false.
    /// `weights = None` means unit weights.
    pub fn weighted_gram_upper(
        &self,
        weights: Option<&[f64]>,
        conj_left: bool,
        r: Range<usize>,
    ) -> Vec<T> {
        let n = self.cols;
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        let mut scratch: Vec<T> = Vec::with_capacity(r.len());
        for j in 0..n {
            let cj = &self.col(j)[r.clone()];
            scratch.clear();
            match weights {
                Some(w) => scratch.extend(cj.iter().zip(w).map(|(&x, &wt)| x.scale(wt))),
                None => scratch.extend_from_slice(cj),
            }
            for k in 0..=j {
                let ck = &self.col(k)[r.clone()];
                let s = if conj_left {
                    ck.iter()
                        .zip(&scratch)
                        .fold(T::zero(), |a, (&xk, &xj)| a + xk.conjugate() * xj)
                } else {
                    ck.iter().zip(&scratch).fold(T::zero(), |a, (&xk, &xj)| a + xk * xj)
                };
                out.push(s);
            }
        }
        out
    }
}

const LANES: usize = 4;

/// `sum_t a[t] * b[t]` with independent lane accumulators so the loop
/// vectorizes; the lane order is fixed, so the result is deterministic.
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..LANES {
            acc[l] += x[l] * y[l];
        }
    }
    let tail = ra.iter().zip(rb).fold(T::zero(), |s, (&x, &y)| s + x * y);
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `(sum_t a[t] * c[t], sum_t b[t] * c[t])` in one sweep over `c`.
pub(crate) fn dot2<T: Scalar>(a: &[T], b: &[T], c: &[T]) -> (T, T) {
    let mut acc_a = [T::zero(); LANES];
    let mut acc_b = [T::zero(); LANES];
    let n = c.len() - c.len() % LANES;
    for t in (0..n).step_by(LANES) {
        for l in 0..LANES {
            acc_a[l] += a[t + l] * c[t + l];
            acc_b[l] += b[t + l] * c[t + l];
        }
    }
    let mut tail = (T::zero(), T::zero());
    for t in n..c.len() {
        tail.0 += a[t] * c[t];
        tail.1 += b[t] * c[t];
    }
    (
        (acc_a[0] + acc_a[1]) + (acc_a[2] + acc_a[3]) + tail.0,
        (acc_b[0] + acc_b[1]) + (acc_b[2] + acc_b[3]) + tail.1,
    )
}

/// Expands an upper triangle produced by [`Columns::weighted_gram_upper`]
/// into a full Hermitian (`hermitian = true`) or symmetric matrix.
pub(crate) fn expand_upper<T: Scalar>(n: usize, upper: &[T], hermitian: bool) -> nalgebra::DMatrix<T> {
    let mut m = nalgebra::DMatrix::<T>::zeros(n, n);
    let mut idx = 0;
    for j in 0..n {
        for k in 0..=j {
            m[(k, j)] = upper[idx];
            m[(j, k)] = if hermitian { upper[idx].conjugate() } else { upper[idx] };
            idx += 1;
        }
    }
    m
}
