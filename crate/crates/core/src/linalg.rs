//! Small dense row-major matrix kernels.
//!
//! All kernels fix the inner summation order per output element, so results
//! are bit-identical regardless of thread count or how callers chunk their
//! batches. Parallelism only ever splits over output rows.

use rayon::prelude::*;

/// Dense row-major matrix owning its storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len());
        Mat { rows, cols, data }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

const LANES: usize = 8;

/// Dot product over fixed 8-lane accumulator arrays. The lane structure (two
/// independent accumulator blocks) keeps the summation order fixed while
/// letting the compiler emit packed fused multiply-adds.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc0 = [0.0f64; LANES];
    let mut acc1 = [0.0f64; LANES];
    let mut ca = a.chunks_exact(2 * LANES);
    let mut cb = b.chunks_exact(2 * LANES);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for l in 0..LANES {
            acc0[l] = f64::mul_add(xa[l], xb[l], acc0[l]);
        }
        for l in 0..LANES {
            acc1[l] = f64::mul_add(xa[LANES + l], xb[LANES + l], acc1[l]);
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail = f64::mul_add(*x, *y, tail);
    }
    let mut total = tail;
    for l in 0..LANES {
        total += acc0[l] + acc1[l];
    }
    total
}

/// `y += alpha * x` over slices.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    let mut cx = x.chunks_exact(LANES);
    let mut cy = y.chunks_exact_mut(LANES);
    for (xs, ys) in (&mut cx).zip(&mut cy) {
        for l in 0..LANES {
            ys[l] = f64::mul_add(alpha, xs[l], ys[l]);
        }
    }
    for (xi, yi) in cx.remainder().iter().zip(cy.into_remainder()) {
        *yi = f64::mul_add(alpha, *xi, *yi);
    }
}

/// Rows below which row-parallel kernels stay sequential.
const PAR_ROW_THRESHOLD: usize = 512;

/// out = A * B^T; A is n x k, B is m x k, out is n x m.
pub fn matmul_nt(a: &[f64], b: &[f64], out: &mut [f64], n: usize, k: usize, m: usize) {
    debug_assert_eq!(a.len(), n * k);
    debug_assert_eq!(b.len(), m * k);
    debug_assert_eq!(out.len(), n * m);
    let run = |(i, out_row): (usize, &mut [f64])| {
        let a_row = &a[i * k..(i + 1) * k];
        for (j, o) in out_row.iter_mut().enumerate() {
            *o = dot(a_row, &b[j * k..(j + 1) * k]);
        }
    };
    if n >= PAR_ROW_THRESHOLD && rayon::current_num_threads() > 1 {
        out.par_chunks_mut(m).enumerate().for_each(run);
    } else {
        out.chunks_mut(m).enumerate().for_each(run);
    }
}

/// out = A * B; A is n x k, B is k x m, out is n x m.
/// Row-accumulate form: out[i] = sum_l A[i][l] * B[l], fixed l order.
pub fn matmul_nn(a: &[f64], b: &[f64], out: &mut [f64], n: usize, k: usize, m: usize) {
    debug_assert_eq!(a.len(), n * k);
    debug_assert_eq!(b.len(), k * m);
    debug_assert_eq!(out.len(), n * m);
    let run = |(i, out_row): (usize, &mut [f64])| {
        out_row.fill(0.0);
        let a_row = &a[i * k..(i + 1) * k];
        for (l, &alv) in a_row.iter().enumerate() {
            if alv != 0.0 {
                axpy(alv, &b[l * m..(l + 1) * m], out_row);
            }
        }
    };
    if n >= PAR_ROW_THRESHOLD && rayon::current_num_threads() > 1 {
        out.par_chunks_mut(m).enumerate().for_each(run);
    } else {
        out.chunks_mut(m).enumerate().for_each(run);
    }
}

/// out += A^T * B; A is n x k, B is n x m, out is k x m.
/// Used for weight gradients: parallel over rows of `out`, the batch
/// dimension n always sums in index order.
pub fn matmul_tn_acc(a: &[f64], b: &[f64], out: &mut [f64], n: usize, k: usize, m: usize) {
    debug_assert_eq!(a.len(), n * k);
    debug_assert_eq!(b.len(), n * m);
    debug_assert_eq!(out.len(), k * m);
    let run = |(j, out_row): (usize, &mut [f64])| {
        for i in 0..n {
            let w = a[i * k + j];
            if w != 0.0 {
                axpy(w, &b[i * m..(i + 1) * m], out_row);
            }
        }
    };
    if k >= PAR_ROW_THRESHOLD && rayon::current_num_threads() > 1 {
        out.par_chunks_mut(m).enumerate().for_each(run);
    } else {
        out.chunks_mut(m).enumerate().for_each(run);
    }
}
