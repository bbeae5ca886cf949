//! Small vector kernels with a fixed summation order.
//!
//! All reductions use eight independent accumulators combined in a fixed
//! tree, so results are bitwise reproducible and the loops vectorize.

#[inline]
fn combine(acc: [f64; 8]) -> f64 {
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    combine(acc) + tail
}

/// `Σ a_i w_i b_i`.
pub fn wdot(a: &[f64], w: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert_eq!(a.len(), w.len());
    let mut acc = [0.0f64; 8];
    let n8 = a.len() / 8 * 8;
    for i in (0..n8).step_by(8) {
        for k in 0..8 {
            acc[k] += a[i + k] * w[i + k] * b[i + k];
        }
    }
    let mut tail = 0.0;
    for i in n8..a.len() {
        tail += a[i] * w[i] * b[i];
    }
    combine(acc) + tail
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

/// Row-major dense matrix-vector product `y = A x`, `A` is `rows × x.len()`.
/// Each `y_i` equals `dot(A_i, x)` bitwise, whichever kernel runs.
pub fn matvec(a: &[f64], x: &[f64], y: &mut [f64]) {
    assert_eq!(a.len(), y.len() * x.len());
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the feature was just detected.
        unsafe { matvec_avx2(a, x, y) };
        return;
    }
    matvec_rows(a, x, y);
}

/// Same code as `matvec_rows` with 256-bit lanes. FMA stays disabled so
/// the rounding matches the portable build.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn matvec_avx2(a: &[f64], x: &[f64], y: &mut [f64]) {
    matvec_rows(a, x, y);
}

#[inline(always)]
fn matvec_rows(a: &[f64], x: &[f64], y: &mut [f64]) {
    let n = x.len();
    let n8 = n / 8 * 8;
    let mut rows = a.chunks_exact(n);
    let mut out = y.chunks_exact_mut(2);
    // two rows per pass share the loads of x
    for yy in &mut out {
        let (r0, r1) = (rows.next().unwrap(), rows.next().unwrap());
        let mut s0 = [0.0f64; 8];
        let mut s1 = [0.0f64; 8];
        for i in (0..n8).step_by(8) {
            let xv = &x[i..i + 8];
            let (a0, a1) = (&r0[i..i + 8], &r1[i..i + 8]);
            for k in 0..8 {
                s0[k] += a0[k] * xv[k];
                s1[k] += a1[k] * xv[k];
            }
        }
        let (mut t0, mut t1) = (0.0, 0.0);
        for i in n8..n {
            t0 += r0[i] * x[i];
            t1 += r1[i] * x[i];
        }
        yy[0] = combine(s0) + t0;
        yy[1] = combine(s1) + t1;
    }
    for (yi, row) in out.into_remainder().iter_mut().zip(rows) {
        *yi = dot(row, x);
    }
}

/// `C = Aᵀ B` for column-major `A` (`rows × ca`) and `B` (`rows × cb`);
/// returns column-major `ca × cb`.
pub fn gemm_tn(a: &[f64], b: &[f64], rows: usize, ca: usize, cb: usize) -> Vec<f64> {
    assert_eq!(a.len(), rows * ca);
    assert_eq!(b.len(), rows * cb);
    let mut c = vec![0.0; ca * cb];
    if ca == 0 || cb == 0 {
        return c;
    }
    // SAFETY: bounds follow from the asserted lengths and the strides below.
    unsafe {
        matrixmultiply::dgemm(
            ca,
            rows,
            cb,
            1.0,
            a.as_ptr(),
            rows as isize,
            1,
            b.as_ptr(),
            1,
            rows as isize,
            0.0,
            c.as_mut_ptr(),
            1,
            ca as isize,
        );
    }
    c
}

/// `C = A B` for column-major `A` (`rows × k`) and `B` (`k × cols`).
pub fn gemm_nn(a: &[f64], b: &[f64], rows: usize, k: usize, cols: usize) -> Vec<f64> {
    assert_eq!(a.len(), rows * k);
    assert_eq!(b.len(), k * cols);
    let mut c = vec![0.0; rows * cols];
    if rows == 0 || cols == 0 || k == 0 {
        return c;
    }
    // SAFETY: as above.
    unsafe {
        matrixmultiply::dgemm(
            rows,
            k,
            cols,
            1.0,
            a.as_ptr(),
            1,
            rows as isize,
            b.as_ptr(),
            1,
            k as isize,
            0.0,
            c.as_mut_ptr(),
            1,
            rows as isize,
        );
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..37).map(|i| (i as f64 * 0.11).cos()).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-13);
        let w = vec![2.0; 37];
        assert!((wdot(&a, &w, &b) - 2.0 * naive).abs() < 1e-13);
    }

    #[test]
    fn matvec_small() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut y = [0.0; 2];
        matvec(&a, &[1.0, 0.0, -1.0], &mut y);
        assert_eq!(y, [-2.0, -2.0]);
    }

    #[test]
    fn matvec_rows_equal_dot_bitwise() {
        for (rows, cols) in [(1, 1), (3, 7), (5, 19), (8, 64), (13, 130)] {
            let a: Vec<f64> = (0..rows * cols).map(|i| (i as f64 * 0.713).sin()).collect();
            let x: Vec<f64> = (0..cols).map(|i| (i as f64 * 1.37).cos()).collect();
            let mut y = vec![0.0; rows];
            matvec(&a, &x, &mut y);
            let mut z = vec![0.0; rows];
            matvec_rows(&a, &x, &mut z);
            for (i, row) in a.chunks_exact(cols).enumerate() {
                assert_eq!(y[i].to_bits(), dot(row, &x).to_bits());
                assert_eq!(z[i].to_bits(), y[i].to_bits());
            }
        }
    }

    #[test]
    fn gemm_shapes() {
        // A = [[1,2],[3,4],[5,6]] column-major
        let a = [1.0, 3.0, 5.0, 2.0, 4.0, 6.0];
        let ata = gemm_tn(&a, &a, 3, 2, 2);
        assert_eq!(ata, vec![35.0, 44.0, 44.0, 56.0]);
        let b = [1.0, -1.0];
        assert_eq!(gemm_nn(&a, &b, 3, 2, 1), vec![-1.0, -1.0, -1.0]);
    }
}
