//! Thin 2-D FFT helpers over row-major complex buffers, with row-pruned
//! variants for bands whose spectra occupy few grid rows.
//!
//! Conventions: `forward` is the raw e^{-2pi i} sum (no scaling), `inverse`
//! the raw e^{+2pi i} sum; continuum Fourier coefficients are forward/N^2.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn plan(&self, inverse: bool) -> &Arc<dyn Fft<f64>> {
        if inverse {
            &self.inv
        } else {
            &self.fwd
        }
    }

    /// 1-D transforms along the selected rows, in place.
    pub fn rows(&self, buf: &mut [Complex64], rows: &[usize], inverse: bool) {
        let plan = self.plan(inverse);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for &r in rows {
            plan.process_with_scratch(&mut buf[r * self.n..(r + 1) * self.n], &mut scratch);
        }
    }

    /// 1-D transforms along every column, in place.
    pub fn cols(&self, buf: &mut [Complex64], inverse: bool) {
        let plan = self.plan(inverse);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // Blocked transpose: gathering a strip of columns at a time keeps the
        // working set in cache instead of striding the full buffer per column.
        const BLOCK: usize = 16;
        let n = self.n;
        let mut block = vec![Complex64::default(); BLOCK * n];
        let mut c0 = 0;
        while c0 < n {
            let w = BLOCK.min(n - c0);
            for r in 0..n {
                let row = &buf[r * n + c0..r * n + c0 + w];
                for (b, &v) in row.iter().enumerate() {
                    block[b * n + r] = v;
                }
            }
            for b in 0..w {
                plan.process_with_scratch(&mut block[b * n..(b + 1) * n], &mut scratch);
            }
            for r in 0..n {
                let row = &mut buf[r * n + c0..r * n + c0 + w];
                for (b, v) in row.iter_mut().enumerate() {
                    *v = block[b * n + r];
                }
            }
            c0 += w;
        }
    }

    /// Full 2-D transform, in place.
    pub fn full(&self, buf: &mut [Complex64], inverse: bool) {
        let all: Vec<usize> = (0..self.n).collect();
        self.rows(buf, &all, inverse);
        self.cols(buf, inverse);
    }

    /// Inverse transform of a spectrum known to be zero outside `rows`:
    /// row transforms on those rows only, then all columns.
    pub fn inverse_pruned(&self, buf: &mut [Complex64], rows: &[usize]) {
        self.rows(buf, rows, true);
        self.cols(buf, true);
    }

    /// Forward transform when only `rows` of the output will be read:
    /// all columns first, then row transforms on the requested rows. Rows
    /// outside the set are left in an intermediate state.
    pub fn forward_pruned(&self, buf: &mut [Complex64], rows: &[usize]) {
        self.cols(buf, false);
        self.rows(buf, rows, false);
    }
}

/// Map an array index 0..N-1 to the signed frequency/pixel coordinate in
/// {-N/2, ..., N/2-1} under the standard FFT layout.
pub fn signed(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Inverse of `signed`: array index of a signed coordinate.
pub fn index_of(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_layout() {
        let n = 8;
        let fft = Fft2::new(n);
        let mut buf: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i * 7 % 13) as f64, (i % 5) as f64))
            .collect();
        let orig = buf.clone();
        fft.full(&mut buf, false);
        fft.full(&mut buf, true);
        let scale = (n * n) as f64;
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a / scale - b).norm() < 1e-12);
        }
        assert_eq!(signed(0, 8), 0);
        assert_eq!(signed(3, 8), 3);
        assert_eq!(signed(4, 8), -4);
        assert_eq!(signed(7, 8), -1);
        assert_eq!(index_of(-4, 8), 4);
        assert_eq!(index_of(-1, 8), 7);
    }

    #[test]
    fn pruned_matches_full() {
        let n = 16;
        let fft = Fft2::new(n);
        let rows = vec![0usize, 1, 15];
        let mut sparse = vec![Complex64::default(); n * n];
        for (p, &r) in rows.iter().enumerate() {
            sparse[r * n + 3 + p] = Complex64::new(1.0 + p as f64, -0.5);
        }
        let mut full = sparse.clone();
        fft.full(&mut full, true);
        fft.inverse_pruned(&mut sparse, &rows);
        for (a, b) in sparse.iter().zip(&full) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
