//! Thin 2D FFT wrapper over rustfft.  Forward is unnormalized; inverse
//! carries the 1/(nx·ny) factor so a round trip is the identity.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Fft2 {
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    /// Plans transforms for arrays of shape (ny, nx).
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
        }
    }

    fn transform(&self, data: &mut Array2<Complex64>, forward: bool) {
        assert_eq!(data.dim(), (self.ny, self.nx), "fft plan / array shape");
        let row = if forward { &self.row_fwd } else { &self.row_inv };
        let col = if forward { &self.col_fwd } else { &self.col_inv };

        for mut r in data.rows_mut() {
            let slice = r.as_slice_mut().expect("rows are contiguous");
            row.process(slice);
        }
        let mut scratch = vec![Complex64::default(); self.ny];
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                scratch[iy] = data[(iy, ix)];
            }
            col.process(&mut scratch);
            for iy in 0..self.ny {
                data[(iy, ix)] = scratch[iy];
            }
        }
    }

    pub fn forward(&self, data: &mut Array2<Complex64>) {
        self.transform(data, true);
    }

    pub fn inverse(&self, data: &mut Array2<Complex64>) {
        self.transform(data, false);
        let scale = 1.0 / (self.nx * self.ny) as f64;
        data.mapv_inplace(|v| v * scale);
    }
}
