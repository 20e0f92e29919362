//! Uniform transverse grids and sampled complex fields.
//!
//! Grids are node-centred and symmetric about the origin: sample i of n
//! sits at (i - (n-1)/2)·d, so even sizes have no node exactly at 0.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate of sample `i` on a symmetric n-point axis with spacing `d`.
pub fn axis_coord(i: usize, n: usize, d: f64) -> f64 {
    (i as f64 - (n as f64 - 1.0) / 2.0) * d
}

/// FFT angular frequency for bin `i`: k = 2π·i'/(n·d) with i' wrapped to
/// the signed range.
pub fn fft_wavenumber(i: usize, n: usize, d: f64) -> f64 {
    let signed = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
    2.0 * std::f64::consts::PI * signed / (n as f64 * d)
}

/// Transverse sampling lattice shared by fields, column-density maps and
/// images.  Arrays over it are shape (ny, nx), x fastest in memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl TransverseGrid {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParam {
                field: "grid",
                reason: "nx and ny must be positive".into(),
            });
        }
        if !(dx.is_finite() && dx > 0.0 && dy.is_finite() && dy > 0.0) {
            return Err(Error::InvalidParam {
                field: "grid",
                reason: format!("spacings must be finite and > 0, got dx={dx}, dy={dy}"),
            });
        }
        Ok(TransverseGrid { nx, ny, dx, dy })
    }

    /// Square grid covering [-half_extent, half_extent] per axis.
    pub fn square(n: usize, half_extent: f64) -> Result<Self> {
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::InvalidParam {
                field: "grid",
                reason: format!("half extent must be > 0, got {half_extent}"),
            });
        }
        let d = 2.0 * half_extent / n as f64;
        TransverseGrid::new(n, n, d, d)
    }

    pub fn x(&self, ix: usize) -> f64 {
        axis_coord(ix, self.nx, self.dx)
    }

    pub fn y(&self, iy: usize) -> f64 {
        axis_coord(iy, self.ny, self.dy)
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Samples f(x, y) over the lattice.
    pub fn sample_real<F: Fn(f64, f64) -> f64>(&self, f: F) -> Array2<f64> {
        Array2::from_shape_fn((self.ny, self.nx), |(iy, ix)| f(self.x(ix), self.y(iy)))
    }

    /// Trapezoid cubature of a sampled map (end nodes half weight).
    pub fn trapezoid(&self, map: &Array2<f64>) -> f64 {
        let mut acc = 0.0;
        for ((iy, ix), v) in map.indexed_iter() {
            let wx = if ix == 0 || ix == self.nx - 1 { 0.5 } else { 1.0 };
            let wy = if iy == 0 || iy == self.ny - 1 { 0.5 } else { 1.0 };
            acc += wx * wy * v;
        }
        acc * self.cell_area()
    }
}

/// Positive-frequency field envelope E⁺ sampled on a transverse grid.
/// FFT-based propagation requires power-of-two sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    pub grid: TransverseGrid,
    /// Shape (ny, nx).
    pub values: Array2<Complex64>,
}

impl ComplexField2D {
    pub fn new(grid: TransverseGrid, values: Array2<Complex64>) -> Result<Self> {
        if !grid.nx.is_power_of_two() || !grid.ny.is_power_of_two() {
            return Err(Error::InvalidParam {
                field: "field grid",
                reason: format!("nx, ny must be powers of two, got {}x{}", grid.nx, grid.ny),
            });
        }
        if values.dim() != (grid.ny, grid.nx) {
            return Err(Error::GridMismatch(format!(
                "field values are {:?}, grid wants ({}, {})",
                values.dim(),
                grid.ny,
                grid.nx
            )));
        }
        Ok(ComplexField2D { grid, values })
    }

    /// Unit-amplitude plane wave.
    pub fn plane_wave(grid: TransverseGrid) -> Result<Self> {
        ComplexField2D::new(grid, Array2::from_elem((grid.ny, grid.nx), Complex64::new(1.0, 0.0)))
    }

    /// Collimated Gaussian beam at its waist: E = exp(-r²/w0²).
    pub fn gaussian_beam(grid: TransverseGrid, w0: f64) -> Result<Self> {
        if !(w0.is_finite() && w0 > 0.0) {
            return Err(Error::InvalidParam {
                field: "w0",
                reason: format!("waist must be > 0, got {w0}"),
            });
        }
        let values = Array2::from_shape_fn((grid.ny, grid.nx), |(iy, ix)| {
            let r2 = grid.x(ix).powi(2) + grid.y(iy).powi(2);
            Complex64::new((-r2 / (w0 * w0)).exp(), 0.0)
        });
        ComplexField2D::new(grid, values)
    }

    /// L² norm √(Σ|E|² dx dy).
    pub fn norm(&self) -> f64 {
        let power: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (power * self.grid.cell_area()).sqrt()
    }

    /// Beam radius from second moments: w = √(2⟨r²⟩), the 1/e² radius
    /// for a Gaussian intensity profile.
    pub fn second_moment_radius(&self) -> f64 {
        let mut power = 0.0;
        let mut r2_weighted = 0.0;
        for ((iy, ix), v) in self.values.indexed_iter() {
            let w = v.norm_sqr();
            let r2 = self.grid.x(ix).powi(2) + self.grid.y(iy).powi(2);
            power += w;
            r2_weighted += w * r2;
        }
        (2.0 * r2_weighted / power).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn axis_is_symmetric_for_even_and_odd_sizes() {
        assert_relative_eq!(axis_coord(0, 4, 0.5) + axis_coord(3, 4, 0.5), 0.0);
        assert_eq!(axis_coord(2, 5, 1.0), 0.0);
        assert_eq!(axis_coord(0, 5, 1.0), -2.0);
    }

    #[test]
    fn fft_wavenumber_layout_wraps_at_nyquist() {
        let n = 8;
        let d = 0.25;
        let dk = 2.0 * std::f64::consts::PI / (n as f64 * d);
        assert_eq!(fft_wavenumber(0, n, d), 0.0);
        assert_relative_eq!(fft_wavenumber(1, n, d), dk);
        assert_relative_eq!(fft_wavenumber(4, n, d), 4.0 * dk);
        assert_relative_eq!(fft_wavenumber(5, n, d), -3.0 * dk);
        assert_relative_eq!(fft_wavenumber(7, n, d), -dk);
    }

    #[test]
    fn trapezoid_integrates_gaussian() {
        let grid = TransverseGrid::square(128, 8.0).unwrap();
        let map = grid.sample_real(|x, y| (-(x * x + y * y) / 2.0).exp());
        assert_relative_eq!(grid.trapezoid(&map), 2.0 * std::f64::consts::PI, max_relative = 1e-10);
    }

    #[test]
    fn field_requires_power_of_two() {
        let grid = TransverseGrid::new(100, 64, 0.1, 0.1).unwrap();
        assert!(ComplexField2D::plane_wave(grid).is_err());
    }

    #[test]
    fn gaussian_beam_moment_radius_matches_waist() {
        let grid = TransverseGrid::square(256, 32.0).unwrap();
        let f = ComplexField2D::gaussian_beam(grid, 8.0).unwrap();
        assert_relative_eq!(f.second_moment_radius(), 8.0, max_relative = 1e-9);
    }
}
