//! Condensate density profiles: the normalized single-particle density p₀
//! (∫ p₀ d³r = 1), its column density η(x, y) = ∫ p₀ dz, and its Fourier
//! transform p̃₀(k) = ∫ p₀ e^{-i k·r} d³r.

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{axis_coord, TransverseGrid};

/// Relative tolerance on ∫ p₀ d³r = 1 for user-supplied grids.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Normalized density sampled on a node-centered rectangular lattice,
/// shape (nz, ny, nx), x fastest.  Node i sits at (i - (n-1)/2)·d per axis.
#[derive(Debug, Clone)]
pub struct DensityGrid3 {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    values: Array3<f64>,
}

impl DensityGrid3 {
    /// Wraps pre-sampled values.  Rejects negative or non-finite samples
    /// and rectangle-sum normalization off by more than `NORMALIZATION_TOL`.
    pub fn new(
        nx: usize,
        ny: usize,
        nz: usize,
        dx: f64,
        dy: f64,
        dz: f64,
        values: Array3<f64>,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidParam {
                field: "density grid",
                reason: "all dimensions must be nonzero".into(),
            });
        }
        for (name, d) in [("dx", dx), ("dy", dy), ("dz", dz)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidParam {
                    field: name,
                    reason: format!("spacing must be finite and > 0, got {d}"),
                });
            }
        }
        if values.dim() != (nz, ny, nx) {
            return Err(Error::GridMismatch(format!(
                "density values have shape {:?}, expected ({nz}, {ny}, {nx})",
                values.dim()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParam {
                field: "density grid",
                reason: "samples must be finite and >= 0".into(),
            });
        }
        let grid = Self {
            nx,
            ny,
            nz,
            dx,
            dy,
            dz,
            values,
        };
        let mass = grid.mass();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParam {
                field: "density grid",
                reason: format!("rectangle-sum mass is {mass}, expected 1 within {NORMALIZATION_TOL:e}"),
            });
        }
        Ok(grid)
    }

    /// Samples `density(x, y, z)` on the node-centered lattice spanning
    /// ±half_extents and renormalizes the rectangle sum to 1.
    pub fn from_fn<F: Fn(f64, f64, f64) -> f64>(
        dims: (usize, usize, usize),
        half_extents: (f64, f64, f64),
        density: F,
    ) -> Result<Self> {
        let (nx, ny, nz) = dims;
        let (hx, hy, hz) = half_extents;
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidParam {
                field: "density grid",
                reason: "all dimensions must be nonzero".into(),
            });
        }
        for (name, h) in [("half_extent x", hx), ("half_extent y", hy), ("half_extent z", hz)] {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidParam {
                    field: name,
                    reason: format!("must be finite and > 0, got {h}"),
                });
            }
        }
        let (dx, dy, dz) = (2.0 * hx / nx as f64, 2.0 * hy / ny as f64, 2.0 * hz / nz as f64);
        let mut values = Array3::zeros((nz, ny, nx));
        for iz in 0..nz {
            let z = axis_coord(iz, nz, dz);
            for iy in 0..ny {
                let y = axis_coord(iy, ny, dy);
                for ix in 0..nx {
                    let v = density(axis_coord(ix, nx, dx), y, z);
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::InvalidParam {
                            field: "density grid",
                            reason: format!("sample at node ({ix}, {iy}, {iz}) is {v}"),
                        });
                    }
                    values[(iz, iy, ix)] = v;
                }
            }
        }
        let mass: f64 = values.sum() * dx * dy * dz;
        if mass <= 0.0 {
            return Err(Error::InvalidParam {
                field: "density grid",
                reason: "sampled density has zero mass".into(),
            });
        }
        values.mapv_inplace(|v| v / mass);
        Self::new(nx, ny, nz, dx, dy, dz, values)
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    /// Rectangle-sum of p₀ times the cell volume.
    pub fn mass(&self) -> f64 {
        self.values.sum() * self.dx * self.dy * self.dz
    }

    pub fn transverse_grid(&self) -> Result<TransverseGrid> {
        TransverseGrid::new(self.nx, self.ny, self.dx, self.dy)
    }

    /// η(x, y) = ∫ p₀ dz by the trapezoid rule over the native lattice.
    pub fn column_density(&self) -> Array2<f64> {
        let mut eta = Array2::zeros((self.ny, self.nx));
        for iz in 0..self.nz {
            let w = if iz == 0 || iz == self.nz - 1 { 0.5 } else { 1.0 };
            let slice = self.values.index_axis(ndarray::Axis(0), iz);
            eta.zip_mut_with(&slice, |e, v| *e += w * v);
        }
        eta * self.dz
    }

    /// p̃₀(k) by a direct rectangle-weighted sum with separable per-axis
    /// phase factors.
    pub fn fourier(&self, k: [f64; 3]) -> Complex64 {
        let phase = |n: usize, d: f64, kc: f64| -> Vec<Complex64> {
            (0..n)
                .map(|i| Complex64::from_polar(1.0, -kc * axis_coord(i, n, d)))
                .collect()
        };
        let px = phase(self.nx, self.dx, k[0]);
        let py = phase(self.ny, self.dy, k[1]);
        let pz = phase(self.nz, self.dz, k[2]);
        let mut sum = Complex64::new(0.0, 0.0);
        for iz in 0..self.nz {
            let mut plane = Complex64::new(0.0, 0.0);
            for iy in 0..self.ny {
                let mut row = Complex64::new(0.0, 0.0);
                for ix in 0..self.nx {
                    row += self.values[(iz, iy, ix)] * px[ix];
                }
                plane += row * py[iy];
            }
            sum += plane * pz[iz];
        }
        sum * (self.dx * self.dy * self.dz)
    }
}

/// The two supported profile shapes.
#[derive(Debug, Clone)]
pub enum ProfileKind {
    /// p₀ = (2π)^{-3/2} (ax ay az)⁻¹ exp[-(x-cx)²/2ax² - (y-cy)²/2ay² - (z-cz)²/2az²].
    Gaussian { ax: f64, ay: f64, az: f64, center: [f64; 3] },
    Grid(DensityGrid3),
}

/// A condensate: a normalized single-particle density and an atom count.
#[derive(Debug, Clone)]
pub struct CondensateProfile {
    pub kind: ProfileKind,
    pub atom_count: u64,
}

fn check_widths(widths: [(&'static str, f64); 3]) -> Result<()> {
    for (name, a) in widths {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParam {
                field: name,
                reason: format!("must be finite and > 0, got {a}"),
            });
        }
    }
    Ok(())
}

impl CondensateProfile {
    pub fn gaussian(ax: f64, ay: f64, az: f64, atom_count: u64) -> Result<Self> {
        Self::gaussian_at(ax, ay, az, [0.0; 3], atom_count)
    }

    pub fn gaussian_at(ax: f64, ay: f64, az: f64, center: [f64; 3], atom_count: u64) -> Result<Self> {
        check_widths([("ax", ax), ("ay", ay), ("az", az)])?;
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParam {
                field: "center",
                reason: "coordinates must be finite".into(),
            });
        }
        Ok(Self {
            kind: ProfileKind::Gaussian { ax, ay, az, center },
            atom_count,
        })
    }

    pub fn from_grid(grid: DensityGrid3, atom_count: u64) -> Self {
        Self {
            kind: ProfileKind::Grid(grid),
            atom_count,
        }
    }

    /// Thomas–Fermi inverted parabola p₀ = 15/(8π rx ry rz) · max(0, 1 - q²),
    /// q² = x²/rx² + y²/ry² + z²/rz², sampled on `dims` nodes spanning
    /// ±1.05 r per axis and renormalized.
    pub fn thomas_fermi(
        rx: f64,
        ry: f64,
        rz: f64,
        dims: (usize, usize, usize),
        atom_count: u64,
    ) -> Result<Self> {
        check_widths([("rx", rx), ("ry", ry), ("rz", rz)])?;
        let c = 15.0 / (8.0 * std::f64::consts::PI * rx * ry * rz);
        let grid = DensityGrid3::from_fn(dims, (1.05 * rx, 1.05 * ry, 1.05 * rz), |x, y, z| {
            let q2 = (x / rx).powi(2) + (y / ry).powi(2) + (z / rz).powi(2);
            c * (1.0 - q2).max(0.0)
        })?;
        Ok(Self::from_grid(grid, atom_count))
    }

    /// Column density η sampled on `grid`.  Gaussian profiles evaluate the
    /// analytic marginal; gridded profiles require `grid` to coincide with
    /// their native transverse lattice.
    pub fn column_density(&self, grid: &TransverseGrid) -> Result<Array2<f64>> {
        match &self.kind {
            ProfileKind::Gaussian { ax, ay, center, .. } => {
                let norm = 1.0 / (2.0 * std::f64::consts::PI * ax * ay);
                Ok(grid.sample_real(|x, y| {
                    let u = (x - center[0]) / ax;
                    let v = (y - center[1]) / ay;
                    norm * (-0.5 * (u * u + v * v)).exp()
                }))
            }
            ProfileKind::Grid(g) => {
                let native = g.transverse_grid()?;
                let spacing_ok = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.max(b);
                if grid.nx != native.nx
                    || grid.ny != native.ny
                    || !spacing_ok(grid.dx, native.dx)
                    || !spacing_ok(grid.dy, native.dy)
                {
                    return Err(Error::GridMismatch(format!(
                        "requested {}x{} grid (dx {:e}, dy {:e}) does not match the \
                         native lattice {}x{} (dx {:e}, dy {:e})",
                        grid.nx, grid.ny, grid.dx, grid.dy,
                        native.nx, native.ny, native.dx, native.dy
                    )));
                }
                Ok(g.column_density())
            }
        }
    }

    /// Node-centered transverse grid adapted to the profile: ±8a per axis
    /// for Gaussians, the native lattice for grids.
    pub fn auto_grid(&self, n: usize) -> Result<TransverseGrid> {
        match &self.kind {
            ProfileKind::Gaussian { ax, ay, .. } => {
                TransverseGrid::new(n, n, 16.0 * ax / n as f64, 16.0 * ay / n as f64)
            }
            ProfileKind::Grid(g) => g.transverse_grid(),
        }
    }

    /// Peak column density max_{x,y} η.  For a Gaussian, 1/(2π ax ay).
    pub fn effective_eta(&self) -> f64 {
        match &self.kind {
            ProfileKind::Gaussian { ax, ay, .. } => 1.0 / (2.0 * std::f64::consts::PI * ax * ay),
            ProfileKind::Grid(g) => g
                .column_density()
                .iter()
                .fold(0.0_f64, |m, v| m.max(*v)),
        }
    }

    /// Peak 3D density max p₀.  For a Gaussian, (2π)^{-3/2}/(ax ay az).
    pub fn peak_density(&self) -> f64 {
        match &self.kind {
            ProfileKind::Gaussian { ax, ay, az, .. } => {
                (2.0 * std::f64::consts::PI).powf(-1.5) / (ax * ay * az)
            }
            ProfileKind::Grid(g) => g.values().iter().fold(0.0_f64, |m, v| m.max(*v)),
        }
    }

    /// p̃₀(k): closed form for Gaussians, direct lattice sum for grids.
    /// p̃₀(0) = 1 and |p̃₀| ≤ 1 always.
    pub fn fourier_density(&self, k: [f64; 3]) -> Complex64 {
        match &self.kind {
            ProfileKind::Gaussian { ax, ay, az, center } => {
                let quad = ax * ax * k[0] * k[0] + ay * ay * k[1] * k[1] + az * az * k[2] * k[2];
                let shift = k[0] * center[0] + k[1] * center[1] + k[2] * center[2];
                Complex64::from_polar((-0.5 * quad).exp(), -shift)
            }
            ProfileKind::Grid(g) => g.fourier(k),
        }
    }

    /// SHA-256 over a canonical description, for output provenance.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        match &self.kind {
            ProfileKind::Gaussian { ax, ay, az, center } => {
                h.update(b"gaussian");
                for v in [*ax, *ay, *az, center[0], center[1], center[2]] {
                    h.update(v.to_le_bytes());
                }
            }
            ProfileKind::Grid(g) => {
                h.update(b"grid");
                for v in [g.nx as u64, g.ny as u64, g.nz as u64] {
                    h.update(v.to_le_bytes());
                }
                for v in [g.dx, g.dy, g.dz] {
                    h.update(v.to_le_bytes());
                }
                for v in g.values() {
                    h.update(v.to_le_bytes());
                }
            }
        }
        h.update(self.atom_count.to_le_bytes());
        let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn sampled_gaussian(a: f64, n: usize, extent: f64) -> DensityGrid3 {
        let norm = TWO_PI.powf(-1.5) / (a * a * a);
        DensityGrid3::from_fn((n, n, n), (extent, extent, extent), |x, y, z| {
            norm * (-(x * x + y * y + z * z) / (2.0 * a * a)).exp()
        })
        .unwrap()
    }

    #[test]
    fn gaussian_peak_column_density_is_inverse_two_pi() {
        let p = CondensateProfile::gaussian(1.0, 1.0, 1.0, 1).unwrap();
        assert_relative_eq!(p.effective_eta(), 1.0 / TWO_PI, max_relative = 1e-15);
        let g = TransverseGrid::new(33, 33, 0.25, 0.25).unwrap();
        let eta = p.column_density(&g).unwrap();
        // Node 16 of 33 sits exactly at the origin.
        assert_relative_eq!(eta[(16, 16)], 1.0 / TWO_PI, max_relative = 1e-15);
    }

    #[test]
    fn uniform_box_column_density_is_inverse_footprint_area() {
        // Box spanning 12 x 10 x 8 interior nodes; edge nodes are zero, so
        // trapezoid and rectangle sums agree exactly and η = 1/(Lx·Ly) with
        // L the discrete footprint.
        let (nx, ny, nz) = (16, 14, 12);
        let (dx, dy, dz) = (0.5, 0.4, 0.3);
        let mut values = Array3::zeros((nz, ny, nx));
        for iz in 1..nz - 1 {
            for iy in 1..ny - 1 {
                for ix in 1..nx - 1 {
                    values[(iz, iy, ix)] = 1.0;
                }
            }
        }
        let mass: f64 = values.sum() * dx * dy * dz;
        values.mapv_inplace(|v| v / mass);
        let grid = DensityGrid3::new(nx, ny, nz, dx, dy, dz, values).unwrap();
        let p = CondensateProfile::from_grid(grid, 1);

        let (lx, ly) = ((nx - 2) as f64 * dx, (ny - 2) as f64 * dy);
        let eta = p.column_density(&p.auto_grid(0).unwrap()).unwrap();
        for iy in 1..ny - 1 {
            for ix in 1..nx - 1 {
                assert_relative_eq!(eta[(iy, ix)], 1.0 / (lx * ly), max_relative = 1e-12);
            }
        }
        assert_relative_eq!(p.effective_eta(), 1.0 / (lx * ly), max_relative = 1e-12);
    }

    #[test]
    fn gridded_gaussian_matches_analytic_column_density() {
        let sampled = CondensateProfile::from_grid(sampled_gaussian(1.0, 64, 6.0), 1);
        let analytic = CondensateProfile::gaussian(1.0, 1.0, 1.0, 1).unwrap();
        let grid = sampled.auto_grid(0).unwrap();
        let eta_g = sampled.column_density(&grid).unwrap();
        let eta_a = analytic.column_density(&grid).unwrap();
        let max_dev = eta_g
            .iter()
            .zip(eta_a.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(max_dev < 1e-6, "max |Δη| = {max_dev}");

        // Odd node count puts a node exactly at the origin, where the
        // column peaks.
        let odd = CondensateProfile::from_grid(sampled_gaussian(1.0, 65, 6.0), 1);
        assert_relative_eq!(odd.effective_eta(), 1.0 / TWO_PI, max_relative = 1e-6);
    }

    #[test]
    fn column_density_integrates_to_one() {
        let p = CondensateProfile::gaussian(1.0, 2.0, 3.0, 1).unwrap();
        let grid = p.auto_grid(128).unwrap();
        let eta = p.column_density(&grid).unwrap();
        assert_relative_eq!(grid.trapezoid(&eta), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn column_density_rejects_foreign_grid_for_gridded_profiles() {
        let p = CondensateProfile::from_grid(sampled_gaussian(1.0, 16, 4.0), 1);
        let wrong = TransverseGrid::new(16, 16, 0.3, 0.5).unwrap();
        assert!(matches!(
            p.column_density(&wrong),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn fourier_density_at_zero_is_one() {
        let g = CondensateProfile::gaussian(1.0, 2.0, 0.5, 1).unwrap();
        assert_relative_eq!(g.fourier_density([0.0; 3]).re, 1.0, max_relative = 1e-15);
        let s = CondensateProfile::from_grid(sampled_gaussian(1.0, 32, 5.0), 1);
        let f = s.fourier_density([0.0; 3]);
        assert_relative_eq!(f.re, 1.0, max_relative = 1e-12);
        assert_relative_eq!(f.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fourier_density_gaussian_unit_k() {
        // a = 1, k = (1, 0, 0): p̃ = e^{-1/2}.
        let p = CondensateProfile::gaussian(1.0, 1.0, 1.0, 1).unwrap();
        let f = p.fourier_density([1.0, 0.0, 0.0]);
        assert_relative_eq!(f.re, (-0.5_f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(f.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fourier_density_magnitude_bounded_by_one() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let g = CondensateProfile::gaussian_at(0.7, 1.3, 2.0, [0.2, -0.4, 1.0], 1).unwrap();
        let s = CondensateProfile::from_grid(sampled_gaussian(1.0, 24, 5.0), 1);
        for _ in 0..100 {
            let k = [
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
            ];
            assert!(g.fourier_density(k).norm() <= 1.0 + 1e-12);
            assert!(s.fourier_density(k).norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn gridded_fourier_matches_gaussian_closed_form() {
        let s = CondensateProfile::from_grid(sampled_gaussian(1.0, 48, 6.0), 1);
        let g = CondensateProfile::gaussian(1.0, 1.0, 1.0, 1).unwrap();
        for k in [[0.5, 0.0, 0.0], [0.3, -0.7, 0.2], [1.0, 1.0, 1.0]] {
            let diff = (s.fourier_density(k) - g.fourier_density(k)).norm();
            assert!(diff < 1e-6, "|Δp̃| = {diff} at k = {k:?}");
        }
    }

    #[test]
    fn thomas_fermi_column_peak() {
        // η(0,0) = ∫ C (1 - z²/rz²) dz = 5/(2π rx ry).
        let (rx, ry, rz) = (2.0, 1.0, 3.0);
        let p = CondensateProfile::thomas_fermi(rx, ry, rz, (64, 64, 64), 1).unwrap();
        let expected = 2.5 / (std::f64::consts::PI * rx * ry);
        assert_relative_eq!(p.effective_eta(), expected, max_relative = 5e-3);
        if let ProfileKind::Grid(g) = &p.kind {
            assert_relative_eq!(g.mass(), 1.0, max_relative = 1e-12);
        } else {
            panic!("thomas_fermi must produce a gridded profile");
        }
    }

    #[test]
    fn rejects_unnormalized_grid() {
        let values = Array3::from_elem((8, 8, 8), 1.0);
        assert!(matches!(
            DensityGrid3::new(8, 8, 8, 0.1, 0.1, 0.1, values),
            Err(Error::InvalidParam { .. })
        ));
    }

    #[test]
    fn rejects_negative_samples() {
        let r = DensityGrid3::from_fn((8, 8, 8), (1.0, 1.0, 1.0), |x, _, _| x);
        assert!(r.is_err());
    }

    #[test]
    fn digest_distinguishes_profiles() {
        let a = CondensateProfile::gaussian(1.0, 1.0, 1.0, 100).unwrap();
        let b = CondensateProfile::gaussian(1.0, 1.0, 1.0, 101).unwrap();
        let c = CondensateProfile::gaussian(1.0, 1.0, 2.0, 100).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest(), a.clone().digest());
    }

    #[test]
    fn transverse_parseval_for_gaussian() {
        // ∬ η² dx dy = (2π)⁻² ∬ |p̃(kx, ky, 0)|² dkx dky; both sides equal
        // 1/(4π ax ay).
        let (ax, ay) = (1.0, 1.5);
        let p = CondensateProfile::gaussian(ax, ay, 1.0, 1).unwrap();
        let grid = p.auto_grid(128).unwrap();
        let eta = p.column_density(&grid).unwrap();
        let real_side = grid.trapezoid(&eta.mapv(|v| v * v));

        let nk = 200;
        let (kxm, kym) = (12.0 / ax, 12.0 / ay);
        let (dkx, dky) = (2.0 * kxm / (nk - 1) as f64, 2.0 * kym / (nk - 1) as f64);
        let mut k_side = 0.0;
        for j in 0..nk {
            let ky = -kym + j as f64 * dky;
            let wy = if j == 0 || j == nk - 1 { 0.5 } else { 1.0 };
            for i in 0..nk {
                let kx = -kxm + i as f64 * dkx;
                let wx = if i == 0 || i == nk - 1 { 0.5 } else { 1.0 };
                k_side += wx * wy * p.fourier_density([kx, ky, 0.0]).norm_sqr();
            }
        }
        k_side *= dkx * dky / TWO_PI.powi(2);

        let exact = 1.0 / (4.0 * std::f64::consts::PI * ax * ay);
        assert_relative_eq!(real_side, exact, max_relative = 1e-9);
        assert_relative_eq!(k_side, exact, max_relative = 1e-9);
    }
}
