//! Mode-space fields on a [`HalfStripGrid`].
//!
//! Amplitudes follow `u(x, y, z) = Σ û(kx, ky, z) e^{i(kx' x + ky' y)}` with only
//! `kx >= 0` stored. The y index runs over the full FFT order. Storage is
//! row-major with the tangential mode outermost: `data[mode * nz + j]`,
//! `mode = kx * nky + ky`.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::HalfStripGrid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<HalfStripGrid>,
    data: Vec<Complex64>,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("nkx", &self.nkx())
            .field("nky", &self.nky())
            .field("nz", &self.nz())
            .finish()
    }
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.same_grid(other) && self.data == other.data
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<HalfStripGrid>) -> Self {
        let n = grid.nkx() * grid.nky() * grid.nz();
        Self {
            grid: grid.clone(),
            data: vec![Complex64::default(); n],
        }
    }

    pub fn from_data(grid: &Arc<HalfStripGrid>, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.nkx() * grid.nky() * grid.nz() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: grid.clone(),
            data,
        })
    }

    pub fn grid(&self) -> &Arc<HalfStripGrid> {
        &self.grid
    }

    pub fn nkx(&self) -> usize {
        self.grid.nkx()
    }

    pub fn nky(&self) -> usize {
        self.grid.nky()
    }

    pub fn nz(&self) -> usize {
        self.grid.nz()
    }

    pub fn mode_count(&self) -> usize {
        self.nkx() * self.nky()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Splits a flat mode index into `(kx, ky)` storage indices.
    pub fn split_mode(&self, mode: usize) -> (usize, usize) {
        (mode / self.nky(), mode % self.nky())
    }

    pub fn mode(&self, kx: usize, ky: usize) -> &[Complex64] {
        let nz = self.nz();
        let m = kx * self.nky() + ky;
        &self.data[m * nz..(m + 1) * nz]
    }

    pub fn mode_mut(&mut self, kx: usize, ky: usize) -> &mut [Complex64] {
        let nz = self.nz();
        let m = kx * self.nky() + ky;
        &mut self.data[m * nz..(m + 1) * nz]
    }

    /// Same grid object or structurally identical grid.
    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
            || (self.grid.config() == other.grid.config()
                && self.grid.vertical.nodes() == other.grid.vertical.nodes())
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|a| *a *= c);
        out
    }

    /// `self + c * other`.
    pub fn axpy(&mut self, c: f64, other: &Self) -> Result<()> {
        self.check_grid(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b * c;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Signed y-partner storage index of `ky` (that is, `-ky`).
    pub fn ky_partner(&self, ky: usize) -> usize {
        let ny = self.nky();
        (ny - ky) % ny
    }

    /// Projects onto the stored representation of a real field: Nyquist rows
    /// zero, the `kx = 0` plane conjugate-symmetric in `ky`, and both vertical
    /// end values zero.
    pub fn enforce_real(&mut self) {
        let (nkx, nky, nz) = (self.nkx(), self.nky(), self.nz());
        let nyq_x = nkx - 1;
        for ky in 0..nky {
            self.mode_mut(nyq_x, ky).fill(Complex64::default());
        }
        if nky > 1 {
            let nyq_y = nky / 2;
            for kx in 0..nkx {
                self.mode_mut(kx, nyq_y).fill(Complex64::default());
            }
            for ky in 1..nyq_y {
                let p = self.ky_partner(ky);
                for j in 0..nz {
                    let a = self.mode(0, ky)[j];
                    let b = self.mode(0, p)[j];
                    let s = (a + b.conj()) * 0.5;
                    self.mode_mut(0, ky)[j] = s;
                    self.mode_mut(0, p)[j] = s.conj();
                }
            }
        }
        for j in 0..nz {
            let a = &mut self.mode_mut(0, 0)[j];
            a.im = 0.0;
        }
        for chunk in self.data.chunks_mut(nz) {
            chunk[0] = Complex64::default();
            chunk[nz - 1] = Complex64::default();
        }
    }

    /// Largest violation of the conjugate symmetry a real field must satisfy,
    /// relative to the largest amplitude.
    pub fn reality_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for j in 0..self.nz() {
            worst = worst.max(self.mode(0, 0)[j].im.abs());
        }
        if self.nky() > 1 {
            for ky in 1..self.nky() {
                let p = self.ky_partner(ky);
                for j in 0..self.nz() {
                    worst = worst.max((self.mode(0, ky)[j] - self.mode(0, p)[j].conj()).norm());
                }
            }
        }
        worst / scale
    }

    /// Physical samples of a 2D field: `out[j * nx + n] = u(x_n, z_j)`, with
    /// `x_n = n L_x / N_x`. Also returns the largest imaginary part produced by
    /// the inverse transform relative to the largest real sample.
    pub fn to_physical(&self, tr: &RowTransform, exec: Execution) -> Result<(Vec<f64>, f64)> {
        if self.nky() != 1 || tr.len() != self.grid.nx {
            return Err(Error::GridMismatch);
        }
        let (nx, nz, nkx) = (self.grid.nx, self.nz(), self.nkx());
        let rows: Vec<(Vec<f64>, f64)> = exec.map(nz, |j| {
            let mut buf = vec![Complex64::default(); nx];
            for k in 0..nkx - 1 {
                let a = self.data[k * nz + j];
                buf[k] = a;
                if k > 0 {
                    buf[nx - k] = a.conj();
                }
            }
            tr.inverse(&mut buf);
            let imag = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
            (buf.iter().map(|c| c.re).collect(), imag)
        });
        let mut out = Vec::with_capacity(nx * nz);
        let mut imag: f64 = 0.0;
        for (row, im) in rows {
            out.extend_from_slice(&row);
            imag = imag.max(im);
        }
        let scale = out.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let rel = if scale > 0.0 { imag / scale } else { imag };
        Ok((out, rel))
    }

    /// Inverse of [`to_physical`](Self::to_physical), keeping modes `k <= keep`.
    pub fn from_physical(
        grid: &Arc<HalfStripGrid>,
        samples: &[f64],
        keep: usize,
        tr: &RowTransform,
        exec: Execution,
    ) -> Result<Self> {
        let (nx, nz, nkx) = (grid.nx, grid.nz(), grid.nkx());
        if grid.nky() != 1 || samples.len() != nx * nz || tr.len() != nx {
            return Err(Error::GridMismatch);
        }
        let rows: Vec<Vec<Complex64>> = exec.map(nz, |j| {
            let mut buf: Vec<Complex64> = samples[j * nx..(j + 1) * nx]
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            tr.forward(&mut buf);
            buf.truncate(nkx);
            buf
        });
        let mut out = Self::zeros(grid);
        for (j, row) in rows.iter().enumerate() {
            for k in 0..(nkx - 1).min(keep + 1) {
                out.data[k * nz + j] = row[k];
            }
        }
        for j in 0..nz {
            out.data[j].im = 0.0;
        }
        Ok(out)
    }
}

/// Planned length-`N_x` transforms for one physical row.
#[derive(Clone)]
pub struct RowTransform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n: usize,
}

impl fmt::Debug for RowTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RowTransform").field("n", &self.n).finish()
    }
}

impl RowTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Coefficients from samples, normalized by `1/N`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= s);
    }

    /// Samples from coefficients (unnormalized synthesis).
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridConfig};
    use std::f64::consts::PI;

    #[test]
    fn physical_roundtrip_of_single_mode() {
        let grid = Arc::new(make_grid(&GridConfig::new_2d(2.0 * PI, 16, 5.0, 11, 0.0)).unwrap());
        let tr = RowTransform::new(16);
        let mut u = SpectralField::zeros(&grid);
        for j in 1..10 {
            u.mode_mut(1, 0)[j] = Complex64::new(0.0, -0.5) * j as f64;
        }
        let (phys, imag) = u.to_physical(&tr, Execution::Sequential).unwrap();
        assert!(imag < 1e-14);
        // û_1 = -i/2 * g  is  sin(x) g
        for n in 0..16 {
            let x = 2.0 * PI * n as f64 / 16.0;
            assert!((phys[3 * 16 + n] - 3.0 * x.sin()).abs() < 1e-13);
        }
        let back =
            SpectralField::from_physical(&grid, &phys, 7, &tr, Execution::Sequential).unwrap();
        for (a, b) in back.data().iter().zip(u.data()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn enforce_real_symmetrizes_3d_plane() {
        let grid =
            Arc::new(make_grid(&GridConfig::new_3d(2.0 * PI, 8, 2.0 * PI, 8, 5.0, 9)).unwrap());
        let mut u = SpectralField::zeros(&grid);
        u.mode_mut(0, 1)[3] = Complex64::new(1.0, 2.0);
        u.enforce_real();
        assert_eq!(u.mode(0, 7)[3], Complex64::new(0.5, -1.0));
        assert_eq!(u.reality_defect(), 0.0);
    }
}
