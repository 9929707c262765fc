//! Nonlocal closures of the reduced system: the vertical velocity from
//! incompressibility and the magnetic field from the Shercliff relation
//! `∂_z² f = -∂_x u` (Dirichlet at both ends of the strip).

use crate::banded::Tridiagonal;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::SpectralField;
use crate::grid::{HalfStripGrid, VerticalGrid};
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Multiplicity of a stored x-mode in sums over the full spectrum.
#[inline]
pub fn multiplicity(kx: usize) -> f64 {
    if kx == 0 {
        1.0
    } else {
        2.0
    }
}

/// Tangential area factor `L_x` (times `L_y` in 3D).
pub fn area(grid: &HalfStripGrid) -> f64 {
    grid.lx * grid.ly.unwrap_or(1.0)
}

/// `w = -∫_0^z ∂_x u` for a 2D field.
pub fn compute_w(u: &SpectralField) -> SpectralField {
    let grid = u.grid().clone();
    let v = &grid.vertical;
    let mut w = SpectralField::zeros(&grid);
    let nz = u.nz();
    for kx in 1..u.nkx() {
        let k = grid.kx(kx);
        for ky in 0..u.nky() {
            let src: Vec<Complex64> = u.mode(kx, ky).iter().map(|a| -I * k * a).collect();
            w.mode_mut(kx, ky)
                .copy_from_slice(&v.cumulative(&src)[..nz]);
        }
    }
    w
}

/// `w = -∫_0^z (∂_x u + ∂_y v)` for a 3D pair.
pub fn compute_w_3d(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.check_grid(v)?;
    let grid = u.grid().clone();
    let mut w = SpectralField::zeros(&grid);
    for kx in 0..u.nkx() {
        let kxp = grid.kx(kx);
        for ky in 0..u.nky() {
            let kyp = grid.ky(ky);
            if kxp == 0.0 && kyp == 0.0 {
                continue;
            }
            let src: Vec<Complex64> = u
                .mode(kx, ky)
                .iter()
                .zip(v.mode(kx, ky))
                .map(|(a, b)| -I * (kxp * a + kyp * b))
                .collect();
            let cum = grid.vertical.cumulative(&src);
            w.mode_mut(kx, ky).copy_from_slice(&cum);
        }
    }
    Ok(w)
}

/// Dirichlet-Dirichlet solver for `D2 f = s` on the interior nodes.
#[derive(Clone, Debug)]
pub struct DirichletLaplacian {
    tri: Tridiagonal,
}

impl DirichletLaplacian {
    pub fn new(v: &VerticalGrid) -> Result<Self> {
        let n = v.len() - 2;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let (l, d, u) = v.d2_row(i + 1);
            lower[i] = l;
            diag[i] = d;
            upper[i] = u;
        }
        Ok(Self {
            tri: Tridiagonal::factor(&lower, &diag, &upper)?,
        })
    }

    /// Overwrites `rhs` (full node vector) with the solution; end values are
    /// set to zero.
    pub fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        self.tri.solve_in_place(&mut rhs[1..n - 1]);
        rhs[0] = Complex64::default();
        rhs[n - 1] = Complex64::default();
    }
}

/// `f` from `∂_z² f = -∂_x u`, one banded solve per x-mode.
pub fn solve_magnetic(u: &SpectralField) -> Result<SpectralField> {
    solve_magnetic_with(u, Execution::default())
}

pub fn solve_magnetic_with(u: &SpectralField, exec: Execution) -> Result<SpectralField> {
    let grid = u.grid().clone();
    let lap = DirichletLaplacian::new(&grid.vertical)?;
    let nz = u.nz();
    let nky = u.nky();
    let mut f = SpectralField::zeros(&grid);
    exec.for_each_chunk(f.data_mut(), nz, |mode, out| {
        let (kx, ky) = (mode / nky, mode % nky);
        if kx == 0 {
            return;
        }
        let k = grid.kx(kx);
        for (o, a) in out.iter_mut().zip(u.mode(kx, ky)) {
            *o = -I * k * a;
        }
        lap.solve(out);
    });
    Ok(f)
}

/// Components of the discrete dissipation identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissipationBalance {
    /// `(∂_x f, u)_{L²}`.
    pub pairing: f64,
    /// `∥∂_z f∥²_{L²}`.
    pub dz_f_sq: f64,
}

/// Evaluates both sides of `(∂_x f, u) = -∥∂_z f∥²` for a given `f`.
pub fn dissipation_balance(u: &SpectralField, f: &SpectralField) -> Result<DissipationBalance> {
    u.check_grid(f)?;
    let grid = u.grid();
    let v = &grid.vertical;
    let w = v.weights();
    let mut pairing = 0.0;
    let mut dz = 0.0;
    for kx in 0..u.nkx() {
        let k = grid.kx(kx);
        let c = multiplicity(kx);
        for ky in 0..u.nky() {
            let (um, fm) = (u.mode(kx, ky), f.mode(kx, ky));
            let mut p = 0.0;
            for j in 0..um.len() {
                p += w[j] * (I * k * fm[j] * um[j].conj()).re;
            }
            pairing += c * p;
            dz += c * v.edge_norm2(fm, |_| 1.0);
        }
    }
    let a = area(grid);
    Ok(DissipationBalance {
        pairing: a * pairing,
        dz_f_sq: a * dz,
    })
}

/// `|(∂_x f, u) + ∥∂_z f∥²| / ∥∂_z f∥²`, with `f` recomputed from `u`.
pub fn dissipation_residual(u: &SpectralField) -> Result<f64> {
    let f = solve_magnetic(u)?;
    let b = dissipation_balance(u, &f)?;
    let num = (b.pairing + b.dz_f_sq).abs();
    if b.dz_f_sq <= f64::MIN_POSITIVE {
        return Ok(if num == 0.0 {
            0.0
        } else {
            num / f64::MIN_POSITIVE
        });
    }
    Ok(num / b.dz_f_sq)
}

/// Per-node residual `D2 f̂ + i k' û` for every mode, as a field.
pub fn magnetic_residual(u: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    u.check_grid(f)?;
    let grid = u.grid().clone();
    let mut r = SpectralField::zeros(&grid);
    for kx in 0..u.nkx() {
        let k = grid.kx(kx);
        for ky in 0..u.nky() {
            let d2 = grid.vertical.d2_vec(f.mode(kx, ky));
            let um = u.mode(kx, ky);
            let out = r.mode_mut(kx, ky);
            for j in 1..out.len() - 1 {
                out[j] = d2[j] + I * k * um[j];
            }
        }
    }
    Ok(r)
}

/// Checks that a field belongs to the given grid.
pub fn require_grid(u: &SpectralField, grid: &HalfStripGrid) -> Result<()> {
    if u.grid().config() == grid.config() {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}
