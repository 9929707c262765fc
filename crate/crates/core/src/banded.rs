//! Direct solvers for the banded systems produced by the vertical stencils.
//!
//! [`Tridiagonal`] is a pre-factored Thomas solve for real tridiagonal
//! matrices applied to real or complex right-hand sides (Dirichlet Poisson
//! solves, Crank-Nicolson heat steps). [`BandedLu`] is a general complex band
//! LU with partial pivoting, used for the interleaved velocity/magnetic block
//! systems.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_complex::Complex64;

/// Pre-factored real tridiagonal matrix.
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    /// `lower[i]` multiplies x[i-1] in row i (lower[0] ignored), `upper[i]`
    /// multiplies x[i+1] (last entry ignored).
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        assert!(lower.len() == n && upper.len() == n);
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        for i in 0..n {
            let prev = if i == 0 {
                0.0
            } else {
                lower[i] * upper_mod[i - 1]
            };
            let piv = diag[i] - prev;
            if piv == 0.0 || !piv.is_finite() {
                return Err(Error::Singular { row: i });
            }
            inv_pivot[i] = 1.0 / piv;
            upper_mod[i] = upper[i] * inv_pivot[i];
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper_mod,
            inv_pivot,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Solves in place.
    pub fn solve_in_place<T: Scalar>(&self, rhs: &mut [T]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        for i in 0..n {
            let prev = if i == 0 {
                T::default()
            } else {
                rhs[i - 1] * self.lower[i]
            };
            rhs[i] = (rhs[i] - prev) * self.inv_pivot[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = rhs[i + 1];
            rhs[i] = rhs[i] - next * self.upper_mod[i];
        }
    }
}

/// Complex band LU factorization with partial pivoting.
///
/// Row `i` of `U` is stored starting at column `i` with width `kl + ku + 1`
/// (pivoting can push fill up to `kl` extra super-diagonals).
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    upper: Vec<Complex64>,
    multipliers: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Factors the `n x n` matrix whose nonzero entries lie within `kl`
    /// sub-diagonals and `ku` super-diagonals; `entry(i, j)` is queried only
    /// inside that band.
    pub fn factor<F>(n: usize, kl: usize, ku: usize, entry: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Complex64,
    {
        let width = kl + ku + 1;
        let zero = Complex64::new(0.0, 0.0);
        // Working rows: (start column, entries).
        let mut rows: Vec<(usize, Vec<Complex64>)> = (0..n)
            .map(|r| {
                let start = r.saturating_sub(kl);
                let mut v = vec![zero; width];
                let end = (r + ku).min(n - 1);
                for c in start..=end {
                    v[c - start] = entry(r, c);
                }
                (start, v)
            })
            .collect();
        let mut multipliers = vec![zero; n * kl];
        let mut pivots = vec![0usize; n];
        for i in 0..n {
            let last = (i + kl).min(n - 1);
            for row in rows.iter_mut().take(last + 1).skip(i) {
                let shift = i - row.0;
                if shift > 0 {
                    row.1.rotate_left(shift);
                    for v in row.1.iter_mut().skip(width - shift) {
                        *v = zero;
                    }
                    row.0 = i;
                }
            }
            let mut p = i;
            let mut best = rows[i].1[0].norm();
            for (r, row) in rows.iter().enumerate().take(last + 1).skip(i + 1) {
                let m = row.1[0].norm();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { row: i });
            }
            rows.swap(i, p);
            pivots[i] = p;
            let (head, tail) = rows.split_at_mut(i + 1);
            let pivot_row = &head[i].1;
            let inv = Complex64::new(1.0, 0.0) / pivot_row[0];
            for (off, row) in tail.iter_mut().take(last - i).enumerate() {
                let m = row.1[0] * inv;
                multipliers[i * kl + off] = m;
                if m != zero {
                    for c in 0..width {
                        row.1[c] -= m * pivot_row[c];
                    }
                }
                row.1[0] = zero;
            }
        }
        let mut upper = Vec::with_capacity(n * width);
        for (_, mut v) in rows {
            // store the pivot reciprocal; the solve multiplies instead of dividing
            v[0] = v[0].inv();
            upper.extend_from_slice(&v);
        }
        Ok(Self {
            n,
            kl,
            width,
            upper,
            multipliers,
            pivots,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let p = self.pivots[i];
            if p != i {
                b.swap(i, p);
            }
            let last = (i + self.kl).min(n - 1);
            let bi = b[i];
            for r in (i + 1)..=last {
                let m = self.multipliers[i * self.kl + (r - i - 1)];
                b[r] -= m * bi;
            }
        }
        for i in (0..n).rev() {
            let row = &self.upper[i * self.width..(i + 1) * self.width];
            let mut acc = b[i];
            let reach = self.width.min(n - i);
            for c in 1..reach {
                acc -= row[c] * b[i + c];
            }
            b[i] = acc * row[0];
        }
    }
}
