//! Per-mode implicit block for vertical diffusion coupled to the Shercliff
//! term. Unknowns are interleaved `(u_0, f_0, u_1, f_1, …)` so the system has
//! two sub- and two super-diagonals:
//!
//! ```text
//! c u_j - dt (D2 u)_j - dt i k f_j = r_j
//!       (D2 f)_j + i k u_j         = 0
//! ```
//!
//! with `u` and `f` zero at both ends of the strip.

use crate::banded::BandedLu;
use crate::error::Result;
use crate::grid::VerticalGrid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which linear terms are treated implicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearTerms {
    #[serde(default = "yes")]
    pub diffusion: bool,
    #[serde(default = "yes")]
    pub shercliff: bool,
}

fn yes() -> bool {
    true
}

impl Default for LinearTerms {
    fn default() -> Self {
        Self {
            diffusion: true,
            shercliff: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ImplicitBlock {
    lu: BandedLu,
    nz: usize,
}

impl ImplicitBlock {
    /// Factors the block for wavenumber `k`, step `dt` and leading coefficient `c`.
    pub fn new(v: &VerticalGrid, k: f64, dt: f64, c: f64, terms: LinearTerms) -> Result<Self> {
        let nz = v.len();
        let ik = Complex64::new(0.0, k);
        let entry = |row: usize, col: usize| -> Complex64 {
            let j = row / 2;
            let boundary = j == 0 || j == nz - 1;
            let zero = Complex64::default();
            if row % 2 == 0 {
                // u equation
                if boundary {
                    return if col == row {
                        Complex64::new(1.0, 0.0)
                    } else {
                        zero
                    };
                }
                if col % 2 == 0 {
                    let jc = col / 2;
                    let mut a = if jc == j { c } else { 0.0 };
                    if terms.diffusion && jc + 1 >= j && jc <= j + 1 {
                        let (l, d, u) = v.d2_row(j);
                        a -= dt * [l, d, u][jc + 1 - j];
                    }
                    Complex64::new(a, 0.0)
                } else if col == row + 1 && terms.shercliff {
                    -ik * dt
                } else {
                    zero
                }
            } else {
                // f equation
                if boundary {
                    return if col == row {
                        Complex64::new(1.0, 0.0)
                    } else {
                        zero
                    };
                }
                if col % 2 == 1 {
                    let jc = col / 2;
                    if jc + 1 >= j && jc <= j + 1 {
                        let (l, d, u) = v.d2_row(j);
                        Complex64::new([l, d, u][jc + 1 - j], 0.0)
                    } else {
                        zero
                    }
                } else if col + 1 == row {
                    ik
                } else {
                    zero
                }
            }
        };
        let lu = BandedLu::factor(2 * nz, 2, 2, entry)?;
        Ok(Self { lu, nz })
    }

    /// Solves with right-hand side `rhs` for `u`; end values of `rhs` are
    /// ignored. Returns `f` in `f_out` when given.
    pub fn solve(
        &self,
        rhs: &[Complex64],
        u_out: &mut [Complex64],
        f_out: Option<&mut [Complex64]>,
    ) {
        let nz = self.nz;
        let mut b = vec![Complex64::default(); 2 * nz];
        for j in 1..nz - 1 {
            b[2 * j] = rhs[j];
        }
        self.lu.solve_in_place(&mut b);
        for j in 0..nz {
            u_out[j] = b[2 * j];
        }
        u_out[0] = Complex64::default();
        u_out[nz - 1] = Complex64::default();
        if let Some(f) = f_out {
            for j in 0..nz {
                f[j] = b[2 * j + 1];
            }
        }
    }
}
