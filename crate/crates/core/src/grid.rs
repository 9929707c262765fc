//! Discretization of the half-space strip.
//!
//! The tangential directions are periodic and handled spectrally; the
//! vertical direction is a (possibly stretched) node set on `[0, z_max]` with
//! second-order finite-difference stencils and trapezoid quadrature. The
//! stencils are built so that the discrete second derivative is the exact
//! adjoint of the edge difference under the trapezoid weights:
//!
//! ```text
//! sum_j w_j a_j (D2 b)_j = - sum_e h_e (Δa/h_e)(Δb/h_e)     when a, b vanish at both ends
//! ```
//!
//! which is what makes the Shercliff dissipation identity hold to roundoff.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Grid parameters as they appear in scenario configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_lx")]
    pub lx: f64,
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default = "default_nz")]
    pub nz: usize,
    #[serde(default)]
    pub stretch: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ly: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
}

fn default_lx() -> f64 {
    2.0 * PI
}
fn default_nx() -> usize {
    64
}
fn default_z_max() -> f64 {
    20.0
}
fn default_nz() -> usize {
    201
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lx: default_lx(),
            nx: default_nx(),
            z_max: default_z_max(),
            nz: default_nz(),
            stretch: 0.0,
            ly: None,
            ny: None,
        }
    }
}

impl GridConfig {
    pub fn new_2d(lx: f64, nx: usize, z_max: f64, nz: usize, stretch: f64) -> Self {
        Self {
            lx,
            nx,
            z_max,
            nz,
            stretch,
            ly: None,
            ny: None,
        }
    }

    pub fn new_3d(lx: f64, nx: usize, ly: f64, ny: usize, z_max: f64, nz: usize) -> Self {
        Self {
            lx,
            nx,
            z_max,
            nz,
            stretch: 0.0,
            ly: Some(ly),
            ny: Some(ny),
        }
    }
}

/// Finite-difference weights for the derivatives of order `0..=m` at `x0`
/// from the nodes `xs` (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Clone, Debug)]
struct Stencil {
    start: usize,
    coefs: Vec<f64>,
}

impl Stencil {
    #[inline]
    fn apply<T: Scalar>(&self, f: &[T]) -> T {
        let mut acc = T::default();
        for (k, c) in self.coefs.iter().enumerate() {
            acc += f[self.start + k] * *c;
        }
        acc
    }
}

/// The vertical node set with its stencils and quadrature.
#[derive(Clone, Debug)]
pub struct VerticalGrid {
    z: Vec<f64>,
    edge_len: Vec<f64>,
    edge_mid: Vec<f64>,
    weights: Vec<f64>,
    simpson: Vec<f64>,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
    stretch: f64,
}

impl VerticalGrid {
    /// Nodes `z_j = z_max * sinh(stretch * s_j) / sinh(stretch)` for uniform
    /// `s_j` in `[0, 1]`; `stretch = 0` gives uniform spacing.
    pub fn new(z_max: f64, nz: usize, stretch: f64) -> Result<Self> {
        if !(z_max > 0.0) || !z_max.is_finite() {
            return Err(Error::InvalidGrid(
                "vertical height must be positive".into(),
            ));
        }
        if nz < 9 {
            return Err(Error::InvalidGrid(
                "vertical node count must be at least 9".into(),
            ));
        }
        if !(stretch >= 0.0) || !stretch.is_finite() {
            return Err(Error::InvalidGrid("stretch must be non-negative".into()));
        }
        let last = (nz - 1) as f64;
        let mut z: Vec<f64> = (0..nz)
            .map(|j| {
                let s = j as f64 / last;
                if stretch == 0.0 {
                    z_max * s
                } else {
                    z_max * (stretch * s).sinh() / stretch.sinh()
                }
            })
            .collect();
        z[0] = 0.0;
        z[nz - 1] = z_max;
        Self::from_nodes(z, stretch)
    }

    /// Builds the operators on an explicit node set.
    pub fn from_nodes(z: Vec<f64>, stretch: f64) -> Result<Self> {
        let nz = z.len();
        if nz < 9 {
            return Err(Error::InvalidGrid(
                "vertical node count must be at least 9".into(),
            ));
        }
        if z[0] != 0.0 {
            return Err(Error::InvalidGrid("first node must be z = 0".into()));
        }
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(
                "nodes must be strictly increasing".into(),
            ));
        }
        let edge_len: Vec<f64> = z.windows(2).map(|w| w[1] - w[0]).collect();
        let edge_mid: Vec<f64> = z.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut weights = vec![0.0; nz];
        for (e, h) in edge_len.iter().enumerate() {
            weights[e] += 0.5 * h;
            weights[e + 1] += 0.5 * h;
        }
        let simpson = simpson_weights(&edge_len);
        let mut d1 = Vec::with_capacity(nz);
        let mut d2 = Vec::with_capacity(nz);
        for j in 0..nz {
            let s1 = if j == 0 {
                0
            } else if j == nz - 1 {
                nz - 3
            } else {
                j - 1
            };
            let w = fd_weights(z[j], &z[s1..s1 + 3], 1);
            d1.push(Stencil {
                start: s1,
                coefs: w[1].clone(),
            });
            if j == 0 || j == nz - 1 {
                let s2 = if j == 0 { 0 } else { nz - 4 };
                let w = fd_weights(z[j], &z[s2..s2 + 4], 2);
                d2.push(Stencil {
                    start: s2,
                    coefs: w[2].clone(),
                });
            } else {
                let (hm, hp) = (edge_len[j - 1], edge_len[j]);
                let inv_w = 1.0 / weights[j];
                d2.push(Stencil {
                    start: j - 1,
                    coefs: vec![inv_w / hm, -inv_w * (1.0 / hm + 1.0 / hp), inv_w / hp],
                });
            }
        }
        Ok(Self {
            z,
            edge_len,
            edge_mid,
            weights,
            simpson,
            d1,
            d2,
            stretch,
        })
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.z
    }

    pub fn z_max(&self) -> f64 {
        *self.z.last().unwrap()
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_len
    }

    pub fn edge_midpoints(&self) -> &[f64] {
        &self.edge_mid
    }

    /// Nodal first derivative; three-point Lagrange stencils, one-sided at the
    /// ends. Exact on quadratics.
    pub fn d1<T: Scalar>(&self, f: &[T], out: &mut [T]) {
        for (o, s) in out.iter_mut().zip(&self.d1) {
            *o = s.apply(f);
        }
    }

    /// Nodal second derivative. Interior rows are the conservative three-point
    /// form; the end rows use four-point one-sided stencils.
    pub fn d2<T: Scalar>(&self, f: &[T], out: &mut [T]) {
        for (o, s) in out.iter_mut().zip(&self.d2) {
            *o = s.apply(f);
        }
    }

    pub fn d1_vec<T: Scalar>(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); f.len()];
        self.d1(f, &mut out);
        out
    }

    pub fn d2_vec<T: Scalar>(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); f.len()];
        self.d2(f, &mut out);
        out
    }

    /// Coefficients `(lower, diag, upper)` of the interior row `j` of `d2`.
    pub fn d2_row(&self, j: usize) -> (f64, f64, f64) {
        debug_assert!(j > 0 && j + 1 < self.len());
        let c = &self.d2[j].coefs;
        (c[0], c[1], c[2])
    }

    /// Difference quotients on the edges `[z_j, z_{j+1}]`.
    pub fn edge_diff<T: Scalar>(&self, f: &[T]) -> Vec<T> {
        f.windows(2)
            .zip(&self.edge_len)
            .map(|(w, h)| (w[1] - w[0]) * (1.0 / h))
            .collect()
    }

    /// Summation-by-parts first derivative `W^{-1} Q` with `Q + Q^T = diag(-1, 0, ..., 0, 1)`.
    pub fn sbp_d1<T: Scalar>(&self, f: &[T]) -> Vec<T> {
        let n = f.len();
        let mut out = vec![T::default(); n];
        out[0] = (f[1] - f[0]) * (0.5 / self.weights[0]);
        for j in 1..n - 1 {
            out[j] = (f[j + 1] - f[j - 1]) * (0.5 / self.weights[j]);
        }
        out[n - 1] = (f[n - 1] - f[n - 2]) * (0.5 / self.weights[n - 1]);
        out
    }

    /// Composite Simpson weights (quadratic panels over node pairs; a final
    /// trapezoid interval when the edge count is odd). Higher order than the
    /// trapezoid rule but not paired with the difference operators, so it is
    /// used for accuracy-sensitive scalar integrals only.
    pub fn simpson_weights(&self) -> &[f64] {
        &self.simpson
    }

    pub fn integrate_simpson(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.simpson).map(|(a, w)| a * w).sum()
    }

    /// Trapezoid integral.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// Trapezoid integral of `|f|^2`, optionally weighted nodewise.
    pub fn norm2<T: Scalar>(&self, f: &[T], weight: Option<&[f64]>) -> f64 {
        match weight {
            None => f.iter().zip(&self.weights).map(|(a, w)| a.abs2() * w).sum(),
            Some(m) => f
                .iter()
                .zip(&self.weights)
                .zip(m)
                .map(|((a, w), m)| a.abs2() * w * m)
                .sum(),
        }
    }

    /// Discrete `∫ g(z) |∂_z f|^2 dz` with the derivative on edges and `g`
    /// evaluated at edge midpoints.
    pub fn edge_norm2<T: Scalar>(&self, f: &[T], g: impl Fn(f64) -> f64) -> f64 {
        f.windows(2)
            .zip(self.edge_len.iter().zip(&self.edge_mid))
            .map(|(w, (h, zm))| g(*zm) * (w[1] - w[0]).abs2() / h)
            .sum()
    }

    /// Cumulative trapezoid integral from `z = 0`.
    pub fn cumulative<T: Scalar>(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); f.len()];
        for j in 1..f.len() {
            out[j] = out[j - 1] + (f[j - 1] + f[j]) * (0.5 * self.edge_len[j - 1]);
        }
        out
    }
}

fn simpson_weights(h: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; h.len() + 1];
    let mut e = 0;
    while e + 1 < h.len() {
        let (a, b) = (h[e], h[e + 1]);
        let s = (a + b) / 6.0;
        w[e] += s * (2.0 - b / a);
        w[e + 1] += s * (a + b) * (a + b) / (a * b);
        w[e + 2] += s * (2.0 - a / b);
        e += 2;
    }
    if e < h.len() {
        w[e] += 0.5 * h[e];
        w[e + 1] += 0.5 * h[e];
    }
    w
}

/// Tensor grid: periodic tangential modes times the vertical node set.
#[derive(Clone, Debug)]
pub struct HalfStripGrid {
    pub lx: f64,
    pub nx: usize,
    pub ly: Option<f64>,
    pub ny: Option<usize>,
    pub vertical: VerticalGrid,
}

/// `make_grid`: validates the config and attaches stencils and quadrature.
pub fn make_grid(config: &GridConfig) -> Result<HalfStripGrid> {
    if config.nx % 2 != 0 {
        return Err(Error::InvalidGrid(
            "tangential mode count must be even".into(),
        ));
    }
    if config.nx < 4 {
        return Err(Error::InvalidGrid(
            "tangential mode count must be at least 4".into(),
        ));
    }
    if !(config.lx > 0.0) || !config.lx.is_finite() {
        return Err(Error::InvalidGrid(
            "tangential period must be positive".into(),
        ));
    }
    match (config.ly, config.ny) {
        (None, None) => {}
        (Some(ly), Some(ny)) => {
            if ny % 2 != 0 || ny < 4 {
                return Err(Error::InvalidGrid(
                    "tangential mode count must be even".into(),
                ));
            }
            if !(ly > 0.0) || !ly.is_finite() {
                return Err(Error::InvalidGrid(
                    "tangential period must be positive".into(),
                ));
            }
        }
        _ => {
            return Err(Error::InvalidGrid(
                "ly and ny must be given together".into(),
            ))
        }
    }
    let vertical = VerticalGrid::new(config.z_max, config.nz, config.stretch)?;
    Ok(HalfStripGrid {
        lx: config.lx,
        nx: config.nx,
        ly: config.ly,
        ny: config.ny,
        vertical,
    })
}

impl HalfStripGrid {
    pub fn nz(&self) -> usize {
        self.vertical.len()
    }

    pub fn is_3d(&self) -> bool {
        self.ny.is_some()
    }

    /// Stored x-mode count (non-negative half spectrum).
    pub fn nkx(&self) -> usize {
        self.nx / 2 + 1
    }

    /// Stored y-mode count (full spectrum in FFT order, 1 for 2D grids).
    pub fn nky(&self) -> usize {
        self.ny.unwrap_or(1)
    }

    /// Physical x-wavenumber of the stored index.
    pub fn kx(&self, index: usize) -> f64 {
        2.0 * PI * index as f64 / self.lx
    }

    /// Signed integer y-mode for a stored index in FFT order.
    pub fn ky_signed(&self, index: usize) -> i64 {
        let ny = self.nky() as i64;
        let i = index as i64;
        if i < ny / 2 {
            i
        } else {
            i - ny
        }
    }

    /// Physical y-wavenumber of the stored index.
    pub fn ky(&self, index: usize) -> f64 {
        match self.ly {
            Some(ly) => 2.0 * PI * self.ky_signed(index) as f64 / ly,
            None => 0.0,
        }
    }

    /// Largest x-index kept by the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.nx / 3
    }

    pub fn config(&self) -> GridConfig {
        GridConfig {
            lx: self.lx,
            nx: self.nx,
            z_max: self.vertical.z_max(),
            nz: self.nz(),
            stretch: self.vertical.stretch(),
            ly: self.ly,
            ny: self.ny,
        }
    }
}

/// `⟨z⟩ = (1 + z^2)^{1/2}`.
#[inline]
pub fn bracket(z: f64) -> f64 {
    (1.0 + z * z).sqrt()
}

/// Gaussian weight `μ_λ(t, z) = exp(λ z^2 / (4 (1 + t)))`.
#[inline]
pub fn mu(lambda: f64, t: f64, z: f64) -> f64 {
    (lambda * z * z / (4.0 * (1.0 + t))).exp()
}

/// Weight functions sampled at the grid nodes.
#[derive(Clone, Debug)]
pub struct WeightProfile {
    pub bracket_z: Vec<f64>,
    pub lambda: f64,
    pub t: f64,
    pub mu_values: Vec<f64>,
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!(
            "weight exponent {lambda} outside [0, 1]"
        )));
    }
    Ok(())
}

/// `weight_values`: `⟨z⟩` and `μ_λ(t, ·)` at every vertical node.
pub fn weight_values(grid: &VerticalGrid, lambda: f64, t: f64) -> Result<WeightProfile> {
    check_lambda(lambda)?;
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!("time {t} must be non-negative")));
    }
    Ok(WeightProfile {
        bracket_z: grid.nodes().iter().map(|&z| bracket(z)).collect(),
        lambda,
        t,
        mu_values: grid.nodes().iter().map(|&z| mu(lambda, t, z)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_grid_spacing() {
        let g = make_grid(&GridConfig::new_2d(2.0 * PI, 4, 1.0, 9, 0.0)).unwrap();
        for h in g.vertical.edge_lengths() {
            assert!((h - 0.125).abs() < 1e-15);
        }
        assert_eq!(g.vertical.nodes()[0], 0.0);
        assert_eq!(g.vertical.z_max(), 1.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let e = make_grid(&GridConfig::new_2d(2.0 * PI, 3, 1.0, 9, 0.0)).unwrap_err();
        assert!(e.to_string().contains("tangential mode count must be even"));
        assert!(make_grid(&GridConfig::new_2d(2.0 * PI, 4, 0.0, 9, 0.0)).is_err());
        assert!(make_grid(&GridConfig::new_2d(2.0 * PI, 4, 1.0, 8, 0.0)).is_err());
    }

    #[test]
    fn stretched_grid_clusters_near_wall() {
        let g = VerticalGrid::new(20.0, 101, 3.0).unwrap();
        let low = g.nodes().iter().filter(|&&z| z <= 5.0).count();
        let high = g.nodes().iter().filter(|&&z| z >= 15.0).count();
        assert!(low >= 2 * high, "low {low} high {high}");
    }

    #[test]
    fn quadrature_weights_sum_to_height() {
        for stretch in [0.0, 1.5, 4.0] {
            let g = VerticalGrid::new(20.0, 57, stretch).unwrap();
            for w in [g.weights(), g.simpson_weights()] {
                let s: f64 = w.iter().sum();
                assert!((s - 20.0).abs() <= 1e-12 * 20.0);
                assert!(w.iter().all(|&w| w > 0.0));
            }
        }
    }

    #[test]
    fn derivative_stencils_exact_on_quadratics() {
        let g = VerticalGrid::new(7.0, 33, 2.5).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|z| z * z).collect();
        let d1 = g.d1_vec(&f);
        let d2 = g.d2_vec(&f);
        for (j, z) in g.nodes().iter().enumerate() {
            assert!((d1[j] - 2.0 * z).abs() < 1e-10);
            assert!((d2[j] - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_of_exponential() {
        let exact = 1.0 - (-20.0f64).exp();
        for nz in [201, 202, 401] {
            let g = VerticalGrid::new(20.0, nz, 0.0).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|z| (-z).exp()).collect();
            let err = (g.integrate_simpson(&f) - exact).abs();
            assert!(err < 1e-6, "{nz}: {err}");
            // trapezoid error is h^2/12 * (f'(b) - f'(a))
            let h = 20.0 / (nz - 1) as f64;
            let trap = g.integrate(&f) - exact;
            assert!((trap - h * h / 12.0).abs() < 1e-2 * h * h, "{trap}");
        }
    }

    #[test]
    fn weights_special_values() {
        let g = VerticalGrid::from_nodes(vec![0.0, 1.0, 3.0, 2.0, 4.0, 5.0, 6.0, 7.0, 8.0], 0.0);
        assert!(g.is_err(), "non-monotone nodes must be rejected");
        let g = VerticalGrid::from_nodes(
            vec![0.0, 1.0, 3.0f64.sqrt(), 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
            0.0,
        )
        .unwrap();
        let w = weight_values(&g, 1.0, 0.0).unwrap();
        assert_eq!(w.bracket_z[0], 1.0);
        assert!((w.bracket_z[2] - 2.0).abs() < 1e-15);
        assert!((w.mu_values[3] - std::f64::consts::E).abs() < 1e-14);
        let w0 = weight_values(&g, 0.0, 3.0).unwrap();
        assert!(w0.mu_values.iter().all(|&m| m == 1.0));
        assert!(weight_values(&g, 1.5, 0.0).is_err());
        assert!(weight_values(&g, -0.1, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn sbp_adjointness(seed in 0u64..1000, stretch in 0.0f64..3.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = VerticalGrid::new(10.0, 41, stretch).unwrap();
            let n = g.len();
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let da = g.sbp_d1(&a);
            let db = g.sbp_d1(&b);
            let lhs: f64 = (0..n).map(|j| g.weights()[j] * (da[j] * b[j] + a[j] * db[j])).sum();
            let flux = a[n - 1] * b[n - 1] - a[0] * b[0];
            prop_assert!((lhs - flux).abs() < 1e-12);
        }

        #[test]
        fn d2_is_adjoint_of_edge_difference(seed in 0u64..1000, stretch in 0.0f64..3.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = VerticalGrid::new(10.0, 41, stretch).unwrap();
            let n = g.len();
            let mut a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            a[0] = 0.0; a[n - 1] = 0.0; b[0] = 0.0; b[n - 1] = 0.0;
            let d2b = g.d2_vec(&b);
            let lhs: f64 = (1..n - 1).map(|j| g.weights()[j] * a[j] * d2b[j]).sum();
            let ea = g.edge_diff(&a);
            let eb = g.edge_diff(&b);
            let rhs: f64 = -(0..n - 1).map(|e| g.edge_lengths()[e] * ea[e] * eb[e]).sum::<f64>();
            prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + rhs.abs()));
        }

        #[test]
        fn mu_nondecreasing(lambda in 0.0f64..=1.0, t in 0.0f64..100.0) {
            let g = VerticalGrid::new(20.0, 51, 1.0).unwrap();
            let w = weight_values(&g, lambda, t).unwrap();
            prop_assert_eq!(w.mu_values[0], 1.0);
            prop_assert!(w.mu_values.windows(2).all(|p| p[1] >= p[0]));
            prop_assert!(w.bracket_z.iter().all(|&b| b >= 1.0));
        }
    }
}
