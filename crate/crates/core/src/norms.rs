//! Weighted energy functionals, the energy-budget audit, the derivative
//! ladder and tangential radius estimation.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::bracket;
use crate::shercliff::{area, multiplicity};
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Squared `𝓗¹` norm: `∥u∥²_{H¹ₓL²_z} + ∥⟨z⟩∂_z u∥²_{H¹ₓL²_z}`.
///
/// The vertical derivative lives on edges with `⟨z⟩` taken at edge midpoints.
pub fn h1_weighted_norm_sq(u: &SpectralField) -> f64 {
    let grid = u.grid();
    let v = &grid.vertical;
    let mut total = 0.0;
    for kx in 0..u.nkx() {
        let k = grid.kx(kx);
        let c = multiplicity(kx) * (1.0 + k * k);
        for ky in 0..u.nky() {
            let m = u.mode(kx, ky);
            let plain = v.norm2(m, None);
            let grad = v.edge_norm2(m, |z| 1.0 + z * z);
            total += c * (plain + grad);
        }
    }
    area(grid) * total
}

pub fn h1_weighted_norm(u: &SpectralField) -> f64 {
    h1_weighted_norm_sq(u).sqrt()
}

/// `𝒟 = ∥⟨z⟩∂_z²u∥²_{H¹ₓL²_z} + ∥⟨z⟩∂_x u∥²_{H¹ₓL²_z}`.
pub fn dissipation_functional(u: &SpectralField) -> f64 {
    let grid = u.grid();
    let v = &grid.vertical;
    let bz2: Vec<f64> = v.nodes().iter().map(|&z| 1.0 + z * z).collect();
    let mut d2 = vec![Complex64::default(); u.nz()];
    let mut total = 0.0;
    for kx in 0..u.nkx() {
        let k = grid.kx(kx);
        let c = multiplicity(kx) * (1.0 + k * k);
        for ky in 0..u.nky() {
            let m = u.mode(kx, ky);
            v.d2(m, &mut d2);
            let curv = v.norm2(&d2, Some(&bz2));
            let tang = if kx > 0 {
                k * k * v.norm2(m, Some(&bz2))
            } else {
                0.0
            };
            total += c * (curv + tang);
        }
    }
    area(grid) * total
}

/// Time series of monitored functionals with a fixed column set. The first
/// column is always `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl NormReport {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        let columns: Vec<String> = columns.iter().map(|c| c.as_ref().to_string()).collect();
        assert_eq!(columns.first().map(String::as_str), Some("t"));
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Parameter(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(last) = self.rows.last() {
            if !(row[0] > last[0]) {
                return Err(Error::Parameter(format!(
                    "time stamps must increase: {} after {}",
                    row[0], last[0]
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn truncate(&mut self, len: usize) {
        self.rows.truncate(len);
    }
}

/// Outcome of the energy-budget check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityAudit {
    pub pass: bool,
    /// `min_i (ε₀² − ∥u(t_i)∥² − ∫_0^{t_i} 𝒟)`.
    pub worst_slack: f64,
    pub worst_index: usize,
}

/// Checks `∥u(t_i)∥²_{𝓗¹} + ∫_0^{t_i} 𝒟 ≤ ε₀² (1 + rel_tol)` using the
/// `h1_norm` and `cum_dissipation` columns.
pub fn monotonicity_audit(
    report: &NormReport,
    eps0: f64,
    rel_tol: f64,
) -> Result<MonotonicityAudit> {
    if report.is_empty() {
        return Err(Error::InsufficientSamples("empty report".into()));
    }
    let norm = report
        .column("h1_norm")
        .ok_or_else(|| Error::Parameter("report has no h1_norm column".into()))?;
    let cum = report
        .column("cum_dissipation")
        .ok_or_else(|| Error::Parameter("report has no cum_dissipation column".into()))?;
    let budget = eps0 * eps0;
    let mut worst = f64::INFINITY;
    let mut at = 0;
    for (i, (n, c)) in norm.iter().zip(&cum).enumerate() {
        let slack = budget - (n * n + c);
        if slack < worst {
            worst = slack;
            at = i;
        }
    }
    Ok(MonotonicityAudit {
        pass: worst >= -rel_tol * budget,
        worst_slack: worst,
        worst_index: at,
    })
}

/// Cumulative trapezoid integral of a sampled series.
pub fn cumulative_trapezoid(t: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; t.len()];
    for i in 1..t.len() {
        out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (values[i] + values[i - 1]);
    }
    out
}

/// One rung of the derivative ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderEntry {
    /// `(k, m, j)`: orders in `t`, `x`, `z`.
    pub alpha: [usize; 3],
    /// `sup_t t^{k+m+j/2} ∥∂_t^k ∂_x^m ∂_z^j u∥_{𝓗¹}` over the usable samples.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ladder {
    pub entries: Vec<LadderEntry>,
    pub c0: f64,
}

/// All multi-indices with `|α| ≤ cap`, ordered by total order then
/// lexicographically.
pub fn multi_indices(cap: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for n in 0..=cap {
        for k in (0..=n).rev() {
            for m in (0..=n - k).rev() {
                out.push([k, m, n - k - m]);
            }
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn time_derivative(
    snaps: &[(f64, SpectralField)],
    i: usize,
    order: usize,
    h: f64,
) -> Vec<Complex64> {
    let d = |o: isize| snaps[(i as isize + o) as usize].1.data();
    let n = snaps[i].1.data().len();
    let mut out = vec![Complex64::default(); n];
    match order {
        0 => out.copy_from_slice(d(0)),
        1 => {
            let s = 0.5 / h;
            for (q, o) in out.iter_mut().enumerate() {
                *o = (d(1)[q] - d(-1)[q]) * s;
            }
        }
        2 => {
            let s = 1.0 / (h * h);
            for (q, o) in out.iter_mut().enumerate() {
                *o = (d(1)[q] - d(0)[q] * 2.0 + d(-1)[q]) * s;
            }
        }
        _ => {
            let s = 0.5 / (h * h * h);
            for (q, o) in out.iter_mut().enumerate() {
                *o = (d(2)[q] - d(1)[q] * 2.0 + d(-1)[q] * 2.0 - d(-2)[q]) * s;
            }
        }
    }
    out
}

fn apply_xz(u: &SpectralField, m: usize, j: usize) -> SpectralField {
    let grid = u.grid().clone();
    let v = &grid.vertical;
    let mut out = SpectralField::zeros(&grid);
    for kx in 0..u.nkx() {
        let factor = (I * grid.kx(kx)).powu(m as u32);
        for ky in 0..u.nky() {
            let src: Vec<Complex64> = u.mode(kx, ky).iter().map(|a| a * factor).collect();
            let d = match j {
                0 => src,
                1 => v.d1_vec(&src),
                2 => v.d2_vec(&src),
                _ => v.d1_vec(&v.d2_vec(&src)),
            };
            out.mode_mut(kx, ky).copy_from_slice(&d);
        }
    }
    out
}

/// `smoothing_ladder`: time derivatives from centered differences on the
/// snapshots, `x` derivatives spectrally, `z` derivatives by stencils.
pub fn smoothing_ladder(
    snapshots: &[(f64, SpectralField)],
    cap: usize,
    eps0: f64,
) -> Result<Ladder> {
    if cap > 3 {
        return Err(Error::Parameter(format!("ladder cap {cap} exceeds 3")));
    }
    if snapshots.len() < 5 {
        return Err(Error::InsufficientSamples(format!(
            "{} snapshots, need at least 5",
            snapshots.len()
        )));
    }
    let h = snapshots[1].0 - snapshots[0].0;
    for w in snapshots.windows(2) {
        if !((w[1].0 - w[0].0 - h).abs() <= 1e-9 * h.abs().max(1e-300)) || !(h > 0.0) {
            return Err(Error::Parameter(
                "snapshots must be uniformly spaced".into(),
            ));
        }
        w[0].1.check_grid(&w[1].1)?;
    }
    let n = snapshots.len();
    let grid = snapshots[0].1.grid().clone();
    let mut entries = Vec::new();
    for alpha in multi_indices(cap) {
        let [k, m, j] = alpha;
        let margin = match k {
            0 => 0,
            1 | 2 => 1,
            _ => 2,
        };
        let mut value: f64 = 0.0;
        for i in margin..n - margin {
            let t = snapshots[i].0;
            let dt = SpectralField::from_data(&grid, time_derivative(snapshots, i, k, h))?;
            let d = apply_xz(&dt, m, j);
            let weight = t.powf((k + m) as f64 + 0.5 * j as f64);
            value = value.max(weight * h1_weighted_norm(&d));
        }
        entries.push(LadderEntry { alpha, value });
    }
    let c0 = ladder_constant(&entries, eps0);
    Ok(Ladder { entries, c0 })
}

/// Least `C₀` with `value_α ≤ ε₀ C₀^{|α|} |α|!` over the entries with `|α| ≥ 1`.
pub fn ladder_constant(entries: &[LadderEntry], eps0: f64) -> f64 {
    entries
        .iter()
        .filter_map(|e| {
            let n: usize = e.alpha.iter().sum();
            if n == 0 {
                return None;
            }
            Some((e.value / (eps0 * factorial(n))).powf(1.0 / n as f64))
        })
        .fold(0.0, f64::max)
}

/// Relative floor below which a mode is treated as noise.
pub const RADIUS_NOISE_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusFit {
    pub radius: f64,
    pub active_modes: usize,
}

/// Per-x-mode `L²_z` amplitudes `∥û_k∥`, excluding the Nyquist row.
pub fn mode_amplitudes(u: &SpectralField) -> Vec<f64> {
    let v = &u.grid().vertical;
    (0..u.nkx() - 1)
        .map(|kx| {
            (0..u.nky())
                .map(|ky| v.norm2(u.mode(kx, ky), None))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Least-squares decay rate of `log ∥û_k∥` against `|k'|` over the modes
/// `k ≥ 1` above the noise floor (relative to the largest amplitude).
pub fn tangential_radius_fit(u: &SpectralField) -> Result<RadiusFit> {
    let amps = mode_amplitudes(u);
    let top = amps.iter().cloned().fold(0.0, f64::max);
    let grid = u.grid();
    let pts: Vec<(f64, f64)> = amps
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &a)| top > 0.0 && a > RADIUS_NOISE_FLOOR * top)
        .map(|(k, &a)| (grid.kx(k), a.ln()))
        .collect();
    if pts.len() < 6 {
        return Err(Error::Indeterminate(format!(
            "{} active modes above the noise floor, need 6",
            pts.len()
        )));
    }
    let slope = least_squares_slope(&pts);
    Ok(RadiusFit {
        radius: -slope,
        active_modes: pts.len(),
    })
}

/// Slope of the least-squares line through `(x, y)` pairs.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Discrete `H¹ₓH¹_z` norm squared without the `⟨z⟩` weight.
pub fn plain_h1_sq(u: &SpectralField) -> f64 {
    let grid = u.grid();
    let v = &grid.vertical;
    let mut total = 0.0;
    for kx in 0..u.nkx() {
        let k = grid.kx(kx);
        let c = multiplicity(kx) * (1.0 + k * k);
        for ky in 0..u.nky() {
            let m = u.mode(kx, ky);
            total += c * (v.norm2(m, None) + v.edge_norm2(m, |_| 1.0));
        }
    }
    area(grid) * total
}

/// `max ⟨z⟩` on the grid; used in norm-equivalence checks.
pub fn bracket_max(u: &SpectralField) -> f64 {
    bracket(u.grid().vertical.z_max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridConfig, HalfStripGrid};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(nx: usize, nz: usize) -> Arc<HalfStripGrid> {
        Arc::new(make_grid(&GridConfig::new_2d(2.0 * PI, nx, 20.0, nz, 0.0)).unwrap())
    }

    fn random_field(g: &Arc<HalfStripGrid>, seed: u64) -> SpectralField {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut u = SpectralField::zeros(g);
        let z = g.vertical.nodes().to_vec();
        for kx in 0..u.nkx() {
            let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let s = rng.random_range(0.5..2.0);
            for (j, zz) in z.iter().enumerate() {
                u.mode_mut(kx, 0)[j] = a * zz * (-zz * zz / s).exp() / (1.0 + kx as f64).powi(2);
            }
        }
        u.enforce_real();
        u
    }

    #[test]
    fn zero_field_functionals() {
        let g = grid(8, 33);
        let u = SpectralField::zeros(&g);
        assert_eq!(h1_weighted_norm(&u), 0.0);
        assert_eq!(dissipation_functional(&u), 0.0);
    }

    #[test]
    fn functionals_are_quadratic() {
        let g = grid(16, 101);
        let u = random_field(&g, 3);
        for c in [2.0, -0.5, 1e-3] {
            let v = u.scaled(c);
            let a = h1_weighted_norm_sq(&v) / h1_weighted_norm_sq(&u);
            let b = dissipation_functional(&v) / dissipation_functional(&u);
            assert!((a - c * c).abs() <= 1e-12 * c * c);
            assert!((b - c * c).abs() <= 1e-12 * c * c);
        }
        assert!((h1_weighted_norm(&u.scaled(2.0)) - 2.0 * h1_weighted_norm(&u)).abs() < 1e-12);
    }

    #[test]
    fn weighted_norm_within_plain_norm_bound() {
        let g = grid(16, 101);
        for seed in 0..10 {
            let u = random_field(&g, seed);
            let b = bracket_max(&u);
            assert!(h1_weighted_norm_sq(&u) <= b * b * plain_h1_sq(&u));
        }
    }

    #[test]
    fn x_independent_dissipation_is_curvature_only() {
        let g = grid(8, 201);
        let mut u = SpectralField::zeros(&g);
        let z = g.vertical.nodes().to_vec();
        for (j, zz) in z.iter().enumerate() {
            u.mode_mut(0, 0)[j] = Complex64::new(zz * (-zz * zz / 2.0).exp(), 0.0);
        }
        let d2 = g.vertical.d2_vec(u.mode(0, 0));
        let bz: Vec<f64> = z.iter().map(|z| 1.0 + z * z).collect();
        let expected = 2.0 * PI * g.vertical.norm2(&d2, Some(&bz));
        assert!((dissipation_functional(&u) - expected).abs() < 1e-14 * expected);
    }

    fn report(ts: &[f64], norm_sq: impl Fn(f64) -> f64, diss: impl Fn(f64) -> f64) -> NormReport {
        let mut r = NormReport::new(&["t", "h1_norm", "dissipation", "cum_dissipation"]);
        let d: Vec<f64> = ts.iter().map(|&t| diss(t)).collect();
        let cum = cumulative_trapezoid(ts, &d);
        for (i, &t) in ts.iter().enumerate() {
            r.push(vec![t, norm_sq(t).sqrt(), d[i], cum[i]]).unwrap();
        }
        r
    }

    #[test]
    fn audit_of_synthetic_series() {
        let eps = 0.01;
        let ts: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let zero = report(&ts, |_| 0.0, |_| 0.0);
        let a = monotonicity_audit(&zero, eps, 0.0).unwrap();
        assert!(a.pass);
        assert_eq!(a.worst_slack, eps * eps);

        let exact = report(&ts, |t| eps * eps * (-t).exp(), |t| eps * eps * (-t).exp());
        let a = monotonicity_audit(&exact, eps, 1e-4).unwrap();
        assert!(a.pass, "{a:?}");
        assert!(a.worst_slack.abs() < 1e-5 * eps * eps);

        let bad = report(&ts, |t| eps * eps * (1.0 + 0.1 * t), |_| 0.0);
        let a = monotonicity_audit(&bad, eps, 1e-6).unwrap();
        assert!(!a.pass);
        assert!(a.worst_slack < 0.0);
        assert_eq!(a.worst_index, ts.len() - 1);
    }

    #[test]
    fn radius_of_synthetic_spectra() {
        let g = grid(64, 33);
        let mut u = SpectralField::zeros(&g);
        for kx in 0..u.nkx() - 1 {
            let a = (-0.7 * kx as f64).exp();
            for j in 1..32 {
                u.mode_mut(kx, 0)[j] = Complex64::new(a * (j as f64 * 0.1).sin(), 0.0);
            }
        }
        let fit = tangential_radius_fit(&u).unwrap();
        assert!((fit.radius - 0.7).abs() < 1e-6, "{fit:?}");

        for kx in 0..u.nkx() - 1 {
            for j in 1..32 {
                u.mode_mut(kx, 0)[j] = Complex64::new((j as f64 * 0.1).sin(), 0.0);
            }
        }
        assert!(tangential_radius_fit(&u).unwrap().radius.abs() < 1e-12);

        for kx in 1..u.nkx() {
            u.mode_mut(kx, 0).fill(Complex64::new(1e-20, 0.0));
        }
        assert!(matches!(
            tangential_radius_fit(&u),
            Err(Error::Indeterminate(_))
        ));
    }

    #[test]
    fn ladder_index_set() {
        let idx = multi_indices(3);
        assert_eq!(idx.len(), 20);
        assert_eq!(idx[0], [0, 0, 0]);
        assert!(idx.iter().all(|a| a.iter().sum::<usize>() <= 3));
    }

    #[test]
    fn ladder_of_zero_history() {
        let g = grid(8, 33);
        let snaps: Vec<(f64, SpectralField)> = (0..6)
            .map(|i| (i as f64 * 0.1, SpectralField::zeros(&g)))
            .collect();
        let l = smoothing_ladder(&snaps, 3, 0.01).unwrap();
        assert!(l.entries.iter().all(|e| e.value == 0.0));
        assert_eq!(l.c0, 0.0);
        assert!(matches!(
            smoothing_ladder(&snaps[..4], 3, 0.01),
            Err(Error::InsufficientSamples(_))
        ));
    }

    #[test]
    fn ladder_of_separable_history() {
        // u = e^{-t} sin x sin(πz/Z): every derivative is a closed-form multiple
        let g = grid(8, 401);
        let zm = 20.0;
        let h = 1e-3;
        let snaps: Vec<(f64, SpectralField)> = (0..=40)
            .map(|i| {
                let t = 1.0 + i as f64 * h;
                let mut u = SpectralField::zeros(&g);
                for (j, z) in g.vertical.nodes().iter().enumerate() {
                    u.mode_mut(1, 0)[j] =
                        Complex64::new(0.0, -0.5) * (-t).exp() * (PI * z / zm).sin();
                }
                (t, u)
            })
            .collect();
        let l = smoothing_ladder(&snaps, 3, 0.01).unwrap();
        let n0 = h1_weighted_norm(&snaps[0].1);
        for e in l.entries.iter().filter(|e| e.alpha[2] == 0) {
            let [k, m, _] = e.alpha;
            let margin = [0, 1, 1, 2][k];
            // |∂_t^k ∂_x^m u| = e^{-t} times the t = 1 profile scaled by e
            let expected = snaps[margin..snaps.len() - margin]
                .iter()
                .map(|(t, _)| t.powi((k + m) as i32) * n0 * (1.0 - t).exp())
                .fold(0.0, f64::max);
            let rel = (e.value - expected).abs() / expected;
            assert!(rel < 1e-5, "{:?}: {} vs {}", e.alpha, e.value, expected);
        }
        let alpha0 = l.entries.iter().find(|e| e.alpha == [0, 0, 0]).unwrap();
        let direct = snaps
            .iter()
            .map(|(_, u)| h1_weighted_norm(u))
            .fold(0.0, f64::max);
        assert_eq!(alpha0.value, direct);
    }

    #[test]
    fn cumulative_trapezoid_of_linear() {
        let t = [0.0, 1.0, 3.0];
        let c = cumulative_trapezoid(&t, &[1.0, 1.0, 1.0]);
        assert_eq!(c, vec![0.0, 1.0, 3.0]);
    }
}
