//! The 3D system linearized around heat shear flows `(U, V)(t, z)`:
//!
//! ```text
//! ∂_t u + U ∂_x u + V ∂_y u + w ∂_z U - ∂_z² u = ∂_x f,   ∂_x u + ∂_z² f = 0
//! ∂_t v + U ∂_x v + V ∂_y v + w ∂_z V - ∂_z² v = ∂_x g,   ∂_x v + ∂_z² g = 0
//! ```
//!
//! with analytic-in-`y` norms whose `m`-sums become per-mode weights
//! `Σ_m L²_{ρ,m} k_y^{2m}`, `L_{ρ,m} = ρ^{m+1}/m!`.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::SpectralField;
use crate::grid::{make_grid, GridConfig, HalfStripGrid, VerticalGrid};
use crate::heat1d::{decay_components, fit_decay, weighted_seminorm_parts, HeatSolver};
use crate::implicit::{ImplicitBlock, LinearTerms};
use crate::norms::NormReport;
use crate::shercliff::{area, compute_w_3d, multiplicity};
use crate::solver2d::Profile;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Fitted decay data for one shear component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShearCertificate {
    /// `max_t (1+t)^{3/2} F(t) / ε₁` with `F = ∥∂_z h∥_∞ + ∥z∂_z h∥_∞ + ∥z∂_z² h∥_∞`.
    pub c1: f64,
    /// Slope of `log F` against `log(1+t)` over the last three quarters of the horizon.
    pub slope: Option<f64>,
}

/// Heat-shear profiles at every step time `n dt`.
#[derive(Clone, Debug)]
pub struct ShearPair {
    pub eps1: f64,
    pub dt: f64,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub certificate_u: ShearCertificate,
    pub certificate_v: ShearCertificate,
}

impl ShearPair {
    /// No shear at all, valid for `steps` steps.
    pub fn zero(grid: &VerticalGrid, dt: f64, steps: usize) -> Self {
        let z = vec![vec![0.0; grid.len()]; steps + 1];
        let cert = ShearCertificate {
            c1: 0.0,
            slope: None,
        };
        Self {
            eps1: 0.0,
            dt,
            u: z.clone(),
            v: z,
            certificate_u: cert,
            certificate_v: cert,
        }
    }

    pub fn steps(&self) -> usize {
        self.u.len() - 1
    }
}

/// `(∫_0^Z z h, ∫_0^Z z |h|)` by a fine uniform trapezoid rule on the profile itself.
pub fn profile_moment(h: &dyn Fn(f64) -> f64, z_max: f64) -> (f64, f64) {
    let n = 1 << 17;
    let dz = z_max / n as f64;
    let (mut m, mut a) = (0.0, 0.0);
    for i in 0..=n {
        let z = i as f64 * dz;
        let w = if i == 0 || i == n { 0.5 * dz } else { dz };
        let v = z * h(z);
        m += w * v;
        a += w * v.abs();
    }
    (m, a)
}

fn evolve_shear(
    grid: &Arc<VerticalGrid>,
    h0: &[f64],
    steps: usize,
    dt: f64,
) -> Result<Vec<Vec<f64>>> {
    let solver = HeatSolver::new(grid, dt)?;
    let mut out = Vec::with_capacity(steps + 1);
    let mut h = h0.to_vec();
    let n = h.len();
    h[n - 1] = 0.0;
    out.push(h.clone());
    for _ in 0..steps {
        h = solver.step(&h);
        out.push(h.clone());
    }
    Ok(out)
}

fn certificate(grid: &VerticalGrid, series: &[Vec<f64>], dt: f64, eps1: f64) -> ShearCertificate {
    let times: Vec<f64> = (0..series.len()).map(|n| n as f64 * dt).collect();
    let values: Vec<f64> = series
        .iter()
        .map(|h| decay_components(grid, h).total())
        .collect();
    let c1 = if eps1 > 0.0 {
        times
            .iter()
            .zip(&values)
            .map(|(t, v)| (1.0 + t).powf(1.5) * v / eps1)
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let t_end = *times.last().unwrap();
    let slope = if t_end > 0.0 {
        fit_decay(&times, &values, (0.25 * t_end, t_end)).ok()
    } else {
        None
    };
    ShearCertificate { c1, slope }
}

/// Relative tolerance on the first moment of shear initial data.
pub const MOMENT_TOLERANCE: f64 = 1e-8;

/// `make_shear`: checks the zero-moment and weighted-regularity hypotheses,
/// then runs the heat flows at the 3D step size.
pub fn make_shear(
    grid: &Arc<VerticalGrid>,
    u0: &dyn Fn(f64) -> f64,
    v0: &dyn Fn(f64) -> f64,
    eps1: f64,
    t_final: f64,
    dt: f64,
) -> Result<ShearPair> {
    if !(eps1 >= 0.0) || !eps1.is_finite() {
        return Err(Error::Parameter(format!(
            "shear amplitude {eps1} must be non-negative"
        )));
    }
    let z_max = grid.z_max();
    let mut samples = Vec::new();
    for h in [u0, v0] {
        if h(0.0) != 0.0 {
            return Err(Error::Parameter(
                "shear profile must vanish at z = 0".into(),
            ));
        }
        let (m, a) = profile_moment(h, z_max);
        if m.abs() > MOMENT_TOLERANCE * a {
            return Err(Error::NonzeroMoment { moment: eps1 * m });
        }
        let s: Vec<f64> = grid.nodes().iter().map(|&z| eps1 * h(z)).collect();
        for k in 0..=3 {
            let n = weighted_seminorm_parts(grid, &s, 1.0, 0.0, k)?;
            if n.flagged() {
                return Err(Error::Hypothesis(format!(
                    "shear profile not in the weighted H³ space (order {k} tail {:.3e})",
                    n.tail_fraction
                )));
            }
        }
        samples.push(s);
    }
    let steps = (t_final / dt).round() as usize;
    let u = evolve_shear(grid, &samples[0], steps, dt)?;
    let v = evolve_shear(grid, &samples[1], steps, dt)?;
    let certificate_u = certificate(grid, &u, dt, eps1);
    let certificate_v = certificate(grid, &v, dt, eps1);
    Ok(ShearPair {
        eps1,
        dt,
        u,
        v,
        certificate_u,
        certificate_v,
    })
}

/// `ρ(t) = ρ₀/2 + ρ₀/2 (1+t)^{-1/2}`.
pub fn rho_schedule(t: f64, rho0: f64) -> Result<f64> {
    if !(t >= 0.0) || !(rho0 > 0.0) {
        return Err(Error::Parameter(format!(
            "radius schedule needs t ≥ 0 and ρ₀ > 0 (got t = {t}, ρ₀ = {rho0})"
        )));
    }
    Ok(0.5 * rho0 + 0.5 * rho0 / (1.0 + t).sqrt())
}

/// Largest admissible mode weight before reporting overflow.
pub const WEIGHT_CEILING: f64 = 1e280;

/// `(Σ_m L²_{ρ,m} κ^{2m}, Σ_m ((m+1)/ρ) L²_{ρ,m} κ^{2m})`, summed until the
/// terms fall below `1e-16` of the partial sum.
pub fn mode_weights(rho: f64, kappa: f64) -> Result<(f64, f64)> {
    let x = (rho * kappa).powi(2);
    let mut term = rho * rho;
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut m = 0usize;
    loop {
        sx += term;
        sy += (m as f64 + 1.0) / rho * term;
        if !(sx < WEIGHT_CEILING) || !(sy < WEIGHT_CEILING) {
            return Err(Error::WeightOverflow { rho, ky: kappa });
        }
        let next = term * x / ((m + 1) as f64).powi(2);
        // past the peak of the terms and below the cutoff
        if (m as f64 + 1.0) > rho * kappa && next * (m as f64 + 2.0) < 1e-16 * sx.min(sy * rho) {
            break;
        }
        term = next;
        m += 1;
        if m > 100_000 {
            return Err(Error::WeightOverflow { rho, ky: kappa });
        }
    }
    Ok((sx, sy))
}

/// Squared analytic norms of the pair `a = (u, v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticNorms {
    pub x_sq: f64,
    pub y_sq: f64,
    pub z_sq: f64,
}

pub fn analytic_norms(u: &SpectralField, v: &SpectralField, rho: f64) -> Result<AnalyticNorms> {
    u.check_grid(v)?;
    let grid = u.grid();
    let vert = &grid.vertical;
    let weights: Vec<(f64, f64)> = (0..u.nky())
        .map(|ky| mode_weights(rho, grid.ky(ky).abs()))
        .collect::<Result<_>>()?;
    let mut d2 = vec![Complex64::default(); u.nz()];
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for kx in 0..u.nkx() {
        let c = multiplicity(kx);
        let k2 = grid.kx(kx).powi(2);
        for (ky, (wx, wy)) in weights.iter().enumerate() {
            for a in [u.mode(kx, ky), v.mode(kx, ky)] {
                let plain = vert.norm2(a, None);
                let grad = vert.edge_norm2(a, |_| 1.0);
                vert.d2(a, &mut d2);
                let curv = vert.norm2(&d2, None);
                x += c * wx * (plain + grad);
                y += c * wy * (plain + grad);
                z += c * wx * (grad + curv + k2 * plain);
            }
        }
    }
    let s = area(grid);
    Ok(AnalyticNorms {
        x_sq: s * x,
        y_sq: s * y,
        z_sq: s * z,
    })
}

/// Which explicit shear terms are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearTerms {
    #[serde(default = "yes")]
    pub advection: bool,
    #[serde(default = "yes")]
    pub coupling: bool,
}

fn yes() -> bool {
    true
}

impl Default for ShearTerms {
    fn default() -> Self {
        Self {
            advection: true,
            coupling: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State3D {
    pub t0: f64,
    pub step_index: u64,
    pub dt: f64,
    pub u: SpectralField,
    pub v: SpectralField,
    pub prev: Option<(SpectralField, SpectralField)>,
    pub rho0: f64,
    /// Running time integral of `|a|²_{Z_ρ(t)}`.
    pub cum_z: f64,
}

impl State3D {
    pub fn initial(u: SpectralField, v: SpectralField, dt: f64, rho0: f64) -> Self {
        Self {
            t0: 0.0,
            step_index: 0,
            dt,
            u,
            v,
            prev: None,
            rho0,
            cum_z: 0.0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t0 + self.step_index as f64 * self.dt
    }
}

pub struct Stepper3D {
    grid: Arc<HalfStripGrid>,
    dt: f64,
    shear_terms: ShearTerms,
    first: Vec<ImplicitBlock>,
    second: Vec<ImplicitBlock>,
    exec: Execution,
}

impl Stepper3D {
    pub fn new(
        grid: &Arc<HalfStripGrid>,
        dt: f64,
        terms: LinearTerms,
        shear_terms: ShearTerms,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Parameter(format!("time step {dt} must be positive")));
        }
        let build = |c: f64| -> Result<Vec<ImplicitBlock>> {
            (0..grid.nkx())
                .map(|k| ImplicitBlock::new(&grid.vertical, grid.kx(k), dt, c, terms))
                .collect()
        };
        Ok(Self {
            grid: grid.clone(),
            dt,
            shear_terms,
            first: build(1.0)?,
            second: build(1.5)?,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Explicit shear terms for `(u, v)` against the shear profiles `(su, sv)`.
    pub fn explicit_part(
        &self,
        u: &SpectralField,
        v: &SpectralField,
        su: &[f64],
        sv: &[f64],
    ) -> Result<(SpectralField, SpectralField)> {
        let grid = &self.grid;
        let vert = &grid.vertical;
        let nz = grid.nz();
        let nky = grid.nky();
        let du = vert.d1_vec(su);
        let dv = vert.d1_vec(sv);
        let w = if self.shear_terms.coupling {
            Some(compute_w_3d(u, v)?)
        } else {
            None
        };
        let mut out = vec![Complex64::default(); 2 * u.data().len()];
        let half = u.data().len();
        let (nu, nv) = out.split_at_mut(half);
        for (target, src, ds) in [(nu, u, &du), (nv, v, &dv)] {
            self.exec.for_each_chunk(target, nz, |mode, o| {
                let (kx, ky) = (mode / nky, mode % nky);
                let (kxp, kyp) = (grid.kx(kx), grid.ky(ky));
                let a = src.mode(kx, ky);
                for j in 0..nz {
                    let mut val = Complex64::default();
                    if self.shear_terms.advection {
                        val -= I * (kxp * su[j] + kyp * sv[j]) * a[j];
                    }
                    if let Some(w) = &w {
                        val -= w.mode(kx, ky)[j] * ds[j];
                    }
                    o[j] = val;
                }
            });
        }
        let nv = out.split_off(half);
        Ok((
            SpectralField::from_data(&self.grid, out)?,
            SpectralField::from_data(&self.grid, nv)?,
        ))
    }

    pub fn step(&self, state: &State3D, shear: &ShearPair) -> Result<State3D> {
        if state.dt != self.dt || shear.dt != self.dt {
            return Err(Error::Parameter(
                "step sizes of state, shear and stepper differ".into(),
            ));
        }
        let n = state.step_index as usize;
        if n > shear.steps() || (state.prev.is_some() && n == 0) {
            return Err(Error::Parameter(format!(
                "shear profiles cover {} steps, state is at step {n}",
                shear.steps()
            )));
        }
        let dt = self.dt;
        let nz = self.grid.nz();
        let nky = self.grid.nky();
        let (nu1, nv1) = self.explicit_part(&state.u, &state.v, &shear.u[n], &shear.v[n])?;
        let mut next_u = SpectralField::zeros(&self.grid);
        let mut next_v = SpectralField::zeros(&self.grid);
        let prev_terms = match &state.prev {
            Some((pu, pv)) => Some((
                pu,
                pv,
                self.explicit_part(pu, pv, &shear.u[n - 1], &shear.v[n - 1])?,
            )),
            None => None,
        };
        for (out, cur, n1, which) in [
            (&mut next_u, &state.u, &nu1, 0),
            (&mut next_v, &state.v, &nv1, 1),
        ] {
            self.exec.for_each_chunk(out.data_mut(), nz, |mode, o| {
                let (kx, ky) = (mode / nky, mode % nky);
                let a1 = cur.mode(kx, ky);
                let b1 = n1.mode(kx, ky);
                match &prev_terms {
                    None => {
                        let rhs: Vec<Complex64> = (0..nz).map(|j| a1[j] + b1[j] * dt).collect();
                        self.first[kx].solve(&rhs, o, None);
                    }
                    Some((pu, pv, (pnu, pnv))) => {
                        let (a0, b0) = if which == 0 {
                            (pu.mode(kx, ky), pnu.mode(kx, ky))
                        } else {
                            (pv.mode(kx, ky), pnv.mode(kx, ky))
                        };
                        let rhs: Vec<Complex64> = (0..nz)
                            .map(|j| a1[j] * 2.0 - a0[j] * 0.5 + (b1[j] * 2.0 - b0[j]) * dt)
                            .collect();
                        self.second[kx].solve(&rhs, o, None);
                    }
                }
            });
        }
        next_u.enforce_real();
        next_v.enforce_real();
        let t_new = state.t0 + (state.step_index + 1) as f64 * dt;
        if !next_u.is_finite() || !next_v.is_finite() {
            return Err(Error::NonFinite { t: t_new });
        }
        let z_old = analytic_norms(&state.u, &state.v, rho_schedule(state.t(), state.rho0)?)?.z_sq;
        let z_new = analytic_norms(&next_u, &next_v, rho_schedule(t_new, state.rho0)?)?.z_sq;
        Ok(State3D {
            t0: state.t0,
            step_index: state.step_index + 1,
            dt,
            u: next_u,
            v: next_v,
            prev: Some((state.u.clone(), state.v.clone())),
            rho0: state.rho0,
            cum_z: state.cum_z + 0.5 * dt * (z_old + z_new),
        })
    }
}

/// Band-limited analytic data: `c ∝ e^{-2ρ₀|k_y'|} e^{-|k_x'|}` with seeded phases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial3D {
    #[serde(default = "default_amp3")]
    pub amplitude: f64,
    #[serde(default = "default_band")]
    pub kx_max: usize,
    #[serde(default = "default_band")]
    pub ky_max: usize,
    #[serde(default = "default_profile3")]
    pub profile: Profile,
}

fn default_amp3() -> f64 {
    0.01
}
fn default_band() -> usize {
    3
}
fn default_profile3() -> Profile {
    Profile::ZGaussian
}

impl Default for Initial3D {
    fn default() -> Self {
        Self {
            amplitude: default_amp3(),
            kx_max: default_band(),
            ky_max: default_band(),
            profile: default_profile3(),
        }
    }
}

pub fn make_initial_3d(
    spec: &Initial3D,
    grid: &Arc<HalfStripGrid>,
    rho0: f64,
    seed: u64,
) -> Result<(SpectralField, SpectralField)> {
    if !grid.is_3d() {
        return Err(Error::InvalidGrid(
            "3D data needs a grid with ly and ny".into(),
        ));
    }
    if spec.kx_max + 1 >= grid.nkx() || 2 * spec.ky_max >= grid.nky() {
        return Err(Error::Parameter(
            "initial band exceeds the resolved modes".into(),
        ));
    }
    if !spec.amplitude.is_finite() || spec.amplitude < 0.0 {
        return Err(Error::Parameter(
            "initial amplitude must be finite and non-negative".into(),
        ));
    }
    let shape = spec.profile.sample(grid.vertical.nodes())?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut fields = [SpectralField::zeros(grid), SpectralField::zeros(grid)];
    let nky = grid.nky();
    for f in fields.iter_mut() {
        for kx in 0..=spec.kx_max {
            for kys in -(spec.ky_max as i64)..=(spec.ky_max as i64) {
                let ky = kys.rem_euclid(nky as i64) as usize;
                let phase = rng.random_range(0.0..2.0 * PI);
                let mag = spec.amplitude
                    * (-2.0 * rho0 * grid.ky(ky).abs()).exp()
                    * (-grid.kx(kx).abs()).exp();
                let c = Complex64::from_polar(mag, phase);
                for (a, g) in f.mode_mut(kx, ky).iter_mut().zip(&shape) {
                    *a += c * *g;
                }
            }
        }
        f.enforce_real();
    }
    let [u, v] = fields;
    Ok((u, v))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario3D {
    pub grid: GridConfig,
    pub initial: Initial3D,
    pub rho0: f64,
    pub eps1: f64,
    pub shear_u: Profile,
    pub shear_v: Profile,
    pub dt: f64,
    pub t_final: f64,
    pub output_every: u64,
    pub seed: u64,
    pub terms: LinearTerms,
    pub shear_terms: ShearTerms,
}

impl Default for Scenario3D {
    fn default() -> Self {
        Self {
            grid: GridConfig::new_3d(2.0 * PI, 16, 2.0 * PI, 16, 20.0, 129),
            initial: Initial3D::default(),
            rho0: 1.0,
            eps1: 1e-3,
            shear_u: Profile::ZeroMoment,
            shear_v: Profile::ZeroMoment,
            dt: 2e-3,
            t_final: 20.0,
            output_every: 50,
            seed: 0,
            terms: LinearTerms::default(),
            shear_terms: ShearTerms::default(),
        }
    }
}

pub const SERIES3D_COLUMNS: [&str; 7] = [
    "t",
    "rho",
    "x_norm_sq",
    "y_norm_sq",
    "z_norm_sq",
    "cum_z",
    "budget_lhs",
];

/// Outcome of the analytic-norm monitor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorAudit {
    pub pass: bool,
    /// `|a(0)|²_{X_ρ₀}`.
    pub budget: f64,
    /// `max_t (|a(t)|²_{X_ρ(t)} + ∫|a|²_{Z_ρ}) / budget - 1`.
    pub worst_excess: f64,
}

pub struct Run3D {
    pub report: NormReport,
    pub shear: ShearPair,
    pub state: State3D,
    pub audit: MonitorAudit,
}

/// Tolerance of the monitor audit, relative to the initial budget.
pub const MONITOR_TOLERANCE: f64 = 1e-5;

pub fn audit_monitor(report: &NormReport) -> Result<MonitorAudit> {
    let lhs = report
        .column("budget_lhs")
        .ok_or_else(|| Error::Parameter("report has no budget_lhs column".into()))?;
    let budget = *lhs
        .first()
        .ok_or_else(|| Error::InsufficientSamples("empty report".into()))?;
    if budget == 0.0 {
        let clean = lhs.iter().all(|&v| v == 0.0);
        return Ok(MonitorAudit {
            pass: clean,
            budget,
            worst_excess: if clean { 0.0 } else { f64::INFINITY },
        });
    }
    let worst = lhs
        .iter()
        .map(|v| v / budget - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MonitorAudit {
        pass: worst <= MONITOR_TOLERANCE,
        budget,
        worst_excess: worst,
    })
}

fn row3d(state: &State3D) -> Result<Vec<f64>> {
    let rho = rho_schedule(state.t(), state.rho0)?;
    let n = analytic_norms(&state.u, &state.v, rho)?;
    Ok(vec![
        state.t(),
        rho,
        n.x_sq,
        n.y_sq,
        n.z_sq,
        state.cum_z,
        n.x_sq + state.cum_z,
    ])
}

/// `run_scenario3d`: shear construction, time stepping, monitor audit.
pub fn run_scenario3d(scenario: &Scenario3D, exec: Execution) -> Result<Run3D> {
    if scenario.output_every == 0 {
        return Err(Error::Parameter("output cadence must be at least 1".into()));
    }
    let grid = Arc::new(make_grid(&scenario.grid)?);
    let vgrid = Arc::new(grid.vertical.clone());
    let (su, sv) = (scenario.shear_u, scenario.shear_v);
    let z_max = grid.vertical.z_max();
    let shear = make_shear(
        &vgrid,
        &|z| su.eval(z, z_max),
        &|z| sv.eval(z, z_max),
        scenario.eps1,
        scenario.t_final,
        scenario.dt,
    )?;
    let (u, v) = make_initial_3d(&scenario.initial, &grid, scenario.rho0, scenario.seed)?;
    let mut state = State3D::initial(u, v, scenario.dt, scenario.rho0);
    let stepper = Stepper3D::new(&grid, scenario.dt, scenario.terms, scenario.shear_terms)?
        .with_execution(exec);
    let total = shear.steps() as u64;
    let mut report = NormReport::new(&SERIES3D_COLUMNS);
    report.push(row3d(&state)?)?;
    while state.step_index < total {
        state = stepper.step(&state, &shear)?;
        if state.step_index % scenario.output_every == 0 || state.step_index == total {
            report.push(row3d(&state)?)?;
        }
    }
    let audit = audit_monitor(&report)?;
    Ok(Run3D {
        report,
        shear,
        state,
        audit,
    })
}
