//! Time integration of the reduced 2D system
//!
//! ```text
//! ∂_t u + u ∂_x u + w ∂_z u - ∂_z² u = ∂_x f,   ∂_x u + ∂_z w = 0,   ∂_x u + ∂_z² f = 0
//! ```
//!
//! Diffusion and the Shercliff coupling are implicit (one block solve per
//! mode), advection is explicit: backward Euler on the first step, then
//! second-order backward differences with extrapolated advection.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{RowTransform, SpectralField};
use crate::grid::{make_grid, GridConfig, HalfStripGrid};
use crate::implicit::{ImplicitBlock, LinearTerms};
use crate::norms::{dissipation_functional, h1_weighted_norm, h1_weighted_norm_sq, NormReport};
use crate::shercliff::{compute_w, dissipation_residual};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Vertical shapes available for initial data and heat profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `z e^{-z²/2}`
    ZGaussian,
    /// `z e^{-z}`
    ZExponential,
    /// `sin(π z / Z_max)`
    SineBox,
    /// `e^{-z²/2}`; nonzero at the wall
    Gaussian,
    /// `z (3 - z²) e^{-z²/2}`, zero first moment
    ZeroMoment,
    /// `z e^{-z²/4}`
    SelfSimilar,
}

impl Profile {
    pub fn eval(self, z: f64, z_max: f64) -> f64 {
        match self {
            Profile::ZGaussian => z * (-0.5 * z * z).exp(),
            Profile::ZExponential => z * (-z).exp(),
            Profile::SineBox => (PI * z / z_max).sin(),
            Profile::Gaussian => (-0.5 * z * z).exp(),
            Profile::ZeroMoment => z * (3.0 - z * z) * (-0.5 * z * z).exp(),
            Profile::SelfSimilar => z * (-0.25 * z * z).exp(),
        }
    }

    /// Samples at the grid nodes; rejects shapes that do not vanish at the wall.
    pub fn sample(self, nodes: &[f64]) -> Result<Vec<f64>> {
        let z_max = *nodes.last().unwrap();
        if self.eval(0.0, z_max) != 0.0 {
            return Err(Error::Parameter(format!(
                "profile {self:?} violates the wall condition u(x, 0) = 0"
            )));
        }
        Ok(nodes.iter().map(|&z| self.eval(z, z_max)).collect())
    }
}

/// Tangential content of the initial field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeContent {
    /// `sin(k' x + phase)`
    Single {
        k: usize,
        #[serde(default)]
        phase: f64,
    },
    /// `Σ_{k_min ≤ k ≤ k_max} e^{-σ k'} sin(k' x + φ_k)`, phases drawn from the seed.
    Band {
        k_min: usize,
        k_max: usize,
        sigma: f64,
    },
}

/// How `amplitude` is interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Multiplies the shape directly.
    Amplitude,
    /// Rescales so that `∥u₀∥_{𝓗¹}` equals the amplitude.
    H1Norm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSpec {
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_profile")]
    pub profile: Profile,
    #[serde(default = "default_modes")]
    pub modes: ModeContent,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
}

fn default_amplitude() -> f64 {
    0.01
}
fn default_profile() -> Profile {
    Profile::ZGaussian
}
fn default_modes() -> ModeContent {
    ModeContent::Single { k: 1, phase: 0.0 }
}
fn default_normalization() -> Normalization {
    Normalization::Amplitude
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        Self {
            amplitude: default_amplitude(),
            profile: default_profile(),
            modes: default_modes(),
            normalization: default_normalization(),
        }
    }
}

/// `make_initial_data`: a real, wall-compatible field on `grid`.
pub fn make_initial_data(
    spec: &InitialDataSpec,
    grid: &Arc<HalfStripGrid>,
    seed: u64,
) -> Result<SpectralField> {
    if !spec.amplitude.is_finite() || spec.amplitude < 0.0 {
        return Err(Error::Parameter(format!(
            "initial amplitude {} must be finite and non-negative",
            spec.amplitude
        )));
    }
    let shape = spec.profile.sample(grid.vertical.nodes())?;
    let mut u = SpectralField::zeros(grid);
    let top = grid.nkx() - 2;
    let place = |u: &mut SpectralField, k: usize, coef: Complex64| -> Result<()> {
        if k == 0 || k > top {
            return Err(Error::Parameter(format!(
                "mode {k} outside the resolved range 1..={top}"
            )));
        }
        for (a, g) in u.mode_mut(k, 0).iter_mut().zip(&shape) {
            *a += coef * *g;
        }
        Ok(())
    };
    // sin(θ) = (e^{iθ} - e^{-iθ}) / 2i
    match &spec.modes {
        ModeContent::Single { k, phase } => {
            place(&mut u, *k, Complex64::from_polar(1.0, *phase) / (2.0 * I))?;
        }
        ModeContent::Band {
            k_min,
            k_max,
            sigma,
        } => {
            if k_min > k_max {
                return Err(Error::Parameter("band k_min exceeds k_max".into()));
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for k in *k_min..=*k_max {
                let phase = rng.random_range(0.0..2.0 * PI);
                let a = (-sigma * grid.kx(k)).exp();
                place(&mut u, k, Complex64::from_polar(a, phase) / (2.0 * I))?;
            }
        }
    }
    u.enforce_real();
    let scale = match spec.normalization {
        Normalization::Amplitude => spec.amplitude,
        Normalization::H1Norm => {
            let n = h1_weighted_norm(&u);
            if n == 0.0 {
                0.0
            } else {
                spec.amplitude / n
            }
        }
    };
    Ok(u.scaled(scale))
}

/// `u ∂_x u + w ∂_z u`, pseudo-spectral in `x` with the 2/3 rule.
pub fn advection_term(
    u: &SpectralField,
    w: &SpectralField,
    tr: &RowTransform,
    exec: Execution,
) -> Result<SpectralField> {
    u.check_grid(w)?;
    let grid = u.grid().clone();
    if grid.nky() != 1 || tr.len() != grid.nx {
        return Err(Error::GridMismatch);
    }
    let (nx, nz) = (grid.nx, grid.nz());
    let keep = grid.dealias_cutoff();
    let v = &grid.vertical;
    let uz: Vec<Vec<Complex64>> = (0..=keep).map(|k| v.d1_vec(u.mode(k, 0))).collect();
    let rows: Vec<Vec<Complex64>> = exec.map(nz, |j| {
        let synth = |coef: &dyn Fn(usize) -> Complex64| {
            let mut buf = vec![Complex64::default(); nx];
            for k in 0..=keep {
                let a = coef(k);
                buf[k] = a;
                if k > 0 {
                    buf[nx - k] = a.conj();
                }
            }
            tr.inverse(&mut buf);
            buf
        };
        let pu = synth(&|k| u.mode(k, 0)[j]);
        let pux = synth(&|k| I * grid.kx(k) * u.mode(k, 0)[j]);
        let pw = synth(&|k| w.mode(k, 0)[j]);
        let puz = synth(&|k| uz[k][j]);
        let mut prod: Vec<Complex64> = (0..nx)
            .map(|n| Complex64::new(pu[n].re * pux[n].re + pw[n].re * puz[n].re, 0.0))
            .collect();
        tr.forward(&mut prod);
        prod.truncate(keep + 1);
        prod
    });
    let mut out = SpectralField::zeros(&grid);
    for (j, row) in rows.iter().enumerate() {
        for (k, a) in row.iter().enumerate() {
            out.mode_mut(k, 0)[j] = *a;
        }
    }
    for a in out.mode_mut(0, 0) {
        a.im = 0.0;
    }
    let nz_last = nz - 1;
    for k in 0..out.nkx() {
        out.mode_mut(k, 0)[0] = Complex64::default();
        out.mode_mut(k, 0)[nz_last] = Complex64::default();
    }
    Ok(out)
}

/// Forcing appended to the explicit part, `F(t)`.
pub type Forcing = Arc<dyn Fn(f64) -> SpectralField + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub struct State2D {
    /// Time of step index 0.
    pub t0: f64,
    pub step_index: u64,
    pub dt: f64,
    pub u: SpectralField,
    /// Field one step back; absent right after initialization.
    pub u_prev: Option<SpectralField>,
    /// Running time integral of the dissipation functional.
    pub cum_dissipation: f64,
}

impl State2D {
    pub fn initial(u: SpectralField, dt: f64) -> Self {
        Self {
            t0: 0.0,
            step_index: 0,
            dt,
            u,
            u_prev: None,
            cum_dissipation: 0.0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t0 + self.step_index as f64 * self.dt
    }
}

/// Semi-implicit stepper with cached per-mode factorizations.
pub struct Stepper2D {
    grid: Arc<HalfStripGrid>,
    dt: f64,
    advection: bool,
    forcing: Option<Forcing>,
    first: Vec<ImplicitBlock>,
    second: Vec<ImplicitBlock>,
    tr: RowTransform,
    exec: Execution,
}

impl Stepper2D {
    pub fn new(
        grid: &Arc<HalfStripGrid>,
        dt: f64,
        terms: LinearTerms,
        advection: bool,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Parameter(format!("time step {dt} must be positive")));
        }
        if grid.nky() != 1 {
            return Err(Error::GridMismatch);
        }
        let build = |c: f64| -> Result<Vec<ImplicitBlock>> {
            (0..grid.nkx())
                .map(|k| ImplicitBlock::new(&grid.vertical, grid.kx(k), dt, c, terms))
                .collect()
        };
        Ok(Self {
            grid: grid.clone(),
            dt,
            advection,
            forcing: None,
            first: build(1.0)?,
            second: build(1.5)?,
            tr: RowTransform::new(grid.nx),
            exec: Execution::default(),
        })
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn transform(&self) -> &RowTransform {
        &self.tr
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// Explicit right-hand side `-(u ∂_x u + w ∂_z u) + F(t)`.
    pub fn explicit_part(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        let mut n = if self.advection {
            let w = compute_w(u);
            advection_term(u, &w, &self.tr, self.exec)?.scaled(-1.0)
        } else {
            SpectralField::zeros(&self.grid)
        };
        if let Some(f) = &self.forcing {
            n.axpy(1.0, &f(t))?;
        }
        Ok(n)
    }

    /// Advances one step. The returned state carries the old field as history.
    pub fn step(&self, state: &State2D) -> Result<State2D> {
        if state.dt != self.dt {
            return Err(Error::Parameter(format!(
                "state step {} differs from stepper step {}",
                state.dt, self.dt
            )));
        }
        state.u.check_grid(&SpectralField::zeros(&self.grid))?;
        let t = state.t();
        let dt = self.dt;
        let n_now = self.explicit_part(&state.u, t)?;
        let nz = self.grid.nz();
        let mut next = SpectralField::zeros(&self.grid);
        match &state.u_prev {
            None => {
                self.exec.for_each_chunk(next.data_mut(), nz, |k, out| {
                    let rhs: Vec<Complex64> = state
                        .u
                        .mode(k, 0)
                        .iter()
                        .zip(n_now.mode(k, 0))
                        .map(|(a, n)| a + n * dt)
                        .collect();
                    self.first[k].solve(&rhs, out, None);
                });
            }
            Some(prev) => {
                let n_prev = self.explicit_part(prev, t - dt)?;
                self.exec.for_each_chunk(next.data_mut(), nz, |k, out| {
                    let (u1, u0) = (state.u.mode(k, 0), prev.mode(k, 0));
                    let (n1, n0) = (n_now.mode(k, 0), n_prev.mode(k, 0));
                    let rhs: Vec<Complex64> = (0..nz)
                        .map(|j| u1[j] * 2.0 - u0[j] * 0.5 + (n1[j] * 2.0 - n0[j]) * dt)
                        .collect();
                    self.second[k].solve(&rhs, out, None);
                });
            }
        }
        next.enforce_real();
        let t_new = state.t0 + (state.step_index + 1) as f64 * dt;
        if !next.is_finite() {
            return Err(Error::NonFinite { t: t_new });
        }
        let d_old = dissipation_functional(&state.u);
        let d_new = dissipation_functional(&next);
        Ok(State2D {
            t0: state.t0,
            step_index: state.step_index + 1,
            dt,
            u: next,
            u_prev: Some(state.u.clone()),
            cum_dissipation: state.cum_dissipation + 0.5 * dt * (d_old + d_new),
        })
    }
}

/// Wall-curvature and far-field moment diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Compatibility {
    /// `max_x |D2 u(x, 0)|`.
    pub wall_curvature: f64,
    /// `|∫ z û_k dz| / ∥û_k∥` per x-mode (0 for empty modes).
    pub moments: Vec<f64>,
}

impl Compatibility {
    pub fn max_moment(&self) -> f64 {
        self.moments.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn compatibility_diagnostics(u: &SpectralField, tr: &RowTransform) -> Result<Compatibility> {
    let grid = u.grid();
    if grid.nky() != 1 || tr.len() != grid.nx {
        return Err(Error::GridMismatch);
    }
    let v = &grid.vertical;
    let nx = grid.nx;
    let mut buf = vec![Complex64::default(); nx];
    for k in 0..u.nkx() - 1 {
        let a = v.d2_vec(u.mode(k, 0))[0];
        buf[k] = a;
        if k > 0 {
            buf[nx - k] = a.conj();
        }
    }
    tr.inverse(&mut buf);
    let wall_curvature = buf.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
    let zw: Vec<f64> = v
        .nodes()
        .iter()
        .zip(v.weights())
        .map(|(z, w)| z * w)
        .collect();
    let moments = (0..u.nkx())
        .map(|k| {
            let m = u.mode(k, 0);
            let norm = v.norm2(m, None).sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let mom: Complex64 = m.iter().zip(&zw).map(|(a, w)| a * w).sum();
            mom.norm() / norm
        })
        .collect();
    Ok(Compatibility {
        wall_curvature,
        moments,
    })
}

/// Snapshot capture for the derivative ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotPlan {
    /// Capture every this many steps.
    pub every: u64,
    /// Last capture time.
    pub until: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario2D {
    pub grid: GridConfig,
    pub initial: InitialDataSpec,
    pub eps0: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Report every this many steps (plus the final step).
    pub output_every: u64,
    pub seed: u64,
    pub advection: bool,
    pub terms: LinearTerms,
    pub snapshots: Option<SnapshotPlan>,
}

impl Default for Scenario2D {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            initial: InitialDataSpec::default(),
            eps0: 0.01,
            dt: 1e-3,
            t_final: 1.0,
            output_every: 10,
            seed: 0,
            advection: true,
            terms: LinearTerms::default(),
            snapshots: None,
        }
    }
}

impl Scenario2D {
    pub fn total_steps(&self) -> u64 {
        (self.t_final / self.dt).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Parameter("dt must be positive".into()));
        }
        if !(self.t_final >= 0.0) {
            return Err(Error::Parameter("t_final must be non-negative".into()));
        }
        if !(self.eps0 >= 0.0) {
            return Err(Error::Parameter("eps0 must be non-negative".into()));
        }
        if self.output_every == 0 {
            return Err(Error::Parameter("output cadence must be at least 1".into()));
        }
        Ok(())
    }
}

/// Column set of the 2D series.
pub const SERIES2D_COLUMNS: [&str; 9] = [
    "t",
    "h1_norm",
    "dissipation",
    "cum_dissipation",
    "dissipation_residual",
    "wall_curvature",
    "max_moment",
    "imag_defect",
    "energy_constant_ratio",
];

pub struct Run2D {
    pub report: NormReport,
    pub snapshots: Vec<(f64, SpectralField)>,
    pub state: State2D,
}

/// One report row for a state.
pub fn series_row(state: &State2D, tr: &RowTransform, exec: Execution) -> Result<Vec<f64>> {
    let u = &state.u;
    let compat = compatibility_diagnostics(u, tr)?;
    let (_, imag) = u.to_physical(tr, exec)?;
    Ok(vec![
        state.t(),
        h1_weighted_norm(u),
        dissipation_functional(u),
        state.cum_dissipation,
        dissipation_residual(u)?,
        compat.wall_curvature,
        compat.max_moment(),
        imag,
        energy_constant_ratio(u, tr, exec)?,
    ])
}

/// `|⟨u ∂_x u + w ∂_z u, u⟩_𝓗¹| / (∥u∥_𝓗¹ 𝒟)`: the smallest constant the
/// nonlinear term needs at this state. The inner product comes from polarization.
pub fn energy_constant_ratio(u: &SpectralField, tr: &RowTransform, exec: Execution) -> Result<f64> {
    let norm = h1_weighted_norm(u);
    let d = dissipation_functional(u);
    if norm == 0.0 || d == 0.0 {
        return Ok(0.0);
    }
    let n = advection_term(u, &compute_w(u), tr, exec)?;
    let n_norm = h1_weighted_norm(&n);
    if n_norm == 0.0 {
        return Ok(0.0);
    }
    // scale N to the size of u so the polarization does not cancel
    let s = norm / n_norm;
    let mut plus = u.clone();
    plus.axpy(s, &n)?;
    let mut minus = u.clone();
    minus.axpy(-s, &n)?;
    let inner = 0.25 * (h1_weighted_norm_sq(&plus) - h1_weighted_norm_sq(&minus)) / s;
    Ok(inner.abs() / (norm * d))
}

/// Builds the grid and initial state of a scenario.
pub fn initial_state(scenario: &Scenario2D) -> Result<State2D> {
    scenario.validate()?;
    let grid = Arc::new(make_grid(&scenario.grid)?);
    let u = make_initial_data(&scenario.initial, &grid, scenario.seed)?;
    Ok(State2D::initial(u, scenario.dt))
}

/// `run_scenario2d` from the initial data.
pub fn run_scenario2d(scenario: &Scenario2D, exec: Execution) -> Result<Run2D> {
    let state = initial_state(scenario)?;
    continue_scenario2d(scenario, state, exec, &mut |_| Ok(()))
}

/// Runs from `state` to the scenario horizon. `observer` sees every accepted
/// state (used for checkpointing).
pub fn continue_scenario2d(
    scenario: &Scenario2D,
    mut state: State2D,
    exec: Execution,
    observer: &mut dyn FnMut(&State2D) -> Result<()>,
) -> Result<Run2D> {
    scenario.validate()?;
    let grid = state.u.grid().clone();
    let stepper = Stepper2D::new(&grid, scenario.dt, scenario.terms, scenario.advection)?
        .with_execution(exec);
    let total = scenario.total_steps();
    let mut report = NormReport::new(&SERIES2D_COLUMNS);
    let mut snapshots = Vec::new();
    let record = |state: &State2D,
                  report: &mut NormReport,
                  snapshots: &mut Vec<(f64, SpectralField)>|
     -> Result<()> {
        if state.step_index % scenario.output_every == 0 || state.step_index == total {
            report.push(series_row(state, stepper.transform(), exec)?)?;
        }
        if let Some(plan) = scenario.snapshots {
            if state.step_index % plan.every == 0 && state.t() <= plan.until + 0.5 * scenario.dt {
                snapshots.push((state.t(), state.u.clone()));
            }
        }
        Ok(())
    };
    record(&state, &mut report, &mut snapshots)?;
    while state.step_index < total {
        state = stepper.step(&state)?;
        record(&state, &mut report, &mut snapshots)?;
        observer(&state)?;
    }
    Ok(Run2D {
        report,
        snapshots,
        state,
    })
}
