//! Strict JSON scenario configuration. Sections that the chosen experiment
//! does not use are rejected, missing values are filled with per-experiment
//! defaults, and the resolved config is what gets echoed.

use crate::combinatorics::{Inequality, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::grid::{make_grid, GridConfig, VerticalGrid};
use crate::heat1d::Lemma;
use crate::implicit::LinearTerms;
use crate::solver2d::{
    InitialDataSpec, ModeContent, Normalization, Profile, Scenario2D, SnapshotPlan,
};
use crate::solver3d::{Initial3D, Scenario3D, ShearTerms};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sim2d,
    Sim3dLinear,
    HeatDecay,
    VerifyInequalities,
    LemmaAudit,
    SmoothingLadder,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(s.as_str().unwrap_or_default())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    /// Extra shear amplitudes to rerun the 3D scenario with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1_scan: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_tilde: Option<f64>,
    /// Rate loss allowed for zero-moment heat data: slopes must reach `-(8-δ)/4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_every: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_until: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_eval: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// Vertical grid for the 1D experiments.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerticalSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nz: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stretch: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearSpec {
    #[serde(default = "zero_moment")]
    pub u: Profile,
    #[serde(default = "zero_moment")]
    pub v: Profile,
}

fn zero_moment() -> Profile {
    Profile::ZeroMoment
}

impl Default for ShearSpec {
    fn default() -> Self {
        Self {
            u: zero_moment(),
            v: zero_moment(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatSpec {
    #[serde(default = "heat_profiles")]
    pub profiles: Vec<Profile>,
}

fn heat_profiles() -> Vec<Profile> {
    vec![Profile::SelfSimilar, Profile::ZeroMoment]
}

impl Default for HeatSpec {
    fn default() -> Self {
        Self {
            profiles: heat_profiles(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSpec {
    #[serde(default = "default_lemma")]
    pub which: Lemma,
    /// Range of the Gaussian rate `b` in the random profile family.
    #[serde(default = "default_b_range")]
    pub b_range: [f64; 2],
}

fn default_lemma() -> Lemma {
    Lemma::WeightedPoincare
}
fn default_b_range() -> [f64; 2] {
    [0.2, 1.0]
}

impl Default for LemmaSpec {
    fn default() -> Self {
        Self {
            which: default_lemma(),
            b_range: default_b_range(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalitySpec {
    #[serde(default = "all_inequalities")]
    pub ids: Vec<Inequality>,
    #[serde(default = "default_r_values")]
    pub r_values: Vec<f64>,
    /// Smaller cap whose constants must agree with the main scan.
    #[serde(default = "default_stability_cap")]
    pub stability_cap: usize,
}

fn all_inequalities() -> Vec<Inequality> {
    Inequality::ALL.to_vec()
}
fn default_r_values() -> Vec<f64> {
    vec![0.1, 0.5, 0.9]
}
fn default_stability_cap() -> usize {
    15
}

impl Default for InequalitySpec {
    fn default() -> Self {
        Self {
            ids: all_inequalities(),
            r_values: default_r_values(),
            stability_cap: default_stability_cap(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertical: Option<VerticalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physics: Option<Physics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerics: Option<Numerics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialDataSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial3d: Option<Initial3D>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shear: Option<ShearSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advection: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<LinearTerms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shear_terms: Option<ShearTerms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat: Option<HeatSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<LemmaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inequalities: Option<InequalitySpec>,
}

fn fill<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

fn positive(path: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::config(
            path,
            format!("must be positive and finite, got {x}"),
        )),
        _ => Ok(()),
    }
}

fn non_negative(path: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x >= 0.0 && x.is_finite()) => Err(Error::config(
            path,
            format!("must be non-negative and finite, got {x}"),
        )),
        _ => Ok(()),
    }
}

fn at_least_one(path: &str, v: Option<u64>) -> Result<()> {
    match v {
        Some(0) => Err(Error::config(path, "must be at least 1")),
        _ => Ok(()),
    }
}

/// Band data filling the whole dealiased range of the ladder grid, so the
/// spectrum stays one exponential and the radius fit sees no shelf of
/// nonlinearly generated modes.
pub fn ladder_initial() -> InitialDataSpec {
    InitialDataSpec {
        amplitude: 0.01,
        profile: Profile::ZGaussian,
        modes: ModeContent::Band {
            k_min: 1,
            k_max: 21,
            sigma: 0.5,
        },
        normalization: Normalization::H1Norm,
    }
}

pub fn ladder_grid() -> GridConfig {
    GridConfig::new_2d(8.0 * PI, 64, 20.0, 201, 0.0)
}

impl ScenarioConfig {
    pub fn kind(&self) -> Result<ExperimentKind> {
        self.kind
            .ok_or_else(|| Error::config("kind", "missing experiment kind"))
    }

    fn sections(&self) -> [(&'static str, bool); 13] {
        [
            ("grid", self.grid.is_some()),
            ("vertical", self.vertical.is_some()),
            ("physics", self.physics.is_some()),
            ("numerics", self.numerics.is_some()),
            ("initial", self.initial.is_some()),
            ("initial3d", self.initial3d.is_some()),
            ("shear", self.shear.is_some()),
            ("advection", self.advection.is_some()),
            ("terms", self.terms.is_some()),
            ("shear_terms", self.shear_terms.is_some()),
            ("heat", self.heat.is_some()),
            ("lemma", self.lemma.is_some()),
            ("inequalities", self.inequalities.is_some()),
        ]
    }

    /// Fills defaults for `kind` and validates every value.
    pub fn resolve(mut self) -> Result<Self> {
        use ExperimentKind::*;
        let kind = self.kind()?;
        let allowed: &[&str] = match kind {
            Sim2d | SmoothingLadder => &[
                "grid",
                "physics",
                "numerics",
                "initial",
                "advection",
                "terms",
            ],
            Sim3dLinear => &[
                "grid",
                "physics",
                "numerics",
                "initial3d",
                "shear",
                "terms",
                "shear_terms",
            ],
            HeatDecay => &["vertical", "physics", "numerics", "heat"],
            LemmaAudit => &["vertical", "physics", "numerics", "lemma"],
            VerifyInequalities => &["numerics", "inequalities"],
        };
        for (name, present) in self.sections() {
            if present && !allowed.contains(&name) {
                return Err(Error::config(name, format!("not used by {kind}")));
            }
        }
        fill(&mut self.seed, 0);
        let mut ph = self.physics.take().unwrap_or_default();
        let mut nu = self.numerics.take().unwrap_or_default();
        let (ph_used, nu_used): (&[&str], &[&str]) = match kind {
            Sim2d => (&["eps0"], &["dt", "t_final", "output_every"]),
            SmoothingLadder => (
                &["eps0"],
                &[
                    "dt",
                    "t_final",
                    "output_every",
                    "snapshot_every",
                    "snapshot_until",
                    "cap",
                ],
            ),
            Sim3dLinear => (
                &["eps1", "eps1_scan", "rho0"],
                &["dt", "t_final", "output_every"],
            ),
            HeatDecay => (&["delta"], &["dt", "t_final", "output_every", "fit_window"]),
            LemmaAudit => (&["lambda", "lambda_tilde"], &["samples", "t_eval", "k"]),
            VerifyInequalities => (&[], &["cap"]),
        };
        let ph_value = serde_json::to_value(&ph)?;
        for key in ph_value.as_object().into_iter().flat_map(|m| m.keys()) {
            if !ph_used.contains(&key.as_str()) {
                return Err(Error::config(
                    format!("physics.{key}"),
                    format!("not used by {kind}"),
                ));
            }
        }
        let nu_value = serde_json::to_value(&nu)?;
        for key in nu_value.as_object().into_iter().flat_map(|m| m.keys()) {
            if !nu_used.contains(&key.as_str()) {
                return Err(Error::config(
                    format!("numerics.{key}"),
                    format!("not used by {kind}"),
                ));
            }
        }
        match kind {
            Sim2d | SmoothingLadder => {
                let ladder = kind == SmoothingLadder;
                fill(
                    &mut self.grid,
                    if ladder {
                        ladder_grid()
                    } else {
                        GridConfig::default()
                    },
                );
                let initial = if ladder {
                    ladder_initial()
                } else {
                    InitialDataSpec {
                        normalization: Normalization::H1Norm,
                        amplitude: ph.eps0.unwrap_or(0.01),
                        ..InitialDataSpec::default()
                    }
                };
                fill(&mut self.initial, initial);
                fill(&mut self.advection, true);
                fill(&mut self.terms, LinearTerms::default());
                fill(&mut ph.eps0, 0.01);
                fill(&mut nu.dt, 1e-3);
                fill(&mut nu.t_final, if ladder { 5.0 } else { 1.0 });
                fill(&mut nu.output_every, if ladder { 25 } else { 10 });
                if ladder {
                    fill(&mut nu.snapshot_every, 25);
                    fill(&mut nu.snapshot_until, 5.0);
                    fill(&mut nu.cap, 3);
                    at_least_one("numerics.snapshot_every", nu.snapshot_every)?;
                    non_negative("numerics.snapshot_until", nu.snapshot_until)?;
                }
                if self
                    .grid
                    .as_ref()
                    .is_some_and(|g| g.ly.is_some() || g.ny.is_some())
                {
                    return Err(Error::config(
                        "grid.ly",
                        "the 2D experiments take no second tangential direction",
                    ));
                }
                non_negative("physics.eps0", ph.eps0)?;
                let init = self.initial.as_ref().unwrap();
                non_negative("initial.amplitude", Some(init.amplitude))?;
            }
            Sim3dLinear => {
                let default = Scenario3D::default();
                fill(&mut self.grid, default.grid.clone());
                fill(&mut self.initial3d, default.initial.clone());
                fill(&mut self.shear, ShearSpec::default());
                fill(&mut self.terms, default.terms);
                fill(&mut self.shear_terms, default.shear_terms);
                fill(&mut ph.eps1, default.eps1);
                fill(&mut ph.rho0, default.rho0);
                fill(&mut nu.dt, default.dt);
                fill(&mut nu.t_final, default.t_final);
                fill(&mut nu.output_every, default.output_every);
                let g = self.grid.as_ref().unwrap();
                if g.ly.is_none() {
                    return Err(Error::config("grid.ly", "required by sim3d-linear"));
                }
                if g.ny.is_none() {
                    return Err(Error::config("grid.ny", "required by sim3d-linear"));
                }
                non_negative("physics.eps1", ph.eps1)?;
                for (i, e) in ph.eps1_scan.iter().flatten().enumerate() {
                    non_negative(&format!("physics.eps1_scan[{i}]"), Some(*e))?;
                }
                positive("physics.rho0", ph.rho0)?;
                non_negative(
                    "initial3d.amplitude",
                    Some(self.initial3d.as_ref().unwrap().amplitude),
                )?;
            }
            HeatDecay => {
                let v = self.vertical.get_or_insert_with(Default::default);
                fill(&mut v.z_max, 300.0);
                fill(&mut v.nz, 2001);
                fill(&mut v.stretch, 5.0);
                fill(&mut self.heat, HeatSpec::default());
                fill(&mut ph.delta, 0.8);
                fill(&mut nu.dt, 1e-2);
                fill(&mut nu.t_final, 1000.0);
                fill(&mut nu.output_every, 100);
                fill(&mut nu.fit_window, [10.0, 1000.0]);
                match ph.delta {
                    Some(d) if !(d > 0.0 && d < 2.0) => {
                        return Err(Error::config(
                            "physics.delta",
                            format!("must lie in (0, 2), got {d}"),
                        ))
                    }
                    _ => {}
                }
                let [a, b] = nu.fit_window.unwrap();
                if !(a > 0.0 && b > a && b <= nu.t_final.unwrap()) {
                    return Err(Error::config(
                        "numerics.fit_window",
                        format!("need 0 < start < end ≤ t_final, got [{a}, {b}]"),
                    ));
                }
                if self.heat.as_ref().unwrap().profiles.is_empty() {
                    return Err(Error::config(
                        "heat.profiles",
                        "at least one profile is required",
                    ));
                }
            }
            LemmaAudit => {
                let v = self.vertical.get_or_insert_with(Default::default);
                fill(&mut v.z_max, 40.0);
                fill(&mut v.nz, 801);
                fill(&mut v.stretch, 0.0);
                fill(&mut self.lemma, LemmaSpec::default());
                fill(&mut ph.lambda, 1.0);
                fill(&mut ph.lambda_tilde, 1.5);
                fill(&mut nu.samples, 100);
                fill(&mut nu.t_eval, 0.0);
                fill(&mut nu.k, 0);
                positive("physics.lambda", ph.lambda)?;
                positive("physics.lambda_tilde", ph.lambda_tilde)?;
                non_negative("numerics.t_eval", nu.t_eval)?;
                let [a, b] = self.lemma.as_ref().unwrap().b_range;
                if !(a > 0.0 && b > a && b.is_finite()) {
                    return Err(Error::config(
                        "lemma.b_range",
                        format!("need 0 < b_min < b_max, got [{a}, {b}]"),
                    ));
                }
                if nu.samples == Some(0) {
                    return Err(Error::config("numerics.samples", "must be at least 1"));
                }
            }
            VerifyInequalities => {
                fill(&mut self.inequalities, InequalitySpec::default());
                fill(&mut nu.cap, DEFAULT_CAP);
                let spec = self.inequalities.as_ref().unwrap();
                let cap = nu.cap.unwrap();
                if cap == 0 || cap >= crate::combinatorics::MAX_ORDER {
                    return Err(Error::config(
                        "numerics.cap",
                        format!("must lie in 1..{}", crate::combinatorics::MAX_ORDER),
                    ));
                }
                if spec.stability_cap == 0 || spec.stability_cap > cap {
                    return Err(Error::config(
                        "inequalities.stability_cap",
                        "must lie in 1..=numerics.cap",
                    ));
                }
                for (i, r) in spec.r_values.iter().enumerate() {
                    if !(*r > 0.0 && *r < 1.0) {
                        return Err(Error::config(
                            format!("inequalities.r_values[{i}]"),
                            format!("must lie in (0, 1), got {r}"),
                        ));
                    }
                }
            }
        }
        positive("numerics.dt", nu.dt)?;
        non_negative("numerics.t_final", nu.t_final)?;
        at_least_one("numerics.output_every", nu.output_every)?;
        if let (Some(dt), Some(t)) = (nu.dt, nu.t_final) {
            let steps = t / dt;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                return Err(Error::config(
                    "numerics.t_final",
                    format!("{t} is not a whole number of steps of {dt}"),
                ));
            }
        }
        if let Some(g) = &self.grid {
            make_grid(g).map_err(|e| Error::config("grid", e.to_string()))?;
        }
        if let Some(v) = &self.vertical {
            VerticalGrid::new(v.z_max.unwrap(), v.nz.unwrap(), v.stretch.unwrap())
                .map_err(|e| Error::config("vertical", e.to_string()))?;
        }
        self.physics = (ph != Physics::default()).then_some(ph);
        self.numerics = (nu != Numerics::default()).then_some(nu);
        Ok(self)
    }

    pub fn physics(&self) -> Physics {
        self.physics.clone().unwrap_or_default()
    }

    pub fn numerics(&self) -> Numerics {
        self.numerics.clone().unwrap_or_default()
    }

    fn need<T: Copy>(v: Option<T>, path: &str) -> Result<T> {
        v.ok_or_else(|| Error::config(path, "missing after resolution"))
    }

    pub fn scenario2d(&self) -> Result<Scenario2D> {
        let (ph, nu) = (self.physics(), self.numerics());
        let snapshots = match (nu.snapshot_every, nu.snapshot_until) {
            (Some(every), Some(until)) => Some(SnapshotPlan { every, until }),
            _ => None,
        };
        let sc = Scenario2D {
            grid: self
                .grid
                .clone()
                .ok_or_else(|| Error::config("grid", "missing"))?,
            initial: self
                .initial
                .clone()
                .ok_or_else(|| Error::config("initial", "missing"))?,
            eps0: Self::need(ph.eps0, "physics.eps0")?,
            dt: Self::need(nu.dt, "numerics.dt")?,
            t_final: Self::need(nu.t_final, "numerics.t_final")?,
            output_every: Self::need(nu.output_every, "numerics.output_every")?,
            seed: self.seed.unwrap_or(0),
            advection: self.advection.unwrap_or(true),
            terms: self.terms.unwrap_or_default(),
            snapshots,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn scenario3d(&self) -> Result<Scenario3D> {
        let (ph, nu) = (self.physics(), self.numerics());
        let shear = self.shear.clone().unwrap_or_default();
        Ok(Scenario3D {
            grid: self
                .grid
                .clone()
                .ok_or_else(|| Error::config("grid", "missing"))?,
            initial: self.initial3d.clone().unwrap_or_default(),
            rho0: Self::need(ph.rho0, "physics.rho0")?,
            eps1: Self::need(ph.eps1, "physics.eps1")?,
            shear_u: shear.u,
            shear_v: shear.v,
            dt: Self::need(nu.dt, "numerics.dt")?,
            t_final: Self::need(nu.t_final, "numerics.t_final")?,
            output_every: Self::need(nu.output_every, "numerics.output_every")?,
            seed: self.seed.unwrap_or(0),
            terms: self.terms.unwrap_or_default(),
            shear_terms: self.shear_terms.unwrap_or_default(),
        })
    }

    pub fn vertical_grid(&self) -> Result<VerticalGrid> {
        let v = self
            .vertical
            .clone()
            .ok_or_else(|| Error::config("vertical", "missing"))?;
        VerticalGrid::new(
            Self::need(v.z_max, "vertical.z_max")?,
            Self::need(v.nz, "vertical.nz")?,
            Self::need(v.stretch, "vertical.stretch")?,
        )
    }

    /// Pretty JSON of the config; for a resolved config this is the effective-config echo.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `parse_config`: strict parse plus resolution. `kind` supplies the
/// experiment when the document does not name one.
pub fn parse_config(text: &str, kind: Option<ExperimentKind>) -> Result<ScenarioConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let mut raw: ScenarioConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            "(root)".to_string()
        } else {
            path
        };
        Error::config(path, e.into_inner().to_string())
    })?;
    de.end()
        .map_err(|e| Error::config("(root)", e.to_string()))?;
    match (raw.kind, kind) {
        (None, Some(k)) => raw.kind = Some(k),
        (Some(a), Some(b)) if a != b => {
            return Err(Error::config(
                "kind",
                format!("config is for {a}, command runs {b}"),
            ));
        }
        _ => {}
    }
    raw.resolve()
}
