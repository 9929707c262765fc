//! Experiment drivers behind the CLI. Each one writes its artifacts into an
//! output directory and returns the list of audit checks.

use crate::combinatorics::{
    hardy_check, inequality_scan, pair_ratio, young_check, Inequality, MultiIndexWeight, WeightKind,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::VerticalGrid;
use crate::heat1d::{
    decay_components, fit_decay, lemma_audit, random_profile_family, solve_heat, Lemma, LemmaParams,
};
use crate::io::checkpoint::{load_state2d, save_state2d, save_state3d};
use crate::io::config::{ExperimentKind, ScenarioConfig};
use crate::io::csv::{format_value, read_series, write_series, write_table};
use crate::io::plots::{decay_plot, energy_plot, DecaySeries};
use crate::norms::{monotonicity_audit, smoothing_ladder, tangential_radius_fit, NormReport};
use crate::solver2d::{continue_scenario2d, initial_state, Run2D, Scenario2D};
use crate::solver3d::{run_scenario3d, Scenario3D, MONITOR_TOLERANCE};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// NaN (written as `null`) when the value is undefined.
    #[serde(deserialize_with = "null_as_nan")]
    pub value: f64,
    pub threshold: String,
}

fn null_as_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Check {
    pub fn new(name: &str, pass: bool, value: f64, threshold: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            value,
            threshold: threshold.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Summary {
    fn new(kind: ExperimentKind, checks: Vec<Check>) -> Self {
        Self {
            kind,
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

/// Runs the experiment named by `config` into `out`.
pub fn run_experiment(
    config: &ScenarioConfig,
    out: &Path,
    resume: Option<&Path>,
    exec: Execution,
) -> Result<Summary> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("effective_config.json"), config.to_json()?)?;
    let kind = config.kind()?;
    if resume.is_some() && kind != ExperimentKind::Sim2d && kind != ExperimentKind::SmoothingLadder
    {
        return Err(Error::Parameter(format!(
            "{kind} cannot resume from a checkpoint"
        )));
    }
    let checks = match kind {
        ExperimentKind::Sim2d => sim2d(config, out, resume, exec)?,
        ExperimentKind::SmoothingLadder => ladder(config, out, resume, exec)?,
        ExperimentKind::Sim3dLinear => sim3d(config, out, exec)?,
        ExperimentKind::HeatDecay => heat_decay(config, out)?,
        ExperimentKind::LemmaAudit => lemmas(config, out, exec)?,
        ExperimentKind::VerifyInequalities => inequalities(config, out, exec)?,
    };
    let summary = Summary::new(kind, checks);
    std::fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

fn start_state(sc: &Scenario2D, resume: Option<&Path>) -> Result<crate::solver2d::State2D> {
    match resume {
        None => initial_state(sc),
        Some(p) => {
            let state = load_state2d(p)?;
            if state.u.grid().config() != sc.grid || state.dt != sc.dt {
                return Err(Error::Checkpoint(
                    "checkpoint grid or step size differs from the config".into(),
                ));
            }
            Ok(state)
        }
    }
}

fn run2d(sc: &Scenario2D, out: &Path, resume: Option<&Path>, exec: Execution) -> Result<Run2D> {
    let state = start_state(sc, resume)?;
    let run = continue_scenario2d(sc, state, exec, &mut |_| Ok(()))?;
    write_series(&run.report, &out.join("series.csv"))?;
    save_state2d(&run.state, &out.join("checkpoint.json"))?;
    Ok(run)
}

fn energy_checks(report: &NormReport, eps0: f64) -> Result<Vec<Check>> {
    let audit = monotonicity_audit(report, eps0, 1e-6)?;
    let norms = report.column("h1_norm").unwrap_or_default();
    let (first, last) = (norms[0], *norms.last().unwrap());
    Ok(vec![
        Check::new(
            "energy budget slack / eps0^2",
            audit.pass,
            audit.worst_slack / (eps0 * eps0),
            ">= -1e-6",
        ),
        Check::new(
            "final / initial H1 norm",
            last <= first,
            last / first,
            "<= 1",
        ),
    ])
}

fn energy_figure(report: &NormReport, eps0: f64, path: &Path) -> Result<()> {
    let t = report.times();
    let n = report.column("h1_norm").unwrap_or_default();
    let c = report.column("cum_dissipation").unwrap_or_default();
    let e: Vec<f64> = n.iter().map(|v| v * v).collect();
    let b: Vec<f64> = e.iter().zip(&c).map(|(a, b)| a + b).collect();
    energy_plot(path, &t, &e, &b, eps0)
}

fn sim2d(
    config: &ScenarioConfig,
    out: &Path,
    resume: Option<&Path>,
    exec: Execution,
) -> Result<Vec<Check>> {
    let sc = config.scenario2d()?;
    let run = run2d(&sc, out, resume, exec)?;
    if run.report.len() >= 2 {
        energy_figure(&run.report, sc.eps0, &out.join("energy.svg"))?;
    }
    let mut checks = energy_checks(&run.report, sc.eps0)?;
    let ratio = run
        .report
        .column("energy_constant_ratio")
        .unwrap_or_default();
    let worst = ratio.iter().cloned().fold(0.0, f64::max);
    checks.push(Check::new(
        "empirical energy constant",
        worst.is_finite(),
        worst,
        "reported",
    ));
    Ok(checks)
}

/// Ladder constant, its value on every other snapshot, and the radius series.
pub struct LadderStudy {
    pub ladder: crate::norms::Ladder,
    pub c0_coarse: f64,
    pub radius: Vec<(f64, Option<f64>)>,
}

pub fn ladder_study(
    snapshots: &[(f64, crate::field::SpectralField)],
    cap: usize,
    eps0: f64,
) -> Result<LadderStudy> {
    let ladder = smoothing_ladder(snapshots, cap, eps0)?;
    let coarse: Vec<_> = snapshots.iter().step_by(2).cloned().collect();
    let c0_coarse = smoothing_ladder(&coarse, cap, eps0)?.c0;
    let radius = snapshots
        .iter()
        .map(|(t, u)| match tangential_radius_fit(u) {
            Ok(f) => Ok((*t, Some(f.radius))),
            Err(Error::Indeterminate(_)) => Ok((*t, None)),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(LadderStudy {
        ladder,
        c0_coarse,
        radius,
    })
}

/// Checks of the ladder experiment over the radius window `[t_a, t_b]`.
pub fn ladder_checks(study: &LadderStudy, window: (f64, f64)) -> Vec<Check> {
    let finite = study.ladder.entries.iter().all(|e| e.value.is_finite());
    let c0 = study.ladder.c0;
    let drift = (study.c0_coarse / c0 - 1.0).abs();
    let inside: Vec<(f64, Option<f64>)> = study
        .radius
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 - 1e-9 && *t <= window.1 + 1e-9)
        .collect();
    let mut worst_drop: f64 = 0.0;
    let mut defined = !inside.is_empty();
    for w in inside.windows(2) {
        match (w[0].1, w[1].1) {
            (Some(a), Some(b)) => worst_drop = worst_drop.max(a - b),
            _ => defined = false,
        }
    }
    let at_one = study
        .radius
        .iter()
        .min_by(|a, b| (a.0 - 1.0).abs().total_cmp(&(b.0 - 1.0).abs()))
        .and_then(|r| r.1)
        .unwrap_or(f64::NAN);
    vec![
        Check::new(
            "ladder entries finite",
            finite,
            study.ladder.entries.len() as f64,
            "all finite",
        ),
        Check::new(
            "C0 drift under cadence halving",
            c0.is_finite() && drift <= 0.2,
            drift,
            "<= 0.2",
        ),
        Check::new(
            "largest radius decrease on the window",
            defined && worst_drop <= 0.0,
            if defined { worst_drop } else { f64::NAN },
            "<= 0",
        ),
        Check::new("radius estimate at t = 1", at_one > 0.0, at_one, "> 0"),
    ]
}

fn ladder(
    config: &ScenarioConfig,
    out: &Path,
    resume: Option<&Path>,
    exec: Execution,
) -> Result<Vec<Check>> {
    let sc = config.scenario2d()?;
    let cap = config.numerics().cap.unwrap_or(3);
    let run = run2d(&sc, out, resume, exec)?;
    let study = ladder_study(&run.snapshots, cap, sc.eps0)?;
    let rows: Vec<Vec<String>> = study
        .ladder
        .entries
        .iter()
        .map(|e| {
            vec![
                e.alpha[0].to_string(),
                e.alpha[1].to_string(),
                e.alpha[2].to_string(),
                format_value(e.value),
            ]
        })
        .collect();
    write_table(&out.join("ladder.csv"), &["k", "m", "j", "value"], &rows)?;
    let rows: Vec<Vec<String>> = study
        .radius
        .iter()
        .map(|(t, r)| {
            vec![
                format_value(*t),
                r.map(format_value).unwrap_or_else(|| "nan".into()),
            ]
        })
        .collect();
    write_table(&out.join("radius.csv"), &["t", "radius"], &rows)?;
    let t_end = run.snapshots.last().map(|s| s.0).unwrap_or(0.0);
    let mut checks = ladder_checks(&study, (0.1, t_end.min(5.0)));
    checks.push(Check::new(
        "fitted C0",
        study.ladder.c0.is_finite(),
        study.ladder.c0,
        "finite",
    ));
    Ok(checks)
}

fn sim3d(config: &ScenarioConfig, out: &Path, exec: Execution) -> Result<Vec<Check>> {
    let sc = config.scenario3d()?;
    let run = run_scenario3d(&sc, exec)?;
    write_series(&run.report, &out.join("series.csv"))?;
    save_state3d(&run.state, &out.join("checkpoint.json"))?;
    let x = run.report.column("x_norm_sq").unwrap_or_default();
    let t = run.report.times();
    if t.len() >= 2 {
        let lhs = run.report.column("budget_lhs").unwrap_or_default();
        energy_plot(
            &out.join("monitor.svg"),
            &t,
            &x,
            &lhs,
            run.audit.budget.sqrt(),
        )?;
    }
    let mut checks = vec![
        Check::new(
            "monitor excess over initial X norm",
            run.audit.pass,
            run.audit.worst_excess,
            "<= 1e-5",
        ),
        Check::new(
            "shear certificate C1 (U)",
            run.shear.certificate_u.c1.is_finite(),
            run.shear.certificate_u.c1,
            "finite",
        ),
        Check::new(
            "shear certificate C1 (V)",
            run.shear.certificate_v.c1.is_finite(),
            run.shear.certificate_v.c1,
            "finite",
        ),
    ];
    if let Some(scan) = config.physics().eps1_scan {
        checks.push(eps1_scan(&sc, &scan, out, exec)?);
    }
    Ok(checks)
}

/// Reruns the scenario for each shear amplitude and records where the monitor
/// first fails. The check only reports; it does not claim a threshold.
fn eps1_scan(sc: &Scenario3D, values: &[f64], out: &Path, exec: Execution) -> Result<Check> {
    let mut rows = Vec::new();
    let mut smallest_failing = f64::NAN;
    for &eps1 in values {
        let run = run_scenario3d(&Scenario3D { eps1, ..sc.clone() }, exec)?;
        let lhs = run.report.column("budget_lhs").unwrap_or_default();
        let first_failure = run
            .report
            .times()
            .into_iter()
            .zip(&lhs)
            .find(|(_, v)| *v / run.audit.budget - 1.0 > MONITOR_TOLERANCE)
            .map(|(t, _)| t)
            .unwrap_or(f64::NAN);
        if !run.audit.pass && (smallest_failing.is_nan() || eps1 < smallest_failing) {
            smallest_failing = eps1;
        }
        rows.push(vec![
            format_value(eps1),
            format_value(run.audit.worst_excess),
            format_value(first_failure),
            run.audit.pass.to_string(),
        ]);
    }
    write_table(
        &out.join("eps1_scan.csv"),
        &["eps1", "worst_excess", "first_failure_t", "pass"],
        &rows,
    )?;
    Ok(Check::new(
        "smallest eps1 failing the monitor",
        true,
        smallest_failing,
        "reported",
    ))
}

/// Time series of the decay functional of one heat run.
pub struct DecayRun {
    pub times: Vec<f64>,
    pub dz: Vec<f64>,
    pub total: Vec<f64>,
    pub moment: Vec<f64>,
}

pub fn decay_run(
    grid: &Arc<VerticalGrid>,
    h0: &[f64],
    t_final: f64,
    dt: f64,
    every: u64,
) -> Result<DecayRun> {
    let seq = solve_heat(grid, h0, t_final, dt, every)?;
    let mut r = DecayRun {
        times: Vec::new(),
        dz: Vec::new(),
        total: Vec::new(),
        moment: Vec::new(),
    };
    let z = grid.nodes();
    for s in &seq {
        let c = decay_components(grid, &s.h);
        r.times.push(s.t);
        r.dz.push(c.dz);
        r.total.push(c.total());
        let zh: Vec<f64> = z.iter().zip(&s.h).map(|(a, b)| a * b).collect();
        r.moment.push(grid.integrate(&zh));
    }
    Ok(r)
}

fn heat_decay(config: &ScenarioConfig, out: &Path) -> Result<Vec<Check>> {
    use crate::solver2d::Profile;
    let grid = Arc::new(config.vertical_grid()?);
    let (ph, nu) = (config.physics(), config.numerics());
    let delta = ph.delta.unwrap_or(0.8);
    let threshold = -(8.0 - delta) / 4.0;
    let [a, b] = nu.fit_window.unwrap_or([10.0, 1000.0]);
    let (dt, t_final, every) = (
        nu.dt.unwrap_or(1e-2),
        nu.t_final.unwrap_or(1e3),
        nu.output_every.unwrap_or(100),
    );
    let profiles = config.heat.clone().unwrap_or_default().profiles;
    let mut checks = Vec::new();
    let mut runs = Vec::new();
    for p in &profiles {
        let name = serde_json::to_value(p)?
            .as_str()
            .unwrap_or("profile")
            .to_string();
        let h0 = p.sample(grid.nodes())?;
        let r = decay_run(&grid, &h0, t_final, dt, every)?;
        let slope = fit_decay(&r.times, &r.total, (a, b))?;
        let drift = r
            .moment
            .iter()
            .map(|m| (m - r.moment[0]).abs())
            .fold(0.0, f64::max);
        let rows: Vec<Vec<String>> = (0..r.times.len())
            .map(|i| {
                [r.times[i], r.dz[i], r.total[i], r.moment[i]]
                    .map(format_value)
                    .to_vec()
            })
            .collect();
        write_table(
            &out.join(format!("decay_{name}.csv")),
            &["t", "dz_sup", "total", "moment"],
            &rows,
        )?;
        match p {
            Profile::SelfSimilar => {
                checks.push(Check::new(
                    "self_similar decay slope",
                    (slope + 1.5).abs() <= 0.1,
                    slope,
                    "-1.5 +- 0.1",
                ));
            }
            Profile::ZeroMoment => {
                checks.push(Check::new(
                    "zero_moment decay slope",
                    slope <= threshold,
                    slope,
                    format!("<= {threshold}"),
                ));
            }
            _ => checks.push(Check::new(
                &format!("{name} decay slope"),
                slope.is_finite(),
                slope,
                "finite",
            )),
        }
        checks.push(Check::new(
            &format!("{name} moment drift"),
            drift <= 1e-8,
            drift,
            "<= 1e-8",
        ));
        runs.push((name, r));
    }
    let series: Vec<DecaySeries> = runs
        .iter()
        .map(|(name, r)| DecaySeries {
            label: name,
            times: &r.times,
            values: &r.total,
        })
        .collect();
    decay_plot(
        &out.join("decay.svg"),
        "heat decay functional",
        &series,
        (a, b),
    )?;
    Ok(checks)
}

fn lemmas(config: &ScenarioConfig, out: &Path, exec: Execution) -> Result<Vec<Check>> {
    let grid = config.vertical_grid()?;
    let (ph, nu) = (config.physics(), config.numerics());
    let spec = config.lemma.clone().unwrap_or_default();
    let params = LemmaParams {
        lambda: ph.lambda.unwrap_or(1.0),
        lambda_tilde: ph.lambda_tilde.unwrap_or(1.5),
        t: nu.t_eval.unwrap_or(0.0),
        k: nu.k.unwrap_or(0),
    };
    let mut samples = random_profile_family(
        &grid,
        nu.samples.unwrap_or(100),
        config.seed.unwrap_or(0),
        (spec.b_range[0], spec.b_range[1]),
    );
    if spec.which == Lemma::WeightedPoincare {
        let s = 4.0 * (1.0 + params.t) / params.lambda;
        samples.push(grid.nodes().iter().map(|z| (-z * z / s).exp()).collect());
    }
    let audit = lemma_audit(spec.which, &grid, &samples, params, exec)?;
    let rows: Vec<Vec<String>> = audit
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                i.to_string(),
                format_value(s.lhs),
                format_value(s.rhs),
                format_value(s.ratio),
                s.flag.clone().unwrap_or_default().replace(',', ";"),
            ]
        })
        .collect();
    write_table(
        &out.join("lemma_samples.csv"),
        &["index", "lhs", "rhs", "ratio", "flag"],
        &rows,
    )?;
    let mut checks = vec![Check::new(
        "admitted samples",
        audit.admitted > 0,
        audit.admitted as f64,
        ">= 1",
    )];
    if spec.which == Lemma::WeightedPoincare {
        let gauss = audit.samples.last().unwrap();
        checks.push(Check::new(
            "gaussian saturation ratio",
            (gauss.ratio - 1.0).abs() <= 1e-4,
            gauss.ratio,
            "1 +- 1e-4",
        ));
        checks.push(Check::new(
            "worst ratio",
            audit.worst_ratio <= 1.0 + 1e-6,
            audit.worst_ratio,
            "<= 1 + 1e-6",
        ));
    } else {
        checks.push(Check::new(
            "fitted constant",
            audit.fitted_constant.is_finite(),
            audit.fitted_constant,
            "finite",
        ));
    }
    Ok(checks)
}

fn inequalities(config: &ScenarioConfig, out: &Path, exec: Execution) -> Result<Vec<Check>> {
    let spec = config.inequalities.clone().unwrap_or_default();
    let cap = config
        .numerics()
        .cap
        .unwrap_or(crate::combinatorics::DEFAULT_CAP);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let idx = |a: [usize; 3]| format!("{}:{}:{}", a[0], a[1], a[2]);
    for &r in &spec.r_values {
        for &id in &spec.ids {
            let main = inequality_scan(id, r, cap, exec)?;
            let small = inequality_scan(id, r, spec.stability_cap, exec)?;
            for s in [&small, &main] {
                rows.push(vec![
                    id.to_string(),
                    format_value(r),
                    s.cap.to_string(),
                    format_value(s.constant),
                    idx(s.alpha),
                    idx(s.beta),
                ]);
            }
            checks.push(Check::new(
                &format!("{id} r={r} constant finite"),
                main.constant.is_finite(),
                main.constant,
                "finite",
            ));
            let diff = (main.constant - small.constant).abs() / main.constant.abs();
            checks.push(Check::new(
                &format!("{id} r={r} cap {} vs {cap}", spec.stability_cap),
                diff <= 1e-12,
                diff,
                "relative difference <= 1e-12",
            ));
        }
    }
    write_table(
        &out.join("scans.csv"),
        &["ineq", "r", "cap", "constant", "alpha", "beta"],
        &rows,
    )?;
    let w = MultiIndexWeight::new(WeightKind::M, 0.5)?;
    let spot = pair_ratio(Inequality::A3, &w, [0, 0, 1], [0, 0, 0])?;
    checks.push(Check::new(
        "A.3 spot value at alpha=(0,0,1) beta=0",
        (spot - 16.0 / 17.0).abs() <= 1e-12,
        spot,
        "16/17 +- 1e-12",
    ));
    let seed = config.seed.unwrap_or(0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst_young: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..20);
        let m = rng.random_range(1..20);
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let q: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        worst_young = worst_young.max(young_check(&p, &q)?);
    }
    checks.push(Check::new(
        "young ratio over 100 random pairs",
        worst_young <= 1.0 + 1e-12,
        worst_young,
        "<= 1 + 1e-12",
    ));
    let g = VerticalGrid::new(40.0, 2001, 0.0)?;
    let mut worst_hardy: f64 = 0.0;
    for h in random_profile_family(&g, 100, seed, (0.05, 1.0)) {
        worst_hardy = worst_hardy.max(hardy_check(&g, &h)?);
    }
    checks.push(Check::new(
        "hardy ratio over 100 random profiles",
        worst_hardy <= 1.0 + 1e-4,
        worst_hardy,
        "<= 1 + 1e-4",
    ));
    Ok(checks)
}

/// Re-renders plots from the CSV files in a finished run directory and writes `report.md`.
pub fn render_report(dir: &Path) -> Result<Summary> {
    let text = std::fs::read_to_string(dir.join("summary.json"))?;
    let summary: Summary = serde_json::from_str(&text)?;
    let config_text = std::fs::read_to_string(dir.join("effective_config.json"))?;
    let config = crate::io::config::parse_config(&config_text, None)?;
    let mut figures: Vec<PathBuf> = Vec::new();
    match summary.kind {
        ExperimentKind::Sim2d | ExperimentKind::SmoothingLadder => {
            let report = read_series(&dir.join("series.csv"))?;
            let p = dir.join("energy.svg");
            energy_figure(&report, config.physics().eps0.unwrap_or(0.01), &p)?;
            figures.push(p);
        }
        ExperimentKind::HeatDecay => {
            let [a, b] = config.numerics().fit_window.unwrap_or([10.0, 1000.0]);
            let mut loaded = Vec::new();
            for p in config.heat.clone().unwrap_or_default().profiles {
                let name = serde_json::to_value(p)?
                    .as_str()
                    .unwrap_or("profile")
                    .to_string();
                let text = std::fs::read_to_string(dir.join(format!("decay_{name}.csv")))?;
                let mut t = Vec::new();
                let mut v = Vec::new();
                for line in text.lines().skip(1) {
                    let cells: Vec<f64> = line
                        .split(',')
                        .map(|c| c.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::Parameter(e.to_string()))?;
                    t.push(cells[0]);
                    v.push(cells[2]);
                }
                loaded.push((name, t, v));
            }
            let series: Vec<DecaySeries> = loaded
                .iter()
                .map(|(n, t, v)| DecaySeries {
                    label: n,
                    times: t,
                    values: v,
                })
                .collect();
            let p = dir.join("decay.svg");
            decay_plot(&p, "heat decay functional", &series, (a, b))?;
            figures.push(p);
        }
        _ => {}
    }
    let mut md = format!(
        "# {} run\n\nOverall: {}\n\n| check | value | threshold | result |\n|---|---|---|---|\n",
        summary.kind,
        if summary.pass { "pass" } else { "FAIL" }
    );
    for c in &summary.checks {
        md.push_str(&format!(
            "| {} | {:.6e} | {} | {} |\n",
            c.name,
            c.value,
            c.threshold,
            if c.pass { "pass" } else { "FAIL" }
        ));
    }
    for f in &figures {
        if let Some(name) = f.file_name().and_then(|s| s.to_str()) {
            md.push_str(&format!("\n![{name}]({name})\n"));
        }
    }
    std::fs::write(dir.join("report.md"), md)?;
    Ok(summary)
}
