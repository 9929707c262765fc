use shercliff::combinatorics::Inequality;
use shercliff::exec::Execution;
use shercliff::experiments::{ladder_checks, ladder_study, run_experiment, Summary};
use shercliff::grid::{make_grid, GridConfig, VerticalGrid};
use shercliff::heat1d::{solve_heat, structural_residuals, StructuralResiduals};
use shercliff::io::config::{parse_config, ExperimentKind};
use shercliff::norms::monotonicity_audit;
use shercliff::shercliff::dissipation_residual;
use shercliff::solver2d::{
    make_initial_data, run_scenario2d, InitialDataSpec, ModeContent, Normalization, Profile, Run2D,
};
use shercliff::solver3d::{mode_weights, run_scenario3d, Scenario3D};
use shercliff_acceptance::{bessel_i0, check_value, criterion, Outcome};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

fn scratch(name: &str) -> PathBuf {
    let p = Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join("acceptance")
        .join(name);
    let _ = std::fs::remove_dir_all(&p);
    p
}

fn experiment(kind: ExperimentKind, config: &str, dir: &Path) -> shercliff::Result<Summary> {
    let c = parse_config(config, Some(kind))?;
    run_experiment(&c, dir, None, Execution::default())
}

fn dissipation_identity() -> Outcome {
    let grid = match make_grid(&GridConfig::new_2d(2.0 * PI, 32, 20.0, 129, 0.0)) {
        Ok(g) => Arc::new(g),
        Err(e) => return Outcome::error(e),
    };
    let profiles = [
        Profile::ZGaussian,
        Profile::ZExponential,
        Profile::SelfSimilar,
        Profile::ZeroMoment,
    ];
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let spec = InitialDataSpec {
            amplitude: 1.0,
            profile: profiles[seed as usize % profiles.len()],
            modes: ModeContent::Band {
                k_min: 1,
                k_max: 10,
                sigma: 0.3,
            },
            normalization: Normalization::Amplitude,
        };
        let r = make_initial_data(&spec, &grid, seed).and_then(|u| dissipation_residual(&u));
        match r {
            Ok(r) => worst = worst.max(r),
            Err(e) => return Outcome::error(e),
        }
    }
    Outcome::new(
        worst <= 1e-10,
        format!("max residual over 20 fields {worst:.3e} (<= 1e-10)"),
    )
}

/// The small-data 2D run shared by the energy and ladder criteria.
fn small_data_run() -> shercliff::Result<(Run2D, f64)> {
    let c = parse_config(
        r#"{"numerics": {"t_final": 50.0}}"#,
        Some(ExperimentKind::SmoothingLadder),
    )?;
    let sc = c.scenario2d()?;
    Ok((run_scenario2d(&sc, Execution::default())?, sc.eps0))
}

fn energy(run: &shercliff::Result<(Run2D, f64)>) -> Outcome {
    let (run, eps0) = match run {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let audit = match monotonicity_audit(&run.report, *eps0, 1e-6) {
        Ok(a) => a,
        Err(e) => return Outcome::error(e),
    };
    let n = run.report.column("h1_norm").unwrap_or_default();
    let (first, last) = (n[0], *n.last().unwrap());
    let t_end = run.report.times().last().copied().unwrap_or(0.0);
    Outcome::new(
        audit.pass && last <= first && (t_end - 50.0).abs() < 1e-9,
        format!(
            "T = {t_end}, {} samples, worst budget slack {:.3e} eps0^2 (>= -1e-6), |u(T)|/|u0| = {:.4e} (<= 1)",
            n.len(),
            audit.worst_slack / (eps0 * eps0),
            last / first
        ),
    )
}

fn ladder(run: &shercliff::Result<(Run2D, f64)>) -> Outcome {
    let (run, eps0) = match run {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let study = match ladder_study(&run.snapshots, 3, *eps0) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e),
    };
    let checks = ladder_checks(&study, (0.1, 5.0));
    let detail: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {:.4e} ({})", c.name, c.value, c.threshold))
        .collect();
    Outcome::new(
        checks.iter().all(|c| c.pass),
        format!("{} snapshots; {}", run.snapshots.len(), detail.join(", ")),
    )
}

fn heat_decay(summary: &shercliff::Result<Summary>) -> Outcome {
    let s = match summary {
        Ok(s) => s,
        Err(e) => return Outcome::error(e),
    };
    let a = check_value(s, "self_similar decay slope");
    let b = check_value(s, "zero_moment decay slope");
    match (a, b) {
        (Some((pa, va)), Some((pb, vb))) => Outcome::new(
            pa && pb,
            format!(
                "self-similar slope {va:.4} (-1.5 +- 0.1) {}, zero-moment slope {vb:.4} (<= -1.8) {}",
                if pa { "ok" } else { "MISS" },
                if pb { "ok" } else { "MISS" }
            ),
        ),
        _ => Outcome::new(false, "decay checks missing from the summary"),
    }
}

fn residual_study(nz: usize, dt: f64, profile: Profile) -> shercliff::Result<StructuralResiduals> {
    let g = Arc::new(VerticalGrid::new(40.0, nz, 0.0)?);
    let h0 = profile.sample(g.nodes())?;
    structural_residuals(&solve_heat(&g, &h0, 2.0, dt, 1)?)
}

fn good_unknowns(summary: &shercliff::Result<Summary>) -> Outcome {
    let run = || -> shercliff::Result<Outcome> {
        let coarse = residual_study(401, 1e-2, Profile::SelfSimilar)?;
        let fine = residual_study(801, 5e-3, Profile::SelfSimilar)?;
        let zero = residual_study(801, 5e-3, Profile::ZeroMoment)?;
        let rt = coarse.tilde_residual / fine.tilde_residual;
        let rh = coarse.big_h_residual / fine.big_h_residual;
        let s = summary
            .as_ref()
            .map_err(|e| shercliff::Error::Parameter(e.to_string()))?;
        let long_drift = ["self_similar moment drift", "zero_moment moment drift"]
            .iter()
            .filter_map(|n| check_value(s, n))
            .map(|c| c.1)
            .fold(0.0, f64::max);
        let drift = long_drift.max(fine.moment_drift).max(zero.moment_drift);
        // self-similar data carry the moment ∫ z² e^{-z²/4} dz = 2√π, and
        // ∫ h̃ = M / (2(1+t)) exactly for any solution
        let m = 2.0 * PI.sqrt();
        let times: Vec<f64> = (0..fine.tilde_means.len())
            .map(|i| i as f64 * 5e-3)
            .collect();
        let law = fine
            .tilde_means
            .iter()
            .zip(&times)
            .map(|(v, t)| v.abs() * 2.0 * (1.0 + t) / m)
            .fold(f64::INFINITY, f64::min);
        let floor = fine
            .tilde_means
            .iter()
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min);
        let zero_max = zero.tilde_means.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let pass =
            rt >= 3.5 && rh >= 3.5 && drift <= 1e-8 && law >= 0.99 && zero_max < 1e-2 * floor;
        Ok(Outcome::new(
            pass,
            format!(
                "residual ratios h~ {rt:.3}, H {rh:.3} (>= 3.5); moment drift {drift:.3e} (<= 1e-8); \
                 nonzero-moment min |int h~| {floor:.4e} = {law:.4} x M/(2(1+t)) (>= 0.99); \
                 zero-moment max |int h~| {zero_max:.3e}"
            ),
        ))
    };
    run().unwrap_or_else(Outcome::error)
}

fn lemma(dir: &Path) -> Outcome {
    let s = match experiment(ExperimentKind::LemmaAudit, "{}", dir) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e),
    };
    match (
        check_value(&s, "gaussian saturation ratio"),
        check_value(&s, "worst ratio"),
    ) {
        (Some((pa, a)), Some((pb, b))) => Outcome::new(
            pa && pb,
            format!("gaussian ratio {a:.8} (1 +- 1e-4), worst of 100 random profiles {b:.8} (<= 1 + 1e-6)"),
        ),
        _ => Outcome::new(false, "lemma checks missing from the summary"),
    }
}

fn monitor() -> Outcome {
    let run = || -> shercliff::Result<Outcome> {
        let sheared = run_scenario3d(&Scenario3D::default(), Execution::default())?;
        let free = run_scenario3d(
            &Scenario3D {
                eps1: 0.0,
                ..Default::default()
            },
            Execution::default(),
        )?;
        let x = free.report.column("x_norm_sq").unwrap_or_default();
        let decreasing = x.len() > 1 && x.windows(2).all(|w| w[1] < w[0]);
        let t_end = sheared.report.times().last().copied().unwrap_or(0.0);
        Ok(Outcome::new(
            sheared.audit.pass && decreasing && (t_end - 20.0).abs() < 1e-9,
            format!(
                "eps1 = 1e-3: worst monitor excess {:.3e} (<= 1e-5) to T = {t_end}; eps1 = 0: X norm strictly decreasing over {} samples: {decreasing}",
                sheared.audit.worst_excess,
                x.len()
            ),
        ))
    };
    run().unwrap_or_else(Outcome::error)
}

fn bessel() -> Outcome {
    match mode_weights(1.0, 1.0) {
        Ok((w, _)) => {
            let oracle = bessel_i0(2.0, 400);
            let err = (w - oracle).abs();
            Outcome::new(
                err <= 1e-12,
                format!(
                    "series {w:.15}, quadrature oracle {oracle:.15}, |diff| {err:.1e} (<= 1e-12)"
                ),
            )
        }
        Err(e) => Outcome::error(e),
    }
}

fn scans(dir: &Path) -> Outcome {
    let s = match experiment(ExperimentKind::VerifyInequalities, "{}", dir) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e),
    };
    let mut failed = Vec::new();
    let mut finite = true;
    for r in [0.1, 0.5, 0.9] {
        for id in Inequality::ALL {
            match check_value(&s, &format!("{id} r={r} constant finite")) {
                Some((p, _)) => finite &= p,
                None => return Outcome::new(false, format!("{id} r={r} missing")),
            }
            match check_value(&s, &format!("{id} r={r} cap 15 vs 25")) {
                Some((true, _)) => {}
                Some((false, d)) => failed.push(format!("{id} r={r} ({d:.2e})")),
                None => return Outcome::new(false, format!("{id} r={r} missing")),
            }
        }
    }
    let spot = check_value(&s, "A.3 spot value at alpha=(0,0,1) beta=0");
    let spot_ok = matches!(spot, Some((true, _)));
    let unstable = if failed.is_empty() {
        "none".to_string()
    } else {
        failed.join(" ")
    };
    Outcome::new(
        finite && failed.is_empty() && spot_ok,
        format!(
            "12 constants finite: {finite}; cap 15 vs 25 relative change above 1e-12: {unstable}; spot value {:.15} (16/17 +- 1e-12)",
            spot.map(|s| s.1).unwrap_or(f64::NAN)
        ),
    )
}

const SHORT_RUNS: [(ExperimentKind, &str); 6] = [
    (
        ExperimentKind::Sim2d,
        r#"{"seed": 7, "numerics": {"t_final": 0.2}}"#,
    ),
    (
        ExperimentKind::Sim3dLinear,
        r#"{"seed": 7, "numerics": {"t_final": 0.2}}"#,
    ),
    (
        ExperimentKind::HeatDecay,
        r#"{"numerics": {"t_final": 20.0, "fit_window": [5.0, 20.0]}}"#,
    ),
    (
        ExperimentKind::VerifyInequalities,
        r#"{"seed": 7, "numerics": {"cap": 12}, "inequalities": {"stability_cap": 8}}"#,
    ),
    (ExperimentKind::LemmaAudit, r#"{"seed": 7}"#),
    (
        ExperimentKind::SmoothingLadder,
        r#"{"seed": 7, "numerics": {"t_final": 0.5}}"#,
    ),
];

fn csv_files(dir: &Path) -> std::io::Result<BTreeMap<String, Vec<u8>>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            out.insert(name, std::fs::read(&p)?);
        }
    }
    Ok(out)
}

fn determinism(dir: &Path) -> Outcome {
    let schedules: [(&str, Option<usize>); 4] = [
        ("sequential", None),
        ("1 thread", Some(1)),
        ("2 threads", Some(2)),
        ("4 threads", Some(4)),
    ];
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for (kind, config) in SHORT_RUNS {
        let mut reference: Option<BTreeMap<String, Vec<u8>>> = None;
        for (label, threads) in schedules {
            let out = dir.join(format!("{kind}-{}", label.replace(' ', "_")));
            let c = match parse_config(config, Some(kind)) {
                Ok(c) => c,
                Err(e) => return Outcome::error(e),
            };
            let result = match threads {
                None => run_experiment(&c, &out, None, Execution::Sequential),
                Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => {
                        pool.install(|| run_experiment(&c, &out, None, Execution::Parallel))
                    }
                    Err(e) => return Outcome::error(e),
                },
            };
            if let Err(e) = result {
                return Outcome::error(format!("{kind}: {e}"));
            }
            let files = match csv_files(&out) {
                Ok(f) if !f.is_empty() => f,
                Ok(_) => return Outcome::new(false, format!("{kind} wrote no CSV output")),
                Err(e) => return Outcome::error(e),
            };
            match &reference {
                None => reference = Some(files),
                Some(r) => {
                    compared += files.len();
                    if r != &files {
                        mismatches.push(format!("{kind} ({label})"));
                    }
                }
            }
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!(
            "6 scenarios x 4 schedules, {compared} CSV files compared to the sequential run; differing: {}",
            if mismatches.is_empty() { "none".into() } else { mismatches.join(", ") }
        ),
    )
}

fn main() {
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let mut results = Vec::new();
    results.push(criterion(
        1,
        "dissipation identity",
        Some(Duration::from_secs(5)),
        dissipation_identity,
    ));
    let mut shared = None;
    results.push(criterion(2, "energy monotonicity", minutes(10), || {
        let run = small_data_run();
        let out = energy(&run);
        shared = Some(run);
        out
    }));
    let mut heat = None;
    results.push(criterion(3, "heat decay exponents", minutes(2), || {
        let s = experiment(ExperimentKind::HeatDecay, "{}", &scratch("heat"));
        let out = heat_decay(&s);
        heat = Some(s);
        out
    }));
    let (shared, heat) = (shared.unwrap(), heat.unwrap());
    results.push(criterion(4, "good-unknown structure", None, || {
        good_unknowns(&heat)
    }));
    results.push(criterion(5, "weighted inequality saturation", None, || {
        lemma(&scratch("lemma"))
    }));
    results.push(criterion(6, "analytic-norm monitor", minutes(10), monitor));
    results.push(criterion(7, "mode weight at (1, 1)", None, bessel));
    results.push(criterion(8, "weight-ratio scans", None, || {
        scans(&scratch("scans"))
    }));
    results.push(criterion(9, "smoothing ladder", None, || ladder(&shared)));
    results.push(criterion(10, "determinism", None, || {
        determinism(&scratch("determinism"))
    }));
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
