use shercliff::exec::Execution;
use shercliff::field::SpectralField;
use shercliff::grid::{make_grid, GridConfig, HalfStripGrid};
use shercliff::implicit::LinearTerms;
use shercliff::io::config::ladder_initial;
use shercliff::shercliff::multiplicity;
use shercliff::solver2d::{make_initial_data, State2D, Stepper2D};
use shercliff::solver3d::{
    make_initial_3d, run_scenario3d, Initial3D, Scenario3D, ShearCertificate, ShearPair,
    ShearTerms, State3D, Stepper3D,
};
use std::f64::consts::PI;
use std::sync::Arc;

fn grid3(nx: usize, ny: usize, nz: usize) -> Arc<HalfStripGrid> {
    Arc::new(make_grid(&GridConfig::new_3d(2.0 * PI, nx, 2.0 * PI, ny, 20.0, nz)).unwrap())
}

fn l2_sq(u: &SpectralField) -> f64 {
    let w = u.grid().vertical.weights().to_vec();
    let mut s = 0.0;
    for kx in 0..u.nkx() {
        for ky in 0..u.nky() {
            let m: f64 = u
                .mode(kx, ky)
                .iter()
                .zip(&w)
                .map(|(a, w)| a.norm_sqr() * w)
                .sum();
            s += multiplicity(kx) * m;
        }
    }
    s
}

#[test]
fn y_independent_data_without_shear_reproduces_2d_linear_run() {
    let g2 = Arc::new(make_grid(&GridConfig::new_2d(2.0 * PI, 16, 20.0, 65, 0.0)).unwrap());
    let g3 = grid3(16, 8, 65);
    let mut init = ladder_initial();
    init.modes = shercliff::solver2d::ModeContent::Band {
        k_min: 1,
        k_max: 5,
        sigma: 0.5,
    };
    let u2 = make_initial_data(&init, &g2, 4).unwrap();
    let mut u3 = SpectralField::zeros(&g3);
    for kx in 0..u2.nkx() {
        u3.mode_mut(kx, 0).copy_from_slice(u2.mode(kx, 0));
    }
    let dt = 1e-2;
    let steps = 50;
    let s2 = Stepper2D::new(&g2, dt, LinearTerms::default(), false).unwrap();
    let s3 = Stepper3D::new(&g3, dt, LinearTerms::default(), ShearTerms::default()).unwrap();
    let shear = ShearPair::zero(&g3.vertical, dt, steps);
    let mut a = State2D::initial(u2, dt);
    let mut b = State3D::initial(u3, SpectralField::zeros(&g3), dt, 1.0);
    for _ in 0..steps {
        a = s2.step(&a).unwrap();
        b = s3.step(&b, &shear).unwrap();
    }
    let scale = a.u.max_abs();
    assert!(scale > 1e-4);
    for kx in 0..a.u.nkx() {
        for (p, q) in a.u.mode(kx, 0).iter().zip(b.u.mode(kx, 0)) {
            assert!((p - q).norm() <= 1e-10 * scale);
        }
        for ky in 1..b.u.nky() {
            assert_eq!(b.u.mode(kx, ky).iter().map(|c| c.norm()).sum::<f64>(), 0.0);
        }
    }
    assert_eq!(b.v.max_abs(), 0.0);
}

fn transport_drift(dt: f64) -> f64 {
    let g = grid3(8, 8, 65);
    let t_final = 2.0;
    let steps = (t_final / dt).round() as usize;
    let z = g.vertical.nodes();
    let su: Vec<f64> = z.iter().map(|z| 0.5 * z * (-0.5 * z * z).exp()).collect();
    let sv: Vec<f64> = z.iter().map(|z| 0.3 * z * (-z).exp()).collect();
    let cert = ShearCertificate {
        c1: 0.0,
        slope: None,
    };
    let shear = ShearPair {
        eps1: 1.0,
        dt,
        u: vec![su; steps + 1],
        v: vec![sv; steps + 1],
        certificate_u: cert,
        certificate_v: cert,
    };
    let (u, v) = make_initial_3d(&Initial3D::default(), &g, 1.0, 2).unwrap();
    let off = LinearTerms {
        diffusion: false,
        shercliff: false,
    };
    let transport = ShearTerms {
        advection: true,
        coupling: false,
    };
    let stepper = Stepper3D::new(&g, dt, off, transport).unwrap();
    let mut s = State3D::initial(u, v, dt, 1.0);
    let e0 = l2_sq(&s.u) + l2_sq(&s.v);
    for _ in 0..steps {
        s = stepper.step(&s, &shear).unwrap();
    }
    ((l2_sq(&s.u) + l2_sq(&s.v)) / e0 - 1.0).abs()
}

#[test]
fn pure_shear_transport_conserves_l2_to_second_order() {
    let d: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| transport_drift(dt))
        .collect();
    assert!(d[2] < 1e-4, "{d:?}");
    for w in d.windows(2) {
        assert!(w[0] / w[1] > 3.5, "{d:?}");
    }
}

#[test]
fn unsheared_analytic_norm_strictly_decreases() {
    let sc = Scenario3D {
        eps1: 0.0,
        t_final: 1.0,
        output_every: 25,
        ..Default::default()
    };
    let run = run_scenario3d(&sc, Execution::default()).unwrap();
    let x = run.report.column("x_norm_sq").unwrap();
    assert!(x.len() > 10);
    assert!(x.windows(2).all(|w| w[1] < w[0]), "{x:?}");
    assert!(run.audit.pass);
}
