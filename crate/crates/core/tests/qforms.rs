use pmc_core::curves::{classify_cylinder, cylinder_over, CurvatureProfile, Cylinder, CylinderOptions};
use pmc_core::grid::{Grid, ParamRect};
use pmc_core::qforms::*;
use pmc_core::spaces::SpaceFormSpec;
use pmc_core::surface::families::{holomorphic_plane, real_plane};
use pmc_core::surface::{Immersion, Rescaled};
use pmc_core::GeomError;
use proptest::prelude::*;

fn opts() -> CylinderOptions<f64> {
    CylinderOptions {
        length: 1.0,
        height: (-0.5, 0.5),
        ..CylinderOptions::default()
    }
}

fn circle(spec: &SpaceFormSpec<f64>, kappa: f64, tau: f64) -> Cylinder<f64> {
    cylinder_over(spec, CurvatureProfile::Constant(kappa), tau, &opts()).unwrap()
}

fn spec(rho: f64) -> SpaceFormSpec<f64> {
    match rho {
        r if r > 0.0 => SpaceFormSpec::complex_projective(2, r).unwrap(),
        r if r < 0.0 => SpaceFormSpec::complex_hyperbolic(2, r).unwrap(),
        _ => SpaceFormSpec::flat(2).unwrap(),
    }
}

/// `Q(Z,Z)` and `Q′(Z,Z)` of a vertical cylinder over a circle, expanded by
/// hand on the frame `{E₁, ξ}` with `σ(E₁,E₁) = κE₂`, `η(Z) = −i/√2`,
/// `⟨φZ, H⟩ = ±κτ/(2√2)`.
fn cylinder_q(kappa: f64, tau: f64, rho: f64) -> (f64, f64) {
    let k2 = kappa * kappa;
    (k2 / 8.0 * (4.0 * k2 + rho * (1.0 + 3.0 * tau * tau)), 2.0 * k2 + rho / 2.0)
}

#[test]
fn isothermal_frame_identities() {
    let s = spec(-4.0);
    let cyl = circle(&s, 1.0, 0.3);
    let g = pmc_core::surface::geometry_at(&s, &cyl, 0.5, 0.1).unwrap();
    let f = IsothermalFrame::from_geometry(&g).unwrap();
    assert!((f.lambda2 - 1.0).abs() < 1e-10);
    assert!(f.z_z(&g).norm() < 1e-10);
    assert!((f.z_zbar(&g).re - f.lambda2).abs() < 1e-14);
}

#[test]
fn non_isothermal_parameters_are_refused() {
    let s = spec(4.0);
    let plane = real_plane(2, 0.5, 0.0, ParamRect::new(-0.5, 0.5, -0.5, 0.5)).unwrap();
    assert!(matches!(
        q_value(&s, &plane, 0.4, 0.3),
        Err(GeomError::NotIsothermal { .. })
    ));
}

#[test]
fn cylinder_q_matches_the_hand_expansion() {
    for (rho, kappa, tau) in [
        (-4.0, 1.0, 0.0),
        (-4.0, 0.6, 0.5),
        (-2.0, 1.3, -0.8),
        (4.0, 0.9, 0.4),
        (2.0, 1.5, 1.0),
        (0.0, 1.0, 0.7),
    ] {
        let s = spec(rho);
        let cyl = circle(&s, kappa, tau);
        let (q, qp) = cylinder_q(kappa, tau, rho);
        for (u, v) in [(0.2, 0.0), (0.8, -0.4)] {
            let val = q_value(&s, &cyl, u, v).unwrap();
            assert!((val.q.re - q).abs() < 1e-8 && val.q.im.abs() < 1e-8, "{rho} {kappa} {tau}: {} vs {q}", val.q);
            assert!((val.qprime.re - qp).abs() < 1e-8 && val.qprime.im.abs() < 1e-8);
        }
    }
}

#[test]
fn q_and_qprime_relation_when_phi_h_is_normal() {
    // τ = 0 puts φH in the normal bundle, so Q = |H|²·Q′
    let s = spec(-4.0);
    let cyl = circle(&s, 0.7, 0.0);
    let v = q_value(&s, &cyl, 0.3, 0.2).unwrap();
    let h2 = v.h_norm * v.h_norm;
    assert!((v.q - v.qprime * h2).norm() < 1e-8);
}

#[test]
fn minimal_slice_has_zero_q() {
    let s = spec(-4.0);
    let line = holomorphic_plane(2, [0.1, 0.2], 0.3, 0.5, ParamRect::new(-0.5, 0.5, -0.5, 0.5)).unwrap();
    let v = q_value(&s, &line, 0.2, -0.3).unwrap();
    assert!(v.q.norm() < 1e-12);
    // Q′ = −ρ·η(Z)² vanishes too since η(Z) = 0
    assert!(v.qprime.norm() < 1e-12);
}

#[test]
fn pmc_cylinders_have_holomorphic_q() {
    for (rho, kappa, tau) in [(-4.0, 1.0, 0.0), (-4.0, 0.8, 0.5), (4.0, 1.2, 0.3), (0.0, 1.0, 1.0)] {
        let s = spec(rho);
        let cyl = circle(&s, kappa, tau);
        let grid = Grid::square(cyl.rect(), 24);
        let q = dbar_residual(&s, &cyl, &grid, Which::Q).unwrap();
        let qp = dbar_residual(&s, &cyl, &grid, Which::QPrime).unwrap();
        assert!(q.normalized.value < 1e-6, "{}", q.normalized.value);
        assert!(qp.normalized.value < 1e-6);
    }
}

#[test]
fn sine_cylinder_dbar_matches_the_closed_form() {
    let rho = -4.0;
    let s = spec(rho);
    let amp = 0.1;
    let prof = CurvatureProfile::Sine {
        mean: 1.0,
        amplitude: amp,
        frequency: 1.0,
    };
    let cyl = cylinder_over(&s, prof, 0.0, &opts()).unwrap();
    let grid = Grid::square(cyl.rect(), 48);
    let qg = QGrid::compute(&s, &cyl, &grid).unwrap();
    // Q = κ⁴/2 + ρκ²/8 depends on u = s only, so |ẐQ| = |dQ/ds|/√2
    let mut max_oracle: f64 = 0.0;
    for ((i, j), z) in qg.dbar_field(Which::Q).unwrap() {
        let u = grid.u(i);
        let k = 1.0 + amp * u.sin();
        let dk = amp * u.cos();
        let want = (2.0 * k * k * k + rho * k / 4.0) * dk / 2f64.sqrt();
        assert!((z.re - want).abs() < 1e-6 && z.im.abs() < 1e-6, "({i},{j}) {z} vs {want}");
        max_oracle = max_oracle.max(want.abs());
    }
    let d = qg.dbar(Which::Q).unwrap();
    assert!(d.raw.value > 1e-3);
    assert!((d.raw.value - max_oracle).abs() < 1e-6);
}

#[test]
fn vanishing_locus_follows_the_predicate() {
    let s = spec(-4.0);
    let mut o = opts();
    o.grid = 8;
    for tau in [0.0, 0.5] {
        for k in 0..11 {
            let kappa = 0.5 + 0.15 * k as f64;
            let c = classify_cylinder(&s, kappa, tau, &o).unwrap();
            let (q, _) = cylinder_q(kappa, tau, -4.0);
            assert!((c.q_max.value - q.abs()).abs() < 1e-8);
            assert_eq!(c.q_vanishes, c.predicate_vanishes);
        }
    }
    let at_root = classify_cylinder(&s, 1.0, 0.0, &o).unwrap();
    assert!(at_root.q_vanishes && at_root.predicate_vanishes);
}

#[test]
fn q_has_conformal_weight_two() {
    let s = spec(-4.0);
    let cyl = circle(&s, 0.9, 0.4);
    let a = 1.7;
    let scaled = Rescaled { inner: &cyl, a };
    for (u, v) in [(0.3, 0.1), (0.5, -0.2)] {
        let base = q_value(&s, &cyl, u, v).unwrap();
        let sc = q_value(&s, &scaled, u / a, v / a).unwrap();
        assert!((sc.q - base.q * (a * a)).norm() < 1e-8 * base.q.norm().max(1.0));
        assert!((sc.lambda2 - base.lambda2 * a * a).abs() < 1e-10);
    }
}

#[test]
fn qgrid_csv_has_blank_margins() {
    let s = spec(-4.0);
    let cyl = circle(&s, 1.0, 0.0);
    let grid = Grid::square(cyl.rect(), 24);
    let csv = QGrid::compute(&s, &cyl, &grid).unwrap().to_csv().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "u,v,re_q,im_q,re_qprime,im_qprime,abs_dbar_q,abs_dbar_qprime");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 576);
    assert!(rows[0].ends_with(",,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn q_depends_on_tau_squared(kappa in 0.3f64..1.8, tau in 0.0f64..1.0) {
        let s = spec(-4.0);
        let plus = q_value(&s, &circle(&s, kappa, tau), 0.4, 0.0).unwrap();
        let minus = q_value(&s, &circle(&s, kappa, -tau), 0.4, 0.0).unwrap();
        prop_assert!((plus.q - minus.q).norm() < 1e-8);
        prop_assert!((plus.qprime - minus.qprime).norm() < 1e-8);
    }
}
