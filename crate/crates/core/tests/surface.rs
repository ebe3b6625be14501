use pmc_core::curves::{cylinder_over, Cylinder, CurvatureProfile, CylinderOptions};
use pmc_core::grid::{Grid, ParamRect};
use pmc_core::linalg;
use pmc_core::spaces::SpaceFormSpec;
use pmc_core::surface::families::{analytic_patch, holomorphic_plane, real_plane};
use pmc_core::surface::*;
use proptest::prelude::*;

fn ch2() -> SpaceFormSpec<f64> {
    SpaceFormSpec::complex_hyperbolic(2, -4.0).unwrap()
}

fn short() -> CylinderOptions<f64> {
    CylinderOptions {
        length: 1.0,
        height: (-0.5, 0.5),
        ..CylinderOptions::default()
    }
}

fn circle_cylinder(spec: &SpaceFormSpec<f64>, kappa: f64, tau: f64) -> Cylinder<f64> {
    cylinder_over(spec, CurvatureProfile::Constant(kappa), tau, &short()).unwrap()
}

fn square() -> ParamRect<f64> {
    ParamRect::new(-0.5, 0.5, -0.5, 0.5)
}

#[test]
fn second_fundamental_form_is_symmetric_and_normal() {
    let spec = SpaceFormSpec::complex_projective(2, 4.0).unwrap();
    let patch = analytic_patch(2, 0.5, 0.2, square()).unwrap();
    for (u, v) in [(0.1, -0.2), (-0.4, 0.3), (0.0, 0.0)] {
        let g = geometry_at(&spec, &patch, u, v).unwrap();
        let s = &g.sigma;
        assert!(linalg::max_abs(&linalg::sub(&s[0][1], &s[1][0])) < 1e-9);
        for row in s {
            for x in row {
                assert!(g.inner(x, &g.e1).abs() < 1e-9 && g.inner(x, &g.e2).abs() < 1e-9);
            }
        }
        let h = linalg::scaled(0.5, &linalg::add(&s[0][0], &s[1][1]));
        assert!(linalg::max_abs(&linalg::sub(&h, &g.h)) < 1e-15);
        assert!(g.inner(&g.e1, &g.e2).abs() < 1e-12);
        assert!((g.norm(&g.e1) - 1.0).abs() < 1e-12 && (g.norm(&g.e2) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn circle_cylinder_geometry() {
    let spec = ch2();
    for (kappa, tau) in [(1.0, 0.0), (0.7, 0.5), (2.0, 1.0)] {
        let cyl = circle_cylinder(&spec, kappa, tau);
        for s in [0.1, 0.5, 0.9] {
            let g = geometry_at(&spec, &cyl, s, 0.2).unwrap();
            let ff = g.first_form;
            assert!((ff.e - 1.0).abs() < 1e-10 && (ff.g - 1.0).abs() < 1e-15 && ff.f.abs() < 1e-12);
            assert!((g.h_norm() - kappa / 2.0).abs() < 1e-8);
            // H = ½κE₂ lifted
            let e2 = &cyl.curve.state_at(s).unwrap().frame[1];
            let mut lifted = e2.clone();
            lifted.push(0.0);
            let cos = g.inner(&g.h, &lifted) / g.h_norm();
            assert!((cos - 1.0).abs() < 1e-12, "angle cos {cos}");
        }
    }
}

#[test]
fn shape_operator_on_a_xi_tangent_cylinder() {
    // ρ = −16|H|² with κ = 1
    let spec = ch2();
    let cyl = circle_cylinder(&spec, 1.0, 0.0);
    let g = geometry_at(&spec, &cyl, 0.4, 0.0).unwrap();
    let h2 = g.inner(&g.h, &g.h);
    let a = g.shape_operator(&g.h).unwrap();
    assert!((a[0][0] - 2.0 * h2).abs() < 1e-10);
    assert!(a[0][1].abs() < 1e-10 && a[1][1].abs() < 1e-10);
    assert!((a[0][0] + a[1][1] - 2.0 * h2).abs() < 1e-10);
    let b = g.shape_operator(&linalg::scaled(-3.0, &g.h)).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((b[i][j] + 3.0 * a[i][j]).abs() < 1e-12);
        }
    }
    let grid = Grid::square(cyl.rect(), 16);
    let pu = pseudo_umbilical_residual(&spec, &cyl, &grid).unwrap();
    assert!((pu.value - 0.25 * 2f64.sqrt()).abs() < 1e-9, "{}", pu.value);
}

#[test]
fn weingarten_duality_on_a_generic_patch() {
    for spec in [ch2(), SpaceFormSpec::complex_projective(3, 2.0).unwrap()] {
        let patch = analytic_patch(spec.n(), 0.5, 0.15, square()).unwrap();
        let grid = Grid::square(patch.rect, 9);
        assert!(weingarten_residual(&spec, &patch, &grid).unwrap().value < 1e-8);
        // a generic patch is not pmc
        assert!(pmc_residual(&spec, &patch, &grid).unwrap().value > 1e-3);
    }
}

#[test]
fn totally_geodesic_slices() {
    let spec = SpaceFormSpec::complex_projective(2, 4.0).unwrap();
    let plane = real_plane(2, 0.5, 0.0, square()).unwrap();
    let grid = Grid::square(plane.rect, 9);
    let g = geometry_at(&spec, &plane, 0.3, -0.1).unwrap();
    for row in &g.sigma {
        for x in row {
            assert!(linalg::max_abs(x) < 1e-12);
        }
    }
    assert!(pmc_residual(&spec, &plane, &grid).unwrap().value < 1e-9);
    assert!(anti_invariance_residual(&spec, &plane, &grid).unwrap().value < 1e-9);
    assert!(pseudo_umbilical_residual(&spec, &plane, &grid).unwrap().value < 1e-12);

    let line = holomorphic_plane(2, [0.1, 0.0], 0.5, 0.0, square()).unwrap();
    let anti = anti_invariance_residual(&spec, &line, &grid).unwrap().value;
    assert!((anti - 1.0).abs() < 1e-12);
}

#[test]
fn complex_line_has_curvature_rho() {
    // a complex line through the origin is a totally geodesic ℂP¹ of
    // holomorphic curvature ρ
    for (spec, rho) in [
        (SpaceFormSpec::complex_projective(2, 4.0).unwrap(), 4.0),
        (SpaceFormSpec::complex_hyperbolic(2, -2.0).unwrap(), -2.0),
    ] {
        let line = holomorphic_plane(2, [0.0, 0.0], 0.4, 0.0, square()).unwrap();
        let g = geometry_at(&spec, &line, 0.2, 0.1).unwrap();
        assert!((gauss_curvature(&spec, &g).unwrap() - rho).abs() < 1e-8);
        let grid = Grid::square(line.rect, 33);
        for (_, k) in gauss_curvature_isothermal_grid(&spec, &line, &grid).unwrap() {
            assert!((k - rho).abs() < 1e-5, "{k}");
        }
    }
}

#[test]
fn cylinders_are_flat() {
    let spec = ch2();
    let cyl = circle_cylinder(&spec, 0.8, 0.3);
    let grid = Grid::square(cyl.rect(), 33);
    for (_, k) in gauss_curvature_isothermal_grid(&spec, &cyl, &grid).unwrap() {
        assert!(k.abs() < 1e-6);
    }
    let g = geometry_at(&spec, &cyl, 0.5, 0.0).unwrap();
    assert!(gauss_curvature(&spec, &g).unwrap().abs() < 1e-6);
}

#[test]
fn pmc_residuals_of_cylinders() {
    let spec = ch2();
    let cyl = circle_cylinder(&spec, 1.0, 0.4);
    let grid = Grid::square(cyl.rect(), 16);
    assert!(pmc_residual(&spec, &cyl, &grid).unwrap().value < 1e-6);

    // ∇^⊥_{e₁}H picks up ½κ′E₂, so the residual is ½·max|κ′| for the sine family
    let amp = 0.1;
    let sine = CurvatureProfile::Sine {
        mean: 1.0,
        amplitude: amp,
        frequency: 1.0,
    };
    let bad = cylinder_over(&spec, sine, 0.0, &short()).unwrap();
    let r = pmc_residual(&spec, &bad, &Grid::square(bad.rect(), 16)).unwrap().value;
    assert!(r > amp / 3.0);
    assert!((r - 0.5 * amp).abs() < 1e-8, "{r}");
}

#[test]
fn trace_of_a_h_on_pmc_cylinders() {
    let spec = SpaceFormSpec::complex_projective(2, 4.0).unwrap();
    let cyl = circle_cylinder(&spec, 1.3, 0.6);
    let grid = Grid::square(cyl.rect(), 8);
    for k in 0..grid.len() {
        let (u, v) = grid.point(k);
        let g = geometry_at(&spec, &cyl, u, v).unwrap();
        let a = g.shape_operator(&g.h).unwrap();
        assert!((a[0][0] + a[1][1] - 2.0 * g.inner(&g.h, &g.h)).abs() < 1e-8);
    }
}

#[test]
fn angle_decomposition_of_a_cylinder() {
    let spec = ch2();
    let cyl = circle_cylinder(&spec, 1.0, 0.0);
    let a = angle_decomposition(&spec, &cyl, 0.5, 0.1).unwrap();
    assert!((a.mu.unwrap() - 1.0).abs() < 1e-12);
    assert!(a.nu.abs() < 1e-12);
    assert!((a.h_norm - 0.5).abs() < 1e-8);
    // e₂ = ξ
    assert!((a.e2[4] - 1.0).abs() < 1e-12);
}

#[test]
fn angle_decomposition_needs_nonzero_h() {
    let spec = ch2();
    let line = holomorphic_plane(2, [0.0, 0.0], 0.4, 0.3, square()).unwrap();
    assert!(matches!(
        angle_decomposition(&spec, &line, 0.1, 0.1),
        Err(pmc_core::GeomError::MinimalPoint(_))
    ));
}

#[test]
fn pmc_residual_is_shift_invariant() {
    let spec = ch2();
    let cyl = circle_cylinder(&spec, 0.9, 0.2);
    let shifted = Shifted {
        inner: &cyl,
        du: 0.25,
        dv: 0.5,
    };
    let a = pmc_residual(&spec, &cyl, &Grid::square(cyl.rect(), 12)).unwrap();
    let b = pmc_residual(&spec, &shifted, &Grid::square(shifted.rect(), 12)).unwrap();
    assert!((a.value - b.value).abs() < 1e-15);
}

#[test]
fn out_of_chart_points_are_errors() {
    let spec = ch2();
    let big = holomorphic_plane(2, [0.0, 0.0], 2.0, 0.0, square()).unwrap();
    assert!(geometry_at(&spec, &big, 0.5, 0.5).is_err());
    let grid = Grid::square(big.rect, 5);
    assert!(pmc_residual(&spec, &big, &grid).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weingarten_holds_at_random_points(u in -0.5f64..0.5, v in -0.5f64..0.5, amp in 0.0f64..0.3) {
        let spec = SpaceFormSpec::complex_projective(2, 4.0).unwrap();
        let patch = analytic_patch(2, 0.5, amp, square()).unwrap();
        let d = geometry_with_derivatives(&spec, &patch, u, v).unwrap();
        prop_assert!(d.weingarten_defect() < 1e-8);
    }
}
