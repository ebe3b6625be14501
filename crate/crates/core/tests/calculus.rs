use pmc_core::calculus::fd::{central_first, central_second, stencil_first, stencil_second};
use pmc_core::calculus::{covariant_derivative_along, jet_eval, layout, AnalyticMap, Jet};
use pmc_core::linalg;
use pmc_core::spaces::{christoffel_at, ProductPoint, SpaceFormSpec};
use pmc_core::Analytic;
use proptest::prelude::*;

/// `f(x, y) = exp(x)·sin(y) + ln(1 + x²)·sqrt(2 + y)`.
fn f<A: Analytic<f64>>(x: &A, y: &A) -> A {
    x.exp() * y.sin() + (x.square() + 1.0).ln() * (y.clone() + 2.0).sqrt()
}

#[test]
fn jet_derivatives_match_hand_differentiation() {
    let (x0, y0) = (0.3, -0.7);
    let lay = layout(2, 3);
    let x = Jet::variable(lay, x0, 0);
    let y = Jet::variable(lay, y0, 1);
    let j = f(&x, &y);
    let l = (1.0 + x0 * x0).ln();
    let s = (2.0 + y0).sqrt();
    let fx = x0.exp() * y0.sin() + 2.0 * x0 / (1.0 + x0 * x0) * s;
    let fy = x0.exp() * y0.cos() + l * 0.5 / s;
    let fxy = x0.exp() * y0.cos() + 2.0 * x0 / (1.0 + x0 * x0) * 0.5 / s;
    let fyy = -x0.exp() * y0.sin() - l * 0.25 / (s * s * s);
    let fyyy = -x0.exp() * y0.cos() + l * 0.375 / (s * s * s * s * s);
    assert!((j.value() - f(&x0, &y0)).abs() < 1e-15);
    assert!((j.d1(0) - fx).abs() < 1e-14);
    assert!((j.d1(1) - fy).abs() < 1e-14);
    assert!((j.d2(0, 1) - fxy).abs() < 1e-14);
    assert!((j.d2(1, 1) - fyy).abs() < 1e-14);
    assert!((j.derivative(&[0, 3]) - fyyy).abs() < 1e-13);
}

#[test]
fn hyperbolic_and_trig_jets_agree_with_series() {
    let lay = layout(1, 3);
    let x = Jet::variable(lay, 0.0f64, 0);
    let t = x.tan();
    assert_eq!(t.coeffs()[..3], [0.0, 1.0, 0.0]);
    assert!((t.coeffs()[3] - 1.0 / 3.0).abs() < 1e-15);
    let th = x.tanh();
    assert!((th.coeffs()[3] + 1.0 / 3.0).abs() < 1e-15);
    let ch = x.cosh();
    assert!((ch.coeffs()[2] - 0.5).abs() < 1e-15);
}

#[test]
fn compose_matches_builtin_functions() {
    let lay = layout(2, 3);
    let u = Jet::variable(lay, 0.4f64, 0) * Jet::variable(lay, 1.1, 1) + 0.2;
    let v = u.value();
    let composed = u.compose(&[v.sin(), v.cos(), -v.sin(), -v.cos()]);
    for (a, b) in composed.coeffs().iter().zip(u.sin().coeffs()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn division_by_zero_value_is_refused() {
    let lay = layout(1, 2);
    let x = Jet::variable(lay, 0.0f64, 0);
    assert!(x.checked_recip().is_err());
    assert!(Jet::constant(lay, 2.0).checked_div(&x).is_err());
}

struct Torus;

impl AnalyticMap<f64> for Torus {
    fn params(&self) -> usize {
        2
    }

    fn target_dim(&self) -> usize {
        5
    }

    fn eval<A: Analytic<f64>>(&self, x: &[A]) -> Vec<A> {
        let r = x[1].cos() * 0.1 + 0.4;
        vec![
            r.clone() * x[0].cos(),
            r * x[0].sin(),
            x[1].sin() * 0.1,
            x[0].clone() * x[1].clone() * 0.05,
            x[0].clone() + x[1].square(),
        ]
    }
}

#[test]
fn map_jets_match_finite_differences() {
    let p = [0.7, -0.3];
    let mj = jet_eval(&Torus, &p, 3).unwrap();
    let value = |x: &[f64]| Torus.eval(x);
    for a in 0..2 {
        let fd = central_first(value, &p, a, 1e-6);
        assert!(linalg::max_abs(&linalg::sub(&mj.d1(a), &fd)) < 1e-9);
        for b in 0..2 {
            let fd2 = central_second(value, &p, a, b, 1e-4);
            assert!(linalg::max_abs(&linalg::sub(&mj.d2(a, b), &fd2)) < 1e-6);
        }
    }
    let d1u = |x: &[f64]| jet_eval(&Torus, x, 1).unwrap().d1(0);
    let fd3 = central_second(d1u, &p, 1, 1, 1e-4);
    assert!(linalg::max_abs(&linalg::sub(&mj.d3(0, 1, 1), &fd3)) < 1e-6);
}

#[test]
fn jet_order_is_validated() {
    assert!(jet_eval(&Torus, &[0.0, 0.0], 0).is_err());
    assert!(jet_eval(&Torus, &[0.0, 0.0], 4).is_err());
    assert!(jet_eval(&Torus, &[0.0], 2).is_err());
    let j = jet_eval(&Torus, &[0.0, 0.0], 1).unwrap();
    assert!(j.require_order(2).is_err());
}

#[test]
fn covariant_derivative_of_the_velocity_matches_the_coordinate_formula() {
    let spec = SpaceFormSpec::<f64>::complex_projective(2, 4.0).unwrap();
    let p = [0.7, -0.3];
    let base = jet_eval(&Torus, &p, 2).unwrap();
    let vel = base.partial(0);
    let cov = covariant_derivative_along(&spec, &base, &vel, &[0.0, 1.0]).unwrap();
    let conn = christoffel_at(&spec, &ProductPoint::from_coords(&base.value())).unwrap();
    let (fu, fv, fuv) = (base.d1(0), base.d1(1), base.d2(0, 1));
    let d = fu.len();
    for k in 0..d {
        let mut want = fuv[k];
        for i in 0..d {
            for j in 0..d {
                want += conn.gamma(k, i, j) * fv[i] * fu[j];
            }
        }
        assert!((cov.0[k] - want).abs() < 1e-13);
    }
}

fn stencil_error(h: f64) -> (f64, f64) {
    let x = 0.4f64;
    let s = |k: f64| (x + k * h).sin() * (x + k * h).exp();
    let f = [s(-2.0), s(-1.0), s(0.0), s(1.0), s(2.0)];
    let d1 = x.exp() * (x.sin() + x.cos());
    let d2 = 2.0 * x.exp() * x.cos();
    ((stencil_first(f, h) - d1).abs(), (stencil_second(f, h) - d2).abs())
}

#[test]
fn stencils_converge_at_fourth_order() {
    let (a1, a2) = stencil_error(0.04);
    let (b1, b2) = stencil_error(0.02);
    let r1 = (a1 / b1).log2();
    let r2 = (a2 / b2).log2();
    assert!((r1 - 4.0).abs() < 0.3, "first derivative order {r1}");
    assert!((r2 - 4.0).abs() < 0.3, "second derivative order {r2}");
}

#[test]
fn stencils_are_exact_on_quartics() {
    let h = 0.3;
    let q = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + x * x * x - 0.25 * x * x * x * x;
    let f = [q(-2.0 * h), q(-h), q(0.0), q(h), q(2.0 * h)];
    assert!((stencil_first(f, h) + 2.0).abs() < 1e-12);
    assert!((stencil_second(f, h) - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn product_rule_holds(a in -2.0f64..2.0, b in -2.0f64..2.0, x0 in -1.0f64..1.0) {
        let lay = layout(1, 3);
        let x = Jet::variable(lay, x0, 0);
        let u = (x.clone() * a).sin() + 1.5;
        let v = (x.clone() * b).exp();
        let w = u.clone() * v.clone();
        let lhs = w.d1(0);
        let rhs = u.d1(0) * v.value() + u.value() * v.d1(0);
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        let q = w.checked_div(&v).unwrap();
        for (p, r) in q.coeffs().iter().zip(u.coeffs()) {
            prop_assert!((p - r).abs() < 1e-10 * (1.0 + r.abs()));
        }
    }
}
