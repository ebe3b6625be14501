use num_complex::Complex64;
use pmc_core::linalg::{self, Mat};
use pmc_core::spaces::*;
use pmc_core::{Analytic, GeomError, Result};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cp2() -> SpaceFormSpec<f64> {
    SpaceFormSpec::complex_projective(2, 4.0).unwrap()
}

fn ch2() -> SpaceFormSpec<f64> {
    SpaceFormSpec::complex_hyperbolic(2, -4.0).unwrap()
}

fn all_specs() -> Vec<SpaceFormSpec<f64>> {
    vec![
        cp2(),
        ch2(),
        SpaceFormSpec::complex_projective(3, 2.0).unwrap(),
        SpaceFormSpec::flat(2).unwrap(),
        SpaceFormSpec::complex_hyperbolic(1, -1.0).unwrap(),
    ]
}

fn unit(dim: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[k] = 1.0;
    v
}

/// Kähler metric from the Hermitian form
/// `[(1 + ε|z|²)|dz|² − ε|z̄·dz|²]/(1 + ε|z|²)²` scaled by `4/|ρ|`.
fn hermitian_metric(eps: f64, scale: f64, m: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let n = m.len() / 2;
    let z: Vec<Complex64> = (0..n).map(|k| Complex64::new(m[2 * k], m[2 * k + 1])).collect();
    let cx: Vec<Complex64> = (0..n).map(|k| Complex64::new(x[2 * k], x[2 * k + 1])).collect();
    let cy: Vec<Complex64> = (0..n).map(|k| Complex64::new(y[2 * k], y[2 * k + 1])).collect();
    let d = 1.0 + eps * z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let xy: Complex64 = cx.iter().zip(&cy).map(|(a, b)| a * b.conj()).sum();
    let zx: Complex64 = z.iter().zip(&cx).map(|(a, b)| a.conj() * b).sum();
    let zy: Complex64 = z.iter().zip(&cy).map(|(a, b)| a.conj() * b).sum();
    scale * (d * xy - eps * zx * zy.conj()).re / (d * d)
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    use rand::Rng;
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn metric_matches_hermitian_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (spec, eps, scale) in [
        (cp2(), 1.0, 1.0),
        (ch2(), -1.0, 1.0),
        (SpaceFormSpec::complex_projective(3, 2.0).unwrap(), 1.0, 2.0),
        (SpaceFormSpec::complex_hyperbolic(2, -1.0).unwrap(), -1.0, 4.0),
    ] {
        for _ in 0..20 {
            let p = spec.sample_point(&mut rng, 2.0);
            let g = metric_at(&spec, &p).unwrap();
            let dim = spec.ambient_dim();
            for i in 0..dim - 1 {
                for j in 0..dim - 1 {
                    let want = hermitian_metric(eps, scale, &p.m, &unit(dim - 1, i), &unit(dim - 1, j));
                    assert!((g[(i, j)] - want).abs() < 1e-13, "{i}{j}: {} vs {want}", g[(i, j)]);
                }
            }
        }
    }
}

#[test]
fn bergman_metric_is_identity_at_origin() {
    let g = metric_at(&ch2(), &ProductPoint::origin(2)).unwrap();
    assert!(linalg::sub(g.as_slice(), Mat::identity(5).as_slice()).iter().all(|x| x.abs() < 1e-15));
}

#[test]
fn product_direction_is_unit_and_orthogonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for spec in all_specs() {
        let p = spec.sample_point(&mut rng, 2.0);
        let g = metric_at(&spec, &p).unwrap();
        let d = spec.ambient_dim();
        let col = g.mul_vec(&unit(d, d - 1));
        assert_eq!(col, unit(d, d - 1));
    }
}

#[test]
fn chart_domain_is_enforced() {
    let spec = ch2();
    let p = ProductPoint::new(vec![0.95, 0.0, 0.0, 0.0], 0.0);
    assert!(matches!(metric_at(&spec, &p), Err(GeomError::OutsideChart { .. })));
    let bad = ProductPoint::new(vec![0.1, 0.0], 0.0);
    assert!(matches!(metric_at(&spec, &bad), Err(GeomError::Dimension(_))));
}

/// `½ g^{kl}(∂ᵢg_lj + ∂ⱼg_li − ∂_l gᵢⱼ)` from central differences of the metric.
fn christoffel_fd(spec: &SpaceFormSpec<f64>, p: &ProductPoint<f64>) -> Vec<f64> {
    let d = spec.ambient_dim();
    let h = 1e-5;
    let dg: Vec<Mat<f64>> = (0..d)
        .map(|m| {
            let mut a = p.coords();
            let mut b = p.coords();
            a[m] += h;
            b[m] -= h;
            let ga = metric_at(spec, &ProductPoint::from_coords(&a)).unwrap();
            let gb = metric_at(spec, &ProductPoint::from_coords(&b)).unwrap();
            Mat::from_rows(d, d, linalg::scaled(0.5 / h, &linalg::sub(ga.as_slice(), gb.as_slice())))
        })
        .collect();
    let ginv = metric_at(spec, p).unwrap().inverse().unwrap();
    let mut out = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
                out[(k * d + i) * d + j] = 0.5 * acc;
            }
        }
    }
    out
}

#[test]
fn christoffels_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in all_specs() {
        for _ in 0..5 {
            let p = spec.sample_point(&mut rng, 1.5);
            let conn = christoffel_at(&spec, &p).unwrap();
            let fd = christoffel_fd(&spec, &p);
            let d = spec.ambient_dim();
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let a = conn.gamma(k, i, j);
                        let b = fd[(k * d + i) * d + j];
                        assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{k}{i}{j}: {a} vs {b}");
                    }
                }
            }
        }
    }
}

#[test]
fn christoffels_vanish_at_ball_center_and_along_t() {
    let spec = ch2();
    let conn = christoffel_at(&spec, &ProductPoint::origin(2)).unwrap();
    assert!(conn.gamma_slice().iter().all(|x| x.abs() < 1e-15));
    let fd = christoffel_fd(&spec, &ProductPoint::origin(2));
    assert!(fd.iter().all(|x| x.abs() < 1e-9));

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = spec.sample_point(&mut rng, 1.0);
    let conn = christoffel_at(&spec, &p).unwrap();
    for k in 0..5 {
        for i in 0..5 {
            assert_eq!(conn.gamma(k, i, 4), 0.0);
            assert_eq!(conn.gamma(4, i, k), 0.0);
        }
    }
}

#[test]
fn flat_connection_is_zero() {
    let spec = SpaceFormSpec::<f64>::flat(3).unwrap();
    let p = ProductPoint::new(vec![0.3, -1.0, 2.0, 0.5, 0.0, 7.0], 1.0);
    let conn = connection_at(&spec, &p, true).unwrap();
    assert!(conn.gamma_slice().iter().all(|&x| x == 0.0));
}

#[test]
fn curvature_is_antisymmetric_and_matches_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for spec in all_specs() {
        let d = spec.ambient_dim();
        for _ in 0..10 {
            let p = spec.sample_point(&mut rng, 2.0);
            let (u, v, w) = (
                TangentVec(random_vec(&mut rng, d)),
                TangentVec(random_vec(&mut rng, d)),
                TangentVec(random_vec(&mut rng, d)),
            );
            let r = curvature_numeric(&spec, &p, &u, &v, &w).unwrap();
            let s = curvature_numeric(&spec, &p, &v, &u, &w).unwrap();
            assert!(r.add(&s).max_abs() < 1e-10);
            let m = curvature_model(&spec, &p, &u, &v, &w).unwrap();
            assert!(r.sub(&m).max_abs() < 1e-6, "{:e}", r.sub(&m).max_abs());
        }
    }
}

#[test]
fn model_reduces_to_quarter_rho_on_totally_real_planes() {
    let spec = ch2();
    let p = ProductPoint::origin(2);
    // ∂x1 and ∂x2 at the origin: orthonormal, V ⊥ φU, both ⊥ ξ
    let (u, v) = (TangentVec(unit(5, 0)), TangentVec(unit(5, 2)));
    let g = metric_at(&spec, &p).unwrap();
    let r = curvature_model(&spec, &p, &u, &v, &v).unwrap();
    assert!((g.bilinear(&r.0, &u.0) - (-1.0)).abs() < 1e-14);
    let rn = curvature_numeric(&spec, &p, &u, &v, &v).unwrap();
    assert!((g.bilinear(&rn.0, &u.0) - (-1.0)).abs() < 1e-9);
}

#[test]
fn r_u_xi_xi_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for spec in all_specs() {
        let d = spec.ambient_dim();
        let p = spec.sample_point(&mut rng, 2.0);
        let xi = TangentVec(unit(d, d - 1));
        let u = TangentVec(random_vec(&mut rng, d));
        assert!(curvature_model(&spec, &p, &u, &xi, &xi).unwrap().max_abs() < 1e-15);
        assert!(curvature_numeric(&spec, &p, &u, &xi, &xi).unwrap().max_abs() < 1e-9);
    }
}

#[test]
fn structure_tensor_basics() {
    let spec = cp2();
    let p = ProductPoint::new(vec![0.2, 0.1, -0.4, 0.3], 2.0);
    let f = cosymplectic_frame_at(&spec, &p).unwrap();
    assert!(linalg::max_abs(&f.phi_of(&f.xi.0)) == 0.0);
    let u = vec![0.3, -0.2, 0.5, 0.1, 0.7];
    assert_eq!(f.eta_of(&u), 0.7);
    let mut h = u.clone();
    h[4] = 0.0;
    let n = linalg::norm(&f.g, &h);
    let h = linalg::scaled(1.0 / n, &h);
    assert!((linalg::norm(&f.g, &f.phi_of(&h)) - 1.0).abs() < 1e-14);
}

/// A diagonal metric that is not Kähler.
struct Perturbed;

impl MetricModel<f64> for Perturbed {
    fn real_dim(&self) -> usize {
        4
    }

    fn check_domain(&self, _: &[f64]) -> Result<()> {
        Ok(())
    }

    fn metric_block<A: Analytic<f64>>(&self, m: &[A]) -> Vec<A> {
        (0..16)
            .map(|k| match k {
                0 => m[0].square() * 0.1 + 1.0,
                5 => m[0].square() * 0.3 + 1.0,
                10 | 15 => m[0].constant_like(1.0),
                _ => m[0].zero_like(),
            })
            .collect()
    }
}

#[test]
fn parallelism_detects_a_perturbed_metric() {
    let points = vec![ProductPoint::new(vec![0.5, 0.2, -0.1, 0.3], 0.0)];
    let dirs: Vec<TangentVec<f64>> = (0..5).map(|k| TangentVec(unit(5, k))).collect();
    let bad = parallelism_residuals(&Perturbed, &points, &dirs).unwrap();
    assert!(bad.nabla_phi > 1e-3, "{}", bad.nabla_phi);
    assert!(bad.nabla_xi < 1e-15);
    let good = parallelism_residuals(&ch2(), &points, &dirs).unwrap();
    assert!(good.nabla_phi < 1e-9 && good.nabla_xi < 1e-9);
}

#[test]
fn single_precision_metric() {
    let spec = SpaceFormSpec::<f32>::complex_projective(2, 4.0).unwrap();
    let p = ProductPoint::new(vec![0.3f32, 0.1, 0.0, -0.2], 0.0);
    let g = metric_at(&spec, &p).unwrap();
    let g64 = metric_at(&cp2(), &ProductPoint::new(vec![0.3, 0.1, 0.0, -0.2], 0.0)).unwrap();
    for (a, b) in g.as_slice().iter().zip(g64.as_slice()) {
        assert!((*a as f64 - b).abs() < 1e-6);
    }
}

#[test]
fn invalid_specs_are_refused() {
    assert!(SpaceFormSpec::<f64>::complex_projective(2, -1.0).is_err());
    assert!(SpaceFormSpec::<f64>::complex_hyperbolic(2, 1.0).is_err());
    assert!(SpaceFormSpec::<f64>::complex_projective(0, 4.0).is_err());
    assert!(ch2().with_chart_radius(1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phi_sectional_curvature_is_rho(
        seed in 0u64..1000,
        which in 0usize..4,
    ) {
        let spec = all_specs()[which].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = spec.ambient_dim();
        let p = spec.sample_point(&mut rng, 2.0);
        let g = metric_at(&spec, &p).unwrap();
        let mut u = random_vec(&mut rng, d);
        u[d - 1] = 0.0;
        let u = linalg::scaled(1.0 / linalg::norm(&g, &u), &u);
        let pu = apply_phi(&u);
        let r = curvature_numeric(&spec, &p, &TangentVec(u.clone()), &TangentVec(pu.clone()), &TangentVec(pu)).unwrap();
        prop_assert!((g.bilinear(&r.0, &u) - spec.rho()).abs() < 1e-6);
    }

    #[test]
    fn cosymplectic_identities_hold(seed in 0u64..1000, which in 0usize..5) {
        let spec = all_specs()[which].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = spec.ambient_dim();
        let p = spec.sample_point(&mut rng, 2.0);
        let f = cosymplectic_frame_at(&spec, &p).unwrap();
        let (u, v) = (random_vec(&mut rng, d), random_vec(&mut rng, d));
        prop_assert!(f.phi_squared_defect(&u) < 1e-12);
        prop_assert!(f.phi_metric_defect(&u, &v) < 1e-12);
    }
}
