use crate::calculus::{layout, Jet};
use crate::error::{GeomError, Result};
use crate::linalg::{self, inner_a, Mat};
use crate::scalar::{Analytic, Real};
use crate::spaces::{apply_phi, connection_at, MetricModel, ProductPoint};

use super::Immersion;

/// Smallest admissible eigenvalue of the first fundamental form.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Normal candidates shorter than this after projection are skipped.
const NORMAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstForm<T> {
    pub e: T,
    pub f: T,
    pub g: T,
}

/// Everything the residual functionals need at one parameter point.
///
/// Chart vectors have `2n + 1` components. `frame_coeffs[i]` expresses `eᵢ` in
/// the coordinate basis: `eᵢ = c[i][0]·f_u + c[i][1]·f_v`.
#[derive(Clone, Debug)]
pub struct SurfaceGeometry<T> {
    pub u: T,
    pub v: T,
    pub point: ProductPoint<T>,
    pub metric: Mat<T>,
    pub fu: Vec<T>,
    pub fv: Vec<T>,
    pub first_form: FirstForm<T>,
    /// `sqrt(EG − F²)`, equal to `E` for isothermal parameters.
    pub lambda2: T,
    pub e1: Vec<T>,
    pub e2: Vec<T>,
    pub frame_coeffs: [[T; 2]; 2],
    /// `σ(eᵢ, eⱼ)`.
    pub sigma: [[Vec<T>; 2]; 2],
    /// `σ(∂_a, ∂_b)`.
    pub sigma_param: [[Vec<T>; 2]; 2],
    pub h: Vec<T>,
    pub normal_basis: Vec<Vec<T>>,
}

struct Core<A> {
    form: [A; 3],
    sigma: [Vec<A>; 3],
    h: Vec<A>,
}

fn gamma_apply<T: Real, A: Analytic<T>>(gamma: &[A], x: &[A], y: &[A]) -> Vec<A> {
    let d = x.len();
    (0..d)
        .map(|k| {
            let mut acc = x[0].zero_like();
            for i in 0..d {
                for j in 0..d {
                    acc = acc + gamma[(k * d + i) * d + j].clone() * x[i].clone() * y[j].clone();
                }
            }
            acc
        })
        .collect()
}

fn add_a<T: Real, A: Analytic<T>>(x: &[A], y: &[A]) -> Vec<A> {
    x.iter().zip(y).map(|(a, b)| a.clone() + b.clone()).collect()
}

/// `σ_ab = (f_ab + Γ(f_a, f_b))^⊥` and `H = ½ I^{ab} σ_ab`, written once for
/// plain scalars and for jets in `(u, v)`.
fn core<T: Real, A: Analytic<T>>(g: &[A], gamma: &[A], d1: [&[A]; 2], d2: [&[A]; 3]) -> Core<A> {
    let [fu, fv] = d1;
    let e = inner_a(g, fu, fu);
    let f = inner_a(g, fu, fv);
    let gg = inner_a(g, fv, fv);
    let det = e.clone() * gg.clone() - f.clone() * f.clone();
    let inv = [gg.clone() / det.clone(), -f.clone() / det.clone(), e.clone() / det];
    let normal = |w: Vec<A>| -> Vec<A> {
        let a = inner_a(g, &w, fu);
        let b = inner_a(g, &w, fv);
        let cu = inv[0].clone() * a.clone() + inv[1].clone() * b.clone();
        let cv = inv[1].clone() * a + inv[2].clone() * b;
        w.iter()
            .zip(fu.iter().zip(fv))
            .map(|(wk, (uk, vk))| wk.clone() - cu.clone() * uk.clone() - cv.clone() * vk.clone())
            .collect()
    };
    let pairs = [(fu, fu), (fu, fv), (fv, fv)];
    let sigma: [Vec<A>; 3] = std::array::from_fn(|k| {
        let (x, y) = pairs[k];
        normal(add_a(d2[k], &gamma_apply(gamma, x, y)))
    });
    let h: Vec<A> = (0..fu.len())
        .map(|k| {
            (inv[0].clone() * sigma[0][k].clone()
                + inv[1].clone() * sigma[1][k].clone() * T::lit(2.0)
                + inv[2].clone() * sigma[2][k].clone())
                * T::lit(0.5)
        })
        .collect();
    Core {
        form: [e, f, gg],
        sigma,
        h,
    }
}

fn check_rank<T: Real>(u: T, v: T, e: T, f: T, g: T) -> Result<()> {
    let [(lo, _), _] = linalg::sym2_eigen(e, f, g);
    if !(lo > T::lit(DEGENERACY_TOL)) {
        return Err(GeomError::Degenerate {
            u: u.to_f64().unwrap_or(f64::NAN),
            v: v.to_f64().unwrap_or(f64::NAN),
            sigma_min: lo.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn assemble<T: Real>(
    u: T,
    v: T,
    point: ProductPoint<T>,
    metric: Mat<T>,
    fu: Vec<T>,
    fv: Vec<T>,
    form: [T; 3],
    sigma: [Vec<T>; 3],
    h: Vec<T>,
) -> SurfaceGeometry<T> {
    let [e, f, g] = form;
    let det = e * g - f * f;
    let se = e.sqrt();
    let n2 = (det / e).sqrt();
    let c = [[se.recip(), T::zero()], [-f / (e * n2), n2.recip()]];
    let combine = |ci: [T; 2]| -> Vec<T> {
        fu.iter().zip(&fv).map(|(a, b)| ci[0] * *a + ci[1] * *b).collect()
    };
    let e1 = combine(c[0]);
    let e2 = combine(c[1]);
    let sp = [[&sigma[0], &sigma[1]], [&sigma[1], &sigma[2]]];
    let frame_sigma = |i: usize, j: usize| -> Vec<T> {
        let mut out = vec![T::zero(); fu.len()];
        for a in 0..2 {
            for b in 0..2 {
                linalg::axpy(c[i][a] * c[j][b], sp[a][b], &mut out);
            }
        }
        out
    };
    let s11 = frame_sigma(0, 0);
    let s12 = frame_sigma(0, 1);
    let s22 = frame_sigma(1, 1);

    let mut geom = SurfaceGeometry {
        u,
        v,
        point,
        metric,
        fu: fu.clone(),
        fv: fv.clone(),
        first_form: FirstForm { e, f, g },
        lambda2: det.sqrt(),
        e1,
        e2,
        frame_coeffs: c,
        sigma: [[s11, s12.clone()], [s12, s22]],
        sigma_param: [
            [sigma[0].clone(), sigma[1].clone()],
            [sigma[1].clone(), sigma[2].clone()],
        ],
        h,
        normal_basis: Vec::new(),
    };
    geom.normal_basis = geom.build_normal_basis();
    geom
}

impl<T: Real> SurfaceGeometry<T> {
    pub fn dim(&self) -> usize {
        self.fu.len()
    }

    pub fn inner(&self, x: &[T], y: &[T]) -> T {
        self.metric.bilinear(x, y)
    }

    pub fn norm(&self, x: &[T]) -> T {
        linalg::norm(&self.metric, x)
    }

    pub fn h_norm(&self) -> T {
        self.norm(&self.h)
    }

    /// `[⟨V, e₁⟩, ⟨V, e₂⟩]`.
    pub fn frame_components(&self, x: &[T]) -> [T; 2] {
        [self.inner(x, &self.e1), self.inner(x, &self.e2)]
    }

    pub fn tangential_part(&self, x: &[T]) -> Vec<T> {
        let [a, b] = self.frame_components(x);
        let mut out = linalg::scaled(a, &self.e1);
        linalg::axpy(b, &self.e2, &mut out);
        out
    }

    pub fn normal_part(&self, x: &[T]) -> Vec<T> {
        linalg::sub(x, &self.tangential_part(x))
    }

    /// Chart vector of the tangent vector with coordinate components `c`.
    pub fn param_vector(&self, c: [T; 2]) -> Vec<T> {
        self.fu
            .iter()
            .zip(&self.fv)
            .map(|(a, b)| c[0] * *a + c[1] * *b)
            .collect()
    }

    /// Coordinate components of the tangential part of `x`.
    pub fn param_components(&self, x: &[T]) -> [T; 2] {
        let [a, b] = self.frame_components(x);
        let c = self.frame_coeffs;
        [a * c[0][0] + b * c[1][0], a * c[0][1] + b * c[1][1]]
    }

    /// Matrix of `A_V` in the frame `{e₁, e₂}`: `⟨σ(eᵢ, eⱼ), V⟩`.
    pub fn shape_operator(&self, normal: &[T]) -> Result<[[T; 2]; 2]> {
        let tang = self.norm(&self.tangential_part(normal));
        if tang > T::lit(1e-6) {
            return Err(GeomError::NotNormal {
                tangential: tang.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.inner(&self.sigma[i][j], normal))
        }))
    }

    /// `φ` applied to a chart vector.
    pub fn phi(&self, x: &[T]) -> Vec<T> {
        apply_phi(x)
    }

    fn build_normal_basis(&self) -> Vec<Vec<T>> {
        let d = self.dim();
        let want = d - 2;
        let mut candidates = vec![self.phi(&self.e1), self.phi(&self.e2)];
        if self.h_norm() > T::lit(DEGENERACY_TOL) {
            candidates.push(self.h.clone());
        }
        for k in 0..d {
            let mut axis = vec![T::zero(); d];
            axis[k] = T::one();
            candidates.push(axis);
        }
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(want);
        for cand in candidates {
            if basis.len() == want {
                break;
            }
            let n0 = self.norm(&cand);
            if !(n0 > T::zero()) {
                continue;
            }
            let mut w = self.normal_part(&linalg::scaled(n0.recip(), &cand));
            for b in &basis {
                let c = self.inner(&w, b);
                linalg::axpy(-c, b, &mut w);
            }
            let n = self.norm(&w);
            if n > T::lit(NORMAL_TOL) {
                basis.push(linalg::scaled(n.recip(), &w));
            }
        }
        basis
    }
}

/// Geometry at `(u, v)` from second-order jets.
pub fn geometry_at<T, M, I>(model: &M, imm: &I, u: T, v: T) -> Result<SurfaceGeometry<T>>
where
    T: Real,
    M: MetricModel<T>,
    I: Immersion<T> + ?Sized,
{
    let jet = imm.jet(u, v, 2)?;
    jet.require_order(2)?;
    let x = jet.value();
    let point = ProductPoint::from_coords(&x);
    let conn = connection_at(model, &point, false)?;
    let metric = conn.metric().clone();
    let (fu, fv) = (jet.d1(0), jet.d1(1));
    let form = [
        metric.bilinear(&fu, &fu),
        metric.bilinear(&fu, &fv),
        metric.bilinear(&fv, &fv),
    ];
    check_rank(u, v, form[0], form[1], form[2])?;
    let second = [jet.d2(0, 0), jet.d2(0, 1), jet.d2(1, 1)];
    let c = core::<T, T>(
        metric.as_slice(),
        conn.gamma_slice(),
        [&fu, &fv],
        [&second[0], &second[1], &second[2]],
    );
    Ok(assemble(u, v, point, metric, fu, fv, c.form, c.sigma, c.h))
}

/// Geometry plus the exact first derivatives of `H`.
#[derive(Clone, Debug)]
pub struct MeanCurvatureDerivatives<T> {
    pub geometry: SurfaceGeometry<T>,
    /// `∂_a H` (chart components).
    pub dh: [Vec<T>; 2],
    /// `∇^N_{∂a} H`.
    pub nabla_h: [Vec<T>; 2],
    /// `∇^⊥_{∂a} H`.
    pub nabla_perp_h: [Vec<T>; 2],
}

impl<T: Real> MeanCurvatureDerivatives<T> {
    /// `∇^N_{eᵢ} H`.
    pub fn nabla_h_frame(&self, i: usize) -> Vec<T> {
        let c = self.geometry.frame_coeffs[i];
        linalg::add(
            &linalg::scaled(c[0], &self.nabla_h[0]),
            &linalg::scaled(c[1], &self.nabla_h[1]),
        )
    }

    /// `∇^⊥_{eᵢ} H`.
    pub fn nabla_perp_frame(&self, i: usize) -> Vec<T> {
        let c = self.geometry.frame_coeffs[i];
        linalg::add(
            &linalg::scaled(c[0], &self.nabla_perp_h[0]),
            &linalg::scaled(c[1], &self.nabla_perp_h[1]),
        )
    }

    /// `max |∇^⊥_X H|` over unit tangent `X`.
    pub fn pmc_norm(&self) -> T {
        let g = &self.geometry;
        let n = [self.nabla_perp_frame(0), self.nabla_perp_frame(1)];
        let a = g.inner(&n[0], &n[0]);
        let b = g.inner(&n[0], &n[1]);
        let d = g.inner(&n[1], &n[1]);
        let [_, (hi, _)] = linalg::sym2_eigen(a, b, d);
        hi.max(T::zero()).sqrt()
    }

    /// `max |⟨A_H eᵢ, eⱼ⟩ − ⟨σ(eᵢ, eⱼ), H⟩|` with `A_H X = −(∇^N_X H)^⊤`.
    pub fn weingarten_defect(&self) -> T {
        let g = &self.geometry;
        let mut worst = T::zero();
        for i in 0..2 {
            let dn = self.nabla_h_frame(i);
            let t = g.frame_components(&dn);
            for (j, tj) in t.iter().enumerate() {
                let rhs = g.inner(&g.sigma[i][j], &g.h);
                worst = worst.max((-*tj - rhs).abs());
            }
        }
        worst
    }
}

/// Geometry at `(u, v)` with `H` expanded to first order in `(u, v)`; needs
/// third-order immersion jets and the first derivatives of `Γ`.
pub fn geometry_with_derivatives<T, M, I>(
    model: &M,
    imm: &I,
    u: T,
    v: T,
) -> Result<MeanCurvatureDerivatives<T>>
where
    T: Real,
    M: MetricModel<T>,
    I: Immersion<T> + ?Sized,
{
    let jet = imm.jet(u, v, 3)?;
    jet.require_order(3)?;
    let x = jet.value();
    let point = ProductPoint::from_coords(&x);
    let conn = connection_at(model, &point, true)?;
    let metric = conn.metric().clone();
    let d = x.len();
    let fu_val = jet.d1(0);
    let fv_val = jet.d1(1);
    check_rank(
        u,
        v,
        metric.bilinear(&fu_val, &fu_val),
        metric.bilinear(&fu_val, &fv_val),
        metric.bilinear(&fv_val, &fv_val),
    )?;

    let lay = layout(2, 1);
    let lift = |value: T, grad: [T; 2]| Jet::from_coeffs(lay, &[value, grad[0], grad[1]]);
    let chain = |m_deriv: &dyn Fn(usize) -> T| -> [T; 2] {
        let mut out = [T::zero(); 2];
        for m in 0..d {
            let dm = m_deriv(m);
            if dm != T::zero() {
                out[0] += dm * fu_val[m];
                out[1] += dm * fv_val[m];
            }
        }
        out
    };
    let mut g_jet = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let grad = chain(&|m| conn.metric_derivative(m, i, j));
            g_jet.push(lift(metric[(i, j)], grad));
        }
    }
    let mut gamma_jet = Vec::with_capacity(d * d * d);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let grad = chain(&|m| conn.dgamma(m, k, i, j));
                gamma_jet.push(lift(conn.gamma(k, i, j), grad));
            }
        }
    }
    let du = jet.partial(0);
    let dv = jet.partial(1);
    let fu: Vec<Jet<T>> = du.truncate(1).into_components();
    let fv: Vec<Jet<T>> = dv.truncate(1).into_components();
    let fuu = du.partial(0).into_components();
    let fuv = du.partial(1).into_components();
    let fvv = dv.partial(1).into_components();
    let c = core::<T, Jet<T>>(&g_jet, &gamma_jet, [&fu, &fv], [&fuu, &fuv, &fvv]);

    let vals = |xs: &[Jet<T>]| xs.iter().map(|j| j.value()).collect::<Vec<T>>();
    let h = vals(&c.h);
    let form = [c.form[0].value(), c.form[1].value(), c.form[2].value()];
    let sigma = [vals(&c.sigma[0]), vals(&c.sigma[1]), vals(&c.sigma[2])];
    let geometry = assemble(u, v, point, metric, fu_val.clone(), fv_val.clone(), form, sigma, h);

    let dh: [Vec<T>; 2] = std::array::from_fn(|a| c.h.iter().map(|j| j.d1(a)).collect());
    let fa = [&fu_val, &fv_val];
    let nabla_h: [Vec<T>; 2] =
        std::array::from_fn(|a| linalg::add(&dh[a], &conn.apply(fa[a], &geometry.h)));
    let nabla_perp_h: [Vec<T>; 2] = std::array::from_fn(|a| geometry.normal_part(&nabla_h[a]));
    Ok(MeanCurvatureDerivatives {
        geometry,
        dh,
        nabla_h,
        nabla_perp_h,
    })
}
