use smallvec::SmallVec;

use super::jet::{layout, Jet};
use crate::error::{GeomError, Result};
use crate::scalar::{Analytic, Real};
use crate::spaces::{christoffel_at, Connection, MetricModel, ProductPoint, TangentVec};

/// A map from a 1- or 2-dimensional parameter domain into chart coordinates,
/// written once against [`Analytic`] so it can be evaluated on jets.
pub trait AnalyticMap<T: Real> {
    fn params(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn eval<A: Analytic<T>>(&self, x: &[A]) -> Vec<A>;
}

/// Per-coordinate jets of a map at one parameter point.
#[derive(Clone)]
pub struct MapJet<T> {
    comps: Vec<Jet<T>>,
}

impl<T: Real> std::fmt::Debug for MapJet<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(&self.comps).finish()
    }
}

impl<T: Real> MapJet<T> {
    pub fn new(comps: Vec<Jet<T>>) -> Self {
        assert!(!comps.is_empty(), "empty map jet");
        let l = comps[0].layout();
        assert!(
            comps.iter().all(|c| std::ptr::eq(c.layout(), l)),
            "map jet components must share a layout"
        );
        MapJet { comps }
    }

    pub fn components(&self) -> &[Jet<T>] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Jet<T>> {
        self.comps
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn params(&self) -> usize {
        self.comps[0].nvars()
    }

    pub fn order(&self) -> usize {
        self.comps[0].order()
    }

    pub fn value(&self) -> Vec<T> {
        self.comps.iter().map(|c| c.value()).collect()
    }

    pub fn d1(&self, a: usize) -> Vec<T> {
        self.comps.iter().map(|c| c.d1(a)).collect()
    }

    pub fn d2(&self, a: usize, b: usize) -> Vec<T> {
        self.comps.iter().map(|c| c.d2(a, b)).collect()
    }

    pub fn d3(&self, a: usize, b: usize, c: usize) -> Vec<T> {
        let mut e: SmallVec<[u8; 4]> = SmallVec::from_elem(0, self.params());
        e[a] += 1;
        e[b] += 1;
        e[c] += 1;
        self.comps.iter().map(|j| j.derivative(&e)).collect()
    }

    /// `∂_a` of every component, one order lower.
    pub fn partial(&self, a: usize) -> MapJet<T> {
        MapJet {
            comps: self.comps.iter().map(|c| c.partial(a)).collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> MapJet<T> {
        MapJet {
            comps: self.comps.iter().map(|c| c.truncate(order)).collect(),
        }
    }

    pub fn require_order(&self, need: usize) -> Result<()> {
        if self.order() < need {
            return Err(GeomError::InsufficientOrder {
                have: self.order(),
                need,
            });
        }
        Ok(())
    }
}

/// Expands `map` about `params` to the given order (1, 2 or 3).
pub fn jet_eval<T: Real, F: AnalyticMap<T> + ?Sized>(
    map: &F,
    params: &[T],
    order: usize,
) -> Result<MapJet<T>> {
    if !(1..=3).contains(&order) {
        return Err(GeomError::Dimension(format!(
            "jet order must be 1, 2 or 3, got {order}"
        )));
    }
    if params.len() != map.params() {
        return Err(GeomError::Dimension(format!(
            "map takes {} parameters, got {}",
            map.params(),
            params.len()
        )));
    }
    let lay = layout(params.len(), order);
    let vars: Vec<Jet<T>> = params
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet::variable(lay, x, i))
        .collect();
    let comps = map.eval(&vars);
    if comps.len() != map.target_dim() {
        return Err(GeomError::Dimension(format!(
            "map declared {} outputs, produced {}",
            map.target_dim(),
            comps.len()
        )));
    }
    if let Some(k) = comps.iter().position(|c| !Analytic::is_finite(c)) {
        return Err(GeomError::NonAnalytic(format!(
            "component {k} is not finite at {params:?}"
        )));
    }
    Ok(MapJet::new(comps))
}

/// `∇_X V = dV(X) + Γ(df(X), V)` with the connection already evaluated at the
/// base point.
pub fn covariant_derivative_with<T: Real>(
    conn: &Connection<T>,
    base: &MapJet<T>,
    field: &MapJet<T>,
    direction: &[T],
) -> Result<TangentVec<T>> {
    base.require_order(1)?;
    field.require_order(1)?;
    if direction.len() != base.params() || field.params() != base.params() {
        return Err(GeomError::Dimension(format!(
            "direction has {} components for a {}-parameter map",
            direction.len(),
            base.params()
        )));
    }
    let d = base.dim();
    let mut df = vec![T::zero(); d];
    let mut dv = vec![T::zero(); d];
    for (a, &x) in direction.iter().enumerate() {
        for k in 0..d {
            df[k] += x * base.comps[k].d1(a);
            dv[k] += x * field.comps[k].d1(a);
        }
    }
    let corr = conn.apply(&df, &field.value());
    Ok(TangentVec(
        dv.iter().zip(&corr).map(|(a, b)| *a + *b).collect(),
    ))
}

/// Covariant derivative along a map into `M × ℝ` of a vector field given by
/// its component jets.
pub fn covariant_derivative_along<T: Real, M: MetricModel<T>>(
    model: &M,
    base: &MapJet<T>,
    field: &MapJet<T>,
    direction: &[T],
) -> Result<TangentVec<T>> {
    base.require_order(1)?;
    field.require_order(1)?;
    let p = ProductPoint::from_coords(&base.value());
    let conn = christoffel_at(model, &p)?;
    covariant_derivative_with(&conn, base, field, direction)
}
