//! Geometry engine for surfaces with parallel mean curvature vector in the
//! product cosymplectic space forms `M^n(ρ) × ℝ`.
//!
//! The engine is generic over the floating-point type; the aliases below fix
//! it to `f64`, which is what the verification harness runs on.

pub mod calculus;
pub mod curves;
pub mod error;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod qforms;
pub mod rotational;
pub mod scalar;
pub mod spaces;
pub mod surface;

pub use error::{GeomError, Result};
pub use scalar::{Analytic, Real};

pub type Jet64 = calculus::Jet<f64>;
pub type MapJet64 = calculus::MapJet<f64>;
pub type SpaceForm64 = spaces::SpaceFormSpec<f64>;
pub type ProductPoint64 = spaces::ProductPoint<f64>;
pub type TangentVec64 = spaces::TangentVec<f64>;
pub type SurfaceGeometry64 = surface::SurfaceGeometry<f64>;
pub type FrenetState64 = curves::FrenetState<f64>;
pub type QValue64 = qforms::QValue<f64>;
