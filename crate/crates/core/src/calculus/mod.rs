//! Forward-mode Taylor jets for exact derivatives of chart-valued maps, with
//! central finite differences kept as an independent oracle.

pub mod fd;
mod jet;
mod mapjet;

pub use jet::{layout, Jet, Layout};
pub use mapjet::{covariant_derivative_along, jet_eval, AnalyticMap, MapJet};
