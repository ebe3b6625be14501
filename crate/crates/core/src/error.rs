use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("point outside chart domain: |z| = {radius:.6} exceeds {limit:.6}")]
    OutsideChart { radius: f64, limit: f64 },

    #[error("invalid space form: {0}")]
    InvalidSpace(String),

    #[error("non-analytic point: {0}")]
    NonAnalytic(String),

    #[error("jet order {have} is insufficient, need {need}")]
    InsufficientOrder { have: usize, need: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate immersion at ({u:.6}, {v:.6}): smallest singular value {sigma_min:.3e}")]
    Degenerate { u: f64, v: f64, sigma_min: f64 },

    #[error("vector is not normal: tangential part {tangential:.3e}")]
    NotNormal { tangential: f64 },

    #[error(
        "parametrization is not isothermal at ({u:.6}, {v:.6}): |E-G|+|F| = {defect:.3e}; \
         use one of the built-in isothermal families"
    )]
    NotIsothermal { u: f64, v: f64, defect: f64 },

    #[error("minimal point: |H| = {0:.3e}")]
    MinimalPoint(f64),

    #[error("complex torsion {0} outside [-1, 1]")]
    TorsionOutOfRange(f64),

    #[error("{steps} steps over length {length} is below 100 per unit length")]
    TooFewSteps { steps: usize, length: f64 },

    #[error("grid too coarse: {interior} interior points per axis, need at least 16")]
    GridTooCoarse { interior: usize },

    #[error("no cylinder with vanishing Q exists for rho = {0} (requires rho < 0)")]
    NoVanishingCylinder(f64),

    #[error("no sphere: {0}")]
    NoSphere(String),

    #[error("shooting did not converge after {iterations} iterations (defect {defect:.3e})")]
    NoConvergence { iterations: usize, defect: f64 },

    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
