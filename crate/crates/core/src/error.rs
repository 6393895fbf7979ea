use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: parameters, files, configuration.
    Input,
    /// An iteration or quadrature failed to meet its tolerance.
    Numerical,
    /// The model admits no solution of the requested kind.
    Infeasible,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("volume {v} is outside the admissible domain ({lo}, {hi})")]
    Domain { v: f64, lo: f64, hi: f64 },

    #[error("no volume root at P = {p}, T = {t} within the search grid [{lo}, {hi}]")]
    NoRoot { p: f64, t: f64, lo: f64, hi: f64 },

    #[error("no phase transition at T = {t}: critical temperature is {t_c}")]
    NoTransition { t: f64, t_c: f64 },

    #[error("T = {t} lies within the near-critical cutoff of T_c = {t_c}")]
    NearCritical { t: f64, t_c: f64 },

    #[error("failed to converge: {0}")]
    NonConvergence(String),

    #[error("critical point is degenerate: cubic coefficient {c3} vanishes")]
    DegenerateCriticalPoint { c3: f64 },

    #[error("expected 3 isotherm branches at P = {p}, T = {t}, found {found}")]
    BranchCount { p: f64, t: f64, found: usize },

    #[error("matching constant is complex: fourth-root argument {arg} is negative")]
    ComplexSigma { arg: f64 },

    #[error("co-dominant saddles at X = {x}, Y = {y}: the point lies on the shock line")]
    SaddleTie { x: f64, y: f64 },

    #[error("quadrature tolerance not met: estimated error {err:e} exceeds {tol:e}")]
    Quadrature { err: f64, tol: f64 },

    #[error("degenerate jump: left and right volumes coincide ({v})")]
    DegenerateJump { v: f64 },

    #[error("trajectories do not intersect on the common range [{t_lo}, {t_hi}]")]
    NoIntersection { t_lo: f64, t_hi: f64 },

    #[error("tangential contact at T = {t}: equal speeds, confluence is degenerate")]
    DegenerateConfluence { t: f64 },

    #[error("state evaluation failed at P = {p}, T = {t}: {reason}")]
    StateEvaluation { p: f64, t: f64, reason: String },

    #[error("diffusion coefficient has the wrong sign for marching from P = {p0} to P = {p1}")]
    IllPosedDirection { p0: f64, p1: f64 },

    #[error("numerical instability detected at P = {p} (max |V| = {norm})")]
    Unstable { p: f64, norm: f64 },

    #[error("singular fit system at V = {v}: the two isotherms coincide")]
    SingularSystem { v: f64 },

    #[error("requested value {value} lies outside the fitted window [{lo}, {hi}]")]
    Extrapolation { value: f64, lo: f64, hi: f64 },

    #[error("point outside the asymptotic window: {0}")]
    Window(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidParameter { .. } | Domain { .. } | Io(_) | Json(_) | Parse(_) | Extrapolation { .. } | Window(_) => {
                ErrorClass::Input
            }
            NoRoot { .. } | NonConvergence(_) | Quadrature { .. } | Unstable { .. } | StateEvaluation { .. } => {
                ErrorClass::Numerical
            }
            NoTransition { .. }
            | NearCritical { .. }
            | DegenerateCriticalPoint { .. }
            | BranchCount { .. }
            | ComplexSigma { .. }
            | SaddleTie { .. }
            | DegenerateJump { .. }
            | NoIntersection { .. }
            | DegenerateConfluence { .. }
            | IllPosedDirection { .. }
            | SingularSystem { .. } => ErrorClass::Infeasible,
        }
    }
}
