use thiserror::Error;

/// Errors raised by the geometric and spectral layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("chart singularity: 1 + kappa*|x|^2 vanishes at the requested point")]
    ChartSingularity,
    #[error("point lies on the half-plane boundary x2 = 0")]
    Boundary,
    #[error("projection leaves the chart (point at infinity)")]
    AtInfinity,
    #[error("curve is not regular at s = {s}: (X', X') = {metric:e}")]
    NotRegular { s: f64, metric: f64 },
    #[error("curve fails the closure test: position gap {pos_gap:e}, velocity gap {vel_gap:e}")]
    NotClosed { pos_gap: f64, vel_gap: f64 },
    #[error("span(u, v) is not a Lorentzian plane (discriminant {disc:e})")]
    NotLorentzian { disc: f64 },
    #[error("degenerate input: vectors nearly parallel")]
    Degenerate,
    #[error("degenerate splitting: the two null lines coincide (pairing {pairing:e})")]
    DegenerateSplitting { pairing: f64 },
    #[error("gamma gauge requires r != 0")]
    InvalidR,
    #[error("eigenvector extraction is ill-conditioned (residual {residual:e}): near-parabolic matrix")]
    IllConditioned { residual: f64 },
    #[error("seed vector is not lightlike: (X0, X0) = {norm:e}")]
    NotLightlike { norm: f64 },
    #[error("linear conserved quantity requires arc-length or negative arc-length polarisation")]
    WrongPolarisation,
    #[error("step-doubling error estimate {estimate:e} exceeds tolerance {tol:e}")]
    StepTooCoarse { estimate: f64, tol: f64 },
    #[error("phase unwrapping failed on [{mu_lo}, {mu_hi}]: refinement exhausted")]
    UnwrapFailure { mu_lo: f64, mu_hi: f64 },
    #[error("transform is not Backlund-type: division remainder {remainder:e}")]
    NotBacklund { remainder: f64 },
    #[error("monodromy branch is a parabolic candidate; no closed transform pair")]
    Parabolic,
    #[error("transform is not immersed at the requested sample")]
    NotImmersed,
    #[error("explicit polarisation data is invalid: {0}")]
    BadPolarisation(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
