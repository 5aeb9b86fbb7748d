use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside its admissible range.
    InvalidParameter { name: &'static str, value: f64 },
    /// `Re(A)` is not positive definite, so the state cannot be normalized.
    DegenerateState,
    /// `|Theta(t)|` fell below the singularity floor.
    SingularCoefficients { t: f64, theta_abs: f64 },
    /// A propagator stage produced a non-normalizable quadratic form.
    StagedSingularity { stage: usize },
    /// A 2x2 covariance is not positive definite.
    NotPositiveDefinite,
    /// A sweep specification is inconsistent.
    InvalidSweep(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            Error::DegenerateState => f.write_str("degenerate state: Re(A) is not positive definite"),
            Error::SingularCoefficients { t, theta_abs } => {
                write!(f, "singular coefficients at t = {t}: |Theta| = {theta_abs:e}")
            }
            Error::StagedSingularity { stage } => {
                write!(f, "propagator stage {stage} produced a non-normalizable state")
            }
            Error::NotPositiveDefinite => f.write_str("covariance is not positive definite"),
            Error::InvalidSweep(msg) => write!(f, "invalid sweep: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
