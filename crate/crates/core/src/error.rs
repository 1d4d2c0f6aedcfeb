use std::fmt;

/// Failures raised by the model, the solvers and the run driver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no stable equilibrium root on the bracket [{lo}, {hi}] at T = {temperature} K")]
    NoStableRoot { temperature: f64, lo: f64, hi: f64 },

    #[error("negative squared frequency {omega_sq:e} at k = {k} (unstable equilibrium passed in)")]
    NegativeEigenvalue { k: f64, omega_sq: f64 },

    #[error("invalid cell count N = {0} (need N >= 2)")]
    InvalidN(usize),

    #[error("equilibrium solve did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("equilibrium is unstable: linearized stiffness is not positive definite")]
    UnstableEquilibrium,

    #[error("mass matrix is not positive definite")]
    NonPositiveMass,

    #[error("mode index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("integrator step size underflow at t = {t:e} s")]
    StepFailure { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{}", SweepFailures(.0))]
    Sweep(Vec<(f64, Error)>),

    #[error("invalid run spec: {0}")]
    InvalidSpec(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable identifier, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NoStableRoot { .. } => "NoStableRoot",
            Error::NegativeEigenvalue { .. } => "NegativeEigenvalue",
            Error::InvalidN(_) => "InvalidN",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::UnstableEquilibrium => "UnstableEquilibrium",
            Error::NonPositiveMass => "NonPositiveMass",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::StepFailure { .. } => "StepFailure",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Sweep(_) => "SweepFailure",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::Io(_) => "Io",
        }
    }

    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidN(_)
                | Error::InvalidParameter(_)
                | Error::InvalidSpec(_)
                | Error::IndexOutOfRange { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

struct SweepFailures<'a>(&'a [(f64, Error)]);

impl fmt::Display for SweepFailures<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} temperature point(s) failed:", self.0.len())?;
        for (t, e) in self.0 {
            write!(f, " [T = {t} K: {e}]")?;
        }
        Ok(())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
