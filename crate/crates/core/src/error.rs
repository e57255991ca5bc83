use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not normal (deviation {0:.3e})")]
    NotNormal(f64),
    #[error("eigensolver did not converge (off-diagonal residual {0:.3e})")]
    NoConvergence(f64),
    #[error("eigenpath tracking is ambiguous at step {step} (best overlap {overlap:.3})")]
    TrackingAmbiguity { step: usize, overlap: f64 },
    #[error("gap collapse at step {step}: smallest singular value of v is {sigma:.3e}")]
    GapCollapse { step: usize, sigma: f64 },
    #[error("intertwining residual {residual:.3e} at step {step}")]
    Intertwining { step: usize, residual: f64 },
    #[error("Volterra recursion disagrees with the direct product by {0:.3e}")]
    VolterraMismatch(f64),
    #[error("interpolation is gapless (minimum gap {0:.3e})")]
    Gapless(f64),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Input(_) | Error::NotHermitian(_) | Error::NotUnitary(_) | Error::NotNormal(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
