use thiserror::Error;

/// Errors produced by circuit construction, solvers, and fitters.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The capacitance matrix (or another matrix required to be SPD) failed
    /// its Cholesky factorization.
    #[error("capacitance matrix not SPD: {0}")]
    NotPositiveDefinite(String),

    /// A connected chain produced more than one near-zero mode.
    #[error("degenerate circuit: {0}")]
    DegenerateCircuit(String),

    /// Root bracketing failed: the target value is not straddled.
    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// No dip found in an S21 trace (minimum depth below 3x the noise floor).
    #[error("no resonance")]
    NoResonance,

    #[error("unidentifiable from provided points: {0}")]
    Unidentifiable(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    /// A readout frequency fell within the guard band of a qubit transition,
    /// where the dispersive denominators diverge.
    #[error("resonance proximity: {0}")]
    ResonanceProximity(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by malformed input rather than numerical
    /// failure. CLI layers map these to distinct exit codes.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Parse(_) | Error::Io(_)
        )
    }
}
