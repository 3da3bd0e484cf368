use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a partial isometry: ||VV*V - V||_F = {residual:e}")]
    NotPartialIsometry { residual: f64 },

    #[error("columns are not orthonormal: ||C*C - I||_F = {residual:e}")]
    NotOrthonormal { residual: f64 },

    #[error("eigensolver did not converge")]
    NonConvergence,

    #[error("unequal deficiency indices ({0}, {1})")]
    UnequalIndices(usize, usize),

    #[error("deficiency index must be {expected}, got {got}")]
    WrongDefect { expected: usize, got: usize },

    #[error("point lies in the spectrum: {0}")]
    SpectrumObstruction(String),

    #[error("resolvent (U - zI) is singular at z = {0}")]
    SingularResolvent(String),

    #[error("second factor of the characteristic function is singular at z = {0}")]
    SingularSecondFactor(String),

    #[error("Gram factor is singular at z = {0}")]
    SingularGram(String),

    #[error("matrix pencil is singular: {0}")]
    SingularPencil(String),

    #[error("kernel denominator 1 - z conj(w) vanishes")]
    DegenerateDenominator,

    #[error("rational function has a pole in the closed unit disk")]
    PoleInsideDisk,

    #[error("Blaschke product must vanish at 0")]
    NotVanishingAtZero,

    #[error("root finding failed: {0}")]
    RootFindingFailure(String),

    #[error("boundary root is not unimodular: |zeta| = {0}")]
    NonUnimodularRoot(f64),

    #[error("quadrature did not converge: last change {0:e}")]
    QuadratureNonConvergence(f64),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
