use std::fmt;

use thiserror::Error;

/// Which defining condition of a structure failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    /// `K L^T + L K^T = 0`
    DiracSkew,
    /// `rank [K L] = n`
    DiracRank,
    /// the kernel set is its own `+` companion
    DiracCompanion,
    /// `S^T P = P^T S`
    LagrangeSymmetry,
    /// `rank [S^T P^T] = n`
    LagrangeRank,
    /// the image set is its own `-` companion
    LagrangeCompanion,
    /// kernel and image representations describe the same set
    LagrangeKernelImage,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::DiracSkew => "KL^T + LK^T = 0",
            Axiom::DiracRank => "rank [K L] = n",
            Axiom::DiracCompanion => "D equals its +companion",
            Axiom::LagrangeSymmetry => "S^T P = P^T S",
            Axiom::LagrangeRank => "rank [S^T P^T] = n",
            Axiom::LagrangeCompanion => "L equals its -companion",
            Axiom::LagrangeKernelImage => "ker [S^T -P^T] = im [P; S]",
        };
        f.write_str(s)
    }
}

/// Structure the failed axiom belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    Dirac,
    Lagrange,
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureKind::Dirac => f.write_str("Dirac structure"),
            StructureKind::Lagrange => f.write_str("Lagrangian subspace"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFiniteEntries,

    #[error("ambient dimension {0} is odd; expected a product space X x X*")]
    OddAmbient(usize),

    #[error("subspaces live in different ambient spaces ({0} vs {1})")]
    AmbientMismatch(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{structure} axiom violated: {which} (residual {residual:.3e})")]
    AxiomViolation {
        structure: StructureKind,
        which: Axiom,
        residual: f64,
    },

    #[error("matrix is not skew-symmetric (deviation {0:.3e})")]
    NotSkew(f64),

    #[error("matrix is not symmetric (deviation {0:.3e})")]
    NotSymmetric(f64),

    #[error("reconstructed subspace does not match the source ({0})")]
    ReconstructionMismatch(&'static str),

    #[error("no valid energy/co-energy partition found: {0}")]
    NoValidPartition(String),

    #[error("S is singular; no pure co-energy parametrization exists")]
    SingularS,

    #[error("vector has length {actual}, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("step matrix is singular for dt = {0}")]
    SingularStepMatrix(f64),

    #[error("irregular pencil")]
    IrregularPencil,

    #[error("trajectories have different time grids")]
    GridMismatch,

    #[error("invalid tolerance {name} = {value}; tolerances must be positive")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("unknown example '{0}'")]
    UnknownExample(String),

    #[error("example '{example}' requires parameter '{param}'")]
    MissingParam { example: String, param: String },

    #[error("example '{example}' has no parameter '{param}'")]
    UnknownParam { example: String, param: String },

    #[error("invalid parameter {param} = {value}: {reason}")]
    InvalidParam {
        param: String,
        value: f64,
        reason: &'static str,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
