use thiserror::Error;

/// Which curvature symmetry a raw component array failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Antisymmetry,
    PairSymmetry,
    FirstBianchi,
}

impl std::fmt::Display for Symmetry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Symmetry::Antisymmetry => "antisymmetry",
            Symmetry::PairSymmetry => "pair symmetry",
            Symmetry::FirstBianchi => "first Bianchi identity",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max |S_ij - S_ji| = {0:e})")]
    NonSymmetric(f64),
    #[error("matrix is not skew (max |S_ij + S_ji| = {0:e})")]
    NonSkew(f64),
    #[error("cannot normalise a zero vector")]
    ZeroVector,
    #[error("basis is not orthonormal (max Gram defect {0:e})")]
    NotOrthonormal(f64),
    #[error("{which} violated by {magnitude:e}")]
    SymmetryViolation { which: Symmetry, magnitude: f64 },
    #[error("component R{indices:?} given as {first} conflicts with {second} after symmetry completion")]
    ConflictingComponent {
        indices: [usize; 4],
        first: f64,
        second: f64,
    },
    #[error("tensor is not trace-free (|ricci| = {0:e})")]
    NotTraceFree(f64),
    #[error("endomorphism is not a complex structure (|Phi^2 + id| = {0:e})")]
    NotAComplexStructure(f64),
    #[error("not a unitary quaternion structure: {0}")]
    NotAQuaternionStructure(String),
    #[error("Weyl tensor is neither self-dual nor anti-self-dual")]
    NotHalfFlat,
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("point {point:?} lies outside the domain of chart `{chart}` (margin {margin})")]
    OutOfDomain {
        chart: String,
        point: [f64; 4],
        margin: f64,
    },
    #[error("metric of chart `{chart}` is not positive definite at {point:?}")]
    SingularMetric { chart: String, point: [f64; 4] },
    #[error("unknown chart `{0}`")]
    UnknownChart(String),
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
