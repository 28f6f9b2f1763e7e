//! # qcp-core
//!
//! Finite quantum graphs `(B, ψ, A)` made concrete: `B = ⊕ M_{n(a)}` is stored
//! blockwise over its standard matrix units, `ψ` by a diagonal density, and the
//! quantum adjacency matrix `A` as a complex matrix over the same units.
//!
//! On top of that representation the crate builds
//!
//! - the quantum edge correspondence `E ⊂ B ⊗ B` and its balanced tensor powers
//!   ([`edgecorr`]),
//! - a truncated Fock-module model of the Toeplitz representation with explicit
//!   validity windows ([`fock`]),
//! - the simplicity decision procedure for the Cuntz–Pimsner algebra of `E`
//!   and the quantum/local Cuntz–Krieger separation report ([`simplicity`]),
//! - the JSON graph description format ([`format`]).
//!
//! Everything is dense double-precision linear algebra; all comparisons go
//! through one [`Config`] tolerance.

#![forbid(unsafe_code)]

pub mod edgecorr;
pub mod fock;
pub mod linalg;
pub mod qadj;
pub mod qspace;
pub mod simplicity;

pub use edgecorr::{
    EdgeCorrespondence, EdgeVector, Ideal, StructuredFamily, TensorPowerVector, TensorPowers,
};
pub use fock::{FockOperator, FockTruncation};
pub use linalg::C64;
pub use qadj::{QuantumAdjacency, QuantumGraph};
pub use qspace::{AlgebraElement, BlockStructure, QuantumSpace, TensorElement};
pub use simplicity::{
    certify_simplicity, qck_separation, Evidence, Route, Separated, SeparationReport, SimplicityParams,
    SimplicityVerdict, Verdict,
};

use thiserror::Error;

/// Errors raised by validation and by budget guards.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("block structure must have at least one block, each of size >= 1")]
    EmptyBlocks,

    #[error("density weights do not match the block structure: {0}")]
    WeightShape(String),

    #[error("density weight {weight} in block {block} is not positive")]
    NonInvertibleDensity { block: usize, weight: f64 },

    #[error("state is not normalized: total weight {0}")]
    NotAState(f64),

    #[error("not a delta-form: block {block} has Tr(rho^-1) = {found}, expected {expected}")]
    NotDeltaForm { block: usize, found: f64, expected: f64 },

    #[error("matrix has shape {found:?}, expected {expected:?}")]
    Shape { found: (usize, usize), expected: (usize, usize) },

    #[error("operation needs a single matrix block, got {0}")]
    MultiBlock(usize),

    #[error("map is not completely positive (min Choi eigenvalue {0})")]
    NotCp(f64),

    #[error("rank-one constraint Tr(rho^-1 T*T) = delta^2 violated in block {block}: {found} vs {expected}")]
    TraceConstraintViolated { block: usize, found: f64, expected: f64 },

    #[error("T must be block diagonal for the given block structure")]
    NotBlockDiagonal,

    #[error("classical adjacency entries must be 0 or 1 (found {0})")]
    NotZeroOne(f64),

    #[error("classical graphs live on C^d: every block must have size 1")]
    NotCommutative,

    #[error("the main example needs three equal blocks and the tracial state")]
    MainExampleShape,

    #[error("graph fails quantum Schur idempotence (residual {0:e})")]
    NotSchurIdempotent(f64),

    #[error("edge correspondence is zero (epsilon vanishes)")]
    ZeroCorrespondence,

    #[error("vector left the span of the correspondence (residual {0:e})")]
    NotInSpan(f64),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("correspondence is not full; minimality test needs a full correspondence")]
    NotFull,

    #[error("structured family vector is zero")]
    ZeroVector,

    #[error("invalid structured family: {0}")]
    InvalidFamily(String),

    #[error("ideal is not contained in the Katsura ideal")]
    IdealNotInKatsura,

    #[error("block {0} already lies in the ideal")]
    QInIdeal(usize),

    #[error("block index {0} out of range")]
    BlockOutOfRange(usize),

    #[error("level mismatch: {0}")]
    LevelMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Numerical tolerances and resource caps shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Config {
    /// Comparison tolerance, relative to `max(1, scale)` of the quantities compared.
    pub tol: f64,
    /// Relative cut-off (squared norms, against the largest) when reducing a spanning set to a basis.
    pub rank_tol: f64,
    /// Highest tensor power that will be materialized.
    pub level_cap: usize,
    /// Largest spanning set (labels) allowed at any tensor level.
    pub label_cap: usize,
    /// Largest total dimension of a truncated Fock module.
    pub fock_dim_cap: usize,
    /// Seed for the randomized invertibility search.
    pub seed: u64,
    /// Number of random samples in the invertibility search.
    pub samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            rank_tol: 1e-10,
            level_cap: 6,
            label_cap: 20_000,
            fock_dim_cap: 4_000,
            seed: 0,
            samples: 32,
        }
    }
}

impl Config {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `residual` is negligible compared with `scale`.
    #[inline]
    pub fn negligible(&self, residual: f64, scale: f64) -> bool {
        residual <= self.tol * scale.max(1.0)
    }
}
