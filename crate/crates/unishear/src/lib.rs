//! Discretized universal shearlet frames on a periodic N x N grid.
//!
//! The library builds band-limited directional frames with per-scale
//! scaling parameters, verifies their tiling/Parseval properties
//! numerically, and provides the l1-analysis inpainting machinery
//! (clusters, delta-sparsity, cluster coherence, error-bound
//! certificates, gap-vs-scale sweeps) on a synthetic line-singularity
//! model.
//!
//! Domain mapping: the image lives on the unit torus [-1/2, 1/2)^2
//! (domain half-width T = 1/2), pixel n sits at x = n/N for
//! n in {-N/2, ..., N/2-1}, and grid frequencies are the integer
//! lattice {-N/2, ..., N/2-1}^2 taken as continuum frequencies.

pub mod atoms;
pub mod config;
pub mod diagnostics;
pub mod fft;
pub mod harness;
pub mod io;
pub mod model;
pub mod recover;
pub mod system;
pub mod transform;

/// Continuum half-width of the spatial domain: the grid covers [-T, T)^2.
pub const DOMAIN_HALFWIDTH: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("scaling sequence not admissible at index {0}")]
    NotAdmissible(usize),
    #[error("scaling sequence must start with alpha_0 = 0")]
    WrongAnchor,
    #[error("grid too small: J={j} scales need 2^{{2(J-1)-1}} <= N/2, got N={n}")]
    GridTooSmall { j: usize, n: usize },
    #[error("grid size must be an even power of two, got {0}")]
    BadGridSize(usize),
    #[error("tiling residual {0:e} exceeds tolerance")]
    TilingFailure(f64),
    #[error("corona K_{j} does not fit the Nyquist square of N={n}")]
    ScaleTooFine { j: usize, n: usize },
    #[error("gap half-width {0} outside (0, T]")]
    BadGap(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("reference image is identically zero")]
    ZeroReference,
    #[error("decay fit needs at least 3 records with errors above the numerical floor")]
    DegenerateInput,
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
