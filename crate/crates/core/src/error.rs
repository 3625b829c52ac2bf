use alloc::boxed::Box;
use alloc::string::String;

use crate::ground_state::GroundStateResult;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameters outside the intercritical window: {0}")]
    WindowViolation(String),
    #[error("invalid grid: {0}")]
    BadGridSpec(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field lives on a different grid")]
    GridMismatch,
    #[error("field contains a non-finite value at node {0}")]
    CorruptedField(usize),
    #[error("grid with n = {n} exceeds the spectral cap {cap}")]
    TooLargeForSpectral { n: usize, cap: usize },
    #[error("bad region [{rlo}, {rhi}]")]
    BadRegion { rlo: f64, rhi: f64 },
    #[error("rescaling pushes a fraction {lost:.3e} of the mass outside the grid")]
    ResampleOutOfRange { lost: f64 },
    #[error("degenerate field: {0}")]
    DegenerateField(&'static str),
    #[error("minimizer did not converge after {} iterations (J = {})", .0.iterations, .0.weinstein)]
    NoConvergence(Box<GroundStateResult>),
    #[error("tridiagonal solve broke down at row {0}")]
    LinearSolveFailure(usize),
    #[error("cutoff construction failed: {0}")]
    CutoffConstructionFailure(String),
    #[error("cutoff support 4R = {reach} exceeds rmax = {rmax}")]
    CutoffOutOfDomain { reach: f64, rmax: f64 },
    #[error("no scale on the ladder fits below rmax/2")]
    EmptyScaleSet,
    #[error("rho vanishes")]
    DegenerateRho,
    #[error("insufficient tail: {0}")]
    InsufficientTail(String),
    #[error("run did not blow up")]
    NoBlowup,
    #[error("L^sigma_c norm never exceeded its initial value")]
    NoGrowth,
    #[error("insufficient snapshots: {0}")]
    InsufficientSnapshots(String),
    #[error("eigen solver did not converge")]
    EigenFailure,
}
