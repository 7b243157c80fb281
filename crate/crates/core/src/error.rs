//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate basis: Gram determinant vanishes")]
    DegenerateBasis,
    #[error("Bragg constraints do not bound a polytope; increase the coefficient bound")]
    UnboundedRegion,
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("operation not applicable: {0}")]
    NotApplicable(String),
    #[error("degenerate fit: residual vanishes at every step (already converged)")]
    DegenerateFit,
    #[error("singular Fourier mode {mode:?}: |det| = {det_abs:.3e}; perturb mass, sizes, or mode offsets")]
    SingularMode { mode: Vec<usize>, det_abs: f64 },
    #[error("one-slice propagation is undefined for a second-order-in-time scheme")]
    OrderTwoUnsupported,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("scheme is not flavored")]
    NotFlavored,
    #[error("sector run requires a massless scheme")]
    MassNotZero,
    #[error("wave packet violates the bandwidth budget: spectral mass {outside_mass:.3e} outside the band")]
    BandwidthViolation { outside_mass: f64 },
    #[error("invalid scheme spec: {0}")]
    InvalidSpec(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
