use thiserror::Error;

/// Errors surfaced by the solvers and the time-domain propagator.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// `f[x]` hit a pole exactly: gamma = 0 and |x| = delta.
    #[error("pole on grid: f[x] at x = {x} with gamma = 0 and delta = {delta}")]
    PoleOnGrid { x: f64, delta: f64 },

    /// A continued-fraction denominator fell below the floor magnitude.
    #[error("degenerate denominator at lattice point omega = {omega} (|denominator| = {magnitude:e})")]
    DegenerateDenominator { omega: f64, magnitude: f64 },

    /// The truncated lattice matrix could not be inverted reliably.
    #[error("lattice matrix numerically singular (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    /// Time step too coarse for the fastest scale in the drive.
    #[error("resolution guard: dt*max(delta, w, epsilon, A) = {product:e} > 0.02; use dt <= {suggested:e}")]
    ResolutionGuard { product: f64, suggested: f64 },

    /// Trace window too short for the requested damping.
    #[error("decay guard: exp(-gamma*T) = {decay:e} >= 1e-4; extend the window to T >= {min_window:e}")]
    DecayGuard { decay: f64, min_window: f64 },

    #[error("invalid drive: {0}")]
    InvalidDrive(String),

    #[error("empty window: [{omega_min}, {omega_max}]")]
    EmptyWindow { omega_min: f64, omega_max: f64 },

    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
