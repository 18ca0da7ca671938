use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),

    #[error("point {point} outside domain [{lo}, {hi}]")]
    OutOfDomain { point: f64, lo: f64, hi: f64 },

    #[error(transparent)]
    Fosd(#[from] FosdViolation),

    #[error(transparent)]
    Cdfp(#[from] CdfpViolation),

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("malformed LP: {0}")]
    MalformedLp(String),

    #[error("empty sample set")]
    EmptySamples,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

/// Two actions ordered by cost whose distributions are not ordered by
/// first-order stochastic dominance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FosdViolation {
    /// The action with cost at least that of `dominated`.
    pub costlier: usize,
    pub dominated: usize,
    /// First outcome threshold where `F(ω|costlier) < F(ω|dominated)`.
    pub omega: usize,
}

impl fmt::Display for FosdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FOSD violated at ω={}: action {} (costlier) does not dominate action {}",
            self.omega, self.costlier, self.dominated
        )
    }
}

impl core::error::Error for FosdViolation {}

/// A cost-sorted action triple `(left, middle, right)` whose middle point lies
/// strictly below the chord of `F(ω|·)` between its neighbours on the hull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfpViolation {
    pub omega: usize,
    pub triple: (usize, usize, usize),
}

impl fmt::Display for CdfpViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c) = self.triple;
        write!(f, "CDFP violated at (ω={}, triple=({a}, {b}, {c}))", self.omega)
    }
}

impl core::error::Error for CdfpViolation {}
