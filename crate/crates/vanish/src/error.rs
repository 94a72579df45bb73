//! Error type shared across the crate.

/// Errors produced by constructions, evaluation, and set queries.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Jet arithmetic requires equal expansion points and equal orders.
    #[error("jets disagree on expansion point or order: {0}")]
    JetMismatch(String),

    /// Reciprocal of a jet whose leading coefficient is zero, or smaller
    /// than its own error bound.
    #[error("leading jet coefficient is zero or not certifiably nonzero")]
    PoleAtExpansionPoint,

    /// A value left the representable exponent range on the large side.
    #[error("value exceeds the representable exponent range")]
    ExponentOverflow,

    /// Membership query cannot be resolved at the set's stated resolution.
    #[error("membership undecidable for {set}: {detail}")]
    Undecidable { set: String, detail: String },

    /// The construction rejects this zero-set generator.
    #[error("zero set not supported by this construction: {0}")]
    UnsupportedZeroSet(String),

    /// An exact entire zero set must be all of the line or have no
    /// accumulation point.
    #[error("no entire function vanishes exactly on this set: {0}")]
    NotRepresentableAsEntire(String),

    /// An exact nowhere-analytic zero set must have empty interior.
    #[error("zero set has nonempty interior: {0}")]
    InteriorNotEmpty(String),

    /// An exact Pringsheim-singular zero set must have no accumulation point.
    #[error("zero set has an accumulation point: {0}")]
    AccumulationPointPresent(String),

    /// The cost model refuses the requested truncation.
    #[error("certified tail bound unachievable under the cost model: {0}")]
    TailBoundUnachievable(String),

    /// Algebra elements are built from nonzero polynomials.
    #[error("polynomial must be nonzero")]
    ZeroPolynomial,

    /// Generator polynomials carry no constant term.
    #[error("polynomial must have no constant term")]
    ConstantTermPresent,

    /// The integrand of a primitive lacks a positive lower-bound certificate.
    #[error("positivity certificate unavailable for the integrand")]
    PositivityUncertified,

    /// Bad argument outside the document formats.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed zero-set, expression, or polynomial document.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
