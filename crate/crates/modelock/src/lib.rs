//! Mode-locking plateaus, devil's staircases and Herman-ring moduli
//! for translated families of analytic circle diffeomorphisms.
//!
//! Given an increasing analytic lift `F` with `F - Id` 1-periodic, the
//! translated family `F_t = F + t` has a continuous non-decreasing
//! parameter-to-translation-number map `H(t) = Trans(F_t)` whose graph
//! is a devil's staircase: each rational height `p/q` is attained on a
//! plateau `I(p/q)` of length `l(p/q)`. When the base map carries a
//! Herman ring of modulus `2*tau`, these lengths decay exponentially
//! along the continued-fraction convergents of `Trans(F)`:
//!
//! ```text
//! limsup (1/q_n) log l(p_n/q_n) <= -2*pi*tau
//! ```
//!
//! The crate computes all the ingredients of that experiment with
//! multiprecision arithmetic: certified translation-number enclosures,
//! plateau endpoints, continued fractions, Birkhoff-average
//! linearization, Fourier-decay modulus estimates and the end-to-end
//! decay report. The `modelock` binary exposes the same pipelines as
//! CLI subcommands; the `book/` directory holds a guide whose snippets
//! mirror the doc-tests in these modules.
//!
//! A toy-scale run of the headline experiment:
//!
//! ```
//! use modelock::circlemap::CircleLift;
//! use modelock::locking;
//! use modelock::precision::{float, golden};
//!
//! // A rotation conjugated by x + 0.1 sin(2 pi x): golden-mean
//! // translation number, known Herman ring.
//! let prec = 160;
//! let base = CircleLift::conjugated_rotation(golden(prec), float(prec, 0.1)).unwrap();
//!
//! // Width of the 1/2 plateau of the translated family.
//! let seed = float(prec, 0.5) - golden(prec);
//! let rec = locking::plateau(&base, 1, 2, &seed, 1e-12, prec).unwrap();
//! assert!(rec.width > float(64, 0.01) && rec.width < float(64, 0.1));
//! ```

pub mod circlemap;
pub mod complexnum;
pub mod contfrac;
pub mod decay;
pub mod herman;
pub mod locking;
pub mod mapspec;
pub mod precision;
pub mod rotation;

pub use circlemap::{CircleLift, Enclosure, TranslatedLift};
pub use precision::PrecisionPolicy;

/// Errors shared across the numeric modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("conjugacy amplitude {0} violates |2 pi eps| < 1")]
    InvalidEpsilon(f64),
    #[error("complex evaluation outside the usable horizontal strip")]
    StripExceeded,
    #[error("cannot certify extrema to tolerance {needed} (achieved {achieved})")]
    TolUnreachable { needed: f64, achieved: f64 },
    #[error("quotient extraction no longer certified at this precision (index {0})")]
    PrecisionExhausted(usize),
    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },
    #[error("could not bracket the plateau boundary within |t - seed| <= 2")]
    BracketFailure,
    #[error("sign of a grid cell could not be certified")]
    Inconclusive,
    #[error("fewer than 3 Fourier coefficients above the noise floor")]
    InsufficientSpectrum,
    #[error("need at least {needed} valid rows, got {got}")]
    InsufficientRows { needed: usize, got: usize },
    #[error("{0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
