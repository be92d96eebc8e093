//! Working-precision policy and helpers for the multiprecision scalar.
//!
//! All numeric code in this crate computes with [`rug::Float`] at an
//! explicitly supplied precision. Plateau widths shrink like
//! `exp(-2*pi*tau*q)`, so the bits needed grow linearly with the
//! denominator `q`; [`PrecisionPolicy`] encodes that growth.

use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::Float;

/// Floor for every working precision (IEEE double mantissa width).
pub const MIN_PRECISION: u32 = 53;

/// Linear precision schedule in the denominator `q`.
///
/// ```
/// use modelock::precision::PrecisionPolicy;
/// let policy = PrecisionPolicy::default();
/// assert_eq!(policy.effective_bits(1), 108);
/// assert_eq!(policy.effective_bits(21), 348);
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub base_bits: u32,
    pub bits_per_q: u32,
    pub guard_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        // Widths for tau ~ 0.17 shrink by ~1.5 bits per unit of q;
        // 12 bits/q leaves ample headroom.
        PrecisionPolicy {
            base_bits: 64,
            bits_per_q: 12,
            guard_bits: 32,
        }
    }
}

impl PrecisionPolicy {
    /// Constant precision, independent of `q`.
    pub fn fixed(bits: u32) -> Self {
        PrecisionPolicy {
            base_bits: bits,
            bits_per_q: 0,
            guard_bits: 0,
        }
    }

    /// Bits granted to a computation at denominator `q`, never below 53.
    pub fn effective_bits(&self, q: u64) -> u32 {
        let bits = self.base_bits as u64 + self.bits_per_q as u64 * q + self.guard_bits as u64;
        (bits.min(u32::MAX as u64) as u32).max(MIN_PRECISION)
    }

    /// Doubles the per-q allowance (used when a width comes back
    /// below resolution).
    pub fn escalated(&self) -> Self {
        PrecisionPolicy {
            base_bits: self.base_bits,
            bits_per_q: (self.bits_per_q * 2).max(12),
            guard_bits: self.guard_bits + 32,
        }
    }
}

/// See [`PrecisionPolicy::effective_bits`].
pub fn effective_bits(policy: &PrecisionPolicy, q: u64) -> u32 {
    policy.effective_bits(q)
}

pub fn float(prec: u32, v: f64) -> Float {
    Float::with_val(prec.max(MIN_PRECISION), v)
}

pub fn zero(prec: u32) -> Float {
    Float::with_val(prec.max(MIN_PRECISION), 0)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec.max(MIN_PRECISION), Constant::Pi)
}

pub fn two_pi(prec: u32) -> Float {
    pi(prec) * 2u32
}

/// The golden mean `(sqrt 5 - 1)/2`.
pub fn golden(prec: u32) -> Float {
    let prec = prec.max(MIN_PRECISION);
    (Float::with_val(prec, 5).sqrt() - 1u32) / 2u32
}

/// Parses a decimal string to a `Float` at `prec` bits.
pub fn parse_float(prec: u32, s: &str) -> Option<Float> {
    Float::parse(s)
        .ok()
        .map(|p| p.complete(prec.max(MIN_PRECISION)))
}

/// Shortest decimal string that re-parses to exactly `x` at its
/// own precision. CSV output uses this so emitted files are
/// precision-faithful and byte-stable.
pub fn shortest_string(x: &Float) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.to_string();
    }
    if x.is_zero() {
        return "0".to_string();
    }
    let prec = x.prec();
    let max_digits = (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    // rug's format precision is the number of significant digits
    // (and 0 means "all digits", so the loop must start at 1).
    for digits in 1..=max_digits {
        let mut s = format!("{:.*e}", digits, x);
        if let Some(trimmed) = s.strip_suffix("e0") {
            s = trimmed.to_string();
        }
        if let Some(back) = parse_float(prec, &s) {
            if back == *x {
                return s;
            }
        }
    }
    format!("{:.*e}", max_digits, x)
}
