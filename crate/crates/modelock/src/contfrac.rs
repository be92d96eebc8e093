//! Continued-fraction expansions and convergents.
//!
//! The convergents `p_n/q_n` of the target translation number index the
//! decay experiment. Quotients are extracted from a multiprecision
//! remainder with a certified floor; the integer recurrences are exact.
//!
//! ```
//! use modelock::contfrac::cf_expand;
//! use modelock::precision::golden;
//!
//! // golden = [0; 1, 1, 1, ...]: convergents are Fibonacci ratios.
//! let cf = cf_expand(&golden(256), 6, 256).unwrap();
//! let r = cf.convergent(6).unwrap();
//! assert_eq!((r.p.to_i64(), r.q.to_i64()), (Some(8), Some(13)));
//! ```

use rug::{Complete, Float, Integer};

use crate::precision::zero;
use crate::Error;

/// A reduced fraction `p/q`, `q >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational {
    pub p: Integer,
    pub q: Integer,
}

impl Rational {
    pub fn new(p: impl Into<Integer>, q: impl Into<Integer>) -> Self {
        let mut p = p.into();
        let mut q = q.into();
        assert!(q != 0, "zero denominator");
        if q < 0 {
            p = -p;
            q = -q;
        }
        let g = p.clone().abs().gcd(&q);
        if g > 1 {
            p /= &g;
            q /= &g;
        }
        Rational { p, q }
    }

    pub fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.p) / Float::with_val(prec, &self.q)
    }

    pub fn p_i64(&self) -> Option<i64> {
        self.p.to_i64()
    }

    pub fn q_u64(&self) -> Option<u64> {
        self.q.to_u64()
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Partial quotients `[a0; a1, a2, ...]` with their convergents.
#[derive(Clone, Debug)]
pub struct CFExpansion {
    pub quotients: Vec<Integer>,
    pub convergents: Vec<Rational>,
    /// Expansion ended because the input is rational (at working
    /// precision, exactly representable).
    pub terminated: bool,
    /// Expansion was cut where the next quotient could no longer be
    /// certified; trailing convergents are trustworthy, nothing beyond.
    pub precision_flagged: bool,
}

impl CFExpansion {
    pub fn convergent(&self, n: usize) -> Result<&Rational, Error> {
        self.convergents.get(n).ok_or(Error::OutOfRange {
            index: n,
            len: self.convergents.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.convergents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.convergents.is_empty()
    }
}

/// Expands `x` to at most `n_max + 1` quotients (indices `0..=n_max`).
///
/// The running remainder keeps `prec` bits and carries a propagated
/// uncertainty bound. A fractional part below `2^(-prec/2)` means the
/// input is rational at working precision and the expansion terminates;
/// a fractional part inside the uncertainty band means the next floor
/// could flip, so the expansion stops and is flagged instead of
/// guessing: one wrong quotient would corrupt every later `q_n`.
///
/// ```
/// use modelock::contfrac::cf_expand;
/// use modelock::precision::golden;
/// let cf = cf_expand(&golden(256), 7, 256).unwrap();
/// let fib: Vec<(i64, i64)> = vec![(0,1),(1,1),(1,2),(2,3),(3,5),(5,8),(8,13),(13,21)];
/// for (n, (p, q)) in fib.into_iter().enumerate() {
///     assert_eq!(cf.convergents[n].p, p);
///     assert_eq!(cf.convergents[n].q, q);
/// }
/// ```
pub fn cf_expand(x: &Float, n_max: usize, prec: u32) -> Result<CFExpansion, Error> {
    let mut quotients: Vec<Integer> = Vec::new();
    let mut convergents: Vec<Rational> = Vec::new();
    let mut terminated = false;
    let mut precision_flagged = false;

    // p_{-1} = 1, q_{-1} = 0
    let mut p_prev = Integer::from(1);
    let mut q_prev = Integer::from(0);
    let mut p_cur = Integer::ZERO;
    let mut q_cur = Integer::from(1);

    let mut r = Float::with_val(prec, x);
    // Uncertainty of the running remainder. It starts at the input's
    // ulp scale and grows by 1/frac^2 whenever the remainder is
    // reciprocated; once it could flip a floor, no further quotient is
    // certified.
    let mut delta = Float::with_val(64, Float::i_exp(1, -(prec as i32) + 2))
        * (Float::with_val(64, 1) + Float::with_val(64, x).abs());
    let small = Float::with_val(64, Float::i_exp(1, -(prec as i32) / 2));

    for n in 0..=n_max {
        let fl = r.clone().floor();
        let mut a = fl.to_integer().expect("finite remainder");
        let mut frac = r.clone() - &fl;
        let near_one = Float::with_val(prec, 1) - frac.clone();
        if near_one < small {
            // Remainder sits just under the next integer: rational from
            // below (e.g. 2.999...).
            a += 1;
            frac = zero(prec);
        }
        if frac < small {
            // Effectively integer at working precision: rational input,
            // expansion terminates here.
            if n >= 1 && a < 1 {
                break;
            }
            push_convergent(
                &a,
                &mut p_prev,
                &mut q_prev,
                &mut p_cur,
                &mut q_cur,
                n,
                &mut quotients,
                &mut convergents,
            );
            terminated = true;
            break;
        }
        if frac <= delta || near_one <= delta {
            precision_flagged = true;
            break;
        }
        if n >= 1 && a < 1 {
            precision_flagged = true;
            break;
        }
        push_convergent(
            &a,
            &mut p_prev,
            &mut q_prev,
            &mut p_cur,
            &mut q_cur,
            n,
            &mut quotients,
            &mut convergents,
        );
        delta = delta / Float::with_val(64, &frac).square();
        r = frac.recip();
    }

    if terminated {
        canonicalize(&mut quotients, &mut convergents);
    }
    if quotients.is_empty() {
        return Err(Error::PrecisionExhausted(0));
    }
    Ok(CFExpansion {
        quotients,
        convergents,
        terminated,
        precision_flagged,
    })
}

#[allow(clippy::too_many_arguments)]
fn push_convergent(
    a: &Integer,
    p_prev: &mut Integer,
    q_prev: &mut Integer,
    p_cur: &mut Integer,
    q_cur: &mut Integer,
    n: usize,
    quotients: &mut Vec<Integer>,
    convergents: &mut Vec<Rational>,
) {
    if n == 0 {
        *p_cur = a.clone();
        *q_cur = Integer::from(1);
    } else {
        let p_new = (a * &*p_cur).complete() + &*p_prev;
        let q_new = (a * &*q_cur).complete() + &*q_prev;
        *p_prev = std::mem::replace(p_cur, p_new);
        *q_prev = std::mem::replace(q_cur, q_new);
    }
    quotients.push(a.clone());
    convergents.push(Rational {
        p: p_cur.clone(),
        q: q_cur.clone(),
    });
}

/// Canonical form for terminating expansions: last quotient >= 2 when
/// possible (`[..., a, 1]` becomes `[..., a+1]`).
fn canonicalize(quotients: &mut Vec<Integer>, convergents: &mut Vec<Rational>) {
    if quotients.len() >= 2 && *quotients.last().unwrap() == 1 {
        quotients.pop();
        let last_conv = convergents.pop().unwrap();
        *quotients.last_mut().unwrap() += 1;
        *convergents.last_mut().unwrap() = last_conv;
    }
}

/// Exact expansion of a rational number by Euclid's algorithm.
pub fn cf_expand_rational(p: &Integer, q: &Integer) -> CFExpansion {
    assert!(*q > 0);
    let mut quotients = Vec::new();
    let mut convergents = Vec::new();
    let mut p_prev = Integer::from(1);
    let mut q_prev = Integer::from(0);
    let mut p_cur = Integer::ZERO;
    let mut q_cur = Integer::from(1);
    let (mut num, mut den) = (p.clone(), q.clone());
    let mut n = 0usize;
    while den != 0 {
        let (a, rem) = num.div_rem_floor(den.clone());
        push_convergent(
            &a,
            &mut p_prev,
            &mut q_prev,
            &mut p_cur,
            &mut q_cur,
            n,
            &mut quotients,
            &mut convergents,
        );
        num = den;
        den = rem;
        n += 1;
    }
    let mut cf = CFExpansion {
        quotients,
        convergents,
        terminated: true,
        precision_flagged: false,
    };
    canonicalize(&mut cf.quotients, &mut cf.convergents);
    cf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{golden, pi};

    #[test]
    fn golden_mean_is_fibonacci() {
        let cf = cf_expand(&golden(256), 7, 256).unwrap();
        assert_eq!(cf.quotients.len(), 8);
        assert_eq!(cf.quotients[0], 0);
        assert!(cf.quotients[1..].iter().all(|a| *a == 1));
        let fib = [(0, 1), (1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13), (13, 21)];
        for (n, (p, q)) in fib.iter().enumerate() {
            assert_eq!(cf.convergents[n], Rational::new(*p, *q));
        }
        assert_eq!(cf.convergent(5).unwrap(), &Rational::new(5, 8));
        assert_eq!(cf.convergent(0).unwrap(), &Rational::new(0, 1));
        assert!(cf.convergent(99).is_err());
    }

    #[test]
    fn rational_input_terminates_canonically() {
        let x = Float::with_val(256, 3) / Float::with_val(256, 7);
        let cf = cf_expand(&x, 10, 256).unwrap();
        assert!(cf.terminated);
        assert_eq!(cf.quotients, vec![0, 2, 3]);
        assert_eq!(
            cf.convergents,
            vec![Rational::new(0, 1), Rational::new(1, 2), Rational::new(3, 7)]
        );
        let exact = cf_expand_rational(&Integer::from(3), &Integer::from(7));
        assert_eq!(exact.quotients, cf.quotients);
    }

    #[test]
    fn pi_convergents_are_best_approximations() {
        let cf = cf_expand(&pi(256), 6, 256).unwrap();
        let expect = [(3, 1), (22, 7), (333, 106), (355, 113)];
        for (n, (p, q)) in expect.iter().enumerate() {
            assert_eq!(cf.convergents[n], Rational::new(*p, *q));
        }
        assert_eq!(cf.convergent(3).unwrap(), &Rational::new(355, 113));
        // Oracle: exhaustive best-approximation search over q <= 113.
        let pi_f = pi(512);
        let mut best_err = Float::with_val(512, 10);
        let mut best: Vec<(i64, i64)> = Vec::new();
        for q in 1i64..=113 {
            let p = (pi_f.clone() * Float::with_val(512, q))
                .round()
                .to_f64() as i64;
            let err = (pi_f.clone() - Float::with_val(512, p) / Float::with_val(512, q)).abs();
            if err < best_err {
                best_err = err;
                best.push((p, q));
            }
        }
        // Every convergent must appear in the best-approximation chain.
        for (p, q) in expect {
            assert!(best.contains(&(p, q)), "{p}/{q} missing from oracle chain");
        }
    }

    #[test]
    fn recurrence_holds_exactly() {
        let cf = cf_expand(&pi(320), 12, 320).unwrap();
        for n in 2..cf.len() {
            let a = &cf.quotients[n];
            let p = (a * &cf.convergents[n - 1].p).complete() + &cf.convergents[n - 2].p;
            let q = (a * &cf.convergents[n - 1].q).complete() + &cf.convergents[n - 2].q;
            assert_eq!(cf.convergents[n].p, p);
            assert_eq!(cf.convergents[n].q, q);
            assert!(cf.convergents[n].q > cf.convergents[n - 1].q);
        }
    }

    #[test]
    fn alternation_and_quality() {
        let x = golden(320);
        let cf = cf_expand(&x, 12, 320).unwrap();
        let mut last_sign = 0i32;
        for n in 0..cf.len() {
            let err = x.clone() - cf.convergents[n].to_float(320);
            let sign = if err > 0 { 1 } else { -1 };
            if last_sign != 0 {
                assert_eq!(sign, -last_sign, "signs must alternate");
            }
            last_sign = sign;
            let q = cf.convergents[n].to_float(320);
            let _ = q;
            let qn = Float::with_val(320, &cf.convergents[n].q);
            assert!(err.abs() <= qn.clone().square().recip());
            if n + 1 < cf.len() {
                let qn1 = Float::with_val(320, &cf.convergents[n + 1].q);
                let err2 = (x.clone() - cf.convergents[n].to_float(320)).abs();
                assert!(err2 < (qn * qn1).recip());
            }
        }
    }

    #[test]
    fn low_precision_gets_flagged_not_wrong() {
        // At 53 bits the golden mean expansion must stop (flagged or
        // terminated) before it can emit a wrong quotient.
        let cf = cf_expand(&golden(53), 40, 53).unwrap();
        assert!(cf.precision_flagged || cf.terminated);
        for a in &cf.quotients[1..] {
            assert_eq!(*a, 1);
        }
    }

    #[test]
    fn coprimality_invariant() {
        let cf = cf_expand(&pi(320), 10, 320).unwrap();
        for c in &cf.convergents {
            assert_eq!(c.p.clone().abs().gcd(&c.q), 1);
        }
    }
}
