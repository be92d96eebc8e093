//! Translation numbers: fast point estimates, certified enclosures,
//! and devil's-staircase sampling of `H(t) = Trans(F_t)`.

use rayon::prelude::*;
use rug::Float;

use crate::circlemap::{CircleLift, Enclosure, TranslatedLift};
use crate::precision::zero;
use crate::Error;

/// One sample of the staircase: parameter and certified enclosure of
/// `Trans(F_t)`.
#[derive(Clone, Debug)]
pub struct StaircasePoint {
    pub t: Float,
    pub trans: Enclosure,
}

/// `(F_t^{on}(0)) / n`, an `O(1/n)` approximation of the translation
/// number. The limit is base-point independent, so no averaging over
/// starting points is done.
pub fn trans_estimate(map: &TranslatedLift, n_iter: u64, prec: u32) -> Float {
    map.iterate(n_iter, &zero(prec), prec) / Float::with_val(prec, n_iter)
}

/// Certified enclosure of `Trans(F_t)` from the displacement extrema at
/// denominator `q`: if `m <= F_t^{oq} - Id - p <= M` on one period then
/// `q Trans - p` lies in `[m, M]`. Width is below `1/q`.
pub fn trans_enclosure(
    map: &TranslatedLift,
    q: u64,
    grid_n: usize,
    tol: f64,
    prec: u32,
) -> Result<Enclosure, Error> {
    let p = centering_integer(map, q, prec);
    let ext = map.displacement_extrema(p, q, grid_n, tol, prec)?;
    let pf = Float::with_val(prec, p);
    Ok(ext.shift(&pf).div_u64(q))
}

/// Integer `p` that keeps the displacement at denominator `q` inside
/// `(-1, 1)`: the nearest integer to `F_t^{oq}(0)`, ties toward even.
pub(crate) fn centering_integer(map: &TranslatedLift, q: u64, prec: u32) -> i64 {
    let v = map.iterate(q, &zero(prec), prec);
    let half_up = v.clone() + Float::with_val(prec, 0.5);
    let fl = half_up.floor();
    let mut p = fl.to_f64() as i64;
    // Ties (v = k + 1/2 exactly) round toward even.
    let tie = v - Float::with_val(prec, p) + Float::with_val(prec, 0.5);
    if tie.is_zero() && p % 2 != 0 {
        p -= 1;
    }
    p
}

/// Evenly spaced staircase samples over `[t_lo, t_hi]`. The sweep fans
/// out over workers; output is index-ordered regardless of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn staircase(
    base: &CircleLift,
    t_lo: &Float,
    t_hi: &Float,
    samples: usize,
    q: u64,
    grid_n: usize,
    tol: f64,
    prec: u32,
) -> Result<Vec<StaircasePoint>, Error> {
    if samples < 2 {
        return Err(Error::Config("need at least 2 staircase samples".into()));
    }
    if t_lo >= t_hi {
        return Err(Error::Config("t_lo must be below t_hi".into()));
    }
    let last = (samples - 1) as u64;
    (0..samples)
        .into_par_iter()
        .map(|i| {
            // Convex combination rather than seed + i * step: the
            // endpoints come out exactly equal to t_lo and t_hi.
            let i = i as u64;
            let t = (t_lo.clone() * Float::with_val(prec, last - i)
                + t_hi.clone() * Float::with_val(prec, i))
                / Float::with_val(prec, last);
            let map = base.translated(t.clone());
            let trans = trans_enclosure(&map, q, grid_n, tol, prec)?;
            Ok(StaircasePoint { t, trans })
        })
        .collect()
}
