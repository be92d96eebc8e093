//! Mode-locking plateaus `I(p/q) = [t-, t+]` and their lengths.
//!
//! The left endpoint is the unique zero of `t -> M(t) = max_x G_t(x)`
//! and the right endpoint the unique zero of `t -> m(t) = min_x G_t(x)`
//! with `G_t = F_t^{oq} - Id - p`; both functions of `t` are strictly
//! increasing with slope at least 1, which makes bracketed root
//! finding safe and certifies `|t - root| <= |f(t)|`.
//!
//! ```
//! use modelock::circlemap::CircleLift;
//! use modelock::locking::width;
//! use modelock::precision::{float, pi, two_pi, zero};
//!
//! // Standard family, a = 1/(4 pi): the q = 1 tongue has width 2a = 1/(2 pi).
//! let prec = 128;
//! let base = CircleLift::standard((pi(prec) * 4u32).recip()).unwrap();
//! let (w, _flag) = width(&base, 0, 1, &zero(prec), 1e-14, prec).unwrap();
//! assert!((w - two_pi(prec).recip()).abs() < float(64, 1e-12));
//! ```

use rayon::prelude::*;
use rug::Float;

use crate::circlemap::CircleLift;
use crate::precision::{float, zero};
use crate::Error;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Default displacement grid: resolution must scale with the ~2q sign
/// changes of the displacement.
pub fn default_grid(q: u64) -> usize {
    (16 * q as usize).max(256)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WidthFlag {
    Ok,
    /// Width below `2 * tol`; the measured value is noise-level.
    BelowResolution,
    /// Structurally degenerate family (pure rotation).
    Degenerate,
}

impl std::fmt::Display for WidthFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WidthFlag::Ok => write!(f, "ok"),
            WidthFlag::BelowResolution => write!(f, "below-resolution"),
            WidthFlag::Degenerate => write!(f, "degenerate"),
        }
    }
}

/// One computed plateau.
#[derive(Clone, Debug)]
pub struct TongueRecord {
    pub p: i64,
    pub q: u64,
    pub t_minus: Float,
    pub t_plus: Float,
    pub width: Float,
    pub precision_bits: u32,
    pub tol: f64,
    pub flag: WidthFlag,
}

/// Locates `I(p/q)` for the translated family of `base`.
///
/// `t_seed` must be within 1 of the plateau (any parameter whose
/// translation number is within 1 of `p/q` works).
pub fn plateau(
    base: &CircleLift,
    p: i64,
    q: u64,
    t_seed: &Float,
    tol: f64,
    prec: u32,
) -> Result<TongueRecord, Error> {
    if q == 0 || gcd(p.unsigned_abs(), q) != 1 {
        return Err(Error::Config(format!("{p}/{q} is not a reduced fraction")));
    }
    if tol <= 0.0 {
        return Err(Error::Config("tol must be positive".into()));
    }
    if let CircleLift::PureRotation { theta } = base {
        // Trans(R_theta + t) = theta + t: the plateau is a point.
        let t = Float::with_val(prec, p) / Float::with_val(prec, q) - theta;
        return Ok(TongueRecord {
            p,
            q,
            t_minus: t.clone(),
            t_plus: t.clone(),
            width: zero(prec),
            precision_bits: prec,
            tol,
            flag: WidthFlag::Degenerate,
        });
    }

    let grid_n = default_grid(q);

    // Tolerance/precision continuation: resolve each edge coarsely at
    // low precision first, then re-bracket around the coarse root. The
    // expensive full-precision evaluations are confined to the last
    // stage, which starts from a bracket a few stage-tolerances wide.
    let mut stages: Vec<(f64, u32)> = Vec::new();
    let mut stage_tol = 1e-4;
    while stage_tol > tol * 1e6 {
        let bits = (64 + 2 * (-stage_tol.log2()) as u32).clamp(128.min(prec), prec);
        stages.push((stage_tol, bits));
        stage_tol *= 1e-6;
    }
    stages.push((tol, prec));

    let solve_edge = |take_hi: bool| -> Result<Float, Error> {
        let mut root = t_seed.clone();
        let mut step = 1.0 / 64.0;
        for &(tol_k, bits_k) in &stages {
            let f = |t: &Float| -> Result<Float, Error> {
                let enc = base
                    .translated(t.clone())
                    .displacement_extrema(p, q, grid_n, tol_k / 4.0, bits_k)?;
                Ok(if take_hi { enc.hi } else { enc.lo })
            };
            let seed = Float::with_val(bits_k, &root);
            root = monotone_root(&f, &seed, tol_k, bits_k, step)?;
            step = tol_k * 8.0;
        }
        Ok(root)
    };

    let t_minus = solve_edge(true)?;
    let t_plus = solve_edge(false)?;
    let mut width = t_plus.clone() - &t_minus;
    let mut flag = WidthFlag::Ok;
    if width < 2.0 * tol {
        flag = WidthFlag::BelowResolution;
    }
    if width.is_sign_negative() {
        width = zero(prec);
    }
    Ok(TongueRecord {
        p,
        q,
        t_minus,
        t_plus,
        width,
        precision_bits: prec,
        tol,
        flag,
    })
}

/// Root of a strictly increasing function of `t` (slope >= 1):
/// geometric bracket expansion from the seed, then bracketed
/// regula falsi (Illinois weighting) with a bisection fallback.
///
/// Because the slope is at least 1, `|f(t)| < tol` certifies
/// `|t - root| < tol`, which is the primary stopping rule; the bracket
/// guards against the kinks M and m have at extremum exchanges.
fn monotone_root(
    f: &dyn Fn(&Float) -> Result<Float, Error>,
    t_seed: &Float,
    tol: f64,
    prec: u32,
    init_step: f64,
) -> Result<Float, Error> {
    let v_seed = f(t_seed)?;
    let mut lo;
    let mut hi;
    let mut v_lo;
    let mut v_hi;
    if v_seed.is_sign_negative() {
        lo = t_seed.clone();
        v_lo = v_seed;
        let mut step = init_step;
        loop {
            let cand = lo.clone() + float(prec, step);
            let v = f(&cand)?;
            if v.is_sign_positive() {
                hi = cand;
                v_hi = v;
                break;
            }
            if step >= 2.0 {
                return Err(Error::BracketFailure);
            }
            lo = cand;
            v_lo = v;
            step *= 2.0;
        }
    } else {
        hi = t_seed.clone();
        v_hi = v_seed;
        let mut step = init_step;
        loop {
            let cand = hi.clone() - float(prec, step);
            let v = f(&cand)?;
            if v.is_sign_negative() {
                lo = cand;
                v_lo = v;
                break;
            }
            if step >= 2.0 {
                return Err(Error::BracketFailure);
            }
            hi = cand;
            v_hi = v;
            step *= 2.0;
        }
    }
    let tol_f = float(prec, tol);
    if v_lo.clone().abs() < tol_f {
        return Ok(lo);
    }
    if v_hi.clone().abs() < tol_f {
        return Ok(hi);
    }
    // Illinois: the retained endpoint's value is halved when the same
    // side survives twice, so both endpoints keep moving and the usual
    // regula-falsi stall on convex stretches cannot happen.
    let mut w_lo = v_lo.clone();
    let mut w_hi = v_hi.clone();
    let mut last_side = 0i8;
    for iter in 0..200 {
        if hi.clone() - &lo <= tol_f {
            break;
        }
        let denom = w_hi.clone() - &w_lo;
        let mut cand = if denom.is_zero() || iter % 8 == 7 {
            // Periodic bisection step keeps worst-case convergence.
            (lo.clone() + &hi) / 2u32
        } else {
            hi.clone() - (hi.clone() - &lo) * &w_hi / denom
        };
        if cand <= lo || cand >= hi {
            cand = (lo.clone() + &hi) / 2u32;
        }
        if cand == lo || cand == hi {
            break;
        }
        let v = f(&cand)?;
        if v.clone().abs() < tol_f {
            return Ok(cand);
        }
        if v.is_sign_positive() {
            hi = cand;
            v_hi = v.clone();
            w_hi = v;
            if last_side == 1 {
                w_lo /= 2u32;
            }
            last_side = 1;
        } else {
            lo = cand;
            v_lo = v.clone();
            w_lo = v;
            if last_side == -1 {
                w_hi /= 2u32;
            }
            last_side = -1;
        }
    }
    // Secant polish; M and m are Lipschitz but possibly kinked at
    // extremum exchanges, so the polished point is clamped to the
    // bracket.
    let denom = v_hi.clone() - &v_lo;
    if denom.is_zero() {
        return Ok((lo + hi) / 2u32);
    }
    let mut t = hi.clone() - (hi.clone() - &lo) * v_hi / denom;
    if t < lo {
        t = lo;
    } else if t > hi {
        t = hi;
    }
    Ok(t)
}

/// Plateau length; values below `2 * tol` are reported as 0 and the
/// record flag tells the caller to retry at higher precision.
pub fn width(
    base: &CircleLift,
    p: i64,
    q: u64,
    t_seed: &Float,
    tol: f64,
    prec: u32,
) -> Result<(Float, WidthFlag), Error> {
    let rec = plateau(base, p, q, t_seed, tol, prec)?;
    if rec.flag == WidthFlag::BelowResolution {
        Ok((zero(prec), WidthFlag::BelowResolution))
    } else {
        Ok((rec.width, rec.flag))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleCount {
    /// Identically zero displacement (pure rotation at t = p/q - theta).
    Degenerate,
    /// Number of sign changes of the displacement over one period,
    /// counting certified tangencies as 2.
    Count(usize),
}

/// Counts displacement sign changes over one period for `t` inside the
/// plateau. An even number >= 2 (two q-cycles, counting multiplicity)
/// is expected.
pub fn cycle_count_check(
    map: &crate::circlemap::TranslatedLift,
    p: i64,
    q: u64,
    grid_n: usize,
    prec: u32,
) -> Result<CycleCount, Error> {
    let n = grid_n.max(4 * q as usize).max(64);
    let vals: Vec<Float> = (0..n)
        .into_par_iter()
        .map(|j| {
            let x = Float::with_val(prec, j as u64) / Float::with_val(prec, n as u64);
            map.displacement(p, q, &x, prec)
        })
        .collect();
    let scale = vals
        .iter()
        .map(|v| v.clone().abs().to_f64())
        .fold(0.0f64, f64::max);
    let floor = 2f64.powi(-(prec as i32) + 24);
    if scale <= floor {
        return Ok(CycleCount::Degenerate);
    }
    let thr = float(prec, floor * (1.0 + scale));
    // Signs with near-zeros squeezed out; tangencies are runs of
    // near-zeros flanked by equal signs.
    let mut signs: Vec<i8> = Vec::new();
    let mut ambiguous = 0usize;
    for v in &vals {
        if v.clone().abs() <= thr {
            ambiguous += 1;
            continue;
        }
        signs.push(if v.is_sign_positive() { 1 } else { -1 });
    }
    if signs.len() < n / 2 {
        return Err(Error::Inconclusive);
    }
    let mut changes = 0usize;
    for i in 0..signs.len() {
        if signs[i] != signs[(i + 1) % signs.len()] {
            changes += 1;
        }
    }
    // A tangency leaves an even count untouched; an odd raw count means
    // a crossing hid inside an ambiguous run.
    if changes % 2 == 1 {
        if ambiguous == 0 {
            return Err(Error::Inconclusive);
        }
        changes += 1;
    }
    Ok(CycleCount::Count(changes))
}

/// One entry of the 2-D Arnol'd tongue sweep.
#[derive(Clone, Debug)]
pub struct TongueSlice {
    pub a: Float,
    pub p: i64,
    pub q: u64,
    pub outcome: Result<TongueRecord, String>,
}

/// Reduced fractions `p/q` with `q <= q_max` and `p/q` in `[lo, hi]`,
/// ordered by increasing `q` then `p`.
pub fn farey_fractions(q_max: u64, lo: f64, hi: f64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        let p_lo = (lo * q as f64).ceil() as i64;
        let p_hi = (hi * q as f64).floor() as i64;
        for p in p_lo..=p_hi {
            if gcd(p.unsigned_abs(), q) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

/// Sweeps the standard family over `a`-slices: every Farey fraction in
/// the window gets a plateau record per slice. Per-record failures are
/// recorded and the sweep continues.
#[allow(clippy::too_many_arguments)]
pub fn tongues_2d(
    t_lo: f64,
    t_hi: f64,
    a_lo: &Float,
    a_hi: &Float,
    a_samples: usize,
    q_max: u64,
    tol: f64,
    prec: u32,
) -> Result<Vec<TongueSlice>, Error> {
    if a_samples == 0 {
        return Err(Error::Config("need at least one a-slice".into()));
    }
    let fractions = farey_fractions(q_max, t_lo, t_hi);
    let mut tasks = Vec::new();
    for i in 0..a_samples {
        let frac = if a_samples == 1 {
            zero(prec)
        } else {
            Float::with_val(prec, i as u64) / Float::with_val(prec, (a_samples - 1) as u64)
        };
        let a = a_lo.clone() + (a_hi.clone() - a_lo) * frac;
        for &(p, q) in &fractions {
            tasks.push((a.clone(), p, q));
        }
    }
    let slices: Vec<TongueSlice> = tasks
        .into_par_iter()
        .map(|(a, p, q)| {
            let outcome = CircleLift::standard(a.clone())
                .and_then(|base| {
                    let seed = Float::with_val(prec, p) / Float::with_val(prec, q);
                    plateau(&base, p, q, &seed, tol, prec)
                })
                .map_err(|e| e.to_string());
            TongueSlice { a, p, q, outcome }
        })
        .collect();
    Ok(slices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::pi;
    use crate::rotation::trans_enclosure;

    fn standard_quarter(prec: u32) -> CircleLift {
        let a = (pi(prec) * 4u32).recip();
        CircleLift::standard(a).unwrap()
    }

    #[test]
    fn pure_rotation_plateau_is_a_point() {
        let prec = 128;
        let base = CircleLift::rotation(float(prec, 0.0));
        let rec = plateau(&base, 1, 3, &float(prec, 0.3), 1e-12, prec).unwrap();
        assert_eq!(rec.flag, WidthFlag::Degenerate);
        assert!(rec.width.is_zero());
        let third = Float::with_val(prec, 1) / 3u32;
        assert!((rec.t_minus.clone() - third).abs() < float(64, 1e-30));
    }

    #[test]
    fn standard_q1_closed_form_interval() {
        // I(0/1) = [-a, a] for F_t = x + t + a sin(2 pi x).
        let prec = 128;
        let base = standard_quarter(prec);
        let rec = plateau(&base, 0, 1, &zero(prec), 1e-13, prec).unwrap();
        let a = (pi(prec) * 4u32).recip();
        assert!((rec.t_minus.clone() + &a).abs() < float(64, 1e-12));
        assert!((rec.t_plus.clone() - &a).abs() < float(64, 1e-12));
        let two_a = a * 2u32;
        assert!((rec.width.clone() - two_a).abs() < float(64, 1e-12));
    }

    #[test]
    fn half_plateau_matches_brute_force_oracle() {
        // Oracle: bisect on t using dense sign scans of the displacement
        // at doubled precision.
        let prec = 128;
        let p2 = 256;
        let base = standard_quarter(prec);
        let rec = plateau(&base, 1, 2, &float(prec, 0.5), 1e-12, prec).unwrap();

        let base2 = standard_quarter(p2);
        let n = 40_000usize;
        let has_zero = |t: &Float| -> (bool, bool) {
            // (any positive, any negative) of G over the dense grid
            let m = base2.translated(t.clone());
            let mut pos = false;
            let mut neg = false;
            for j in 0..n {
                let x = Float::with_val(p2, j as u64) / Float::with_val(p2, n as u64);
                let g = m.displacement(1, 2, &x, p2);
                if g.is_sign_positive() {
                    pos = true;
                } else {
                    neg = true;
                }
                if pos && neg {
                    break;
                }
            }
            (pos, neg)
        };
        // t_minus: smallest t with a sign change (max touches zero).
        let mut lo = float(p2, 0.4);
        let mut hi = float(p2, 0.5);
        for _ in 0..50 {
            let mid = (lo.clone() + &hi) / 2u32;
            let (pos, _neg) = has_zero(&mid);
            if pos {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle_t_minus = (lo + hi) / 2u32;
        assert!(
            (rec.t_minus.clone() - oracle_t_minus).abs() < float(64, 1e-8),
            "solver and brute-force bisection disagree"
        );
        assert!(rec.width > 0u32);
        assert!(rec.width < (pi(prec) * 2u32).recip());
    }

    #[test]
    fn lemma1_bound_on_width() {
        // width <= M(t-) - m(t-) with slope >= 1, up to solver slack.
        let prec = 160;
        let base = standard_quarter(prec);
        for (p, q) in [(0i64, 1u64), (1, 2), (1, 3)] {
            let seed = Float::with_val(prec, p) / Float::with_val(prec, q);
            let rec = plateau(&base, p, q, &seed, 1e-12, prec).unwrap();
            let enc = base
                .translated(rec.t_minus.clone())
                .displacement_extrema(p, q, default_grid(q), 1e-13, prec)
                .unwrap();
            let eps0 = enc.hi - enc.lo;
            assert!(
                rec.width <= eps0 + float(64, 4e-12),
                "Lemma 1 bound violated at {p}/{q}"
            );
        }
    }

    #[test]
    fn endpoint_consistency() {
        let prec = 160;
        let base = standard_quarter(prec);
        let rec = plateau(&base, 1, 2, &float(prec, 0.5), 1e-12, prec).unwrap();
        let m_at = |t: &Float| {
            base.translated(t.clone())
                .displacement_extrema(1, 2, 1024, 1e-13, prec)
                .unwrap()
        };
        let slope_bound = 3.0; // max F' = 1.5 squared
        let e_minus = m_at(&rec.t_minus);
        let e_plus = m_at(&rec.t_plus);
        assert!(e_minus.hi.clone().abs() < float(64, 1e-12 * (1.0 + slope_bound)));
        assert!(e_plus.lo.clone().abs() < float(64, 1e-12 * (1.0 + slope_bound)));
        // Tangency: at t-, the displacement max is ~0, everything else below.
        assert!(e_minus.lo < float(64, -0.01));
    }

    #[test]
    fn interior_enclosure_contains_fraction() {
        let prec = 160;
        let base = standard_quarter(prec);
        let rec = plateau(&base, 1, 2, &float(prec, 0.5), 1e-12, prec).unwrap();
        let mid = (rec.t_minus.clone() + &rec.t_plus) / 2u32;
        let enc = trans_enclosure(&base.translated(mid), 34, 2176, 1e-15, prec).unwrap();
        let half = Float::with_val(prec, 1) / 2u32;
        assert!(enc.contains(&half));
    }

    #[test]
    fn width_monotone_in_a_for_q1() {
        // q = 1 tongue width is exactly 2a.
        let prec = 128;
        for a_val in [0.02, 0.05, 1.0 / (4.0 * std::f64::consts::PI)] {
            let a = float(prec, a_val);
            let base = CircleLift::standard(a.clone()).unwrap();
            let rec = plateau(&base, 0, 1, &zero(prec), 1e-13, prec).unwrap();
            assert!((rec.width.clone() - a * 2u32).abs() < float(64, 1e-12));
        }
    }

    #[test]
    fn cycle_counts() {
        let prec = 128;
        let base = standard_quarter(prec);
        // t = 0 sits inside I(0/1): a sin(2 pi x) has 2 sign changes.
        let c = cycle_count_check(&base.translated(zero(prec)), 0, 1, 256, prec).unwrap();
        assert_eq!(c, CycleCount::Count(2));
        // Pure rotation at t = p/q - theta: identically zero displacement.
        let rot = CircleLift::rotation(zero(prec));
        let third = Float::with_val(prec, 1) / 3u32;
        let c = cycle_count_check(&rot.translated(third), 1, 3, 256, prec).unwrap();
        assert_eq!(c, CycleCount::Degenerate);
        // Interior of I(1/2): even count >= 2.
        let rec = plateau(&base, 1, 2, &float(prec, 0.5), 1e-12, prec).unwrap();
        let mid = (rec.t_minus + rec.t_plus) / 2u32;
        match cycle_count_check(&base.translated(mid), 1, 2, 512, prec).unwrap() {
            CycleCount::Count(n) => {
                assert!(n >= 2 && n % 2 == 0, "count {n}");
            }
            CycleCount::Degenerate => panic!("unexpected degenerate"),
        }
    }

    #[test]
    fn farey_enumeration() {
        let f = farey_fractions(5, 0.0, 1.0);
        assert!(f.contains(&(0, 1)) && f.contains(&(1, 1)));
        assert!(f.contains(&(2, 5)) && !f.contains(&(2, 4)));
        // Increasing q ordering.
        for w in f.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn tongues_2d_zero_and_quarter_slices() {
        let prec = 96;
        let a_hi = (pi(prec) * 4u32).recip();
        let slices = tongues_2d(-0.1, 0.1, &zero(prec), &a_hi, 2, 2, 1e-10, prec).unwrap();
        for s in &slices {
            let rec = s.outcome.as_ref().expect("sweep entry failed");
            if s.a.is_zero() {
                assert!(rec.width < float(64, 1e-9), "a=0 slice must be width 0");
            }
            if (s.p, s.q) == (0, 1) && !s.a.is_zero() {
                // width = 2a exactly for q = 1
                let expect = s.a.clone() * 2u32;
                assert!((rec.width.clone() - expect).abs() < float(64, 1e-9));
            }
        }
    }

    #[test]
    fn rejects_unreduced_fraction() {
        let prec = 96;
        let base = standard_quarter(prec);
        assert!(plateau(&base, 2, 4, &zero(prec), 1e-10, prec).is_err());
    }
}
