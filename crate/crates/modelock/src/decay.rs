//! End-to-end decay experiment: plateau lengths along the continued-
//! fraction convergents of theta, slopes `(1/q_n) log l_{p_n/q_n}`,
//! and comparison against the `-2 pi tau` bound.
//!
//! ```
//! use modelock::decay::univalence_oracle_tau;
//!
//! // Psi(z) = z + eps sin(2 pi z): the derivative-zero candidate is
//! // arccosh(1/(2 pi eps))/(2 pi), about 0.1655 at eps = 0.1.
//! let tau = univalence_oracle_tau(0.1, 256);
//! assert!(tau > 0.15 && tau < 0.17);
//! assert!(univalence_oracle_tau(0.15, 256) < tau);
//! ```

use rayon::prelude::*;
use rug::Float;

use crate::circlemap::CircleLift;
use crate::contfrac::cf_expand;
use crate::locking::{plateau, WidthFlag};
use crate::precision::{float, PrecisionPolicy};
use crate::rotation::trans_enclosure;
use crate::Error;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Ceiling returned by [`univalence_oracle_tau`] when the strip is
/// unbounded (epsilon -> 0).
pub const TAU_CEILING: f64 = 8.0;

#[derive(Clone, Debug)]
pub struct DecayRow {
    pub n: usize,
    pub p: i64,
    pub q: u64,
    pub width: Float,
    /// `ln(width) / q`; `None` when the width is zero or noise-level.
    pub slope: Option<f64>,
    /// `|theta - p/q|`
    pub gap: Float,
    /// `width / gap` (Corollary 1 rate), `None` when slope is.
    pub corollary_ratio: Option<f64>,
    pub precision_bits: u32,
    pub tol: f64,
    pub flag: WidthFlag,
    /// Row failed outright; message kept, numeric fields are sentinels.
    pub failure: Option<String>,
}

impl DecayRow {
    /// Theorem-direction verdict: `slope <= bound + slack`.
    pub fn verdict(&self, bound: f64, slack: f64) -> Option<bool> {
        self.slope.map(|s| s <= bound + slack)
    }
}

#[derive(Clone, Debug)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub theta: Float,
    pub tau_reference: f64,
    /// `-2 pi tau_reference`
    pub bound: f64,
    pub slack: f64,
    /// Where `tau_reference` came from (`cli`, `oracle`, `fourier`).
    pub tau_source: String,
}

impl DecayReport {
    pub fn verdicts(&self) -> Vec<Option<bool>> {
        self.rows
            .iter()
            .map(|r| r.verdict(self.bound, self.slack))
            .collect()
    }
}

fn row_tol(q: u64, tau_reference: f64, bits: u32) -> f64 {
    let floor = 2f64.powi(-(bits as i32) + 64);
    if tau_reference.is_finite() && tau_reference > 0.0 {
        // Expected width scale e^{-2 pi tau q}, resolved 10 decimal
        // digits below it.
        (-(TWO_PI) * tau_reference * q as f64).exp() * 1e-10
    } else {
        1e-30
    }
    .max(floor)
}

/// Runs `locking::plateau` along the convergents `p_n/q_n` of `theta`
/// for `n = 0..=n_max`, skipping repeated denominators (`q_0 = q_1 = 1`
/// for the golden mean). Rows that come back below-resolution are
/// retried once at doubled `bits_per_q`.
pub fn decay_report(
    base: &CircleLift,
    theta: &Float,
    n_max: usize,
    tau_reference: f64,
    slack: f64,
    policy: &PrecisionPolicy,
) -> Result<DecayReport, Error> {
    if n_max < 2 {
        return Err(Error::Config("n_max must be at least 2".into()));
    }
    let cf_prec = theta.prec().max(256);
    let cf = cf_expand(theta, n_max, cf_prec)?;
    if cf.convergents.len() < n_max + 1 {
        return Err(Error::Config(format!(
            "theta only supports {} certified convergents, need {}",
            cf.convergents.len(),
            n_max + 1
        )));
    }

    // Dedupe by q, keeping the later (better) convergent.
    let mut picked: Vec<(usize, i64, u64)> = Vec::new();
    for (n, r) in cf.convergents.iter().enumerate().take(n_max + 1) {
        let p = r.p_i64().ok_or_else(|| Error::Config("p overflow".into()))?;
        let q = r.q_u64().ok_or_else(|| Error::Config("q overflow".into()))?;
        if let Some(last) = picked.last_mut() {
            if last.2 == q {
                *last = (n, p, q);
                continue;
            }
        }
        picked.push((n, p, q));
    }

    let rows: Vec<DecayRow> = picked
        .into_par_iter()
        .map(|(n, p, q)| {
            let bits = policy.effective_bits(q);
            let tol = row_tol(q, tau_reference, bits);
            let seed = Float::with_val(bits, p) / Float::with_val(bits, q)
                - Float::with_val(bits, theta);
            let mut attempt = plateau(base, p, q, &seed, tol, bits);
            if let Ok(rec) = &attempt {
                if rec.flag == WidthFlag::BelowResolution {
                    let policy2 = policy.escalated();
                    let bits2 = policy2.effective_bits(q);
                    let tol2 = row_tol(q, tau_reference, bits2);
                    let seed2 = Float::with_val(bits2, p) / Float::with_val(bits2, q)
                        - Float::with_val(bits2, theta);
                    if let Ok(rec2) = plateau(base, p, q, &seed2, tol2, bits2) {
                        attempt = Ok(rec2);
                    }
                }
            }
            let theta_q = Float::with_val(theta.prec().max(128), theta);
            let gap = (theta_q.clone() - Float::with_val(theta_q.prec(), p) / q).abs();
            match attempt {
                Ok(rec) => {
                    let usable = rec.flag == WidthFlag::Ok && rec.width > 0u32;
                    let slope = if usable {
                        Some(rec.width.clone().ln().to_f64() / q as f64)
                    } else {
                        None
                    };
                    let ratio = if usable {
                        Some((rec.width.clone() / &gap).to_f64())
                    } else {
                        None
                    };
                    DecayRow {
                        n,
                        p,
                        q,
                        width: rec.width,
                        slope,
                        gap,
                        corollary_ratio: ratio,
                        precision_bits: rec.precision_bits,
                        tol: rec.tol,
                        flag: rec.flag,
                        failure: None,
                    }
                }
                Err(e) => DecayRow {
                    n,
                    p,
                    q,
                    width: float(64, -1.0),
                    slope: None,
                    gap,
                    corollary_ratio: None,
                    precision_bits: bits,
                    tol,
                    flag: WidthFlag::BelowResolution,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();

    let bound = if tau_reference.is_finite() {
        -TWO_PI * tau_reference
    } else {
        f64::NEG_INFINITY
    };
    Ok(DecayReport {
        rows,
        theta: theta.clone(),
        tau_reference,
        bound,
        slack,
        tau_source: "caller".into(),
    })
}

#[derive(Clone, Debug)]
pub struct CorollaryCheck {
    /// `(n, width/gap)` for rows with a usable width.
    pub ratios: Vec<(usize, f64)>,
    /// Ratio strictly decreasing over the last half of the valid rows.
    pub decreasing_last_half: bool,
    /// `width * q^2` never exceeds its maximum over the first half.
    pub width_q2_bounded: bool,
}

/// Corollary 1 rate check: `l / |theta - p/q|` should decay.
pub fn corollary_check(report: &DecayReport) -> Result<CorollaryCheck, Error> {
    let ratios: Vec<(usize, f64)> = report
        .rows
        .iter()
        .filter_map(|r| r.corollary_ratio.map(|v| (r.n, v)))
        .collect();
    if ratios.len() < 4 {
        return Err(Error::InsufficientRows {
            needed: 4,
            got: ratios.len(),
        });
    }
    let half = ratios.len() / 2;
    let decreasing_last_half = ratios[half..].windows(2).all(|w| w[1].1 < w[0].1);

    let wq2: Vec<f64> = report
        .rows
        .iter()
        .filter(|r| r.corollary_ratio.is_some())
        .map(|r| r.width.to_f64() * (r.q as f64) * (r.q as f64))
        .collect();
    let early_max = wq2[..half.max(1)]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let width_q2_bounded = wq2.iter().all(|v| *v <= early_max * (1.0 + 1e-9));
    Ok(CorollaryCheck {
        ratios,
        decreasing_last_half,
        width_q2_bounded,
    })
}

fn psi_complex(epsilon: f64, x: f64, y: f64) -> (f64, f64) {
    // z + eps sin(2 pi z), sin(a+bi) = sin a cosh b + i cos a sinh b
    let (a, b) = (TWO_PI * x, TWO_PI * y);
    (
        x + epsilon * a.sin() * b.cosh(),
        y + epsilon * a.cos() * b.sinh(),
    )
}

fn boundary_injective(epsilon: f64, tau: f64, grid: usize) -> bool {
    // Images of a grid on both boundary lines, one period; injectivity
    // mod the covering translation w -> w + 1.
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * grid);
    for sgn in [1.0, -1.0] {
        for j in 0..grid {
            let x = j as f64 / grid as f64;
            pts.push(psi_complex(epsilon, x, sgn * tau));
        }
    }
    let min_sep = 1e-6 / grid as f64;
    for i in 0..pts.len() {
        for k in (i + 1)..pts.len() {
            // Adjacent samples on the same line are legitimately close.
            let same_line = (i < grid) == (k < grid);
            let ji = i % grid;
            let jk = k % grid;
            let neighbor = same_line
                && (ji.abs_diff(jk) <= 1 || ji.abs_diff(jk) == grid - 1);
            if neighbor {
                continue;
            }
            for shift in [-1.0, 0.0, 1.0] {
                let dx = pts[i].0 - pts[k].0 + shift;
                let dy = pts[i].1 - pts[k].1;
                if dx * dx + dy * dy < min_sep * min_sep {
                    return false;
                }
            }
        }
    }
    true
}

/// Largest tau* (to 1e-4) such that `Psi(z) = z + eps sin(2 pi z)` has
/// nonvanishing derivative on `S(tau*)` and is injective on a boundary
/// test grid. Derivative condition alone gives the candidate
/// `tau_c = arccosh(1/(2 pi eps)) / (2 pi)`.
pub fn univalence_oracle_tau(epsilon: f64, grid: usize) -> f64 {
    let eps = epsilon.abs();
    if TWO_PI * eps >= 1.0 {
        return 0.0;
    }
    if eps < 1e-12 {
        return TAU_CEILING;
    }
    let tau_c = (1.0 / (TWO_PI * eps)).acosh() / TWO_PI;
    let grid = grid.max(64);
    if boundary_injective(eps, tau_c, grid) {
        return tau_c;
    }
    let (mut lo, mut hi) = (0.0f64, tau_c);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if boundary_injective(eps, mid, grid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Finds `t0` with `Trans(base + t0) = theta` by monotone bisection on
/// the translation-number enclosure, sharpening `q` along `q_schedule`
/// until the enclosure width drops below `stop_width`.
pub fn tune_translation(
    base: &CircleLift,
    theta: &Float,
    q_schedule: &[u64],
    stop_width: f64,
    tol: f64,
    prec: u32,
) -> Result<Float, Error> {
    let mut lo = theta.clone() - 1u32;
    let mut hi = theta.clone() + 1u32;
    let mut t = theta.clone();
    for &q in q_schedule {
        let grid = crate::locking::default_grid(q);
        loop {
            let enc = trans_enclosure(&base.translated(t.clone()), q, grid, tol, prec)?;
            if enc.hi < *theta {
                lo = t.clone();
            } else if enc.lo > *theta {
                hi = t.clone();
            } else {
                // Enclosure brackets theta at this q; go deeper.
                if enc.width() < stop_width {
                    return Ok(t);
                }
                break;
            }
            t = (lo.clone() + &hi) / 2u32;
            if (hi.clone() - &lo).abs() < float(prec, 2f64.powi(-(prec as i32) + 8)) {
                break;
            }
        }
    }
    Ok(t)
}
