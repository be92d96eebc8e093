//! Birkhoff-average linearization, Fourier-decay modulus estimation,
//! and the sinh-bound harness for periodic strip-holomorphic functions.
//!
//! For an irrational translation number `theta` the averages
//! `Phi_n = (1/n) sum_{k<n} (F^{ok} - k theta)` converge to the
//! linearizing conjugacy `Phi` with `Phi o F = Phi + theta`. The decay
//! rate of the Fourier coefficients of `Phi - Id` measures the width
//! of a horizontal strip of analyticity; `-slope/(2 pi)` of the
//! log-coefficient line is reported as the half-modulus estimate.
//!
//! ```
//! use modelock::herman::{conjugacy_fourier, modulus_estimate, SampledConjugacy};
//! use modelock::precision::{float, two_pi, zero};
//! use rug::Float;
//!
//! // Synthetic conjugacy with known decay rate tau0 = 0.15.
//! let (prec, n, tau0) = (192, 512, 0.15);
//! let tp = two_pi(prec);
//! let samples: Vec<Float> = (0..n)
//!     .map(|j| {
//!         let x = Float::with_val(prec, j as u64) / Float::with_val(prec, n as u64);
//!         let mut acc = x.clone();
//!         for k in 1..=20u32 {
//!             acc += (x.clone() * &tp * k).sin() * (float(prec, -tau0) * &tp * k).exp();
//!         }
//!         acc
//!     })
//!     .collect();
//! let phi = SampledConjugacy::from_samples(samples, 1, zero(prec));
//! let est = modulus_estimate(&conjugacy_fourier(&phi, 24).unwrap(), 2, 12).unwrap();
//! assert!((est.tau_hat - tau0).abs() < 0.003);
//! ```

use rayon::prelude::*;
use rug::Float;

use crate::circlemap::CircleLift;
use crate::complexnum::Complex;
use crate::precision::{float, two_pi, zero};
use crate::Error;

/// The Birkhoff average sampled on a uniform grid over one period.
#[derive(Clone, Debug)]
pub struct SampledConjugacy {
    /// `Phi(j / N)` for `j = 0..N`.
    pub samples: Vec<Float>,
    pub averaging_depth: u64,
    pub theta: Float,
}

impl SampledConjugacy {
    pub fn from_samples(samples: Vec<Float>, averaging_depth: u64, theta: Float) -> Self {
        SampledConjugacy {
            samples,
            averaging_depth,
            theta,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    /// Whether the sampled map is nondecreasing across the period
    /// (including the wrap `Phi(x+1) = Phi(x) + 1`). May fail for small
    /// averaging depths; callers treat that as a warning.
    pub fn is_monotone(&self) -> bool {
        let n = self.samples.len();
        for w in self.samples.windows(2) {
            if w[1] < w[0] {
                return false;
            }
        }
        if n >= 2 {
            let wrap = self.samples[0].clone() + 1u32;
            if wrap < self.samples[n - 1] {
                return false;
            }
        }
        true
    }
}

/// Pointwise Birkhoff average `(1/n) sum_{k=0}^{n-1} (F^{ok}(x) - k theta)`.
pub fn birkhoff_phi_at(
    base: &CircleLift,
    theta: &Float,
    n: u64,
    x: &Float,
    prec: u32,
) -> Float {
    let map = base.translated(zero(prec));
    let mut acc = zero(prec);
    let mut y = x.clone();
    for _ in 0..n {
        acc += &y;
        y = map.eval(&y, prec);
    }
    // sum(k theta) = theta n(n-1)/2
    let ksum = Float::with_val(prec, n) * Float::with_val(prec, n.saturating_sub(1)) / 2u32;
    (acc - ksum * theta) / Float::with_val(prec, n)
}

/// Samples the raw Birkhoff average on `n_grid` points. No
/// normalization is applied; comparisons against a reference conjugacy
/// must allow one free additive constant.
pub fn birkhoff_phi(
    base: &CircleLift,
    theta: &Float,
    n: u64,
    n_grid: usize,
    prec: u32,
) -> SampledConjugacy {
    let samples: Vec<Float> = (0..n_grid)
        .into_par_iter()
        .map(|j| {
            let x = Float::with_val(prec, j as u64) / Float::with_val(prec, n_grid as u64);
            birkhoff_phi_at(base, theta, n, &x, prec)
        })
        .collect();
    SampledConjugacy {
        samples,
        averaging_depth: n,
        theta: theta.clone(),
    }
}

/// Discrete Fourier coefficients of `Phi - Id` for `k = -k_max..=k_max`.
pub fn conjugacy_fourier(phi: &SampledConjugacy, k_max: usize) -> Result<Vec<(i64, Complex)>, Error> {
    let n = phi.grid_size();
    if n < 4 * k_max {
        return Err(Error::Config(format!(
            "grid {n} too coarse for k_max {k_max} (need >= 4*k_max)"
        )));
    }
    let prec = phi.samples.iter().map(Float::prec).max().unwrap_or(64);
    // Periodic part g(x_j) = Phi(x_j) - x_j.
    let g: Vec<Float> = phi
        .samples
        .iter()
        .enumerate()
        .map(|(j, s)| s.clone() - Float::with_val(prec, j as u64) / Float::with_val(prec, n as u64))
        .collect();
    // Twiddle table e^{-2 pi i m / n}, m = 0..n.
    let tp = two_pi(prec);
    let table: Vec<(Float, Float)> = (0..n)
        .into_par_iter()
        .map(|m| {
            let ang = tp.clone() * Float::with_val(prec, m as u64) / Float::with_val(prec, n as u64);
            ang.sin_cos(zero(prec))
        })
        .collect();
    let ks: Vec<i64> = (-(k_max as i64)..=k_max as i64).collect();
    let coeffs: Vec<(i64, Complex)> = ks
        .into_par_iter()
        .map(|k| {
            let mut re = zero(prec);
            let mut im = zero(prec);
            for (j, gj) in g.iter().enumerate() {
                let m = ((j as i64 * k).rem_euclid(n as i64)) as usize;
                let (s, c) = &table[m];
                re += gj.clone() * c;
                im -= gj.clone() * s;
            }
            let nn = Float::with_val(prec, n as u64);
            (k, Complex::new(re / &nn, im / &nn))
        })
        .collect();
    Ok(coeffs)
}

/// Half-modulus estimate from the Fourier-decay slope.
#[derive(Clone, Debug)]
pub struct ModulusEstimate {
    pub tau_hat: f64,
    pub fit_slope: f64,
    pub fit_intercept: f64,
    pub k_lo: usize,
    pub k_hi: usize,
    /// Root-mean-square residual of the fit in log-coefficient space.
    pub residual: f64,
    /// Spectrum is entirely at the noise floor (identically linearizable
    /// map, e.g. a pure rotation): tau is effectively infinite.
    pub sentinel_infinite: bool,
}

/// Least-squares line through `(k, log|c_k|)` over the fit window.
/// Coefficients at or below the noise floor `2^(-P/2)` are excluded.
pub fn modulus_estimate(
    coeffs: &[(i64, Complex)],
    k_fit_lo: usize,
    k_fit_hi: usize,
) -> Result<ModulusEstimate, Error> {
    if k_fit_lo < 1 || k_fit_hi < k_fit_lo {
        return Err(Error::Config("bad fit window".into()));
    }
    let prec = coeffs
        .iter()
        .map(|(_, c)| c.prec())
        .max()
        .ok_or_else(|| Error::Config("empty spectrum".into()))?;
    let floor = 2f64.powi(-(prec as i32) / 2);
    let above_floor_anywhere = coeffs
        .iter()
        .any(|(k, c)| *k >= 1 && c.abs().to_f64() > floor);
    if !above_floor_anywhere {
        return Ok(ModulusEstimate {
            tau_hat: f64::INFINITY,
            fit_slope: 0.0,
            fit_intercept: 0.0,
            k_lo: k_fit_lo,
            k_hi: k_fit_hi,
            residual: 0.0,
            sentinel_infinite: true,
        });
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (k, c) in coeffs {
        if *k >= k_fit_lo as i64 && *k <= k_fit_hi as i64 {
            let mag = c.abs().to_f64();
            if mag > floor {
                pts.push((*k as f64, mag.ln()));
            }
        }
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientSpectrum);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let rss: f64 = pts
        .iter()
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let residual = (rss / n).sqrt();
    Ok(ModulusEstimate {
        tau_hat: (-slope / (2.0 * std::f64::consts::PI)).max(0.0),
        fit_slope: slope,
        fit_intercept: intercept,
        k_lo: k_fit_lo,
        k_hi: k_fit_hi,
        residual,
        sentinel_infinite: false,
    })
}

/// Synthetic Herman-ring instance with exact conjugacy
/// `Psi(x) = x + eps sin(2 pi x)`; `Trans = theta` by construction.
pub fn make_conjugated_rotation(theta: Float, epsilon: Float) -> Result<CircleLift, Error> {
    if epsilon.is_zero() {
        return Ok(CircleLift::rotation(theta));
    }
    CircleLift::conjugated_rotation(theta, epsilon)
}

/// Built-in test functions for the sinh-bound harness. All are
/// 1-periodic, holomorphic on any horizontal strip, and vanish on the
/// progressions `a + k p/q` and `b + k p/q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lemma6Function {
    Zero,
    /// `G0(z) = sin(pi q (z-a)) sin(pi q (z-b))`
    SineProduct,
    /// `G0(z) * e^{2 pi i z}` (bounded holomorphic multiplier on the strip)
    SineProductExp,
}

#[derive(Clone, Debug)]
pub struct Lemma6Report {
    pub max_real: Float,
    pub sup_strip: Float,
    pub sinh_factor_sq: Float,
    pub lhs: Float,
    pub rhs: Float,
    pub holds: bool,
}

fn lemma6_eval(f: Lemma6Function, q: u64, a: &Float, b: &Float, z: &Complex, prec: u32) -> Complex {
    match f {
        Lemma6Function::Zero => Complex::zero(prec),
        Lemma6Function::SineProduct | Lemma6Function::SineProductExp => {
            let piq = crate::precision::pi(prec) * Float::with_val(prec, q);
            let za = z.add_real(&-a.clone()).scale(&piq);
            let zb = z.add_real(&-b.clone()).scale(&piq);
            let g0 = za.sin().mul(&zb.sin());
            if f == Lemma6Function::SineProductExp {
                let tp = two_pi(prec);
                // e^{2 pi i z} = exp(i * 2 pi z)
                let iz = Complex::new(-z.im.clone() * &tp, z.re.clone() * &tp);
                g0.mul(&iz.exp())
            } else {
                g0
            }
        }
    }
}

/// Evaluates both sides of
/// `max_R |G| <= sup_{boundary of S(tau')} |G| / sinh(pi q tau')^2`.
///
/// The strip supremum is taken on the two boundary lines only: for
/// 1-periodic holomorphic functions the maximum modulus over the strip
/// occurs there.
pub fn lemma6_bound_check(
    q: u64,
    tau_prime: f64,
    a: f64,
    b: f64,
    function: Lemma6Function,
    strip_grid: usize,
    prec: u32,
) -> Result<Lemma6Report, Error> {
    if tau_prime <= 0.0 {
        return Err(Error::Config("tau_prime must be positive".into()));
    }
    let n = strip_grid.max(16);
    let af = float(prec, a);
    let bf = float(prec, b);
    let tau = float(prec, tau_prime);

    let line_max = |im: &Float| -> Float {
        (0..n)
            .into_par_iter()
            .map(|j| {
                let x = Float::with_val(prec, j as u64) / Float::with_val(prec, n as u64);
                let z = Complex::new(x, im.clone());
                lemma6_eval(function, q, &af, &bf, &z, prec).abs()
            })
            .reduce(|| zero(prec), |x, y| if y > x { y } else { x })
    };

    let max_real = line_max(&zero(prec));
    let top = line_max(&tau);
    let bottom = line_max(&(-tau.clone()));
    let sup_strip = if top > bottom { top } else { bottom };

    let piq = crate::precision::pi(prec) * Float::with_val(prec, q);
    let sinh_sq = (piq * &tau).sinh().square();
    let rhs = sup_strip.clone() / &sinh_sq;
    let holds = max_real <= rhs;
    Ok(Lemma6Report {
        lhs: max_real.clone(),
        rhs: rhs.clone(),
        max_real,
        sup_strip,
        sinh_factor_sq: sinh_sq,
        holds,
    })
}
