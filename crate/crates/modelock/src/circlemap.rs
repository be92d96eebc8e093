//! Analytic circle-map lifts and their translated families.
//!
//! A lift is an increasing analytic `F: R -> R` with `F - Id`
//! 1-periodic. Three shapes are supported: trigonometric
//! polynomials `F(x) = x + c0 + sum_k (a_k cos 2*pi*k*x + b_k sin 2*pi*k*x)`,
//! pure rotations `x + theta`, and rotations conjugated by
//! `Psi(x) = x + eps sin(2*pi*x)`. The translated family is
//! `F_t = F + t`.

use rayon::prelude::*;
use rug::Float;

use crate::complexnum::Complex;
use crate::precision::{float, two_pi, zero};
use crate::Error;

/// Upper cap on Newton iterations when inverting the conjugacy.
const NEWTON_MAX: usize = 400;

#[derive(Clone, Debug)]
pub enum CircleLift {
    TrigPoly {
        c0: Float,
        a: Vec<Float>,
        b: Vec<Float>,
    },
    PureRotation {
        theta: Float,
    },
    ConjugatedRotation {
        theta: Float,
        epsilon: Float,
    },
}

/// A closed interval `[lo, hi]` certifying a real quantity.
#[derive(Clone, Debug)]
pub struct Enclosure {
    pub lo: Float,
    pub hi: Float,
}

impl Enclosure {
    pub fn point(v: Float) -> Self {
        Enclosure {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn width(&self) -> Float {
        self.hi.clone() - &self.lo
    }

    pub fn midpoint(&self) -> Float {
        (self.hi.clone() + &self.lo) / 2u32
    }

    pub fn contains(&self, v: &Float) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    /// Interval shifted by a real constant.
    pub fn shift(&self, s: &Float) -> Enclosure {
        Enclosure {
            lo: self.lo.clone() + s,
            hi: self.hi.clone() + s,
        }
    }

    /// Interval scaled by `1/q`.
    pub fn div_u64(&self, q: u64) -> Enclosure {
        Enclosure {
            lo: self.lo.clone() / q,
            hi: self.hi.clone() / q,
        }
    }
}

impl CircleLift {
    /// Trig-polynomial lift. Rejects coefficient sets that cannot be
    /// certified strictly increasing.
    pub fn trig_poly(c0: Float, a: Vec<Float>, b: Vec<Float>) -> Result<Self, Error> {
        if a.len() != b.len() {
            return Err(Error::InvalidMap(
                "coefficient arrays a and b must have equal length".into(),
            ));
        }
        let lift = CircleLift::TrigPoly { c0, a, b };
        if lift.l1_derivative_bound() < 1.0 {
            return Ok(lift);
        }
        // Sufficient L1 test failed; fall back to a certified grid check
        // min F' - |F''|_sup * h/2 > 0.
        let prec = lift.prec();
        let n = 8192usize;
        let dd = lift.second_derivative_sup(prec);
        let h = 1.0 / n as f64;
        let mut min_d = f64::INFINITY;
        for j in 0..n {
            let x = float(prec, j as f64 * h);
            let d = lift.deriv_base(&x, prec).to_f64();
            min_d = min_d.min(d);
        }
        if min_d - dd * h / 2.0 > 0.0 {
            Ok(lift)
        } else {
            Err(Error::InvalidMap(
                "lift is not certifiably increasing".into(),
            ))
        }
    }

    pub fn rotation(theta: Float) -> Self {
        CircleLift::PureRotation { theta }
    }

    /// `Psi o R_theta o Psi^{-1}` with `Psi(x) = x + eps sin(2 pi x)`.
    pub fn conjugated_rotation(theta: Float, epsilon: Float) -> Result<Self, Error> {
        let prec = theta.prec().max(epsilon.prec());
        let bound = epsilon.clone().abs() * two_pi(prec);
        if bound >= 1u32 {
            return Err(Error::InvalidEpsilon(epsilon.to_f64()));
        }
        Ok(CircleLift::ConjugatedRotation { theta, epsilon })
    }

    /// Standard (Arnol'd) family member `x + a sin(2 pi x)`.
    pub fn standard(a: Float) -> Result<Self, Error> {
        let prec = a.prec();
        CircleLift::trig_poly(zero(prec), vec![zero(prec)], vec![a])
    }

    pub fn prec(&self) -> u32 {
        match self {
            CircleLift::TrigPoly { c0, a, b } => a
                .iter()
                .chain(b.iter())
                .map(Float::prec)
                .fold(c0.prec(), u32::max),
            CircleLift::PureRotation { theta } => theta.prec(),
            CircleLift::ConjugatedRotation { theta, epsilon } => theta.prec().max(epsilon.prec()),
        }
    }

    /// `sum_k 2 pi k (|a_k| + |b_k|)`, an upper bound for `|F' - 1|`
    /// of a trig polynomial; 0 for rotations.
    fn l1_derivative_bound(&self) -> f64 {
        match self {
            CircleLift::TrigPoly { a, b, .. } => {
                let mut s = 0.0;
                for (k, (ak, bk)) in a.iter().zip(b.iter()).enumerate() {
                    let k = (k + 1) as f64;
                    s += 2.0 * std::f64::consts::PI * k * (ak.to_f64().abs() + bk.to_f64().abs());
                }
                s
            }
            CircleLift::PureRotation { .. } => 0.0,
            CircleLift::ConjugatedRotation { epsilon, .. } => {
                // |F' - 1| <= R - 1 with R = (1+2pi e)/(1-2pi e)
                let e = 2.0 * std::f64::consts::PI * epsilon.to_f64().abs();
                (1.0 + e) / (1.0 - e) - 1.0
            }
        }
    }

    fn second_derivative_sup(&self, _prec: u32) -> f64 {
        match self {
            CircleLift::TrigPoly { a, b, .. } => {
                let mut s = 0.0;
                for (k, (ak, bk)) in a.iter().zip(b.iter()).enumerate() {
                    let w = 2.0 * std::f64::consts::PI * (k + 1) as f64;
                    s += w * w * (ak.to_f64().abs() + bk.to_f64().abs());
                }
                s
            }
            _ => 0.0,
        }
    }

    /// Height of the straight horizontal strip on which complex
    /// evaluation is supported. `None` means every strip works.
    ///
    /// For the conjugated rotation the usable height is limited by the
    /// critical points of `Psi`: the image of the largest zero-free
    /// strip of `Psi'` covers `|Im w| < tau_c - eps sinh(2 pi tau_c)`.
    pub fn strip_height(&self, prec: u32) -> Option<Float> {
        match self {
            CircleLift::ConjugatedRotation { epsilon, .. } => {
                let e = Float::with_val(prec, epsilon.clone().abs());
                if e.is_zero() {
                    return None;
                }
                let tp = two_pi(prec);
                let inv = (tp.clone() * &e).recip();
                // tau_c = arccosh(1/(2 pi eps)) / (2 pi)
                let tau_c = inv.acosh() / &tp;
                let arg = tau_c.clone() * &tp;
                let h = tau_c - e * arg.sinh();
                Some(h)
            }
            _ => None,
        }
    }

    /// Newton inversion of `Psi(x) = x + eps sin(2 pi x)` on the reals.
    fn psi_inv(epsilon: &Float, y: &Float, prec: u32) -> Float {
        let tp = two_pi(prec);
        let eps = Float::with_val(prec, epsilon);
        let mut x = y.clone() - (y.clone() * &tp).sin() * &eps;
        let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 4));
        for _ in 0..NEWTON_MAX {
            let (s, c) = (x.clone() * &tp).sin_cos(zero(prec));
            let r = x.clone() + s * &eps - y;
            if r.clone().abs() <= tol {
                break;
            }
            let d = Float::with_val(prec, 1) + c * &eps * &tp;
            x -= r / d;
        }
        x
    }

    fn psi(epsilon: &Float, x: &Float, prec: u32) -> Float {
        let tp = two_pi(prec);
        x.clone() + (x.clone() * tp).sin() * epsilon
    }

    /// Complex Newton inversion of `Psi`; fails outside the usable strip.
    fn psi_inv_complex(epsilon: &Float, y: &Complex, prec: u32) -> Result<Complex, Error> {
        let tp = two_pi(prec);
        let eps = Float::with_val(prec, epsilon);
        let mut x = y.sub(&y.scale(&tp).sin().scale(&eps));
        let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 8));
        for _ in 0..NEWTON_MAX {
            let zt = x.scale(&tp);
            let r = x.add(&zt.sin().scale(&eps)).sub(y);
            if r.abs() <= tol {
                return Ok(x);
            }
            let d = Complex::from_real(float(prec, 1.0)).add(&zt.cos().scale(&eps).scale(&tp));
            if d.abs().to_f64() < 1e-6 {
                return Err(Error::StripExceeded);
            }
            x = x.sub(&r.div(&d));
        }
        Err(Error::StripExceeded)
    }

    pub fn eval_base(&self, x: &Float, prec: u32) -> Float {
        match self {
            CircleLift::TrigPoly { c0, a, b } => {
                let tp = two_pi(prec);
                let u = x.clone() * &tp;
                let mut acc = x.clone() + c0;
                for (k, (ak, bk)) in a.iter().zip(b.iter()).enumerate() {
                    let (s, c) = (u.clone() * (k + 1) as u32).sin_cos(zero(prec));
                    acc += c * ak + s * bk;
                }
                acc
            }
            CircleLift::PureRotation { theta } => x.clone() + theta,
            CircleLift::ConjugatedRotation { theta, epsilon } => {
                let y = Self::psi_inv(epsilon, x, prec) + theta;
                Self::psi(epsilon, &y, prec)
            }
        }
    }

    pub fn deriv_base(&self, x: &Float, prec: u32) -> Float {
        match self {
            CircleLift::TrigPoly { a, b, .. } => {
                let tp = two_pi(prec);
                let u = x.clone() * &tp;
                let mut acc = Float::with_val(prec, 1);
                for (k, (ak, bk)) in a.iter().zip(b.iter()).enumerate() {
                    let w = tp.clone() * (k + 1) as u32;
                    let (s, c) = (u.clone() * (k + 1) as u32).sin_cos(zero(prec));
                    acc += (c * bk - s * ak) * w;
                }
                acc
            }
            CircleLift::PureRotation { .. } => Float::with_val(prec, 1),
            CircleLift::ConjugatedRotation { theta, epsilon } => {
                // F'(x) = Psi'(y + theta) / Psi'(y), y = Psi^{-1}(x)
                let tp = two_pi(prec);
                let y = Self::psi_inv(epsilon, x, prec);
                let dpsi = |z: &Float| -> Float {
                    Float::with_val(prec, 1) + (z.clone() * &tp).cos() * epsilon * &tp
                };
                dpsi(&(y.clone() + theta)) / dpsi(&y)
            }
        }
    }

    pub fn eval_base_complex(&self, z: &Complex, prec: u32) -> Result<Complex, Error> {
        match self {
            CircleLift::TrigPoly { c0, a, b } => {
                let tp = two_pi(prec);
                let u = z.scale(&tp);
                let mut acc = z.add_real(c0);
                for (k, (ak, bk)) in a.iter().zip(b.iter()).enumerate() {
                    let ku = u.scale(&float(prec, (k + 1) as f64));
                    acc = acc.add(&ku.cos().scale(ak)).add(&ku.sin().scale(bk));
                }
                Ok(acc)
            }
            CircleLift::PureRotation { theta } => Ok(z.add_real(theta)),
            CircleLift::ConjugatedRotation { theta, epsilon } => {
                if let Some(h) = self.strip_height(prec) {
                    if z.im.clone().abs() >= h {
                        return Err(Error::StripExceeded);
                    }
                }
                let tp = two_pi(prec);
                let w = Self::psi_inv_complex(epsilon, z, prec)?.add_real(theta);
                Ok(w.add(&w.scale(&tp).sin().scale(epsilon)))
            }
        }
    }

    /// Attaches a translation parameter, producing `F_t = F + t`.
    pub fn translated(&self, t: Float) -> TranslatedLift {
        TranslatedLift {
            base: self.clone(),
            t,
        }
    }

    pub fn is_rotation(&self) -> bool {
        matches!(self, CircleLift::PureRotation { .. })
    }
}

#[derive(Clone, Debug)]
pub struct TranslatedLift {
    pub base: CircleLift,
    pub t: Float,
}

impl TranslatedLift {
    pub fn eval(&self, x: &Float, prec: u32) -> Float {
        self.base.eval_base(x, prec) + &self.t
    }

    pub fn deriv(&self, x: &Float, prec: u32) -> Float {
        self.base.deriv_base(x, prec)
    }

    pub fn eval_complex(&self, z: &Complex, prec: u32) -> Result<Complex, Error> {
        Ok(self.base.eval_base_complex(z, prec)?.add_real(&self.t))
    }

    /// q-fold composition `F_t^{oq}(x)`.
    pub fn iterate(&self, q: u64, x: &Float, prec: u32) -> Float {
        let mut y = x.clone();
        for _ in 0..q {
            y = self.eval(&y, prec);
        }
        y
    }

    /// Orbit value together with `(F_t^{oq})'(x)` (chain-rule product).
    pub fn iterate_with_deriv(&self, q: u64, x: &Float, prec: u32) -> (Float, Float) {
        let mut y = x.clone();
        let mut d = Float::with_val(prec, 1);
        for _ in 0..q {
            d *= self.deriv(&y, prec);
            y = self.eval(&y, prec);
        }
        (y, d)
    }

    /// `G(x) = F_t^{oq}(x) - x - p`, 1-periodic in `x`.
    pub fn displacement(&self, p: i64, q: u64, x: &Float, prec: u32) -> Float {
        self.iterate(q, x, prec) - x - Float::with_val(prec, p)
    }

    /// Displacement together with `G'(x)`.
    pub fn displacement_with_deriv(&self, p: i64, q: u64, x: &Float, prec: u32) -> (Float, Float) {
        let (y, d) = self.iterate_with_deriv(q, x, prec);
        (y - x - Float::with_val(prec, p), d - 1u32)
    }

    /// Certified enclosure `[m, M]` of the displacement extrema over one
    /// period. Grid scan of `G` and `G'`, then bisection on `G'` in every
    /// cell where the derivative changes sign; the returned interval is
    /// padded by the refinement error bound, kept below `tol`.
    pub fn displacement_extrema(
        &self,
        p: i64,
        q: u64,
        grid_n: usize,
        tol: f64,
        prec: u32,
    ) -> Result<Enclosure, Error> {
        if tol <= 0.0 {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.base.is_rotation() {
            // Constant displacement q*(theta + t) - p.
            let v = self.displacement(p, q, &zero(prec), prec);
            return Ok(Enclosure::point(v));
        }
        let n = grid_n.max(2 * q as usize).max(16);
        let scan: Vec<(Float, Float)> = (0..n)
            .into_par_iter()
            .map(|j| {
                let x = Float::with_val(prec, j as u64) / Float::with_val(prec, n as u64);
                self.displacement_with_deriv(p, q, &x, prec)
            })
            .collect();

        let mut hi = scan[0].0.clone();
        let mut lo = scan[0].0.clone();
        for (g, _) in &scan {
            if *g > hi {
                hi = g.clone();
            }
            if *g < lo {
                lo = g.clone();
            }
        }

        // Cells with a derivative sign change hold interior extrema.
        let mut pad = 0.0f64;
        for j in 0..n {
            let jn = (j + 1) % n;
            let d0 = &scan[j].1;
            let d1 = &scan[jn].1;
            let rising_max = d0.is_sign_positive() && d1.is_sign_negative();
            let falling_min = d0.is_sign_negative() && d1.is_sign_positive();
            if !(rising_max || falling_min) {
                continue;
            }
            let x_lo = j as f64 / n as f64;
            let (v, err) = self.refine_critical(p, q, x_lo, 1.0 / n as f64, tol, prec);
            if v > hi {
                hi = v.clone();
            }
            if v < lo {
                lo = v.clone();
            }
            pad = pad.max(err);
        }
        if pad > tol {
            return Err(Error::TolUnreachable { needed: tol, achieved: pad });
        }
        let pad_f = float(prec, pad) + Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 16));
        Ok(Enclosure {
            lo: lo - &pad_f,
            hi: hi + &pad_f,
        })
    }

    /// Bisection on `G'` inside one grid cell; returns the extremal
    /// value found and a bound on how far it can sit from the true
    /// critical value.
    fn refine_critical(
        &self,
        p: i64,
        q: u64,
        x_lo: f64,
        h: f64,
        tol: f64,
        prec: u32,
    ) -> (Float, f64) {
        let mut a = float(prec, x_lo);
        let mut b = float(prec, x_lo + h);
        let (_, mut da) = self.displacement_with_deriv(p, q, &a, prec);
        let (_, mut db) = self.displacement_with_deriv(p, q, &b, prec);
        let mut width = h;
        // Local curvature scale for the stopping rule.
        let mut curv = ((da.clone() - &db).abs().to_f64() / h).max(1e-300);
        let floor = 2f64.powi(-(prec as i32) + 8);
        // G is analytic, so G' is smooth inside the cell: bracketed
        // secant (Illinois weighting, bisection fallback) converges
        // superlinearly where plain bisection pays ~1 eval per bit.
        let mut wa = da.clone();
        let mut wb = db.clone();
        let mut last_side = 0i8;
        for iter in 0..(prec as usize) {
            if curv * width * width < tol / 16.0 || width < floor {
                break;
            }
            let denom = wb.clone() - &wa;
            let mut mid = if denom.is_zero() || iter % 6 == 5 {
                (a.clone() + &b) / 2u32
            } else {
                b.clone() - (b.clone() - &a) * &wb / denom
            };
            if mid <= a || mid >= b {
                mid = (a.clone() + &b) / 2u32;
            }
            let (_, dm) = self.displacement_with_deriv(p, q, &mid, prec);
            if dm.is_sign_positive() == da.is_sign_positive() {
                a = mid;
                da = dm.clone();
                wa = dm;
                if last_side == -1 {
                    wb /= 2u32;
                }
                last_side = -1;
            } else {
                b = mid;
                db = dm.clone();
                wb = dm;
                if last_side == 1 {
                    wa /= 2u32;
                }
                last_side = 1;
            }
            width = (b.clone() - &a).to_f64();
            curv = ((da.clone() - &db).abs().to_f64() / width.max(floor)).max(curv);
        }
        let mid = (a + b) / 2u32;
        let v = self.displacement(p, q, &mid, prec);
        (v, curv * width * width)
    }
}
