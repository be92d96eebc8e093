//! Minimal complex arithmetic over [`rug::Float`].
//!
//! Only the operations needed for strip evaluation of periodic
//! analytic maps: ring operations, `sin`/`cos`, `exp` and modulus.

use rug::Float;

use crate::precision;

#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Complex {
            re,
            im: precision::zero(prec),
        }
    }

    pub fn zero(prec: u32) -> Self {
        Complex {
            re: precision::zero(prec),
            im: precision::zero(prec),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn add(&self, rhs: &Complex) -> Complex {
        Complex {
            re: self.re.clone() + &rhs.re,
            im: self.im.clone() + &rhs.im,
        }
    }

    pub fn sub(&self, rhs: &Complex) -> Complex {
        Complex {
            re: self.re.clone() - &rhs.re,
            im: self.im.clone() - &rhs.im,
        }
    }

    pub fn mul(&self, rhs: &Complex) -> Complex {
        let re = self.re.clone() * &rhs.re - self.im.clone() * &rhs.im;
        let im = self.re.clone() * &rhs.im + self.im.clone() * &rhs.re;
        Complex { re, im }
    }

    pub fn div(&self, rhs: &Complex) -> Complex {
        let d = rhs.re.clone().square() + rhs.im.clone().square();
        let re = (self.re.clone() * &rhs.re + self.im.clone() * &rhs.im) / &d;
        let im = (self.im.clone() * &rhs.re - self.re.clone() * &rhs.im) / &d;
        Complex { re, im }
    }

    pub fn scale(&self, s: &Float) -> Complex {
        Complex {
            re: self.re.clone() * s,
            im: self.im.clone() * s,
        }
    }

    pub fn add_real(&self, s: &Float) -> Complex {
        Complex {
            re: self.re.clone() + s,
            im: self.im.clone(),
        }
    }

    pub fn neg(&self) -> Complex {
        Complex {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// |z|
    pub fn abs(&self) -> Float {
        self.re.clone().hypot(&self.im)
    }

    /// sin(x + iy) = sin x cosh y + i cos x sinh y
    pub fn sin(&self) -> Complex {
        let (sx, cx) = self.re.clone().sin_cos(precision::zero(self.prec()));
        let (shy, chy) = self.im.clone().sinh_cosh(precision::zero(self.prec()));
        Complex {
            re: sx * chy,
            im: cx * shy,
        }
    }

    /// cos(x + iy) = cos x cosh y - i sin x sinh y
    pub fn cos(&self) -> Complex {
        let (sx, cx) = self.re.clone().sin_cos(precision::zero(self.prec()));
        let (shy, chy) = self.im.clone().sinh_cosh(precision::zero(self.prec()));
        Complex {
            re: cx * chy,
            im: -(sx * shy),
        }
    }

    /// exp(x + iy) = e^x (cos y + i sin y)
    pub fn exp(&self) -> Complex {
        let ex = self.re.clone().exp();
        let (sy, cy) = self.im.clone().sin_cos(precision::zero(self.prec()));
        Complex {
            re: cy * &ex,
            im: sy * &ex,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::float;

    fn close(a: &Float, b: f64) -> bool {
        (a.to_f64() - b).abs() < 1e-12
    }

    #[test]
    fn sin_matches_exponential_formula() {
        // sin z = (e^{iz} - e^{-iz}) / 2i
        let z = Complex::new(float(128, 0.3), float(128, -0.7));
        let iz = Complex::new(-z.im.clone(), z.re.clone());
        let lhs = z.sin();
        let num = iz.exp().sub(&iz.neg().exp());
        let two_i = Complex::new(float(128, 0.0), float(128, 2.0));
        let rhs = num.div(&two_i);
        assert!(lhs.sub(&rhs).abs() < float(64, 1e-35));
    }

    #[test]
    fn restriction_to_reals() {
        let z = Complex::from_real(float(128, 1.234));
        assert!(close(&z.sin().re, 1.234f64.sin()));
        assert!(z.sin().im.is_zero());
        assert!(close(&z.cos().re, 1.234f64.cos()));
    }

    #[test]
    fn field_ops() {
        let a = Complex::new(float(128, 2.0), float(128, 1.0));
        let b = Complex::new(float(128, -1.0), float(128, 3.0));
        let p = a.mul(&b);
        assert!(close(&p.re, -5.0) && close(&p.im, 5.0));
        let q = p.div(&b);
        assert!(q.sub(&a).abs() < float(64, 1e-30));
    }
}
