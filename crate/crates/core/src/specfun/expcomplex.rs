use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

const RENORM_HI: f64 = 1e150;
const RENORM_LO: f64 = 1e-150;

/// A complex number stored as `mantissa * exp(exponent)` with a real exponent.
///
/// Bessel and Hankel values at large complex arguments or large orders leave the
/// double range long before the quantities built from them do (ratios, log
/// derivatives, reflection coefficients). Carrying the exponent separately keeps
/// every intermediate finite.
#[derive(Clone, Copy, PartialEq)]
pub struct ExpComplex {
    mantissa: Complex64,
    exponent: f64,
}

impl ExpComplex {
    pub const ZERO: ExpComplex = ExpComplex {
        mantissa: Complex64::new(0.0, 0.0),
        exponent: 0.0,
    };
    pub const ONE: ExpComplex = ExpComplex {
        mantissa: Complex64::new(1.0, 0.0),
        exponent: 0.0,
    };

    pub fn new(mantissa: Complex64, exponent: f64) -> Self {
        Self { mantissa, exponent }.renormalized()
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0.0)
    }

    /// `exp(w)` for complex `w`, without evaluating the real exponential.
    pub fn exp(w: Complex64) -> Self {
        Self {
            mantissa: Complex64::from_polar(1.0, w.im),
            exponent: w.re,
        }
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.is_finite() && self.exponent.is_finite()
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.exponent
        }
    }

    pub fn abs(&self) -> f64 {
        self.ln_abs().exp()
    }

    /// Converts to an ordinary complex number; overflows to infinity and
    /// underflows to zero as the plain value would.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        if self.exponent == 0.0 {
            return self.mantissa;
        }
        let m = self.mantissa.norm();
        let unit = self.mantissa / m;
        unit * (m.ln() + self.exponent).exp()
    }

    /// Value times `exp(-shift)`.
    pub fn scaled_down(&self, shift: f64) -> Self {
        Self {
            mantissa: self.mantissa,
            exponent: self.exponent - shift,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            mantissa: self.mantissa.conj(),
            exponent: self.exponent,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.mantissa * c, self.exponent)
    }

    pub fn recip(&self) -> Self {
        Self::new(self.mantissa.inv(), -self.exponent)
    }

    fn renormalized(self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        let m = self.mantissa.norm();
        if !(RENORM_LO..=RENORM_HI).contains(&m) && m.is_finite() {
            let lm = m.ln();
            Self {
                mantissa: self.mantissa / m,
                exponent: self.exponent + lm,
            }
        } else {
            self
        }
    }
}

impl fmt::Debug for ExpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} + {}i)·e^{}",
            self.mantissa.re, self.mantissa.im, self.exponent
        )
    }
}

impl Mul for ExpComplex {
    type Output = ExpComplex;
    fn mul(self, rhs: ExpComplex) -> ExpComplex {
        ExpComplex::new(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Mul<Complex64> for ExpComplex {
    type Output = ExpComplex;
    fn mul(self, rhs: Complex64) -> ExpComplex {
        self.scale(rhs)
    }
}

impl Div for ExpComplex {
    type Output = ExpComplex;
    fn div(self, rhs: ExpComplex) -> ExpComplex {
        ExpComplex::new(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl Neg for ExpComplex {
    type Output = ExpComplex;
    fn neg(self) -> ExpComplex {
        ExpComplex {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Add for ExpComplex {
    type Output = ExpComplex;
    fn add(self, rhs: ExpComplex) -> ExpComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        // Align on the operand with the larger modulus.
        let (big, small) = if self.ln_abs() >= rhs.ln_abs() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = small.exponent - big.exponent;
        let small_m = if shift < -1400.0 {
            Complex64::new(0.0, 0.0)
        } else {
            small.mantissa * shift.exp()
        };
        ExpComplex::new(big.mantissa + small_m, big.exponent)
    }
}

impl Sub for ExpComplex {
    type Output = ExpComplex;
    fn sub(self, rhs: ExpComplex) -> ExpComplex {
        self + (-rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_arithmetic() {
        let a = ExpComplex::from_complex(Complex64::new(3.0, -4.0));
        assert_eq!(a.to_complex(), Complex64::new(3.0, -4.0));
        let b = ExpComplex::new(Complex64::new(1.0, 1.0), 800.0);
        let c = ExpComplex::new(Complex64::new(2.0, 0.0), -795.0);
        let p = (b * c).to_complex();
        let expect = Complex64::new(2.0, 2.0) * 5.0f64.exp();
        assert!((p - expect).norm() < 1e-12 * expect.norm());
        assert!((b / b).to_complex().re - 1.0 < 1e-15);
        assert!(b.to_complex().re.is_infinite());
    }

    #[test]
    fn addition_of_disparate_magnitudes() {
        let big = ExpComplex::new(Complex64::new(1.0, 0.0), 1000.0);
        let tiny = ExpComplex::new(Complex64::new(1.0, 0.0), -1000.0);
        assert_eq!((big + tiny).ln_abs(), 1000.0);
        let s = ExpComplex::from_complex(Complex64::new(1.0, 0.0))
            + ExpComplex::from_complex(Complex64::new(0.5, 0.0));
        assert_eq!(s.to_complex(), Complex64::new(1.5, 0.0));
        assert!((big - big).is_zero());
    }

    #[test]
    fn exp_keeps_modulus_out_of_mantissa() {
        let w = Complex64::new(-2000.0, 0.25);
        let e = ExpComplex::exp(w);
        assert!((e.ln_abs() + 2000.0).abs() < 1e-12);
        assert_eq!(e.to_complex(), Complex64::new(0.0, 0.0));
    }
}
