//! Complex-argument Bessel and Hankel functions of integer order, cylindrical
//! (`J_n`, `H_n^{(1)}`) and spherical (`j_n`, `h_n^{(1)}`), with derivatives,
//! logarithmic derivatives and overflow-free ratio forms.
//!
//! The public query functions return ordinary complex numbers, optionally
//! exponentially scaled. The solver works with [`Quad`], whose entries carry
//! their exponent separately and never overflow.

mod cylindrical;
mod expcomplex;
mod spherical;

pub use expcomplex::ExpComplex;

use crate::error::{Error, Result};
use num_complex::Complex64;

pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Below this modulus ascending series are used.
pub(crate) const SERIES_RADIUS: f64 = 2.0;
/// Above this modulus Hankel's expansion replaces Steed's continued fraction.
pub(crate) const HANKEL_ASYMPTOTIC: f64 = 30.0;
/// Above this modulus backward recurrence is abandoned for `J = (H1 + H2)/2`.
pub(crate) const MILLER_MAX: f64 = 2.5e4;
pub(crate) const CF_MAX_ITER_BASE: usize = 2000;
/// Relative Newton distance `|J/J'|/|z|` below which `z` counts as a zero of `J_n`.
pub(crate) const POLE_THRESHOLD: f64 = 1e-13;
/// Estimated relative error above which plain/scaled queries refuse to answer.
const ACCURACY_LIMIT: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Cylindrical,
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    Plain,
    /// `J` (and `j`) times `exp(-|Im z|)`; `H^{(1)}` (and `h^{(1)}`) times `exp(-iz)`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselQuery {
    pub family: Family,
    pub order: i64,
    pub z: Complex64,
    pub scaling: Scaling,
}

impl BesselQuery {
    pub fn cylindrical(order: i64, z: Complex64) -> Self {
        Self {
            family: Family::Cylindrical,
            order,
            z,
            scaling: Scaling::Plain,
        }
    }

    pub fn spherical(order: i64, z: Complex64) -> Self {
        Self {
            family: Family::Spherical,
            order,
            z,
            scaling: Scaling::Plain,
        }
    }

    pub fn scaled(mut self) -> Self {
        self.scaling = Scaling::Exponential;
        self
    }
}

/// Value and derivative (with respect to the argument).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselQuad {
    pub value: Complex64,
    pub derivative: Complex64,
}

/// Value and derivative in exponent-carrying form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: ExpComplex,
    pub deriv: ExpComplex,
}

impl Quad {
    pub(crate) fn from_plain(value: Complex64, deriv: Complex64) -> Self {
        Self {
            value: ExpComplex::from_complex(value),
            deriv: ExpComplex::from_complex(deriv),
        }
    }

    pub(crate) fn conj(&self) -> Self {
        Self {
            value: self.value.conj(),
            deriv: self.deriv.conj(),
        }
    }

    /// `f'/f` as an ordinary complex number.
    pub fn log_deriv(&self) -> Complex64 {
        (self.deriv / self.value).to_complex()
    }
}

/// `J_n` / `j_n` and derivative for `n >= 0`, exponent form.
pub fn j_quad(family: Family, n: usize, z: Complex64) -> Result<Quad> {
    check_arg(z)?;
    match family {
        Family::Cylindrical => cylindrical::j(n, z),
        Family::Spherical => spherical::j(n, z),
    }
}

/// `H_n^{(1)}` / `h_n^{(1)}` and derivative for `n >= 0`, exponent form.
pub fn h1_quad(family: Family, n: usize, z: Complex64) -> Result<Quad> {
    check_arg(z)?;
    match family {
        Family::Cylindrical => cylindrical::h1(n, z),
        Family::Spherical => spherical::h1(n, z),
    }
}

/// `J_n(z)`, `J_n'(z)` (or `j_n`, `j_n'`).
pub fn bessel_j(q: &BesselQuery) -> Result<BesselQuad> {
    let (n, sign) = normalize_order(q)?;
    let quad = j_quad(q.family, n, q.z)?;
    let shift = match q.scaling {
        Scaling::Plain => None,
        Scaling::Exponential => Some(ExpComplex::exp(Complex64::from(-q.z.im.abs()))),
    };
    finish(quad, shift, sign, q)
}

/// `H_n^{(1)}(z)`, `H_n^{(1)'}(z)` (or the spherical `h_n^{(1)}`).
pub fn hankel1(q: &BesselQuery) -> Result<BesselQuad> {
    let (n, sign) = normalize_order(q)?;
    let quad = h1_quad(q.family, n, q.z)?;
    let shift = match q.scaling {
        Scaling::Plain => None,
        Scaling::Exponential => Some(ExpComplex::exp(-Complex64::i() * q.z)),
    };
    finish(quad, shift, sign, q)
}

/// `J_n'(z)/J_n(z)` (or `j_n'/j_n`) without forming either factor.
///
/// Returns [`Error::PoleProximity`] when `z` is numerically a zero of `J_n`.
pub fn log_deriv_j(q: &BesselQuery) -> Result<Complex64> {
    let (n, _) = normalize_order(q)?;
    check_arg(q.z)?;
    match q.family {
        Family::Cylindrical => cylindrical::log_deriv_j(n, q.z),
        Family::Spherical => spherical::log_deriv_j(n, q.z),
    }
}

/// `H_n^{(1)'}(z)/H_n^{(1)}(z)`.
pub fn hankel1_log_deriv(q: &BesselQuery) -> Result<Complex64> {
    let (n, _) = normalize_order(q)?;
    let quad = h1_quad(q.family, n, q.z)?;
    Ok(quad.log_deriv())
}

/// `J_n(z)/H_n^{(1)}(z)`, finite whenever the ratio itself is representable.
pub fn cross_ratio_jh(q: &BesselQuery) -> Result<Complex64> {
    let (n, _) = normalize_order(q)?;
    let jq = j_quad(q.family, n, q.z)?;
    let hq = h1_quad(q.family, n, q.z)?;
    Ok((jq.value / hq.value).to_complex())
}

/// Rough relative error bound of the evaluation at `(n, z)`.
pub fn error_estimate(n: usize, z: Complex64) -> f64 {
    // Phase of exp(±iz) is only known to |z| ulps; recurrences add O(n) roundings.
    2.0 * f64::EPSILON * (1.0 + z.norm() + 0.01 * n as f64)
}

fn check_arg(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite argument {z}")));
    }
    Ok(())
}

fn normalize_order(q: &BesselQuery) -> Result<(usize, f64)> {
    check_arg(q.z)?;
    if q.order >= 0 {
        return Ok((q.order as usize, 1.0));
    }
    match q.family {
        Family::Cylindrical => {
            let n = q.order.unsigned_abs() as usize;
            Ok((n, if n.is_multiple_of(2) { 1.0 } else { -1.0 }))
        }
        Family::Spherical => Err(Error::InvalidInput(format!(
            "negative spherical order {}",
            q.order
        ))),
    }
}

fn finish(quad: Quad, shift: Option<ExpComplex>, sign: f64, q: &BesselQuery) -> Result<BesselQuad> {
    let estimate = error_estimate(q.order.unsigned_abs() as usize, q.z);
    if estimate > ACCURACY_LIMIT {
        return Err(Error::AccuracyLoss {
            estimate,
            context: format!("order {} at z = {}", q.order, q.z),
        });
    }
    let (v, d) = match shift {
        None => (quad.value, quad.deriv),
        Some(s) => (quad.value * s, quad.deriv * s),
    };
    let value = v.to_complex() * sign;
    let derivative = d.to_complex() * sign;
    if !value.is_finite() || !derivative.is_finite() {
        return Err(Error::Overflow(format!(
            "order {} at z = {} (use exponential scaling)",
            q.order, q.z
        )));
    }
    Ok(BesselQuad { value, derivative })
}

/// Modified Lentz evaluation of `a_1/(b_1 + a_2/(b_2 + ...))`.
pub(crate) fn lentz(
    a: impl Fn(usize) -> Complex64,
    b: impl Fn(usize) -> Complex64,
    max_iter: usize,
) -> Option<Complex64> {
    // Complex division squares the divisor's modulus, so TINY must stay above 1e-154.
    const TINY: f64 = 1e-150;
    let tiny = Complex64::new(TINY, 0.0);
    let mut f = tiny;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..=max_iter {
        let (ak, bk) = (a(k), b(k));
        d = bk + ak * d;
        if d.norm() < TINY {
            d = tiny;
        }
        c = bk + ak / c;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-15 {
            return Some(f);
        }
    }
    None
}

/// Forward three-term recurrence `f_{k+1} = c(k) f_k - f_{k-1}` from
/// `(f_{start-1}, f_start)` to `(f_{target-1}, f_target)`.
pub(crate) fn forward_recurrence(
    prev: ExpComplex,
    cur: ExpComplex,
    start: usize,
    target: usize,
    coeff: impl Fn(usize) -> Complex64,
) -> (ExpComplex, ExpComplex) {
    const BIG: f64 = 1e200;
    // Work on a common exponent so each step is plain complex arithmetic.
    let base = cur.exponent().max(prev.exponent());
    let mut p = prev.scaled_down(base).to_complex();
    let mut c = cur.scaled_down(base).to_complex();
    let mut shift = base;
    for k in start..target {
        let next = coeff(k) * c - p;
        p = c;
        c = next;
        let m = c.norm();
        if m > BIG {
            p /= BIG;
            c /= BIG;
            shift += BIG.ln();
        }
    }
    (ExpComplex::new(p, shift), ExpComplex::new(c, shift))
}
