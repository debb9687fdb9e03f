//! Spherical Bessel `j_n` and Hankel `h_n^{(1)}` of complex argument.

use super::cylindrical::backward_sweep;
use super::expcomplex::ExpComplex;
use super::{forward_recurrence, Quad, CF_MAX_ITER_BASE, MILLER_MAX, SERIES_RADIUS};
use crate::error::{Error, Result};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn j(n: usize, z: Complex64) -> Result<Quad> {
    if z.im < 0.0 {
        return j(n, z.conj()).map(|q| q.conj());
    }
    if z.norm() == 0.0 {
        let value = if n == 0 { 1.0 } else { 0.0 };
        let deriv = if n == 1 { 1.0 / 3.0 } else { 0.0 };
        return Ok(Quad::from_plain(value.into(), deriv.into()));
    }
    let (jn, jn1) = if z.norm() <= SERIES_RADIUS {
        (series_j(n, z), series_j(n + 1, z))
    } else if z.norm() <= MILLER_MAX {
        miller_j(n, z)
    } else {
        let a = h1_pair(n + 1, z);
        let b = h1_pair(n + 1, z.conj());
        let half = Complex64::new(0.5, 0.0);
        (
            (a.0 + b.0.conj()).scale(half),
            (a.1 + b.1.conj()).scale(half),
        )
    };
    let deriv = jn.scale(Complex64::from(n as f64) / z) - jn1;
    Ok(Quad { value: jn, deriv })
}

pub fn h1(n: usize, z: Complex64) -> Result<Quad> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("spherical Hankel function at z = 0".into()));
    }
    if z.norm() < 1e-290 {
        return Err(Error::Domain(format!("|z| = {:e} too small", z.norm())));
    }
    if n == 0 {
        let (h0, h1v) = h01(z);
        return Ok(Quad {
            value: h0,
            deriv: -h1v,
        });
    }
    let (prev, cur) = h1_pair(n, z);
    let deriv = prev - cur.scale(Complex64::from((n + 1) as f64) / z);
    Ok(Quad { value: cur, deriv })
}

pub fn log_deriv_j(n: usize, z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return if n == 0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::PoleProximity {
                order: n,
                residual: 0.0,
            })
        };
    }
    let f = if z.norm() <= MILLER_MAX {
        let ratio = super::lentz(
            |k| {
                if k == 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            },
            |k| Complex64::from((2 * (n + k) + 1) as f64) / z,
            CF_MAX_ITER_BASE + 4 * (z.norm() as usize) + n,
        )
        .ok_or_else(|| Error::AccuracyLoss {
            estimate: 1.0,
            context: format!("j ratio continued fraction did not converge at n={n}, z={z}"),
        })?;
        Complex64::from(n as f64) / z - ratio
    } else {
        j(n, z)?.log_deriv()
    };
    super::cylindrical::check_pole(n, z, f)?;
    Ok(f)
}

/// Exact `h_0^{(1)}` and `h_1^{(1)}` with `exp(iz)` held in the exponent.
fn h01(z: Complex64) -> (ExpComplex, ExpComplex) {
    let e = ExpComplex::exp(I * z);
    let h0 = e.scale(-I / z);
    let h1 = e.scale(-(z + I) / (z * z));
    (h0, h1)
}

/// `(h_{n-1}, h_n)` for `n >= 1`.
fn h1_pair(n: usize, z: Complex64) -> (ExpComplex, ExpComplex) {
    let (h0, h1v) = h01(z);
    if n == 1 {
        return (h0, h1v);
    }
    forward_recurrence(h0, h1v, 1, n, |k| Complex64::from((2 * k + 1) as f64) / z)
}

/// `z^n / (2n+1)!!` in exponent form.
fn leading_power(n: usize, z: Complex64) -> ExpComplex {
    let mut acc = ExpComplex::ONE;
    for k in 1..=n {
        acc = acc.scale(z / (2 * k + 1) as f64);
    }
    acc
}

fn series_j(n: usize, z: Complex64) -> ExpComplex {
    let w = -z * z * 0.5;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..200 {
        term *= w / (k as f64 * (2 * n + 2 * k + 1) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    leading_power(n, z).scale(sum)
}

fn miller_j(n: usize, z: Complex64) -> (ExpComplex, ExpComplex) {
    let coeff = |k: usize| Complex64::from((2 * k + 1) as f64) / z;
    let mut k = (n + 1).max(z.norm().ceil() as usize) + 1;
    let mut p_prev = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    while p.norm() <= 1e12 {
        let next = coeff(k) * p - p_prev;
        p_prev = p;
        p = next;
        k += 1;
    }
    let top = k + 12;
    let (_, cap) = backward_sweep(top, coeff, |_| Complex64::new(0.0, 0.0), &[0, 1, n, n + 1]);

    // Closed forms of j_0, j_1 with exp(-iz) (the growing factor for Im z >= 0) factored out.
    let e = ExpComplex::exp(-I * z);
    let e2 = (2.0 * I * z).exp();
    let sin_part = (e2 - 1.0) / (2.0 * I);
    let cos_part = (e2 + 1.0) / 2.0;
    let j0 = e.scale(sin_part / z);
    let j1 = e.scale(sin_part / (z * z) - cos_part / z);
    let norm = if j0.ln_abs() >= j1.ln_abs() {
        j0 / cap[0]
    } else {
        j1 / cap[1]
    };
    (cap[2] * norm, cap[3] * norm)
}
