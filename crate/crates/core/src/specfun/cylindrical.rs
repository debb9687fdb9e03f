//! Integer-order cylindrical Bessel `J_n` and Hankel `H_n^{(1)}` functions of
//! complex argument, returned in exponent-carrying form.
//!
//! Regions (after reflecting the lower half-plane onto the upper one):
//!
//! * `|z| <= 2`: ascending series (and the logarithmic series for `Y_0`, `Y_1`).
//! * `2 < |z| <= MILLER_MAX`: Miller backward recurrence for `J`, normalized by
//!   `exp(-iz) = J_0 + 2 Σ (-i)^k J_k`; Steed's continued fraction for
//!   `H_0'/H_0` combined with the Wronskian for `H_0` while `|z| < HANKEL_ASYMPTOTIC`.
//! * `|z| >= HANKEL_ASYMPTOTIC`: Hankel's expansion for `H^{(1)}_{0,1}` (and
//!   `H^{(2)}_{0,1}` once Miller becomes too long, where `J = (H1 + H2)/2`).
//!
//! Orders above one are reached by forward recurrence for the Hankel functions,
//! which is the stable direction for them.

use super::expcomplex::ExpComplex;
use super::{
    forward_recurrence, Quad, CF_MAX_ITER_BASE, EULER_GAMMA, HANKEL_ASYMPTOTIC, MILLER_MAX,
    SERIES_RADIUS,
};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, FRAC_PI_4, PI};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `J_n(z)` and `J_n'(z)`.
pub fn j(n: usize, z: Complex64) -> Result<Quad> {
    if z.im < 0.0 {
        return j(n, z.conj()).map(|q| q.conj());
    }
    if z.norm() == 0.0 {
        let value = if n == 0 { 1.0 } else { 0.0 };
        let deriv = if n == 1 { 0.5 } else { 0.0 };
        return Ok(Quad::from_plain(value.into(), deriv.into()));
    }
    let (jn, jn1) = if z.norm() <= SERIES_RADIUS {
        (series_j(n, z), series_j(n + 1, z))
    } else if z.norm() <= MILLER_MAX {
        miller_j(n, z)
    } else {
        let h1 = hankel_asymptotic_pair(n + 1, z, 1.0);
        let h2 = hankel_asymptotic_pair(n + 1, z, -1.0);
        let half = Complex64::new(0.5, 0.0);
        ((h1[0] + h2[0]).scale(half), (h1[1] + h2[1]).scale(half))
    };
    let deriv = jn.scale(Complex64::from(n as f64) / z) - jn1;
    Ok(Quad { value: jn, deriv })
}

/// `H_n^{(1)}(z)` and its derivative, principal branch.
pub fn h1(n: usize, z: Complex64) -> Result<Quad> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("Hankel function at z = 0".into()));
    }
    if z.norm() < 1e-290 {
        return Err(Error::Domain(format!("|z| = {:e} too small", z.norm())));
    }
    if z.im < 0.0 {
        // H1(z) = 2 J(z) - conj(H1(conj z)); H2 is the subdominant piece below the axis.
        let jq = j(n, z)?;
        let h2 = h1(n, z.conj())?.conj();
        let two = Complex64::new(2.0, 0.0);
        return Ok(Quad {
            value: jq.value.scale(two) - h2.value,
            deriv: jq.deriv.scale(two) - h2.deriv,
        });
    }
    let (h0, h1v) = if z.norm() <= SERIES_RADIUS {
        small_h01(z)
    } else if z.norm() < HANKEL_ASYMPTOTIC {
        steed_h01(z)?
    } else {
        let p = hankel_asymptotic_pair(1, z, 1.0);
        (p[0], p[1])
    };
    Ok(hankel_from_pair(n, z, h0, h1v))
}

/// `J_n'(z)/J_n(z)` by the continued fraction for `J_{n+1}/J_n`.
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
            |k| Complex64::from(2.0 * (n + k) as f64) / z,
            cf_budget(n, z),
        )
        .ok_or_else(|| Error::AccuracyLoss {
            estimate: 1.0,
            context: format!("J ratio continued fraction did not converge at n={n}, z={z}"),
        })?;
        Complex64::from(n as f64) / z - ratio
    } else {
        let q = j(n, z)?;
        (q.deriv / q.value).to_complex()
    };
    check_pole(n, z, f)?;
    Ok(f)
}

pub(crate) fn check_pole(n: usize, z: Complex64, f: Complex64) -> Result<()> {
    // Newton distance |J/J'| to the nearest zero, relative to |z|.
    let residual = 1.0 / f.norm();
    if !f.is_finite() || residual < super::POLE_THRESHOLD * z.norm() {
        return Err(Error::PoleProximity { order: n, residual });
    }
    Ok(())
}

fn cf_budget(n: usize, z: Complex64) -> usize {
    CF_MAX_ITER_BASE + 4 * (z.norm() as usize) + n
}

/// `(z/2)^n / n!` in exponent form.
pub(crate) fn leading_power(n: usize, z: Complex64) -> ExpComplex {
    let half = z * 0.5;
    let mut acc = ExpComplex::ONE;
    for k in 1..=n {
        acc = acc.scale(half / k as f64);
    }
    acc
}

fn series_j(n: usize, z: Complex64) -> ExpComplex {
    let w = -z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..200 {
        term *= w / (k as f64 * (n + k) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    leading_power(n, z).scale(sum)
}

/// Start index for backward recurrence: run the dominant solution forward from
/// `max(n, |z|)` until it has grown enough that the minimal one is resolved.
fn miller_start(n: usize, z: Complex64, coeff: impl Fn(usize) -> Complex64) -> usize {
    let mut k = n.max(z.norm().ceil() as usize) + 1;
    let mut p_prev = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    loop {
        let next = coeff(k) * p - p_prev;
        p_prev = p;
        p = next;
        k += 1;
        if p.norm() > 1e12 {
            return k + 12;
        }
    }
}

/// Runs `f_{k-1} = c(k) f_k - f_{k+1}` downward from `top`, accumulating
/// `Σ w(k) f_k` and capturing `f_k` at the requested indices in exponent form.
pub(crate) fn backward_sweep(
    top: usize,
    coeff: impl Fn(usize) -> Complex64,
    weight: impl Fn(usize) -> Complex64,
    capture: &[usize],
) -> (ExpComplex, Vec<ExpComplex>) {
    const BIG: f64 = 1e200;
    let mut shift = 0.0f64;
    let mut captured = vec![ExpComplex::ZERO; capture.len()];
    let mut f_up = Complex64::new(0.0, 0.0);
    let mut f = Complex64::new(1e-30, 0.0);
    let mut sum = weight(top) * f;
    for (slot, &idx) in capture.iter().enumerate() {
        if idx == top {
            captured[slot] = ExpComplex::new(f, shift);
        }
    }
    let mut k = top;
    while k > 0 {
        let f_down = coeff(k) * f - f_up;
        f_up = f;
        f = f_down;
        k -= 1;
        if f.norm() > BIG {
            f /= BIG;
            f_up /= BIG;
            sum /= BIG;
            shift += BIG.ln();
        }
        sum += weight(k) * f;
        for (slot, &idx) in capture.iter().enumerate() {
            if idx == k {
                captured[slot] = ExpComplex::new(f, shift);
            }
        }
    }
    (ExpComplex::new(sum, shift), captured)
}

fn miller_j(n: usize, z: Complex64) -> (ExpComplex, ExpComplex) {
    let coeff = |k: usize| Complex64::from(2.0 * k as f64) / z;
    let top = miller_start(n + 1, z, coeff);
    // Powers of -i cycle with period four.
    let weight = |k: usize| -> Complex64 {
        if k == 0 {
            return Complex64::new(1.0, 0.0);
        }
        match k % 4 {
            0 => Complex64::new(2.0, 0.0),
            1 => Complex64::new(0.0, -2.0),
            2 => Complex64::new(-2.0, 0.0),
            _ => Complex64::new(0.0, 2.0),
        }
    };
    let (sum, cap) = backward_sweep(top, coeff, weight, &[n, n + 1]);
    // exp(-iz) for Im z >= 0, kept in exponent form.
    let norm = ExpComplex::exp(-I * z) / sum;
    (cap[0] * norm, cap[1] * norm)
}

/// `H_0^{(1)}`, `H_1^{(1)}` for `|z| <= 2` from the logarithmic series of `Y_0`, `Y_1`.
fn small_h01(z: Complex64) -> (ExpComplex, ExpComplex) {
    let w = z * z * 0.25;
    let log_term = (z * 0.5).ln() + EULER_GAMMA;

    // J0, J1, and the harmonic-number sums of the Y series.
    let mut j0 = Complex64::new(1.0, 0.0);
    let mut y0_sum = Complex64::new(0.0, 0.0);
    let mut t0 = Complex64::new(1.0, 0.0);
    let mut harmonic = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        t0 *= -w / (kf * kf);
        harmonic += 1.0 / kf;
        j0 += t0;
        y0_sum -= t0 * harmonic;
        if t0.norm() < 1e-18 {
            break;
        }
    }

    // Y1 = -2/(πz) + (2/π) ln(z/2) J1 - (1/π) Σ (-1)^k (ψ(k+1)+ψ(k+2)) (z/2)^{2k+1} / (k!(k+1)!)
    let half = z * 0.5;
    let mut t1 = half;
    let mut j1 = t1;
    let mut psi_k1 = -EULER_GAMMA; // ψ(1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // ψ(2)
    let mut y1_sum = t1 * (psi_k1 + psi_k2);
    for k in 1..80 {
        let kf = k as f64;
        t1 *= -w / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);
        j1 += t1;
        y1_sum += t1 * (psi_k1 + psi_k2);
        if t1.norm() < 1e-18 * half.norm() {
            break;
        }
    }
    let y0 = FRAC_2_PI * (log_term * j0 + y0_sum);
    let h0 = ExpComplex::from_complex(j0 + I * y0);

    let y1_regular = FRAC_2_PI * (z * 0.5).ln() * j1 - y1_sum / PI;
    // -2/(πz) dominates near the origin; keep it in exponent form.
    let pole = ExpComplex::from_complex(z * FRAC_PI_2).recip().scale(-I);
    let h1 = pole + ExpComplex::from_complex(j1 + I * y1_regular);
    (h0, h1)
}

/// Steed's continued fraction for `H_0^{(1)'}/H_0^{(1)}` plus the Wronskian
/// `J_0 H_0' - J_0' H_0 = 2i/(πz)` with Miller-computed `J_0`, `J_1`.
fn steed_h01(z: Complex64) -> Result<(ExpComplex, ExpComplex)> {
    let ratio = hankel_ratio_cf(0.0, z)?;
    let (j0, j1) = miller_j(0, z);
    // J0' = -J1, so  H0 = 2i / (πz (h J0 + J1)).
    let denom = j0.scale(ratio) + j1;
    let h0 = denom.recip().scale(2.0 * I / (PI * z));
    let h1 = h0.scale(-ratio);
    Ok((h0, h1))
}

/// `H_ν^{(1)'}(z)/H_ν^{(1)}(z)` by Steed's continued fraction, `Im z >= 0`, `|z| >= 2`.
pub(crate) fn hankel_ratio_cf(nu: f64, z: Complex64) -> Result<Complex64> {
    let nu2 = nu * nu;
    let tail = super::lentz(
        |k| Complex64::from(((2 * k - 1) as f64).powi(2) / 4.0 - nu2),
        |k| 2.0 * (z + I * k as f64),
        CF_MAX_ITER_BASE * 4,
    )
    .ok_or_else(|| Error::AccuracyLoss {
        estimate: 1.0,
        context: format!("Hankel ratio continued fraction did not converge at z={z}"),
    })?;
    Ok(-0.5 / z + I + I / z * tail)
}

/// Hankel's expansion for `H^{(1)}` (`sign = +1`) or `H^{(2)}` (`sign = -1`) at
/// orders `order - 1` and `order`, extended from orders 0 and 1 by recurrence.
fn hankel_asymptotic_pair(order: usize, z: Complex64, sign: f64) -> [ExpComplex; 2] {
    let h0 = hankel_asymptotic(0.0, z, sign);
    let h1 = hankel_asymptotic(1.0, z, sign);
    if order <= 1 {
        return [h0, h1];
    }
    let (a, b) = forward_recurrence(h0, h1, 1, order, |k| Complex64::from(2.0 * k as f64) / z);
    [a, b]
}

/// Single-order Hankel asymptotic expansion with the phase factor kept in exponent form.
pub(crate) fn hankel_asymptotic(nu: f64, z: Complex64, sign: f64) -> ExpComplex {
    let mu = 4.0 * nu * nu;
    let is = I * sign;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let c = (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        let next = term * is * c / z;
        let size = next.norm();
        if size > prev || size == 0.0 {
            break;
        }
        term = next;
        sum += term;
        prev = size;
        if size < 1e-17 * sum.norm() {
            break;
        }
    }
    let phase = is * (z - nu * FRAC_PI_2 - FRAC_PI_4);
    let amp = (Complex64::from(FRAC_2_PI) / z).sqrt();
    ExpComplex::exp(phase).scale(amp * sum)
}

fn hankel_from_pair(n: usize, z: Complex64, h0: ExpComplex, h1: ExpComplex) -> Quad {
    match n {
        0 => Quad {
            value: h0,
            deriv: -h1,
        },
        _ => {
            let (prev, cur) = if n == 1 {
                (h0, h1)
            } else {
                forward_recurrence(h0, h1, 1, n, |k| Complex64::from(2.0 * k as f64) / z)
            };
            let deriv = prev - cur.scale(Complex64::from(n as f64) / z);
            Quad { value: cur, deriv }
        }
    }
}
