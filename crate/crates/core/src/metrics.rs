//! Measured quantities of the construction: boundary trace gaps, the
//! NtD operator-norm difference, conormal norms at the lining, the gap to a
//! sound-hard obstacle, small-inclusion norms, and log-log rate fits.

use crate::error::{Error, Result};
use crate::material::CloakConfig;
use crate::sobolev::{hs_norm, rescale_density, ModalDensity, SobolevIndex};
use crate::solver::{
    small_inclusion_field, sound_hard_mode, CloakLadder, InclusionProblem, LayeredSolution,
    ProblemKind,
};
use crate::Dimension;
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// Hard cap on the number of modes examined by the operator norm.
pub const MAX_MODES: usize = 2000;
/// Relative size below which a mode no longer contributes.
pub const TAIL_TOLERANCE: f64 = 1e-14;
/// Relative change tolerated when the truncation order is doubled.
pub const DOUBLING_TOLERANCE: f64 = 1e-10;

const L2_PANELS: usize = 64;
const L2_NODES: usize = 8;

/// One point of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSample {
    pub parameter: f64,
    pub value: f64,
    pub n_max: usize,
    pub warnings: Vec<String>,
}

impl SweepSample {
    pub fn new(parameter: f64, value: f64, n_max: usize) -> Self {
        Self {
            parameter,
            value,
            n_max,
            warnings: Vec::new(),
        }
    }
}

/// Least-squares line through `(log₁₀ parameter, log₁₀ value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

/// Broadband probe: `1/(1+n²)` for `|n| ≤ 8` in 2D, `1/(1+n(n+1))` for `n ≤ 6` and every `m` in 3D.
pub fn default_probe(dim: Dimension, radius: f64) -> Result<ModalDensity> {
    let top = match dim {
        Dimension::Two => 8,
        Dimension::Three => 6,
    };
    let per: Vec<Complex64> = (0..=top)
        .map(|n| Complex64::new(1.0 / (1.0 + dim.eigenvalue(n)), 0.0))
        .collect();
    ModalDensity::from_orders(dim, radius, &per)
}

fn check_psi(c: &CloakConfig, psi: &ModalDensity) -> Result<()> {
    if psi.dimension() != c.dim {
        return Err(Error::InvalidInput("psi has the wrong dimension".into()));
    }
    if (psi.radius() - c.radius).abs() > 1e-12 * c.radius {
        return Err(Error::InvalidInput(format!(
            "psi lives on radius {}, expected R = {}",
            psi.radius(),
            c.radius
        )));
    }
    Ok(())
}

fn per_mode(psi: &ModalDensity, f: impl Fn(usize) -> Result<Complex64>) -> Result<ModalDensity> {
    let factors = (0..psi.rows().len())
        .map(|n| {
            if psi.row(n).iter().all(|v| v.norm() == 0.0) {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                f(n)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(psi.scale_orders(|n| factors[n]))
}

/// `‖u_ρ − u_0‖_{H^{1/2}(∂B_R)}`.
pub fn trace_gap(c: &CloakConfig, psi: &ModalDensity) -> Result<f64> {
    c.validate()?;
    check_psi(c, psi)?;
    let ladder = CloakLadder::new(c);
    let gap = per_mode(psi, |n| Ok(ladder.mode(n)?.transfer.gap))?;
    Ok(hs_norm(&gap, SobolevIndex::HALF))
}

/// Operator norm and the truncation that certified it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNorm {
    pub value: f64,
    pub n_max: usize,
    pub argmax: usize,
}

/// `sup_n (1+λ_n/R²)^{1/2} |d_n − d_n⁰|`, the `H^{−1/2} → H^{1/2}` norm of the NtD difference.
pub fn ntd_diff_opnorm(c: &CloakConfig) -> Result<f64> {
    Ok(ntd_diff_opnorm_report(c)?.value)
}

pub fn ntd_diff_opnorm_report(c: &CloakConfig) -> Result<OperatorNorm> {
    c.validate()?;
    let ladder = CloakLadder::new(c);
    let r2 = c.radius * c.radius;
    let term = |n: usize| -> Result<f64> {
        let g = ladder.mode(n)?.transfer.gap;
        Ok((1.0 + c.dim.eigenvalue(n) / r2).sqrt() * g.norm())
    };
    let start = (c.omega * c.radius).ceil() as usize + 20;
    let mut best = 0.0f64;
    let mut argmax = 0;
    let mut quiet = 0;
    let mut n = 0;
    loop {
        if n > MAX_MODES {
            return Err(Error::TruncationUnconverged(MAX_MODES));
        }
        let t = term(n)?;
        if t > best {
            best = t;
            argmax = n;
        }
        quiet = if t < TAIL_TOLERANCE * best || (t == 0.0 && best == 0.0) {
            quiet + 1
        } else {
            0
        };
        if n >= start && quiet >= 3 {
            break;
        }
        n += 1;
    }
    let n_max = n;
    let mut doubled = best;
    for m in n_max + 1..=(2 * n_max).min(MAX_MODES) {
        doubled = doubled.max(term(m)?);
    }
    if doubled > 0.0 && (doubled - best) / doubled > DOUBLING_TOLERANCE {
        return Err(Error::TruncationUnconverged(n_max));
    }
    Ok(OperatorNorm {
        value: best,
        n_max,
        argmax,
    })
}

/// Conormal derivative `σ ∂_r u` on the outer side of the obstacle or lining, as a density on that sphere.
pub fn conormal_density(sol: &LayeredSolution) -> Result<ModalDensity> {
    let r = sol.layers.last().map(|l| l.inner).unwrap_or(0.0);
    let zero = Complex64::new(0.0, 0.0);
    let on_sphere = rescale_density(&sol.data, r)?;
    match sol.kind {
        ProblemKind::Cloak => Ok(on_sphere.scale_orders(|n| sol.omega * sol.transfers[n].conormal)),
        ProblemKind::SoundHard => Ok(on_sphere.scale_orders(|_| zero)),
        _ => Err(Error::InvalidInput(
            "solution has no inner interface".into(),
        )),
    }
}

/// `H^s` norm of the conormal derivative at the lining, carried to the unit sphere.
pub fn conormal_norm(c: &CloakConfig, psi: &ModalDensity, s: SobolevIndex) -> Result<f64> {
    c.validate()?;
    check_psi(c, psi)?;
    let ladder = CloakLadder::new(c);
    let density = per_mode(psi, |n| Ok(c.omega * ladder.mode(n)?.transfer.conormal))?;
    Ok(hs_norm(&rescale_density(&density, 1.0)?, s))
}

/// Same as [`conormal_norm`] for an already solved problem.
pub fn solution_conormal_norm(sol: &LayeredSolution, s: SobolevIndex) -> Result<f64> {
    Ok(hs_norm(&rescale_density(&conormal_density(sol)?, 1.0)?, s))
}

/// `‖u_sh − u_ρ‖_{H^{1/2}(∂B_R)}` with `u_sh` the field of the sound-hard annulus `ρ < |x| < R`.
pub fn sound_hard_gap(c: &CloakConfig, psi: &ModalDensity) -> Result<f64> {
    c.validate()?;
    check_psi(c, psi)?;
    let ladder = CloakLadder::new(c);
    let family = c.dim.family();
    let omega = Complex64::from(c.omega);
    let diff = per_mode(psi, |n| {
        let m = ladder.mode(n)?;
        let hard = sound_hard_mode(family, c.omega, c.radius, c.rho, n)?;
        // Γ_s − Γ_n = κ W(ωρ) / (den_e g'(ωρ)); the traces differ by (Γ_s − Γ_n) W(ωR) / (ω D_n D_s).
        let dgamma = (m.den_e * m.hp_e).recip().scale(m.kappa * m.w_e);
        Ok((dgamma / (m.denom * hard.denominator).scale(omega)).to_complex() * m.w_r)
    })?;
    Ok(hs_norm(&diff, SobolevIndex::HALF))
}

/// `(‖W‖_{H^{1/2}(∂B_{r₀})}, ‖W‖_{H^{1/2}(∂B_{r₂})}, ‖W‖_{L²(B_{r₂}∖B_{r₀})})`.
pub fn inclusion_gap_norms(p: &InclusionProblem) -> Result<(f64, f64, f64)> {
    let sol = small_inclusion_field(p)?;
    let inner = hs_norm(&sol.trace(p.r0)?, SobolevIndex::HALF);
    let outer = hs_norm(&sol.trace(p.r2)?, SobolevIndex::HALF);
    let (angular, power) = match sol.dim {
        Dimension::Two => (2.0 * PI, 1),
        Dimension::Three => (1.0, 2),
    };
    let rule = GaussLegendre::new(NonZeroUsize::new(L2_NODES).unwrap());
    let h = (p.r2 - p.r0) / L2_PANELS as f64;
    let mut total = 0.0;
    for n in 0..sol.modes.len() {
        let weight: f64 = sol.data.row(n).iter().map(|c| c.norm_sqr()).sum();
        if weight == 0.0 {
            continue;
        }
        let mut failure = None;
        let mut radial = 0.0;
        for k in 0..L2_PANELS {
            let a = p.r0 + k as f64 * h;
            radial += rule.integrate(a, a + h, |r| match sol.radial_in_layer(n, 0, r) {
                Ok((u, _)) => u.norm_sqr() * r.powi(power),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            });
        }
        if let Some(e) = failure {
            return Err(e);
        }
        total += angular * weight * radial;
    }
    Ok((inner, outer, total.sqrt()))
}

/// `‖W‖_{H^{1/2}(∂B_{r₀})} / ‖φ(τ·)‖_{H^{−3/2}(∂B_1)}`.
pub fn inclusion_ratio(p: &InclusionProblem) -> Result<f64> {
    let (inner, _, _) = inclusion_gap_norms(p)?;
    let data = hs_norm(
        &rescale_density(&p.phi, 1.0)?,
        SobolevIndex::MINUS_THREE_HALVES,
    );
    if data == 0.0 {
        return Err(Error::InvalidInput("phi vanishes".into()));
    }
    Ok(inner / data)
}

/// Ordinary least squares on `(log₁₀ parameter, log₁₀ value)`.
pub fn fit_rate(samples: &[SweepSample]) -> Result<RateFit> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let mut points = Vec::with_capacity(samples.len());
    for s in samples {
        if !(s.parameter > 0.0 && s.value > 0.0 && s.parameter.is_finite() && s.value.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "cannot fit nonpositive sample ({}, {})",
                s.parameter, s.value
            )));
        }
        points.push((s.parameter.log10(), s.value.log10()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("all parameters are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points,
    })
}

/// `count` log-spaced values from `lo` to `hi`, endpoints included.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_cloak, solve_sound_hard_annulus};

    #[test]
    fn exact_power_law_fits_exactly() {
        let s: Vec<_> = [0.1, 0.05, 0.02]
            .iter()
            .map(|&x| SweepSample::new(x, 7.0 * x * x, 0))
            .collect();
        let f = fit_rate(&s).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_rate(&s[..2]).is_err());
        let mut bad = s.clone();
        bad[1].value = 0.0;
        assert!(fit_rate(&bad).is_err());
    }

    #[test]
    fn no_cloak_has_no_gap() {
        for dim in [Dimension::Two, Dimension::Three] {
            let mut c = CloakConfig::reference(dim, 0.05);
            c.no_cloak = true;
            let psi = default_probe(dim, 2.0).unwrap();
            assert!(trace_gap(&c, &psi).unwrap() <= 1e-10);
            assert_eq!(ntd_diff_opnorm(&c).unwrap(), 0.0);
        }
    }

    #[test]
    fn halving_rho_quarters_the_2d_gap() {
        let psi =
            ModalDensity::single_mode(Dimension::Two, 2.0, 0, 0, Complex64::new(1.0, 0.0)).unwrap();
        let c = CloakConfig::reference(Dimension::Two, 0.01);
        let g1 = trace_gap(&c, &psi).unwrap();
        let g2 = trace_gap(&c.with_rho(0.005), &psi).unwrap();
        assert!((g1 / g2 - 4.0).abs() < 0.2, "{}", g1 / g2);
    }

    #[test]
    fn sound_hard_gap_matches_trace_difference() {
        let dim = Dimension::Two;
        let c = CloakConfig::reference(dim, 0.1);
        let psi = default_probe(dim, 2.0).unwrap();
        let cloak = solve_cloak(&c, &psi).unwrap().trace(2.0).unwrap();
        let hard = solve_sound_hard_annulus(1.0, 2.0, 0.1, &psi, dim)
            .unwrap()
            .trace(2.0)
            .unwrap();
        let mut diff = hard.clone();
        for n in -8..=8i64 {
            diff.set_2d(n, hard.get_2d(n) - cloak.get_2d(n));
        }
        let direct = hs_norm(&diff, SobolevIndex::HALF);
        let g = sound_hard_gap(&c, &psi).unwrap();
        assert!((g - direct).abs() <= 1e-8 * g, "{g} vs {direct}");
    }

    #[test]
    fn sound_hard_conormal_is_zero() {
        let psi = default_probe(Dimension::Three, 2.0).unwrap();
        let sol = solve_sound_hard_annulus(1.0, 2.0, 0.1, &psi, Dimension::Three).unwrap();
        assert_eq!(
            solution_conormal_norm(&sol, SobolevIndex::MINUS_HALF).unwrap(),
            0.0
        );
        let c = CloakConfig::reference(Dimension::Three, 0.1);
        let cloak = solve_cloak(&c, &psi).unwrap();
        let a = solution_conormal_norm(&cloak, SobolevIndex::MINUS_HALF).unwrap();
        let b = conormal_norm(&c, &psi, SobolevIndex::MINUS_HALF).unwrap();
        assert!((a - b).abs() <= 1e-14 * b);
    }

    #[test]
    fn log_spacing_hits_endpoints() {
        let v = log_spaced(1e-3, 10f64.powf(-1.5), 8);
        assert_eq!(v.len(), 8);
        assert!((v[0] - 1e-3).abs() < 1e-18);
        assert!((v[7] - 10f64.powf(-1.5)).abs() < 1e-15);
    }
}
