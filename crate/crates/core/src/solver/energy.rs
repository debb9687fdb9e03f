use super::{LayeredSolution, ProblemKind};
use crate::error::{Error, Result};
use crate::Dimension;
use gkquad::single::{integral_with_config, IntegrationConfig};
use gkquad::Tolerance;
use std::f64::consts::PI;

/// Both sides of the absorption identity
/// `βω² ∫_{B_ρ∖B_{ρ/2}} |u|² dx = −Im ∫_{∂B_R} ψ ū dσ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    pub absorbed: f64,
    pub boundary_flux: f64,
    pub relative_residual: f64,
}

const PANEL_TOLERANCE: f64 = 1e-12;

/// Evaluates the absorption identity of a cloak solution, mode by mode.
pub fn energy_identity(sol: &LayeredSolution) -> Result<EnergyBalance> {
    if sol.kind != ProblemKind::Cloak {
        return Err(Error::InvalidInput(
            "energy identity needs a cloak solution".into(),
        ));
    }
    let lossy = sol.layers[1];
    let beta = lossy.q.im;
    let omega = sol.omega;
    let radius = sol.outer_radius();
    let (angular, surface, power) = match sol.dim {
        Dimension::Two => (2.0 * PI, 2.0 * PI * radius, 1),
        Dimension::Three => (1.0, radius * radius, 2),
    };
    let k = lossy.wavenumber(omega);
    let width = lossy.outer - lossy.inner;
    let panels = ((k.norm() * width).ceil() as usize).clamp(4, 4000);
    let h = width / panels as f64;

    let mut absorbed = 0.0;
    let mut flux = 0.0;
    for n in 0..sol.modes.len() {
        let weight: f64 = sol.data.row(n).iter().map(|c| c.norm_sqr()).sum();
        if weight == 0.0 {
            continue;
        }
        let d = sol.radial_in_layer(n, 2, radius)?.0;
        flux += weight * surface * d.im;
        if beta == 0.0 {
            continue;
        }
        let mut radial = 0.0;
        for p in 0..panels {
            let a = lossy.inner + p as f64 * h;
            let b = if p + 1 == panels { lossy.outer } else { a + h };
            let mut failure = None;
            let integrand = |r: f64| match sol.radial_in_layer(n, 1, r) {
                Ok((u, _)) => u.norm_sqr() * r.powi(power),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
            let mut config = IntegrationConfig::default();
            config.tolerance = Tolerance::Relative(PANEL_TOLERANCE);
            config.max_iters = 200;
            let value = integral_with_config(integrand, a..b, config)
                .estimate()
                .map_err(|e| Error::AccuracyLoss {
                    estimate: PANEL_TOLERANCE,
                    context: format!("radial quadrature of mode {n}: {e}"),
                })?;
            if let Some(e) = failure {
                return Err(e);
            }
            radial += value;
        }
        absorbed += beta * omega * omega * angular * weight * radial;
    }
    let scale = absorbed.abs().max(flux.abs());
    let relative_residual = if scale == 0.0 {
        0.0
    } else {
        (absorbed - flux).abs() / scale
    };
    Ok(EnergyBalance {
        absorbed,
        boundary_flux: flux,
        relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::CloakConfig;
    use crate::sobolev::ModalDensity;
    use crate::solver::solve_cloak;
    use num_complex::Complex64;

    #[test]
    fn lossless_lining_gives_no_absorption() {
        let mut c = CloakConfig::reference(Dimension::Two, 0.05);
        c.no_cloak = true;
        let psi =
            ModalDensity::single_mode(Dimension::Two, 2.0, 1, 0, Complex64::new(1.0, 0.0)).unwrap();
        let sol = solve_cloak(&c, &psi).unwrap();
        let e = energy_identity(&sol).unwrap();
        assert_eq!(e.absorbed, 0.0);
        assert!(e.boundary_flux.abs() < 1e-14);
    }
}
