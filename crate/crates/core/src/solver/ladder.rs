//! The modal transfer ladder `Υ_n → ℋ_n → Γ_n → d_n` of the three-region cloak.
//!
//! Every quantity is formed from exponent-carrying values and Wronskians, so
//! nothing overflows when the lossy-layer argument has a huge imaginary part,
//! and the small differences `d_n − d_n⁰` and `Γ_s − Γ_n` come out without
//! subtractive cancellation.

use super::{pair, wronskian, Layer, RadialCoefficients, RESONANCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::material::{CloakConfig, DerivedParams};
use crate::specfun::{j_quad, log_deriv_j, BesselQuery, ExpComplex, Family};
use num_complex::Complex64;

/// Ladder quantities of one order for a unit Neumann datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTransfer {
    pub n: usize,
    /// Inner-interface ratio `d_n / c_n`.
    pub upsilon: ExpComplex,
    /// Aggregate logarithmic derivative of the lining solution at `r = ρ`.
    pub h_cal: Complex64,
    /// Exterior ratio `b_n / a_n`.
    pub gamma: ExpComplex,
    /// Boundary trace per unit datum.
    pub ntd: Complex64,
    /// Free-space boundary trace per unit datum.
    pub ntd_free: Complex64,
    /// `(d_n − d_n⁰) / d_n⁰`.
    pub trace_gap: Complex64,
    /// `d_n − d_n⁰`.
    pub gap: Complex64,
    /// Conormal derivative at `∂B_ρ` divided by `ω`, per unit datum.
    pub conormal: Complex64,
    /// The core argument sits on a zero of the regular function.
    pub pole_branch: bool,
}

/// Everything the metrics need from one order.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModeDetail {
    pub transfer: ModeTransfer,
    /// Core, lining, exterior.
    pub coefficients: [RadialCoefficients; 3],
    /// `Z_l ℋ_n`.
    pub kappa: Complex64,
    /// `κ g(ωρ) − g'(ωρ)`.
    pub den_e: ExpComplex,
    /// `f'(ωR) + Γ g'(ωR)`.
    pub denom: ExpComplex,
    pub hp_e: ExpComplex,
    pub w_e: Complex64,
    pub w_r: Complex64,
}

pub(crate) struct CloakLadder {
    family: Family,
    omega: f64,
    rho: f64,
    radius: f64,
    layers: [Layer; 3],
    contrast: Complex64,
    impedance_l: Complex64,
    impedance_a: Complex64,
}

impl CloakLadder {
    pub fn new(c: &CloakConfig) -> Self {
        let p: DerivedParams = c.derived();
        let (core, lossy) = if c.no_cloak {
            let one = Complex64::new(1.0, 0.0);
            ((1.0, one), (1.0, one))
        } else {
            ((p.sigma_a, Complex64::new(p.q_a, 0.0)), (p.sigma_l, p.q_l))
        };
        let layers = [
            Layer {
                inner: 0.0,
                outer: c.rho / 2.0,
                sigma: core.0,
                q: core.1,
            },
            Layer {
                inner: c.rho / 2.0,
                outer: c.rho,
                sigma: lossy.0,
                q: lossy.1,
            },
            Layer {
                inner: c.rho,
                outer: c.radius,
                sigma: 1.0,
                q: Complex64::new(1.0, 0.0),
            },
        ];
        let impedance_a = layers[0].impedance();
        let impedance_l = layers[1].impedance();
        Self {
            family: c.dim.family(),
            omega: c.omega,
            rho: c.rho,
            radius: c.radius,
            layers,
            contrast: impedance_a / impedance_l,
            impedance_l,
            impedance_a,
        }
    }

    pub fn layers(&self) -> &[Layer; 3] {
        &self.layers
    }

    pub fn mode(&self, n: usize) -> Result<ModeDetail> {
        let family = self.family;
        let omega = Complex64::from(self.omega);
        let [core, lossy, exterior] = self.layers;
        let k_a = core.wavenumber(self.omega);
        let k_l = lossy.wavenumber(self.omega);
        let z_a = k_a * (self.rho / 2.0);
        let z2 = k_l * (self.rho / 2.0);
        let z1 = k_l * self.rho;
        let z_e = Complex64::new(self.omega * self.rho, 0.0);
        let z_r = Complex64::new(self.omega * self.radius, 0.0);
        let same_inner = core.same_medium(&lossy);
        let same_outer = lossy.same_medium(&exterior);

        // Inner interface r = ρ/2.
        let (j2, h2) = pair(family, n, z2)?;
        let w2 = wronskian(family, z2);
        let mut pole_branch = false;
        let (upsilon, core_to_lining) = if same_inner {
            (ExpComplex::ZERO, InnerLink::Same)
        } else {
            let query = match family {
                Family::Cylindrical => BesselQuery::cylindrical(n as i64, z_a),
                Family::Spherical => BesselQuery::spherical(n as i64, z_a),
            };
            match log_deriv_j(&query) {
                Ok(f_a) => {
                    let af = self.contrast * f_a;
                    let num = j2.deriv - j2.value.scale(af);
                    let den2 = h2.deriv - h2.value.scale(af);
                    (-(num / den2), InnerLink::Regular { den2 })
                }
                Err(Error::PoleProximity { .. }) => {
                    pole_branch = true;
                    (-(j2.value / h2.value), InnerLink::Pole { h2: h2.value })
                }
                Err(e) => return Err(e),
            }
        };

        // Lining at r = ρ.
        let (j1, h1) = pair(family, n, z1)?;
        let lining_value = j1.value + upsilon * h1.value;
        let lining_deriv = j1.deriv + upsilon * h1.deriv;
        let h_cal = (lining_deriv / lining_value).to_complex();
        let kappa = self.impedance_l * h_cal;

        // Exterior.
        let (je, he) = pair(family, n, z_e)?;
        let (jr, hr) = pair(family, n, z_r)?;
        let w_e = wronskian(family, z_e);
        let w_r = wronskian(family, z_r);
        let den_e = he.value.scale(kappa) - he.deriv;
        let transparent = same_outer && upsilon.is_zero();
        let gamma = if transparent {
            ExpComplex::ZERO
        } else {
            -((je.value.scale(kappa) - je.deriv) / den_e)
        };
        let tail = gamma * hr.deriv;
        let denom = jr.deriv + tail;
        if denom.is_zero()
            || denom.ln_abs() - jr.deriv.ln_abs().max(tail.ln_abs()) < RESONANCE_THRESHOLD.ln()
        {
            return Err(Error::NearResonance {
                mode: n,
                detail: "denominator of the boundary trace vanishes".into(),
            });
        }
        let omega_denom = denom.scale(omega);
        let a = omega_denom.recip();
        let b = gamma * a;
        let ntd = ((jr.value + gamma * hr.value) / omega_denom).to_complex();
        let ntd_free = (jr.value / jr.deriv.scale(omega)).to_complex();
        let gap = if gamma.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            (-(gamma.scale(w_r) / (jr.deriv * omega_denom))).to_complex()
        };
        let trace_gap = if gamma.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            (-(gamma.scale(w_r) / (jr.value * denom))).to_complex()
        };

        // Trace at r = ρ and back-substitution into the lining and core.
        let u_rho = if transparent {
            je.value / omega_denom
        } else {
            ExpComplex::from_complex(-w_e) / (den_e * omega_denom)
        };
        let conormal = (u_rho.scale(kappa)).to_complex();
        let c = u_rho / lining_value;
        let d = upsilon * c;
        let e = match core_to_lining {
            InnerLink::Same => c,
            InnerLink::Regular { den2 } => {
                let ja = j_quad(family, n, z_a)?;
                c.scale(w2) / (den2 * ja.value)
            }
            InnerLink::Pole { h2 } => {
                let ja = j_quad(family, n, z_a)?;
                c.scale(-self.impedance_l * w2) / (h2 * ja.deriv.scale(self.impedance_a))
            }
        };

        Ok(ModeDetail {
            transfer: ModeTransfer {
                n,
                upsilon,
                h_cal,
                gamma,
                ntd,
                ntd_free,
                trace_gap,
                gap,
                conormal,
                pole_branch,
            },
            coefficients: [
                RadialCoefficients {
                    regular: e,
                    outgoing: ExpComplex::ZERO,
                },
                RadialCoefficients {
                    regular: c,
                    outgoing: d,
                },
                RadialCoefficients {
                    regular: a,
                    outgoing: b,
                },
            ],
            kappa,
            den_e,
            denom,
            hp_e: he.deriv,
            w_e,
            w_r,
        })
    }
}

enum InnerLink {
    Same,
    Regular { den2: ExpComplex },
    Pole { h2: ExpComplex },
}

/// Ladder quantities of order `n` for the cloak described by `c`.
pub fn cloak_mode_transfer(c: &CloakConfig, n: usize) -> Result<ModeTransfer> {
    c.validate()?;
    Ok(CloakLadder::new(c).mode(n)?.transfer)
}
