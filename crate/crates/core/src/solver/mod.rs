//! Per-mode solution of the radial boundary-value problems: the layered cloak,
//! the free problem, the sound-hard annulus and the radiating small inclusion.
//!
//! Every problem is a stack of homogeneous shells. In a shell with constants
//! `(σ, q)` the mode-`n` radial factor is `α f_n(k r) + β g_n(k r)` with
//! `k = ω√(q/σ)`, where `f = J_n, g = H_n^{(1)}` in 2D and `f = j_n, g = h_n^{(1)}`
//! in 3D. Coefficients are stored per unit boundary datum and are independent
//! of the sign of `n` (2D) and of `m` (3D).

mod energy;
mod ladder;
mod oracle;

pub use energy::{energy_identity, EnergyBalance};
pub use ladder::{cloak_mode_transfer, ModeTransfer};
pub use oracle::{
    direct_mode_solve, radial_ode_oracle, CloakCoefficients, InnerCondition, RadialProblem,
    ORACLE_CONDITION_LIMIT,
};

pub(crate) use ladder::CloakLadder;

use crate::error::{Error, Result};
use crate::material::{check_neumann_eigenvalue, CloakConfig};
use crate::sobolev::ModalDensity;
use crate::specfun::{h1_quad, j_quad, ExpComplex, Family, Quad};
use crate::Dimension;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative size below which a per-mode denominator counts as singular.
pub const RESONANCE_THRESHOLD: f64 = 1e-14;

/// A homogeneous shell `inner < r < outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub inner: f64,
    pub outer: f64,
    pub sigma: f64,
    pub q: Complex64,
}

impl Layer {
    pub fn wavenumber(&self, omega: f64) -> Complex64 {
        omega * (self.q / self.sigma).sqrt()
    }

    /// `√σ √q`; the flux `σ ∂_r` of `f(kr)` is `ω · impedance · f'(kr)`.
    pub fn impedance(&self) -> Complex64 {
        self.sigma.sqrt() * self.q.sqrt()
    }

    pub fn same_medium(&self, other: &Layer) -> bool {
        self.sigma == other.sigma && self.q == other.q
    }
}

/// Coefficients of `f_n` and `g_n` in one shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCoefficients {
    pub regular: ExpComplex,
    pub outgoing: ExpComplex,
}

impl RadialCoefficients {
    pub const ZERO: Self = Self {
        regular: ExpComplex::ZERO,
        outgoing: ExpComplex::ZERO,
    };

    fn scale(&self, c: Complex64) -> Self {
        Self {
            regular: self.regular.scale(c),
            outgoing: self.outgoing.scale(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Cloak,
    Free,
    SoundHard,
    Inclusion,
}

/// Region-wise modal expansion of a solved problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredSolution {
    pub kind: ProblemKind,
    pub dim: Dimension,
    pub omega: f64,
    /// Innermost first.
    pub layers: Vec<Layer>,
    /// Boundary datum: Neumann data on the outer boundary, or on `∂B_τ` for an inclusion.
    pub data: ModalDensity,
    /// Per order, per layer, coefficients for a unit datum.
    pub modes: Vec<Vec<RadialCoefficients>>,
    /// Ladder quantities of the cloak problem, one per order.
    pub transfers: Vec<ModeTransfer>,
    pub config: Option<CloakConfig>,
}

pub(crate) fn pair(family: Family, n: usize, z: Complex64) -> Result<(Quad, Quad)> {
    Ok((j_quad(family, n, z)?, h1_quad(family, n, z)?))
}

/// `f_n(z) g_n'(z) − f_n'(z) g_n(z)`.
pub(crate) fn wronskian(family: Family, z: Complex64) -> Complex64 {
    match family {
        Family::Cylindrical => Complex64::new(0.0, 2.0) / (PI * z),
        Family::Spherical => Complex64::i() / (z * z),
    }
}

fn check_data(data: &ModalDensity, dim: Dimension, radius: f64, what: &str) -> Result<()> {
    if data.dimension() != dim {
        return Err(Error::InvalidInput(format!(
            "{what} has the wrong dimension"
        )));
    }
    if (data.radius() - radius).abs() > 1e-12 * radius {
        return Err(Error::InvalidInput(format!(
            "{what} lives on radius {}, expected {radius}",
            data.radius()
        )));
    }
    Ok(())
}

/// Solves the virtual-domain cloak problem with Neumann data `ψ` on `∂B_R`.
pub fn solve_cloak(c: &CloakConfig, psi: &ModalDensity) -> Result<LayeredSolution> {
    c.validate()?;
    check_data(psi, c.dim, c.radius, "psi")?;
    let ladder = CloakLadder::new(c);
    let mut modes = Vec::with_capacity(psi.n_max() + 1);
    let mut transfers = Vec::with_capacity(psi.n_max() + 1);
    for n in 0..psi.rows().len() {
        let detail = ladder.mode(n)?;
        modes.push(detail.coefficients.to_vec());
        transfers.push(detail.transfer);
    }
    Ok(LayeredSolution {
        kind: ProblemKind::Cloak,
        dim: c.dim,
        omega: c.omega,
        layers: ladder.layers().to_vec(),
        data: psi.clone(),
        modes,
        transfers,
        config: Some(*c),
    })
}

/// Free problem `Δu + ω²u = 0` in `B_R`, `∂_ν u = ψ`.
pub fn solve_free(
    omega: f64,
    radius: f64,
    psi: &ModalDensity,
    dim: Dimension,
) -> Result<LayeredSolution> {
    check_positive(&[("omega", omega), ("R", radius)])?;
    check_data(psi, dim, radius, "psi")?;
    check_neumann_eigenvalue(dim, omega * radius)?;
    let family = dim.family();
    let z = Complex64::new(omega * radius, 0.0);
    let modes = (0..psi.rows().len())
        .map(|n| {
            let jr = j_quad(family, n, z)?;
            Ok(vec![RadialCoefficients {
                regular: jr.deriv.scale(Complex64::from(omega)).recip(),
                outgoing: ExpComplex::ZERO,
            }])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LayeredSolution {
        kind: ProblemKind::Free,
        dim,
        omega,
        layers: vec![background(0.0, radius)],
        data: psi.clone(),
        modes,
        transfers: Vec::new(),
        config: None,
    })
}

fn background(inner: f64, outer: f64) -> Layer {
    Layer {
        inner,
        outer,
        sigma: 1.0,
        q: Complex64::new(1.0, 0.0),
    }
}

fn check_positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidInput(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    Ok(())
}

/// Per-order sound-hard annulus quantities for a unit datum.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SoundHardMode {
    pub reflection: ExpComplex,
    pub denominator: ExpComplex,
}

pub(crate) fn sound_hard_mode(
    family: Family,
    omega: f64,
    radius: f64,
    rho: f64,
    n: usize,
) -> Result<SoundHardMode> {
    let (je, he) = pair(family, n, Complex64::new(omega * rho, 0.0))?;
    let (jr, hr) = pair(family, n, Complex64::new(omega * radius, 0.0))?;
    let reflection = -(je.deriv / he.deriv);
    let tail = reflection * hr.deriv;
    let denominator = jr.deriv + tail;
    let scale = jr.deriv.ln_abs().max(tail.ln_abs());
    if denominator.ln_abs() - scale < RESONANCE_THRESHOLD.ln() {
        return Err(Error::NearResonance {
            mode: n,
            detail: "annulus Neumann system is singular".into(),
        });
    }
    Ok(SoundHardMode {
        reflection,
        denominator,
    })
}

/// Neumann annulus `ρ < |x| < R`: `∂_ν u = 0` on `∂B_ρ`, `∂_ν u = ψ` on `∂B_R`.
pub fn solve_sound_hard_annulus(
    omega: f64,
    radius: f64,
    rho: f64,
    psi: &ModalDensity,
    dim: Dimension,
) -> Result<LayeredSolution> {
    check_positive(&[("omega", omega), ("R", radius), ("rho", rho)])?;
    if rho >= radius {
        return Err(Error::InvalidInput(format!(
            "rho = {rho} must be below R = {radius}"
        )));
    }
    check_data(psi, dim, radius, "psi")?;
    check_neumann_eigenvalue(dim, omega * radius)?;
    let family = dim.family();
    let modes = (0..psi.rows().len())
        .map(|n| {
            let m = sound_hard_mode(family, omega, radius, rho, n)?;
            let a = m.denominator.scale(Complex64::from(omega)).recip();
            Ok(vec![RadialCoefficients {
                regular: a,
                outgoing: a * m.reflection,
            }])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LayeredSolution {
        kind: ProblemKind::SoundHard,
        dim,
        omega,
        layers: vec![background(rho, radius)],
        data: psi.clone(),
        modes,
        transfers: Vec::new(),
        config: None,
    })
}

/// Exterior radiating problem with Neumann data `φ` on `∂B_τ`, observed on `∂B_{r₀}`, `∂B_{r₂}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionProblem {
    pub omega: f64,
    pub tau: f64,
    pub phi: ModalDensity,
    pub r0: f64,
    pub r2: f64,
}

impl InclusionProblem {
    pub fn validate(&self) -> Result<()> {
        check_positive(&[
            ("omega", self.omega),
            ("tau", self.tau),
            ("r0", self.r0),
            ("r2", self.r2),
        ])?;
        if self.tau >= self.r0 / 4.0 {
            return Err(Error::InvalidInput(format!(
                "tau = {} must be below r0/4 = {}",
                self.tau,
                self.r0 / 4.0
            )));
        }
        if self.r2 <= self.r0 {
            return Err(Error::InvalidInput("r2 must exceed r0".into()));
        }
        check_data(&self.phi, self.phi.dimension(), self.tau, "phi")
    }
}

/// `W = Σ a_n g_n(ω|x|)` with `a_n = φ_n / (ω g_n'(ωτ))`.
pub fn small_inclusion_field(p: &InclusionProblem) -> Result<LayeredSolution> {
    p.validate()?;
    let dim = p.phi.dimension();
    let family = dim.family();
    let z = Complex64::new(p.omega * p.tau, 0.0);
    let modes = (0..p.phi.rows().len())
        .map(|n| {
            let h = h1_quad(family, n, z)?;
            Ok(vec![RadialCoefficients {
                regular: ExpComplex::ZERO,
                outgoing: h.deriv.scale(Complex64::from(p.omega)).recip(),
            }])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LayeredSolution {
        kind: ProblemKind::Inclusion,
        dim,
        omega: p.omega,
        layers: vec![background(p.tau, f64::INFINITY)],
        data: p.phi.clone(),
        modes,
        transfers: Vec::new(),
        config: None,
    })
}

/// Named cloak coefficients `u_a = e f`, `u_l = c f + d g`, `u_R = a f + b g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloakModeCoefficients {
    pub a: ExpComplex,
    pub b: ExpComplex,
    pub c: ExpComplex,
    pub d: ExpComplex,
    pub e: ExpComplex,
}

impl LayeredSolution {
    pub fn n_max(&self) -> usize {
        self.modes.len().saturating_sub(1)
    }

    pub fn family(&self) -> Family {
        self.dim.family()
    }

    pub fn inner_radius(&self) -> f64 {
        self.layers[0].inner
    }

    pub fn outer_radius(&self) -> f64 {
        self.layers[self.layers.len() - 1].outer
    }

    /// Unit-datum coefficients of order `n`, one entry per layer.
    pub fn unit_coefficients(&self, n: usize) -> &[RadialCoefficients] {
        &self.modes[n]
    }

    /// Coefficients for the `entry`-th datum coefficient of order `n`.
    pub fn coefficients(&self, n: usize, entry: usize) -> Vec<RadialCoefficients> {
        let psi = self.data.row(n)[entry];
        self.modes[n].iter().map(|c| c.scale(psi)).collect()
    }

    /// `(a, b, c, d, e)` of a cloak solution for one datum coefficient.
    pub fn cloak_coefficients(&self, n: usize, entry: usize) -> Option<CloakModeCoefficients> {
        if self.kind != ProblemKind::Cloak {
            return None;
        }
        let k = self.coefficients(n, entry);
        Some(CloakModeCoefficients {
            e: k[0].regular,
            c: k[1].regular,
            d: k[1].outgoing,
            a: k[2].regular,
            b: k[2].outgoing,
        })
    }

    fn layer_index(&self, r: f64) -> Result<usize> {
        let tol = 1e-12 * self.outer_radius().clamp(1.0, 1e12);
        if !(r.is_finite() && r >= self.inner_radius() - tol && r <= self.outer_radius() + tol) {
            return Err(Error::Domain(format!(
                "r = {r} outside [{}, {}]",
                self.inner_radius(),
                self.outer_radius()
            )));
        }
        Ok(self
            .layers
            .iter()
            .position(|l| r <= l.outer)
            .unwrap_or(self.layers.len() - 1))
    }

    /// Radial factor and flux `σ ∂_r` of order `n` for a unit datum, evaluated in layer `idx`.
    pub fn radial_in_layer(&self, n: usize, idx: usize, r: f64) -> Result<(Complex64, Complex64)> {
        let layer = &self.layers[idx];
        let coef = &self.modes[n][idx];
        let k = layer.wavenumber(self.omega);
        let z = k * r;
        let family = self.family();
        let mut value = ExpComplex::ZERO;
        let mut deriv = ExpComplex::ZERO;
        if !coef.regular.is_zero() {
            let f = j_quad(family, n, z)?;
            value = value + coef.regular * f.value;
            deriv = deriv + coef.regular * f.deriv;
        }
        if !coef.outgoing.is_zero() {
            let g = h1_quad(family, n, z)?;
            value = value + coef.outgoing * g.value;
            deriv = deriv + coef.outgoing * g.deriv;
        }
        let flux = deriv.scale(k * layer.sigma);
        Ok((value.to_complex(), flux.to_complex()))
    }

    /// Radial factor of order `n` at radius `r` for a unit datum.
    pub fn radial(&self, n: usize, r: f64) -> Result<Complex64> {
        let idx = self.layer_index(r)?;
        Ok(self.radial_in_layer(n, idx, r)?.0)
    }

    /// The trace of the field on `∂B_r` as a density on that sphere.
    pub fn trace(&self, r: f64) -> Result<ModalDensity> {
        let idx = self.layer_index(r)?;
        let values = (0..self.modes.len())
            .map(|n| Ok(self.radial_in_layer(n, idx, r)?.0))
            .collect::<Result<Vec<_>>>()?;
        let mut out = crate::sobolev::rescale_density(&self.data, r)?;
        out = out.scale_orders(|n| values[n]);
        Ok(out)
    }

    /// Field value at a Cartesian point.
    pub fn field_eval(&self, point: &[f64]) -> Result<Complex64> {
        let expected = self.dim.as_usize();
        if point.len() != expected || point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "expected a finite {expected}-vector"
            )));
        }
        let r = point.iter().map(|v| v * v).sum::<f64>().sqrt();
        let idx = self.layer_index(r)?;
        let (theta, phi) = match self.dim {
            Dimension::Two => (point[1].atan2(point[0]), 0.0),
            Dimension::Three => {
                let t = if r > 0.0 {
                    (point[2] / r).clamp(-1.0, 1.0).acos()
                } else {
                    0.0
                };
                (t, point[1].atan2(point[0]))
            }
        };
        let radial = (0..self.modes.len())
            .map(|n| Ok(self.radial_in_layer(n, idx, r)?.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.data.scale_orders(|n| radial[n]).eval(theta, phi))
    }
}
